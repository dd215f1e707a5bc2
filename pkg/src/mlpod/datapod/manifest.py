"""Dataset manifest sanity checks (scan/slice count arithmetic)."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class DatasetManifest:
    name: str = ""
    covid_scans: int = 0
    non_covid_scans: int = 0
    covid_slices: int = 0
    non_covid_slices: int = 0
    total_scans: int | None = None

    def __post_init__(self):
        for field_name in ("covid_scans", "non_covid_scans", "covid_slices", "non_covid_slices"):
            if getattr(self, field_name) < 0:
                raise ValueError(f"{field_name} must be >= 0")


def validate_manifest(m: DatasetManifest) -> dict:
    issues: list[str] = []
    total = m.covid_scans + m.non_covid_scans
    if m.total_scans is not None and m.total_scans != total:
        issues.append(f"declared total {m.total_scans} != {m.covid_scans} + {m.non_covid_scans}")
    if m.covid_slices < m.covid_scans:
        issues.append("covid slices fewer than scans")
    if m.non_covid_slices < m.non_covid_scans:
        issues.append("non-covid slices fewer than scans")
    return {
        "ok": not issues,
        "issues": issues,
        "total_scans": total,
        "total_slices": m.covid_slices + m.non_covid_slices,
    }
