"""Scan exchange format: a directory of anonymized DICOM files, slices ordered
by ascending InstanceNumber (0020,0013), falling back to filename order."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..dicomkit.model import DicomTag, PIXEL_DATA
from ..dicomkit.parse import parse_dicom
from .stub import ScanInput

ROWS = DicomTag(0x0028, 0x0010)
COLS = DicomTag(0x0028, 0x0011)
INSTANCE_NUMBER = DicomTag(0x0020, 0x0013)
PATIENT_ID = DicomTag(0x0010, 0x0020)


def read_scan(directory: str | Path) -> tuple[ScanInput, dict]:
    """Load a DICOM series into a ScanInput; returns (scan, metadata)."""
    paths = sorted(Path(directory).glob("*.dcm"))
    if not paths:
        raise ValueError(f"no DICOM files in {directory}")
    entries = []
    meta: dict = {}
    for order, path in enumerate(paths):
        obj = parse_dicom(path.read_bytes())
        rows_el, cols_el, pix_el = obj.find(ROWS), obj.find(COLS), obj.find(PIXEL_DATA)
        if rows_el is None or cols_el is None or pix_el is None:
            raise ValueError(f"{path.name}: missing Rows/Columns/PixelData")
        rows = int.from_bytes(rows_el.value, "little")
        cols = int.from_bytes(cols_el.value, "little")
        pixels = np.frombuffer(pix_el.value, dtype="<u2").reshape(rows, cols)
        inst_el = obj.find(INSTANCE_NUMBER)
        try:
            key = (0, int(inst_el.text())) if inst_el is not None else (1, order)
        except ValueError:
            key = (1, order)
        entries.append((key, order, pixels))
        pid = obj.find(PATIENT_ID)
        if pid is not None and "patient_pseudo_id" not in meta:
            meta["patient_pseudo_id"] = pid.text()
    entries.sort(key=lambda t: (t[0], t[1]))
    return ScanInput(slices=[e[2] for e in entries]), meta
