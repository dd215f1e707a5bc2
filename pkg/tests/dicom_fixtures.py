"""Builders for synthetic DICOM Part-10 fixtures used across the test suite."""

from __future__ import annotations

import numpy as np

from mlpod.dicomkit.model import (
    DicomElement,
    DicomObject,
    DicomTag,
    SequenceItem,
    TS_EXPLICIT_LE,
    pad_value,
)
from mlpod.dicomkit.parse import serialize_dicom


def text_element(tag: tuple[int, int], vr: str, text: str) -> DicomElement:
    return DicomElement(tag=DicomTag(*tag), vr=vr, value=pad_value(vr, text.encode("ascii")))


def us_element(tag: tuple[int, int], value: int) -> DicomElement:
    return DicomElement(tag=DicomTag(*tag), vr="US", value=value.to_bytes(2, "little"))


def meta_for(ts: str = TS_EXPLICIT_LE) -> list[DicomElement]:
    return [text_element((0x0002, 0x0010), "UI", ts)]


def make_ct_slice(
    patient_name: str = "DOE^JOHN",
    patient_id: str = "12345",
    instance_number: int = 1,
    rows: int = 4,
    cols: int = 4,
    pixels: np.ndarray | None = None,
    study_uid: str = "1.2.3.4",
    series_uid: str = "1.2.3.4.5",
    sop_uid: str = "1.2.3.4.5.6",
    ts: str = TS_EXPLICIT_LE,
    with_sequence: bool = True,
) -> DicomObject:
    if pixels is None:
        rng = np.random.default_rng(instance_number)
        pixels = rng.integers(0, 500, size=(rows, cols), dtype=np.uint16)
    dataset = [
        text_element((0x0008, 0x0018), "UI", sop_uid),
        text_element((0x0008, 0x0050), "SH", "ACC-001"),
        text_element((0x0008, 0x0080), "LO", "General Hospital"),
        text_element((0x0008, 0x0090), "PN", "REF^DOC"),
        text_element((0x0010, 0x0010), "PN", patient_name),
        text_element((0x0010, 0x0020), "LO", patient_id),
        text_element((0x0010, 0x0030), "DA", "19700101"),
        text_element((0x0010, 0x1000), "LO", "ALT-" + patient_id),
    ]
    if with_sequence:
        dataset.append(
            DicomElement(
                tag=DicomTag(0x0010, 0x1002),
                vr="SQ",
                items=[
                    SequenceItem(
                        elements=[
                            text_element((0x0010, 0x0010), "PN", patient_name),
                            text_element((0x0010, 0x0020), "LO", patient_id),
                        ]
                    )
                ],
            )
        )
    dataset += [
        text_element((0x0010, 0x1040), "LO", "1 Main Street"),
        text_element((0x0020, 0x000D), "UI", study_uid),
        text_element((0x0020, 0x000E), "UI", series_uid),
        text_element((0x0020, 0x0013), "IS", str(instance_number)),
        us_element((0x0028, 0x0010), pixels.shape[0]),
        us_element((0x0028, 0x0011), pixels.shape[1]),
        DicomElement(
            tag=DicomTag(0x7FE0, 0x0010),
            vr="OW",
            value=pixels.astype("<u2").tobytes(),
        ),
    ]
    return DicomObject(preamble=b"\x00" * 128, meta=meta_for(ts), dataset=dataset, transfer_syntax=ts)


def make_series_files(
    directory,
    n_slices: int = 4,
    patient_name: str = "DOE^JOHN",
    patient_id: str = "12345",
    rows: int = 4,
    cols: int = 4,
    **kwargs,
):
    """Write an n-slice series to a directory; returns the file paths."""
    paths = []
    for i in range(1, n_slices + 1):
        obj = make_ct_slice(
            patient_name=patient_name,
            patient_id=patient_id,
            instance_number=i,
            rows=rows,
            cols=cols,
            sop_uid=f"1.2.3.4.5.6.{i}",
            **kwargs,
        )
        path = directory / f"slice{i:03d}.dcm"
        path.write_bytes(serialize_dicom(obj))
        paths.append(path)
    return paths
