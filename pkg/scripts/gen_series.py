#!/usr/bin/env python3
"""Generate a synthetic CT DICOM series populated with placeholder PHI.

Useful for exercising the anonymizer and the full pipeline without any real
patient data.
"""

import argparse
from pathlib import Path

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


def text(tag, vr, value):
    return DicomElement(tag=DicomTag(*tag), vr=vr, value=pad_value(vr, value.encode("ascii")))


def build_slice(args, index, pixels):
    dataset = [
        text((0x0008, 0x0018), "UI", f"{args.series_uid}.{index}"),
        text((0x0008, 0x0050), "SH", f"ACC-{index:04d}"),
        text((0x0008, 0x0080), "LO", "General Hospital"),
        text((0x0008, 0x0090), "PN", "REF^DOC"),
        text((0x0010, 0x0010), "PN", args.patient_name),
        text((0x0010, 0x0020), "LO", args.patient_id),
        text((0x0010, 0x0030), "DA", "19700101"),
        text((0x0010, 0x1000), "LO", f"ALT-{args.patient_id}"),
        DicomElement(
            tag=DicomTag(0x0010, 0x1002),
            vr="SQ",
            items=[
                SequenceItem(
                    elements=[
                        text((0x0010, 0x0010), "PN", args.patient_name),
                        text((0x0010, 0x0020), "LO", args.patient_id),
                    ]
                )
            ],
        ),
        text((0x0010, 0x1040), "LO", "1 Main Street"),
        text((0x0020, 0x000D), "UI", args.study_uid),
        text((0x0020, 0x000E), "UI", args.series_uid),
        text((0x0020, 0x0013), "IS", str(index)),
        DicomElement(tag=DicomTag(0x0028, 0x0010), vr="US", value=args.size.to_bytes(2, "little")),
        DicomElement(tag=DicomTag(0x0028, 0x0011), vr="US", value=args.size.to_bytes(2, "little")),
        DicomElement(tag=DicomTag(0x7FE0, 0x0010), vr="OW", value=pixels.astype("<u2").tobytes()),
    ]
    meta = [text((0x0002, 0x0010), "UI", TS_EXPLICIT_LE)]
    return DicomObject(
        preamble=b"\x00" * 128, meta=meta, dataset=dataset, transfer_syntax=TS_EXPLICIT_LE
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory for the series")
    parser.add_argument("--slices", type=int, default=16)
    parser.add_argument("--size", type=int, default=32, help="square slice edge in pixels")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--patient-name", default="DOE^JANE")
    parser.add_argument("--patient-id", default="MRN00042")
    parser.add_argument("--study-uid", default="1.2.826.0.1.99.1")
    parser.add_argument("--series-uid", default="1.2.826.0.1.99.1.1")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    for i in range(1, args.slices + 1):
        pixels = rng.integers(0, 1200, size=(args.size, args.size), dtype=np.uint16)
        path = out / f"slice{i:03d}.dcm"
        path.write_bytes(serialize_dicom(build_slice(args, i, pixels)))
    print(f"wrote {args.slices} slices to {out}")


if __name__ == "__main__":
    main()
