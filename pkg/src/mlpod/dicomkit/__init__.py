from .model import (
    PIXEL_DATA,
    DicomElement,
    DicomObject,
    DicomTag,
    SequenceItem,
    TS_EXPLICIT_LE,
    TS_IMPLICIT_LE,
)
from .parse import DicomParseError, DicomSerializeError, parse_dicom, serialize_dicom
from .anonymize import (
    AnonymizationProfile,
    ProfileError,
    PseudonymMap,
    anonymize,
    default_profile,
    load_profile,
    remap_uid,
)

__all__ = [
    "PIXEL_DATA",
    "DicomElement",
    "DicomObject",
    "DicomTag",
    "SequenceItem",
    "TS_EXPLICIT_LE",
    "TS_IMPLICIT_LE",
    "DicomParseError",
    "DicomSerializeError",
    "parse_dicom",
    "serialize_dicom",
    "AnonymizationProfile",
    "ProfileError",
    "PseudonymMap",
    "anonymize",
    "default_profile",
    "load_profile",
    "remap_uid",
]
