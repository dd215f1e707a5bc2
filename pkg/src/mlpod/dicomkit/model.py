"""In-memory DICOM Part-10 structures (little-endian transfer syntaxes only)."""

from __future__ import annotations

from dataclasses import dataclass, field

TS_IMPLICIT_LE = "1.2.840.10008.1.2"
TS_EXPLICIT_LE = "1.2.840.10008.1.2.1"
SUPPORTED_TRANSFER_SYNTAXES = (TS_IMPLICIT_LE, TS_EXPLICIT_LE)

SUPPORTED_VRS = frozenset(
    {"PN", "LO", "SH", "DA", "TM", "UI", "US", "UL", "CS", "DS", "IS", "OB", "OW", "SQ", "UN"}
)
# Explicit-VR codes written with a 2-byte reserved field and 4-byte length.
LONG_FORM_VRS = frozenset({"OB", "OW", "SQ", "UN"})
# String-like VRs padded to even length with a trailing space; UI pads with NUL.
TEXT_VRS = frozenset({"PN", "LO", "SH", "DA", "TM", "CS", "DS", "IS"})

UNDEFINED_LENGTH = 0xFFFFFFFF


@dataclass(frozen=True, order=True)
class DicomTag:
    group: int
    element: int

    def __str__(self) -> str:
        return f"({self.group:04X},{self.element:04X})"

    @classmethod
    def parse(cls, text: str) -> "DicomTag":
        text = text.strip().strip("()")
        g, _, e = text.partition(",")
        return cls(int(g, 16), int(e, 16))


ITEM = DicomTag(0xFFFE, 0xE000)
ITEM_DELIM = DicomTag(0xFFFE, 0xE00D)
SEQ_DELIM = DicomTag(0xFFFE, 0xE0DD)
PIXEL_DATA = DicomTag(0x7FE0, 0x0010)
TRANSFER_SYNTAX_UID = DicomTag(0x0002, 0x0010)

# Minimal tag -> VR dictionary for implicit-VR parsing. Unknown tags fall
# back to UN; sequences must be listed here (or use undefined length).
TAG_VR: dict[DicomTag, str] = {
    DicomTag(0x0002, 0x0001): "OB",
    DicomTag(0x0002, 0x0002): "UI",
    DicomTag(0x0002, 0x0003): "UI",
    DicomTag(0x0002, 0x0010): "UI",
    DicomTag(0x0008, 0x0016): "UI",
    DicomTag(0x0008, 0x0018): "UI",
    DicomTag(0x0008, 0x0020): "DA",
    DicomTag(0x0008, 0x0030): "TM",
    DicomTag(0x0008, 0x0050): "SH",
    DicomTag(0x0008, 0x0060): "CS",
    DicomTag(0x0008, 0x0080): "LO",
    DicomTag(0x0008, 0x0090): "PN",
    DicomTag(0x0008, 0x1110): "SQ",
    DicomTag(0x0010, 0x0010): "PN",
    DicomTag(0x0010, 0x0020): "LO",
    DicomTag(0x0010, 0x0030): "DA",
    DicomTag(0x0010, 0x1000): "LO",
    DicomTag(0x0010, 0x1002): "SQ",
    DicomTag(0x0010, 0x1040): "LO",
    DicomTag(0x0020, 0x000D): "UI",
    DicomTag(0x0020, 0x000E): "UI",
    DicomTag(0x0020, 0x0013): "IS",
    DicomTag(0x0028, 0x0010): "US",
    DicomTag(0x0028, 0x0011): "US",
    DicomTag(0x0028, 0x0100): "US",
    PIXEL_DATA: "OW",
}


@dataclass
class SequenceItem:
    elements: list["DicomElement"] = field(default_factory=list)
    undefined_length: bool = False


@dataclass
class DicomElement:
    tag: DicomTag
    vr: str
    value: bytes = b""
    items: list[SequenceItem] | None = None  # set iff vr == "SQ"
    undefined_length: bool = False

    def text(self) -> str:
        """Value decoded as ASCII with trailing pad (space/NUL) stripped."""
        return self.value.decode("ascii", errors="replace").rstrip("\x00 ")


@dataclass
class DicomObject:
    preamble: bytes
    meta: list[DicomElement]
    dataset: list[DicomElement]
    transfer_syntax: str

    def find(self, tag: DicomTag) -> DicomElement | None:
        for el in self.dataset:
            if el.tag == tag:
                return el
        return None


def pad_value(vr: str, raw: bytes) -> bytes:
    if len(raw) % 2 == 0:
        return raw
    if vr == "UI":
        return raw + b"\x00"
    return raw + b" "


def encode_text(vr: str, text: str) -> bytes:
    return pad_value(vr, text.encode("ascii"))
