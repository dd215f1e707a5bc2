"""DICOM Part-10 reader/writer for implicit and explicit VR little endian.

parse/serialize are lossless inverses for the supported transfer syntaxes:
explicit-VR files keep the VR read from the file, implicit-VR files resolve
VRs from the tag dictionary (which does not affect the serialized bytes).
"""

from __future__ import annotations

import struct

from .model import (
    ITEM,
    ITEM_DELIM,
    LONG_FORM_VRS,
    SEQ_DELIM,
    SUPPORTED_TRANSFER_SYNTAXES,
    SUPPORTED_VRS,
    TAG_VR,
    TRANSFER_SYNTAX_UID,
    TS_EXPLICIT_LE,
    UNDEFINED_LENGTH,
    DicomElement,
    DicomObject,
    DicomTag,
    SequenceItem,
)


class DicomParseError(Exception):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class DicomSerializeError(Exception):
    pass


class _Reader:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def eof(self) -> bool:
        return self.pos >= len(self.data)

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise DicomParseError("truncated element", self.pos)
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def peek_group(self) -> int:
        if self.pos + 2 > len(self.data):
            raise DicomParseError("truncated element", self.pos)
        return struct.unpack("<H", self.data[self.pos : self.pos + 2])[0]

    def tag(self) -> DicomTag:
        g = self.u16()
        e = self.u16()
        return DicomTag(g, e)


def _read_element(r: _Reader, explicit: bool) -> DicomElement:
    start = r.pos
    tag = r.tag()
    if explicit:
        vr = r.take(2).decode("ascii", errors="replace")
        if vr not in SUPPORTED_VRS:
            raise DicomParseError(f"unknown explicit VR {vr!r}", start)
        if vr in LONG_FORM_VRS:
            r.take(2)  # reserved
            length = r.u32()
        else:
            length = r.u16()
    else:
        length = r.u32()
        vr = TAG_VR.get(tag, "UN")
        if length == UNDEFINED_LENGTH:
            vr = "SQ"
    if vr == "SQ":
        if length != UNDEFINED_LENGTH and length % 2 != 0:
            raise DicomParseError("odd sequence length", start)
        items, undefined = _read_sequence(r, explicit, length, start)
        return DicomElement(tag=tag, vr="SQ", items=items, undefined_length=undefined)
    if length == UNDEFINED_LENGTH:
        raise DicomParseError(f"undefined length on non-sequence VR {vr}", start)
    value = r.take(length)
    return DicomElement(tag=tag, vr=vr, value=value)


def _read_sequence(
    r: _Reader, explicit: bool, length: int, start: int
) -> tuple[list[SequenceItem], bool]:
    items: list[SequenceItem] = []
    undefined = length == UNDEFINED_LENGTH
    end = None if undefined else r.pos + length
    while True:
        if end is not None:
            if r.pos == end:
                break
            if r.pos > end:
                raise DicomParseError("sequence overruns its declared length", start)
        tag = r.tag()
        item_len = r.u32()
        if tag == SEQ_DELIM:
            if not undefined:
                raise DicomParseError("sequence delimiter inside defined-length sequence", start)
            break
        if tag != ITEM:
            raise DicomParseError(f"expected item tag, found {tag}", start)
        items.append(_read_item(r, explicit, item_len))
    return items, undefined


def _read_item(r: _Reader, explicit: bool, length: int) -> SequenceItem:
    item = SequenceItem(undefined_length=length == UNDEFINED_LENGTH)
    if item.undefined_length:
        while True:
            if r.pos + 4 <= len(r.data):
                g, e = struct.unpack("<HH", r.data[r.pos : r.pos + 4])
                if DicomTag(g, e) == ITEM_DELIM:
                    r.take(4)
                    r.u32()  # delimiter length, always 0
                    break
            if r.eof():
                raise DicomParseError("unterminated sequence item", r.pos)
            item.elements.append(_read_element(r, explicit))
    else:
        end = r.pos + length
        while r.pos < end:
            item.elements.append(_read_element(r, explicit))
        if r.pos != end:
            raise DicomParseError("item overruns its declared length", end)
    return item


def parse_dicom(data: bytes) -> DicomObject:
    if len(data) < 132:
        raise DicomParseError("file shorter than preamble + magic", 0)
    if data[128:132] != b"DICM":
        raise DicomParseError("missing DICM magic", 128)
    preamble = data[:128]
    r = _Reader(data, 132)
    meta: list[DicomElement] = []
    while not r.eof() and r.peek_group() == 0x0002:
        meta.append(_read_element(r, explicit=True))
    transfer_syntax = TS_EXPLICIT_LE
    for el in meta:
        if el.tag == TRANSFER_SYNTAX_UID:
            transfer_syntax = el.text()
    if transfer_syntax not in SUPPORTED_TRANSFER_SYNTAXES:
        raise DicomParseError(f"unsupported transfer syntax {transfer_syntax!r}", 132)
    explicit = transfer_syntax == TS_EXPLICIT_LE
    dataset: list[DicomElement] = []
    while not r.eof():
        offset = r.pos
        el = _read_element(r, explicit)
        if dataset and el.tag <= dataset[-1].tag:
            raise DicomParseError(f"dataset tags not strictly ascending at {el.tag}", offset)
        dataset.append(el)
    return DicomObject(
        preamble=preamble, meta=meta, dataset=dataset, transfer_syntax=transfer_syntax
    )


def _write_element(out: bytearray, el: DicomElement, explicit: bool) -> None:
    out += struct.pack("<HH", el.tag.group, el.tag.element)
    if el.vr == "SQ":
        body = bytearray()
        for item in el.items or []:
            _write_item(body, item, explicit)
        length = UNDEFINED_LENGTH if el.undefined_length else len(body)
        if explicit:
            out += b"SQ\x00\x00" + struct.pack("<I", length)
        else:
            out += struct.pack("<I", length)
        out += body
        if el.undefined_length:
            out += struct.pack("<HHI", SEQ_DELIM.group, SEQ_DELIM.element, 0)
        return
    if len(el.value) % 2 != 0:
        raise DicomSerializeError(f"odd value length for {el.tag} {el.vr}")
    if explicit:
        if el.vr not in SUPPORTED_VRS:
            raise DicomSerializeError(f"unsupported VR {el.vr!r} for {el.tag}")
        if el.vr in LONG_FORM_VRS:
            out += el.vr.encode("ascii") + b"\x00\x00" + struct.pack("<I", len(el.value))
        else:
            if len(el.value) > 0xFFFF:
                raise DicomSerializeError(f"value too long for short-form VR {el.vr}")
            out += el.vr.encode("ascii") + struct.pack("<H", len(el.value))
    else:
        out += struct.pack("<I", len(el.value))
    out += el.value


def _write_item(out: bytearray, item: SequenceItem, explicit: bool) -> None:
    body = bytearray()
    for el in item.elements:
        _write_element(body, el, explicit)
    length = UNDEFINED_LENGTH if item.undefined_length else len(body)
    out += struct.pack("<HHI", ITEM.group, ITEM.element, length)
    out += body
    if item.undefined_length:
        out += struct.pack("<HHI", ITEM_DELIM.group, ITEM_DELIM.element, 0)


def serialize_dicom(obj: DicomObject) -> bytes:
    if obj.transfer_syntax not in SUPPORTED_TRANSFER_SYNTAXES:
        raise DicomSerializeError(f"unsupported transfer syntax {obj.transfer_syntax!r}")
    out = bytearray()
    out += obj.preamble.ljust(128, b"\x00")[:128]
    out += b"DICM"
    for el in obj.meta:
        _write_element(out, el, explicit=True)
    explicit = obj.transfer_syntax == TS_EXPLICIT_LE
    prev: DicomTag | None = None
    for el in obj.dataset:
        if prev is not None and el.tag <= prev:
            raise DicomSerializeError(f"dataset tags not strictly ascending at {el.tag}")
        prev = el.tag
        _write_element(out, el, explicit)
    return bytes(out)
