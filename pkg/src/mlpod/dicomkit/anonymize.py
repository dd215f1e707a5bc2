"""Tag-action anonymization: REMOVE / BLANK / PSEUDONYM / UID_REMAP.

Pure over its inputs; the pseudonym map produced here stays on the edge and
must never travel with the anonymized files.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .model import (
    PIXEL_DATA,
    DicomElement,
    DicomObject,
    DicomTag,
    SequenceItem,
    pad_value,
)

ACTIONS = ("REMOVE", "BLANK", "PSEUDONYM", "UID_REMAP")
_UID_RE = re.compile(r"^[0-9]+(\.[0-9]+)*$")


class ProfileError(ValueError):
    pass


@dataclass
class AnonymizationProfile:
    actions: dict[DicomTag, str]
    salt: bytes

    def __post_init__(self):
        if PIXEL_DATA in self.actions:
            raise ProfileError("PixelData (7FE0,0010) must not appear in a profile")
        for tag, action in self.actions.items():
            if action not in ACTIONS:
                raise ProfileError(f"unknown action {action!r} for {tag}")


@dataclass
class PseudonymMap:
    """original-value SHA-256 hex -> replacement; edge-local audit record."""

    entries: dict[str, str] = field(default_factory=dict)

    def record(self, original: bytes, replacement: str) -> None:
        self.entries[hashlib.sha256(original).hexdigest()] = replacement


def remap_uid(uid: str, salt: bytes) -> str:
    """Deterministic UID replacement under the 2.25 arc."""
    if not uid or len(uid) > 64 or not _UID_RE.match(uid):
        raise ValueError(f"malformed uid {uid!r}")
    digest = hashlib.sha256(salt + uid.encode("ascii")).digest()
    return "2.25." + str(int.from_bytes(digest[:16], "big"))


def pseudonym(original: bytes, salt: bytes) -> str:
    mac = hmac.new(salt, original, hashlib.sha256).hexdigest()
    return "ANON-" + mac[:12]


def anonymize(
    obj: DicomObject, profile: AnonymizationProfile
) -> tuple[DicomObject, PseudonymMap]:
    pmap = PseudonymMap()
    dataset = _anonymize_elements(obj.dataset, profile, pmap)
    anon = DicomObject(
        preamble=obj.preamble,
        meta=[_copy_element(el) for el in obj.meta],
        dataset=dataset,
        transfer_syntax=obj.transfer_syntax,
    )
    return anon, pmap


def _copy_element(el: DicomElement) -> DicomElement:
    items = None
    if el.items is not None:
        items = [
            SequenceItem(
                elements=[_copy_element(e) for e in item.elements],
                undefined_length=item.undefined_length,
            )
            for item in el.items
        ]
    return DicomElement(
        tag=el.tag, vr=el.vr, value=el.value, items=items, undefined_length=el.undefined_length
    )


def _anonymize_elements(
    elements: list[DicomElement], profile: AnonymizationProfile, pmap: PseudonymMap
) -> list[DicomElement]:
    out: list[DicomElement] = []
    for el in elements:
        action = profile.actions.get(el.tag)
        if action == "REMOVE":
            continue
        el = _copy_element(el)
        if el.vr == "SQ":
            for item in el.items or []:
                item.elements = _anonymize_elements(item.elements, profile, pmap)
            out.append(el)
            continue
        if action == "BLANK":
            el.value = b""
        elif action == "PSEUDONYM":
            original = el.value.rstrip(b"\x00 ")
            replacement = pseudonym(original, profile.salt)
            pmap.record(original, replacement)
            el.value = pad_value(el.vr, replacement.encode("ascii"))
        elif action == "UID_REMAP":
            original = el.value.rstrip(b"\x00 ")
            replacement = remap_uid(original.decode("ascii"), profile.salt)
            pmap.record(original, replacement)
            el.value = pad_value(el.vr, replacement.encode("ascii"))
        out.append(el)
    return out


def load_profile(path: str) -> AnonymizationProfile:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return profile_from_dict(data)


def profile_from_dict(data: dict) -> AnonymizationProfile:
    import base64

    salt = base64.b64decode(data["salt_b64"])
    actions = {DicomTag.parse(a["tag"]): a["action"] for a in data["actions"]}
    return AnonymizationProfile(actions=actions, salt=salt)


def default_profile(salt: bytes) -> AnonymizationProfile:
    """The packaged default action table with a caller-supplied salt."""
    data = json.loads(
        resources.files("mlpod.dicomkit").joinpath("default_profile.json").read_text()
    )
    actions = {DicomTag.parse(a["tag"]): a["action"] for a in data["actions"]}
    return AnonymizationProfile(actions=actions, salt=salt)
