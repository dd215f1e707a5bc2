import argparse
import json
import sys
from pathlib import Path

from .anonymize import anonymize, load_profile
from .parse import DicomParseError, parse_dicom, serialize_dicom


def main(argv=None):
    parser = argparse.ArgumentParser(prog="dicomkit")
    sub = parser.add_subparsers(dest="command", required=True)
    anon = sub.add_parser("anonymize", help="anonymize every *.dcm in a directory")
    anon.add_argument("--profile", required=True, help="profile JSON {salt_b64, actions}")
    anon.add_argument("--in", dest="in_dir", required=True)
    anon.add_argument("--out", dest="out_dir", required=True)
    anon.add_argument("--map", dest="map_file", required=True, help="pseudonym map output (edge-local)")
    args = parser.parse_args(argv)

    profile = load_profile(args.profile)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    combined: dict[str, str] = {}
    failures = 0
    for path in sorted(Path(args.in_dir).glob("*.dcm")):
        try:
            obj = parse_dicom(path.read_bytes())
            anon_obj, pmap = anonymize(obj, profile)
            (out_dir / path.name).write_bytes(serialize_dicom(anon_obj))
            combined.update(pmap.entries)
        except DicomParseError as exc:
            print(f"{path.name}: {exc}", file=sys.stderr)
            failures += 1
    Path(args.map_file).write_text(json.dumps({"entries": combined}, indent=2))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
