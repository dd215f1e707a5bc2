"""anchorgen: build an anchor set offline from a JSONL latents file."""

import argparse
import json

import numpy as np

from .core import LatentRecord, generate_anchors
from .serialize import anchor_set_to_dict


def main(argv=None):
    parser = argparse.ArgumentParser(prog="anchorgen")
    parser.add_argument("--latents", required=True, help="JSONL: {latent, label, slice_features}")
    parser.add_argument("--m", type=int, required=True)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--name", default="anchors")
    args = parser.parse_args(argv)

    records = []
    with open(args.latents, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            records.append(
                LatentRecord(
                    latent=np.asarray(rec["latent"], dtype=float),
                    label=rec["label"],
                    slice_features=np.asarray(rec.get("slice_features", []), dtype=float),
                    representative_images=rec.get("representative_images", []),
                )
            )
    anchor_set = generate_anchors(records, args.m, args.seed, name=args.name)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(anchor_set_to_dict(anchor_set), fh, indent=2)


if __name__ == "__main__":
    main()
