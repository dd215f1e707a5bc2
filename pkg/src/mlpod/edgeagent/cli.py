import argparse
import os
import sys

from ..common import EDGE_KEY_ENV, load_key
from .runtime import run_agent


def main(argv=None):
    parser = argparse.ArgumentParser(prog="edge-agent")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run")
    run.add_argument("--logic", required=True, help="logicpod base url")
    run.add_argument("--run-id", required=True)
    run.add_argument("--in", dest="in_dir", required=True)
    run.add_argument("--out", dest="out_dir", required=True)
    run.add_argument("--package", default=None, help="offline package file")
    run.add_argument("--token", required=True, help="token value or env:VAR reference")
    args = parser.parse_args(argv)

    token = args.token
    if token.startswith("env:"):
        token = os.environ.get(token[4:], "")
    if not token and args.package is None:
        print("no token available", file=sys.stderr)
        return 1
    try:
        return run_agent(
            args.logic,
            args.run_id,
            args.in_dir,
            args.out_dir,
            token,
            load_key(EDGE_KEY_ENV),
            package_file=args.package,
        )
    except Exception as exc:
        print(f"edge-agent: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
