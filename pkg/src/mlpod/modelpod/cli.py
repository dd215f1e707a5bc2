import argparse
import os

import uvicorn

from ..common import EDGE_KEY_ENV, SIGNING_KEY_ENV, load_key
from .app import create_app, make_input_fetcher
from .jobs import JobManager
from .registry import ModelRegistry


def main(argv=None):
    parser = argparse.ArgumentParser(prog="modelpod")
    parser.add_argument("--listen", default="127.0.0.1:8003")
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--root", default=os.environ.get("MODELPOD_ROOT", "./modelpod-root"))
    parser.add_argument("--datapod-url", default=os.environ.get("DATAPOD_URL"))
    args = parser.parse_args(argv)
    signing_key = load_key(SIGNING_KEY_ENV)
    edge_key = load_key(EDGE_KEY_ENV)
    registry = ModelRegistry(args.root)
    jobs = JobManager(
        registry, make_input_fetcher(args.datapod_url, signing_key), workers=args.workers
    )
    app = create_app(registry, jobs, signing_key, edge_key)
    host, _, port = args.listen.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
