import argparse
import os

import uvicorn

from ..common import SIGNING_KEY_ENV, load_key
from .app import create_app
from .store import ObjectStore


def main(argv=None):
    parser = argparse.ArgumentParser(prog="datapod")
    parser.add_argument("--listen", default="127.0.0.1:8002")
    parser.add_argument("--root", default=os.environ.get("DATAPOD_ROOT", "./datapod-root"))
    args = parser.parse_args(argv)
    app = create_app(ObjectStore(args.root), load_key(SIGNING_KEY_ENV))
    host, _, port = args.listen.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
