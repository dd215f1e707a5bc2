import argparse

import uvicorn

from ..common import SIGNING_KEY_ENV, load_key
from .app import create_app
from .config import LogicpodConfig
from .engine import PipelineStore, RunEngine


def main(argv=None):
    parser = argparse.ArgumentParser(prog="logicpod")
    parser.add_argument("--listen", default="127.0.0.1:8004")
    parser.add_argument("--config", required=True)
    args = parser.parse_args(argv)
    config = LogicpodConfig.from_file(args.config)
    key = load_key(SIGNING_KEY_ENV)
    engine = RunEngine(config, PipelineStore(), key)
    host, _, port = args.listen.rpartition(":")
    uvicorn.run(create_app(engine, key), host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
