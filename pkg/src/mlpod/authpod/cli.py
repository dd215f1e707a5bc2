import argparse

import uvicorn

from .app import create_app_from_env


def main(argv=None):
    parser = argparse.ArgumentParser(prog="authpod")
    parser.add_argument("--listen", default="127.0.0.1:8001", help="host:port to bind")
    args = parser.parse_args(argv)
    host, _, port = args.listen.rpartition(":")
    uvicorn.run(create_app_from_env(), host=host or "127.0.0.1", port=int(port))


if __name__ == "__main__":
    main()
