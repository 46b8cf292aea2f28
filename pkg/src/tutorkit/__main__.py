"""Server entry point: `python -m tutorkit` or the `tutorkit` script."""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

import uvicorn

from .api import create_app
from .config import Settings


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="tutorkit", description="Run the intelligent-textbook backend."
    )
    parser.add_argument("--port", type=int, help="listen port (default $PORT or 8080)")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--data-dir", type=Path, help="storage root (default $DATA_DIR or ./data)")
    parser.add_argument("--seed", type=int, help="RNG seed for reproducible quiz runs")
    parser.add_argument(
        "--mock-llm", action="store_true", help="use the deterministic offline gateway"
    )
    parser.add_argument("--log-level", default="info")
    args = parser.parse_args(argv)

    settings = Settings.from_env()
    if args.port is not None:
        settings.port = args.port
    if args.data_dir is not None:
        settings.data_dir = args.data_dir
    if args.seed is not None:
        settings.rng_seed = args.seed
    if args.mock_llm:
        settings.mock_llm = True

    logging.basicConfig(level=args.log_level.upper())
    app = create_app(settings)
    uvicorn.run(app, host=args.host, port=settings.port, log_level=args.log_level)


if __name__ == "__main__":
    main()
