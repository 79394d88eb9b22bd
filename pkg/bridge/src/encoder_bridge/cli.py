"""Command-line wrapper: encode --model <id> --sentences in.tsv --out vectors.txt."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .encode import STRATEGIES, BridgeError, BridgeRequest, encode_sentences


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="encode", description=__doc__)
    parser.add_argument("--model", required=True, help="model name or directory")
    parser.add_argument("--sentences", required=True, help="'<id>\\t<text>' list")
    parser.add_argument("--out", required=True, help="sentence-vector output file")
    parser.add_argument("--strategy", default="sentence-start-token", choices=STRATEGIES)
    parser.add_argument("--batch-size", type=int, default=16)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    request = None
    try:
        request = BridgeRequest(
            model=args.model,
            sentences=Path(args.sentences),
            out=Path(args.out),
            strategy=args.strategy,
            batch_size=args.batch_size,
        )
        out = encode_sentences(request)
    except (BridgeError, FileNotFoundError) as exc:
        print(f"encode: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"encode: unexpected error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
