"""Command line wrapper: export event vectors from a corpus file."""

import argparse
import sys

from .export import ExportError, export


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="evseg-export",
        description="Write per-event embedding vectors in the evseg binary format")
    parser.add_argument("--corpus", required=True, help="corpus JSONL file")
    parser.add_argument("--model", default="hash64",
                        help="hash<dim> or a local transformers checkpoint name")
    parser.add_argument("--out", required=True, help="output .emb path")
    args = parser.parse_args(argv)
    try:
        count = export(args.corpus, args.model, args.out)
    except ExportError as exc:
        print(f"export failed: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"export failed: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {count} vectors -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
