#!/usr/bin/env python3
"""Generate the synthetic benchmark corpus.

Usage:
  python scripts/make_corpus.py --out corpus/ [--pages 30] [--seed 7]
                                [--groups alpha,beta]
"""

from __future__ import annotations

import argparse

from webwatt import corpusgen


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="corpus output directory")
    parser.add_argument("--pages", type=int, default=30)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument(
        "--groups",
        help="comma-separated sub-corpus names (pages distributed round-robin)",
    )
    args = parser.parse_args()
    groups = tuple(args.groups.split(",")) if args.groups else None
    written = corpusgen.generate_corpus(
        args.out, pages=args.pages, seed=args.seed, groups=groups
    )
    print(f"wrote {len(written)} pages under {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
