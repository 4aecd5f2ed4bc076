#!/usr/bin/env python3
"""End-to-end benchmark experiment: generate a corpus (unless one is given),
optimize every page, and report savings statistics.

Usage:
  python scripts/run_benchmark.py [--corpus DIR] [--pages 30] [--seed 7]
                                  [--groups alpha,beta] [--json report.json]
                                  [--dataset pairs.jsonl] [--workers 4]
"""

from __future__ import annotations

import argparse
import json
import tempfile
import time
from pathlib import Path

from webwatt import bench, corpusgen
from webwatt.optimizer import PipelineConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", help="existing corpus directory (else generated)")
    parser.add_argument("--pages", type=int, default=30)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--groups", help="comma-separated sub-corpus names")
    parser.add_argument("--json", dest="json_path")
    parser.add_argument("--dataset", help="also write training pairs here")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    scratch = None
    if args.corpus:
        corpus = Path(args.corpus)
    else:
        scratch = tempfile.TemporaryDirectory(prefix="webwatt-corpus-")
        corpus = Path(scratch.name)
        groups = tuple(args.groups.split(",")) if args.groups else None
        corpusgen.generate_corpus(corpus, pages=args.pages, seed=args.seed,
                                  groups=groups)
        print(f"generated {args.pages} pages (seed {args.seed})")

    started = time.monotonic()
    outcome = bench.run_corpus(corpus, PipelineConfig(), workers=args.workers)
    elapsed = time.monotonic() - started

    summary = bench.summarize(outcome.results)
    print(bench.render_summary_table(summary))
    print(f"\nprocessed {len(outcome.results)} pages in {elapsed:.1f}s")
    for name, group_summary in bench.group_summaries(outcome.results).items():
        print(f"\n[{name}]")
        print(bench.render_summary_table(group_summary))
    welch = bench.compare_groups(outcome.results)
    if welch is not None:
        print(f"\nWelch t-test between groups: t={welch.t:.4f} "
              f"df={welch.df:.2f} p={welch.p_two_sided:.4f}")
    if outcome.failures:
        print(f"\nfailed bundles: {len(outcome.failures)}")
        for failure in outcome.failures:
            print(f"  {failure.bundle_id}: {failure.error}")

    if args.json_path:
        Path(args.json_path).write_text(
            json.dumps(bench.summary_to_dict(summary), indent=2) + "\n",
            encoding="utf-8",
        )
        print(f"\nwrote summary to {args.json_path}")
    if args.dataset:
        count = bench.build_dataset(outcome.results, corpus, args.dataset)
        print(f"wrote {count} training pairs to {args.dataset}")
    if scratch is not None:
        scratch.cleanup()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
