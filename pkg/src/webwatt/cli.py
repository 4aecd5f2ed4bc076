"""Command-line interface; a thin wrapper over the library modules."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analyzer as analyzermod
from . import bench as benchmod
from . import bundle as bundlemod
from . import diffpatch
from .config import AppConfig, load_config
from .energy import breakeven, compute_savings, estimate_energy
from .optimizer import run_pipeline


def _add_config_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to the JSON config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="webwatt",
        description="Analyze and optimize the energy cost of web bundles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="detect energy-intensive patterns")
    p.add_argument("directory")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    _add_config_arg(p)

    p = sub.add_parser("optimize", help="run the optimization pipeline")
    p.add_argument("directory")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--json", action="store_true")
    _add_config_arg(p)

    p = sub.add_parser("diff", help="unified diff between two files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--context", type=int, default=3)

    p = sub.add_parser("bench", help="benchmark a corpus of bundles")
    p.add_argument("corpus")
    p.add_argument("--json", dest="json_path", help="write JSON report here")
    p.add_argument("--workers", type=int, default=1)
    _add_config_arg(p)

    p = sub.add_parser("dataset", help="build a before/after training dataset")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    _add_config_arg(p)

    p = sub.add_parser("breakeven", help="tooling-overhead breakeven report")
    p.add_argument("--overhead-kwh", type=float, required=True)
    p.add_argument("--rate", required=True,
                   help="reduction rate, e.g. 0.15 or a range 0.13..0.16")
    p.add_argument("--per-view-wh", type=float, default=50.0,
                   help="Wh per 1,000 page views")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_config_arg(p)
    p.add_argument("--host")
    p.add_argument("--port", type=int)

    return parser


def _load(args) -> AppConfig:
    return load_config(getattr(args, "config", None))


def cmd_analyze(args) -> int:
    cfg = _load(args)
    site = bundlemod.load_bundle(args.directory)
    dom_ops = analyzermod.bundle_dom_ops(site, cfg.analyzer)
    weight = bundlemod.bundle_weight(site, dom_ops)
    findings = analyzermod.detect_findings(site, cfg.analyzer)
    estimate = estimate_energy(weight, cfg.energy)
    if args.json:
        print(json.dumps({
            "total_bytes": weight.total_bytes,
            "per_class_bytes": weight.per_class_bytes,
            "dom_ops": weight.dom_ops,
            "asset_count": weight.asset_count,
            "benchmark_eligible": bundlemod.is_benchmark_eligible(weight),
            "estimated_joules": estimate.total_joules,
            "findings": [
                {
                    "kind": f.kind,
                    "asset": f.asset_id,
                    "locator": f.locator,
                    "projected_bytes_saved": f.projected_bytes_saved,
                    "note": f.note,
                }
                for f in findings
            ],
        }, indent=2))
        return 0
    print(f"bundle: {args.directory}")
    print(f"  total bytes:   {weight.total_bytes}")
    print(f"  dom ops:       {weight.dom_ops}")
    print(f"  est. energy:   {estimate.total_joules:.2f} J")
    print(f"  eligible:      {bundlemod.is_benchmark_eligible(weight)}")
    print(f"  findings:      {len(findings)}")
    for f in findings:
        print(f"    [{f.kind}] {f.asset_id} ({f.locator}): {f.note}"
              f" (~{f.projected_bytes_saved} B)")
    return 0


def cmd_optimize(args) -> int:
    cfg = _load(args)
    site = bundlemod.load_bundle(args.directory)
    ops_before = analyzermod.bundle_dom_ops(site, cfg.analyzer)
    before = estimate_energy(bundlemod.bundle_weight(site, ops_before), cfg.energy)
    optimized, log = run_pipeline(site, cfg.pipeline)
    ops_after = analyzermod.bundle_dom_ops(optimized, cfg.analyzer)
    after = estimate_energy(bundlemod.bundle_weight(optimized, ops_after), cfg.energy)
    savings = compute_savings(before, after)
    bundlemod.write_bundle(optimized, args.output)
    if args.json:
        print(json.dumps({
            "bytes_before": log.total_bytes_before,
            "bytes_after": log.total_bytes_after,
            "energy_before_j": before.total_joules,
            "energy_after_j": after.total_joules,
            "delta_j": savings.delta_joules,
            "delta_pct": savings.delta_percent,
            "records": [
                {"kind": r.kind, "asset": r.asset_id, "status": r.status,
                 "bytes_before": r.bytes_before, "bytes_after": r.bytes_after}
                for r in log.records
            ],
        }, indent=2))
        return 0
    print(f"wrote optimized bundle to {args.output}")
    print(f"  bytes:  {log.total_bytes_before} -> {log.total_bytes_after}")
    print(f"  energy: {before.total_joules:.2f} J -> {after.total_joules:.2f} J "
          f"({savings.delta_joules:.2f} J, {savings.delta_percent:.1f}%)")
    accepted = log.accepted()
    print(f"  transformations applied: {len(accepted)}")
    for r in accepted:
        print(f"    {r.kind} on {r.asset_id}: {r.bytes_before} -> {r.bytes_after}")
    return 0


def cmd_diff(args) -> int:
    a = Path(args.a).read_text(encoding="utf-8")
    b = Path(args.b).read_text(encoding="utf-8")
    patchset = diffpatch.unified_diff(a, b, args.context)
    sys.stdout.write(diffpatch.render_patch(patchset))
    return 0 if not patchset.hunks else 1  # mirror diff(1) exit semantics


def cmd_bench(args) -> int:
    cfg = _load(args)
    outcome = benchmod.run_corpus(args.corpus, cfg.pipeline, workers=args.workers)
    summary = benchmod.summarize(outcome.results)
    print(benchmod.render_summary_table(summary))
    groups = benchmod.group_summaries(outcome.results)
    for name, group_summary in groups.items():
        print(f"\n[{name}]")
        print(benchmod.render_summary_table(group_summary))
    welch = benchmod.compare_groups(outcome.results)
    if welch is not None:
        print(f"\nWelch t-test between groups: t={welch.t:.4f} "
              f"df={welch.df:.2f} p={welch.p_two_sided:.4f}")
    if outcome.failures:
        print(f"\nfailed bundles ({len(outcome.failures)}):")
        for failure in outcome.failures:
            print(f"  {failure.bundle_id}: {failure.error}")
    if args.json_path:
        report = {
            "summary": benchmod.summary_to_dict(summary),
            "groups": {
                name: benchmod.summary_to_dict(s) for name, s in groups.items()
            },
            "welch": (
                {"t": welch.t, "df": welch.df, "p_two_sided": welch.p_two_sided}
                if welch is not None else None
            ),
            "pages": [
                {
                    "bundle_id": r.bundle_id,
                    "group": r.group,
                    "eligible": r.eligible,
                    "energy_before_j": r.energy_before_j,
                    "energy_after_j": r.energy_after_j,
                    "savings_j": r.savings_j,
                    "savings_pct": r.savings_pct,
                    "transfer_bytes_before": r.transfer_bytes_before,
                    "transfer_bytes_after": r.transfer_bytes_after,
                    "code_bytes_before": r.code_bytes_before,
                    "code_bytes_after": r.code_bytes_after,
                }
                for r in outcome.results
            ],
            "failures": [
                {"bundle_id": f.bundle_id, "error": f.error}
                for f in outcome.failures
            ],
        }
        Path(args.json_path).write_text(
            json.dumps(report, indent=2) + "\n", encoding="utf-8"
        )
    return 0


def cmd_dataset(args) -> int:
    cfg = _load(args)
    outcome = benchmod.run_corpus(args.corpus, cfg.pipeline)
    count = benchmod.build_dataset(outcome.results, args.corpus, args.output, cfg.pipeline)
    print(f"wrote {count} training pairs to {args.output}")
    return 0


def _parse_rate_range(raw: str) -> tuple[float, float]:
    if ".." in raw:
        low, _, high = raw.partition("..")
        return float(low), float(high)
    value = float(raw)
    return value, value


def cmd_breakeven(args) -> int:
    low, high = _parse_rate_range(args.rate)
    reports = [breakeven(args.overhead_kwh, rate, args.per_view_wh)
               for rate in sorted({low, high})]
    if args.json:
        print(json.dumps([
            {
                "overhead_kwh": r.overhead_kwh,
                "reduction_rate": r.reduction_rate,
                "per_view_wh": r.per_view_wh,
                "breakeven_frontend_kwh": r.breakeven_frontend_kwh,
                "breakeven_views": r.breakeven_views,
            }
            for r in reports
        ], indent=2))
        return 0
    for r in reports:
        print(f"rate {r.reduction_rate:.2%}: overhead {r.overhead_kwh} kWh is "
              f"repaid once the frontend has consumed "
              f"{r.breakeven_frontend_kwh:.3f} kWh "
              f"(~{r.breakeven_views:,.0f} page views at "
              f"{r.per_view_wh} Wh per 1,000 views)")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = _load(args)
    app = create_app(cfg)
    uvicorn.run(
        app,
        host=args.host or cfg.server.host,
        port=args.port or cfg.server.port,
        log_level="info",
    )
    return 0


_COMMANDS = {
    "analyze": cmd_analyze,
    "optimize": cmd_optimize,
    "diff": cmd_diff,
    "bench": cmd_bench,
    "dataset": cmd_dataset,
    "breakeven": cmd_breakeven,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except bundlemod.BundleError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
