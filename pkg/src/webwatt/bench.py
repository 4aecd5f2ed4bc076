"""Corpus benchmark harness and training-dataset builder.

Bundles are discovered one or two directory levels below the corpus root
(the second level gives sub-corpus grouping). Failed bundles are recorded,
never dropped silently; they are excluded from statistics but always
listed, because silently excluding failures would inflate the results.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from . import analyzer as analyzermod
from . import bundle as bundlemod
from . import stats
from .bundle import SiteBundle, bundle_weight, code_bytes, is_benchmark_eligible, load_bundle
from .energy import estimate_energy
from .optimizer import PipelineConfig, run_pipeline
from .stats import WelchResult, welch_t_test  # noqa: F401  (re-exported)


@dataclass
class TrainingPair:
    original: dict[str, str]
    optimized: dict[str, str]
    transformation_kinds: list[str]
    energy_before_j: float
    energy_after_j: float


@dataclass
class PageResult:
    bundle_id: str
    group: str | None
    eligible: bool
    energy_before_j: float
    energy_after_j: float
    savings_j: float
    savings_pct: float
    transfer_bytes_before: int
    transfer_bytes_after: int
    code_bytes_before: int
    code_bytes_after: int
    transformations: list[dict]
    snapshot: TrainingPair | None = None


@dataclass
class FailedPage:
    bundle_id: str
    error: str


@dataclass
class CorpusRunResult:
    results: list[PageResult]
    failures: list[FailedPage]


@dataclass(frozen=True)
class BenchmarkSummary:
    n: int
    mean_savings_pct: float
    sd_savings_pct: float
    ci95: tuple[float, float]
    ci_omitted: bool
    frac_improved: float
    frac_above_10pct: float
    median_transfer_reduction_pct: float
    median_code_reduction_pct: float


def discover_bundles(corpus_dir: str | Path) -> list[tuple[str, str | None, Path]]:
    """(bundle id, group, path) for each bundle root, sorted by id."""
    corpus = Path(corpus_dir)
    found: list[tuple[str, str | None, Path]] = []
    if not corpus.is_dir():
        return found
    for child in sorted(corpus.iterdir()):
        if not child.is_dir():
            continue
        if any(child.glob("*.html")):
            found.append((child.name, None, child))
            continue
        for grandchild in sorted(child.iterdir()):
            if grandchild.is_dir() and any(grandchild.glob("*.html")):
                found.append((f"{child.name}/{grandchild.name}", child.name, grandchild))
    found.sort(key=lambda item: item[0])
    return found


def _snapshot_texts(site: SiteBundle) -> dict[str, str]:
    return {
        a.id: a.text
        for a in site.assets
        if not a.external and a.cls in bundlemod.TEXT_CLASSES
    }


def analyze_page(
    bundle_id: str,
    group: str | None,
    path: Path,
    config: PipelineConfig,
    capture_snapshots: bool = True,
) -> PageResult:
    site = load_bundle(path)
    ops_before = analyzermod.bundle_dom_ops(site, config.analyzer)
    weight_before = bundle_weight(site, ops_before)
    energy_before = estimate_energy(weight_before, config.energy)

    optimized, log = run_pipeline(site, config)
    ops_after = analyzermod.bundle_dom_ops(optimized, config.analyzer)
    weight_after = bundle_weight(optimized, ops_after)
    energy_after = estimate_energy(weight_after, config.energy)

    savings_j = energy_before.total_joules - energy_after.total_joules
    savings_pct = (
        100.0 * savings_j / energy_before.total_joules
        if energy_before.total_joules > 0
        else 0.0
    )
    accepted_kinds = sorted({r.kind for r in log.accepted()})
    snapshot = None
    if capture_snapshots:
        snapshot = TrainingPair(
            original=_snapshot_texts(site),
            optimized=_snapshot_texts(optimized),
            transformation_kinds=accepted_kinds,
            energy_before_j=energy_before.total_joules,
            energy_after_j=energy_after.total_joules,
        )
    return PageResult(
        bundle_id=bundle_id,
        group=group,
        eligible=is_benchmark_eligible(weight_before),
        energy_before_j=energy_before.total_joules,
        energy_after_j=energy_after.total_joules,
        savings_j=savings_j,
        savings_pct=savings_pct,
        transfer_bytes_before=weight_before.total_bytes,
        transfer_bytes_after=weight_after.total_bytes,
        code_bytes_before=code_bytes(weight_before),
        code_bytes_after=code_bytes(weight_after),
        transformations=[
            {
                "kind": r.kind,
                "asset_id": r.asset_id,
                "bytes_before": r.bytes_before,
                "bytes_after": r.bytes_after,
                "status": r.status,
            }
            for r in log.records
        ],
        snapshot=snapshot,
    )


def run_corpus(
    corpus_dir: str | Path,
    config: PipelineConfig | None = None,
    workers: int = 1,
    capture_snapshots: bool = True,
) -> CorpusRunResult:
    """Optimize and measure every bundle under corpus_dir. Results come
    back sorted by bundle id regardless of scheduling."""
    config = config or PipelineConfig()
    entries = discover_bundles(corpus_dir)
    results: list[PageResult] = []
    failures: list[FailedPage] = []

    def work(entry):
        bundle_id, group, path = entry
        try:
            return analyze_page(bundle_id, group, path, config, capture_snapshots)
        except Exception as e:  # recorded, not dropped
            return FailedPage(bundle_id=bundle_id, error=f"{type(e).__name__}: {e}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(work, entries))
    else:
        outcomes = [work(entry) for entry in entries]
    for outcome in outcomes:
        if isinstance(outcome, FailedPage):
            failures.append(outcome)
        else:
            results.append(outcome)
    results.sort(key=lambda r: r.bundle_id)
    failures.sort(key=lambda f: f.bundle_id)
    return CorpusRunResult(results=results, failures=failures)


def _reduction_pct(before: int, after: int) -> float:
    return 100.0 * (before - after) / before if before > 0 else 0.0


def summarize(results: list[PageResult]) -> BenchmarkSummary:
    """Sample statistics over per-page savings percentages."""
    if not results:
        return BenchmarkSummary(0, 0.0, 0.0, (0.0, 0.0), True, 0.0, 0.0, 0.0, 0.0)
    pcts = [r.savings_pct for r in results]
    ci = stats.mean_ci95(pcts)
    transfer = [
        _reduction_pct(r.transfer_bytes_before, r.transfer_bytes_after)
        for r in results
    ]
    code = [
        _reduction_pct(r.code_bytes_before, r.code_bytes_after) for r in results
    ]
    return BenchmarkSummary(
        n=len(results),
        mean_savings_pct=ci.mean,
        sd_savings_pct=ci.sd,
        ci95=(ci.low, ci.high),
        ci_omitted=ci.omitted,
        frac_improved=sum(r.savings_j > 0 for r in results) / len(results),
        frac_above_10pct=sum(r.savings_pct > 10.0 for r in results) / len(results),
        median_transfer_reduction_pct=stats.lower_median(transfer),
        median_code_reduction_pct=stats.lower_median(code),
    )


def group_summaries(results: list[PageResult]) -> dict[str, BenchmarkSummary]:
    groups: dict[str, list[PageResult]] = {}
    for result in results:
        if result.group is not None:
            groups.setdefault(result.group, []).append(result)
    return {name: summarize(rs) for name, rs in sorted(groups.items())}


def compare_groups(results: list[PageResult]) -> WelchResult | None:
    """Welch's t-test on per-page savings between exactly two groups."""
    groups: dict[str, list[float]] = {}
    for result in results:
        if result.group is not None:
            groups.setdefault(result.group, []).append(result.savings_pct)
    if len(groups) != 2:
        return None
    (_, x), (_, y) = sorted(groups.items())
    if len(x) < 2 or len(y) < 2:
        return None
    return welch_t_test(x, y)


_TABLE_ROWS = (
    ("pages", "n", "{:d}"),
    ("mean savings %", "mean_savings_pct", "{:.2f}"),
    ("sd savings %", "sd_savings_pct", "{:.2f}"),
    ("95% CI low", None, None),
    ("95% CI high", None, None),
    ("improved fraction", "frac_improved", "{:.3f}"),
    ("above 10% fraction", "frac_above_10pct", "{:.3f}"),
    ("median transfer cut %", "median_transfer_reduction_pct", "{:.2f}"),
    ("median code cut %", "median_code_reduction_pct", "{:.2f}"),
)


def render_summary_table(summary: BenchmarkSummary) -> str:
    """Fixed-width two-column report."""
    lines = []
    for label, attr, fmt in _TABLE_ROWS:
        if label == "95% CI low":
            value = "omitted" if summary.ci_omitted else f"{summary.ci95[0]:.2f}"
        elif label == "95% CI high":
            value = "omitted" if summary.ci_omitted else f"{summary.ci95[1]:.2f}"
        else:
            value = fmt.format(getattr(summary, attr))
        lines.append(f"{label:<24}{value:>12}")
    return "\n".join(lines)


def summary_to_dict(summary: BenchmarkSummary) -> dict:
    data = asdict(summary)
    data["ci95"] = list(summary.ci95)
    return data


def build_dataset(
    results: list[PageResult],
    corpus_dir: str | Path,
    out_path: str | Path,
    config: PipelineConfig | None = None,
) -> int:
    """Write improvement pairs as one JSON record per line; pages with zero
    or negative savings are excluded. Returns the record count."""
    config = config or PipelineConfig()
    by_id = {bundle_id: path for bundle_id, _, path in discover_bundles(corpus_dir)}
    records: list[str] = []
    for result in results:
        if not result.energy_after_j < result.energy_before_j:
            continue
        pair = result.snapshot
        if pair is None:
            path = by_id.get(result.bundle_id)
            if path is None:
                continue
            pair = analyze_page(
                result.bundle_id, result.group, path, config
            ).snapshot
        records.append(
            json.dumps(
                {
                    "original": pair.original,
                    "optimized": pair.optimized,
                    "transformation_kinds": pair.transformation_kinds,
                    "energy_before_j": pair.energy_before_j,
                    "energy_after_j": pair.energy_after_j,
                },
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    text = "\n".join(records)
    if records:
        text += "\n"
    out.write_text(text, encoding="utf-8")
    return len(records)


def parse_dataset(path: str | Path) -> list[TrainingPair]:
    pairs: list[TrainingPair] = []
    raw = Path(path).read_text(encoding="utf-8")
    for line in raw.splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        pairs.append(
            TrainingPair(
                original=data["original"],
                optimized=data["optimized"],
                transformation_kinds=list(data["transformation_kinds"]),
                energy_before_j=data["energy_before_j"],
                energy_after_j=data["energy_after_j"],
            )
        )
    return pairs
