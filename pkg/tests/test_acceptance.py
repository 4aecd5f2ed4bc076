"""Acceptance criteria, one test per criterion.

Each test pins its tolerances inline; the conftest terminal hook prints a
PASS/FAIL line per criterion at the end of the run.
"""

from __future__ import annotations

import json
import random
import time

import pytest
import scipy.stats
from fastapi.testclient import TestClient

from helpers import brute_force_match_count

from webwatt import analyzer as A
from webwatt import bundle as B
from webwatt import bench, corpusgen, cssparse, diffpatch, htmlparse, scriptlex, stats
from webwatt.bundle import bundle_weight, load_bundle
from webwatt.cli import main as cli_main
from webwatt.config import AppConfig
from webwatt.energy import EnergyModelParams, breakeven, estimate_from_counts
from webwatt.optimizer import PipelineConfig, minify_css, minify_css_value, run_pipeline
from webwatt.service import bundle_to_wire, create_app
from test_optimizer import css_rule_shapes


@pytest.fixture(scope="module")
def corpus_outcome(acceptance_corpus):
    started = time.monotonic()
    outcome = bench.run_corpus(acceptance_corpus, PipelineConfig())
    elapsed = time.monotonic() - started
    return outcome, elapsed


# ---------------------------------------------------------------------------
# Criterion: benchmark savings on the 30-page synthetic corpus

def test_benchmark_energy_savings(corpus_outcome):
    outcome, elapsed = corpus_outcome
    assert outcome.failures == []
    assert len(outcome.results) == 30
    assert all(r.eligible for r in outcome.results), "corpus must meet the bar"
    summary = bench.summarize(outcome.results)
    assert summary.mean_savings_pct >= 10.0
    assert summary.frac_improved >= 0.90
    assert summary.frac_above_10pct >= 0.60
    assert elapsed < 60.0


# ---------------------------------------------------------------------------
# Criterion: transfer and code-size medians

def test_benchmark_transfer_and_code_medians(corpus_outcome):
    outcome, _ = corpus_outcome
    summary = bench.summarize(outcome.results)
    assert summary.median_transfer_reduction_pct >= 5.0
    assert summary.median_code_reduction_pct >= 5.0


# ---------------------------------------------------------------------------
# Criterion: breakeven reproduction

def test_breakeven_reproduction(capsys):
    assert cli_main([
        "breakeven", "--overhead-kwh", "1.1", "--rate", "0.13..0.16", "--json",
    ]) == 0
    reports = {r["reduction_rate"]: r for r in json.loads(capsys.readouterr().out)}
    assert abs(reports[0.16]["breakeven_frontend_kwh"] - 6.88) <= 0.01
    assert abs(reports[0.13]["breakeven_frontend_kwh"] - 8.46) <= 0.01

    assert cli_main([
        "breakeven", "--overhead-kwh", "0.6", "--rate", "0.13..0.16", "--json",
    ]) == 0
    reports = {r["reduction_rate"]: r for r in json.loads(capsys.readouterr().out)}
    assert abs(reports[0.16]["breakeven_frontend_kwh"] - 3.75) <= 0.01
    assert abs(reports[0.13]["breakeven_frontend_kwh"] - 4.62) <= 0.01

    # 4-5 kWh at 50 Wh per 1,000 views maps to 80k-100k views, exactly
    assert breakeven(0.20, 0.05, 50.0).breakeven_views == 80_000.0
    assert breakeven(0.25, 0.05, 50.0).breakeven_views == 100_000.0


# ---------------------------------------------------------------------------
# Criterion: diff/patch property suite

def _random_text(rng: random.Random, max_lines: int = 200) -> str:
    lines = [
        "".join(rng.choice("abxy") for _ in range(rng.randint(0, 3)))
        for _ in range(rng.randint(0, max_lines))
    ]
    return "\n".join(lines)


def test_diff_patch_property_suite():
    rng = random.Random(20240901)
    for _ in range(1000):
        a = _random_text(rng)
        b = _random_text(rng)
        patchset = diffpatch.unified_diff(a, b, context=3)
        patchset.set_all(diffpatch.ACCEPTED)
        assert diffpatch.apply_selected(a, patchset) == b
        patchset.set_all(diffpatch.REJECTED)
        assert diffpatch.apply_selected(a, patchset) == a

    # disjoint-subset composability on 200 randomized multi-hunk cases
    from test_diffpatch import splice_reconstruction

    for _ in range(200):
        n = rng.randint(16, 80)
        base = ["".join(rng.choice("abcdef") for _ in range(3)) for _ in range(n)]
        mutated = list(base)
        positions = rng.sample(range(n), k=rng.randint(2, min(4, n // 8)))
        for pos in positions:
            mutated[pos] = "EDIT" + str(pos)
        a = "\n".join(base)
        b = "\n".join(mutated)
        patchset = diffpatch.unified_diff(a, b, context=2)
        for hunk in patchset.hunks:
            hunk.state = rng.choice([diffpatch.ACCEPTED, diffpatch.REJECTED])
        assert diffpatch.apply_selected(a, patchset) == splice_reconstruction(
            a, b, patchset
        )

    # render/parse roundtrip, exact
    for _ in range(200):
        a = _random_text(rng, max_lines=60)
        b = _random_text(rng, max_lines=60)
        patchset = diffpatch.unified_diff(a, b, context=rng.randint(0, 4))
        rendered = diffpatch.render_patch(patchset)
        parsed = diffpatch.parse_patch(
            rendered, original_digest=patchset.original_digest,
            context=patchset.context_width,
        )
        assert parsed == patchset
        assert diffpatch.render_patch(parsed) == rendered


# ---------------------------------------------------------------------------
# Criterion: optimizer safety suite

def test_optimizer_safety_suite(fixture_bundles):
    for name, site in fixture_bundles.items():
        doc_before = htmlparse.parse_html(site.entry_asset.text)
        once, log = run_pipeline(site)
        twice, _ = run_pipeline(once)

        # pipeline idempotence: second run byte-identical
        assert {a.id: a.payload for a in once.assets} == {
            a.id: a.payload for a in twice.assets
        }, name

        # HTML structure preservation
        doc_after = htmlparse.parse_html(once.entry_asset.text)
        assert _structure_fingerprint(doc_before) == _structure_fingerprint(
            doc_after
        ), name

        # CSS parse-equivalence after minification
        for asset in site.by_class(B.CSS):
            if not asset.external:
                assert css_rule_shapes(minify_css(asset.text)) == css_rule_shapes(
                    asset.text
                ), name

        # script token-stream preservation (modulo stripped console calls)
        for asset in site.by_class(B.SCRIPT):
            if asset.external:
                continue
            after_asset = once.asset(asset.id)
            before_tokens = _tokens_without_console(asset.text)
            after_tokens = [
                (t.kind, t.text)
                for t in scriptlex.significant(scriptlex.tokenize(after_asset.text))
            ]
            assert after_tokens == before_tokens, name

        # zero removed CSS rules with any brute-force DOM match
        for finding in A.find_unused_css(site, doc_before):
            asset = site.asset(finding.asset_id)
            offset, length = map(int, finding.locator[5:].split("+"))
            for rule in cssparse.parse_css(
                asset.text[offset : offset + length]
            ).rules():
                for selector in rule.selectors:
                    assert not selector.assume_matches, name
                    assert brute_force_match_count(selector, doc_before) == 0, name

        # script/link order preservation
        assert _resource_order(doc_before) == _resource_order(doc_after), name


def _structure_fingerprint(doc):
    def clean(nodes):
        out = []
        for node in nodes:
            if isinstance(node, htmlparse.Element):
                attr_names = frozenset(node.attrs) - {"loading", "defer", "media",
                                                      "onload"}
                attrs = {
                    k: _normalize_ref(v)
                    for k, v in node.attrs.items()
                    if k in attr_names
                }
                out.append((node.tag, tuple(sorted(attrs.items())),
                            tuple(clean(node.children))))
        return out

    return clean(doc.children)


def _normalize_ref(value):
    if value is None:
        return None
    for ext in (".jpg", ".jpeg", ".png", ".gif"):
        if value.endswith(ext):
            return value[: -len(ext)] + ".*"
    if value.endswith(".avif"):
        return value[: -len(".avif")] + ".*"
    return value


def _tokens_without_console(text: str):
    tokens = scriptlex.significant(scriptlex.tokenize(text))
    drop = set()
    for start, stop in A.find_console_statements(tokens):
        drop.update(range(start, stop))
    return [
        (t.kind, t.text) for k, t in enumerate(tokens) if k not in drop
    ]


def _resource_order(doc):
    order = []
    for element in htmlparse.find_elements(doc):
        if element.tag == "script" and element.get("src"):
            order.append(("script", _normalize_ref(element.get("src"))))
        elif element.tag == "link" and element.get("href"):
            order.append(("link", _normalize_ref(element.get("href"))))
    return order


# ---------------------------------------------------------------------------
# Criterion: statistics oracle

def test_statistics_oracle():
    rng = random.Random(4242)
    for _ in range(50):
        nx, ny = rng.randint(3, 50), rng.randint(3, 50)
        x = [rng.gauss(rng.uniform(-3, 3), rng.uniform(0.3, 4)) for _ in range(nx)]
        y = [rng.gauss(rng.uniform(-3, 3), rng.uniform(0.3, 4)) for _ in range(ny)]
        got = stats.welch_t_test(x, y)
        ref = scipy.stats.ttest_ind(x, y, equal_var=False)
        assert abs(got.t - ref.statistic) < 1e-9
        assert abs(got.df - ref.df) < 1e-9
        assert abs(got.p_two_sided - ref.pvalue) < 1e-9

    ci = stats.mean_ci95([10.0, 12.0, 14.0])
    assert abs(ci.low - 7.03) <= 0.01
    assert abs(ci.high - 16.97) <= 0.01


# ---------------------------------------------------------------------------
# Criterion: energy model arithmetic

def test_energy_model_arithmetic():
    params = EnergyModelParams()
    estimate = estimate_from_counts(10**9, 0, params)
    assert estimate.total_joules == pytest.approx(2.916e6, rel=0, abs=1e-6)

    rng = random.Random(99)
    for _ in range(200):
        nbytes = rng.randint(0, 10**9)
        ops = rng.randint(0, 10**4)
        factor = rng.randint(1, 5)
        base = estimate_from_counts(nbytes, ops, params)
        scaled_bytes = estimate_from_counts(nbytes * factor, ops, params)
        scaled_ops = estimate_from_counts(nbytes, ops * factor, params)
        assert scaled_bytes.transfer_joules == pytest.approx(
            base.transfer_joules * factor
        )
        assert scaled_ops.cpu_joules == pytest.approx(base.cpu_joules * factor)
        bigger = estimate_from_counts(nbytes + 1000, ops + 1, params)
        assert bigger.total_joules > base.total_joules


# ---------------------------------------------------------------------------
# Criterion: service equivalence + backend validation gate

@pytest.fixture(scope="module")
def ten_service_fixtures(tmp_path_factory):
    base = tmp_path_factory.mktemp("service-fixtures")
    from helpers import FIXTURE_BUILDERS

    dirs = [builder(base / name) for name, builder in FIXTURE_BUILDERS.items()]
    for k in range(10 - len(dirs)):
        knobs = corpusgen.PageKnobs(
            image_count=1 + k % 3,
            image_kb=8 + 4 * k,
            image_format=("jpg", "png", "webp")[k % 3],
            unused_rules=k % 4,
            console_statements=k % 3,
        )
        dirs.append(corpusgen.generate_page(base / f"svc{k}", knobs, seed=900 + k))
    return [load_bundle(path) for path in dirs]


def test_service_equivalence(ten_service_fixtures):
    config = AppConfig()
    client = TestClient(create_app(config))
    assert len(ten_service_fixtures) == 10
    for site in ten_service_fixtures:
        response = client.post("/v1/optimize", json={"assets": bundle_to_wire(site)})
        assert response.status_code == 200
        view = response.json()

        optimized, _ = run_pipeline(site, config.pipeline)
        expected = {}
        by_id = {a.id: a for a in optimized.assets}
        for asset in site.assets:
            if asset.external or asset.cls not in B.TEXT_CLASSES:
                continue
            twin = by_id.get(asset.id)
            if twin is None or twin.text == asset.text:
                continue
            expected[asset.id] = diffpatch.render_patch(
                diffpatch.unified_diff(asset.text, twin.text, 3, asset_id=asset.id)
            )
        got = {p["asset"]: p["diff"] for p in view["patchsets"]}
        assert got == expected  # byte-identical diffs

        ops_before = A.bundle_dom_ops(site, config.analyzer)
        ops_after = A.bundle_dom_ops(optimized, config.analyzer)
        before = estimate_from_counts(
            bundle_weight(site, ops_before).total_bytes, ops_before, config.energy
        )
        after = estimate_from_counts(
            bundle_weight(optimized, ops_after).total_bytes, ops_after, config.energy
        )
        assert view["savings"]["before_j"] == before.total_joules
        assert view["savings"]["after_j"] == after.total_joules


def test_service_backend_validation_gate():
    import httpx

    from webwatt.config import BackendConfig

    page = "<html><head></head><body><p>safe page</p></body></html>"

    def evil_handler(request):
        body = page.replace(
            "</body>", '<script src="https://attacker.example/p.js"></script></body>'
        )
        return httpx.Response(
            200, json={"assets": [{"url": "index.html", "text": body}]}
        )

    config = AppConfig(
        backend=BackendConfig(
            mode="remote", remote_endpoint="https://model/o", fallback_to_rules=False
        )
    )
    client = TestClient(
        create_app(config, remote_transport=httpx.MockTransport(evil_handler))
    )
    response = client.post(
        "/v1/optimize",
        json={"assets": [{"url": "index.html", "text": page}]},
    )
    assert response.status_code == 502
    assert response.json()["detail"]["reason"] == "validation"
