from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import FIXTURE_BUILDERS  # noqa: E402

from webwatt import corpusgen  # noqa: E402
from webwatt.bundle import SiteBundle, load_bundle  # noqa: E402


@pytest.fixture(scope="session")
def fixture_bundle_dirs(tmp_path_factory) -> dict[str, Path]:
    """Handmade bundles plus a few generated ones, on disk once per run."""
    base = tmp_path_factory.mktemp("fixture-bundles")
    dirs: dict[str, Path] = {}
    for name, builder in FIXTURE_BUILDERS.items():
        dirs[name] = builder(base / name)
    knob_sets = {
        "gen-fat": corpusgen.PageKnobs(image_count=3, image_kb=24, image_format="jpg"),
        "gen-png": corpusgen.PageKnobs(
            image_count=2, image_kb=16, image_format="png",
            unused_rules=2, console_statements=1,
        ),
        "gen-lean": corpusgen.PageKnobs(
            image_count=2, image_kb=16, image_format="webp",
            css_comment_blocks=1, js_comment_blocks=1,
            unused_rules=0, console_statements=0,
        ),
    }
    for idx, (name, knobs) in enumerate(knob_sets.items()):
        dirs[name] = corpusgen.generate_page(base / name, knobs, seed=100 + idx)
    return dirs


@pytest.fixture(scope="session")
def fixture_bundles(fixture_bundle_dirs) -> dict[str, SiteBundle]:
    return {name: load_bundle(path) for name, path in fixture_bundle_dirs.items()}


@pytest.fixture(scope="session")
def acceptance_corpus(tmp_path_factory) -> Path:
    """The 30-page synthetic benchmark corpus."""
    corpus = tmp_path_factory.mktemp("acceptance-corpus")
    corpusgen.generate_corpus(corpus, pages=30, seed=7)
    return corpus


# ---------------------------------------------------------------------------
# Acceptance reporting: one pass/fail line per criterion at the end.

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE_RESULTS.append((name, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        status = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}")
