from __future__ import annotations

import math

import pytest

from helpers import brute_force_match_count

from webwatt import analyzer as A
from webwatt import bundle as B
from webwatt import cssparse, htmlparse, scriptlex
from webwatt import optimizer as O
from webwatt.bundle import Asset, load_bundle


# ---------------------------------------------------------------------------
# minify_html

def test_minify_html_collapses_and_preserves_pre():
    doc = htmlparse.parse_html(
        "<div>\n  <p>  hi   there </p>\n  <pre> a\n  b </pre>\n</div>"
    )
    out = O.minify_html(doc)
    assert out == "<div> <p> hi there </p> <pre> a\n  b </pre> </div>"


def test_minify_html_keeps_conditional_comments():
    doc = htmlparse.parse_html("<!--[if lt IE 9]><p>x</p><![endif]--><!--drop--><p>y</p>")
    out = O.minify_html(doc)
    assert "[if lt IE 9]" in out
    assert "drop" not in out


def test_minify_html_structure_preserved(fixture_bundles):
    for name, site in fixture_bundles.items():
        doc = htmlparse.parse_html(site.entry_asset.text)
        out = O.minify_html(doc)
        again = htmlparse.parse_html(out)
        assert htmlparse.structurally_equal(doc, again), name
        # script/style/pre interiors byte-identical
        for before, after in zip(
            htmlparse.find_elements(doc), htmlparse.find_elements(again)
        ):
            if before.tag in htmlparse.PRESERVE_WHITESPACE:
                before_text = htmlparse.text_content(htmlparse.Document(before.children))
                after_text = "".join(
                    c.content for c in after.children if isinstance(c, htmlparse.Text)
                )
                assert before_text == after_text, (name, before.tag)


# ---------------------------------------------------------------------------
# minify_css

def css_rule_shapes(text: str):
    """Comparable (selectors, declarations) sequence, values normalized the
    same way the minifier normalizes them."""
    def norm_selector(selector):
        return tuple(
            (c.tag, c.id, c.classes, c.unsupported) for c in selector.compounds
        )

    shapes = []

    def visit(items):
        for item in items:
            if isinstance(item, cssparse.CssRule):
                shapes.append(
                    (
                        tuple(norm_selector(s) for s in item.selectors),
                        tuple(
                            (d.prop, O.minify_css_value(d.value), d.important)
                            for d in item.declarations
                        ),
                    )
                )
            elif isinstance(item, cssparse.AtRule):
                shapes.append(("@" + item.name, " ".join(item.prelude.split())))
                if item.body is not None:
                    visit(item.body)
                if item.declarations is not None:
                    shapes.append(
                        tuple(
                            (d.prop, O.minify_css_value(d.value), d.important)
                            for d in item.declarations
                        )
                    )

    visit(cssparse.parse_css(text).items)
    return shapes


def test_minify_css_examples():
    assert O.minify_css("body { color: #ffffff ; }") == "body{color:#fff}"
    assert O.minify_css("") == ""
    assert O.minify_css(".a{margin:0 0 0 0}") == ".a{margin:0 0 0 0}"


def test_minify_css_hex_only_on_doubled_nibbles():
    assert O.minify_css("a{c:#aabbcc}") == "a{c:#abc}"
    assert O.minify_css("a{c:#aabbcd}") == "a{c:#aabbcd}"


def test_minify_css_unparsed_copied_verbatim():
    source = ".a { x: 1 }\n.b {"  # unterminated block is an unparsed span
    out = O.minify_css(source)
    assert out == ".a{x:1}.b {"


def test_minify_css_parse_equivalence(fixture_bundles):
    for name, site in fixture_bundles.items():
        for asset in site.by_class(B.CSS):
            if asset.external:
                continue
            minified = O.minify_css(asset.text)
            assert css_rule_shapes(minified) == css_rule_shapes(asset.text), name
            # and it is a fixed point
            assert O.minify_css(minified) == minified, name


# ---------------------------------------------------------------------------
# strip_unused_css

def _unused_findings(css: str, html: str = "<p class='keep'>x</p>"):
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as td:
        root = Path(td)
        (root / "index.html").write_text(
            f"<html><head><link rel=stylesheet href=a.css></head><body>{html}</body></html>",
            encoding="utf-8",
        )
        (root / "a.css").write_text(css, encoding="utf-8")
        site = load_bundle(root)
        return site.asset("a.css").text, A.find_unused_css(site)


def test_strip_unused_removes_exact_spans():
    css = ".keep{color:blue}.ghost{color:red}.keep2{x:1}"
    text, findings = _unused_findings(css)
    assert len(findings) == 2  # .ghost and .keep2
    ghost_only = [f for f in findings if "ghost" in f.note]
    out = O.strip_unused_css(text, ghost_only)
    assert out == ".keep{color:blue}.keep2{x:1}"
    assert len(out) == len(text) - 17


def test_strip_unused_zero_findings_identity():
    text, _ = _unused_findings(".keep{color:blue}")
    assert O.strip_unused_css(text, []) == text


def test_strip_unused_duplicates_deduped():
    css = ".keep{a:1}.ghost{b:2}"
    text, findings = _unused_findings(css)
    out = O.strip_unused_css(text, findings + findings)
    assert out == ".keep{a:1}"


def test_strip_unused_stale_span_aborts():
    text, findings = _unused_findings(".keep{a:1}.ghost{b:2}")
    with pytest.raises(O.StaleSpanError):
        O.strip_unused_css(text[:5], findings)


# ---------------------------------------------------------------------------
# minify_script / strip_console

def test_minify_script_examples():
    assert O.minify_script("// c\nlet a = 1;") == "let a=1;"
    out = O.minify_script('let s = "// not a comment";')
    assert out == 'let s="// not a comment";'
    assert O.minify_script('console.log("hi"); work();', strip_console=True) == "work();"


def test_minify_script_token_stream_preserved(fixture_bundles):
    for name, site in fixture_bundles.items():
        for asset in site.by_class(B.SCRIPT):
            if asset.external:
                continue
            original = [
                (t.kind, t.text)
                for t in scriptlex.significant(scriptlex.tokenize(asset.text))
            ]
            minified = O.minify_script(asset.text)
            emitted = [
                (t.kind, t.text)
                for t in scriptlex.significant(scriptlex.tokenize(minified))
            ]
            assert emitted == original, name


def test_strip_console_keeps_other_bytes():
    text = "var a = 1;\nconsole.log(a);\nvar b = 2;\n"
    out, count = O.strip_console_text(text)
    assert count == 1
    assert out == "var a = 1;\n\nvar b = 2;\n"


def test_strip_console_not_at_expression_position():
    text = "var x = console.log(1);"
    out, count = O.strip_console_text(text)
    assert count == 0 and out == text


# ---------------------------------------------------------------------------
# optimize_svg

def test_optimize_svg_examples():
    assert O.optimize_svg("<svg><!--x--><rect/></svg>") == "<svg><rect/></svg>"
    out = O.optimize_svg('<svg><path d="1.23456 7"/></svg>')
    assert '"1.235 7"' in out
    bad = "<svg><unclosed"
    assert O.optimize_svg(bad) == bad


def test_optimize_svg_drops_editor_cruft():
    svg = (
        '<svg xmlns="http://www.w3.org/2000/svg" '
        'xmlns:inkscape="http://www.inkscape.org/ns" inkscape:version="1.0">'
        "<metadata>m</metadata><inkscape:grid/><rect inkscape:label=\"r\"/></svg>"
    )
    out = O.optimize_svg(svg)
    assert "inkscape" not in out
    assert "metadata" not in out
    assert "<rect/>" in out


# ---------------------------------------------------------------------------
# defer / lazy

def test_defer_added_in_head():
    doc = htmlparse.parse_html(
        "<html><head><script src=a.js></script></head><body></body></html>"
    )
    out = O.defer_scripts(doc)
    script = htmlparse.find_elements(out, "script")[0]
    assert script.has("defer")


def test_defer_skips_document_write_sources():
    doc = htmlparse.parse_html(
        "<html><head><script src=a.js></script></head><body></body></html>"
    )
    out = O.defer_scripts(doc, lambda src: "document.write('x')")
    assert not htmlparse.find_elements(out, "script")[0].has("defer")


def test_defer_leaves_body_scripts_and_modules():
    doc = htmlparse.parse_html(
        "<html><head><script src=m.js type=module></script></head>"
        "<body><script src=b.js></script></body></html>"
    )
    out = O.defer_scripts(doc)
    module, body_script = htmlparse.find_elements(out, "script")
    assert not module.has("defer")
    assert not body_script.has("defer")


def test_lazy_images_fold():
    imgs = "".join(f"<img src=i{k}.png>" for k in range(5))
    doc = htmlparse.parse_html(f"<body>{imgs}</body>")
    out = O.lazy_images(doc, 3)
    loads = [img.get("loading") for img in htmlparse.find_elements(out, "img")]
    assert loads == [None, None, None, "lazy", "lazy"]


def test_lazy_images_never_overwrites():
    doc = htmlparse.parse_html('<body><img src=a.png loading="eager"></body>')
    out = O.lazy_images(doc, 0)
    assert htmlparse.find_elements(out, "img")[0].get("loading") == "eager"


def test_lazy_images_fold_zero():
    doc = htmlparse.parse_html("<body><img src=a.png><img src=b.png></body>")
    out = O.lazy_images(doc, 0)
    assert all(
        img.get("loading") == "lazy" for img in htmlparse.find_elements(out, "img")
    )


# ---------------------------------------------------------------------------
# image / font plans

def _image_asset(name: str, payload: bytes) -> Asset:
    return Asset(id=name, cls=B.IMAGE, url=name, bytes=len(payload), payload=payload)


def test_image_plan_projects_ratio():
    asset = _image_asset("img/a.jpg", b"\xff\xd8\xff" + b"\0" * 699_997)
    plan = O.plan_image_conversion(asset)
    assert plan is not None
    assert plan.record.bytes_after == 350_000
    assert plan.asset.id == "img/a.avif"
    assert plan.asset.bytes == 350_000 == len(plan.asset.payload)


def test_image_plan_skips_modern_formats():
    avif = _image_asset("a.avif", b"\0\0\0\0ftypavif" + b"\0" * 100)
    assert O.plan_image_conversion(avif) is None
    webp = _image_asset("a.webp", b"RIFF\0\0\0\0WEBP" + b"\0" * 100)
    assert O.plan_image_conversion(webp) is None


def test_image_plan_unknown_format_skip_record():
    bmp = _image_asset("a.bmp", b"BM" + b"\0" * 100)
    plan = O.plan_image_conversion(bmp)
    assert plan.record.status == O.SKIPPED
    assert plan.asset is bmp


def test_image_plan_routes_svg():
    svg = Asset(id="a.svg", cls=B.SVG, url="a.svg",
                bytes=30, payload="<svg><!--c--><rect/></svg>")
    plan = O.plan_image_conversion(svg)
    assert plan.record.kind == O.OPTIMIZE_SVG
    assert plan.asset.text == "<svg><rect/></svg>"


def _font_bundle(tmp_path, body_text: str, font_bytes: int = 80_000):
    root = tmp_path / "fonts"
    root.mkdir()
    (root / "index.html").write_text(
        "<html><head><link rel=stylesheet href=a.css></head>"
        f"<body><p>{body_text}</p></body></html>",
        encoding="utf-8",
    )
    (root / "a.css").write_text(
        "@font-face{font-family:'F';src:url(f.woff)}body{font-family:'F'}",
        encoding="utf-8",
    )
    (root / "f.woff").write_bytes(b"wOFF" + b"\0" * (font_bytes - 4))
    return load_bundle(root)


def test_font_subset_projection(tmp_path):
    # 55 distinct characters in the document text
    distinct = "".join(chr(ord("a") + k) for k in range(26))
    distinct += "".join(chr(ord("A") + k) for k in range(26))
    distinct += "012"
    site = _font_bundle(tmp_path, distinct)
    doc = htmlparse.parse_html(site.entry_asset.text)
    assert len(set(htmlparse.text_content(doc))) == 55
    plans = O.plan_font_subset(site)
    assert len(plans) == 1
    assert plans[0].record.bytes_after == math.ceil(80_000 * 55 / 220)  # 20000
    assert plans[0].asset.id == "f.sub.woff"


def test_font_subset_floor(tmp_path):
    site = _font_bundle(tmp_path, "aa")
    plans = O.plan_font_subset(site)
    # 3 distinct chars incl whitespace would project below the 5% floor
    assert plans[0].record.bytes_after == math.ceil(80_000 * 0.05)


def test_font_subset_ignores_unused_faces(tmp_path):
    root = tmp_path / "uf"
    root.mkdir()
    (root / "index.html").write_text(
        "<html><head><link rel=stylesheet href=a.css></head><body>t</body></html>",
        encoding="utf-8",
    )
    (root / "a.css").write_text(
        "@font-face{font-family:'Ghost';src:url(g.woff)}p{color:red}",
        encoding="utf-8",
    )
    (root / "g.woff").write_bytes(b"wOFF" + b"\0" * 96)
    site = load_bundle(root)
    assert O.plan_font_subset(site) == []


# ---------------------------------------------------------------------------
# critical CSS

def _critical_bundle(tmp_path, css: str, body: str):
    root = tmp_path / "crit"
    root.mkdir()
    (root / "index.html").write_text(
        "<html><head><link rel=\"stylesheet\" href=\"css/site.css\"></head>"
        f"<body>{body}</body></html>",
        encoding="utf-8",
    )
    (root / "css").mkdir()
    (root / "css" / "site.css").write_text(css, encoding="utf-8")
    return load_bundle(root)


def test_critical_css_inlines_fold_rules(tmp_path):
    body = "<div class='hero'>h</div>" + "<p>x</p>" * 60
    css = ".hero{color:red}\np{margin:0}\n.footer{color:blue}"
    site = _critical_bundle(tmp_path, css, body)
    out = O.inline_critical_css(site, budget=10)
    entry = out.entry_asset.text
    assert "<style>" in entry
    assert ".hero{color:red}" in entry
    assert ".footer" not in entry.split("<style>")[1]
    assert (
        '<link rel="stylesheet" href="css/site.css" media="print" '
        "onload=\"this.media='all'\">" in entry
    )


def test_critical_css_excludes_deep_rules(tmp_path):
    body = "<p>x</p>" * 49 + "<div class='deep'>d</div>"
    css = ".deep{color:red}"
    site = _critical_bundle(tmp_path, css, body)
    out = O.inline_critical_css(site, budget=10)
    assert out is site  # nothing critical in the first 10 elements


def test_critical_css_noop_without_body_styles(tmp_path):
    root = tmp_path / "inline-only"
    root.mkdir()
    (root / "index.html").write_text(
        "<html><head><style>p{x:1}</style></head><body><p>t</p></body></html>",
        encoding="utf-8",
    )
    site = load_bundle(root)
    assert O.inline_critical_css(site, budget=10) is site


# ---------------------------------------------------------------------------
# pipeline

def test_pipeline_reduces_messy_bundle(fixture_bundles):
    site = fixture_bundles["messy"]
    optimized, log = O.run_pipeline(site)
    assert len(log.records) >= 3
    assert log.total_bytes_after < log.total_bytes_before
    accepted_kinds = {r.kind for r in log.accepted()}
    assert O.STRIP_UNUSED_CSS in accepted_kinds
    assert O.MINIFY_CSS in accepted_kinds
    assert O.DEFER_SCRIPT in accepted_kinds


def test_pipeline_disabled_is_identity(fixture_bundles):
    site = fixture_bundles["messy"]
    config = O.PipelineConfig(enabled=())
    optimized, log = O.run_pipeline(site, config)
    assert log.records == []
    assert {a.id: a.payload for a in optimized.assets} == {
        a.id: a.payload for a in site.assets
    }


def test_pipeline_idempotent_byte_identical(fixture_bundles):
    for name, site in fixture_bundles.items():
        once, _ = O.run_pipeline(site)
        twice, log2 = O.run_pipeline(once)
        payloads_once = {a.id: a.payload for a in once.assets}
        payloads_twice = {a.id: a.payload for a in twice.assets}
        assert payloads_once == payloads_twice, name


def test_pipeline_second_run_rejects_byte_reducers(fixture_bundles):
    once, _ = O.run_pipeline(fixture_bundles["messy"])
    _, log = O.run_pipeline(once)
    for record in log.records:
        if record.kind in (O.MINIFY_CSS, O.MINIFY_SCRIPT, O.MINIFY_HTML):
            assert record.bytes_after == record.bytes_before
            assert record.status == O.REJECTED


def test_pipeline_preserves_script_and_link_order(fixture_bundles):
    for name, site in fixture_bundles.items():
        optimized, _ = O.run_pipeline(site)

        def order(bundle):
            doc = htmlparse.parse_html(bundle.entry_asset.text)
            out = []
            for el in htmlparse.find_elements(doc):
                if el.tag == "script" and el.get("src"):
                    out.append(("script", el.get("src").rsplit(".", 1)[0]))
                elif el.tag == "link" and el.get("href"):
                    out.append(("link", el.get("href").rsplit(".", 1)[0]))
            return out

        assert order(site) == order(optimized), name


def test_pipeline_unused_removals_are_sound(fixture_bundles):
    """Everything the pipeline strips must have zero matches per the
    brute-force oracle, and the strip stage must remove exactly the spans
    of those findings."""
    for name, site in fixture_bundles.items():
        doc = htmlparse.parse_html(site.entry_asset.text)
        findings = A.find_unused_css(site, doc)
        _, log = O.run_pipeline(site)
        stripped_assets = {
            r.asset_id for r in log.records
            if r.kind == O.STRIP_UNUSED_CSS and r.status == O.ACCEPTED
        }
        assert stripped_assets == {f.asset_id for f in findings} or not findings
        for finding in findings:
            asset = site.asset(finding.asset_id)
            offset, length = map(int, finding.locator[5:].split("+"))
            rule_text = asset.text[offset : offset + length]
            for rule in cssparse.parse_css(rule_text).rules():
                for selector in rule.selectors:
                    assert not selector.assume_matches, (name, rule_text)
                    assert brute_force_match_count(selector, doc) == 0, (
                        name, rule_text,
                    )


def test_pipeline_record_byte_invariants(fixture_bundles):
    for site in fixture_bundles.values():
        _, log = O.run_pipeline(site)
        for record in log.accepted():
            if record.kind in (O.DEFER_SCRIPT, O.LAZY_IMAGE):
                targets = record.detail.get("targets", 1)
                assert record.bytes_after - record.bytes_before <= 32 * targets
            elif record.kind != O.INLINE_CRITICAL_CSS:
                assert record.bytes_after <= record.bytes_before


def test_pipeline_log_totals_consistent(fixture_bundles):
    site = fixture_bundles["messy"]
    optimized, log = O.run_pipeline(site)
    assert log.total_bytes_before == sum(a.bytes for a in site.assets)
    assert log.total_bytes_after == sum(a.bytes for a in optimized.assets)


def test_pipeline_rewrites_image_references(fixture_bundles):
    site = fixture_bundles["messy"]
    optimized, log = O.run_pipeline(site)
    entry = optimized.entry_asset.text
    assert "img/a.avif" in entry
    assert "img/a.jpg" not in entry
    assert any(a.id == "img/a.avif" for a in optimized.assets)
