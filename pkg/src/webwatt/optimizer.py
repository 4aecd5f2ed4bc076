"""Rule-based transformations and the optimization pipeline.

Every transformation is conservative: minification never renames
identifiers, rule removal only happens when the analyzer proved zero
matches, and anything that cannot be transformed safely is skipped and
recorded. The pipeline applies stages in a fixed order and keeps a stage's
output only if it lowers the bundle's estimated energy (structural changes
like defer/lazy are exempt from the gate); everything else is reverted and
logged as rejected.
"""

from __future__ import annotations

import copy
import math
import re
from dataclasses import dataclass, field, replace

from . import analyzer as analyzermod
from . import bundle as bundlemod
from . import cssparse, htmlparse, scriptlex, svgopt
from .analyzer import AnalyzerConfig, Finding
from .bundle import Asset, SiteBundle
from .energy import EnergyModelParams, estimate_from_counts
from .htmlparse import Comment, Doctype, Document, Element, Text

MINIFY_HTML = "minify_html"
MINIFY_CSS = "minify_css"
STRIP_UNUSED_CSS = "strip_unused_css"
MINIFY_SCRIPT = "minify_script"
STRIP_CONSOLE = "strip_console"
OPTIMIZE_SVG = "optimize_svg"
DEFER_SCRIPT = "defer_script"
LAZY_IMAGE = "lazy_image"
IMAGE_CONVERSION_PLAN = "image_conversion_plan"
FONT_SUBSET_PLAN = "font_subset_plan"
INLINE_CRITICAL_CSS = "inline_critical_css"

TRANSFORMATION_KINDS = (
    MINIFY_HTML,
    MINIFY_CSS,
    STRIP_UNUSED_CSS,
    MINIFY_SCRIPT,
    STRIP_CONSOLE,
    OPTIMIZE_SVG,
    DEFER_SCRIPT,
    LAZY_IMAGE,
    IMAGE_CONVERSION_PLAN,
    FONT_SUBSET_PLAN,
    INLINE_CRITICAL_CSS,
)

# Kept even though they may add a few bytes of markup.
STRUCTURE_ONLY_KINDS = frozenset({DEFER_SCRIPT, LAZY_IMAGE})

ACCEPTED = "accepted"
REJECTED = "rejected"
SKIPPED = "skipped"

DEFAULT_IMAGE_RATIOS = {"jpeg": 0.50, "png": 0.30, "gif": 0.40}

FONT_SUBSET_MARKER = ".sub"

DEFERRED_STYLESHEET_ONLOAD = "this.media='all'"


class StaleSpanError(Exception):
    """A finding's span no longer fits the payload it names."""


@dataclass
class TransformationRecord:
    kind: str
    asset_id: str
    bytes_before: int
    bytes_after: int
    status: str = ACCEPTED
    detail: dict = field(default_factory=dict)


@dataclass
class TransformationLog:
    records: list[TransformationRecord] = field(default_factory=list)
    total_bytes_before: int = 0
    total_bytes_after: int = 0

    def accepted(self) -> list[TransformationRecord]:
        return [r for r in self.records if r.status == ACCEPTED]


@dataclass(frozen=True)
class PipelineConfig:
    enabled: tuple[str, ...] = TRANSFORMATION_KINDS
    strip_console: bool = True
    lazy_fold_count: int = 3
    critical_inline_budget: int = 10
    image_ratio_table: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_IMAGE_RATIOS)
    )
    font_glyph_budget: int = 220
    font_ratio_floor: float = 0.05
    energy: EnergyModelParams = field(default_factory=EnergyModelParams)
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        kwargs = dict(data)
        if "enabled" in kwargs:
            kwargs["enabled"] = tuple(kwargs["enabled"])
        if "analyzer" in kwargs and isinstance(kwargs["analyzer"], dict):
            kwargs["analyzer"] = AnalyzerConfig.from_dict(kwargs["analyzer"])
        if "energy" in kwargs and isinstance(kwargs["energy"], dict):
            kwargs["energy"] = EnergyModelParams(**kwargs["energy"])
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in kwargs.items() if k in known})


@dataclass
class PlanResult:
    asset: Asset
    record: TransformationRecord


# ---------------------------------------------------------------------------
# HTML

_ASCII_WS_RE = re.compile(r"[ \t\n\r\f\v]+")


def minify_html(doc: Document) -> str:
    """Drop comments (conditional ones stay), collapse inter-element
    whitespace to single spaces; pre/textarea/script/style interiors are
    untouched. Attribute order is preserved."""

    def push_text(out: list, content: str, preserve: bool) -> None:
        # Comment removal can leave adjacent text nodes; merge them so the
        # collapsed output is a fixed point of reminification.
        if out and isinstance(out[-1], Text):
            content = out.pop().content + content
        if not preserve:
            content = _ASCII_WS_RE.sub(" ", content)
        if content:
            out.append(Text(content))

    def clean(nodes: list, preserve: bool) -> list:
        out = []
        for node in nodes:
            if isinstance(node, Comment):
                if node.content.startswith("[if"):
                    out.append(Comment(node.content))
                continue
            if isinstance(node, Text):
                push_text(out, node.content, preserve)
                continue
            if isinstance(node, Doctype):
                out.append(Doctype(node.content))
                continue
            inner_preserve = preserve or node.tag in htmlparse.PRESERVE_WHITESPACE
            out.append(
                Element(
                    node.tag,
                    dict(node.attrs),
                    clean(node.children, inner_preserve),
                    node.self_closing,
                )
            )
        return out

    return htmlparse.render_html(Document(clean(doc.children, False)))


# ---------------------------------------------------------------------------
# CSS

_HEX6_RE = re.compile(r"#([0-9a-fA-F]{6})\b")


def _shorten_hex(match: re.Match) -> str:
    digits = match.group(1)
    if digits[0] == digits[1] and digits[2] == digits[3] and digits[4] == digits[5]:
        return "#" + digits[0] + digits[2] + digits[4]
    return match.group(0)


def minify_css_value(value: str) -> str:
    value = _ASCII_WS_RE.sub(" ", value).strip()
    if '"' not in value and "'" not in value:
        value = re.sub(r"\s*,\s*", ",", value)
    return _HEX6_RE.sub(_shorten_hex, value)


def _minify_selector(selector: cssparse.Selector) -> str:
    return _ASCII_WS_RE.sub(" ", selector.raw).strip()


def _serialize_declarations(decls: list[cssparse.Declaration]) -> str:
    parts = []
    for decl in decls:
        text = f"{decl.prop.strip()}:{minify_css_value(decl.value)}"
        if decl.important:
            text += "!important"
        parts.append(text)
    return ";".join(parts)


def _serialize_item(item: cssparse.CssItem, source: str) -> str:
    if isinstance(item, cssparse.CssRule):
        selectors = ",".join(_minify_selector(s) for s in item.selectors)
        return f"{selectors}{{{_serialize_declarations(item.declarations)}}}"
    prelude = _ASCII_WS_RE.sub(" ", item.prelude).strip()
    head = f"@{item.name} {prelude}" if prelude else f"@{item.name}"
    if item.body is not None:
        inner = "".join(_serialize_item(child, source) for child in item.body)
        return f"{head}{{{inner}}}"
    if item.declarations is not None:
        return f"{head}{{{_serialize_declarations(item.declarations)}}}"
    if item.raw_body is not None:
        return f"{head}{{{item.raw_body}}}"
    return f"{head};"


def minify_css(text: str) -> str:
    """Re-serialize parsed rules without comments or spare whitespace.
    Unparsed regions are copied verbatim in their original positions."""
    sheet = cssparse.parse_css(text)
    pieces: list[tuple[int, str]] = []
    for item in sheet.items:
        pieces.append((item.span[0], _serialize_item(item, text)))
    for offset, length in sheet.unparsed:
        pieces.append((offset, text[offset : offset + length]))
    pieces.sort(key=lambda p: p[0])
    return "".join(piece for _, piece in pieces)


def finding_span(finding: Finding) -> tuple[int, int] | None:
    if finding.locator.startswith("span:"):
        offset, _, length = finding.locator[5:].partition("+")
        return int(offset), int(length)
    return None


def strip_unused_css(text: str, findings: list[Finding]) -> str:
    """Remove exactly the spans of the given findings; everything outside
    those spans is byte-identical. Raises StaleSpanError if any span does
    not fit the payload."""
    spans: set[tuple[int, int]] = set()
    for finding in findings:
        span = finding_span(finding)
        if span is None:
            continue
        offset, length = span
        if offset < 0 or length < 0 or offset + length > len(text):
            raise StaleSpanError(
                f"span {offset}+{length} exceeds payload of {len(text)} chars"
            )
        spans.add(span)
    out = text
    for offset, length in sorted(spans, reverse=True):
        out = out[:offset] + out[offset + length :]
    return out


# ---------------------------------------------------------------------------
# Scripts

def strip_console_text(text: str) -> tuple[str, int]:
    """Remove top-level console.<name>(...) statements by source span;
    all other bytes stay verbatim."""
    tokens = scriptlex.significant(scriptlex.tokenize(text))
    spans = analyzermod.find_console_statements(tokens)
    out = text
    for start, stop in reversed(spans):
        first, last = tokens[start], tokens[stop - 1]
        out = out[: first.pos] + out[last.pos + len(last.text) :]
    return out, len(spans)


def minify_script(text: str, strip_console: bool = False) -> str:
    """Comment and whitespace removal only; identifiers are never renamed.
    Line breaks between tokens survive so semicolon insertion semantics
    cannot change."""
    if strip_console:
        text, _ = strip_console_text(text)
    return scriptlex.emit_min(scriptlex.tokenize(text))


# ---------------------------------------------------------------------------
# SVG

def optimize_svg(text: str) -> str:
    """Minified SVG; input returned unchanged when not well-formed XML."""
    result = svgopt.optimize_svg(text)
    return text if result is None else result


# ---------------------------------------------------------------------------
# Structural document transforms

def defer_scripts(doc: Document, script_text_lookup=None) -> Document:
    """Add ``defer`` to external head scripts that lack defer/async/module.
    A script whose source contains document.write is left alone; body
    scripts are already non-blocking by position and are not touched."""
    new_doc = copy.deepcopy(doc)
    heads = htmlparse.find_elements(new_doc, "head")
    if not heads:
        return new_doc
    for script in htmlparse.find_elements(Document(heads[0].children), "script"):
        src = script.get("src")
        if not src:
            continue
        if script.has("defer") or script.has("async"):
            continue
        if (script.get("type") or "").lower() == "module":
            continue
        if script_text_lookup is not None:
            body = script_text_lookup(src)
            if body is not None and "document.write" in body:
                continue
        script.attrs["defer"] = None
    return new_doc


def lazy_images(doc: Document, fold_count: int = 3) -> Document:
    """loading="lazy" for every img after the first ``fold_count`` in
    document order; existing loading values are never overwritten."""
    if fold_count < 0:
        raise ValueError("fold_count must be >= 0")
    new_doc = copy.deepcopy(doc)
    for img in htmlparse.find_elements(new_doc, "img")[fold_count:]:
        if img.has("loading"):
            continue
        img.attrs["loading"] = "lazy"
    return new_doc


# ---------------------------------------------------------------------------
# Size-projection plans (image transcode, font subset)

def _projected_payload(payload: bytes, size: int) -> bytes:
    if size <= len(payload):
        return payload[:size]
    return payload + b"\0" * (size - len(payload))


def _avif_name(name: str) -> str:
    stem, _, _ = name.rpartition(".")
    return (stem or name) + ".avif"


def plan_image_conversion(
    asset: Asset, ratio_table: dict[str, float] | None = None
) -> PlanResult | None:
    """Projected transcode to AVIF using the configured size-ratio table.

    Default backend rewrites the asset name and projects the byte size
    deterministically (payload is a placeholder of the projected length);
    a real codec can be plugged in where the projection is made. Inputs
    already in a modern format return None; unknown raster formats are
    skipped with a record. SVG assets route to optimize_svg.
    """
    ratios = ratio_table if ratio_table is not None else DEFAULT_IMAGE_RATIOS
    if asset.cls == bundlemod.SVG:
        optimized = optimize_svg(asset.text)
        new_bytes = len(optimized.encode("utf-8"))
        return PlanResult(
            replace(asset, payload=optimized, bytes=new_bytes),
            TransformationRecord(
                OPTIMIZE_SVG, asset.id, asset.bytes, new_bytes,
                detail={"routed_from": IMAGE_CONVERSION_PLAN},
            ),
        )
    if asset.cls != bundlemod.IMAGE or asset.external:
        return None
    fmt = bundlemod.raster_format(asset)
    if fmt in ("avif", "webp"):
        return None  # already efficient; nothing to plan
    if fmt is None or fmt not in ratios:
        return PlanResult(
            asset,
            TransformationRecord(
                IMAGE_CONVERSION_PLAN, asset.id, asset.bytes, asset.bytes,
                status=SKIPPED,
                detail={"reason": f"no conversion ratio for format {fmt!r}"},
            ),
        )
    projected = math.ceil(asset.bytes * ratios[fmt])
    payload = asset.payload if isinstance(asset.payload, bytes) else b""
    new_url = _avif_name(asset.url)
    new_asset = Asset(
        id=_avif_name(asset.id),
        cls=bundlemod.IMAGE,
        url=new_url,
        bytes=projected,
        payload=_projected_payload(payload, projected),
    )
    record = TransformationRecord(
        IMAGE_CONVERSION_PLAN, asset.id, asset.bytes, projected,
        detail={
            "source_format": fmt,
            "ratio": ratios[fmt],
            "url_before": asset.url,
            "url_after": new_url,
        },
    )
    return PlanResult(new_asset, record)


def _subset_name(name: str) -> str:
    stem, dot, ext = name.rpartition(".")
    if not dot:
        return name + FONT_SUBSET_MARKER
    return f"{stem}{FONT_SUBSET_MARKER}.{ext}"


def plan_font_subset(
    site: SiteBundle,
    doc: Document | None = None,
    glyph_budget: int = 220,
    ratio_floor: float = 0.05,
) -> list[PlanResult]:
    """Projected subsetting for fonts referenced by a used @font-face.

    The projected size scales with the count of distinct characters in the
    document's text, clamped to a floor so a projection can never reach
    zero. Already-subsetted fonts (name marker) are left alone; unused
    fonts are the unused_font finding's business, not subsetting.
    """
    if doc is None:
        doc = htmlparse.parse_html(site.entry_asset.text)
    unused = analyzermod.find_unused_css(site, doc)
    used_families = analyzermod._used_font_families(site, unused)
    distinct_chars = len(set(htmlparse.text_content(doc)))
    ratio = max(ratio_floor, min(1.0, distinct_chars / glyph_budget))
    results: list[PlanResult] = []
    for css_id, family, src, _span in analyzermod.font_face_entries(site):
        if not family or family.lower() not in used_families:
            continue
        target = site.manifest.get(src)
        if target is None:
            continue
        try:
            font_asset = site.asset(target)
        except KeyError:
            continue
        if font_asset.external or FONT_SUBSET_MARKER + "." in font_asset.id:
            continue
        projected = math.ceil(font_asset.bytes * ratio)
        if projected >= font_asset.bytes:
            continue
        payload = font_asset.payload if isinstance(font_asset.payload, bytes) else b""
        new_asset = Asset(
            id=_subset_name(font_asset.id),
            cls=bundlemod.FONT,
            url=_subset_name(font_asset.url),
            bytes=projected,
            payload=_projected_payload(payload, projected),
        )
        record = TransformationRecord(
            FONT_SUBSET_PLAN, font_asset.id, font_asset.bytes, projected,
            detail={
                "family": family,
                "distinct_chars": distinct_chars,
                "ratio": round(ratio, 6),
                "css_asset": css_id,
                "url_before": font_asset.url,
                "url_after": new_asset.url,
            },
        )
        results.append(PlanResult(new_asset, record))
    return results


# ---------------------------------------------------------------------------
# Critical CSS inlining

def _first_body_elements(doc: Document, budget: int) -> list[Element]:
    bodies = htmlparse.find_elements(doc, "body")
    if not bodies:
        return []
    elements = htmlparse.find_elements(Document(bodies[0].children))
    return elements[:budget]


def inline_critical_css(site: SiteBundle, budget: int = 10) -> SiteBundle:
    """Copy rules matching the first ``budget`` body elements into an
    inline <style>, and switch stylesheet links to deferred loading.
    Rule text is copied verbatim; selectors the matcher cannot model are
    treated as critical so rendering can never lose a needed rule."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    doc = htmlparse.parse_html(site.entry_asset.text)
    fold = _first_body_elements(doc, budget)
    if not fold:
        return site
    fold_ids = {id(el) for el in fold}
    parents = htmlparse.parent_map(doc)

    critical_parts: list[str] = []
    deferred_assets: set[str] = set()
    for asset in site.by_class(bundlemod.CSS):
        if asset.external:
            continue
        sheet = cssparse.parse_css(asset.text)
        asset_critical: list[str] = []
        for rule in sheet.rules():
            if _rule_is_critical(rule, fold, fold_ids, parents):
                offset, length = rule.span
                asset_critical.append(sheet.source[offset : offset + length])
        if asset_critical:
            critical_parts.extend(asset_critical)
            deferred_assets.add(asset.id)
    if not critical_parts:
        return site

    new_doc = copy.deepcopy(doc)
    heads = htmlparse.find_elements(new_doc, "head")
    if not heads:
        return site
    style = Element("style", {}, [Text("\n".join(critical_parts))])
    heads[0].children.append(style)
    for link in htmlparse.find_elements(new_doc, "link"):
        rel = (link.get("rel") or "").lower()
        href = link.get("href")
        if rel != "stylesheet" or not href:
            continue
        if site.manifest.get(href) in deferred_assets and not link.has("media"):
            link.attrs["media"] = "print"
            link.attrs["onload"] = DEFERRED_STYLESHEET_ONLOAD

    new_bundle = bundlemod.clone_bundle(site)
    entry = new_bundle.asset(new_bundle.entry)
    entry.payload = htmlparse.render_html(new_doc)
    entry.bytes = len(entry.payload.encode("utf-8"))
    return new_bundle


def _rule_is_critical(rule, fold, fold_ids, parents) -> bool:
    for selector in rule.selectors:
        if selector.assume_matches:
            return True  # cannot prove it is not above the fold
        for element in fold:
            if analyzermod._matches_chain(element, selector.compounds, parents):
                return True
    return False


# ---------------------------------------------------------------------------
# Pipeline

@dataclass
class _Work:
    assets: dict[str, Asset]
    manifest: dict[str, str]
    entry_id: str
    doc: Document
    script_ops: dict[str, int]
    inline_ops: int

    def total_bytes(self) -> int:
        return sum(a.bytes for a in self.assets.values())

    def dom_ops(self) -> int:
        return sum(self.script_ops.values()) + self.inline_ops

    def energy(self, params: EnergyModelParams) -> float:
        return estimate_from_counts(
            self.total_bytes(), self.dom_ops(), params
        ).total_joules

    def entry_asset(self) -> Asset:
        return self.assets[self.entry_id]

    def set_text(self, asset_id: str, text: str) -> None:
        asset = self.assets[asset_id]
        asset.payload = text
        asset.bytes = len(text.encode("utf-8"))

    def to_bundle(self) -> SiteBundle:
        return SiteBundle(
            entry=self.entry_id,
            assets=list(self.assets.values()),
            manifest=dict(self.manifest),
        )


def run_pipeline(
    site: SiteBundle, config: PipelineConfig | None = None
) -> tuple[SiteBundle, TransformationLog]:
    """Apply all enabled transformations in fixed order with per-record
    energy gating. A failing transformation is recorded and skipped; the
    pipeline never aborts the bundle."""
    config = config or PipelineConfig()
    enabled = frozenset(config.enabled)
    log = TransformationLog(total_bytes_before=sum(a.bytes for a in site.assets))

    working = bundlemod.clone_bundle(site)
    doc = htmlparse.parse_html(working.asset(working.entry).text)
    script_ops = {
        a.id: analyzermod.count_dom_ops(a.text, config.analyzer.dom_op_patterns)
        for a in working.by_class(bundlemod.SCRIPT)
        if not a.external
    }
    inline_ops = sum(
        analyzermod.count_dom_ops(t, config.analyzer.dom_op_patterns)
        for t in analyzermod.inline_scripts(doc)
    )
    work = _Work(
        assets={a.id: a for a in working.assets},
        manifest=dict(working.manifest),
        entry_id=working.entry,
        doc=doc,
        script_ops=script_ops,
        inline_ops=inline_ops,
    )

    findings = analyzermod.detect_findings(site, config.analyzer)

    if STRIP_UNUSED_CSS in enabled:
        _stage_strip_unused_css(work, findings, config, log)
    if MINIFY_CSS in enabled:
        _stage_minify_css(work, config, log)
    if STRIP_CONSOLE in enabled and config.strip_console:
        _stage_strip_console(work, config, log)
    if MINIFY_SCRIPT in enabled:
        _stage_minify_script(work, config, log)
    if OPTIMIZE_SVG in enabled:
        _stage_optimize_svg(work, config, log)
    if IMAGE_CONVERSION_PLAN in enabled:
        _stage_image_plans(work, config, log)
    if FONT_SUBSET_PLAN in enabled:
        _stage_font_plans(work, config, log)
    if DEFER_SCRIPT in enabled:
        _stage_defer_scripts(work, log)
    if LAZY_IMAGE in enabled:
        _stage_lazy_images(work, config, log)
    if INLINE_CRITICAL_CSS in enabled:
        _stage_inline_critical(work, config, log)
    if MINIFY_HTML in enabled:
        _stage_minify_html(work, config, log)

    result = work.to_bundle()
    result.validate()
    log.total_bytes_after = sum(a.bytes for a in result.assets)
    return result, log


def _gate_text_change(
    work: _Work,
    config: PipelineConfig,
    log: TransformationLog,
    kind: str,
    asset_id: str,
    new_text: str,
    detail: dict | None = None,
    new_ops: int | None = None,
) -> bool:
    asset = work.assets[asset_id]
    before = asset.bytes
    after = len(new_text.encode("utf-8"))
    record = TransformationRecord(kind, asset_id, before, after, detail=detail or {})
    current_energy = work.energy(config.energy)
    ops_delta = 0
    if new_ops is not None:
        ops_delta = new_ops - work.script_ops.get(asset_id, 0)
    candidate = estimate_from_counts(
        work.total_bytes() - before + after,
        work.dom_ops() + ops_delta,
        config.energy,
    ).total_joules
    if candidate < current_energy - 1e-12:
        work.set_text(asset_id, new_text)
        if new_ops is not None:
            work.script_ops[asset_id] = new_ops
        record.status = ACCEPTED
    else:
        record.status = REJECTED
    log.records.append(record)
    return record.status == ACCEPTED


def _stage_strip_unused_css(work, findings, config, log) -> None:
    by_asset: dict[str, list[Finding]] = {}
    for finding in findings:
        if finding.kind == analyzermod.UNUSED_CSS_RULE:
            by_asset.setdefault(finding.asset_id, []).append(finding)
    for asset_id in sorted(by_asset):
        if asset_id not in work.assets:
            continue
        asset = work.assets[asset_id]
        try:
            new_text = strip_unused_css(asset.text, by_asset[asset_id])
        except StaleSpanError as e:
            log.records.append(
                TransformationRecord(
                    STRIP_UNUSED_CSS, asset_id, asset.bytes, asset.bytes,
                    status=SKIPPED, detail={"reason": str(e)},
                )
            )
            continue
        _gate_text_change(
            work, config, log, STRIP_UNUSED_CSS, asset_id, new_text,
            detail={"rules_removed": len(by_asset[asset_id])},
        )


def _stage_minify_css(work, config, log) -> None:
    for asset_id in sorted(work.assets):
        asset = work.assets[asset_id]
        if asset.cls != bundlemod.CSS or asset.external:
            continue
        _gate_text_change(work, config, log, MINIFY_CSS, asset_id, minify_css(asset.text))


def _stage_strip_console(work, config, log) -> None:
    for asset_id in sorted(work.assets):
        asset = work.assets[asset_id]
        if asset.cls != bundlemod.SCRIPT or asset.external:
            continue
        new_text, count = strip_console_text(asset.text)
        if count == 0:
            continue
        new_ops = analyzermod.count_dom_ops(new_text, config.analyzer.dom_op_patterns)
        _gate_text_change(
            work, config, log, STRIP_CONSOLE, asset_id, new_text,
            detail={"statements_removed": count}, new_ops=new_ops,
        )


def _stage_minify_script(work, config, log) -> None:
    for asset_id in sorted(work.assets):
        asset = work.assets[asset_id]
        if asset.cls != bundlemod.SCRIPT or asset.external:
            continue
        _gate_text_change(
            work, config, log, MINIFY_SCRIPT, asset_id, minify_script(asset.text)
        )


def _stage_optimize_svg(work, config, log) -> None:
    for asset_id in sorted(work.assets):
        asset = work.assets[asset_id]
        if asset.cls != bundlemod.SVG or asset.external:
            continue
        minified = svgopt.optimize_svg(asset.text)
        if minified is None:
            log.records.append(
                TransformationRecord(
                    OPTIMIZE_SVG, asset_id, asset.bytes, asset.bytes,
                    status=SKIPPED, detail={"reason": "not well-formed XML"},
                )
            )
            continue
        _gate_text_change(work, config, log, OPTIMIZE_SVG, asset_id, minified)


def _rewrite_references(work: _Work, url_before: str, url_after: str) -> None:
    changed = False
    for element in htmlparse.find_elements(work.doc):
        attr = bundlemod._REF_ATTRS.get(element.tag)
        if attr and element.get(attr) == url_before:
            element.attrs[attr] = url_after
            changed = True
    if changed:
        work.set_text(work.entry_id, htmlparse.render_html(work.doc))
    pattern = re.compile(
        r"(url\(\s*['\"]?)" + re.escape(url_before) + r"(['\"]?\s*\))"
    )
    for asset in list(work.assets.values()):
        if asset.cls == bundlemod.CSS and not asset.external:
            new_text = pattern.sub(r"\g<1>" + url_after + r"\g<2>", asset.text)
            if new_text != asset.text:
                work.set_text(asset.id, new_text)


def _stage_image_plans(work, config, log) -> None:
    for asset_id in sorted(work.assets):
        asset = work.assets[asset_id]
        if asset.cls != bundlemod.IMAGE or asset.external:
            continue
        plan = plan_image_conversion(asset, config.image_ratio_table)
        if plan is None:
            continue
        if plan.record.status == SKIPPED:
            log.records.append(plan.record)
            continue
        _apply_rename_plan(work, config, log, asset, plan)


def _stage_font_plans(work, config, log) -> None:
    plans = plan_font_subset(
        work.to_bundle(), work.doc, config.font_glyph_budget, config.font_ratio_floor
    )
    for plan in plans:
        asset = work.assets.get(plan.record.asset_id)
        if asset is None:
            continue
        _apply_rename_plan(work, config, log, asset, plan)


def _apply_rename_plan(work, config, log, asset: Asset, plan: PlanResult) -> None:
    record = plan.record
    if plan.asset.id != asset.id and plan.asset.id in work.assets:
        record.status = SKIPPED
        record.detail["reason"] = f"target name {plan.asset.id!r} already exists"
        log.records.append(record)
        return
    current_energy = work.energy(config.energy)
    snapshot_assets = {k: replace(v) for k, v in work.assets.items()}
    snapshot_manifest = dict(work.manifest)
    snapshot_doc = copy.deepcopy(work.doc)

    del work.assets[asset.id]
    work.assets[plan.asset.id] = plan.asset
    url_before = record.detail.get("url_before", asset.url)
    url_after = record.detail.get("url_after", plan.asset.url)
    for ref, target in list(work.manifest.items()):
        if target == asset.id:
            del work.manifest[ref]
    work.manifest[url_after] = plan.asset.id
    _rewrite_references(work, url_before, url_after)

    if work.energy(config.energy) < current_energy - 1e-12:
        record.status = ACCEPTED
    else:
        record.status = REJECTED
        work.assets = snapshot_assets
        work.manifest = snapshot_manifest
        work.doc = snapshot_doc
    log.records.append(record)


def _structural_stage(work, log, kind: str, new_doc: Document, detail: dict) -> None:
    if not detail.get("targets"):
        return  # nothing to do; no record, no reserialization
    before = work.entry_asset().bytes
    new_text = htmlparse.render_html(new_doc)
    after = len(new_text.encode("utf-8"))
    work.doc = new_doc
    work.set_text(work.entry_id, new_text)
    log.records.append(
        TransformationRecord(kind, work.entry_id, before, after, detail=detail)
    )


def _stage_defer_scripts(work, log) -> None:
    def lookup(src: str):
        target = work.manifest.get(src)
        if target is None:
            return None
        asset = work.assets.get(target)
        if asset is None or asset.external or not isinstance(asset.payload, str):
            return None
        return asset.payload

    before_doc = work.doc
    new_doc = defer_scripts(before_doc, lookup)
    targets = _count_attr_diff(before_doc, new_doc, "script", "defer")
    _structural_stage(work, log, DEFER_SCRIPT, new_doc, {"targets": targets})


def _stage_lazy_images(work, config, log) -> None:
    before_doc = work.doc
    new_doc = lazy_images(before_doc, config.lazy_fold_count)
    targets = _count_attr_diff(before_doc, new_doc, "img", "loading")
    _structural_stage(work, log, LAZY_IMAGE, new_doc, {"targets": targets})


def _count_attr_diff(before: Document, after: Document, tag: str, attr: str) -> int:
    old = htmlparse.find_elements(before, tag)
    new = htmlparse.find_elements(after, tag)
    return sum(
        1
        for o, n in zip(old, new)
        if not o.has(attr) and n.has(attr)
    )


def _stage_inline_critical(work, config, log) -> None:
    bundle_now = work.to_bundle()
    try:
        candidate = inline_critical_css(bundle_now, config.critical_inline_budget)
    except ValueError as e:
        log.records.append(
            TransformationRecord(
                INLINE_CRITICAL_CSS, work.entry_id, 0, 0,
                status=SKIPPED, detail={"reason": str(e)},
            )
        )
        return
    if candidate is bundle_now:
        return  # no critical rules found; nothing to record
    before = work.entry_asset().bytes
    new_entry = candidate.asset(candidate.entry)
    after = new_entry.bytes
    record = TransformationRecord(
        INLINE_CRITICAL_CSS, work.entry_id, before, after,
        detail={"budget": config.critical_inline_budget},
    )
    current_energy = work.energy(config.energy)
    candidate_energy = estimate_from_counts(
        work.total_bytes() - before + after, work.dom_ops(), config.energy
    ).total_joules
    if candidate_energy < current_energy - 1e-12:
        record.status = ACCEPTED
        work.set_text(work.entry_id, new_entry.text)
        work.doc = htmlparse.parse_html(new_entry.text)
    else:
        record.status = REJECTED
    log.records.append(record)


def _stage_minify_html(work, config, log) -> None:
    new_text = minify_html(work.doc)
    accepted = _gate_text_change(
        work, config, log, MINIFY_HTML, work.entry_id, new_text
    )
    if accepted:
        work.doc = htmlparse.parse_html(new_text)
