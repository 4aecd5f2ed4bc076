"""Detection of energy-intensive patterns in a bundle.

Selector matching supports tag, ``#id``, ``.class``, grouping, and the
descendant combinator exactly; selectors using anything else are assumed
to match, so unused-rule reporting errs toward keeping rules. DOM-op
counting is a static, lexical approximation driven by a configurable
pattern list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import bundle as bundlemod
from . import cssparse, htmlparse, scriptlex, svgopt
from .bundle import SiteBundle
from .cssparse import Selector
from .htmlparse import Document, Element

OVERSIZED_IMAGE = "oversized_image"
MISSING_LAZY_LOADING = "missing_lazy_loading"
BLOCKING_SCRIPT = "blocking_script"
UNUSED_CSS_RULE = "unused_css_rule"
CONSOLE_LOGGING = "console_logging"
UNUSED_FONT = "unused_font"
BLOATED_SVG = "bloated_svg"
UNCOMPRESSED_TEXT = "uncompressed_text"

FINDING_KINDS = (
    OVERSIZED_IMAGE,
    MISSING_LAZY_LOADING,
    BLOCKING_SCRIPT,
    UNUSED_CSS_RULE,
    CONSOLE_LOGGING,
    UNUSED_FONT,
    BLOATED_SVG,
    UNCOMPRESSED_TEXT,
)

DEFAULT_DOM_OP_PATTERNS = (
    "createElement",
    "appendChild",
    "removeChild",
    "insertBefore",
    "innerHTML=",
    "outerHTML=",
    "setAttribute",
    "querySelector",
    "querySelectorAll",
    "getElementById",
    "classList.",
    "insertAdjacentHTML",
)


@dataclass(frozen=True)
class AnalyzerConfig:
    oversized_image_bytes: int = 100 * 1024
    modern_image_formats: tuple[str, ...] = ("avif", "webp")
    lazy_fold_count: int = 3  # imgs assumed above the fold
    dom_op_patterns: tuple[str, ...] = DEFAULT_DOM_OP_PATTERNS
    svg_min_saving: float = 0.10
    image_ratio_table: dict[str, float] = field(
        default_factory=lambda: {"jpeg": 0.50, "png": 0.30, "gif": 0.40}
    )
    enabled_rules: tuple[str, ...] = FINDING_KINDS

    @classmethod
    def from_dict(cls, data: dict) -> "AnalyzerConfig":
        known = {f for f in cls.__dataclass_fields__}
        kwargs = {k: v for k, v in data.items() if k in known}
        for key in ("modern_image_formats", "dom_op_patterns", "enabled_rules"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class Finding:
    kind: str
    asset_id: str
    locator: str  # "span:<offset>+<length>" or "node:<index path>"
    projected_bytes_saved: int
    note: str
    offset: int = 0  # source offset or document-order index, for sorting


@dataclass(frozen=True)
class MatchResult:
    count: int
    assume_matches: bool


def node_path(doc: Document, target: Element) -> str:
    """Child-index path from the document root, e.g. "0.1.3"."""

    def search(children: list, trail: list[int]) -> str | None:
        for idx, child in enumerate(children):
            if child is target:
                return ".".join(map(str, trail + [idx]))
            if isinstance(child, Element):
                found = search(child.children, trail + [idx])
                if found:
                    return found
        return None

    path = search(doc.children, [])
    if path is None:
        raise ValueError("element not in document")
    return path


def resolve_node_path(doc: Document, path: str):
    node = None
    children = doc.children
    for piece in path.split("."):
        node = children[int(piece)]
        children = node.children if isinstance(node, Element) else []
    return node


def _compound_matches(element: Element, compound: cssparse.Compound) -> bool:
    if compound.tag is not None and element.tag != compound.tag:
        return False
    if compound.id is not None and element.attrs.get("id") != compound.id:
        return False
    if compound.classes and not set(compound.classes) <= element.class_names():
        return False
    return True


def match_selector(selector: Selector, doc: Document) -> MatchResult:
    """Matched element count; unsupported syntax short-circuits to
    assume_matches so callers never treat such selectors as unused."""
    if selector.assume_matches:
        return MatchResult(0, True)
    parents = htmlparse.parent_map(doc)
    count = 0
    for element in htmlparse.find_elements(doc):
        if _matches_chain(element, selector.compounds, parents):
            count += 1
    return MatchResult(count, False)


def _matches_chain(
    element: Element,
    compounds: tuple[cssparse.Compound, ...],
    parents: dict[int, Element | None],
) -> bool:
    if not _compound_matches(element, compounds[-1]):
        return False
    node = parents.get(id(element))
    for compound in reversed(compounds[:-1]):
        while node is not None and not _compound_matches(node, compound):
            node = parents.get(id(node))
        if node is None:
            return False
        node = parents.get(id(node))
    return True


def find_unused_css(
    site: SiteBundle, doc: Document | None = None
) -> list[Finding]:
    """Rules whose selectors all provably match nothing in the entry DOM.

    Scope is stylesheet assets; inline ``<style>`` blocks are left alone.
    Media conditions are ignored (a rule matching under any condition is
    kept).
    """
    if doc is None:
        doc = htmlparse.parse_html(site.entry_asset.text)
    findings: list[Finding] = []
    for asset in site.by_class(bundlemod.CSS):
        if asset.external:
            continue
        sheet = cssparse.parse_css(asset.text)
        for rule in sheet.rules():
            results = [match_selector(s, doc) for s in rule.selectors]
            if any(r.assume_matches or r.count > 0 for r in results):
                continue
            offset, length = rule.span
            saved = len(sheet.source[offset : offset + length].encode("utf-8"))
            selector_list = ", ".join(s.raw for s in rule.selectors)
            findings.append(
                Finding(
                    kind=UNUSED_CSS_RULE,
                    asset_id=asset.id,
                    locator=f"span:{offset}+{length}",
                    projected_bytes_saved=saved,
                    note=f"no element matches {selector_list!r}",
                    offset=offset,
                )
            )
    return findings


def count_dom_ops(
    text: str, patterns: tuple[str, ...] = DEFAULT_DOM_OP_PATTERNS
) -> int:
    """Occurrences of the configured patterns outside comments and string
    literals. Names ending in "=" count assignments; names ending in "."
    count member access."""
    tokens = scriptlex.significant(scriptlex.tokenize(text))
    simple = frozenset(p for p in patterns if not p.endswith(("=", ".")))
    assigned = frozenset(p[:-1] for p in patterns if p.endswith("="))
    members = frozenset(p[:-1] for p in patterns if p.endswith("."))
    count = 0
    for k, token in enumerate(tokens):
        if token.kind != "ident":
            continue
        nxt = tokens[k + 1] if k + 1 < len(tokens) else None
        if token.text in simple:
            count += 1
        elif token.text in assigned:
            if nxt is not None and nxt.kind == "punct" and nxt.text in ("=", "+="):
                count += 1
        elif token.text in members:
            if nxt is not None and nxt.kind == "punct" and nxt.text in (".", "?."):
                count += 1
    return count


def inline_scripts(doc: Document) -> list[str]:
    texts: list[str] = []
    for element in htmlparse.find_elements(doc, "script"):
        if element.get("src"):
            continue
        kind = (element.get("type") or "").lower()
        if kind and kind not in ("text/javascript", "module", "application/javascript"):
            continue
        texts.append(htmlparse.text_content(Document(element.children)))
    return texts


def bundle_dom_ops(site: SiteBundle, config: AnalyzerConfig | None = None) -> int:
    """Static DOM-op count over script assets plus inline scripts."""
    config = config or AnalyzerConfig()
    doc = htmlparse.parse_html(site.entry_asset.text)
    total = sum(
        count_dom_ops(a.text, config.dom_op_patterns)
        for a in site.by_class(bundlemod.SCRIPT)
        if not a.external
    )
    total += sum(
        count_dom_ops(text, config.dom_op_patterns) for text in inline_scripts(doc)
    )
    return total


def find_console_statements(tokens: list[scriptlex.Token]) -> list[tuple[int, int]]:
    """(start, end) token index ranges of top-level console.<name>(...)
    statements, trailing semicolon included."""
    spans: list[tuple[int, int]] = []
    k = 0
    n = len(tokens)
    while k < n:
        token = tokens[k]
        if token.kind == "ident" and token.text == "console":
            prev = tokens[k - 1] if k > 0 else None
            at_statement = prev is None or (
                prev.kind == "punct" and prev.text in (";", "{", "}")
            )
            end = _scan_console_call(tokens, k) if at_statement else None
            if end is not None:
                stop = end
                if stop < n and tokens[stop].kind == "punct" and tokens[stop].text == ";":
                    stop += 1
                    spans.append((k, stop))
                    k = stop
                    continue
                nxt = tokens[stop] if stop < n else None
                if nxt is None or nxt.newline_before or (
                    nxt.kind == "punct" and nxt.text == "}"
                ):
                    spans.append((k, stop))
                    k = stop
                    continue
        k += 1
    return spans


def _scan_console_call(tokens: list[scriptlex.Token], k: int) -> int | None:
    """Token index just past the balanced ")" of console.<name>(...)."""
    n = len(tokens)
    if k + 3 >= n:
        return None
    if not (tokens[k + 1].kind == "punct" and tokens[k + 1].text == "."):
        return None
    if tokens[k + 2].kind != "ident":
        return None
    if not (tokens[k + 3].kind == "punct" and tokens[k + 3].text == "("):
        return None
    depth = 0
    for j in range(k + 3, n):
        if tokens[j].kind == "punct":
            if tokens[j].text == "(":
                depth += 1
            elif tokens[j].text == ")":
                depth -= 1
                if depth == 0:
                    return j + 1
    return None


def detect_findings(
    site: SiteBundle, config: AnalyzerConfig | None = None
) -> list[Finding]:
    """All enabled findings, ordered by asset id then source offset."""
    config = config or AnalyzerConfig()
    enabled = frozenset(config.enabled_rules)
    doc = htmlparse.parse_html(site.entry_asset.text)
    findings: list[Finding] = []

    if OVERSIZED_IMAGE in enabled:
        findings.extend(_image_findings(site, config))
    if MISSING_LAZY_LOADING in enabled:
        findings.extend(_lazy_findings(site, doc, config))
    if BLOCKING_SCRIPT in enabled:
        findings.extend(_blocking_script_findings(site, doc))
    if CONSOLE_LOGGING in enabled:
        findings.extend(_console_findings(site))
    if UNUSED_CSS_RULE in enabled:
        unused = find_unused_css(site, doc)
        findings.extend(unused)
    else:
        unused = []
    if UNUSED_FONT in enabled:
        findings.extend(_font_findings(site, unused))
    if BLOATED_SVG in enabled:
        findings.extend(_svg_findings(site, config))

    findings.sort(key=lambda f: (f.asset_id, f.offset, f.kind))
    return findings


def _image_findings(site: SiteBundle, config: AnalyzerConfig) -> list[Finding]:
    findings = []
    for asset in site.by_class(bundlemod.IMAGE):
        fmt = bundlemod.raster_format(asset)
        if fmt is None or asset.bytes <= 0:
            continue
        too_big = asset.bytes > config.oversized_image_bytes
        legacy = fmt not in config.modern_image_formats
        if not (too_big or legacy):
            continue
        ratio = config.image_ratio_table.get(fmt)
        saved = asset.bytes - math.ceil(asset.bytes * ratio) if ratio else 0
        reason = []
        if too_big:
            reason.append(f"{asset.bytes} bytes exceeds {config.oversized_image_bytes}")
        if legacy:
            reason.append(f"{fmt} format; modern codec would be smaller")
        findings.append(
            Finding(
                kind=OVERSIZED_IMAGE,
                asset_id=asset.id,
                locator="span:0+0",
                projected_bytes_saved=max(saved, 0),
                note="; ".join(reason),
            )
        )
    return findings


def _lazy_findings(
    site: SiteBundle, doc: Document, config: AnalyzerConfig
) -> list[Finding]:
    findings = []
    images = htmlparse.find_elements(doc, "img")
    elements = htmlparse.find_elements(doc)
    order = {id(el): idx for idx, el in enumerate(elements)}
    for img in images[config.lazy_fold_count :]:
        if img.attrs.get("loading") == "lazy":
            continue
        findings.append(
            Finding(
                kind=MISSING_LAZY_LOADING,
                asset_id=site.entry,
                locator=f"node:{node_path(doc, img)}",
                projected_bytes_saved=0,
                note="below-the-fold image without lazy loading",
                offset=order[id(img)],
            )
        )
    return findings


def _blocking_script_findings(site: SiteBundle, doc: Document) -> list[Finding]:
    findings = []
    heads = htmlparse.find_elements(doc, "head")
    if not heads:
        return findings
    elements = htmlparse.find_elements(doc)
    order = {id(el): idx for idx, el in enumerate(elements)}
    for script in htmlparse.find_elements(Document(heads[0].children), "script"):
        if not script.get("src"):
            continue
        if script.has("defer") or script.has("async"):
            continue
        findings.append(
            Finding(
                kind=BLOCKING_SCRIPT,
                asset_id=site.entry,
                locator=f"node:{node_path(doc, script)}",
                projected_bytes_saved=0,
                note=f"head script {script.get('src')!r} blocks parsing",
                offset=order[id(script)],
            )
        )
    return findings


def _console_findings(site: SiteBundle) -> list[Finding]:
    findings = []
    for asset in site.by_class(bundlemod.SCRIPT):
        if asset.external:
            continue
        tokens = scriptlex.significant(scriptlex.tokenize(asset.text))
        for start, stop in find_console_statements(tokens):
            first = tokens[start]
            last = tokens[stop - 1]
            length = last.pos + len(last.text) - first.pos
            findings.append(
                Finding(
                    kind=CONSOLE_LOGGING,
                    asset_id=asset.id,
                    locator=f"span:{first.pos}+{length}",
                    projected_bytes_saved=length,
                    note="console statement in shipped script",
                    offset=first.pos,
                )
            )
    return findings


def _used_font_families(site: SiteBundle, unused: list[Finding]) -> set[str]:
    unused_spans = {
        (f.asset_id, f.locator) for f in unused if f.kind == UNUSED_CSS_RULE
    }
    used: set[str] = set()
    for asset in site.by_class(bundlemod.CSS):
        if asset.external:
            continue
        sheet = cssparse.parse_css(asset.text)
        for rule in sheet.rules():
            offset, length = rule.span
            if (asset.id, f"span:{offset}+{length}") in unused_spans:
                continue
            for decl in rule.declarations:
                if decl.prop.lower() in ("font-family", "font"):
                    for name in decl.value.split(","):
                        used.add(name.strip().strip("'\"").lower())
    return used


def font_face_entries(site: SiteBundle) -> list[tuple[str, str, str, tuple[int, int]]]:
    """(css asset id, family, src url, span) per @font-face rule."""
    entries = []
    for asset in site.by_class(bundlemod.CSS):
        if asset.external:
            continue
        sheet = cssparse.parse_css(asset.text)
        for face in sheet.font_faces():
            family = ""
            src = ""
            for decl in face.declarations or []:
                if decl.prop.lower() == "font-family":
                    family = decl.value.strip().strip("'\"")
                elif decl.prop.lower() == "src":
                    refs = bundlemod.css_references(decl.value)
                    src = refs[0] if refs else ""
            entries.append((asset.id, family, src, face.span))
    return entries


def _font_findings(site: SiteBundle, unused: list[Finding]) -> list[Finding]:
    used = _used_font_families(site, unused)
    findings = []
    for css_id, family, src, span in font_face_entries(site):
        if not family or family.lower() in used:
            continue
        asset_id = css_id
        offset, length = span
        projected = length
        target = site.manifest.get(src)
        note = f"@font-face family {family!r} is never used"
        if target is not None:
            try:
                font_asset = site.asset(target)
                projected = length + font_asset.bytes
                note += f"; removing frees {font_asset.bytes} font bytes"
            except KeyError:
                pass
        findings.append(
            Finding(
                kind=UNUSED_FONT,
                asset_id=asset_id,
                locator=f"span:{offset}+{length}",
                projected_bytes_saved=projected,
                note=note,
                offset=offset,
            )
        )
    return findings


def _svg_findings(site: SiteBundle, config: AnalyzerConfig) -> list[Finding]:
    findings = []
    for asset in site.by_class(bundlemod.SVG):
        if asset.external:
            continue
        minified = svgopt.optimize_svg(asset.text)
        if minified is None:
            continue
        before = asset.bytes
        after = len(minified.encode("utf-8"))
        if before <= 0 or (before - after) / before <= config.svg_min_saving:
            continue
        findings.append(
            Finding(
                kind=BLOATED_SVG,
                asset_id=asset.id,
                locator="span:0+" + str(before),
                projected_bytes_saved=before - after,
                note=f"minification saves {(before - after) / before:.0%}",
            )
        )
    return findings
