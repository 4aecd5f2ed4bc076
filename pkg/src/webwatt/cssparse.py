"""CSS parsing: rules, declarations, selector ASTs, source spans.

Coverage is intentionally partial. Selectors keep tag / #id / .class
compounds joined by descendant combinators; anything else (attribute
selectors, pseudo-classes/elements, child/sibling combinators) is recorded
as an unsupported fragment, which flags the selector as "assume it
matches" so downstream removal logic can never touch it.

Spans are (offset, length) indices into the source string, so a rule's
original text is always recoverable with ``source[offset:offset+length]``.
Malformed constructs are skipped to the next ``}`` and the skipped region
recorded as an unparsed span.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_IMPORTANT_RE = re.compile(r"!\s*important\s*$", re.IGNORECASE)

_SPACE = frozenset(" \t\n\r\f")
_COMBINATORS = frozenset(">+~")

# At-rules whose block contains rules vs. declarations.
_RULE_BODY_AT_RULES = frozenset({"media", "supports", "layer"})
_DECL_BODY_AT_RULES = frozenset({"font-face", "page", "counter-style"})


@dataclass
class Declaration:
    prop: str
    value: str
    important: bool = False


@dataclass
class Compound:
    tag: str | None = None
    id: str | None = None
    classes: tuple[str, ...] = ()
    unsupported: tuple[str, ...] = ()


@dataclass
class Selector:
    compounds: tuple[Compound, ...]
    raw: str

    @property
    def assume_matches(self) -> bool:
        return any(c.unsupported for c in self.compounds)


@dataclass
class CssRule:
    selectors: list[Selector]
    declarations: list[Declaration]
    span: tuple[int, int]


@dataclass
class AtRule:
    name: str
    prelude: str
    body: list["CssItem"] | None = None  # nested rules (@media ...)
    declarations: list[Declaration] | None = None  # @font-face ...
    raw_body: str | None = None  # opaque blocks (@keyframes ...)
    span: tuple[int, int] = (0, 0)


CssItem = CssRule | AtRule


@dataclass
class Stylesheet:
    items: list[CssItem] = field(default_factory=list)
    unparsed: list[tuple[int, int]] = field(default_factory=list)
    source: str = ""

    def rules(self) -> list[CssRule]:
        """All style rules in document order, descending into nested blocks."""
        found: list[CssRule] = []

        def visit(items: list[CssItem]) -> None:
            for item in items:
                if isinstance(item, CssRule):
                    found.append(item)
                elif item.body is not None:
                    visit(item.body)

        visit(self.items)
        return found

    def font_faces(self) -> list[AtRule]:
        found: list[AtRule] = []

        def visit(items: list[CssItem]) -> None:
            for item in items:
                if isinstance(item, AtRule):
                    if item.name == "font-face":
                        found.append(item)
                    elif item.body is not None:
                        visit(item.body)

        visit(self.items)
        return found


def parse_css(text: str) -> Stylesheet:
    """Parse a stylesheet. Never raises; unparseable regions are recorded."""
    sheet = Stylesheet(source=text)
    sheet.items, sheet.unparsed = _parse_items(text, 0, len(text))
    return sheet


def _skip_ws_comments(text: str, i: int, end: int) -> int:
    while i < end:
        if text[i] in _SPACE:
            i += 1
        elif text.startswith("/*", i):
            close = text.find("*/", i + 2)
            i = end if close == -1 else min(close + 2, end)
        else:
            break
    return i


def _scan_past_string(text: str, i: int, end: int) -> int:
    quote = text[i]
    i += 1
    while i < end:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c == quote or c == "\n":
            return i + 1
        i += 1
    return end


def _find_unquoted(text: str, i: int, end: int, stop: frozenset[str]) -> int:
    """Index of the next stop character outside strings/comments/parens."""
    depth = 0
    while i < end:
        c = text[i]
        if c in "\"'":
            i = _scan_past_string(text, i, end)
            continue
        if text.startswith("/*", i):
            close = text.find("*/", i + 2)
            i = end if close == -1 else min(close + 2, end)
            continue
        if c == "(":
            depth += 1
        elif c == ")":
            depth = max(0, depth - 1)
        elif depth == 0 and c in stop:
            return i
        i += 1
    return end


def _matching_brace(text: str, i: int, end: int) -> int:
    """i points at '{'; index of its matching '}' or -1."""
    depth = 0
    while i < end:
        c = text[i]
        if c in "\"'":
            i = _scan_past_string(text, i, end)
            continue
        if text.startswith("/*", i):
            close = text.find("*/", i + 2)
            i = end if close == -1 else min(close + 2, end)
            continue
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return i
        i += 1
    return -1


_BRACES = frozenset("{};")
_OPEN_OR_SEMI = frozenset("{;")


def _parse_items(
    text: str, start: int, end: int
) -> tuple[list[CssItem], list[tuple[int, int]]]:
    items: list[CssItem] = []
    unparsed: list[tuple[int, int]] = []
    i = start
    while True:
        i = _skip_ws_comments(text, i, end)
        if i >= end:
            break
        if text[i] == "}":  # stray closer
            unparsed.append((i, 1))
            i += 1
            continue
        if text[i] == "@":
            i = _parse_at_rule(text, i, end, items, unparsed)
        else:
            i = _parse_style_rule(text, i, end, items, unparsed)
    return items, unparsed


def _parse_at_rule(
    text: str,
    i: int,
    end: int,
    items: list[CssItem],
    unparsed: list[tuple[int, int]],
) -> int:
    rule_start = i
    j = i + 1
    while j < end and (text[j].isalnum() or text[j] == "-"):
        j += 1
    name = text[i + 1 : j].lower()
    boundary = _find_unquoted(text, j, end, _OPEN_OR_SEMI)
    prelude = text[j:boundary].strip()
    if boundary >= end or text[boundary] == ";":
        span_end = boundary + 1 if boundary < end else end
        items.append(
            AtRule(name, prelude, span=(rule_start, span_end - rule_start))
        )
        return span_end
    close = _matching_brace(text, boundary, end)
    if close == -1:
        unparsed.append((rule_start, end - rule_start))
        return end
    span = (rule_start, close + 1 - rule_start)
    body_start, body_end = boundary + 1, close
    if name in _RULE_BODY_AT_RULES:
        body, inner_unparsed = _parse_items(text, body_start, body_end)
        unparsed.extend(inner_unparsed)
        items.append(AtRule(name, prelude, body=body, span=span))
    elif name in _DECL_BODY_AT_RULES:
        decls = _parse_declarations(text[body_start:body_end])
        items.append(AtRule(name, prelude, declarations=decls, span=span))
    else:
        items.append(
            AtRule(name, prelude, raw_body=text[body_start:body_end], span=span)
        )
    return close + 1


def _parse_style_rule(
    text: str,
    i: int,
    end: int,
    items: list[CssItem],
    unparsed: list[tuple[int, int]],
) -> int:
    rule_start = i
    boundary = _find_unquoted(text, i, end, _BRACES)
    if boundary >= end or text[boundary] in ";}":
        # Selector text with no block: unparseable.
        stop = boundary + 1 if boundary < end else end
        unparsed.append((rule_start, stop - rule_start))
        return stop
    selector_text = text[rule_start:boundary]
    close = _matching_brace(text, boundary, end)
    if close == -1:
        unparsed.append((rule_start, end - rule_start))
        return end
    selectors = parse_selector_list(selector_text)
    if not selectors:
        unparsed.append((rule_start, close + 1 - rule_start))
        return close + 1
    decls = _parse_declarations(text[boundary + 1 : close])
    items.append(
        CssRule(selectors, decls, span=(rule_start, close + 1 - rule_start))
    )
    return close + 1


def _strip_comments(text: str) -> str:
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in "\"'":
            j = _scan_past_string(text, i, n)
            out.append(text[i:j])
            i = j
        elif text.startswith("/*", i):
            close = text.find("*/", i + 2)
            i = n if close == -1 else close + 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _parse_declarations(body: str) -> list[Declaration]:
    decls: list[Declaration] = []
    n = len(body)
    i = 0
    while i < n:
        semi = _find_unquoted(body, i, n, frozenset(";"))
        chunk = _strip_comments(body[i:semi]).strip()
        i = semi + 1
        if not chunk:
            continue
        colon = chunk.find(":")
        if colon == -1:
            continue  # junk chunk; dropped
        prop = chunk[:colon].strip()
        value = chunk[colon + 1 :].strip()
        important = False
        m = _IMPORTANT_RE.search(value)
        if m:
            value = value[: m.start()].rstrip()
            important = True
        if prop:
            decls.append(Declaration(prop, value, important))
    return decls


def parse_selector_list(text: str) -> list[Selector]:
    """Split on top-level commas and parse each selector."""
    cleaned = _strip_comments(text)
    selectors: list[Selector] = []
    for part in _split_top_level(cleaned, ","):
        part = part.strip()
        if not part:
            continue
        selectors.append(_parse_selector(part))
    return selectors


def _split_top_level(text: str, sep: str) -> list[str]:
    parts: list[str] = []
    depth_paren = 0
    depth_bracket = 0
    current: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in "\"'":
            j = _scan_past_string(text, i, n)
            current.append(text[i:j])
            i = j
            continue
        if c == "(":
            depth_paren += 1
        elif c == ")":
            depth_paren = max(0, depth_paren - 1)
        elif c == "[":
            depth_bracket += 1
        elif c == "]":
            depth_bracket = max(0, depth_bracket - 1)
        elif c == sep and depth_paren == 0 and depth_bracket == 0:
            parts.append("".join(current))
            current = []
            i += 1
            continue
        current.append(c)
        i += 1
    parts.append("".join(current))
    return parts


_NAME_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_\\"
)


def _parse_selector(text: str) -> Selector:
    compounds: list[Compound] = []
    tag: str | None = None
    elem_id: str | None = None
    classes: list[str] = []
    unsupported: list[str] = []
    started = False

    def flush() -> None:
        nonlocal tag, elem_id, classes, unsupported, started
        if started:
            compounds.append(
                Compound(tag, elem_id, tuple(classes), tuple(unsupported))
            )
        tag, elem_id, classes, unsupported, started = None, None, [], [], False

    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in _SPACE:
            j = i
            while j < n and text[j] in _SPACE:
                j += 1
            # Whitespace around >/+/~ belongs to that combinator.
            if j < n and text[j] not in _COMBINATORS:
                flush()
            i = j
            continue
        if c in _COMBINATORS:
            flush()
            unsupported.append(c)
            started = True
            i += 1
            continue
        started = True
        if c == "#":
            j = i + 1
            while j < n and text[j] in _NAME_CHARS:
                j += 1
            elem_id = text[i + 1 : j]
            i = j
        elif c == ".":
            j = i + 1
            while j < n and text[j] in _NAME_CHARS:
                j += 1
            classes.append(text[i + 1 : j])
            i = j
        elif c == "*":
            i += 1
        elif c == "[":
            j = _find_unquoted(text, i + 1, n, frozenset("]"))
            j = min(j + 1, n)
            unsupported.append(text[i:j])
            i = j
        elif c == ":":
            j = i
            while j < n and text[j] == ":":
                j += 1
            while j < n and text[j] in _NAME_CHARS:
                j += 1
            if j < n and text[j] == "(":
                close = _find_unquoted(text, j + 1, n, frozenset(")"))
                j = min(close + 1, n)
            unsupported.append(text[i:j])
            i = j
        elif c in _NAME_CHARS:
            j = i
            while j < n and text[j] in _NAME_CHARS:
                j += 1
            tag = text[i:j].lower()
            i = j
        else:
            unsupported.append(c)
            i += 1
    flush()
    if not compounds:
        compounds.append(Compound(unsupported=(text.strip() or "?",)))
    return Selector(tuple(compounds), raw=text.strip())


def selector_text(selector: Selector) -> str:
    """Canonical minimal rendering of a parsed selector."""
    parts: list[str] = []
    for compound in selector.compounds:
        bits: list[str] = []
        if compound.tag:
            bits.append(compound.tag)
        if compound.id is not None:
            bits.append("#" + compound.id)
        for cls in compound.classes:
            bits.append("." + cls)
        for frag in compound.unsupported:
            bits.append(frag)
        if not bits:
            bits.append("*")
        parts.append("".join(bits))
    return " ".join(parts)
