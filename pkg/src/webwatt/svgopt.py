"""SVG cleanup: comments, metadata, editor cruft, coordinate rounding.

Parsing uses expat without namespace processing so qualified names
(``inkscape:label``, ``viewBox``) survive verbatim. Input that is not
well-formed XML is left untouched (the caller records a skip).
"""

from __future__ import annotations

import re
import xml.parsers.expat
from dataclasses import dataclass, field

_EDITOR_PREFIXES = ("sodipodi", "inkscape", "adobe", "sketch")
_DROP_LOCALNAMES = frozenset({"metadata"})

_NUMERIC_ATTRS = frozenset(
    "d points x y cx cy r rx ry x1 y1 x2 y2 dx dy fx fy width height "
    "transform viewBox offset stroke-width stroke-dashoffset "
    "stroke-dasharray stroke-miterlimit".split()
)

_DECIMAL_RE = re.compile(r"-?\d+\.\d+(?:[eE][+-]?\d+)?|-?\.\d+(?:[eE][+-]?\d+)?")


@dataclass
class XmlElement:
    tag: str
    attrs: dict[str, str] = field(default_factory=dict)
    children: list["XmlElement | str"] = field(default_factory=list)


def parse_xml(text: str) -> XmlElement | None:
    """Well-formed XML -> element tree with raw qualified names; else None."""
    parser = xml.parsers.expat.ParserCreate()
    parser.ordered_attributes = True
    parser.buffer_text = True
    root: list[XmlElement] = []
    stack: list[XmlElement] = []

    def start(tag: str, attr_list: list[str]) -> None:
        attrs = {
            attr_list[k]: attr_list[k + 1] for k in range(0, len(attr_list), 2)
        }
        element = XmlElement(tag, attrs)
        if stack:
            stack[-1].children.append(element)
        else:
            root.append(element)
        stack.append(element)

    def end(_tag: str) -> None:
        stack.pop()

    def chars(data: str) -> None:
        if stack:
            stack[-1].children.append(data)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(text, True)
    except xml.parsers.expat.ExpatError:
        return None
    return root[0] if len(root) == 1 else None


def _prefix(name: str) -> str:
    return name.split(":", 1)[0] if ":" in name else ""


def _localname(name: str) -> str:
    return name.split(":", 1)[1] if ":" in name else name


def _is_editor_name(name: str) -> bool:
    prefix = _prefix(name)
    if prefix in _EDITOR_PREFIXES:
        return True
    # xmlns declarations for editor namespaces
    return name.startswith("xmlns:") and name.split(":", 1)[1] in _EDITOR_PREFIXES


def _round_token(match: re.Match) -> str:
    value = round(float(match.group(0)), 3)
    if value == 0:
        return "0"
    text = f"{value:.3f}".rstrip("0").rstrip(".")
    return text


def _clean(element: XmlElement) -> XmlElement:
    attrs: dict[str, str] = {}
    for name, value in element.attrs.items():
        if _is_editor_name(name):
            continue
        if _localname(name) in _NUMERIC_ATTRS:
            value = _DECIMAL_RE.sub(_round_token, value)
        attrs[name] = value
    children: list[XmlElement | str] = []
    for child in element.children:
        if isinstance(child, str):
            if child.strip():
                children.append(child)
            continue
        if _is_editor_name(child.tag) or _localname(child.tag) in _DROP_LOCALNAMES:
            continue
        children.append(_clean(child))
    return XmlElement(element.tag, attrs, children)


def _escape_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _serialize(element: XmlElement, out: list[str]) -> None:
    out.append("<" + element.tag)
    for name, value in element.attrs.items():
        out.append(f' {name}="{_escape_attr(value)}"')
    if not element.children:
        out.append("/>")
        return
    out.append(">")
    for child in element.children:
        if isinstance(child, str):
            out.append(_escape_text(child))
        else:
            _serialize(child, out)
    out.append(f"</{element.tag}>")


def optimize_svg(text: str) -> str | None:
    """Minified SVG, or None when the input is not well-formed XML."""
    root = parse_xml(text)
    if root is None:
        return None
    out: list[str] = []
    _serialize(_clean(root), out)
    return "".join(out)
