"""Tolerant HTML parsing and serialization.

The parser never raises: any byte string produces a document tree. Unclosed
tags are closed at their parent's boundary, unknown tags are ordinary
elements, and attribute order is preserved. Entities are kept verbatim in
text and attribute values so that parse -> render is faithful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

# Content is a single raw text child; no tags are recognized inside.
RAW_TEXT_ELEMENTS = frozenset({"script", "style", "textarea", "title"})

# Elements whose interior whitespace must survive minification.
PRESERVE_WHITESPACE = frozenset({"pre", "textarea", "script", "style"})

_P_CLOSERS = frozenset(
    "address article aside blockquote details dialog div dl dt dd fieldset "
    "figcaption figure footer form h1 h2 h3 h4 h5 h6 header hgroup hr main "
    "menu nav ol p pre section table ul".split()
)

# (open tag, incoming start tag) pairs that imply closing the open tag.
def _implies_close(open_tag: str, new_tag: str) -> bool:
    if open_tag == "p":
        return new_tag in _P_CLOSERS
    if open_tag == "li":
        return new_tag == "li"
    if open_tag in ("dt", "dd"):
        return new_tag in ("dt", "dd")
    if open_tag == "tr":
        return new_tag == "tr"
    if open_tag in ("td", "th"):
        return new_tag in ("td", "th", "tr")
    if open_tag == "option":
        return new_tag in ("option", "optgroup")
    return False


@dataclass
class Text:
    content: str


@dataclass
class Comment:
    content: str


@dataclass
class Doctype:
    # Raw text between "<!" and ">", e.g. "doctype html".
    content: str


@dataclass
class Element:
    tag: str
    attrs: dict[str, str | None] = field(default_factory=dict)
    children: list["Node"] = field(default_factory=list)
    self_closing: bool = False

    def get(self, name: str, default: str | None = None) -> str | None:
        return self.attrs.get(name, default)

    def has(self, name: str) -> bool:
        return name in self.attrs

    def class_names(self) -> frozenset[str]:
        return frozenset((self.attrs.get("class") or "").split())


Node = Union[Text, Comment, Doctype, Element]


@dataclass
class Document:
    """Root container; top-level nodes are its children."""

    children: list[Node] = field(default_factory=list)


_ASCII_LETTERS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
_TAG_NAME_CHARS = _ASCII_LETTERS | frozenset("0123456789-_:")
_SPACE = frozenset(" \t\n\r\f")


def parse_html(text: str) -> Document:
    """Parse any string into a Document. Never raises."""
    doc = Document()
    stack: list[Element] = []

    def current_children() -> list[Node]:
        return stack[-1].children if stack else doc.children

    def append(node: Node) -> None:
        current_children().append(node)

    i = 0
    n = len(text)
    while i < n:
        lt = text.find("<", i)
        if lt == -1:
            append(Text(text[i:]))
            break
        if lt > i:
            append(Text(text[i:lt]))
        i = lt
        if text.startswith("<!--", i):
            end = text.find("-->", i + 4)
            if end == -1:
                append(Comment(text[i + 4 :]))
                break
            append(Comment(text[i + 4 : end]))
            i = end + 3
        elif text.startswith("<!", i) or text.startswith("<?", i):
            end = text.find(">", i + 2)
            if end == -1:
                append(Comment(text[i + 2 :]))
                break
            inner = text[i + 2 : end]
            if text.startswith("<!", i) and inner.lower().startswith("doctype"):
                append(Doctype(inner))
            else:
                append(Comment(inner))
            i = end + 1
        elif text.startswith("</", i):
            j = i + 2
            name_start = j
            while j < n and text[j] in _TAG_NAME_CHARS:
                j += 1
            name = text[name_start:j].lower()
            end = text.find(">", j)
            if end == -1:
                append(Text(text[i:]))
                break
            i = end + 1
            if not name:
                continue
            open_tags = [e.tag for e in stack]
            if name in open_tags:
                while stack and stack[-1].tag != name:
                    stack.pop()
                if stack:
                    stack.pop()
            # Unmatched end tags are dropped.
        elif i + 1 < n and text[i + 1] in _ASCII_LETTERS:
            element, i = _parse_start_tag(text, i)
            if element is None:
                # No closing ">": the rest is literal text.
                append(Text(text[lt:]))
                break
            while stack and _implies_close(stack[-1].tag, element.tag):
                stack.pop()
            current_children().append(element)
            if element.tag in RAW_TEXT_ELEMENTS and not element.self_closing:
                content, i = _raw_text_until_close(text, i, element.tag)
                if content:
                    element.children.append(Text(content))
            elif element.tag not in VOID_ELEMENTS and not element.self_closing:
                stack.append(element)
        else:
            append(Text("<"))
            i += 1
    return doc


def _parse_start_tag(text: str, i: int) -> tuple[Element | None, int]:
    """Parse "<name attrs...>" starting at i. Returns (element, next index)."""
    n = len(text)
    j = i + 1
    name_start = j
    while j < n and text[j] in _TAG_NAME_CHARS:
        j += 1
    tag = text[name_start:j].lower()
    attrs: dict[str, str | None] = {}
    self_closing = False
    while j < n:
        while j < n and text[j] in _SPACE:
            j += 1
        if j >= n:
            return None, i
        c = text[j]
        if c == ">":
            j += 1
            break
        if c == "/":
            if j + 1 < n and text[j + 1] == ">":
                self_closing = True
                j += 2
                break
            j += 1
            continue
        # Attribute name.
        name_start = j
        while j < n and text[j] not in _SPACE and text[j] not in "=/>":
            j += 1
        name = text[name_start:j].lower()
        while j < n and text[j] in _SPACE:
            j += 1
        value: str | None = None
        if j < n and text[j] == "=":
            j += 1
            while j < n and text[j] in _SPACE:
                j += 1
            if j < n and text[j] in "\"'":
                quote = text[j]
                j += 1
                value_start = j
                while j < n and text[j] != quote:
                    j += 1
                value = text[value_start:j]
                if j < n:
                    j += 1
            else:
                value_start = j
                while j < n and text[j] not in _SPACE and text[j] != ">":
                    j += 1
                value = text[value_start:j]
        if name and name not in attrs:  # first occurrence wins
            attrs[name] = value
    else:
        return None, i
    return Element(tag, attrs, [], self_closing), j


def _raw_text_until_close(text: str, i: int, tag: str) -> tuple[str, int]:
    """Collect raw content up to the matching "</tag" (case-insensitive)."""
    lower = text.lower()
    needle = "</" + tag
    pos = i
    n = len(text)
    while True:
        idx = lower.find(needle, pos)
        if idx == -1:
            return text[i:], n
        after = idx + len(needle)
        if after >= n or text[after] in _SPACE or text[after] in ">/":
            end = text.find(">", after)
            return text[i:idx], (n if end == -1 else end + 1)
        pos = after


def render_html(doc: Document) -> str:
    """Serialize a document back to markup. Fixed point: parse(render(d))
    renders to the same string."""
    out: list[str] = []
    for node in doc.children:
        _render_node(node, out)
    return "".join(out)


def _render_attr(name: str, value: str | None) -> str:
    if value is None:
        return " " + name
    if '"' not in value:
        return f' {name}="{value}"'
    if "'" not in value:
        return f" {name}='{value}'"
    return ' {}="{}"'.format(name, value.replace('"', "&quot;"))


def _render_node(node: Node, out: list[str]) -> None:
    if isinstance(node, Text):
        out.append(node.content)
    elif isinstance(node, Comment):
        out.append(f"<!--{node.content}-->")
    elif isinstance(node, Doctype):
        out.append(f"<!{node.content}>")
    else:
        out.append("<" + node.tag)
        for name, value in node.attrs.items():
            out.append(_render_attr(name, value))
        if node.self_closing:
            out.append("/>")
            return
        out.append(">")
        for child in node.children:
            _render_node(child, out)
        if node.tag not in VOID_ELEMENTS:
            out.append(f"</{node.tag}>")


def walk(doc: Document) -> Iterator[Node]:
    """All nodes in document order."""
    todo: list[Node] = list(reversed(doc.children))
    while todo:
        node = todo.pop()
        yield node
        if isinstance(node, Element):
            todo.extend(reversed(node.children))


def find_elements(doc: Document, tag: str | None = None) -> list[Element]:
    """Elements in document order, optionally filtered by tag."""
    return [
        node
        for node in walk(doc)
        if isinstance(node, Element) and (tag is None or node.tag == tag)
    ]


def parent_map(doc: Document) -> dict[int, Element | None]:
    """id(node) -> parent element (None for top level)."""
    parents: dict[int, Element | None] = {}
    for child in doc.children:
        parents[id(child)] = None
    for node in walk(doc):
        if isinstance(node, Element):
            for child in node.children:
                parents[id(child)] = node
    return parents


def text_content(doc: Document) -> str:
    """Concatenated text of all text nodes outside script/style."""
    parts: list[str] = []

    def visit(nodes: list[Node]) -> None:
        for node in nodes:
            if isinstance(node, Text):
                parts.append(node.content)
            elif isinstance(node, Element) and node.tag not in ("script", "style"):
                visit(node.children)

    visit(doc.children)
    return "".join(parts)


def _collapse_ws(s: str) -> str:
    return " ".join(s.split()) if s.strip() else (" " if s else "")


def structurally_equal(
    a: Document, b: Document, *, collapse_whitespace: bool = True
) -> bool:
    """Same element structure (tags, attributes, child order); text compared
    modulo whitespace collapse; comments ignored."""

    def clean(nodes: list[Node]) -> list[tuple]:
        items: list[tuple] = []
        pending: str | None = None

        def flush() -> None:
            nonlocal pending
            if pending is None:
                return
            content = _collapse_ws(pending) if collapse_whitespace else pending
            if content:
                items.append(("text", content))
            pending = None

        for node in nodes:
            if isinstance(node, Comment):
                continue  # adjacent text nodes around it compare merged
            if isinstance(node, Text):
                pending = (pending or "") + node.content
                continue
            flush()
            if isinstance(node, Doctype):
                items.append(("doctype", node.content.lower()))
            else:
                items.append(
                    ("elem", node.tag, tuple(node.attrs.items()), clean(node.children))
                )
        flush()
        return items

    return clean(a.children) == clean(b.children)
