"""Independent oracles and fixture builders shared across tests.

Oracles here deliberately avoid the library's own algorithms: selector
matching is brute force over explicit ancestor chains, and the reference
HTML tree builder sits on top of the stdlib event parser.
"""

from __future__ import annotations

import html.parser
from pathlib import Path

from webwatt import cssparse, htmlparse
from webwatt.htmlparse import Document, Element, Text

# ---------------------------------------------------------------------------
# Brute-force selector matching (oracle for match_selector / unused CSS)


def _compound_ok(element: Element, compound: cssparse.Compound) -> bool:
    if compound.unsupported:
        raise AssertionError("oracle only handles supported selectors")
    if compound.tag is not None and element.tag != compound.tag:
        return False
    if compound.id is not None and element.attrs.get("id") != compound.id:
        return False
    return set(compound.classes) <= element.class_names()


def _ancestors(doc: Document, target: Element) -> list[Element]:
    parents = htmlparse.parent_map(doc)
    chain = []
    node = parents.get(id(target))
    while node is not None:
        chain.append(node)
        node = parents.get(id(node))
    return chain  # nearest first


def _embeds(chain: list[Element], compounds) -> bool:
    """Can `compounds` (outermost..innermost-1) embed into the ancestor
    chain (outermost last)? Exhaustive recursion, no greediness."""
    if not compounds:
        return True
    if not chain:
        return False
    # chain is nearest-first; compounds are outer-first. Match innermost
    # remaining compound against any ancestor, then recurse upward.
    inner = compounds[-1]
    for idx, ancestor in enumerate(chain):
        if _compound_ok(ancestor, inner) and _embeds(chain[idx + 1 :], compounds[:-1]):
            return True
    return False


def brute_force_match_count(selector: cssparse.Selector, doc: Document) -> int:
    count = 0
    for element in htmlparse.find_elements(doc):
        if _compound_ok(element, selector.compounds[-1]) and _embeds(
            _ancestors(doc, element), selector.compounds[:-1]
        ):
            count += 1
    return count


# ---------------------------------------------------------------------------
# Reference HTML tree builder on the stdlib tokenizer

_VOID = htmlparse.VOID_ELEMENTS


class StdlibTreeBuilder(html.parser.HTMLParser):
    """Independent tree builder for fixtures without tag-soup recovery.
    Good for comparing tokenization-level behavior (attributes, voids,
    comments, raw text); it does not model auto-closing."""

    def __init__(self):
        super().__init__(convert_charrefs=False)
        self.doc = Document()
        self.stack: list[Element] = []

    def _children(self):
        return self.stack[-1].children if self.stack else self.doc.children

    def handle_starttag(self, tag, attrs):
        attr_map = {}
        for name, value in attrs:
            if name not in attr_map:
                attr_map[name] = value
        element = Element(tag, attr_map, [])
        self._children().append(element)
        if tag not in _VOID:
            self.stack.append(element)

    def handle_startendtag(self, tag, attrs):
        attr_map = {}
        for name, value in attrs:
            if name not in attr_map:
                attr_map[name] = value
        self._children().append(Element(tag, attr_map, [], self_closing=True))

    def handle_endtag(self, tag):
        names = [e.tag for e in self.stack]
        if tag in names:
            while self.stack and self.stack[-1].tag != tag:
                self.stack.pop()
            if self.stack:
                self.stack.pop()

    def handle_data(self, data):
        self._children().append(Text(data))

    def handle_comment(self, data):
        pass  # structural comparisons ignore comments


def stdlib_tree(text: str) -> Document:
    builder = StdlibTreeBuilder()
    builder.feed(text)
    builder.close()
    return builder.doc


# ---------------------------------------------------------------------------
# Handmade bundle fixtures (small, deterministic)

MESSY_CSS = """/* layout notes: the grid wraps at 640px and the hero spans
   both columns; keep these comments out of production */
body {
  margin: 0;
  color: #222222;
  font-family: 'Inter Var', sans-serif;
}

@font-face {
  font-family: 'Inter Var';
  src: url(fonts/inter.woff);
}

@font-face {
  font-family: 'Unused Face';
  src: url(fonts/unused.woff);
}

.hero {
  background-color: #ffffff;
  padding: 12px   12px;
}

.ghost {
  border: 1px   solid #aabbcc;
  margin: 10px;
}

.ghost-hover:hover {
  color: #336699;
}

@media (max-width: 640px) {
  .hero {
    padding: 4px;
  }
  .ghost-inner {
    display: none;
  }
}
"""

MESSY_JS = """// boot loader for the demo page
// registers widgets and logs timing marks
var items = [];
function start(root) {
  var el = document.createElement('section');
  el.setAttribute('data-role', 'panel');
  root.appendChild(el);
  var first = document.querySelector('.hero');
  first.classList.add('ready');
  return el;
}
console.log('booted', items.length);
var label = "// keep this string intact";
start(document.body);
"""

MESSY_SVG = """<svg xmlns="http://www.w3.org/2000/svg"
     xmlns:sodipodi="http://sodipodi.sourceforge.net/DTD/sodipodi-0.0.dtd"
     viewBox="0 0 100.000000 100.000000">
  <metadata>exported by an editor; safe to drop</metadata>
  <!-- decorative ring -->
  <circle cx="50.123456" cy="50.654321" r="40.000000" fill="#3a7d44"/>
</svg>
"""

MESSY_HTML = """<!doctype html>
<html lang="en">
<head>
  <meta charset="utf-8">
  <title>Messy fixture</title>
  <!-- build stamp 2024-11-02 -->
  <link rel="stylesheet" href="css/site.css">
  <script src="js/app.js"></script>
</head>
<body>
  <section class="hero">
    <h1>Hello   there</h1>
    <p>Intro   paragraph with   extra spaces.</p>
  </section>
  <img src="img/a.jpg" alt="a">
  <img src="img/b.jpg" alt="b">
  <img src="img/c.jpg" alt="c">
  <img src="img/d.jpg" alt="d">
  <img src="img/e.jpg" alt="e">
  <img src="img/ring.svg" alt="ring">
  <pre>  keep
  me   verbatim</pre>
  <script>var inline = document.getElementById('x');</script>
</body>
</html>
"""


def write_messy_bundle(root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    (root / "index.html").write_text(MESSY_HTML, encoding="utf-8")
    (root / "css").mkdir(exist_ok=True)
    (root / "css" / "site.css").write_text(MESSY_CSS, encoding="utf-8")
    (root / "js").mkdir(exist_ok=True)
    (root / "js" / "app.js").write_text(MESSY_JS, encoding="utf-8")
    (root / "img").mkdir(exist_ok=True)
    for name in "abcde":
        (root / "img" / f"{name}.jpg").write_bytes(
            b"\xff\xd8\xff\xe0" + bytes(range(256)) * 600
        )
    (root / "img" / "ring.svg").write_text(MESSY_SVG, encoding="utf-8")
    (root / "fonts").mkdir(exist_ok=True)
    (root / "fonts" / "inter.woff").write_bytes(b"wOFF" + b"\x01" * 50000)
    (root / "fonts" / "unused.woff").write_bytes(b"wOFF" + b"\x02" * 9000)
    return root


def write_minimal_bundle(root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    (root / "index.html").write_text("<p>hi</p>", encoding="utf-8")
    return root


def write_refs_bundle(root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    (root / "index.html").write_text(
        '<!doctype html><html><head>'
        '<link rel="stylesheet" href="a.css">'
        '<script src="https://cdn.example/x.js"></script>'
        "</head><body><p class=\"lead\">text</p></body></html>",
        encoding="utf-8",
    )
    (root / "a.css").write_bytes(b".lead { color: #333333; }" + b" " * 95)
    return root


def write_pre_bundle(root: Path) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    (root / "index.html").write_text(
        "<!doctype html><html><head><title>t</title></head><body>"
        "<pre>  a\n b</pre><textarea> keep  this </textarea>"
        "<script>var a = 1;  var b = 2;</script>"
        "<!--[if lt IE 9]><p>old</p><![endif]-->"
        "<p>  spaced   text  </p></body></html>",
        encoding="utf-8",
    )
    return root


FIXTURE_BUILDERS = {
    "minimal": write_minimal_bundle,
    "refs": write_refs_bundle,
    "pre": write_pre_bundle,
    "messy": write_messy_bundle,
}
