"""Synthetic page corpus with controllable inefficiency knobs.

Pages are generated deterministically from a seed so benchmark numbers are
reproducible. Knobs control comment density, unused CSS rules, image
weight and format, blocking scripts, console noise, and DOM-op counts;
every default page clears the benchmark eligibility bar (> 600 KiB,
>= 10 DOM-affecting operations).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

_IMAGE_MAGIC = {
    "jpg": b"\xff\xd8\xff\xe0",
    "png": b"\x89PNG\r\n\x1a\n",
    "gif": b"GIF89a",
    "webp": b"RIFF\x00\x00\x00\x00WEBP",
}

_WORDS = (
    "solar panel grid turbine meter carbon joule watt render layout cache "
    "asset byte script style image font page view trace budget signal "
    "session metric audit saving transfer device network deploy release"
).split()


@dataclass(frozen=True)
class PageKnobs:
    image_count: int = 3
    image_kb: int = 250
    image_format: str = "jpg"
    below_fold_images: int = 4  # small extra imgs past the fold
    unused_rules: int = 5
    guarded_unused_rules: int = 1  # unused but behind :hover (must survive)
    used_rules: int = 8
    css_comment_blocks: int = 10
    js_comment_blocks: int = 10
    blocking_scripts: int = 1
    console_statements: int = 3
    dom_op_count: int = 15
    fonts: int = 1
    unused_fonts: int = 0
    svg_count: int = 1
    external_bytes: int = 0
    paragraphs: int = 6


def _sentence(rng: random.Random, words: int) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(words)).capitalize() + "."


def _comment_filler(rng: random.Random, blocks: int, prefix: str) -> list[str]:
    out = []
    for k in range(blocks):
        body = _sentence(rng, rng.randint(8, 20))
        out.append(f"{prefix} note {k}: {body} {body}")
    return out


_DOM_OP_TEMPLATES = (
    "var el{k} = document.createElement('div');",
    "root.appendChild(stash[{k} % stash.length]);",
    "root.removeChild(stash[{k} % stash.length]);",
    "widget.setAttribute('data-slot', 'w{k}');",
    "var hit{k} = document.querySelector('.para');",
    "var all{k} = document.querySelectorAll('section');",
    "var byid{k} = document.getElementById('main');",
    "panel.classList.toggle('open');",
    "banner.innerHTML = render(state, {k});",
    "list.insertBefore(stash[{k} % stash.length], null);",
    "card.insertAdjacentHTML('beforeend', fragment({k}));",
)


def _script_text(rng: random.Random, knobs: PageKnobs) -> str:
    lines: list[str] = []
    lines.append("'use strict';")
    for comment in _comment_filler(rng, knobs.js_comment_blocks, "//"):
        lines.append(comment)
        lines.append(f"var pad_{rng.randint(0, 9999)} = {rng.randint(1, 500)};")
    lines.append("var stash = [];")
    lines.append("var state = { open: false, items: [] };")
    lines.append("function render(s, k) { return '<li>' + k + '</li>'; }")
    lines.append("function fragment(k) { return '<em>' + k + '</em>'; }")
    lines.append("function boot(root, widget, panel, banner, list, card) {")
    for k in range(knobs.dom_op_count):
        template = _DOM_OP_TEMPLATES[k % len(_DOM_OP_TEMPLATES)]
        lines.append("  " + template.format(k=k))
    lines.append("}")
    for k in range(knobs.console_statements):
        lines.append(f"console.log('debug marker {k}', state);")
    lines.append("boot(document.body, document.body, document.body, "
                 "document.body, document.body, document.body);")
    return "\n".join(lines) + "\n"


def _css_text(rng: random.Random, knobs: PageKnobs) -> str:
    parts: list[str] = []
    for comment in _comment_filler(rng, knobs.css_comment_blocks, ""):
        parts.append(f"/* {comment.strip()} */")
    for f in range(knobs.fonts):
        parts.append(
            f"@font-face {{\n  font-family: 'BodyFace{f}';\n"
            f"  src: url(fonts/body{f}.woff);\n}}"
        )
    for f in range(knobs.unused_fonts):
        parts.append(
            f"@font-face {{\n  font-family: 'GhostFace{f}';\n"
            f"  src: url(fonts/ghost{f}.woff);\n}}"
        )
    if knobs.fonts:
        parts.append("body {\n  font-family: 'BodyFace0', sans-serif;\n  margin: 0 auto;\n}")
    else:
        parts.append("body {\n  margin: 0 auto;\n}")
    used_selectors = [".hero", ".para", "h1", ".gallery img", "#main", "section"]
    for k in range(knobs.used_rules):
        selector = used_selectors[k % len(used_selectors)]
        pad = rng.randint(0, 24)
        parts.append(
            f"{selector} {{\n  color: #aabbcc;\n  padding: {pad}px   {pad}px;\n"
            f"  background-color: #ffffff;\n}}"
        )
    for k in range(knobs.unused_rules):
        parts.append(
            f".ghost-{k} {{\n  color: #ddeeff;\n  margin: {rng.randint(1, 40)}px;\n"
            f"  border: 1px solid #112233;\n}}"
        )
    for k in range(knobs.guarded_unused_rules):
        parts.append(
            f".ghost-hover-{k}:hover {{\n  color: #224466;\n}}"
        )
    parts.append(
        "@media (max-width: 640px) {\n  .para {\n    font-size: 14px;\n  }\n"
        "  .ghost-media {\n    display: none;\n  }\n}"
    )
    return "\n\n".join(parts) + "\n"


def _svg_text(rng: random.Random) -> str:
    shapes = []
    for k in range(rng.randint(6, 14)):
        x = rng.uniform(0, 120)
        y = rng.uniform(0, 120)
        shapes.append(
            f'  <rect x="{x:.6f}" y="{y:.6f}" width="{rng.uniform(4, 30):.6f}" '
            f'height="{rng.uniform(4, 30):.6f}" fill="#3a7d44"/>\n'
            f"  <!-- shape {k} generated by editor -->"
        )
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" '
        'xmlns:sodipodi="http://sodipodi.sourceforge.net/DTD/sodipodi-0.0.dtd" '
        'viewBox="0 0 160.000000 160.000000" sodipodi:docname="icon.svg">\n'
        "  <metadata>\n    <rdf>editor metadata payload "
        + _sentence(rng, 30)
        + "</rdf>\n  </metadata>\n"
        + "\n".join(shapes)
        + "\n</svg>\n"
    )


def _html_text(rng: random.Random, knobs: PageKnobs) -> str:
    head_scripts = "\n".join(
        f'  <script src="js/app{k}.js"></script>'
        for k in range(knobs.blocking_scripts)
    )
    hero_imgs = "\n".join(
        f'    <img src="img/photo{k}.{knobs.image_format}" alt="photo {k}" class="hero">'
        for k in range(min(knobs.image_count, 3))
    )
    more_imgs = "\n".join(
        f'    <img src="img/photo{k}.{knobs.image_format}" alt="photo {k}">'
        for k in range(3, knobs.image_count)
    )
    thumbs = "\n".join(
        f'    <img src="img/thumb{k}.{knobs.image_format}" alt="thumb {k}">'
        for k in range(knobs.below_fold_images)
    )
    svgs = "\n".join(
        f'    <img src="img/icon{k}.svg" alt="icon {k}">'
        for k in range(knobs.svg_count)
    )
    paragraphs = "\n".join(
        f'    <p class="para">{_sentence(rng, rng.randint(18, 40))}</p>'
        for _ in range(knobs.paragraphs)
    )
    external = (
        '\n  <script src="https://cdn.example/analytics.js"></script>'
        if knobs.external_bytes
        else ""
    )
    comments = "\n".join(
        f"  <!-- layout block {k}: {_sentence(rng, 12)} -->" for k in range(4)
    )
    return f"""<!doctype html>
<html lang="en">
<head>
  <meta charset="utf-8">
  <title>Field Notes {rng.randint(100, 999)}</title>
  <link rel="stylesheet" href="css/style.css">
{head_scripts}{external}
</head>
<body>
{comments}
  <section id="main">
    <h1>{_sentence(rng, 6)}</h1>
{hero_imgs}
{paragraphs}
  </section>
  <section class="gallery">
{more_imgs}
{thumbs}
{svgs}
  </section>
  <script>
    var banner = document.getElementById('main');
  </script>
</body>
</html>
"""


def generate_page(page_dir: str | Path, knobs: PageKnobs, seed: int = 0) -> Path:
    rng = random.Random(seed)
    root = Path(page_dir)
    root.mkdir(parents=True, exist_ok=True)
    (root / "index.html").write_text(_html_text(rng, knobs), encoding="utf-8")
    (root / "css").mkdir(exist_ok=True)
    (root / "css" / "style.css").write_text(_css_text(rng, knobs), encoding="utf-8")
    (root / "js").mkdir(exist_ok=True)
    for k in range(max(knobs.blocking_scripts, 1)):
        (root / "js" / f"app{k}.js").write_text(
            _script_text(rng, knobs), encoding="utf-8"
        )
    (root / "img").mkdir(exist_ok=True)
    magic = _IMAGE_MAGIC[knobs.image_format]
    for k in range(knobs.image_count):
        payload = magic + rng.randbytes(knobs.image_kb * 1024 - len(magic))
        (root / "img" / f"photo{k}.{knobs.image_format}").write_bytes(payload)
    for k in range(knobs.below_fold_images):
        payload = magic + rng.randbytes(24 * 1024 - len(magic))
        (root / "img" / f"thumb{k}.{knobs.image_format}").write_bytes(payload)
    for k in range(knobs.svg_count):
        (root / "img" / f"icon{k}.svg").write_text(_svg_text(rng), encoding="utf-8")
    if knobs.fonts or knobs.unused_fonts:
        (root / "fonts").mkdir(exist_ok=True)
    for f in range(knobs.fonts):
        payload = b"wOFF" + rng.randbytes(42 * 1024 - 4)
        (root / "fonts" / f"body{f}.woff").write_bytes(payload)
    for f in range(knobs.unused_fonts):
        payload = b"wOFF" + rng.randbytes(30 * 1024 - 4)
        (root / "fonts" / f"ghost{f}.woff").write_bytes(payload)
    if knobs.external_bytes:
        (root / "bundle.manifest.json").write_text(
            json.dumps({"https://cdn.example/analytics.js": knobs.external_bytes}),
            encoding="utf-8",
        )
    return root


def _profile_knobs(rng: random.Random, profile: str) -> PageKnobs:
    if profile == "fat":
        return PageKnobs(
            image_count=rng.randint(3, 4),
            image_kb=rng.randint(210, 340),
            image_format=rng.choice(["jpg", "jpg", "png", "gif"]),
            below_fold_images=rng.randint(3, 7),
            unused_rules=rng.randint(3, 9),
            guarded_unused_rules=rng.randint(0, 2),
            used_rules=rng.randint(6, 12),
            css_comment_blocks=rng.randint(8, 24),
            js_comment_blocks=rng.randint(8, 24),
            blocking_scripts=rng.randint(1, 2),
            console_statements=rng.randint(2, 6),
            dom_op_count=rng.randint(12, 40),
            fonts=1,
            unused_fonts=rng.choice([0, 0, 1]),
            svg_count=rng.randint(1, 2),
            external_bytes=rng.choice([0, 0, 12288]),
            paragraphs=rng.randint(5, 10),
        )
    if profile == "medium":
        return PageKnobs(
            image_count=3,
            image_kb=rng.randint(190, 260),
            image_format="png",
            below_fold_images=rng.randint(2, 5),
            unused_rules=rng.randint(1, 4),
            used_rules=rng.randint(6, 10),
            css_comment_blocks=rng.randint(3, 8),
            js_comment_blocks=rng.randint(3, 8),
            blocking_scripts=1,
            console_statements=rng.randint(0, 3),
            dom_op_count=rng.randint(10, 24),
            fonts=1,
            svg_count=1,
            paragraphs=rng.randint(4, 8),
        )
    # lean: modern image formats, light text fat; still eligible
    return PageKnobs(
        image_count=3,
        image_kb=rng.randint(220, 300),
        image_format="webp",
        below_fold_images=rng.randint(2, 4),
        unused_rules=rng.randint(1, 2),
        used_rules=rng.randint(5, 8),
        css_comment_blocks=rng.randint(2, 4),
        js_comment_blocks=rng.randint(2, 4),
        blocking_scripts=1,
        console_statements=rng.randint(0, 1),
        dom_op_count=rng.randint(10, 16),
        fonts=1,
        svg_count=1,
        paragraphs=rng.randint(4, 6),
    )


DEFAULT_PROFILE_MIX = ("fat",) * 24 + ("medium",) * 4 + ("lean",) * 2


def generate_corpus(
    out_dir: str | Path,
    pages: int = 30,
    seed: int = 7,
    groups: tuple[str, ...] | None = None,
) -> list[Path]:
    """Write ``pages`` bundle directories under ``out_dir``. With groups,
    pages are distributed round-robin into group subdirectories."""
    rng = random.Random(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for k in range(pages):
        profile = DEFAULT_PROFILE_MIX[k % len(DEFAULT_PROFILE_MIX)]
        knobs = _profile_knobs(rng, profile)
        name = f"page{k:03d}"
        parent = out / groups[k % len(groups)] if groups else out
        written.append(generate_page(parent / name, knobs, seed=rng.randint(0, 2**31)))
    return written
