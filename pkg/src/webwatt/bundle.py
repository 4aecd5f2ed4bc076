"""Web bundle ingestion, weight metrics, and write-back.

A bundle is one HTML entry document plus the assets it references. Asset
ids are root-relative POSIX paths; reference URLs resolve against the
bundle root first, then against the referencing file's directory. Anything
absolute (scheme:// or //host) or unresolvable becomes an external asset
whose size comes from the optional ``bundle.manifest.json`` sidecar.

Bundles are treated as immutable after load; transformations build new
bundles rather than mutating.
"""

from __future__ import annotations

import json
import re
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path, PurePosixPath

from . import htmlparse

SIDECAR_NAME = "bundle.manifest.json"

HTML = "html"
CSS = "css"
SCRIPT = "script"
IMAGE = "image"
FONT = "font"
SVG = "svg"
OTHER = "other"

TEXT_CLASSES = frozenset({HTML, CSS, SCRIPT, SVG})
ASSET_CLASSES = (HTML, CSS, SCRIPT, IMAGE, FONT, SVG, OTHER)

_EXT_CLASS = {
    ".html": HTML, ".htm": HTML,
    ".css": CSS,
    ".js": SCRIPT, ".mjs": SCRIPT, ".cjs": SCRIPT,
    ".png": IMAGE, ".jpg": IMAGE, ".jpeg": IMAGE, ".gif": IMAGE,
    ".webp": IMAGE, ".avif": IMAGE, ".ico": IMAGE, ".bmp": IMAGE,
    ".woff": FONT, ".woff2": FONT, ".ttf": FONT, ".otf": FONT, ".eot": FONT,
    ".svg": SVG,
}

_RASTER_EXT = {
    ".png": "png", ".jpg": "jpeg", ".jpeg": "jpeg", ".gif": "gif",
    ".webp": "webp", ".avif": "avif", ".bmp": "bmp", ".ico": "ico",
}


class BundleError(Exception):
    pass


class NoEntryError(BundleError):
    pass


class AmbiguousEntryError(BundleError):
    pass


@dataclass
class Asset:
    id: str
    cls: str
    url: str
    bytes: int
    payload: str | bytes | None = None
    external: bool = False

    @property
    def text(self) -> str:
        if not isinstance(self.payload, str):
            raise TypeError(f"asset {self.id} has no text payload")
        return self.payload


@dataclass
class SiteBundle:
    entry: str
    assets: list[Asset] = field(default_factory=list)
    manifest: dict[str, str] = field(default_factory=dict)  # ref URL -> asset id

    def asset(self, asset_id: str) -> Asset:
        for a in self.assets:
            if a.id == asset_id:
                return a
        raise KeyError(asset_id)

    @property
    def entry_asset(self) -> Asset:
        return self.asset(self.entry)

    def by_class(self, cls: str) -> list[Asset]:
        return [a for a in self.assets if a.cls == cls]

    def local_assets(self) -> list[Asset]:
        return [a for a in self.assets if not a.external]

    def validate(self) -> None:
        entries = [a for a in self.assets if a.cls == HTML and not a.external]
        if len(entries) != 1 or entries[0].id != self.entry:
            raise BundleError("bundle must contain exactly one entry html asset")
        ids = {a.id for a in self.assets}
        if len(ids) != len(self.assets):
            raise BundleError("duplicate asset ids")
        for url, asset_id in self.manifest.items():
            if asset_id not in ids:
                raise BundleError(f"manifest target missing for {url!r}")
        for a in self.assets:
            if a.bytes < 0:
                raise BundleError(f"negative byte count on {a.id}")
            if not a.external:
                if a.payload is None:
                    raise BundleError(f"local asset {a.id} has no payload")
                if payload_length(a.payload) != a.bytes:
                    raise BundleError(f"byte count mismatch on {a.id}")


@dataclass(frozen=True)
class WeightReport:
    total_bytes: int
    per_class_bytes: dict[str, int]
    dom_ops: int
    asset_count: int


def payload_length(payload: str | bytes) -> int:
    return len(payload.encode("utf-8")) if isinstance(payload, str) else len(payload)


def classify(name: str, payload: str | bytes | None = None) -> str:
    """Asset class: extension first, then content sniffing."""
    ext = PurePosixPath(name.split("?")[0].split("#")[0]).suffix.lower()
    if ext in _EXT_CLASS:
        return _EXT_CLASS[ext]
    if payload is None:
        return OTHER
    head = payload[:256] if isinstance(payload, bytes) else payload[:256].encode(
        "utf-8", "replace"
    )
    stripped = head.lstrip()
    lower = stripped[:64].lower()
    if lower.startswith((b"<!doctype", b"<html")):
        return HTML
    if lower.startswith(b"<svg") or (lower.startswith(b"<?xml") and b"<svg" in head.lower()):
        return SVG
    if head.startswith((b"\xff\xd8\xff", b"\x89PNG", b"GIF8")):
        return IMAGE
    if head.startswith(b"RIFF") and head[8:12] == b"WEBP":
        return IMAGE
    if head[4:12] == b"ftypavif":
        return IMAGE
    if head.startswith((b"wOFF", b"wOF2", b"OTTO", b"\x00\x01\x00\x00")):
        return FONT
    return OTHER


def raster_format(asset: Asset) -> str | None:
    """Raster image format (jpeg/png/gif/webp/avif/...), extension first."""
    ext = PurePosixPath(asset.url.split("?")[0]).suffix.lower()
    if ext in _RASTER_EXT:
        return _RASTER_EXT[ext]
    payload = asset.payload
    if isinstance(payload, bytes):
        if payload.startswith(b"\xff\xd8\xff"):
            return "jpeg"
        if payload.startswith(b"\x89PNG"):
            return "png"
        if payload.startswith(b"GIF8"):
            return "gif"
        if payload.startswith(b"RIFF") and payload[8:12] == b"WEBP":
            return "webp"
        if payload[4:12] == b"ftypavif":
            return "avif"
    return None


_CSS_URL_RE = re.compile(r"url\(\s*(['\"]?)([^)'\"]+)\1\s*\)", re.IGNORECASE)
_CSS_IMPORT_RE = re.compile(
    r"@import\s+(?:url\(\s*)?['\"]?([^'\")\s;]+)", re.IGNORECASE
)

_REF_ATTRS = {
    "img": "src",
    "script": "src",
    "link": "href",
    "source": "src",
    "audio": "src",
    "video": "src",
    "embed": "src",
    "track": "src",
    "iframe": "src",
}

_SKIP_SCHEMES = ("data:", "mailto:", "javascript:", "about:", "tel:", "blob:")


def html_references(doc: htmlparse.Document) -> list[str]:
    """Reference URLs in document order (may contain duplicates)."""
    refs: list[str] = []
    for element in htmlparse.find_elements(doc):
        attr = _REF_ATTRS.get(element.tag)
        if attr:
            value = element.get(attr)
            if value:
                refs.append(value.strip())
    return refs


def css_references(text: str) -> list[str]:
    refs = [m.group(2).strip() for m in _CSS_URL_RE.finditer(text)]
    refs.extend(m.group(1).strip() for m in _CSS_IMPORT_RE.finditer(text))
    return refs


def is_absolute_url(url: str) -> bool:
    return url.startswith("//") or bool(re.match(r"^[a-zA-Z][a-zA-Z0-9+.-]*:", url))


def _skippable(url: str) -> bool:
    return (
        not url
        or url.startswith("#")
        or url.lower().startswith(_SKIP_SCHEMES)
    )


def _normalize_rel(path: str) -> str | None:
    parts: list[str] = []
    for piece in path.split("/"):
        if piece in ("", "."):
            continue
        if piece == "..":
            if not parts:
                return None
            parts.pop()
        else:
            parts.append(piece)
    return "/".join(parts)


def load_bundle(root_path: str | Path, entry_name: str | None = None) -> SiteBundle:
    """Load a bundle from disk. Any unreadable local file fails the load."""
    root = Path(root_path)
    if not root.is_dir():
        raise BundleError(f"not a directory: {root}")
    if entry_name is not None:
        entry_path = root / entry_name
        if not entry_path.is_file():
            raise NoEntryError(f"entry override {entry_name!r} not found")
    else:
        candidates = sorted(p for p in root.glob("*.html") if p.is_file())
        if not candidates:
            raise NoEntryError(f"no *.html entry document in {root}")
        if len(candidates) > 1:
            names = ", ".join(p.name for p in candidates)
            raise AmbiguousEntryError(
                f"multiple entry candidates ({names}); pass an entry override"
            )
        entry_path = candidates[0]

    sidecar: dict[str, int] = {}
    sidecar_path = root / SIDECAR_NAME
    if sidecar_path.is_file():
        try:
            raw = json.loads(sidecar_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise BundleError(f"unreadable sidecar manifest: {e}") from e
        sidecar = {str(k): int(v) for k, v in raw.items()}

    try:
        entry_bytes = entry_path.read_bytes()
    except OSError as e:
        raise BundleError(f"unreadable entry document: {e}") from e
    entry_text = entry_bytes.decode("utf-8", "replace")
    entry_id = entry_path.name
    entry_asset = Asset(
        id=entry_id, cls=HTML, url=entry_id, bytes=len(entry_bytes),
        payload=entry_text,
    )
    bundle = SiteBundle(entry=entry_id, assets=[entry_asset])

    # (reference url, directory of the referencing file)
    queue: list[tuple[str, str]] = [
        (ref, "") for ref in html_references(htmlparse.parse_html(entry_text))
    ]
    seen_urls: set[str] = set()
    loaded_ids: set[str] = {entry_id}
    while queue:
        url, base_dir = queue.pop(0)
        if url in seen_urls or _skippable(url):
            continue
        seen_urls.add(url)
        if is_absolute_url(url):
            _add_external(bundle, url, sidecar)
            continue
        rel = _resolve_local(root, url, base_dir)
        if rel is None:
            _add_external(bundle, url, sidecar)
            continue
        if rel in loaded_ids:
            bundle.manifest[url] = rel
            continue
        path = root / rel
        try:
            data = path.read_bytes()
        except OSError as e:
            raise BundleError(f"unreadable asset {rel!r}: {e}") from e
        cls = classify(rel, data)
        payload: str | bytes = (
            data.decode("utf-8", "replace") if cls in TEXT_CLASSES else data
        )
        byte_count = len(data) if isinstance(payload, bytes) else len(
            payload.encode("utf-8")
        )
        asset = Asset(id=rel, cls=cls, url=url, bytes=byte_count, payload=payload)
        bundle.assets.append(asset)
        bundle.manifest[url] = rel
        loaded_ids.add(rel)
        if cls == CSS:
            parent = str(PurePosixPath(rel).parent)
            parent = "" if parent == "." else parent
            queue.extend((ref, parent) for ref in css_references(asset.text))
    bundle.validate()
    return bundle


def _resolve_local(root: Path, url: str, base_dir: str) -> str | None:
    candidates = []
    stripped = url.split("?")[0].split("#")[0].lstrip("/")
    norm = _normalize_rel(stripped)
    if norm:
        candidates.append(norm)
    if base_dir:
        joined = _normalize_rel(f"{base_dir}/{stripped}")
        if joined and joined not in candidates:
            candidates.append(joined)
    for rel in candidates:
        path = root / rel
        if path.is_file():
            return rel
    return None


def _add_external(bundle: SiteBundle, url: str, sidecar: dict[str, int]) -> None:
    asset = Asset(
        id=url,
        cls=classify(url) if not is_absolute_url(url) else classify(url.split("?")[0]),
        url=url,
        bytes=sidecar.get(url, 0),
        external=True,
    )
    bundle.assets.append(asset)
    bundle.manifest[url] = url


def write_bundle(bundle: SiteBundle, out_path: str | Path) -> None:
    """Write a bundle to a directory. Refuses to touch a non-empty target so
    a failed write can never leave a half-overwritten output."""
    out = Path(out_path)
    if out.exists():
        if not out.is_dir():
            raise BundleError(f"output path is not a directory: {out}")
        if any(out.iterdir()):
            raise BundleError(f"output directory not empty: {out}")
    staging = out.parent / (out.name + ".writing")
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    try:
        sidecar: dict[str, int] = {}
        for asset in bundle.assets:
            if asset.external:
                sidecar[asset.url] = asset.bytes
                continue
            target = staging / asset.id
            target.parent.mkdir(parents=True, exist_ok=True)
            if isinstance(asset.payload, str):
                target.write_bytes(asset.payload.encode("utf-8"))
            else:
                target.write_bytes(asset.payload or b"")
        if sidecar:
            (staging / SIDECAR_NAME).write_text(
                json.dumps(sidecar, indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )
        if out.exists():
            out.rmdir()  # empty by the check above
        staging.rename(out)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise


def bundle_weight(bundle: SiteBundle, dom_ops: int = 0) -> WeightReport:
    """Byte totals; external assets count at their declared sidecar bytes."""
    per_class = {cls: 0 for cls in ASSET_CLASSES}
    for asset in bundle.assets:
        per_class[asset.cls] = per_class.get(asset.cls, 0) + asset.bytes
    per_class = {cls: n for cls, n in per_class.items() if n > 0}
    return WeightReport(
        total_bytes=sum(per_class.values()),
        per_class_bytes=per_class,
        dom_ops=dom_ops,
        asset_count=len(bundle.assets),
    )


DEFAULT_SIZE_THRESHOLD = 600 * 1024  # KB means 1024 bytes here
DEFAULT_MIN_DOM_OPS = 10


def is_benchmark_eligible(
    weight: WeightReport,
    size_threshold: int = DEFAULT_SIZE_THRESHOLD,
    min_dom_ops: int = DEFAULT_MIN_DOM_OPS,
) -> bool:
    """Strictly heavier than the size threshold and at least the DOM-op floor."""
    return weight.total_bytes > size_threshold and weight.dom_ops >= min_dom_ops


def code_bytes(weight: WeightReport) -> int:
    return sum(
        weight.per_class_bytes.get(cls, 0) for cls in (HTML, CSS, SCRIPT)
    )


def clone_bundle(bundle: SiteBundle) -> SiteBundle:
    return SiteBundle(
        entry=bundle.entry,
        assets=[replace(a) for a in bundle.assets],
        manifest=dict(bundle.manifest),
    )
