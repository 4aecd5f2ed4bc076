"""HTTP facade: analyze, optimize, diff, estimate, and review sessions.

The optimizer backend is pluggable: the rule pipeline runs by default and
fully offline; a remote endpoint can be configured, in which case its
responses pass a structural validation gate (assets must re-parse in their
class and must not introduce new external references) before being
trusted. Sessions live in memory under unguessable tokens with a TTL.
"""

from __future__ import annotations

import base64
import copy
import secrets
import time
from dataclasses import dataclass
from typing import Callable

import httpx
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from . import analyzer as analyzermod
from . import bundle as bundlemod
from . import cssparse, diffpatch, htmlparse
from .bundle import Asset, SiteBundle, bundle_weight
from .config import AppConfig, BackendConfig
from .diffpatch import PatchSet
from .energy import SavingsReport, compute_savings, estimate_energy, estimate_from_counts
from .optimizer import run_pipeline


class BackendError(Exception):
    """Remote optimizer failure; `reason` distinguishes the failure class."""

    reason = "error"


class BackendTimeoutError(BackendError):
    reason = "timeout"


class BackendStatusError(BackendError):
    reason = "status"


class BackendValidationError(BackendError):
    reason = "validation"


# ---------------------------------------------------------------------------
# Wire formats

class WireAsset(BaseModel):
    url: str
    kind: str | None = None
    text: str | None = None
    content_b64: str | None = None
    external_bytes: int | None = None


class OptimizeRequest(BaseModel):
    assets: list[WireAsset]
    context: int = 3


class EstimateRequest(BaseModel):
    total_bytes: int = Field(ge=0)
    dom_ops: int = Field(default=0, ge=0)


class DiffRequest(BaseModel):
    a: str
    b: str
    context: int = 3


class ApplyRequest(BaseModel):
    # asset id -> hunk id (as string) -> "accepted" | "rejected"
    decisions: dict[str, dict[str, str]] = Field(default_factory=dict)


def _normalize_url(url: str) -> str:
    if bundlemod.is_absolute_url(url):
        return url
    out = url.lstrip("/")
    while out.startswith("./"):
        out = out[2:]
    return out


def bundle_from_wire(assets: list[WireAsset]) -> SiteBundle:
    """Build a bundle from uploaded assets; the first html asset is the
    entry document."""
    if not assets:
        raise ValueError("no assets in request")
    built: list[Asset] = []
    entry_id: str | None = None
    for wire in assets:
        url = _normalize_url(wire.url)
        if wire.external_bytes is not None:
            built.append(
                Asset(id=url, cls=bundlemod.classify(url), url=url,
                      bytes=int(wire.external_bytes), external=True)
            )
            continue
        if wire.text is not None:
            payload: str | bytes = wire.text
        elif wire.content_b64 is not None:
            payload = base64.b64decode(wire.content_b64)
        else:
            raise ValueError(f"asset {wire.url!r} has neither text nor content")
        cls = wire.kind or bundlemod.classify(url, payload)
        if cls not in bundlemod.ASSET_CLASSES:
            raise ValueError(f"unknown asset class {cls!r}")
        if cls in bundlemod.TEXT_CLASSES and isinstance(payload, bytes):
            payload = payload.decode("utf-8", "replace")
        built.append(
            Asset(id=url, cls=cls, url=url,
                  bytes=bundlemod.payload_length(payload), payload=payload)
        )
        if cls == bundlemod.HTML and entry_id is None:
            entry_id = url
    if entry_id is None:
        raise ValueError("request contains no html entry asset")
    manifest = {a.url: a.id for a in built if a.id != entry_id}
    site = SiteBundle(entry=entry_id, assets=built, manifest=manifest)
    site.validate()
    return site


def bundle_to_wire(site: SiteBundle) -> list[dict]:
    """Wire representation of a bundle (inverse of bundle_from_wire)."""
    out: list[dict] = []
    for asset in site.assets:
        if asset.external:
            out.append({"url": asset.url, "external_bytes": asset.bytes})
        elif isinstance(asset.payload, str):
            out.append({"url": asset.id, "kind": asset.cls, "text": asset.payload})
        else:
            out.append(
                {
                    "url": asset.id,
                    "kind": asset.cls,
                    "content_b64": base64.b64encode(asset.payload or b"").decode(),
                }
            )
    return out


def wire_payload_bytes(assets: list[WireAsset]) -> int:
    total = 0
    for wire in assets:
        if wire.text is not None:
            total += len(wire.text.encode("utf-8"))
        elif wire.content_b64 is not None:
            total += len(wire.content_b64)
    return total


# ---------------------------------------------------------------------------
# Backend gate

def collect_unresolved_refs(site: SiteBundle) -> set[str]:
    """Reference URLs that leave the bundle: absolute, or not resolvable
    against the bundle's assets."""
    known = {a.id for a in site.assets} | set(site.manifest.keys())
    refs: set[str] = set()
    doc = htmlparse.parse_html(site.entry_asset.text)
    for ref in bundlemod.html_references(doc):
        refs.add(ref)
    for asset in site.by_class(bundlemod.CSS):
        if not asset.external:
            refs.update(bundlemod.css_references(asset.text))
    out: set[str] = set()
    for ref in refs:
        if bundlemod._skippable(ref):
            continue
        if bundlemod.is_absolute_url(ref):
            out.add(ref)
            continue
        if _normalize_url(ref) not in known:
            out.add(ref)
    return out


def validate_optimized_bundle(original: SiteBundle, optimized: SiteBundle) -> None:
    """Reject any backend output that adds references leaving the bundle
    or corrupts a stylesheet beyond what the original already had."""
    new_refs = collect_unresolved_refs(optimized) - collect_unresolved_refs(original)
    if new_refs:
        raise BackendValidationError(
            f"optimized output adds external references: {sorted(new_refs)}"
        )
    for asset in optimized.by_class(bundlemod.CSS):
        if asset.external:
            continue
        try:
            before = original.asset(asset.id)
        except KeyError:
            continue
        if len(cssparse.parse_css(asset.text).unparsed) > len(
            cssparse.parse_css(before.text).unparsed
        ):
            raise BackendValidationError(
                f"optimized stylesheet {asset.id!r} no longer parses cleanly"
            )


# ---------------------------------------------------------------------------
# Remote backend

def call_remote_backend(
    assets: list[dict],
    cfg: BackendConfig,
    transport: httpx.BaseTransport | None = None,
    config_hints: dict | None = None,
) -> list[dict]:
    """POST snippet assets to the configured endpoint; returns the
    optimized assets. The credential is read only from the configured
    environment variable, never from config files."""
    import os

    headers = {}
    token = os.environ.get(cfg.auth_token_env_var, "")
    if token:
        headers["Authorization"] = f"Bearer {token}"
    body = {"assets": assets, "config_hints": config_hints or {}}
    try:
        with httpx.Client(transport=transport, timeout=cfg.timeout_seconds) as client:
            response = client.post(cfg.remote_endpoint, json=body, headers=headers)
    except httpx.TimeoutException as e:
        raise BackendTimeoutError(f"backend timeout: {e}") from e
    except httpx.HTTPError as e:
        raise BackendStatusError(f"backend unreachable: {e}") from e
    if response.status_code // 100 != 2:
        raise BackendStatusError(f"backend returned status {response.status_code}")
    try:
        data = response.json()
        returned = data["assets"]
        out = [{"url": str(item["url"]), "text": str(item["text"])} for item in returned]
    except (KeyError, TypeError, ValueError) as e:
        raise BackendValidationError(f"malformed backend response: {e}") from e
    return out


def apply_remote_texts(site: SiteBundle, returned: list[dict]) -> SiteBundle:
    new_bundle = bundlemod.clone_bundle(site)
    by_id = {a.id: a for a in new_bundle.assets}
    for item in returned:
        asset = by_id.get(_normalize_url(item["url"]))
        if asset is None or asset.external or asset.cls not in bundlemod.TEXT_CLASSES:
            continue
        asset.payload = item["text"]
        asset.bytes = len(item["text"].encode("utf-8"))
    return new_bundle


# ---------------------------------------------------------------------------
# Sessions

@dataclass
class ReviewSession:
    session_id: str
    original: SiteBundle
    optimized: SiteBundle
    patchsets: dict[str, PatchSet]
    savings: SavingsReport
    transformations: list[dict]
    created_at: float
    ttl_seconds: float
    fallback_used: bool = False
    finalized: bool = False


class SessionStore:
    def __init__(self, ttl_seconds: float, clock: Callable[[], float]):
        self.ttl_seconds = ttl_seconds
        self.clock = clock
        self._sessions: dict[str, ReviewSession] = {}

    def create(self, **kwargs) -> ReviewSession:
        session_id = secrets.token_urlsafe(16)
        session = ReviewSession(
            session_id=session_id,
            created_at=self.clock(),
            ttl_seconds=self.ttl_seconds,
            **kwargs,
        )
        self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> ReviewSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        if self.clock() - session.created_at > session.ttl_seconds:
            del self._sessions[session_id]
            raise KeyError(session_id)
        return session


# ---------------------------------------------------------------------------
# App

def _estimate_dict(estimate) -> dict:
    return {
        "transfer_joules": estimate.transfer_joules,
        "cpu_joules": estimate.cpu_joules,
        "total_joules": estimate.total_joules,
        "per_segment_joules": estimate.per_segment_joules,
        "bytes": estimate.input_bytes,
        "dom_ops": estimate.input_dom_ops,
    }


def _savings_dict(savings: SavingsReport) -> dict:
    return {
        "before_j": savings.before.total_joules,
        "after_j": savings.after.total_joules,
        "delta_j": savings.delta_joules,
        "delta_pct": savings.delta_percent,
        "before": _estimate_dict(savings.before),
        "after": _estimate_dict(savings.after),
    }


def _session_view(session: ReviewSession) -> dict:
    return {
        "session_id": session.session_id,
        "fallback_used": session.fallback_used,
        "finalized": session.finalized,
        "savings": _savings_dict(session.savings),
        "patchsets": [
            {
                "asset": asset_id,
                "diff": diffpatch.render_patch(patchset),
                "hunks": len(patchset.hunks),
                "original_digest": patchset.original_digest,
            }
            for asset_id, patchset in sorted(session.patchsets.items())
        ],
        "transformations": session.transformations,
    }


def optimize_bundle_for_review(
    site: SiteBundle, app_config: AppConfig,
    transport: httpx.BaseTransport | None = None,
) -> tuple[SiteBundle, list[dict], bool]:
    """(optimized bundle, transformation summary, fallback_used)."""
    backend = app_config.backend
    if backend.mode == "remote":
        try:
            wire = [
                {"class": a.cls, "url": a.id, "text": a.text}
                for a in site.assets
                if not a.external and a.cls in bundlemod.TEXT_CLASSES
            ]
            returned = call_remote_backend(wire, backend, transport=transport)
            optimized = apply_remote_texts(site, returned)
            validate_optimized_bundle(site, optimized)
            return optimized, [{"kind": "remote_backend", "status": "accepted"}], False
        except BackendError as e:
            if not backend.fallback_to_rules:
                raise
            optimized, log = run_pipeline(site, app_config.pipeline)
            validate_optimized_bundle(site, optimized)
            summary = _log_summary(log)
            summary.append(
                {"kind": "remote_backend", "status": "failed", "reason": e.reason,
                 "detail": str(e)}
            )
            return optimized, summary, True
    optimized, log = run_pipeline(site, app_config.pipeline)
    validate_optimized_bundle(site, optimized)
    return optimized, _log_summary(log), False


def _log_summary(log) -> list[dict]:
    return [
        {
            "kind": r.kind,
            "asset_id": r.asset_id,
            "bytes_before": r.bytes_before,
            "bytes_after": r.bytes_after,
            "status": r.status,
        }
        for r in log.records
    ]


def create_app(
    app_config: AppConfig | None = None,
    clock: Callable[[], float] | None = None,
    remote_transport: httpx.BaseTransport | None = None,
) -> FastAPI:
    cfg = app_config or AppConfig()
    clock = clock or time.monotonic
    app = FastAPI(title="webwatt", version=__version__)
    store = SessionStore(cfg.server.session_ttl_seconds, clock)
    app.state.config = cfg
    app.state.sessions = store

    def _review_from_bundle(site: SiteBundle, context: int) -> ReviewSession:
        ops_before = analyzermod.bundle_dom_ops(site, cfg.analyzer)
        before = estimate_energy(bundle_weight(site, ops_before), cfg.energy)
        try:
            optimized, summary, fallback_used = optimize_bundle_for_review(
                site, cfg, transport=remote_transport
            )
        except BackendError as e:
            raise HTTPException(
                status_code=502,
                detail={"error": "backend failure", "reason": e.reason,
                        "message": str(e)},
            )
        ops_after = analyzermod.bundle_dom_ops(optimized, cfg.analyzer)
        after = estimate_energy(bundle_weight(optimized, ops_after), cfg.energy)
        if before.total_joules <= 0:
            raise HTTPException(status_code=422, detail="bundle has zero weight")
        savings = compute_savings(before, after)
        patchsets: dict[str, PatchSet] = {}
        optimized_ids = {a.id: a for a in optimized.assets}
        for asset in site.assets:
            if asset.external or asset.cls not in bundlemod.TEXT_CLASSES:
                continue
            counterpart = optimized_ids.get(asset.id)
            if counterpart is None or counterpart.external:
                continue
            if counterpart.text != asset.text:
                patchsets[asset.id] = diffpatch.unified_diff(
                    asset.text, counterpart.text, context=context, asset_id=asset.id
                )
        return store.create(
            original=site,
            optimized=optimized,
            patchsets=patchsets,
            savings=savings,
            transformations=summary,
            fallback_used=fallback_used,
        )

    @app.get("/v1/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/v1/estimate")
    def estimate(request: EstimateRequest) -> dict:
        return _estimate_dict(
            estimate_from_counts(request.total_bytes, request.dom_ops, cfg.energy)
        )

    @app.post("/v1/diff")
    def diff(request: DiffRequest) -> dict:
        if request.context < 0:
            raise HTTPException(status_code=422, detail="context must be >= 0")
        patchset = diffpatch.unified_diff(request.a, request.b, request.context)
        return {
            "diff": diffpatch.render_patch(patchset),
            "hunks": len(patchset.hunks),
        }

    @app.post("/v1/optimize")
    def optimize(request: OptimizeRequest) -> dict:
        if wire_payload_bytes(request.assets) > cfg.server.max_payload_bytes:
            raise HTTPException(status_code=413, detail="payload too large")
        try:
            site = bundle_from_wire(request.assets)
        except (ValueError, bundlemod.BundleError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        session = _review_from_bundle(site, request.context)
        return _session_view(session)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        try:
            session = store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown or expired session")
        return _session_view(session)

    @app.post("/v1/sessions/{session_id}/apply")
    def apply(session_id: str, request: ApplyRequest) -> dict:
        try:
            session = store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown or expired session")
        missing: list[str] = []
        out_assets: list[dict] = []
        for asset in session.original.assets:
            if asset.external:
                out_assets.append({"url": asset.url, "external_bytes": asset.bytes})
                continue
            if asset.cls not in bundlemod.TEXT_CLASSES:
                out_assets.append(
                    {
                        "url": asset.id,
                        "content_b64": base64.b64encode(asset.payload or b"").decode(),
                    }
                )
                continue
            patchset = session.patchsets.get(asset.id)
            if patchset is None:
                out_assets.append({"url": asset.id, "text": asset.text})
                continue
            decided = copy.deepcopy(patchset)
            decided.set_all(diffpatch.REJECTED)
            asset_decisions = request.decisions.get(asset.id, {})
            known = {h.id for h in decided.hunks}
            for hunk in decided.hunks:
                decision = asset_decisions.get(str(hunk.id))
                if decision is None:
                    missing.append(f"{asset.id}#{hunk.id}")
                elif decision not in (diffpatch.ACCEPTED, diffpatch.REJECTED):
                    raise HTTPException(
                        status_code=422,
                        detail=f"bad decision {decision!r} for {asset.id}#{hunk.id}",
                    )
                else:
                    hunk.state = decision
            for hunk_id in asset_decisions:
                if not hunk_id.isdigit() or int(hunk_id) not in known:
                    raise HTTPException(
                        status_code=422,
                        detail=f"unknown hunk id {hunk_id!r} for {asset.id}",
                    )
            try:
                text = diffpatch.apply_selected(asset.text, decided)
            except diffpatch.StalePatchError as e:
                raise HTTPException(status_code=409, detail=str(e))
            except diffpatch.PatchError as e:
                raise HTTPException(status_code=409, detail=str(e))
            out_assets.append(
                {
                    "url": asset.id,
                    "text": text,
                    "digest": diffpatch.text_digest(text),
                }
            )
        original_ids = {a.id for a in session.original.assets}
        for asset in session.optimized.assets:
            if asset.external or asset.id in original_ids:
                continue
            out_assets.append(
                {
                    "url": asset.id,
                    "content_b64": base64.b64encode(
                        asset.payload if isinstance(asset.payload, bytes)
                        else (asset.payload or "").encode("utf-8")
                    ).decode(),
                }
            )
        session.finalized = True
        return {
            "session_id": session.session_id,
            "finalized": True,
            "missing_decisions": missing,
            "assets": out_assets,
        }

    return app
