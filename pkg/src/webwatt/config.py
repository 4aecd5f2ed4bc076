"""Global configuration: one JSON file with analyzer / pipeline / energy /
backend / server sections. JSON was chosen (over TOML) so the same file is
trivially readable by the review frontend and scripted clients."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .analyzer import AnalyzerConfig
from .energy import EnergyModelParams
from .optimizer import PipelineConfig


@dataclass(frozen=True)
class BackendConfig:
    mode: str = "rules"  # rules | remote
    remote_endpoint: str = ""
    auth_token_env_var: str = "WEBWATT_BACKEND_TOKEN"
    timeout_seconds: float = 30.0
    fallback_to_rules: bool = True

    def __post_init__(self) -> None:
        if self.mode not in ("rules", "remote"):
            raise ValueError(f"unknown backend mode {self.mode!r}")
        if self.mode == "remote" and not self.remote_endpoint:
            raise ValueError("remote mode requires remote_endpoint")


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8787
    max_payload_bytes: int = 50 * 1024 * 1024
    session_ttl_seconds: float = 3600.0


@dataclass(frozen=True)
class AppConfig:
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    energy: EnergyModelParams = field(default_factory=EnergyModelParams)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)
    server: ServerConfig = field(default_factory=ServerConfig)


def config_from_dict(data: dict) -> AppConfig:
    analyzer = AnalyzerConfig.from_dict(data.get("analyzer", {}))
    energy_data = dict(data.get("energy", {}))
    energy = EnergyModelParams(**energy_data)
    pipeline_data = dict(data.get("pipeline", {}))
    pipeline_data.setdefault("analyzer", {})
    pipeline = PipelineConfig.from_dict(pipeline_data)
    # analyzer/energy sections win over pipeline-embedded copies unless the
    # pipeline section overrode them explicitly
    if "analyzer" not in data.get("pipeline", {}):
        pipeline = replace(pipeline, analyzer=analyzer)
    if "energy" not in data.get("pipeline", {}):
        pipeline = replace(pipeline, energy=energy)
    backend = BackendConfig(**data.get("backend", {}))
    server = ServerConfig(**data.get("server", {}))
    return AppConfig(
        analyzer=pipeline.analyzer,
        energy=pipeline.energy,
        pipeline=pipeline,
        backend=backend,
        server=server,
    )


def load_config(path: str | Path | None) -> AppConfig:
    if path is None:
        return AppConfig()
    raw = Path(path).read_text(encoding="utf-8")
    data = json.loads(raw)
    if not isinstance(data, dict):
        raise ValueError("config file must contain a JSON object")
    return config_from_dict(data)
