"""Energy, carbon, and breakeven arithmetic.

This is an estimator, not a meter: transferred bytes are converted to
joules through a configurable intensity factor split across grid segments,
and script cost is a linear function of statically counted DOM-affecting
operations. Absolute joules are only meaningful relative to the same model;
before/after deltas are the quantity of interest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

if TYPE_CHECKING:
    from .bundle import WeightReport

JOULES_PER_KWH = 3.6e6
BYTES_PER_GB = 1e9


def _default_shares() -> dict[str, float]:
    return {"datacenter": 0.15, "network": 0.14, "device": 0.52}


@dataclass(frozen=True)
class EnergyModelParams:
    intensity_kwh_per_gb: float = 0.81
    segment_shares: Mapping[str, float] = field(default_factory=_default_shares)
    cpu_joules_per_dom_op: float = 0.5
    carbon_g_per_kwh: float = 475.0

    def __post_init__(self) -> None:
        if self.intensity_kwh_per_gb <= 0:
            raise ValueError("intensity_kwh_per_gb must be > 0")
        if self.cpu_joules_per_dom_op <= 0:
            raise ValueError("cpu_joules_per_dom_op must be > 0")
        if self.carbon_g_per_kwh <= 0:
            raise ValueError("carbon_g_per_kwh must be > 0")
        total = sum(self.segment_shares.values())
        if any(v <= 0 for v in self.segment_shares.values()) or total > 1.0 + 1e-9:
            raise ValueError("segment shares must be positive and sum to <= 1")


@dataclass(frozen=True)
class EnergyEstimate:
    transfer_joules: float
    cpu_joules: float
    total_joules: float
    per_segment_joules: dict[str, float]
    input_bytes: int
    input_dom_ops: int


@dataclass(frozen=True)
class SavingsReport:
    before: EnergyEstimate
    after: EnergyEstimate
    delta_joules: float
    delta_percent: float


@dataclass(frozen=True)
class BreakevenReport:
    overhead_kwh: float
    reduction_rate: float
    per_view_wh: float
    breakeven_frontend_kwh: float
    breakeven_views: float


def estimate_energy(weight: "WeightReport", params: EnergyModelParams) -> EnergyEstimate:
    return estimate_from_counts(weight.total_bytes, weight.dom_ops, params)


def estimate_from_counts(
    total_bytes: int, dom_ops: int, params: EnergyModelParams
) -> EnergyEstimate:
    transfer = (total_bytes / BYTES_PER_GB) * params.intensity_kwh_per_gb * JOULES_PER_KWH
    per_segment = {
        name: transfer * share for name, share in params.segment_shares.items()
    }
    remainder = 1.0 - sum(params.segment_shares.values())
    if remainder > 1e-12:
        per_segment["other"] = transfer * remainder
    cpu = dom_ops * params.cpu_joules_per_dom_op
    return EnergyEstimate(
        transfer_joules=transfer,
        cpu_joules=cpu,
        total_joules=transfer + cpu,
        per_segment_joules=per_segment,
        input_bytes=total_bytes,
        input_dom_ops=dom_ops,
    )


def compute_savings(before: EnergyEstimate, after: EnergyEstimate) -> SavingsReport:
    """Absolute and relative reduction. Percent is stored at full precision;
    round only when presenting."""
    if before.total_joules <= 0:
        raise ValueError("savings percentage undefined for zero baseline energy")
    delta = before.total_joules - after.total_joules
    return SavingsReport(
        before=before,
        after=after,
        delta_joules=delta,
        delta_percent=100.0 * delta / before.total_joules,
    )


def estimate_carbon(estimate: EnergyEstimate, params: EnergyModelParams) -> float:
    """Grams CO2e for one delivery of the page."""
    return (estimate.total_joules / JOULES_PER_KWH) * params.carbon_g_per_kwh


def breakeven(
    overhead_kwh: float, reduction_rate: float, per_view_wh: float
) -> BreakevenReport:
    """Frontend energy volume at which tooling overhead is repaid.

    ``per_view_wh`` is Wh per 1,000 page views; ``breakeven_views`` is the
    number of page views corresponding to the breakeven energy volume.
    """
    if not 0 < reduction_rate <= 1:
        raise ValueError("reduction_rate must be in (0, 1]")
    if per_view_wh <= 0:
        raise ValueError("per_view_wh must be > 0")
    if overhead_kwh < 0:
        raise ValueError("overhead_kwh must be >= 0")
    frontend_kwh = overhead_kwh / reduction_rate
    views = 1000.0 * frontend_kwh * 1000.0 / per_view_wh
    return BreakevenReport(
        overhead_kwh=overhead_kwh,
        reduction_rate=reduction_rate,
        per_view_wh=per_view_wh,
        breakeven_frontend_kwh=frontend_kwh,
        breakeven_views=views,
    )
