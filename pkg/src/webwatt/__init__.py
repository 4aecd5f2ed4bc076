"""webwatt: energy-aware analysis and optimization of static web bundles."""

__version__ = "0.1.0"

from .bundle import (  # noqa: F401
    Asset,
    SiteBundle,
    WeightReport,
    bundle_weight,
    is_benchmark_eligible,
    load_bundle,
    write_bundle,
)
from .energy import (  # noqa: F401
    BreakevenReport,
    EnergyEstimate,
    EnergyModelParams,
    SavingsReport,
    breakeven,
    compute_savings,
    estimate_carbon,
    estimate_energy,
)
from .optimizer import PipelineConfig, TransformationLog, run_pipeline  # noqa: F401
