"""Scattering laboratory for two-level avoided-crossing systems.

The library computes the transition probability P(eps, h) of the
time-dependent two-level system ih psi' = [[V(t), eps], [eps, -V(t)]] psi
three independent ways -- direct integration, closed-form asymptotics in
both parameter regimes, and a transfer-matrix chain -- plus the exact-WKB
machinery the asymptotics are built from.
"""

from .asymptotics import (
    AsymptoticPrediction,
    BohrSommerfeldRoots,
    bohr_sommerfeld_roots,
    landau_zener_exact,
    predict_adiabatic,
    predict_nonadiabatic,
    prefactor_Cn,
)
from .config import ExperimentConfig, config_from_mapping, config_hash, load_config
from .errors import (
    BudgetExceededError,
    ConfigError,
    DomainError,
    LzlabError,
    NumericalError,
    RegimeError,
)
from .geometry import CrossingGeometry, alpha_and_K, build_geometry
from .potentials import (
    PRESETS,
    Potential,
    ValidationReport,
    preset,
    rational,
    rational_pair,
    tanh_product,
    tanh_scaled,
    validate_assumptions,
)
from .propagator import (
    RegimeParams,
    ScatteringResult,
    scattering_matrix,
    transition_probability,
)
from .reports import CSV_HEADER, emit_reports
from .sweep import SweepResult, SweepRow, evaluate_point, run_sweep
from .transfer import (
    RingElement,
    TransferChain,
    assemble_chain,
    branching_constants,
    chain_product,
    ring_product,
    sigma_tau,
    tau_squared,
)
from .wkb import (
    PolylinePath,
    WKBSpec,
    WronskianReport,
    crossing_polyline,
    leading_terms_near_crossing,
    phase_z,
    resum_symbol,
    symbol_K,
    wronskian,
    wronskian_report,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticPrediction",
    "BohrSommerfeldRoots",
    "BudgetExceededError",
    "ConfigError",
    "CrossingGeometry",
    "CSV_HEADER",
    "DomainError",
    "ExperimentConfig",
    "LzlabError",
    "NumericalError",
    "PolylinePath",
    "Potential",
    "PRESETS",
    "RegimeError",
    "RegimeParams",
    "RingElement",
    "ScatteringResult",
    "SweepResult",
    "SweepRow",
    "TransferChain",
    "ValidationReport",
    "WKBSpec",
    "WronskianReport",
    "alpha_and_K",
    "assemble_chain",
    "bohr_sommerfeld_roots",
    "branching_constants",
    "build_geometry",
    "chain_product",
    "config_from_mapping",
    "config_hash",
    "crossing_polyline",
    "emit_reports",
    "evaluate_point",
    "landau_zener_exact",
    "leading_terms_near_crossing",
    "load_config",
    "phase_z",
    "predict_adiabatic",
    "predict_nonadiabatic",
    "prefactor_Cn",
    "preset",
    "rational",
    "rational_pair",
    "resum_symbol",
    "ring_product",
    "run_sweep",
    "scattering_matrix",
    "sigma_tau",
    "symbol_K",
    "tanh_product",
    "tanh_scaled",
    "tau_squared",
    "transition_probability",
    "validate_assumptions",
    "wronskian",
    "wronskian_report",
    "__version__",
]
