"""Gain-loss coupled-cavity metrology simulator.

Supermode analysis, steady-state output spectra with mechanical sidebands,
a time-domain oracle for cross-validation, closed-form displacement and
force spectral densities, and deterministic sweep/CSV pipelines.
"""

from .config import RunConfig, default_config, parse_config
from .dynamics import (
    CrossValidationReport,
    OracleConfig,
    Trajectory,
    cross_validate,
    export_trajectory,
    integrate,
    line_powers,
    period_energy_drift,
    suggested_dt,
    suggested_t_end,
)
from .errors import (
    BalancedGainError,
    ConfigError,
    DegenerateReferenceError,
    DivergenceError,
    InstabilityError,
    InvalidParameterError,
    PoorFitError,
    PTCavityError,
    ResolutionError,
    TransitionSingularityError,
)
from .model import (
    CoupledModeSystem,
    Phase,
    SupermodeDecomposition,
    decompose,
    effective_coupling,
    ep_threshold,
    pt_ep_amplification_ratio,
)
from .sensitivity import (
    BracketMode,
    HBAR,
    OMEGA0_1550NM,
    SensitivityCurve,
    SensitivityParams,
    displacement_psd,
    force_psd,
    heisenberg_product,
    sensitivity_ratio_sweep,
    single_cavity_displacement_psd,
)
from .spectrum import (
    MechanicalMode,
    Normalization,
    Peak,
    SidebandLadder,
    SpectrumResult,
    amplification_factor,
    background_spectrum,
    composite_spectrum,
    default_background_grid,
    default_transducer_grid,
    peak_analysis,
    sideband_ladder,
    single_cavity_reference,
)
from .sweeps import CSV_HEADERS, FIGURE_IDS, reproduce, run_validation, validation_matrix

__version__ = "0.1.0"

__all__ = [
    "BalancedGainError",
    "BracketMode",
    "ConfigError",
    "CoupledModeSystem",
    "CrossValidationReport",
    "CSV_HEADERS",
    "DegenerateReferenceError",
    "DivergenceError",
    "FIGURE_IDS",
    "HBAR",
    "InstabilityError",
    "InvalidParameterError",
    "MechanicalMode",
    "Normalization",
    "OMEGA0_1550NM",
    "OracleConfig",
    "PTCavityError",
    "Peak",
    "Phase",
    "PoorFitError",
    "ResolutionError",
    "RunConfig",
    "SensitivityCurve",
    "SensitivityParams",
    "SidebandLadder",
    "SpectrumResult",
    "SupermodeDecomposition",
    "Trajectory",
    "TransitionSingularityError",
    "amplification_factor",
    "background_spectrum",
    "composite_spectrum",
    "cross_validate",
    "decompose",
    "default_background_grid",
    "default_config",
    "default_transducer_grid",
    "displacement_psd",
    "effective_coupling",
    "ep_threshold",
    "export_trajectory",
    "force_psd",
    "heisenberg_product",
    "integrate",
    "line_powers",
    "parse_config",
    "peak_analysis",
    "period_energy_drift",
    "pt_ep_amplification_ratio",
    "reproduce",
    "run_validation",
    "sensitivity_ratio_sweep",
    "sideband_ladder",
    "single_cavity_displacement_psd",
    "single_cavity_reference",
    "suggested_dt",
    "suggested_t_end",
    "validation_matrix",
]
