"""qwsense: split-step quantum walk defect sensing at desk scale.

Simulates a 1D split-step quantum walk whose second coin layer carries a
localized defect angle, computes the topological phase structure of the
clean walk, the Fisher information carried by the defect-site measurement
(classical, global, and quantum), and Bayesian estimation of the defect
angle, with static and dynamic coin disorder ensembles.
"""

__version__ = "0.1.0"

from .bayes import (
    EstimationConfig,
    EstimationCurve,
    EstimationRecord,
    PosteriorGrid,
    estimation_curve,
    informative_schedule,
    msre,
    posterior,
    simulate_trials,
)
from .disorder import DisorderSpec, EnsembleResult, ensemble_fisher, ensemble_msre, sample_disorder
from .kernels import BACKEND, NUMBA_ENABLED
from .metrology import (
    FisherSeries,
    ScalingFit,
    averaged_fisher,
    fisher_at_defect,
    fit_scaling,
    global_fisher,
    quantum_fisher,
)
from .spectral import (
    LocalizedState,
    SpectralDecomposition,
    decompose_step_operator,
    find_localized_states,
)
from .topology import BlochDecomposition, PhasePoint, bloch_components, phase_diagram, winding_number
from .walk import (
    CoinField,
    DerivativePair,
    WalkerState,
    WalkParams,
    apply_step,
    apply_step_with_derivative,
    coin_matrix,
    coin_matrix_derivative,
    default_initial_state,
    evolve,
    position_probability,
)

__all__ = [
    "BACKEND",
    "NUMBA_ENABLED",
    "BlochDecomposition",
    "CoinField",
    "DerivativePair",
    "DisorderSpec",
    "EnsembleResult",
    "EstimationConfig",
    "EstimationCurve",
    "EstimationRecord",
    "FisherSeries",
    "LocalizedState",
    "PhasePoint",
    "PosteriorGrid",
    "ScalingFit",
    "SpectralDecomposition",
    "WalkParams",
    "WalkerState",
    "apply_step",
    "apply_step_with_derivative",
    "averaged_fisher",
    "bloch_components",
    "coin_matrix",
    "coin_matrix_derivative",
    "decompose_step_operator",
    "default_initial_state",
    "ensemble_fisher",
    "ensemble_msre",
    "estimation_curve",
    "evolve",
    "find_localized_states",
    "fisher_at_defect",
    "fit_scaling",
    "global_fisher",
    "informative_schedule",
    "msre",
    "phase_diagram",
    "position_probability",
    "posterior",
    "quantum_fisher",
    "sample_disorder",
    "simulate_trials",
    "winding_number",
]
