"""Exact Gaussian dynamics of a damped cavity under repeated interaction with a chain of modes."""
from .errors import (
    CavityChainError, ConditionViolation, IndexOutOfRange, BadKind, LengthMismatch,
    SizeError, NonConvergent, BudgetExceeded, StepTooLarge, ConfigError,
)
from .model import (
    ModelParams, PropagatorBlocks, ThermoSummary, validate_params, propagator_blocks,
    thermo_summary, coth_half, beta_from_coth,
)
from .propagator import (
    build_Y, build_U_exact, build_U_closed, propagate, propagation_matrix,
    component_formula_e, component_formula_pair,
)
from .states import (
    ModeState, CovarianceMatrix, split_time, weyl_dual_step, weyl_dual_multi, char_fn_product,
    cavity_char_fn, cavity_vector, cavity_occupation, d_functional, steady_state, steady_state_char_fn, gaussian_covariance,
    covariance, pair_covariance, asymptotic_periodicity_gap,
)

__version__ = "0.1.0"
