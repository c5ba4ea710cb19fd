"""Regret-optimal measurement-feedback control.

Synthesis of the infinite-horizon regret-optimal controller through
spectral factorizations, a Nehari problem and bisection on the regret
level, together with H2/H-infinity baselines, frequency-domain metrics
and a finite-horizon Toeplitz oracle.
"""
from .controller import ControllerRealization, feedback_to_youla, youla_to_feedback
from .errors import (
    AssumptionError,
    BudgetError,
    DimensionError,
    InfeasibleError,
    NumericalError,
    RegretCtlError,
)
from .evaluation import (
    frobenius_norm_sq,
    noncausal_q2_at,
    norm_report,
    operator_norm_sq,
    regret_norm,
    simulate,
)
from .io import load_plant, load_shipped
from .oracle import finite_horizon_regret
from .synthesis import (
    optimal_gamma,
    synthesize_h2,
    synthesize_hinf,
    synthesize_ro_causal,
    synthesize_ro_strictly_causal,
)
from .sysmodel import CostWeights, StateSpacePlant, absorb_weights, validate_assumptions

__version__ = "0.1.0"
