"""Expected value of perfect information for building-energy decisions."""

from .core import (
    DEFAULT_SAMPLES,
    MAXIMIZE,
    MINIMIZE,
    Action,
    DecisionProblem,
    PriorSolution,
    TabularProblem,
    VoiEstimate,
    convergence_trace,
    solve_exact,
    solve_preposterior_perfect,
    solve_prior,
    solve_voi,
)
from .errors import (
    ConfigError,
    ConstructionError,
    InvalidArgumentError,
    NumericalError,
    VoiError,
)
from .rng import sample_index_rng

__version__ = "0.1.0"
