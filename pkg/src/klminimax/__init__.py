"""Minimax robust binary hypothesis testing with KL-divergence neighborhoods."""

from ._kernels import BACKEND
from .errors import (
    DegenerateRule,
    InfeasibleTolerance,
    InvalidParameter,
    KLMinimaxError,
    NoSignChange,
    NonConvergence,
    SupportMismatch,
    TabulationFailure,
    TruncationFailure,
    UnvalidatedPair,
)
from .numerics import (
    DEFAULT_TOLERANCES,
    Interval,
    Tolerances,
    find_root,
    gaussian_tail_q,
    integrate,
    integrate_real_line,
)

__version__ = "0.1.0"
