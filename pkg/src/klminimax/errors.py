"""Exception hierarchy shared by all modules."""


class KLMinimaxError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameter(KLMinimaxError, ValueError):
    pass


class NonConvergence(KLMinimaxError, ArithmeticError):
    """Adaptive quadrature exhausted its subdivision budget."""


class TruncationFailure(KLMinimaxError, ArithmeticError):
    """No finite interval captures the requested share of the envelope mass."""


class NoSignChange(KLMinimaxError, ValueError):
    """Root bracket endpoints do not straddle zero."""


class SupportMismatch(KLMinimaxError, ValueError):
    """A density is positive where the reference density vanishes."""


class InfeasibleTolerance(KLMinimaxError, ValueError):
    """The KL tolerance is too large for the two neighborhoods to be disjoint."""


class UnvalidatedPair(KLMinimaxError, ValueError):
    """The nominal pair failed the symmetry or monotone likelihood-ratio check."""


class DegenerateRule(KLMinimaxError, ValueError):
    pass


class TabulationFailure(KLMinimaxError, ArithmeticError):
    pass
