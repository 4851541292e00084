"""Exception hierarchy shared by all modules."""


class ProbeError(Exception):
    """Base class for every error raised by the toolkit."""


class ParseError(ProbeError):

    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class EvalError(ProbeError):
    """Unbound variable, sort mismatch, division by zero and the like."""


class DistributionError(ProbeError):
    """A density that does not describe a probability distribution."""


class NormalizationError(DistributionError):
    pass


class SemanticError(ProbeError):
    """The process cannot be given a finite transition-system semantics."""


class LimitExceeded(ProbeError):
    """An internal size bound was hit (product support, unfolding depth)."""


class SimulationError(ProbeError):
    pass
