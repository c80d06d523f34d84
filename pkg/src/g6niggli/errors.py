"""Exception hierarchy shared by all g6niggli modules."""


class G6Error(ValueError):
    """Base class for domain errors (mapped to exit code 1 by the CLI)."""


class InvalidCellError(G6Error):
    pass


class NotReducedError(G6Error):
    def __init__(self, failed, message=None):
        self.failed = list(failed)
        super().__init__(message or "not Niggli reduced; failed: " + ", ".join(self.failed))


class NonConvergenceError(G6Error):
    def __init__(self, message, last_steps=()):
        self.last_steps = list(last_steps)
        super().__init__(message)


class UnknownCaseError(G6Error, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class NoCandidateError(G6Error):
    pass


class InsufficientSamplesError(G6Error):
    pass


class RankAmbiguityError(G6Error):
    pass


class ProbeError(G6Error):
    """Monte Carlo configuration or starvation failure."""


class DegenerateVarianceError(G6Error):
    pass
