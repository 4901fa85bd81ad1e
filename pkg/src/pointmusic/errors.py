"""Exception hierarchy shared by the forward and inverse solvers."""


class PointMusicError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PointMusicError, ValueError):
    """Input violates a type invariant (bad shape, non-unit vector, N < M, ...)."""


class DomainError(PointMusicError, ValueError):
    """Input is well-formed but lies outside the domain of the formula."""


class InadmissibleWavenumberError(DomainError):
    """The interaction matrix is singular or numerically close to singular."""

    def __init__(self, rcond=None):
        msg = "wavenumber in or near S_alpha"
        if rcond is not None:
            msg += f" (rcond={rcond:.3e})"
        super().__init__(msg)
        self.rcond = rcond
