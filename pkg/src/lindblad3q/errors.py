"""Exception hierarchy shared by the analytic pipelines, the oracle and the CLI."""


class Lindblad3QError(Exception):
    """Base class for all package errors."""


class SpecError(Lindblad3QError, ValueError):
    """Malformed or physically invalid model specification."""


class NoiseInequalityError(SpecError):
    """The dissipation/noise split violates the positivity bound of a Lindbladian."""


class InstabilityError(Lindblad3QError):
    """An eigenvalue of the dynamical matrix is not strictly damped."""


class DefectiveMatrixError(Lindblad3QError):
    """The dynamical matrix has no numerically usable eigenbasis."""


class U1BreakingError(Lindblad3QError):
    """Operation needs K_eff = Q = 0 but the model has pairing terms."""


class SeriesNonConvergence(Lindblad3QError):
    """A Bessel series did not reach its term tolerance within l_max.

    Attributes
    ----------
    last_term : float
        Largest magnitude among the final terms that were summed.
    l_max : int
        Truncation order that was reached.
    """

    def __init__(self, last_term, l_max):
        self.last_term = float(last_term)
        self.l_max = int(l_max)
        super().__init__(
            f"series not converged at l_max={l_max}: last term magnitude {last_term:.3e}"
        )


class EnvelopeError(Lindblad3QError, ValueError):
    """Argument lies outside a documented numerical envelope."""


class CapacityError(Lindblad3QError, ValueError):
    """A dimension or enumeration cap would be exceeded."""


class HeadroomError(Lindblad3QError):
    """Truncated Fock space has population too close to the cutoff."""
