"""Exception types shared across the package.

All of these derive from ``SqueezedComError`` so callers (notably the CLI)
can distinguish model-level refusals from programming errors.
"""


class SqueezedComError(Exception):
    """Base class for model-level errors."""


class ParametricThreshold(SqueezedComError):
    """The OPA gain sits at the parametric oscillation threshold.

    The linear steady state diverges there (sigma_plus ~ 0), so every
    amplitude-dependent quantity downstream is meaningless.
    """


class SingularResponse(SqueezedComError):
    """The linearized frequency response is singular at the requested
    frequency, i.e. a resonance of the drift matrix sits on (or numerically
    on) the real-frequency axis.  Typically signals operation beyond an
    instability."""


class ZeroSignalGain(SqueezedComError):
    """The measured homodyne quadrature carries no force signal (the
    signal transfer coefficient vanishes), so the force estimator is
    undefined."""


class NoConvergence(SqueezedComError):
    """A fixed-point iteration failed to converge."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class NoStablePoint(SqueezedComError):
    """A stability-constrained search found no dynamically stable point."""
