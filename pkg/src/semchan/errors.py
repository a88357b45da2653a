"""Exception hierarchy for semchan.

Every error raised by the library derives from :class:`SemchanError`, so
callers can catch one type at the boundary. Algorithm errors that abort an
iteration carry the partial state needed for diagnosis.
"""

from __future__ import annotations


class SemchanError(Exception):
    """Base class for all semchan errors."""


# --- probability core ---------------------------------------------------


class ZeroMarginal(SemchanError):
    """A label has zero marginal probability under the given prior."""


class AbsoluteContinuityViolation(SemchanError):
    """KL divergence undefined: p puts mass where q has none."""


class DegenerateWidth(SemchanError):
    """A Gaussian width parameter is zero or negative."""


# --- truth functions -----------------------------------------------------


class ZeroLogicalProbability(SemchanError):
    """A truth function has logical probability zero under the prior."""


class UndefinedRatio(SemchanError):
    """A posterior/prior or channel ratio has a zero denominator."""


class InvalidBelief(SemchanError):
    """A belief degree is outside [-1, 1] (disbelief outside [0, 1])."""


# --- matching ------------------------------------------------------------


class DeadLabel(SemchanError):
    """A channel column is identically zero; no truth function exists."""


class EmptyFamily(SemchanError):
    """A parametric truth-function search space has no candidates."""


class EmptySample(SemchanError):
    """A labeled sample has zero total count for the requested label."""


class NonContiguousAssignment(SemchanError):
    """The per-point argmax labeling is not interval-shaped.

    Carries ``label_map``, the raw per-point label assignment, so callers
    can fall back to it when no dividing-point representation exists.
    """

    def __init__(self, message: str, label_map=None):
        super().__init__(message)
        self.label_map = label_map


class NoConvergence(SemchanError):
    """An outer fixed-point loop exhausted its iteration budget.

    Carries the trace accumulated so far under ``trace``.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


# --- mixture -------------------------------------------------------------


class InnerNoConvergence(SemchanError):
    """The component-weight inner loop hit its iteration cap.

    Carries the last iterate (``weights``) and the iteration count.
    """

    def __init__(self, message: str, weights=None, iterations: int = 0):
        super().__init__(message)
        self.weights = weights
        self.iterations = iterations


class DegenerateComponent(SemchanError):
    """A mixture component collapsed (no responsibility mass or tiny width)."""


class ZeroMixtureDensity(SemchanError):
    """The predicted mixture is zero at a grid point, so responsibilities
    are undefined there."""


# --- confirmation --------------------------------------------------------


class EmptyCounts(SemchanError):
    """Positive and counterexample counts are both zero."""


# --- scenario runner -----------------------------------------------------


class ConfigError(SemchanError):
    """A scenario config is malformed; the message names the field."""


class ScenarioError(SemchanError):
    """A scenario run failed; wraps the underlying library error."""
