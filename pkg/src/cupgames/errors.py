"""Exceptions raised by the game engine, adversaries, and checkers."""


class CupGameError(Exception):
    """Base class for all library-specific errors."""


class FillSumMismatch(CupGameError):
    """An injection vector does not sum to exactly 1."""


class NegativeFill(CupGameError):
    """An injection vector contains a negative entry."""


class IndexOutOfRange(CupGameError, IndexError):
    """A cup index is outside [0, n)."""


class PhaseError(CupGameError):
    """An operation was applied to a state in the wrong phase."""


class EstimateViolation(CupGameError):
    """An estimate vector breaks the sandwich bound for the info model."""


class EligibilityViolation(CupGameError):
    """A directed greedy choice fell outside the eligible set.

    During a lower-bound run this indicates a bug in the adversary
    construction, not a legal game situation.
    """


class InfeasibleSplit(CupGameError):
    """An equalizing water split would require a negative amount."""


class CohortExhausted(CupGameError):
    """A flushing cohort shrank to zero before reaching its target height."""


class RateSumExceedsOne(CupGameError):
    """A fixed-rate vector sums to more than 1."""


class TraceParseError(CupGameError):
    """A trace or instance file could not be parsed."""


class ReplayMismatch(CupGameError):
    """A recorded result does not match its fresh replay."""


class QuadratureNonConvergence(CupGameError):
    """Numerical integration failed to reach the requested tolerance."""


class UnknownBound(CupGameError, KeyError):
    """An unrecognized bound name was requested."""
