"""Player strategies: greedy, deadline-driven, and the hybrid of the two."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .engine import (
    ADVERSARY_DIRECTED,
    LOWEST_INDEX,
    CupState,
    Observation,
)

TWO = Fraction(2)

# Where a rate estimate comes from.
DECLARED_FIXED = "declared-fixed"
LAST_FILL = "last-fill"


@dataclass(frozen=True)
class RateEstimate:
    rates: tuple[Fraction, ...]
    source: str = DECLARED_FIXED

    def __post_init__(self):
        if any(r < 0 for r in self.rates):
            raise ValueError("rates must be non-negative")


def greedy_select(
    heights: Sequence[Fraction],
    estimates: Optional[Sequence[Fraction]] = None,
    tiebreak: str = LOWEST_INDEX,
    directed: Optional[int] = None,
) -> int:
    """Index of the cup with the largest decision value.

    The decision vector is ``estimates`` when given, else the true heights.
    Ties go to the lowest index, except that an adversary-directed cup wins
    any tie it participates in.
    """
    values = estimates if estimates is not None else heights
    best = max(values)
    if tiebreak == ADVERSARY_DIRECTED and directed is not None and values[directed] == best:
        return directed
    for i, v in enumerate(values):
        if v == best:
            return i
    raise AssertionError("unreachable")


def deadline_select(
    heights: Sequence[Fraction], rates: RateEstimate
) -> Optional[int]:
    """Among cups of height >= 1, the one that would soonest reach height 2.

    A cup already at height >= 2 has deadline 0; a zero-rate cup below 2
    never reaches it (infinite deadline).  Ties go to the lowest index.
    Returns None (idle) when no cup has height >= 1.
    """
    best_i = None
    best_d: Optional[Fraction] = None
    for i, h in enumerate(heights):
        if h < 1:
            continue
        r = rates.rates[i]
        if h >= 2:
            d: Optional[Fraction] = Fraction(0)
        elif r == 0:
            d = None
        else:
            d = (TWO - h) / r
        if best_i is None:
            best_i, best_d = i, d
        elif d is not None and (best_d is None or d < best_d):
            best_i, best_d = i, d
    return best_i


def hybrid_select(heights: Sequence[Fraction], rates: RateEstimate) -> int:
    """Deadline-driven while the max height is below 2, greedy otherwise.

    A deadline no-op (no cup at height >= 1) falls back to greedy so the
    player never wastes a turn.
    """
    if max(heights) < 2:
        choice = deadline_select(heights, rates)
        if choice is not None:
            return choice
    return greedy_select(heights)


# ---------------------------------------------------------------------------
# Player objects for run_game
# ---------------------------------------------------------------------------

class GreedyPlayer:
    """Removes from the cup with the largest (estimated) height."""

    def __init__(self, tiebreak: str = LOWEST_INDEX):
        self.tiebreak = tiebreak

    def choose(self, state: CupState, observation: Optional[Observation]) -> int:
        if observation is None:
            return greedy_select(state.heights, tiebreak=self.tiebreak)
        return greedy_select(
            state.heights,
            estimates=observation.estimates,
            tiebreak=self.tiebreak,
            directed=observation.directed,
        )


class DeadlineDrivenPlayer:
    """Pure deadline-driven play against declared fixed rates; idles when
    no cup has reached height 1."""

    def __init__(self, rates: RateEstimate):
        self.rates = rates

    def choose(self, state: CupState, observation: Optional[Observation]) -> Optional[int]:
        return deadline_select(state.heights, self.rates)


class HybridPlayer:
    """Deadline-driven below max height 2, greedy at or above it.

    In fixed-rate games the declared rates are used.  In variable-rate
    games the strategy treats the most recent fill vector as the rates;
    it reconstructs that fill by remembering the previous post-removal
    heights (it knows its own removals, so the reconstruction is exact,
    given the removal model it is playing under).
    """

    def __init__(self, rates: Optional[RateEstimate] = None, removal: str = "unit"):
        self.declared = rates
        self.removal = removal
        self._prev: Optional[list[Fraction]] = None

    def choose(self, state: CupState, observation: Optional[Observation]) -> int:
        if self.declared is not None:
            rates = self.declared
        else:
            prev = self._prev if self._prev is not None else [Fraction(0)] * state.n
            rates = RateEstimate(
                rates=tuple(g - p for g, p in zip(state.heights, prev)),
                source=LAST_FILL,
            )
        choice = hybrid_select(state.heights, rates)
        post = list(state.heights)
        if self.removal == "flush":
            post[choice] = Fraction(0)
        else:
            post[choice] = post[choice] - min(Fraction(1), post[choice])
        self._prev = post
        return choice


def make_player(name: str, spec, rates: Optional[RateEstimate] = None):
    """Build a player by config name: "greedy", "deadline", or "hybrid"."""
    if name == "greedy":
        return GreedyPlayer(tiebreak=spec.tiebreak)
    if rates is None and spec.rates is not None:
        rates = RateEstimate(rates=spec.rates, source=DECLARED_FIXED)
    if name == "deadline":
        if rates is None:
            raise ValueError("deadline player needs declared rates")
        return DeadlineDrivenPlayer(rates)
    if name == "hybrid":
        return HybridPlayer(rates, removal=spec.removal)
    raise ValueError(f"unknown player {name!r}")
