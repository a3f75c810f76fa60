"""Randomized adversaries and batched fuzz harnesses.

Two implementations of the same games live here on purpose:

* ``RandomEligibleAdversary`` plugs into the generic Fraction engine and
  produces full traces (slow, exact, one game at a time);
* the ``fuzz_*`` batch runners drive hundreds of games at once on int64
  height *numerators* over one fixed denominator -- still exact, since
  every fill lives on that grid -- at numpy speed.

The batch runners can record their fills and directed choices so a game
can be replayed through the generic engine; tests pin the two paths to
each other.  The batch lemma checkers evaluate the same disjunctions as
``analysis.check_lemma1`` / ``check_lemma3`` after clearing denominators,
and are likewise agreement-tested against them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .engine import (
    ADDITIVE,
    EXACT,
    FLUSH,
    MULTIPLICATIVE,
    UNIT_REMOVAL,
    CupState,
    GameSpec,
    Observation,
)

DEFAULT_DENOM = 1024


# ---------------------------------------------------------------------------
# Generic random adversary (Fraction engine)
# ---------------------------------------------------------------------------

class RandomEligibleAdversary:
    """Random fills on a denominator grid; directs greedy uniformly within
    the eligible set of the game's info model.

    Estimates give the directed cup its maximal legal value (c*g or g+c)
    and every other cup its true height, so the sandwich bound holds by
    construction.
    """

    def __init__(self, spec: GameSpec, seed: int, denom: int = DEFAULT_DENOM):
        self.spec = spec
        self.rng = np.random.default_rng(seed)
        self.denom = denom
        self._directed: Optional[int] = None

    def fill(self, state: CupState) -> tuple[Fraction, ...]:
        n = self.spec.n
        parts = random_fill_numerators(self.rng, n, self.denom)
        return tuple(Fraction(int(p), self.denom) for p in parts)

    def observe(self, state: CupState) -> Optional[Observation]:
        spec = self.spec
        if spec.info == EXACT:
            return None
        gmax = state.max_height()
        if spec.info == MULTIPLICATIVE:
            eligible = [i for i, g in enumerate(state.heights) if g * spec.c >= gmax]
        else:
            eligible = [i for i, g in enumerate(state.heights) if g >= gmax - spec.c]
        d = int(eligible[self.rng.integers(0, len(eligible))])
        estimates = list(state.heights)
        if spec.info == MULTIPLICATIVE:
            estimates[d] = spec.c * estimates[d]
        else:
            estimates[d] = estimates[d] + spec.c
        return Observation(estimates=tuple(estimates), directed=d)


class ReplayFillsAdversary:
    """Replays a recorded (fills, directed) schedule from a batch fuzz run
    through the generic engine, reconstructing the same witness estimates."""

    def __init__(self, spec: GameSpec, fills: np.ndarray, directed: np.ndarray, denom: int):
        self.spec = spec
        self.fills = fills
        self.directed = directed
        self.denom = denom
        self._t = 0

    def fill(self, state: CupState) -> Optional[tuple[Fraction, ...]]:
        if self._t >= len(self.fills):
            return None
        return tuple(Fraction(int(p), self.denom) for p in self.fills[self._t])

    def observe(self, state: CupState) -> Optional[Observation]:
        t = self._t
        self._t += 1
        if self.spec.info == EXACT:
            return None
        d = int(self.directed[t])
        estimates = list(state.heights)
        if self.spec.info == MULTIPLICATIVE:
            estimates[d] = self.spec.c * estimates[d]
        else:
            estimates[d] = estimates[d] + self.spec.c
        return Observation(estimates=tuple(estimates), directed=d)


# ---------------------------------------------------------------------------
# Fill generation (shared by generic and batch paths)
# ---------------------------------------------------------------------------

def random_fill_numerators(rng: np.random.Generator, n: int, denom: int) -> np.ndarray:
    """One random fill: int64 numerators summing to ``denom``.

    Mixes a few adversarially-flavored shapes: everything on one cup, a
    split over a few random cups, or a spread over all cups.
    """
    roll = rng.random()
    if roll < 0.3:
        out = np.zeros(n, dtype=np.int64)
        out[rng.integers(0, n)] = denom
        return out
    if roll < 0.75:
        k = int(rng.integers(2, min(n, 4) + 1))
        idx = rng.integers(0, n, size=k)
        parts = _compositions(rng, 1, k, denom)[0]
        out = np.zeros(n, dtype=np.int64)
        np.add.at(out, idx, parts)
        return out
    return _compositions(rng, 1, n, denom)[0]


def _compositions(rng: np.random.Generator, rows: int, k: int, denom: int) -> np.ndarray:
    """``rows`` random compositions of ``denom`` into k non-negative parts."""
    if k == 1:
        return np.full((rows, 1), denom, dtype=np.int64)
    cuts = rng.integers(0, denom + 1, size=(rows, k - 1))
    cuts.sort(axis=1)
    bounds = np.concatenate(
        [np.zeros((rows, 1), dtype=np.int64), cuts, np.full((rows, 1), denom, dtype=np.int64)],
        axis=1,
    )
    return np.diff(bounds, axis=1).astype(np.int64)


def _batch_fills(
    rng: np.random.Generator, games: int, n: int, denom: int, h: np.ndarray
) -> np.ndarray:
    """Random fills for all games in one step (each row sums to denom)."""
    roll = rng.random()
    if roll < 0.25 and n > 1:
        # Equal split over the current top-j cups: the classic way to pump
        # prefix averages.
        j = int(rng.integers(1, n + 1))
        top = np.argpartition(h, n - j, axis=1)[:, n - j:]
        out = np.zeros_like(h)
        base, extra = divmod(denom, j)
        np.put_along_axis(out, top, base, axis=1)
        tallest = np.take_along_axis(h, top, axis=1).argmax(axis=1)
        rows = np.arange(games)
        out[rows, top[rows, tallest]] += extra
        return out
    if roll < 0.55:
        out = np.zeros_like(h)
        idx = rng.integers(0, n, size=games)
        out[np.arange(games), idx] = denom
        return out
    k = int(rng.integers(2, min(n, 4) + 1))
    idx = rng.integers(0, n, size=(games, k))
    parts = _compositions(rng, games, k, denom)
    out = np.zeros_like(h)
    np.add.at(out, (np.arange(games)[:, None], idx), parts)
    return out


# ---------------------------------------------------------------------------
# Batch runners
# ---------------------------------------------------------------------------

@dataclass
class BatchFuzzResult:
    """Outcome of a batch of fuzz games over one denominator grid."""

    n: int
    steps: int
    games: int
    denom: int
    info: str
    c: Optional[Fraction]
    removal: str
    peaks: np.ndarray  # (games,) int64 peak intermediate-max numerators
    fills: Optional[np.ndarray] = None       # (games, steps, n)
    directed: Optional[np.ndarray] = None    # (games, steps)
    ghist: Optional[np.ndarray] = None       # (games, steps, n)

    def peak_fraction(self, game: int) -> Fraction:
        return Fraction(int(self.peaks[game]), self.denom)

    def peaks_below(self, bound: Fraction) -> bool:
        """Exact check that every game's peak is at most ``bound``."""
        bound = Fraction(bound)
        lhs = int(self.peaks.max()) * bound.denominator
        return lhs <= bound.numerator * self.denom

    def game_spec(self) -> GameSpec:
        return GameSpec(
            n=self.n, removal=self.removal, info=self.info, c=self.c,
            tiebreak="adversary-directed" if self.info != EXACT else "lowest-index",
        )


def fuzz_batch(
    n: int,
    steps: int,
    games: int,
    seed: int,
    info: str = EXACT,
    c: Optional[Fraction] = None,
    removal: str = UNIT_REMOVAL,
    denom: int = DEFAULT_DENOM,
    record: bool = False,
) -> BatchFuzzResult:
    """Run ``games`` independent fuzz games for ``steps`` steps.

    Exact-info games play true greedy (argmax, lowest index); estimate
    games direct greedy to a uniformly random cup of the eligible set.
    Heights are int64 numerators over ``denom``; every operation is
    integer-exact.
    """
    if info not in (EXACT, MULTIPLICATIVE, ADDITIVE):
        raise ValueError(f"unknown info model {info!r}")
    if info != EXACT:
        c = Fraction(c)
    rng = np.random.default_rng(seed)
    h = np.zeros((games, n), dtype=np.int64)
    peaks = np.zeros(games, dtype=np.int64)
    rows = np.arange(games)
    fills_rec = np.empty((games, steps, n), dtype=np.int64) if record else None
    dir_rec = np.empty((games, steps), dtype=np.int64) if record else None
    ghist = np.empty((games, steps, n), dtype=np.int64) if record else None
    if info != EXACT:
        p, q = c.numerator, c.denominator

    for t in range(steps):
        fills = _batch_fills(rng, games, n, denom, h)
        h += fills
        gmax = h.max(axis=1)
        np.maximum(peaks, gmax, out=peaks)
        if info == EXACT:
            chosen = h.argmax(axis=1)
        else:
            if info == MULTIPLICATIVE:
                eligible = h * p >= gmax[:, None] * q
            else:
                eligible = h * q >= gmax[:, None] * q - p * denom
            noise = rng.random((games, n))
            noise[~eligible] = -1.0
            chosen = noise.argmax(axis=1)
        if record:
            fills_rec[:, t, :] = fills
            dir_rec[:, t] = chosen
            ghist[:, t, :] = h
        if removal == FLUSH:
            h[rows, chosen] = 0
        else:
            picked = h[rows, chosen]
            h[rows, chosen] = np.maximum(picked - denom, 0)

    return BatchFuzzResult(
        n=n, steps=steps, games=games, denom=denom, info=info, c=c,
        removal=removal, peaks=peaks, fills=fills_rec, directed=dir_rec,
        ghist=ghist,
    )


# ---------------------------------------------------------------------------
# Batched lemma checkers (same disjunctions as analysis.check_lemma1/3,
# with denominators cleared)
# ---------------------------------------------------------------------------

def _prefix_sums_desc(ghist: np.ndarray) -> np.ndarray:
    """Cumulative sums of each step's heights sorted descending."""
    return np.cumsum(-np.sort(-ghist, axis=-1), axis=-1)


def check_lemma1_batch(ghist: np.ndarray, denom: int, c: Fraction) -> tuple[int, int]:
    """(violations, checks) of the multiplicative disjunction over a batch.

    ``ghist`` has shape (games, steps, n) of intermediate-height
    numerators.  Scope: steps whose predecessor has intermediate max >= c.
    """
    c = Fraction(c)
    p, q = c.numerator, c.denominator
    S = _prefix_sums_desc(ghist)
    games, steps, n = ghist.shape
    m = np.arange(1, n)  # shape (n-1,)
    prev, cur = S[:, :-1, :], S[:, 1:, :]
    scope = prev[:, :, 0] * q >= p * denom  # gmax(t-1) >= c
    # Disjunct 1: same-m prefix sums do not grow.
    d1 = cur[:, :, :-1] <= prev[:, :, :-1]
    # Disjunct 2 with denominators cleared:
    # (S_t(m)(p-q) + mpD)(m+1)p <= (S_{t-1}(m+1)(p-q) + (m+1)pD)(pm+p-q)
    lhs = (cur[:, :, :-1] * (p - q) + m * p * denom) * ((m + 1) * p)
    rhs = (prev[:, :, 1:] * (p - q) + (m + 1) * p * denom) * (p * m + p - q)
    d2 = lhs <= rhs
    holds = d1 | d2
    checked = int(scope.sum()) * (n - 1)
    violations = int((~holds & scope[:, :, None]).sum())
    return violations, checked


def check_lemma3_batch(ghist: np.ndarray, denom: int, c: Fraction) -> tuple[int, int]:
    """(violations, checks) of the additive disjunction over a batch.

    Scope: steps whose predecessor has intermediate max >= c + 1.
    """
    c = Fraction(c)
    p, q = c.numerator, c.denominator
    S = _prefix_sums_desc(ghist)
    games, steps, n = ghist.shape
    m = np.arange(1, n)
    prev, cur = S[:, :-1, :], S[:, 1:, :]
    scope = prev[:, :, 0] * q >= (p + q) * denom  # gmax(t-1) >= c+1
    d1 = cur[:, :, :-1] <= prev[:, :, :-1]
    # S_t(m)(m+1)q <= S_{t-1}(m+1) m q + (p+q) D (m+1)
    lhs = cur[:, :, :-1] * ((m + 1) * q)
    rhs = prev[:, :, 1:] * (m * q) + (p + q) * denom * (m + 1)
    d2 = lhs <= rhs
    holds = d1 | d2
    checked = int(scope.sum()) * (n - 1)
    violations = int((~holds & scope[:, :, None]).sum())
    return violations, checked
