"""Adversary strategies.

Besides fixed-rate replay and scripted traces, this module implements the
three constructive lower-bound adversaries for semi-oblivious play: the
multiplicative drain-down, the additive drain-down, and the flushing
cohort cascade.  Each one directs greedy by handing out estimates in which
the chosen cup attains the maximum (its estimate is c times, or c more
than, its true height; every other cup shows its true height), so the
sandwich bound holds by construction and the engine re-checks it per step.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .engine import (
    CupState,
    Observation,
    StepRecord,
    Trace,
    load_trace,
)
from .errors import CohortExhausted, InfeasibleSplit, RateSumExceedsOne
from .rationals import floor_div

ZERO = Fraction(0)
ONE = Fraction(1)


class FixedRateAdversary:
    """Pours the same rate vector every step (bamboo / fixed-rate games).

    If the rates sum to less than 1 the residual goes into a trailing
    discard entry, so the emitted fill still sums to exactly 1; pair this
    with ``GameSpec(discard=True)``.
    """

    def __init__(self, rates: Sequence[Fraction]):
        rates = tuple(Fraction(r) for r in rates)
        total = sum(rates)
        if total > 1:
            raise RateSumExceedsOne(f"rates sum to {total}")
        if any(r < 0 for r in rates):
            raise ValueError("rates must be non-negative")
        self.rates = rates
        self.discard = total < 1
        self._fill = rates + ((ONE - total,) if self.discard else ())

    def fill(self, state: CupState) -> tuple[Fraction, ...]:
        return self._fill

    def observe(self, state: CupState) -> None:
        return None


class ScriptedAdversary:
    """Replays the fills (and estimates) of a recorded trace verbatim.

    When a step recorded estimates, the originally chosen cup is re-issued
    as the directed cup so adversary-directed tie-breaks replay exactly.
    """

    def __init__(self, records: Sequence[StepRecord]):
        self.records = list(records)
        self._i = 0

    @classmethod
    def from_trace(cls, trace: Trace) -> "ScriptedAdversary":
        return cls(trace.records)

    @classmethod
    def from_file(cls, path) -> "ScriptedAdversary":
        return cls.from_trace(load_trace(path))

    def fill(self, state: CupState) -> Optional[tuple[Fraction, ...]]:
        if self._i >= len(self.records):
            return None
        return self.records[self._i].fill

    def observe(self, state: CupState) -> Optional[Observation]:
        rec = self.records[self._i]
        self._i += 1
        if rec.estimates is None:
            return None
        return Observation(estimates=rec.estimates, directed=rec.chosen)


def scripted_adversary(path) -> ScriptedAdversary:
    """Load a JSON-lines trace file as a replayable adversary."""
    return ScriptedAdversary.from_file(path)


# ---------------------------------------------------------------------------
# Multiplicative lower-bound adversary (unit-removal game, estimates in
# [g, c*g])
# ---------------------------------------------------------------------------

class MultiplicativeLBAdversary:
    """Forces greedy into backlog ~ n^((c-1)/c) in the multiplicative game.

    Construction: first bring cups 0..n-2 up to height exactly 1 while
    sacrificing cup n-1 (which receives exactly 1/c per step and is always
    a legal greedy choice while the rest stay at or below 1); then one
    transition step tops up cups 0..n-3 and sacrifices cup n-2.  From then
    on, with x active equal cups, pour 1/(x-1) into cups 0..x-2 and direct
    greedy at cup x-1 for as long as that choice stays eligible; when it
    no longer is, shrink x.  The run ends at x = 1.

    ``h_of_x[x]`` / ``t_of_x[x]`` record the common active-cup height and
    the step at which the active count dropped to x.
    """

    def __init__(self, n: int, c: Fraction):
        c = Fraction(c)
        if n < 4:
            raise ValueError("need n >= 4")
        if c <= 1:
            raise ValueError("need c > 1")
        if (n - 2) * (c - 1) < 1:
            # The transition step directs greedy at a cup of height 1 while
            # the rest sit at 1 + 1/(n-2); eligibility needs c >= 1 + 1/(n-2).
            raise ValueError(f"construction needs (n-2)(c-1) >= 1; got n={n}, c={c}")
        self.n = n
        self.c = c
        self.stage = "setup"
        self.x = n - 2
        self.h_of_x: dict[int, Fraction] = {}
        self.t_of_x: dict[int, int] = {}
        self._directed: Optional[int] = None
        self._setup_delta = (1 - 1 / c) / (n - 1)

    @property
    def final_height(self) -> Fraction:
        """h(1): the common cup height when the run terminated."""
        return self.h_of_x[1]

    def _assert_equal(self, heights, upto: int) -> None:
        h0 = heights[0]
        for i in range(1, upto):
            if heights[i] != h0:
                raise AssertionError(
                    f"active cups not equal at phase entry: cup {i} has "
                    f"{heights[i]}, cup 0 has {h0}"
                )

    def fill(self, state: CupState) -> Optional[tuple[Fraction, ...]]:
        n, c = self.n, self.c
        f = state.heights
        fill = [ZERO] * n

        if self.stage == "setup":
            f0 = f[0]
            delta = self._setup_delta
            if f0 + delta <= 1:
                for i in range(n - 1):
                    fill[i] = delta
                fill[n - 1] = 1 / c
                self._directed = n - 1
                return tuple(fill)
            if f0 < 1:
                # Boundary step: land the growing cups on exactly 1 and give
                # the sacrificial cup the (still eligible) remainder.
                d = 1 - f0
                for i in range(n - 1):
                    fill[i] = d
                fill[n - 1] = 1 - (n - 1) * d
                self._directed = n - 1
                return tuple(fill)
            # All of 0..n-2 sit at exactly 1: transition step.
            self.stage = "main"
            self._entered_main = False
            share = Fraction(1, n - 2)
            for i in range(n - 2):
                fill[i] = share
            self._directed = n - 2
            return tuple(fill)

        if self.stage == "main":
            if not self._entered_main:
                self._entered_main = True
                self._assert_equal(f, self.x)
                self.h_of_x[self.x] = f[0]
                self.t_of_x[self.x] = state.t
            while self.x >= 2:
                share = Fraction(1, self.x - 1)
                if f[0] + share <= c * f[self.x - 1]:
                    break
                self.x -= 1
                self.h_of_x[self.x] = f[0]
                self.t_of_x[self.x] = state.t
                if self.x >= 2:
                    self._assert_equal(f, self.x)
            if self.x == 1:
                self.stage = "done"
                return None
            share = Fraction(1, self.x - 1)
            for i in range(self.x - 1):
                fill[i] = share
            self._directed = self.x - 1
            return tuple(fill)

        return None

    def observe(self, state: CupState) -> Observation:
        d = self._directed
        estimates = list(state.heights)
        estimates[d] = self.c * estimates[d]
        return Observation(estimates=tuple(estimates), directed=d)


def multiplicative_lb_adversary(n: int, c: Fraction) -> MultiplicativeLBAdversary:
    return MultiplicativeLBAdversary(n, c)


# ---------------------------------------------------------------------------
# Additive lower-bound adversary (unit-removal game, estimates in [g, g+c])
# ---------------------------------------------------------------------------

class AdditiveLBAdversary:
    """Forces greedy into backlog ~ (c+1) ln n in the additive game.

    With x active equal cups: pour 1/(x-1) into cups 0..x-2 and direct
    greedy at cup x-1 while that stays eligible; once it would not be,
    split the unit so that the common height lands exactly c above cup
    x-1, direct greedy there one last time, and shrink x.  Ends at x = 1;
    h(x) records the common height right after each shrink.
    """

    def __init__(self, n: int, c: Fraction):
        c = Fraction(c)
        if n < 2:
            raise ValueError("need n >= 2")
        if c <= 0:
            raise ValueError("need c > 0")
        self.n = n
        self.c = c
        self.x = n
        self.h_of_x: dict[int, Fraction] = {}
        self.t_of_x: dict[int, int] = {}
        self._directed: Optional[int] = None
        self._pending_shrink = False
        self._checked_entry = False

    @property
    def final_height(self) -> Fraction:
        return self.h_of_x[1]

    def fill(self, state: CupState) -> Optional[tuple[Fraction, ...]]:
        if self.x <= 1:
            return None
        c, x = self.c, self.x
        f = state.heights
        if not self._checked_entry:
            self._checked_entry = True
            h0 = f[0]
            for i in range(1, x):
                assert f[i] == h0, "active cups unequal at phase entry"
        fill = [ZERO] * self.n
        share = Fraction(1, x - 1)
        if f[0] + share <= f[x - 1] + c:
            for i in range(x - 1):
                fill[i] = share
            self._directed = x - 1
            return tuple(fill)
        # Equalizing split: after injection the common height must sit
        # exactly c above cup x-1.
        a = (c + 1 + f[x - 1] - f[0]) / x
        b = 1 - (x - 1) * a
        if a < 0 or b < 0:
            raise InfeasibleSplit(
                f"x={x}: equalizing split needs a={a}, b={b}"
            )
        for i in range(x - 1):
            fill[i] = a
        fill[x - 1] = b
        self._directed = x - 1
        self._pending_shrink = True
        return tuple(fill)

    def observe(self, state: CupState) -> Observation:
        d = self._directed
        estimates = list(state.heights)
        estimates[d] = estimates[d] + self.c
        if self._pending_shrink:
            self._pending_shrink = False
            self.x -= 1
            self.h_of_x[self.x] = state.heights[0]
            # state.t has not advanced yet mid-step; the shrink belongs to
            # the 1-based step being played now.
            self.t_of_x[self.x] = state.t + 1
            self._checked_entry = False
        return Observation(estimates=tuple(estimates), directed=d)


def additive_lb_adversary(n: int, c: Fraction) -> AdditiveLBAdversary:
    return AdditiveLBAdversary(n, c)


# ---------------------------------------------------------------------------
# Flushing lower-bound adversary (cohort cascade, estimates in [g, c*g])
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlushingCohort:
    """One generation of the cascade: ``count`` cups at common ``height``."""

    count: int
    height: Fraction
    generation: int


@dataclass
class FlushingPhase:
    """Plan for turning k cups at height x into s cups at height c*x."""

    k: int
    x: Fraction
    s: int
    full_steps: int
    remainder: Fraction  # water still owed per-unit after the full steps
    victims_used: int
    timing_ok: bool  # the counting inequality k - s >= (c-1)x*s + 1


def plan_phase(
    k: int, x: Fraction, c: Fraction, s: Optional[int] = None
) -> Optional[FlushingPhase]:
    """Cohort step plan, or None when the recursion has bottomed out.

    By default the next cohort keeps floor(k/(x+1)) cups; an explicit
    ``s`` overrides that rule (used by planned cascades).
    """
    if s is None:
        s = floor_div(Fraction(k) / (x + 1))
    if s == 0 or k == 1:
        return None
    total_pour = s * (c - 1) * x
    full_steps = floor_div(total_pour)
    remainder = total_pour - full_steps
    victims_used = full_steps + (1 if remainder > 0 else 0)
    timing_ok = k - s >= (c - 1) * x * s + 1
    return FlushingPhase(
        k=k, x=x, s=s, full_steps=full_steps, remainder=remainder,
        victims_used=victims_used, timing_ok=timing_ok,
    )


@dataclass
class FlushingSummary:
    """Closed-form account of a cascade run (no per-cup state)."""

    n: int
    c: Fraction
    cohorts: list[FlushingCohort]
    phases: list[FlushingPhase]
    setup_steps: int
    total_steps: int
    backlog: Fraction


def simulate_flushing_lb(n: int, c: Fraction) -> FlushingSummary:
    """Arithmetic-only cascade simulation; O(generations) work.

    Equivalent to running ``FlushingLBAdversary`` against directed greedy
    (the equivalence is covered by tests at small n), but usable at
    n = 10^4 and beyond.
    """
    c = Fraction(c)
    _validate_flushing_params(n, c)
    delta = (1 - 1 / c) / (n - 1)
    setup_steps = _ceil_frac(1 / delta)
    cohorts = [FlushingCohort(count=n - 1, height=ONE, generation=0)]
    phases: list[FlushingPhase] = []
    total_steps = setup_steps
    backlog = ONE
    k, x, gen = n - 1, ONE, 0
    while True:
        phase = plan_phase(k, x, c)
        if phase is None:
            break
        if not phase.timing_ok:
            raise CohortExhausted(
                f"generation {gen}: {phase.k - phase.s} victims cannot cover "
                f"{phase.victims_used} pump steps"
            )
        total_steps += phase.victims_used
        if phase.remainder > 0:
            # The last pump step dumps the leftover water on its victim,
            # which briefly spikes to x + 1 - remainder before the flush.
            backlog = max(backlog, x + 1 - phase.remainder)
        phases.append(phase)
        k, x, gen = phase.s, c * x, gen + 1
        backlog = max(backlog, x)
        cohorts.append(FlushingCohort(count=k, height=x, generation=gen))
    return FlushingSummary(
        n=n, c=c, cohorts=cohorts, phases=phases,
        setup_steps=setup_steps, total_steps=total_steps, backlog=backlog,
    )


def _ceil_frac(v: Fraction) -> int:
    return -floor_div(-v)


def _validate_flushing_params(n: int, c: Fraction) -> None:
    if n < 3:
        raise ValueError("need n >= 3")
    if not 1 < c < Fraction(3, 2):
        # The counting argument that keeps the player busy flushing victims
        # requires c < 3/2; larger c only helps the adversary in principle
        # but breaks this particular schedule.
        raise ValueError(f"need 1 < c < 3/2, got c={c}")


class FlushingLBAdversary:
    """Cohort cascade against greedy in the flushing game.

    Setup: pour 1/c into cup 0 (always a legal greedy target while nothing
    exceeds height 1) and spread the rest over cups 1..n-1 until they sit
    at exactly 1.  Then repeatedly: select s = floor(k/(x+1)) cohort cups,
    pump them from height x to exactly c*x at one unit per step, and
    direct greedy to flush one of the remaining k-s cups each step.
    """

    def __init__(self, n: int, c: Fraction):
        c = Fraction(c)
        _validate_flushing_params(n, c)
        self._init_base(n, c)

    def _init_base(self, n: int, c: Fraction) -> None:
        self.n = n
        self.c = c
        self.stage = "setup"
        self.cohorts: list[FlushingCohort] = []
        self.phases: list[FlushingPhase] = []
        self._setup_delta = (1 - 1 / c) / (n - 1)
        self._directed: Optional[int] = None
        # Pump-phase state.
        self._members: list[int] = []
        self._selected: list[int] = []
        self._victims: list[int] = []
        self._phase: Optional[FlushingPhase] = None
        self._pump_i = 0
        self._x = ONE
        self._gen = 0

    def _plan_next(self) -> Optional[FlushingPhase]:
        phase = plan_phase(len(self._members), self._x, self.c)
        if phase is not None and not phase.timing_ok:
            raise CohortExhausted(
                f"generation {self._gen}: not enough victims for the pump"
            )
        return phase

    def _start_phase(self) -> bool:
        """Plan the next cohort step; False when the cascade is over."""
        phase = self._plan_next()
        if phase is None:
            return False
        if len(self._members) - phase.s < phase.victims_used:
            raise CohortExhausted(
                f"generation {self._gen}: {len(self._members) - phase.s} victims "
                f"cannot cover {phase.victims_used} pump steps"
            )
        self._phase = phase
        self._selected = self._members[: phase.s]
        self._victims = self._members[phase.s :]
        self._pump_i = 0
        return True

    def _finish_phase(self) -> None:
        phase = self._phase
        self._members = self._selected
        self._x = self.c * self._x
        self._gen += 1
        self.cohorts.append(
            FlushingCohort(count=phase.s, height=self._x, generation=self._gen)
        )
        self.phases.append(phase)
        self._phase = None

    def fill(self, state: CupState) -> Optional[tuple[Fraction, ...]]:
        n, c = self.n, self.c
        fill = [ZERO] * n

        if self.stage == "setup":
            f1 = state.heights[1]
            delta = self._setup_delta
            if f1 + delta <= 1:
                fill[0] = 1 / c
                for i in range(1, n):
                    fill[i] = delta
                self._directed = 0
                return tuple(fill)
            if f1 < 1:
                d = 1 - f1
                for i in range(1, n):
                    fill[i] = d
                fill[0] = 1 - (n - 1) * d
                self._directed = 0
                return tuple(fill)
            self.stage = "pump"
            self._members = list(range(1, n))
            self._x = ONE
            self._gen = 0
            self.cohorts.append(FlushingCohort(count=n - 1, height=ONE, generation=0))
            if not self._start_phase():
                self.stage = "done"
                return None

        if self.stage == "pump":
            phase = self._phase
            if self._pump_i >= phase.victims_used:
                self._finish_phase()
                if not self._start_phase():
                    self.stage = "done"
                    return None
                phase = self._phase
            if self._pump_i >= len(self._victims):
                raise CohortExhausted(
                    f"generation {self._gen}: ran out of victims mid-pump"
                )
            victim = self._victims[self._pump_i]
            if self._pump_i < phase.full_steps:
                share = Fraction(1, phase.s)
                for i in self._selected:
                    fill[i] = share
            else:
                share = phase.remainder / phase.s
                for i in self._selected:
                    fill[i] = share
                fill[victim] = 1 - phase.remainder
            self._pump_i += 1
            self._directed = victim
            return tuple(fill)

        return None

    def observe(self, state: CupState) -> Observation:
        d = self._directed
        estimates = list(state.heights)
        estimates[d] = self.c * estimates[d]
        return Observation(estimates=tuple(estimates), directed=d)


def flushing_lb_adversary(n: int, c: Fraction) -> FlushingLBAdversary:
    return FlushingLBAdversary(n, c)


# ---------------------------------------------------------------------------
# Planned cascade (tall flushing stacks for any c > 1)
# ---------------------------------------------------------------------------

def plan_cascade(c: Fraction, generations: int) -> list[int]:
    """Cohort sizes k_0..k_G sized backward so every pump phase has exactly
    enough victims.

    The floor(k/(x+1)) rule relies on c < 3/2 for its victim counting; this
    planner instead fixes the final cohort at one cup and works backward
    (k_i = k_{i+1} + ceil(k_{i+1} * (c-1) * c^i)), which is feasible for
    any c > 1.  Used to build flushing traces that actually clear the
    potential monitor's 4c descent threshold.
    """
    c = Fraction(c)
    if c <= 1:
        raise ValueError("need c > 1")
    if generations < 1:
        raise ValueError("need at least one generation")
    sizes = [1]
    for i in range(generations - 1, -1, -1):
        s = sizes[0]
        victims = _ceil_frac(s * (c - 1) * c**i)
        sizes.insert(0, s + victims)
    return sizes


class PlannedCascadeAdversary(FlushingLBAdversary):
    """Flushing cascade that follows pre-planned cohort sizes.

    ``n`` is fixed by the plan: one sacrificial setup cup plus k_0 cohort
    cups.  Reaches height c^generations with a single surviving cup.
    """

    def __init__(self, c: Fraction, generations: int):
        c = Fraction(c)
        self.plan = plan_cascade(c, generations)
        n = self.plan[0] + 1
        if n < 3:
            raise ValueError("plan too small")
        # Deliberately skips the c < 3/2 restriction of the floor rule.
        self._init_base(n, c)
        self._plan_i = 0

    def _plan_next(self) -> Optional[FlushingPhase]:
        if self._plan_i + 1 >= len(self.plan):
            return None
        s = self.plan[self._plan_i + 1]
        self._plan_i += 1
        return plan_phase(len(self._members), self._x, self.c, s=s)
