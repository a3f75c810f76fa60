"""Exact-arithmetic cup game engine.

A game proceeds in discrete steps.  In step t (1-based) the adversary first
distributes exactly 1 unit of water over the cups, then the player removes
water from a single cup (one unit in the standard game, everything in the
flushing game).  Heights immediately after the injection are the
"intermediate" heights; the backlog of a run is the maximum intermediate
height over all steps.

Everything is a ``fractions.Fraction``; no floating point enters the state,
so two runs with identical inputs produce bit-identical traces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable, Optional, Protocol, Sequence

from .errors import (
    EligibilityViolation,
    EstimateViolation,
    FillSumMismatch,
    IndexOutOfRange,
    NegativeFill,
    PhaseError,
    TraceParseError,
)
from .rationals import format_ratio, parse_ratio

# Phases of a cup state within a step.
POST_REMOVAL = "post-removal"
POST_INJECTION = "post-injection"

# Removal models.
UNIT_REMOVAL = "unit"
FLUSH = "flush"

# Information models.
EXACT = "exact"
MULTIPLICATIVE = "multiplicative"
ADDITIVE = "additive"

# Tie-break policies for greedy.
LOWEST_INDEX = "lowest-index"
ADVERSARY_DIRECTED = "adversary-directed"

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class GameSpec:
    """Descriptor of a game variant.

    ``rates`` is the declared fixed-rate vector for fixed-rate games and
    ``None`` for variable-rate games.  ``c`` is the error parameter of the
    multiplicative/additive info models.  When ``discard`` is set, fill
    vectors carry one extra trailing entry whose water is poured away
    rather than into any cup (used for fixed-rate instances whose rates
    sum to less than 1, so that every fill still sums to exactly 1).
    """

    n: int
    removal: str = UNIT_REMOVAL
    rates: Optional[tuple[Fraction, ...]] = None
    info: str = EXACT
    c: Optional[Fraction] = None
    tiebreak: str = LOWEST_INDEX
    discard: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one cup, got n={self.n}")
        if self.removal not in (UNIT_REMOVAL, FLUSH):
            raise ValueError(f"unknown removal model {self.removal!r}")
        if self.info not in (EXACT, MULTIPLICATIVE, ADDITIVE):
            raise ValueError(f"unknown info model {self.info!r}")
        if self.tiebreak not in (LOWEST_INDEX, ADVERSARY_DIRECTED):
            raise ValueError(f"unknown tiebreak {self.tiebreak!r}")
        if self.info == MULTIPLICATIVE:
            if self.c is None or self.c <= 1:
                raise ValueError("multiplicative info needs c > 1")
        elif self.info == ADDITIVE:
            if self.c is None or self.c <= 0:
                raise ValueError("additive info needs c > 0")
        if self.rates is not None:
            object.__setattr__(self, "rates", tuple(Fraction(r) for r in self.rates))
            if len(self.rates) != self.n:
                raise ValueError("rate vector length != n")
            if any(r < 0 for r in self.rates):
                raise ValueError("rates must be non-negative")
            if sum(self.rates) > 1:
                raise ValueError("rates must sum to at most 1")
        if self.c is not None:
            object.__setattr__(self, "c", Fraction(self.c))


@dataclass(frozen=True)
class CupState:
    """Cup heights at a phase of a step.

    ``t`` counts completed steps, so the initial state is
    ``(all zero, t=0, post-removal)``.
    """

    heights: tuple[Fraction, ...]
    t: int = 0
    phase: str = POST_REMOVAL

    @classmethod
    def empty(cls, n: int) -> "CupState":
        return cls(heights=(ZERO,) * n)

    @property
    def n(self) -> int:
        return len(self.heights)

    def max_height(self) -> Fraction:
        return max(self.heights)


@dataclass(frozen=True)
class Observation:
    """What a semi-oblivious player sees: estimates, plus the cup the
    adversary nudges greedy toward when ties are adversary-directed."""

    estimates: tuple[Fraction, ...]
    directed: Optional[int] = None


@dataclass(frozen=True)
class StepRecord:
    """Per-step log entry.

    ``fill`` includes the trailing discard entry when the spec uses one.
    ``chosen`` is None when the player idled.
    """

    t: int
    fill: tuple[Fraction, ...]
    estimates: Optional[tuple[Fraction, ...]]
    chosen: Optional[int]
    intermediate_max: Fraction
    post_removal_max: Fraction


@dataclass
class Trace:
    spec: GameSpec
    records: list[StepRecord] = field(default_factory=list)
    backlog: Fraction = ZERO
    backlog_step: int = 0

    def __len__(self) -> int:
        return len(self.records)

    def finalize(self) -> "Trace":
        """Recompute backlog and its first attainment step from the records."""
        self.backlog = ZERO
        self.backlog_step = 0
        for rec in self.records:
            if rec.intermediate_max > self.backlog:
                self.backlog = rec.intermediate_max
                self.backlog_step = rec.t
        return self


class AdversaryProtocol(Protocol):
    def fill(self, state: CupState) -> Optional[Sequence[Fraction]]:
        """Fill vector for the next step, or None to end the run early."""

    def observe(self, state: CupState) -> Optional[Observation]:
        """Estimates shown to the player after injection (None = exact info)."""


class PlayerProtocol(Protocol):
    def choose(self, state: CupState, observation: Optional[Observation]) -> Optional[int]:
        """Cup to remove from, or None to idle."""


# ---------------------------------------------------------------------------
# Core step operations
# ---------------------------------------------------------------------------

def inject(state: CupState, fill: Sequence[Fraction], discard: bool = False) -> CupState:
    """Distribute one unit of water; returns the post-injection state.

    ``fill`` must have one entry per cup (plus one trailing discard entry
    when ``discard`` is set), all non-negative, summing to exactly 1.
    """
    if state.phase != POST_REMOVAL:
        raise PhaseError("inject requires a post-removal state")
    n = state.n
    expected = n + 1 if discard else n
    if len(fill) != expected:
        raise FillSumMismatch(f"fill length {len(fill)} != {expected}")
    total = ZERO
    for f in fill:
        if f < 0:
            raise NegativeFill(f"negative fill entry {f}")
        total += f
    if total != 1:
        raise FillSumMismatch(f"fill sums to {total}, expected 1")
    heights = tuple(h + f for h, f in zip(state.heights, fill))
    return CupState(heights=heights, t=state.t, phase=POST_INJECTION)


def remove(state: CupState, cup: Optional[int], spec: GameSpec) -> CupState:
    """Apply the player's removal; returns the post-removal state of t+1.

    ``cup=None`` is the idle move: no water is removed but the step still
    completes (only strategies that define idling ever produce it).
    """
    if state.phase != POST_INJECTION:
        raise PhaseError("remove requires a post-injection state")
    if cup is None:
        return CupState(heights=state.heights, t=state.t + 1, phase=POST_REMOVAL)
    if not 0 <= cup < state.n:
        raise IndexOutOfRange(f"cup {cup} outside [0, {state.n})")
    heights = list(state.heights)
    if spec.removal == FLUSH:
        heights[cup] = ZERO
    else:
        heights[cup] = heights[cup] - min(ONE, heights[cup])
    return CupState(heights=tuple(heights), t=state.t + 1, phase=POST_REMOVAL)


def prefix_averages(state: CupState) -> tuple[tuple[int, ...], tuple[Fraction, ...]]:
    """Cups sorted by descending height (ties: lowest index) and, for each
    m = 1..n, the exact mean of the m largest heights."""
    order = sorted(range(state.n), key=lambda i: (-state.heights[i], i))
    means = []
    total = ZERO
    for m, i in enumerate(order, start=1):
        total += state.heights[i]
        means.append(total / m)
    return tuple(order), tuple(means)


def eligible_set(state: CupState, spec: GameSpec) -> set[int]:
    """Cups an adversary-chosen estimate can make greedy select.

    Multiplicative(c): heights within a factor c of the intermediate max;
    Additive(c): within c of it.
    """
    if spec.info == EXACT:
        raise ValueError("eligible_set is only defined for estimate-based info models")
    if state.phase != POST_INJECTION:
        raise PhaseError("eligible_set requires a post-injection state")
    gmax = state.max_height()
    if spec.info == MULTIPLICATIVE:
        return {i for i, g in enumerate(state.heights) if g * spec.c >= gmax}
    return {i for i, g in enumerate(state.heights) if g >= gmax - spec.c}


def _check_observation(state: CupState, obs: Observation, spec: GameSpec) -> None:
    if len(obs.estimates) != state.n:
        raise EstimateViolation("estimate vector length != n")
    for g, est in zip(state.heights, obs.estimates):
        if spec.info == MULTIPLICATIVE:
            ok = g <= est <= spec.c * g
        elif spec.info == ADDITIVE:
            ok = g <= est <= g + spec.c
        else:
            raise EstimateViolation("estimates supplied in an exact-info game")
        if not ok:
            raise EstimateViolation(f"estimate {est} outside bounds for height {g}")
    if obs.directed is not None and obs.directed not in eligible_set(state, spec):
        raise EligibilityViolation(
            f"directed cup {obs.directed} not in eligible set at t={state.t}"
        )


def run_game(
    spec: GameSpec,
    adversary: AdversaryProtocol,
    player: PlayerProtocol,
    steps: int,
) -> Trace:
    """Play ``steps`` steps (or fewer if the adversary ends the run).

    Estimates are validated against the sandwich bound of the info model
    every step, and any directed choice is validated against the eligible
    set; violations raise rather than producing a silently-bogus trace.
    """
    state = CupState.empty(spec.n)
    trace = Trace(spec=spec)
    for _ in range(steps):
        fill = adversary.fill(state)
        if fill is None:
            break
        fill = tuple(fill)
        gstate = inject(state, fill, discard=spec.discard)
        obs = adversary.observe(gstate)
        if obs is not None:
            _check_observation(gstate, obs, spec)
        chosen = player.choose(gstate, obs)
        intermediate_max = gstate.max_height()
        state = remove(gstate, chosen, spec)
        trace.records.append(
            StepRecord(
                t=state.t,
                fill=fill,
                estimates=obs.estimates if obs is not None else None,
                chosen=chosen,
                intermediate_max=intermediate_max,
                post_removal_max=state.max_height(),
            )
        )
    return trace.finalize()


def replay_heights(trace: Trace) -> Iterable[tuple[StepRecord, tuple[Fraction, ...], tuple[Fraction, ...]]]:
    """Reconstruct (record, intermediate heights, post-removal heights) per step.

    Traces store only fills and choices; the exact height vectors are
    replayed from them, which keeps traces small and guarantees the
    checkers see exactly what the engine computed.
    """
    spec = trace.spec
    heights = [ZERO] * spec.n
    for rec in trace.records:
        for i in range(spec.n):
            if rec.fill[i]:
                heights[i] = heights[i] + rec.fill[i]
        g = tuple(heights)
        if rec.chosen is not None:
            if spec.removal == FLUSH:
                heights[rec.chosen] = ZERO
            else:
                heights[rec.chosen] = heights[rec.chosen] - min(ONE, heights[rec.chosen])
        yield rec, g, tuple(heights)


# ---------------------------------------------------------------------------
# Trace serialization (JSON lines)
# ---------------------------------------------------------------------------
#
# Line 1: header object with the game spec.
# Lines 2..k+1: one object per step.
# Last line: trailer object with backlog and backlog_step.

def spec_to_json(spec: GameSpec) -> dict:
    return {
        "n": spec.n,
        "removal": spec.removal,
        "rates": [format_ratio(r) for r in spec.rates] if spec.rates is not None else None,
        "info": spec.info,
        "c": format_ratio(spec.c) if spec.c is not None else None,
        "tiebreak": spec.tiebreak,
        "discard": spec.discard,
    }


def spec_from_json(obj: dict) -> GameSpec:
    return GameSpec(
        n=obj["n"],
        removal=obj.get("removal", UNIT_REMOVAL),
        rates=tuple(parse_ratio(r) for r in obj["rates"]) if obj.get("rates") else None,
        info=obj.get("info", EXACT),
        c=parse_ratio(obj["c"]) if obj.get("c") else None,
        tiebreak=obj.get("tiebreak", LOWEST_INDEX),
        discard=obj.get("discard", False),
    )


def _record_to_json(rec: StepRecord) -> dict:
    return {
        "t": rec.t,
        "fill": [format_ratio(f) for f in rec.fill],
        "estimates": [format_ratio(e) for e in rec.estimates] if rec.estimates else None,
        "chosen": rec.chosen,
        "intermediate_max": format_ratio(rec.intermediate_max),
        "post_removal_max": format_ratio(rec.post_removal_max),
    }


def _record_from_json(obj: dict) -> StepRecord:
    return StepRecord(
        t=obj["t"],
        fill=tuple(parse_ratio(f) for f in obj["fill"]),
        estimates=tuple(parse_ratio(e) for e in obj["estimates"]) if obj.get("estimates") else None,
        chosen=obj.get("chosen"),
        intermediate_max=parse_ratio(obj["intermediate_max"]),
        post_removal_max=parse_ratio(obj["post_removal_max"]),
    )


def write_trace(trace: Trace, fp: IO[str]) -> None:
    fp.write(json.dumps({"header": spec_to_json(trace.spec)}) + "\n")
    for rec in trace.records:
        fp.write(json.dumps(_record_to_json(rec)) + "\n")
    fp.write(
        json.dumps(
            {"trailer": {"backlog": format_ratio(trace.backlog), "backlog_step": trace.backlog_step}}
        )
        + "\n"
    )


def save_trace(trace: Trace, path) -> None:
    with open(path, "w") as fp:
        write_trace(trace, fp)


def read_trace(fp: IO[str]) -> Trace:
    lines = [line for line in fp if line.strip()]
    if not lines:
        raise TraceParseError("empty trace file")
    try:
        header = json.loads(lines[0])
        spec = spec_from_json(header["header"])
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise TraceParseError(f"bad trace header: {exc}") from exc
    records = []
    trailer = None
    for line in lines[1:]:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceParseError(f"bad trace line: {exc}") from exc
        if "trailer" in obj:
            trailer = obj["trailer"]
            continue
        try:
            records.append(_record_from_json(obj))
        except (KeyError, ValueError, TypeError) as exc:
            raise TraceParseError(f"bad step record: {exc}") from exc
    trace = Trace(spec=spec, records=records).finalize()
    if trailer is not None:
        recorded = parse_ratio(trailer["backlog"])
        if recorded != trace.backlog:
            raise TraceParseError(
                f"trailer backlog {recorded} disagrees with records ({trace.backlog})"
            )
    return trace


def load_trace(path) -> Trace:
    with open(path) as fp:
        return read_trace(fp)
