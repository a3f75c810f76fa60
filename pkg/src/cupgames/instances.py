"""Bundled bamboo counterexample instances and their event timelines.

Two fixed-rate instances on which greedy exceeds backlog 2:

* ``warmup``: 2000 bamboos, backlog exactly 2.0004 (= 5001/2500),
* ``main``:   2702 bamboos, backlog exactly 2.076  (= 519/250).

Backlog values are hard exact-rational assertions.  Individual event steps
depend on tie-break ordering among the identical slow bamboos, so they are
soft: a timeline check matches them within a +/-3 step tolerance and
reports misses instead of failing the run.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .bamboosim import FixedRateRun, simulate_fixed_rate
from .rationals import format_ratio, parse_ratio

SOFT_STEP_TOLERANCE = 3
SOFT_COUNT_TOLERANCE = 3

# Event kinds understood by check_timeline.
BACKLOG_ATTAINED = "backlog-attained"  # intermediate max equals value at ~step
CHOSEN_HEIGHT = "chosen-height"        # the cut cup's intermediate height at ~step
CHOSEN_CUP = "chosen-cup"              # a specific cup is cut at ~step
CUP_HEIGHT = "cup-height"              # cup's intermediate height at ~step
SLOW_CROSS = "slow-cross"              # max slow-bamboo height first reaches value
SLOW_ABOVE_COUNT = "slow-above-count"  # number of slow bamboos above value
LAST_CUT_BEFORE_BACKLOG = "last-cut-before-backlog"  # cup's final cut pre-breach


@dataclass(frozen=True)
class TimelineEvent:
    step: int
    kind: str
    cup: Optional[int] = None
    value: Optional[Fraction] = None
    count: Optional[int] = None
    hard: bool = False


@dataclass(frozen=True)
class BambooInstance:
    name: str
    rates: tuple[Fraction, ...]
    epsilon: Optional[Fraction] = None
    expected_backlog: Optional[Fraction] = None
    expected_backlog_step: Optional[int] = None
    slow_start: Optional[int] = None  # first index of the identical slow block
    timeline: tuple[TimelineEvent, ...] = ()

    @property
    def n(self) -> int:
        return len(self.rates)

    def rate_sum(self) -> Fraction:
        return sum(self.rates, Fraction(0))


def warmup_instance() -> BambooInstance:
    """2000 bamboos: rates 0.5001, 0.3001, and 1998 copies of 0.0001.

    Greedy lets the fastest bamboo reach 2.0004 around step 12014: the
    slow bamboos cross successive multiples of the fast rates (0.3001 at
    step 3001, then 0.5001, 0.6002, 0.9003, 1.0002, 1.2004) and soak up
    more and more of greedy's attention, until both fast bamboos sit near
    1.5 -- the slightly taller slower one gets cut, and the fastest gets a
    fourth consecutive growth step.
    """
    eps = Fraction(1, 10000)
    slow = (Fraction(2, 10) - 2 * eps) / 1998  # = 1/10000 exactly
    rates = (Fraction(5, 10) + eps, Fraction(3, 10) + eps) + (slow,) * 1998
    backlog = Fraction(5001, 2500)  # 2.0004 = 4 * 0.5001
    q = Fraction
    timeline = (
        TimelineEvent(3001, SLOW_CROSS, value=q("3001/10000")),
        TimelineEvent(5001, SLOW_CROSS, value=q("5001/10000")),
        TimelineEvent(6002, SLOW_CROSS, value=q("6002/10000")),
        TimelineEvent(9003, SLOW_CROSS, value=q("9003/10000")),
        TimelineEvent(10002, SLOW_CROSS, value=q("10002/10000")),
        TimelineEvent(12004, SLOW_CROSS, value=q("12004/10000")),
        TimelineEvent(12009, LAST_CUT_BEFORE_BACKLOG, cup=0),
        TimelineEvent(12009, SLOW_ABOVE_COUNT, value=q("1201/1000"), count=105),
        TimelineEvent(12013, CUP_HEIGHT, cup=0, value=q("15003/10000")),
        TimelineEvent(12013, CHOSEN_HEIGHT, value=q("15005/10000")),
        TimelineEvent(12013, CHOSEN_CUP, cup=1),
        TimelineEvent(12014, BACKLOG_ATTAINED, value=backlog, hard=True),
    )
    return BambooInstance(
        name="warmup",
        rates=rates,
        epsilon=eps,
        expected_backlog=backlog,
        expected_backlog_step=12014,
        slow_start=2,
        timeline=timeline,
    )


def main_instance() -> BambooInstance:
    """2702 bamboos: rates 0.4152, 0.1646, 0.1846, and 2699 slow copies.

    The strongest bundled instance: greedy drives the fastest bamboo to
    exactly 2.076 around step 15092, and the same height recurs near
    steps 15101 and 15110.  The final squeeze: the fast bamboos stand at
    1.2456 / 1.4814 / 1.4768, greedy spends two steps on the slower two
    (cutting heights 1.4814 then 1.6614 while the fastest sits at 1.6608),
    and the fastest reaches 5 * 0.4152.
    """
    eps = Fraction(2, 10000)
    slow = (Fraction(235, 1000) + 3 * eps) / 2699  # = 589/6747500
    rates = (
        Fraction(415, 1000) + eps,      # 519/1250
        Fraction(165, 1000) - 2 * eps,  # 823/5000
        Fraction(185, 1000) - 2 * eps,  # 923/5000
    ) + (slow,) * 2699
    backlog = Fraction(519, 250)  # 2.076 = 5 * 0.4152
    q = Fraction
    timeline = (
        TimelineEvent(7542, SLOW_CROSS, value=q("6584/10000")),
        TimelineEvent(8459, SLOW_CROSS, value=q("7384/10000")),
        TimelineEvent(9512, SLOW_CROSS, value=q("8304/10000")),
        TimelineEvent(14269, SLOW_CROSS, value=q("12456/10000")),
        TimelineEvent(15087, LAST_CUT_BEFORE_BACKLOG, cup=0),
        TimelineEvent(15087, SLOW_ABOVE_COUNT, value=q("13168/10000"), count=16),
        TimelineEvent(15090, CUP_HEIGHT, cup=0, value=q("12456/10000")),
        TimelineEvent(15090, CHOSEN_HEIGHT, value=q("14814/10000")),
        TimelineEvent(15091, CUP_HEIGHT, cup=0, value=q("16608/10000")),
        TimelineEvent(15091, CHOSEN_HEIGHT, value=q("16614/10000")),
        TimelineEvent(15092, BACKLOG_ATTAINED, value=backlog, hard=True),
        TimelineEvent(15101, BACKLOG_ATTAINED, value=backlog),
        TimelineEvent(15110, BACKLOG_ATTAINED, value=backlog),
    )
    return BambooInstance(
        name="main",
        rates=rates,
        epsilon=eps,
        expected_backlog=backlog,
        expected_backlog_step=15092,
        slow_start=3,
        timeline=timeline,
    )


BUNDLED = {"warmup": warmup_instance, "main": main_instance}


def get_instance(name: str) -> BambooInstance:
    try:
        return BUNDLED[name]()
    except KeyError:
        raise KeyError(f"unknown bundled instance {name!r}; have {sorted(BUNDLED)}")


def run_instance(
    instance: BambooInstance, player: str = "greedy", steps: Optional[int] = None
) -> FixedRateRun:
    """Simulate an instance with the fast fixed-rate engine."""
    if steps is None:
        steps = (instance.expected_backlog_step or 10000) + 1000
    return simulate_fixed_rate(instance.rates, player=player, steps=steps)


# ---------------------------------------------------------------------------
# Timeline verification
# ---------------------------------------------------------------------------

@dataclass
class TimelineFinding:
    event: TimelineEvent
    ok: bool
    matched_step: Optional[int]
    detail: str


@dataclass
class TimelineReport:
    instance: str
    findings: list[TimelineFinding] = field(default_factory=list)

    @property
    def hard_ok(self) -> bool:
        return all(f.ok for f in self.findings if f.event.hard)

    @property
    def all_ok(self) -> bool:
        return all(f.ok for f in self.findings)

    @property
    def soft_misses(self) -> list[TimelineFinding]:
        return [f for f in self.findings if not f.ok and not f.event.hard]

    def summary(self) -> str:
        lines = [f"timeline check: {self.instance}"]
        for f in self.findings:
            mark = "ok " if f.ok else ("FAIL" if f.event.hard else "miss")
            lines.append(f"  [{mark}] ~step {f.event.step} {f.event.kind}: {f.detail}")
        return "\n".join(lines)


def _window(step: int, steps: int) -> range:
    lo = max(1, step - SOFT_STEP_TOLERANCE)
    hi = min(steps, step + SOFT_STEP_TOLERANCE)
    return range(lo, hi + 1)


def max_slow_growth(run: FixedRateRun, slow_start: int) -> np.ndarray:
    """Per step, the number of growth steps of the least recently cut slow
    bamboo (its height is that count times the slow rate).

    Uses a lazy min-heap over last-cut times, so one pass over the run.
    """
    n = run.n
    last = [0] * n
    heap = [(0, i) for i in range(slow_start, n)]
    heapq.heapify(heap)
    out = np.empty(run.steps, dtype=np.int64)
    for t in range(1, run.steps + 1):
        while heap[0][0] != last[heap[0][1]]:
            heapq.heappop(heap)
        out[t - 1] = t - heap[0][0]
        c = int(run.chosen[t - 1])
        if c >= slow_start:
            last[c] = t
            heapq.heappush(heap, (t, c))
    return out


def check_timeline(run: FixedRateRun, instance: BambooInstance) -> TimelineReport:
    """Verify an instance's timeline against a greedy run.

    Hard events must hold (backlog value, and that it is attained near its
    nominal step); soft events are matched within +/-3 steps (counts
    within +/-3 as well).
    """
    report = TimelineReport(instance=instance.name)
    slow_start = instance.slow_start
    slow_growth = None
    if any(ev.kind == SLOW_CROSS for ev in instance.timeline) and slow_start is not None:
        slow_growth = max_slow_growth(run, slow_start)
        slow_rate = instance.rates[slow_start]

    for ev in instance.timeline:
        matched = None
        detail = ""
        if ev.kind == BACKLOG_ATTAINED:
            hits = run.steps_attaining(ev.value)
            near = [t for t in hits if t in _window(ev.step, run.steps)]
            matched = near[0] if near else None
            detail = f"max == {format_ratio(ev.value)} at steps {hits[:6]}"
        elif ev.kind == CHOSEN_CUP:
            near = [t for t in _window(ev.step, run.steps) if run.chosen[t - 1] == ev.cup]
            matched = near[0] if near else None
            detail = f"cup {ev.cup} cut near step {ev.step}: {near}"
        elif ev.kind == CHOSEN_HEIGHT:
            near = []
            for t in _window(ev.step, run.steps):
                c = int(run.chosen[t - 1])
                if c >= 0 and run.height_at(c, t) == ev.value:
                    near.append(t)
            matched = near[0] if near else None
            detail = f"cut height == {format_ratio(ev.value)} near {ev.step}: {near}"
        elif ev.kind == CUP_HEIGHT:
            near = [
                t
                for t in _window(ev.step, run.steps)
                if run.height_at(ev.cup, t) == ev.value
            ]
            matched = near[0] if near else None
            detail = f"cup {ev.cup} at {format_ratio(ev.value)} near {ev.step}: {near}"
        elif ev.kind == SLOW_CROSS:
            crossed = np.nonzero(slow_rate * slow_growth >= ev.value)[0]
            first = int(crossed[0]) + 1 if len(crossed) else None
            matched = first if first in _window(ev.step, run.steps) else None
            detail = f"slow height reaches {format_ratio(ev.value)} at step {first}"
        elif ev.kind == SLOW_ABOVE_COUNT:
            counts = {}
            for t in _window(ev.step, run.steps):
                counts[t] = sum(
                    1
                    for i in range(slow_start, run.n)
                    if run.height_at(i, t) > ev.value
                )
            hits = [t for t, k in counts.items() if abs(k - ev.count) <= SOFT_COUNT_TOLERANCE]
            matched = hits[0] if hits else None
            detail = f"slows above {format_ratio(ev.value)}: {counts} (expect ~{ev.count})"
        elif ev.kind == LAST_CUT_BEFORE_BACKLOG:
            breach = run.backlog_step
            cuts = [int(s) for s in run.cut_steps(ev.cup) if s < breach]
            last = cuts[-1] if cuts else None
            matched = last if last in _window(ev.step, run.steps) else None
            detail = f"cup {ev.cup} last cut before step {breach}: {last}"
        else:
            raise ValueError(f"unknown timeline event kind {ev.kind!r}")
        report.findings.append(
            TimelineFinding(event=ev, ok=matched is not None, matched_step=matched, detail=detail)
        )
    return report


# ---------------------------------------------------------------------------
# Instance files
# ---------------------------------------------------------------------------

def instance_to_json(instance: BambooInstance) -> dict:
    obj = {
        "name": instance.name,
        "rates": [format_ratio(r) for r in instance.rates],
    }
    if instance.epsilon is not None:
        obj["epsilon"] = format_ratio(instance.epsilon)
    if instance.expected_backlog is not None:
        obj["expected_backlog"] = format_ratio(instance.expected_backlog)
    if instance.expected_backlog_step is not None:
        obj["expected_backlog_step"] = instance.expected_backlog_step
    if instance.slow_start is not None:
        obj["slow_start"] = instance.slow_start
    if instance.timeline:
        obj["timeline"] = [
            {
                "step": ev.step,
                "kind": ev.kind,
                "cup": ev.cup,
                "value": format_ratio(ev.value) if ev.value is not None else None,
                "count": ev.count,
                "hard": ev.hard,
            }
            for ev in instance.timeline
        ]
    return obj


def instance_from_json(obj: dict) -> BambooInstance:
    timeline = tuple(
        TimelineEvent(
            step=ev["step"],
            kind=ev["kind"],
            cup=ev.get("cup"),
            value=parse_ratio(ev["value"]) if ev.get("value") is not None else None,
            count=ev.get("count"),
            hard=ev.get("hard", False),
        )
        for ev in obj.get("timeline", [])
    )
    return BambooInstance(
        name=obj.get("name", "unnamed"),
        rates=tuple(parse_ratio(r) for r in obj["rates"]),
        epsilon=parse_ratio(obj["epsilon"]) if obj.get("epsilon") else None,
        expected_backlog=parse_ratio(obj["expected_backlog"])
        if obj.get("expected_backlog")
        else None,
        expected_backlog_step=obj.get("expected_backlog_step"),
        slow_start=obj.get("slow_start"),
        timeline=timeline,
    )


def save_instance(instance: BambooInstance, path) -> None:
    with open(path, "w") as fp:
        json.dump(instance_to_json(instance), fp, indent=2)
        fp.write("\n")


def load_instance(path) -> BambooInstance:
    with open(path) as fp:
        return instance_from_json(json.load(fp))
