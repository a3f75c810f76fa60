"""Randomized counterexample search over steep bamboo instances.

Steep instances (a few fast bamboos, many identical slow ones) are drawn
with integer raw rates, normalized exactly, and scored by simulating
greedy to a fixed horizon.  Hill climbing perturbs the fast rates with
Gaussian noise snapped to a 1e-7 grid, renormalizes exactly, and accepts
whenever the backlog strictly increases.  Every archived result replays
bit-exactly from its instance alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .bamboosim import simulate_fixed_rate
from .errors import ReplayMismatch, TraceParseError
from .instances import BambooInstance, instance_from_json, instance_to_json
from .rationals import format_ratio, parse_ratio

STEEP2 = "steep2"
STEEP3 = "steep3"

# Raw integer rate ranges for the steep families (inclusive).
FAMILY_RANGES = {
    STEEP2: ((2500, 5000), (1250, 2500)),
    STEEP3: ((800, 2500), (1200, 2500), (2500, 5000)),
}

SNAP_DENOM = 10**7


@dataclass(frozen=True)
class SearchConfig:
    family: str = STEEP2
    n_slow: tuple[int, int] = (1200, 3000)
    seed: int = 0
    iterations: int = 100
    perturbation_sigma: float = 1e-4
    horizon: int = 40000
    fast_ranges: Optional[tuple[tuple[int, int], ...]] = None  # custom family

    def __post_init__(self):
        if self.n_slow[0] > self.n_slow[1] or self.n_slow[0] < 0:
            raise ValueError("bad n_slow range")
        if self.perturbation_sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    def ranges(self) -> tuple[tuple[int, int], ...]:
        if self.family == "custom":
            if not self.fast_ranges:
                raise ValueError("custom family needs fast_ranges")
            return self.fast_ranges
        try:
            return FAMILY_RANGES[self.family]
        except KeyError:
            raise ValueError(f"unknown family {self.family!r}")


@dataclass
class SearchResult:
    instance: BambooInstance
    backlog: Fraction
    backlog_step: int
    horizon: int
    seed: int
    lineage: list[tuple[int, str]] = field(default_factory=list)  # (iteration, backlog)
    horizon_too_short: bool = False

    @property
    def exceeds_two(self) -> bool:
        return self.backlog > 2


def generate_steep(config: SearchConfig, rng: np.random.Generator) -> BambooInstance:
    """Draw one steep instance: integer fast rates from the family ranges,
    n_slow slow bamboos of raw rate 1, all normalized by the exact total."""
    raws = [int(rng.integers(lo, hi + 1)) for lo, hi in config.ranges()]
    n_slow = int(rng.integers(config.n_slow[0], config.n_slow[1] + 1))
    total = sum(raws) + n_slow
    rates = tuple(Fraction(r, total) for r in raws) + (Fraction(1, total),) * n_slow
    name = f"{config.family}-{'-'.join(map(str, raws))}-s{n_slow}"
    return BambooInstance(name=name, rates=rates, slow_start=len(raws))


def _score(instance: BambooInstance, horizon: int) -> tuple[Fraction, int, bool]:
    run = simulate_fixed_rate(instance.rates, player="greedy", steps=horizon)
    backlog = run.backlog
    step = run.backlog_step
    # If the peak is still being attained at the very end, a longer horizon
    # could reveal a larger backlog.
    tail = bool((run.gmax_num[-1] == run.gmax_num.max()))
    return backlog, step, tail


def perturb(
    instance: BambooInstance, n_fast: int, sigma: float, rng: np.random.Generator
) -> BambooInstance:
    """Gaussian-perturb the fast rates, snapped to the 1e-7 grid.

    Deltas that all snap to zero return the instance unchanged (so
    sigma=0 is an exact no-op).  Otherwise every rate is re-expressed on
    the snap grid and the whole vector is renormalized exactly.
    """
    deltas = [int(round(rng.normal(0.0, sigma) * SNAP_DENOM)) for _ in range(n_fast)]
    if not any(deltas):
        return instance
    nums = [
        max(0, int(round(float(r) * SNAP_DENOM)) + d)
        for r, d in zip(instance.rates[:n_fast], deltas)
    ]
    slow_num = (
        int(round(float(instance.rates[n_fast]) * SNAP_DENOM))
        if len(instance.rates) > n_fast
        else 0
    )
    n_slow = len(instance.rates) - n_fast
    total = sum(nums) + n_slow * slow_num
    if total == 0:
        return instance
    rates = tuple(Fraction(v, total) for v in nums) + (Fraction(slow_num, total),) * n_slow
    return BambooInstance(name=instance.name, rates=rates, slow_start=instance.slow_start)


def hill_climb(start: BambooInstance, config: SearchConfig) -> SearchResult:
    """Greedy local search: accept a perturbed instance iff its backlog
    strictly increased.  Fully deterministic given (start, config)."""
    rng = np.random.default_rng(config.seed)
    n_fast = start.slow_start if start.slow_start is not None else len(start.rates)
    best = start
    backlog, step, tail = _score(start, config.horizon)
    lineage = [(0, format_ratio(backlog))]
    for it in range(1, config.iterations + 1):
        cand = perturb(best, n_fast, config.perturbation_sigma, rng)
        if cand is best:
            continue
        b, s, t = _score(cand, config.horizon)
        if b > backlog:
            best, backlog, step, tail = cand, b, s, t
            lineage.append((it, format_ratio(b)))
    return SearchResult(
        instance=best,
        backlog=backlog,
        backlog_step=step,
        horizon=config.horizon,
        seed=config.seed,
        lineage=lineage,
        horizon_too_short=tail,
    )


def search_seeds(config: SearchConfig, seeds: range | list[int]) -> list[SearchResult]:
    """Fresh-instance search: for each seed draw a steep instance and hill
    climb from it.  Results come back in seed order (deterministic)."""
    results = []
    for seed in seeds:
        cfg = SearchConfig(
            family=config.family,
            n_slow=config.n_slow,
            seed=seed,
            iterations=config.iterations,
            perturbation_sigma=config.perturbation_sigma,
            horizon=config.horizon,
            fast_ranges=config.fast_ranges,
        )
        rng = np.random.default_rng(seed)
        start = generate_steep(cfg, rng)
        results.append(hill_climb(start, cfg))
    return results


def replay_verify(result: SearchResult) -> bool:
    """Re-simulate the result's instance from scratch; the recorded backlog
    must match exactly."""
    backlog, step, _ = _score(result.instance, result.horizon)
    if backlog != result.backlog or step != result.backlog_step:
        raise ReplayMismatch(
            f"recorded backlog {result.backlog} @ {result.backlog_step}, "
            f"replay gives {backlog} @ {step}"
        )
    return True


# ---------------------------------------------------------------------------
# Results archive (JSON lines)
# ---------------------------------------------------------------------------

def result_to_json(result: SearchResult) -> dict:
    return {
        "instance": instance_to_json(result.instance),
        "backlog": format_ratio(result.backlog),
        "backlog_step": result.backlog_step,
        "horizon": result.horizon,
        "seed": result.seed,
        "lineage": [[it, b] for it, b in result.lineage],
        "horizon_too_short": result.horizon_too_short,
    }


def result_from_json(obj: dict) -> SearchResult:
    try:
        return SearchResult(
            instance=instance_from_json(obj["instance"]),
            backlog=parse_ratio(obj["backlog"]),
            backlog_step=obj["backlog_step"],
            horizon=obj["horizon"],
            seed=obj.get("seed", 0),
            lineage=[(it, b) for it, b in obj.get("lineage", [])],
            horizon_too_short=obj.get("horizon_too_short", False),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceParseError(f"bad search result: {exc}") from exc


def append_results(results: list[SearchResult], path) -> None:
    with open(path, "a") as fp:
        for r in results:
            fp.write(json.dumps(result_to_json(r)) + "\n")


def load_results(path) -> list[SearchResult]:
    out = []
    with open(path) as fp:
        for line in fp:
            if line.strip():
                out.append(result_from_json(json.loads(line)))
    return out
