"""Named verification suites: each one bundles related checks and reports
pass/fail per check.  The command line exposes them via ``verify --suite``;
the acceptance tests run the same code at their mandated scales.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import analysis
from .adversaries import (
    AdditiveLBAdversary,
    FlushingLBAdversary,
    MultiplicativeLBAdversary,
    PlannedCascadeAdversary,
    simulate_flushing_lb,
)
from .analysis import (
    PotentialParams,
    additive_lb_bound,
    additive_upper_bound,
    check_lemma1,
    check_lemma3,
    check_potential_descent,
    flushing_cups_needed,
    harmonic,
    harmonic_product,
    multiplicative_lb_bound,
    multiplicative_upper_bound,
    potential,
)
from .engine import (
    ADDITIVE,
    ADVERSARY_DIRECTED,
    FLUSH,
    MULTIPLICATIVE,
    UNIT_REMOVAL,
    GameSpec,
    Trace,
    run_game,
)
from .fuzz import (
    RandomEligibleAdversary,
    check_lemma1_batch,
    check_lemma3_batch,
    fuzz_batch,
)
from .instances import check_timeline, main_instance, run_instance, warmup_instance
from .players import GreedyPlayer
from .rationals import floor_div, format_ratio

Q = Fraction


@dataclass
class SuiteReport:
    name: str
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def add(self, label: str, ok: bool, detail: str = "") -> None:
        self.checks.append((label, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def summary(self) -> str:
        lines = [f"suite {self.name}: {'PASS' if self.ok else 'FAIL'}"]
        for label, ok, detail in self.checks:
            lines.append(f"  [{'pass' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Shared run helpers
# ---------------------------------------------------------------------------

def run_multiplicative_lb(n: int, c: Fraction) -> tuple[Trace, MultiplicativeLBAdversary]:
    spec = GameSpec(n=n, removal=UNIT_REMOVAL, info=MULTIPLICATIVE, c=c,
                    tiebreak=ADVERSARY_DIRECTED)
    adv = MultiplicativeLBAdversary(n, c)
    trace = run_game(spec, adv, GreedyPlayer(tiebreak=ADVERSARY_DIRECTED), 10**7)
    return trace, adv


def run_additive_lb(n: int, c: Fraction) -> tuple[Trace, AdditiveLBAdversary]:
    spec = GameSpec(n=n, removal=UNIT_REMOVAL, info=ADDITIVE, c=c,
                    tiebreak=ADVERSARY_DIRECTED)
    adv = AdditiveLBAdversary(n, c)
    trace = run_game(spec, adv, GreedyPlayer(tiebreak=ADVERSARY_DIRECTED), 10**7)
    return trace, adv


def run_flushing_lb(n: int, c: Fraction) -> tuple[Trace, FlushingLBAdversary]:
    spec = GameSpec(n=n, removal=FLUSH, info=MULTIPLICATIVE, c=c,
                    tiebreak=ADVERSARY_DIRECTED)
    adv = FlushingLBAdversary(n, c)
    trace = run_game(spec, adv, GreedyPlayer(tiebreak=ADVERSARY_DIRECTED), 10**7)
    return trace, adv


def run_cascade(c: Fraction, generations: int) -> tuple[Trace, PlannedCascadeAdversary]:
    adv = PlannedCascadeAdversary(c, generations)
    spec = GameSpec(n=adv.n, removal=FLUSH, info=MULTIPLICATIVE, c=c,
                    tiebreak=ADVERSARY_DIRECTED)
    trace = run_game(spec, adv, GreedyPlayer(tiebreak=ADVERSARY_DIRECTED), 10**7)
    return trace, adv


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def _telescoping_all(n_max: int) -> tuple[bool, bool]:
    """Check product(n,1) == n+1 and product(n,2) == (n+1)(n+2)/2 for every
    n up to n_max (reduced incremental products; telescoping keeps them
    tiny, so this is one cheap pass)."""
    p1, p2 = Q(1), Q(1)
    ok1 = ok2 = True
    for i in range(1, n_max + 1):
        p1 *= 1 + Q(1, i)
        p2 *= 1 + Q(2, i)
        ok1 = ok1 and p1 == i + 1
        ok2 = ok2 and p2 == Q((i + 1) * (i + 2), 2)
    return ok1, ok2


def suite_fact1(n_exact: int = 10**4, exponents: range = range(4, 17)) -> SuiteReport:
    """Telescoping identities of the rising product, and ratio stability of
    product/n^c across scales (frozen regression interval)."""
    rep = SuiteReport("fact1")
    ok1, ok2 = _telescoping_all(n_exact)
    rep.add(f"product(n,1) == n+1 for every n <= {n_exact}", ok1)
    rep.add(f"product(n,2) == (n+1)(n+2)/2 for every n <= {n_exact}", ok2)
    rep.add(
        "harmonic_product agrees at the endpoint",
        harmonic_product(n_exact, Q(1)) == n_exact + 1
        and harmonic_product(n_exact, Q(2)) == Q((n_exact + 1) * (n_exact + 2), 2),
    )
    for c, lo, hi in RATIO_REGRESSION:
        ratios = analysis.product_ratio_samples(c, exponents)
        worst_lo, worst_hi = min(ratios.values()), max(ratios.values())
        rep.add(
            f"ratio product/n^{c} within [{lo}, {hi}]",
            lo <= worst_lo and worst_hi <= hi,
            f"observed [{worst_lo:.6f}, {worst_hi:.6f}]",
        )
    return rep


# Frozen regression bounds for the ratio product(n,c)/n^c over n = 2^4..2^16
# (measured once; the ratio drifts monotonically toward its limit, so any
# future drift outside these windows indicates a regression).
RATIO_REGRESSION = (
    (Q(1, 2), 1.12, 1.16),
    (Q(3, 2), 0.75, 0.85),
)


def suite_bounds(
    mult_params=((10, Q(2)),),
    add_params=((10, Q(1)),),
    flush_params=((100, Q(4, 3)),),
) -> SuiteReport:
    """Constructive adversaries versus their exactly-computed guarantees."""
    rep = SuiteReport("bounds")
    for n, c in mult_params:
        trace, adv = run_multiplicative_lb(n, c)
        bound = multiplicative_lb_bound(n, c)
        upper = multiplicative_upper_bound(n, c)
        rep.add(
            f"multiplicative n={n} c={c}: h(1) > bound",
            adv.final_height > bound,
            f"h(1)={format_ratio(adv.final_height)} vs {format_ratio(bound)}",
        )
        rep.add(
            f"multiplicative n={n} c={c}: backlog <= inductive bound",
            trace.backlog <= upper,
            f"backlog={format_ratio(trace.backlog)} vs {format_ratio(upper)}",
        )
    for n, c in add_params:
        trace, adv = run_additive_lb(n, c)
        bound = additive_lb_bound(n, c)
        upper = additive_upper_bound(n, c)
        rep.add(
            f"additive n={n} c={c}: h(1) >= bound",
            adv.final_height >= bound,
            f"h(1)={format_ratio(adv.final_height)} vs {format_ratio(bound)}",
        )
        rep.add(
            f"additive n={n} c={c}: backlog <= upper bound",
            trace.backlog <= upper,
            f"backlog={format_ratio(trace.backlog)} vs {format_ratio(upper)}",
        )
    for n, c in flush_params:
        summary = simulate_flushing_lb(n, c)
        sizes_ok = all(
            ph.s == floor_div(Fraction(ph.k) / (ph.x + 1)) for ph in summary.phases
        )
        heights_ok = all(co.height == c**co.generation for co in summary.cohorts)
        timing_ok = all(ph.timing_ok for ph in summary.phases)
        rep.add(
            f"flushing n={n} c={c}: cohort sizes follow floor(k/(x+1))",
            sizes_ok,
            f"sizes={[co.count for co in summary.cohorts]}",
        )
        rep.add(f"flushing n={n} c={c}: cohort heights are c^i", heights_ok)
        rep.add(f"flushing n={n} c={c}: pump timing slack holds", timing_ok)
        # Sufficiency of the cups-needed product: starting from exactly that
        # many cups must reach the generation.
        suff = []
        for g in range(1, len(summary.cohorts)):
            k0 = flushing_cups_needed(c, g)
            if k0 > 10**5:
                break
            sub = simulate_flushing_lb(k0 + 1, c)
            suff.append(max(co.generation for co in sub.cohorts) >= g)
        rep.add(
            f"flushing c={c}: cups-needed product suffices per generation",
            all(suff),
            f"checked generations 1..{len(suff)}",
        )
    return rep


def suite_lemmas(
    lb_ns=(6, 12),
    fuzz_games: int = 100,
    fuzz_steps: int = 120,
    fuzz_n: int = 5,
    seed: int = 0,
) -> SuiteReport:
    """Prefix-average disjunctions on lower-bound traces and fuzzed play."""
    rep = SuiteReport("lemmas")
    for n in lb_ns:
        c = Q(2)
        trace, _ = run_multiplicative_lb(n, c)
        r = check_lemma1(trace, c)
        rep.add(f"lemma-mult on drain-down n={n}", r.ok, r.summary())
        c = Q(1)
        trace, _ = run_additive_lb(n, c)
        r = check_lemma3(trace, c)
        rep.add(f"lemma-add on drain-down n={n}", r.ok, r.summary())
    cm, ca = Q(2), Q(1)
    batch = fuzz_batch(fuzz_n, fuzz_steps, fuzz_games, seed, info=MULTIPLICATIVE,
                       c=cm, record=True)
    v, k = check_lemma1_batch(batch.ghist, batch.denom, cm)
    rep.add(f"lemma-mult on {fuzz_games} fuzz games", v == 0, f"{v} violations / {k} checks")
    batch = fuzz_batch(fuzz_n, fuzz_steps, fuzz_games, seed + 1, info=ADDITIVE,
                       c=ca, record=True)
    v, k = check_lemma3_batch(batch.ghist, batch.denom, ca)
    rep.add(f"lemma-add on {fuzz_games} fuzz games", v == 0, f"{v} violations / {k} checks")
    return rep


def suite_potential(
    fuzz_traces: int = 20,
    fuzz_steps: int = 150,
    fuzz_n: int = 6,
    seed: int = 0,
    cascade_generations: int = 2,
) -> SuiteReport:
    """Potential monitor over flushing traces.

    Fuzzed traces rarely climb past the 4c descent threshold (their
    descent checks are then vacuous but the O(n) cap still binds); the
    planned cascade traces clear the threshold, making the strict-descent
    assertion bite.
    """
    rep = SuiteReport("potential")
    c_big = Q(739, 100)  # just above e^2
    params = PotentialParams(c=float(c_big))
    rep.add("phi of the empty state is exactly 0", potential([], params) == 0.0)
    all_ok = True
    for i in range(fuzz_traces):
        spec = GameSpec(n=fuzz_n, removal=FLUSH, info=MULTIPLICATIVE, c=c_big,
                        tiebreak=ADVERSARY_DIRECTED)
        adv = RandomEligibleAdversary(spec, seed=seed + i)
        trace = run_game(spec, adv, GreedyPlayer(tiebreak=ADVERSARY_DIRECTED), fuzz_steps)
        r = check_potential_descent(trace, params)
        all_ok = all_ok and r.ok
    rep.add(f"descent/cap on {fuzz_traces} fuzzed flushing traces", all_ok)
    # Clamped regime: game error below e^2, monitor clamped at e^2.
    trace, _ = run_flushing_lb(60, Q(4, 3))
    r = check_potential_descent(trace, PotentialParams(c=float(Q(4, 3))))
    rep.add("clamped monitor on floor-rule cascade (c=4/3)", r.ok, r.summary())
    trace, _ = run_cascade(c_big, cascade_generations)
    r = check_potential_descent(trace, params)
    rep.add(
        "strict descent on planned cascade",
        r.ok and r.descent_checked > 0,
        r.summary(),
    )
    return rep


def suite_instances(hybrid_steps: int = 20000) -> SuiteReport:
    """Hard assertions of the two bundled counterexample instances."""
    rep = SuiteReport("instances")
    for inst, steps in ((warmup_instance(), 13000), (main_instance(), 16000)):
        rep.add(f"{inst.name}: rates sum to exactly 1", inst.rate_sum() == 1)
        run = run_instance(inst, "greedy", steps)
        rep.add(
            f"{inst.name}: greedy backlog == {format_ratio(inst.expected_backlog)}",
            run.backlog == inst.expected_backlog,
            f"got {format_ratio(run.backlog)} at step {run.backlog_step}",
        )
        rep.add(
            f"{inst.name}: backlog step within +/-3 of {inst.expected_backlog_step}",
            abs(run.backlog_step - inst.expected_backlog_step) <= 3,
            f"step {run.backlog_step}",
        )
        tl = check_timeline(run, inst)
        rep.add(f"{inst.name}: timeline hard events", tl.hard_ok)
        rep.add(
            f"{inst.name}: timeline soft events",
            not tl.soft_misses,
            f"{len(tl.soft_misses)} soft misses",
        )
        for player in ("hybrid", "deadline"):
            prun = run_instance(inst, player, hybrid_steps)
            below = bool((prun.gmax_num < 2 * prun.denominator).all())
            rep.add(
                f"{inst.name}: {player} keeps every step below 2 for {hybrid_steps} steps",
                below,
                f"peak {format_ratio(prun.backlog)}",
            )
    return rep


SUITES = {
    "fact1": suite_fact1,
    "bounds": suite_bounds,
    "lemmas": suite_lemmas,
    "potential": suite_potential,
    "instances": suite_instances,
}


def run_suite(name: str, **kwargs) -> SuiteReport:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; have {sorted(SUITES)}")
    return fn(**kwargs)
