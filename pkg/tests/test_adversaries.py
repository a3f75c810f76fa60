"""Adversary strategies: fixed-rate, scripted replay, and the three
constructive lower-bound adversaries."""

import io
from fractions import Fraction as Q

import pytest

from cupgames import (
    ADDITIVE,
    ADVERSARY_DIRECTED,
    FLUSH,
    MULTIPLICATIVE,
    UNIT_REMOVAL,
    AdditiveLBAdversary,
    FixedRateAdversary,
    FlushingLBAdversary,
    GameSpec,
    GreedyPlayer,
    MultiplicativeLBAdversary,
    ScriptedAdversary,
    run_game,
    simulate_flushing_lb,
    warmup_instance,
)
from cupgames.adversaries import PlannedCascadeAdversary, plan_cascade, plan_phase
from cupgames.analysis import additive_lb_bound, multiplicative_lb_bound
from cupgames.engine import read_trace, write_trace
from cupgames.errors import FillSumMismatch, RateSumExceedsOne
from cupgames.verify import run_additive_lb, run_flushing_lb, run_multiplicative_lb


# ---------------------------------------------------------------------------
# fixed-rate adversary
# ---------------------------------------------------------------------------

def test_fixed_rate_constant_fill():
    rates = warmup_instance().rates
    adv = FixedRateAdversary(rates)
    fill = adv.fill(None)
    assert fill == rates
    assert sum(fill) == 1
    assert adv.fill(None) is fill  # same tuple every step


def test_fixed_rate_single_cup():
    adv = FixedRateAdversary((Q(1),))
    assert adv.fill(None) == (Q(1),)


def test_fixed_rate_discard_pads_to_unit():
    adv = FixedRateAdversary((Q(1, 4), Q(1, 4)))
    assert adv.discard
    assert adv.fill(None) == (Q(1, 4), Q(1, 4), Q(1, 2))
    spec = GameSpec(n=2, rates=(Q(1, 4), Q(1, 4)), discard=True)
    trace = run_game(spec, adv, GreedyPlayer(), 8)
    # Only half a unit lands in the cups each step.
    assert trace.records[0].intermediate_max == Q(1, 4)


def test_fixed_rate_rejects_sum_above_one():
    with pytest.raises(RateSumExceedsOne):
        FixedRateAdversary((Q(3, 4), Q(1, 2)))


# ---------------------------------------------------------------------------
# multiplicative lower-bound adversary
# ---------------------------------------------------------------------------

def test_multiplicative_lb_small_exceeds_bound():
    trace, adv = run_multiplicative_lb(4, Q(2))
    # (n-1) * prod_{i=1}^{n-3} ci/(ci+1) = 3 * 2/3 = 2
    assert multiplicative_lb_bound(4, Q(2)) == 1
    assert adv.final_height + 1 > 2
    assert adv.final_height == Q(5, 2)  # deterministic construction
    assert trace.backlog >= adv.final_height


@pytest.mark.parametrize("n,c", [(10, Q(2)), (12, Q(3, 2)), (9, Q(3))])
def test_multiplicative_lb_exceeds_exact_product(n, c):
    _, adv = run_multiplicative_lb(n, c)
    prod = Q(1)
    for i in range(1, n - 2):
        prod *= (c * i) / (c * i + 1)
    assert adv.final_height + 1 > (n - 1) * prod


def test_multiplicative_lb_monotone_x_and_heights():
    _, adv = run_multiplicative_lb(10, Q(2))
    xs = sorted(adv.h_of_x)
    assert xs[0] == 1
    # Common heights shrink as more cups stay active.
    for lo, hi in zip(xs, xs[1:]):
        assert adv.h_of_x[lo] >= adv.h_of_x[hi]
        assert adv.t_of_x[lo] >= adv.t_of_x[hi]


def test_multiplicative_lb_rejects_bad_params():
    with pytest.raises(ValueError):
        MultiplicativeLBAdversary(3, Q(2))
    with pytest.raises(ValueError):
        MultiplicativeLBAdversary(10, Q(1))
    with pytest.raises(ValueError):
        MultiplicativeLBAdversary(4, Q(5, 4))  # transition step ineligible


# ---------------------------------------------------------------------------
# additive lower-bound adversary
# ---------------------------------------------------------------------------

def test_additive_lb_three_cups():
    _, adv = run_additive_lb(3, Q(1))
    assert additive_lb_bound(3, Q(1)) == Q(5, 3)
    assert adv.final_height >= Q(5, 3)


@pytest.mark.parametrize("c", [Q(1, 2), Q(1), Q(4)])
def test_additive_lb_two_cups(c):
    _, adv = run_additive_lb(2, c)
    assert adv.final_height >= (c + 1) / 2


def test_additive_lb_transition_gap_is_exactly_c():
    c = Q(1)
    trace, adv = run_additive_lb(6, c)
    for x, t in adv.t_of_x.items():
        rec = trace.records[t - 1]
        # The directed cup's estimate is its height plus c, and the common
        # height h(x) equals that estimate: g_0 - g_directed == c exactly.
        assert rec.estimates[rec.chosen] == adv.h_of_x[x]


def test_additive_lb_rejects_bad_params():
    with pytest.raises(ValueError):
        AdditiveLBAdversary(1, Q(1))
    with pytest.raises(ValueError):
        AdditiveLBAdversary(5, Q(0))


# ---------------------------------------------------------------------------
# flushing lower-bound adversary
# ---------------------------------------------------------------------------

def test_flushing_cohort_step_twelve_cups():
    # 12 cups at height 1 (n = 13 with the sacrificial cup): next cohort is
    # floor(12/2) = 6 cups at height 4/3.
    trace, adv = run_flushing_lb(13, Q(4, 3))
    counts = [(co.count, co.height) for co in adv.cohorts]
    assert counts[0] == (12, Q(1))
    assert counts[1] == (6, Q(4, 3))


def test_flushing_phase_plan():
    ph = plan_phase(12, Q(1), Q(4, 3))
    assert ph.s == 6
    assert ph.timing_ok  # 12 - 6 >= (1/3)*6 + 1


@pytest.mark.parametrize("n,c", [(13, Q(4, 3)), (40, Q(4, 3)), (77, Q(13, 10))])
def test_flushing_generic_matches_summary(n, c):
    trace, adv = run_flushing_lb(n, c)
    summary = simulate_flushing_lb(n, c)
    assert [(co.count, co.height) for co in adv.cohorts] == [
        (co.count, co.height) for co in summary.cohorts
    ]
    assert len(trace) == summary.total_steps
    assert trace.backlog == summary.backlog


def test_flushing_heights_are_powers_of_c():
    summary = simulate_flushing_lb(200, Q(4, 3))
    for co in summary.cohorts:
        assert co.height == Q(4, 3) ** co.generation


def test_flushing_rejects_bad_params():
    with pytest.raises(ValueError):
        FlushingLBAdversary(10, Q(8, 5))  # c >= 3/2
    with pytest.raises(ValueError):
        FlushingLBAdversary(2, Q(4, 3))


def test_planned_cascade_reaches_target_height():
    c = Q(739, 100)
    plan = plan_cascade(c, 2)
    adv = PlannedCascadeAdversary(c, 2)
    assert adv.n == plan[0] + 1
    spec = GameSpec(n=adv.n, removal=FLUSH, info=MULTIPLICATIVE, c=c,
                    tiebreak=ADVERSARY_DIRECTED)
    trace = run_game(spec, adv, GreedyPlayer(tiebreak=ADVERSARY_DIRECTED), 10**6)
    assert trace.backlog == c**2
    assert adv.cohorts[-1].count == 1


# ---------------------------------------------------------------------------
# scripted replay
# ---------------------------------------------------------------------------

def _small_lb_trace():
    trace, _ = run_multiplicative_lb(5, Q(2))
    return trace


def test_scripted_replay_reproduces_backlog():
    trace = _small_lb_trace()
    spec = trace.spec
    replay = run_game(
        spec, ScriptedAdversary.from_trace(trace),
        GreedyPlayer(tiebreak=ADVERSARY_DIRECTED), len(trace) + 10,
    )
    assert replay.backlog == trace.backlog
    assert replay.records == trace.records


def test_scripted_roundtrip_through_file():
    trace = _small_lb_trace()
    buf = io.StringIO()
    write_trace(trace, buf)
    buf.seek(0)
    loaded = read_trace(buf)
    replay = run_game(
        loaded.spec, ScriptedAdversary.from_trace(loaded),
        GreedyPlayer(tiebreak=ADVERSARY_DIRECTED), len(loaded) + 10,
    )
    assert replay.backlog == trace.backlog


def test_scripted_empty_script():
    spec = GameSpec(n=2)
    trace = run_game(spec, ScriptedAdversary([]), GreedyPlayer(), 100)
    assert len(trace) == 0
    assert trace.backlog == 0


def test_scripted_tampered_fill_rejected():
    from dataclasses import replace

    trace = _small_lb_trace()
    records = list(trace.records)
    records[0] = replace(records[0], fill=tuple(f * Q(9, 10) for f in records[0].fill))
    with pytest.raises(FillSumMismatch):
        run_game(trace.spec, ScriptedAdversary(records),
                 GreedyPlayer(tiebreak=ADVERSARY_DIRECTED), 5)
