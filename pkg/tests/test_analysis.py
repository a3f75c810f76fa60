"""Bound formulas, products, the potential monitor, and lemma checkers."""

import math
from dataclasses import replace
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfi

from cupgames.analysis import (
    BOUND_NAMES,
    PotentialParams,
    additive_lb_bound,
    additive_upper_bound,
    bound_value,
    check_lemma1,
    check_lemma3,
    check_potential_descent,
    flushing_cups_needed,
    harmonic,
    harmonic_product,
    multiplicative_lb_bound,
    multiplicative_upper_bound,
    potential,
    potential_integral,
    product_ratio_samples,
)
from cupgames.engine import (
    ADVERSARY_DIRECTED,
    FLUSH,
    MULTIPLICATIVE,
    GameSpec,
    StepRecord,
    Trace,
    run_game,
)
from cupgames.errors import UnknownBound
from cupgames.players import GreedyPlayer
from cupgames.verify import run_additive_lb, run_cascade, run_multiplicative_lb


# ---------------------------------------------------------------------------
# harmonic numbers and products
# ---------------------------------------------------------------------------

def test_harmonic_values():
    assert harmonic(1) == 1
    assert harmonic(4) == Q(25, 12)
    assert harmonic(1) + 1 == 2  # optimal cup-game backlog at n=1


def test_harmonic_product_telescoping_examples():
    assert harmonic_product(7, Q(1)) == 8
    assert harmonic_product(5, Q(2)) == 21


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=400))
def test_harmonic_product_telescoping_property(n):
    assert harmonic_product(n, Q(1)) == n + 1
    assert harmonic_product(n, Q(2)) == Q((n + 1) * (n + 2), 2)


def test_product_ratio_stays_in_regression_window():
    ratios = product_ratio_samples(Q(1, 2), range(4, 11))
    assert all(1.12 <= r <= 1.16 for r in ratios.values())


def test_bound_values():
    assert bound_value("optimal_bamboo").value == 2
    assert bound_value("greedy_bamboo_lower").value == Q(519, 250)
    b = bound_value("additive_upper", n=5, c=Q(1))
    assert b.value == Q(1) + 2 + 2 * harmonic(4)
    assert bound_value("optimal_cup", n=4).value == Q(25, 12) + 1
    asym = bound_value("multiplicative_asymptotic", n=100, c=Q(2))
    assert not asym.exact and asym.value == pytest.approx(10.0)
    with pytest.raises(UnknownBound):
        bound_value("nonsense")
    for name in BOUND_NAMES:
        assert bound_value(name, n=10, c=Q(2)) is not None


def test_concrete_bound_formulas():
    assert multiplicative_lb_bound(4, Q(2)) == 1  # 3 * (2/3) - 1
    assert additive_lb_bound(3, Q(1)) == Q(5, 3)
    assert additive_upper_bound(3, Q(1)) == 1 + 2 + 2 * harmonic(2)
    # prod (1 + (c-1)/(ci)) at n=3, c=2: (1+1/2)(1+1/4) = 15/8
    assert multiplicative_upper_bound(3, Q(2)) == (2 + 1 + 2) * Q(15, 8)
    assert flushing_cups_needed(Q(4, 3), 0) == 2
    assert flushing_cups_needed(Q(4, 3), 2) == 2 * 3 * 3


# ---------------------------------------------------------------------------
# potential function
# ---------------------------------------------------------------------------

def closed_form_integral(h: float, alpha: float) -> float:
    """Independent oracle: int_1^h e^(a ln^2 x) dx via the imaginary error
    function (complete the square under u = ln x)."""
    if h <= 1:
        return 0.0
    root = math.sqrt(alpha)
    scale = math.sqrt(math.pi) / (2 * root) * math.exp(-1 / (4 * alpha))
    w0 = 1 / (2 * root)
    w1 = root * math.log(h) + w0
    return scale * (erfi(w1) - erfi(w0))


@pytest.mark.parametrize("c", [math.e**2, 10.0, 50.0])
@pytest.mark.parametrize("h", [1.5, 2.0, 7.0, 30.0])
def test_potential_matches_closed_form(c, h):
    params = PotentialParams(c=c)
    got = potential_integral(h, params)
    want = closed_form_integral(h, params.alpha)
    assert got == pytest.approx(want, rel=1e-9)


def test_potential_zero_cases():
    params = PotentialParams(c=10.0)
    assert potential([], params) == 0.0
    assert potential([Q(1), Q(1, 2), Q(0)], params) == 0.0


def test_potential_small_alpha_limit():
    # Huge c drives alpha toward 0 and the integrand toward 1, so Phi of a
    # single cup at height h approaches h - 1.
    params = PotentialParams(c=1e30)
    assert potential([Q(2)], params) == pytest.approx(1.0, abs=1e-3)


def test_potential_monotone_in_height():
    params = PotentialParams(c=8.0)
    lo = potential([Q(3), Q(2)], params)
    hi = potential([Q(7, 2), Q(2)], params)
    assert hi > lo


# ---------------------------------------------------------------------------
# lemma checkers
# ---------------------------------------------------------------------------

def test_lemma1_on_drain_down_traces():
    for n in (6, 10):
        trace, _ = run_multiplicative_lb(n, Q(2))
        rep = check_lemma1(trace)
        assert rep.ok
        assert rep.checked > 0


def test_lemma3_on_drain_down_traces():
    for n in (6, 10):
        trace, _ = run_additive_lb(n, Q(1))
        rep = check_lemma3(trace)
        assert rep.ok
        assert rep.checked > 0


def _hand_trace(c=Q(2)):
    """Hand-built 4-step trace (cup 0 pumped, then the fullest cup is the
    one removed): the final step is in scope and satisfies the first
    disjunct."""
    spec = GameSpec(n=2, info=MULTIPLICATIVE, c=c, tiebreak=ADVERSARY_DIRECTED)
    rows = [
        # (fill, chosen, intermediate_max, post_removal_max)
        ((Q(1), Q(0)), 1, Q(1), Q(1)),
        ((Q(1), Q(0)), 1, Q(2), Q(2)),
        ((Q(1), Q(0)), 0, Q(3), Q(2)),
        ((Q(0), Q(1)), 0, Q(2), Q(1)),
    ]
    records = [
        StepRecord(t=i + 1, fill=f, estimates=None, chosen=ch,
                   intermediate_max=gm, post_removal_max=fm)
        for i, (f, ch, gm, fm) in enumerate(rows)
    ]
    return Trace(spec=spec, records=records).finalize()


def test_lemma1_hand_trace_first_disjunct():
    rep = check_lemma1(_hand_trace(), Q(2))
    assert rep.ok
    assert rep.scope_steps >= 1


def test_lemma1_detects_corruption():
    trace, _ = run_multiplicative_lb(8, Q(2))
    records = list(trace.records)
    # Pump extra water into the top cup mid-run without rebalancing: the
    # replayed heights then break the disjunction.
    mid = len(records) // 2
    rec = records[mid]
    bad_fill = list(rec.fill)
    bad_fill[0] += Q(2)
    records[mid] = replace(rec, fill=tuple(bad_fill))
    bad = Trace(spec=trace.spec, records=records).finalize()
    rep = check_lemma1(bad, Q(2))
    assert not rep.ok


def test_lemma3_detects_corruption():
    trace, _ = run_additive_lb(8, Q(1))
    records = list(trace.records)
    mid = len(records) // 2
    rec = records[mid]
    bad_fill = list(rec.fill)
    bad_fill[0] += Q(2)
    records[mid] = replace(rec, fill=tuple(bad_fill))
    bad = Trace(spec=trace.spec, records=records).finalize()
    rep = check_lemma3(bad, Q(1))
    assert not rep.ok


# ---------------------------------------------------------------------------
# potential descent
# ---------------------------------------------------------------------------

class _PumpOneAdversary:
    """Everything into cup 0 (flushed immediately by exact greedy)."""

    def fill(self, state):
        return (Q(1),)

    def observe(self, state):
        return None


def test_descent_single_cup_game():
    spec = GameSpec(n=1, removal=FLUSH)
    trace = run_game(spec, _PumpOneAdversary(), GreedyPlayer(), 40)
    rep = check_potential_descent(trace, PotentialParams(c=8.0))
    assert rep.ok
    assert rep.descent_checked == 0  # max height 1 never nears 4c
    assert rep.phi_start == 0.0


def test_descent_on_cascade_is_nonvacuous():
    trace, _ = run_cascade(Q(739, 100), 2)
    rep = check_potential_descent(trace)
    assert rep.ok
    assert rep.descent_checked > 0
    assert rep.cap_checked > 0


def test_descent_requires_flushing():
    trace, _ = run_multiplicative_lb(5, Q(2))
    with pytest.raises(ValueError):
        check_potential_descent(trace, PotentialParams(c=8.0))
