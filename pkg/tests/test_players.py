"""Player strategies: greedy, deadline-driven, hybrid."""

from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cupgames import (
    ADVERSARY_DIRECTED,
    RateEstimate,
    deadline_select,
    greedy_select,
    hybrid_select,
)
from cupgames.players import make_player
from cupgames.engine import GameSpec


def q(items):
    return tuple(Q(x) for x in items)


# ---------------------------------------------------------------------------
# greedy
# ---------------------------------------------------------------------------

def test_greedy_argmax():
    assert greedy_select(q([Q(3, 10), Q(1, 2), 0])) == 1


def test_greedy_lowest_index_tie():
    assert greedy_select(q([1, 1, 0])) == 0


def test_greedy_adversary_directed_tie():
    heights = q([4, 2])
    estimates = q([4, 4])
    assert greedy_select(heights, estimates) == 0
    assert greedy_select(heights, estimates, tiebreak=ADVERSARY_DIRECTED, directed=1) == 1


def test_greedy_directed_cannot_override_strict_max():
    heights = q([4, 2])
    estimates = q([4, 3])
    assert greedy_select(heights, estimates, tiebreak=ADVERSARY_DIRECTED, directed=1) == 0


def test_greedy_chosen_attains_max():
    heights = q([Q(1, 3), Q(2, 3), Q(1, 2)])
    i = greedy_select(heights)
    assert heights[i] == max(heights)


# ---------------------------------------------------------------------------
# deadline-driven
# ---------------------------------------------------------------------------

def test_deadline_soonest_to_two():
    rates = RateEstimate(rates=q([Q(1, 10), Q(2, 5)]))
    # deadlines: (2 - 3/2)/(1/10) = 5 and (2 - 6/5)/(2/5) = 2
    assert deadline_select(q([Q(3, 2), Q(6, 5)]), rates) == 1


def test_deadline_requires_height_one():
    rates = RateEstimate(rates=q([Q(9, 10), Q(1, 100)]))
    assert deadline_select(q([Q(1, 2), Q(3, 2)]), rates) == 1


def test_deadline_noop_when_all_below_one():
    rates = RateEstimate(rates=q([Q(1, 2), Q(1, 2)]))
    assert deadline_select(q([Q(1, 2), Q(1, 2)]), rates) is None


def test_deadline_zero_rate_is_infinite():
    rates = RateEstimate(rates=q([0, Q(1, 100)]))
    assert deadline_select(q([Q(3, 2), Q(3, 2)]), rates) == 1


def test_deadline_overdue_cup_wins():
    rates = RateEstimate(rates=q([Q(1, 2), Q(1, 100)]))
    assert deadline_select(q([Q(3, 2), Q(5, 2)]), rates) == 1


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.integers(min_value=0, max_value=40), min_size=2, max_size=6),
    st.lists(st.integers(min_value=0, max_value=20), min_size=2, max_size=6),
)
def test_deadline_minimality(h_raw, r_raw):
    n = min(len(h_raw), len(r_raw))
    heights = tuple(Q(h, 10) for h in h_raw[:n])
    rates = RateEstimate(rates=tuple(Q(r, 40) for r in r_raw[:n]))
    choice = deadline_select(heights, rates)
    eligible = [i for i in range(n) if heights[i] >= 1]
    if not eligible:
        assert choice is None
        return
    assert choice in eligible

    def deadline(i):
        if heights[i] >= 2:
            return Q(0)
        if rates.rates[i] == 0:
            return None
        return (2 - heights[i]) / rates.rates[i]

    dc = deadline(choice)
    for j in eligible:
        dj = deadline(j)
        if dj is None:
            continue
        assert dc is not None and dc <= dj


# ---------------------------------------------------------------------------
# hybrid
# ---------------------------------------------------------------------------

def test_hybrid_deadline_branch():
    rates = RateEstimate(rates=q([Q(1, 10), Q(2, 5)]))
    assert hybrid_select(q([Q(3, 2), Q(6, 5)]), rates) == 1


def test_hybrid_greedy_branch_at_two():
    rates = RateEstimate(rates=q([Q(1, 10), Q(2, 5)]))
    assert hybrid_select(q([Q(5, 2), Q(6, 5)]), rates) == 0


def test_hybrid_noop_falls_back_to_greedy():
    rates = RateEstimate(rates=q([Q(1, 2), Q(1, 2)]))
    assert hybrid_select(q([Q(1, 2), Q(1, 2)]), rates) == 0


def test_hybrid_exact_boundary_uses_greedy():
    # max height exactly 2: the greedy branch.
    rates = RateEstimate(rates=q([Q(1, 100), Q(1, 2)]))
    assert hybrid_select(q([Q(1, 2), Q(2)]), rates) == 1


def test_make_player_names():
    spec = GameSpec(n=2, rates=(Q(1, 2), Q(1, 2)))
    for name in ("greedy", "deadline", "hybrid"):
        assert make_player(name, spec) is not None
    with pytest.raises(ValueError):
        make_player("nope", spec)


def test_rate_estimate_rejects_negative():
    with pytest.raises(ValueError):
        RateEstimate(rates=(Q(-1), Q(1)))
