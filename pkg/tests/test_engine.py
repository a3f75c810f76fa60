"""Core engine: step operations, invariants, trace serialization."""

import io
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cupgames import (
    ADVERSARY_DIRECTED,
    EXACT,
    FLUSH,
    MULTIPLICATIVE,
    ADDITIVE,
    POST_INJECTION,
    POST_REMOVAL,
    UNIT_REMOVAL,
    CupState,
    GameSpec,
    GreedyPlayer,
    Observation,
    Trace,
    eligible_set,
    inject,
    prefix_averages,
    remove,
    run_game,
)
from cupgames.engine import read_trace, replay_heights, write_trace
from cupgames.errors import (
    EligibilityViolation,
    EstimateViolation,
    FillSumMismatch,
    IndexOutOfRange,
    NegativeFill,
    PhaseError,
    TraceParseError,
)


def state(heights, phase=POST_REMOVAL, t=0):
    return CupState(heights=tuple(Q(h) for h in heights), t=t, phase=phase)


# ---------------------------------------------------------------------------
# inject
# ---------------------------------------------------------------------------

def test_inject_basic():
    s = inject(state([0, 0]), (Q(1, 2), Q(1, 2)))
    assert s.heights == (Q(1, 2), Q(1, 2))
    assert s.phase == POST_INJECTION


def test_inject_adds_to_existing():
    s = inject(state([Q(3, 2), 0]), (Q(0), Q(1)))
    assert s.heights == (Q(3, 2), Q(1))


def test_inject_exactness_matches_integer_numerators():
    # Oracle: integer arithmetic on numerators over the common denominator
    # 10000: (1+5001, 1+3001, 1+1998).
    expected = (Q(5002, 10000), Q(3002, 10000), Q(1999, 10000))
    start = state([Q(1, 10000)] * 3)
    fill = (Q(5001, 10000), Q(3001, 10000), Q(1998, 10000))
    s = inject(start, fill)
    assert s.heights == expected
    assert sum(s.heights) == Q(3, 10000) + 1


def test_inject_rejects_bad_sum_and_negative():
    with pytest.raises(FillSumMismatch):
        inject(state([0, 0]), (Q(9, 10), Q(0)))
    with pytest.raises(NegativeFill):
        inject(state([0, 0]), (Q(3, 2), Q(-1, 2)))
    with pytest.raises(FillSumMismatch):
        inject(state([0, 0]), (Q(1),))  # wrong length


def test_inject_requires_post_removal():
    s = inject(state([0, 0]), (Q(1), Q(0)))
    with pytest.raises(PhaseError):
        inject(s, (Q(1), Q(0)))


def test_inject_discard_slot():
    s = inject(state([0, 0]), (Q(1, 4), Q(1, 4), Q(1, 2)), discard=True)
    assert s.heights == (Q(1, 4), Q(1, 4))


# ---------------------------------------------------------------------------
# remove
# ---------------------------------------------------------------------------

def test_remove_unit():
    spec = GameSpec(n=2, removal=UNIT_REMOVAL)
    s = state([Q(3, 2), Q(1, 4)], phase=POST_INJECTION)
    out = remove(s, 0, spec)
    assert out.heights == (Q(1, 2), Q(1, 4))
    assert out.phase == POST_REMOVAL and out.t == 1


def test_remove_unit_caps_at_height():
    spec = GameSpec(n=2, removal=UNIT_REMOVAL)
    out = remove(state([Q(3, 2), Q(1, 4)], phase=POST_INJECTION), 1, spec)
    assert out.heights == (Q(3, 2), Q(0))


def test_remove_flush():
    spec = GameSpec(n=2, removal=FLUSH)
    out = remove(state([Q(3, 2), Q(1, 4)], phase=POST_INJECTION), 0, spec)
    assert out.heights == (Q(0), Q(1, 4))


def test_remove_idle_and_bad_index():
    spec = GameSpec(n=2)
    s = state([Q(1), Q(0)], phase=POST_INJECTION)
    out = remove(s, None, spec)
    assert out.heights == s.heights and out.t == 1
    with pytest.raises(IndexOutOfRange):
        remove(s, 2, spec)


# ---------------------------------------------------------------------------
# prefix averages and eligible set
# ---------------------------------------------------------------------------

def test_prefix_averages():
    order, means = prefix_averages(state([4, 2, 1]))
    assert order == (0, 1, 2)
    assert means == (Q(4), Q(3), Q(7, 3))


def test_prefix_averages_symmetric_cases():
    assert prefix_averages(state([1, 1, 1]))[1] == (Q(1), Q(1), Q(1))
    assert prefix_averages(state([0, 0]))[1] == (Q(0), Q(0))


def test_prefix_averages_tie_order():
    order, _ = prefix_averages(state([2, 3, 3]))
    assert order == (1, 2, 0)


def test_eligible_set_multiplicative():
    spec = GameSpec(n=3, info=MULTIPLICATIVE, c=Q(2))
    s = state([4, 2, 1], phase=POST_INJECTION)
    assert eligible_set(s, spec) == {0, 1}


def test_eligible_set_additive():
    spec = GameSpec(n=3, info=ADDITIVE, c=Q(1))
    s = state([4, 2, 1], phase=POST_INJECTION)
    assert eligible_set(s, spec) == {0}


def test_eligible_set_all_equal():
    s = state([1, 1, 1], phase=POST_INJECTION)
    for spec in (GameSpec(n=3, info=MULTIPLICATIVE, c=Q(2)),
                 GameSpec(n=3, info=ADDITIVE, c=Q(1))):
        assert eligible_set(s, spec) == {0, 1, 2}


# ---------------------------------------------------------------------------
# run_game
# ---------------------------------------------------------------------------

class ConstantAdversary:
    def __init__(self, fill):
        self._fill = tuple(fill)

    def fill(self, state):
        return self._fill

    def observe(self, state):
        return None


def test_single_cup_game():
    spec = GameSpec(n=1)
    trace = run_game(spec, ConstantAdversary([Q(1)]), GreedyPlayer(), 5)
    assert trace.backlog == 1
    assert trace.backlog_step == 1
    assert all(r.post_removal_max == 0 for r in trace.records)


def test_run_game_records_and_dominance():
    spec = GameSpec(n=3)
    trace = run_game(spec, ConstantAdversary([Q(1, 2), Q(1, 3), Q(1, 6)]), GreedyPlayer(), 30)
    assert len(trace) == 30
    for rec in trace.records:
        assert rec.intermediate_max >= rec.post_removal_max
    assert trace.backlog == max(r.intermediate_max for r in trace.records)


def test_run_game_determinism():
    spec = GameSpec(n=3)
    t1 = run_game(spec, ConstantAdversary([Q(1, 2), Q(1, 3), Q(1, 6)]), GreedyPlayer(), 50)
    t2 = run_game(spec, ConstantAdversary([Q(1, 2), Q(1, 3), Q(1, 6)]), GreedyPlayer(), 50)
    assert t1.records == t2.records and t1.backlog == t2.backlog


class BadEstimateAdversary(ConstantAdversary):
    def observe(self, state):
        est = list(state.heights)
        est[0] = est[0] - Q(1, 100)  # below the true height
        return Observation(estimates=tuple(est), directed=None)


class BadDirectionAdversary(ConstantAdversary):
    def observe(self, state):
        # Direct at the emptiest cup with truthful estimates: ineligible.
        lo = min(range(len(state.heights)), key=lambda i: state.heights[i])
        return Observation(estimates=tuple(state.heights), directed=lo)


def test_estimate_sandwich_enforced():
    spec = GameSpec(n=2, info=MULTIPLICATIVE, c=Q(2))
    with pytest.raises(EstimateViolation):
        run_game(spec, BadEstimateAdversary([Q(1), Q(0)]), GreedyPlayer(), 3)


def test_eligibility_enforced():
    spec = GameSpec(n=2, info=MULTIPLICATIVE, c=Q(2), tiebreak=ADVERSARY_DIRECTED)
    with pytest.raises(EligibilityViolation):
        run_game(spec, BadDirectionAdversary([Q(1), Q(0)]), GreedyPlayer(), 5)


# ---------------------------------------------------------------------------
# Conservation / non-negativity properties
# ---------------------------------------------------------------------------

fills_strategy = st.lists(
    st.lists(st.integers(min_value=0, max_value=12), min_size=3, max_size=3).filter(
        lambda parts: sum(parts) > 0
    ),
    min_size=1,
    max_size=25,
)


@settings(max_examples=60, deadline=None)
@given(fills_strategy, st.sampled_from([UNIT_REMOVAL, FLUSH]))
def test_mass_conservation_and_nonnegativity(raw_fills, removal):
    spec = GameSpec(n=3, removal=removal)
    s = CupState.empty(3)
    total = Q(0)
    for parts in raw_fills:
        denom = sum(parts)
        fill = tuple(Q(p, denom) for p in parts)
        g = inject(s, fill)
        assert sum(g.heights) == total + 1
        assert all(h >= 0 for h in g.heights)
        chosen = max(range(3), key=lambda i: (g.heights[i], -i))
        before = g.heights[chosen]
        s = remove(g, chosen, spec)
        removed = min(Q(1), before) if removal == UNIT_REMOVAL else before
        assert sum(s.heights) == total + 1 - removed
        assert all(h >= 0 for h in s.heights)
        total = sum(s.heights)


# ---------------------------------------------------------------------------
# Trace serialization
# ---------------------------------------------------------------------------

def test_trace_roundtrip():
    spec = GameSpec(n=2, rates=(Q(2, 3), Q(1, 3)))
    trace = run_game(spec, ConstantAdversary([Q(2, 3), Q(1, 3)]), GreedyPlayer(), 12)
    buf = io.StringIO()
    write_trace(trace, buf)
    buf.seek(0)
    loaded = read_trace(buf)
    assert loaded.spec == trace.spec
    assert loaded.records == trace.records
    assert loaded.backlog == trace.backlog
    assert loaded.backlog_step == trace.backlog_step


def test_trace_trailer_mismatch_detected():
    spec = GameSpec(n=1)
    trace = run_game(spec, ConstantAdversary([Q(1)]), GreedyPlayer(), 3)
    buf = io.StringIO()
    write_trace(trace, buf)
    text = buf.getvalue().replace('"backlog": "1"', '"backlog": "2"')
    with pytest.raises(TraceParseError):
        read_trace(io.StringIO(text))


def test_replay_heights_reconstruction():
    spec = GameSpec(n=3)
    trace = run_game(spec, ConstantAdversary([Q(1, 2), Q(1, 4), Q(1, 4)]), GreedyPlayer(), 10)
    for rec, g, f in replay_heights(trace):
        assert max(g) == rec.intermediate_max
        assert max(f) == rec.post_removal_max


def test_empty_trace_file_rejected():
    with pytest.raises(TraceParseError):
        read_trace(io.StringIO(""))
