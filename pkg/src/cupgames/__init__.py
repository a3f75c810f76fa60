"""Exact-arithmetic cup games and bamboo trimming: simulator, strategies,
constructive adversaries, and bound/invariant verification."""

from .engine import (
    ADDITIVE,
    ADVERSARY_DIRECTED,
    EXACT,
    FLUSH,
    LOWEST_INDEX,
    MULTIPLICATIVE,
    POST_INJECTION,
    POST_REMOVAL,
    UNIT_REMOVAL,
    CupState,
    GameSpec,
    Observation,
    StepRecord,
    Trace,
    eligible_set,
    inject,
    load_trace,
    prefix_averages,
    remove,
    run_game,
    save_trace,
)
from .players import (
    DeadlineDrivenPlayer,
    GreedyPlayer,
    HybridPlayer,
    RateEstimate,
    deadline_select,
    greedy_select,
    hybrid_select,
    make_player,
)
from .adversaries import (
    AdditiveLBAdversary,
    FixedRateAdversary,
    FlushingCohort,
    FlushingLBAdversary,
    FlushingSummary,
    MultiplicativeLBAdversary,
    ScriptedAdversary,
    additive_lb_adversary,
    flushing_lb_adversary,
    multiplicative_lb_adversary,
    scripted_adversary,
    simulate_flushing_lb,
)
from .bamboosim import FixedRateRun, run_to_trace, simulate_fixed_rate
from .instances import (
    BambooInstance,
    check_timeline,
    get_instance,
    load_instance,
    main_instance,
    run_instance,
    save_instance,
    warmup_instance,
)

__version__ = "0.1.0"
