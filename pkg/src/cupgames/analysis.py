"""Bound formulas, product/harmonic identities, the potential-function
monitor for the flushing game, and trace-invariant checkers.

The two lemma checkers verify, step by step and in exact rational
arithmetic, the prefix-average disjunctions that drive the backlog upper
bounds for semi-oblivious greedy.  The potential monitor integrates
exp(alpha * ln^2 x) numerically (this is the one deliberately approximate
corner of the package; everything it reports is labeled as such).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from scipy.integrate import quad

from .engine import FLUSH, MULTIPLICATIVE, Trace, replay_heights
from .errors import QuadratureNonConvergence, UnknownBound
from .rationals import floor_div

E_SQUARED = math.e**2


# ---------------------------------------------------------------------------
# Harmonic numbers and the rising-product identity
# ---------------------------------------------------------------------------

def harmonic(n: int) -> Fraction:
    """Exact n-th harmonic number."""
    if n < 1:
        raise ValueError("need n >= 1")
    total = Fraction(0)
    for i in range(1, n + 1):
        total += Fraction(1, i)
    return total


def harmonic_product(n: int, c: Fraction) -> Fraction:
    """Exact product of (1 + c/i) for i = 1..n; grows like n^c.

    Telescoping special cases: c=1 gives n+1, c=2 gives (n+1)(n+2)/2.
    The running numerator and denominator are kept unreduced so the loop
    stays linear in n; the single reduction happens in the returned
    Fraction.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    c = Fraction(c)
    if c <= -1:
        raise ValueError("need c > -1")
    p, q = c.numerator, c.denominator
    num = den = 1
    for i in range(1, n + 1):
        num *= q * i + p
        den *= q * i
    return Fraction(num, den)


def product_ratio_samples(c: Fraction, exponents: range) -> dict[int, float]:
    """Float ratios harmonic_product(n, c) / n^c at n = 2^k for k in
    ``exponents``.  One incremental pass; exact until the final division."""
    c = Fraction(c)
    p, q = c.numerator, c.denominator
    num = den = 1
    targets = {2**k for k in exponents}
    out: dict[int, float] = {}
    top = max(targets)
    for i in range(1, top + 1):
        num *= q * i + p
        den *= q * i
        if i in targets:
            out[i] = float(Fraction(num, den)) / i ** float(c)
    return out


# ---------------------------------------------------------------------------
# Concrete bound formulas (exact rationals)
# ---------------------------------------------------------------------------

def multiplicative_lb_bound(n: int, c: Fraction) -> Fraction:
    """(n-1) * prod_{i=1}^{n-3} ci/(ci+1) - 1; the drain-down adversary's
    final common height exceeds this."""
    c = Fraction(c)
    prod = Fraction(1)
    for i in range(1, n - 2):
        prod *= (c * i) / (c * i + 1)
    return (n - 1) * prod - 1


def multiplicative_upper_bound(n: int, c: Fraction) -> Fraction:
    """(c+1+c/(c-1)) * prod_{i=1}^{n-1} (1 + (c-1)/(ci)); no intermediate
    height of eligible greedy play ever exceeds it."""
    c = Fraction(c)
    prod = Fraction(1)
    for i in range(1, n):
        prod *= 1 + (c - 1) / (c * i)
    return (c + 1 + c / (c - 1)) * prod


def additive_lb_bound(n: int, c: Fraction) -> Fraction:
    """Sum_{i=1}^{n-1} (c+1)/(i+1); the additive drain-down adversary's
    final cup-0 height is at least this."""
    c = Fraction(c)
    total = Fraction(0)
    for i in range(1, n):
        total += (c + 1) / (i + 1)
    return total


def additive_upper_bound(n: int, c: Fraction) -> Fraction:
    """c + 2 + (c+1) * H(n-1); no intermediate height of additively
    eligible greedy play ever exceeds it."""
    c = Fraction(c)
    return c + 2 + (c + 1) * harmonic(n - 1)


def flushing_cups_needed(c: Fraction, generation: int) -> int:
    """prod_{j=0}^{generation} (ceil(c^j) + 1): enough starting cups for the
    flushing cohort cascade to reach that generation."""
    c = Fraction(c)
    prod = 1
    power = Fraction(1)
    for _ in range(generation + 1):
        prod *= -floor_div(-power) + 1  # ceil(power) + 1
        power *= c
    return prod


@dataclass(frozen=True)
class BoundSpec:
    name: str
    params: dict
    value: object  # Fraction for exact bounds, float for asymptotic scales
    exact: bool
    kind: str  # human-readable description


def bound_value(name: str, n: Optional[int] = None, c: Optional[Fraction] = None) -> BoundSpec:
    """Known backlog bounds by name.

    Exact entries carry rationals; asymptotic entries carry the growth
    scale as a float with no constant attached.
    """
    params = {"n": n, "c": c}
    if name == "optimal_cup":
        return BoundSpec(name, params, harmonic(n) + 1, True, "optimal cup-game backlog H(n)+1")
    if name == "optimal_bamboo":
        return BoundSpec(name, params, Fraction(2), True, "optimal fixed-rate backlog")
    if name == "greedy_bamboo_lower":
        return BoundSpec(name, params, Fraction(519, 250), True, "greedy bamboo lower bound 2.076")
    if name == "greedy_bamboo_upper":
        return BoundSpec(name, params, Fraction(4), True, "best known greedy bamboo upper bound")
    if name == "additive_upper":
        return BoundSpec(name, params, additive_upper_bound(n, c), True,
                         "additive-error greedy upper bound c+2+(c+1)H(n-1)")
    if name == "additive_lower":
        return BoundSpec(name, params, additive_lb_bound(n, c), True,
                         "additive-error adversary guarantee sum (c+1)/(i+1)")
    if name == "multiplicative_asymptotic":
        return BoundSpec(name, params, float(n) ** ((float(c) - 1) / float(c)), False,
                         "multiplicative-error greedy backlog scale n^((c-1)/c)")
    if name == "flushing_asymptotic":
        return BoundSpec(name, params, math.exp(math.sqrt(math.log(n))), False,
                         "flushing-game backlog scale e^sqrt(ln n)")
    raise UnknownBound(name)


BOUND_NAMES = (
    "optimal_cup",
    "optimal_bamboo",
    "greedy_bamboo_lower",
    "greedy_bamboo_upper",
    "additive_upper",
    "additive_lower",
    "multiplicative_asymptotic",
    "flushing_asymptotic",
)


# ---------------------------------------------------------------------------
# Potential function for the flushing game
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialParams:
    """Parameters of Phi(heights) = sum_j int_1^max(h_j,1) e^(a ln^2 x) dx.

    ``alpha`` is 1/(4 ln^2 c) with c clamped below at e^2 (the descent
    argument needs c >= e^2; smaller game error only makes the player
    stronger, so the e^2 monitor still applies).
    """

    c: float
    tolerance: float = 1e-10

    @property
    def c_effective(self) -> float:
        return max(float(self.c), E_SQUARED)

    @property
    def alpha(self) -> float:
        return 1.0 / (4.0 * math.log(self.c_effective) ** 2)

    @property
    def descent_threshold(self) -> float:
        return 4.0 * self.c_effective


def potential_integral(height: float, params: PotentialParams) -> float:
    """int_1^max(height,1) e^(alpha ln^2 x) dx by adaptive quadrature."""
    h = float(height)
    if h <= 1.0:
        return 0.0
    a = params.alpha
    val, err = quad(lambda x: math.exp(a * math.log(x) ** 2), 1.0, h,
                    epsabs=params.tolerance, epsrel=params.tolerance, limit=200)
    if err > 100 * params.tolerance * max(1.0, abs(val)):
        raise QuadratureNonConvergence(f"phi integral to {h}: error estimate {err}")
    return val


def potential(heights, params: PotentialParams) -> float:
    """Phi over a height vector (CupState or any iterable of rationals).

    Heights at or below 1 contribute nothing; equal heights share one
    integral evaluation.
    """
    if hasattr(heights, "heights"):
        heights = heights.heights
    cache: dict = {}
    total = 0.0
    for h in heights:
        if h <= 1:
            continue
        if h not in cache:
            cache[h] = potential_integral(float(h), params)
        total += cache[h]
    return total


# ---------------------------------------------------------------------------
# Lemma disjunction checkers
# ---------------------------------------------------------------------------

@dataclass
class Violation:
    t: int
    m: int
    lhs: Fraction
    rhs_same: Fraction
    rhs_shift: Fraction


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    scope_steps: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        head = f"{self.name}: {self.checked} checks over {self.scope_steps} in-scope steps"
        if self.ok:
            return head + " -- all hold"
        v = self.violations[0]
        return head + f" -- {len(self.violations)} violations, first at t={v.t}, m={v.m}"


def _sorted_prefix_sums(heights) -> list[Fraction]:
    """prefix_sums[m] = sum of the m largest heights (index 0 unused)."""
    ordered = sorted(heights, reverse=True)
    sums = [Fraction(0)]
    total = Fraction(0)
    for h in ordered:
        total += h
        sums.append(total)
    return sums


def check_lemma1(trace: Trace, c: Optional[Fraction] = None) -> CheckReport:
    """Multiplicative prefix-average disjunction, checked exactly.

    For every in-scope step t and every m < n, either the average of the m
    fullest intermediate heights did not grow, or
    g(t,m) + c/(c-1) <= (g(t-1,m+1) + c/(c-1)) * (1 + (c-1)/(cm)).

    A step is in scope when the previous step's intermediate max was at
    least c (then the previous removal took a full unit off a cup within a
    factor c of the max, which is what the disjunction needs).
    """
    if c is None:
        c = trace.spec.c
    c = Fraction(c)
    report = CheckReport(name="lemma-mult")
    shift = c / (c - 1)
    prev_sums = None
    prev_max = None
    n = trace.spec.n
    for rec, g, _f in replay_heights(trace):
        sums = _sorted_prefix_sums(g)
        if prev_sums is not None and prev_max >= c:
            report.scope_steps += 1
            for m in range(1, n):
                lhs = sums[m] / m
                rhs_same = prev_sums[m] / m
                rhs_shift = (prev_sums[m + 1] / (m + 1) + shift) * (1 + (c - 1) / (c * m)) - shift
                report.checked += 1
                if lhs > rhs_same and lhs > rhs_shift:
                    report.violations.append(Violation(rec.t, m, lhs, rhs_same, rhs_shift))
        prev_sums = sums
        prev_max = rec.intermediate_max
    return report


def check_lemma3(trace: Trace, c: Optional[Fraction] = None) -> CheckReport:
    """Additive prefix-average disjunction, checked exactly.

    Either g(t,m) <= g(t-1,m) or g(t,m) <= g(t-1,m+1) + (c+1)/m, for steps
    whose predecessor had intermediate max at least c+1.
    """
    if c is None:
        c = trace.spec.c
    c = Fraction(c)
    report = CheckReport(name="lemma-add")
    prev_sums = None
    prev_max = None
    n = trace.spec.n
    for rec, g, _f in replay_heights(trace):
        sums = _sorted_prefix_sums(g)
        if prev_sums is not None and prev_max >= c + 1:
            report.scope_steps += 1
            for m in range(1, n):
                lhs = sums[m] / m
                rhs_same = prev_sums[m] / m
                rhs_shift = prev_sums[m + 1] / (m + 1) + (c + 1) / m
                report.checked += 1
                if lhs > rhs_same and lhs > rhs_shift:
                    report.violations.append(Violation(rec.t, m, lhs, rhs_same, rhs_shift))
        prev_sums = sums
        prev_max = rec.intermediate_max
    return report


# ---------------------------------------------------------------------------
# Potential descent monitor
# ---------------------------------------------------------------------------

@dataclass
class DescentStep:
    t: int
    phi_before: float
    phi_after: float
    intermediate_max: float


@dataclass
class DescentReport:
    params: PotentialParams
    phi_start: float = 0.0
    descent_checked: int = 0
    cap_checked: int = 0
    violations: list = field(default_factory=list)
    cap_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.cap_violations and self.phi_start == 0.0

    def summary(self) -> str:
        return (
            f"potential descent: {self.descent_checked} descent steps, "
            f"{self.cap_checked} cap steps, "
            f"{len(self.violations)} + {len(self.cap_violations)} violations, "
            f"phi(0) = {self.phi_start}"
        )


def check_potential_descent(trace: Trace, params: Optional[PotentialParams] = None) -> DescentReport:
    """Monitor Phi along a flushing trace.

    Wherever the intermediate max reaches 4c, Phi must strictly decrease
    across the step (up to 10x the quadrature tolerance); wherever it does
    not, Phi must stay below n times the integral up to 4c.  Phi of the
    empty start state is exactly 0.
    """
    if trace.spec.removal != FLUSH:
        raise ValueError("potential descent applies to flushing traces")
    if params is None:
        if trace.spec.info != MULTIPLICATIVE:
            raise ValueError("pass PotentialParams explicitly for non-multiplicative traces")
        params = PotentialParams(c=float(trace.spec.c))
    report = DescentReport(params=params)
    margin = 10 * params.tolerance
    threshold = params.descent_threshold
    cap = trace.spec.n * potential_integral(threshold, params)
    phi_before = 0.0
    report.phi_start = phi_before
    for rec, g, f in replay_heights(trace):
        phi_after = potential(f, params)
        gmax = float(rec.intermediate_max)
        if gmax >= threshold:
            report.descent_checked += 1
            if not phi_after < phi_before + margin * max(1.0, phi_before):
                report.violations.append(DescentStep(rec.t, phi_before, phi_after, gmax))
        else:
            report.cap_checked += 1
            if not phi_after < cap + margin * max(1.0, cap):
                report.cap_violations.append(DescentStep(rec.t, phi_before, phi_after, gmax))
        phi_before = phi_after
    return report
