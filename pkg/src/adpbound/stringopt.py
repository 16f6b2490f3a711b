"""Greedy string optimization with curvature-based performance guarantees.

A string objective maps ordered action sequences to values, with the empty
string worth 0.  This module provides the greedy and brute-force-optimal
strategies over a fixed horizon, exhaustive checkers for the prefix-monotone
and diminishing-return properties, two curvature statistics measured along the
greedy trajectory, and the closed-form lower bound on the greedy/optimal value
ratio that those curvatures certify.

Everything here is exhaustive and deterministic: argmax ties break toward the
smallest action index, enumerations run in lexicographic order, and budget
guards refuse enumerations larger than the configured number of evaluations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .common import (
    DEFAULT_BUDGET,
    DENOM_TOL,
    ETA_ZERO_TOL,
    VALUE_TOL,
    GuaranteeViolationError,
    UndefinedCurvatureError,
    ensure_budget,
)

ActionString = tuple[int, ...]

__all__ = [
    "ActionString",
    "StringObjective",
    "GreedyTrace",
    "CurvatureReport",
    "InequalityCheck",
    "greedy_string",
    "optimal_string_bruteforce",
    "check_prefix_monotone",
    "check_diminishing_return",
    "total_curvature_eta",
    "forward_curvature_sigma",
    "curvature_bound",
    "asymptotic_curvature_bound",
    "greedy_guarantee_report",
    "greedy_recursion_checks",
]


@dataclass(frozen=True)
class StringObjective:
    """A deterministic objective over action strings with a fixed ground set.

    ``evaluate`` must map any tuple of action indices (below ``ground_size``)
    to a value, return 0 for the empty string, and be deterministic.
    ``horizon`` records the intended maximum string length.
    """

    evaluate: Callable[[ActionString], float]
    ground_size: int
    horizon: int

    def __post_init__(self) -> None:
        if self.ground_size < 1:
            raise ValueError("ground set must contain at least one action")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        empty = float(self.evaluate(()))
        if empty != 0.0:
            raise ValueError(f"objective must map the empty string to 0, got {empty}")


@dataclass(frozen=True)
class GreedyTrace:
    """Greedy strategy of length K plus the evidence gathered while building it.

    ``prefix_values[i]`` is the objective value of the first ``i + 1`` greedy
    actions.  ``tie_sets[i]`` lists every action achieving the stage maximum;
    the chosen action is always its smallest member.
    """

    string: ActionString
    prefix_values: tuple[float, ...]
    tie_sets: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class CurvatureReport:
    """Everything the greedy-ratio guarantee produces for one objective.

    ``bound_finite_K`` is the horizon-K guarantee and ``bound_asymptotic`` its
    large-horizon limit; both are NaN when the underlying curvature maximum
    had no valid terms (see ``flags``).  ``ratio`` is greedy/optimal, reported
    as 1 with a flag when both values are 0.
    """

    eta: float
    sigma: float
    bound_finite_K: float
    bound_asymptotic: float
    greedy_value: float
    optimal_value: float
    ratio: float
    prefix_monotone: bool
    diminishing_return: bool
    eta_nonpositive: bool
    skipped_terms: int
    flags: tuple[str, ...]


@dataclass(frozen=True)
class InequalityCheck:
    """One verified inequality linking greedy prefix values to the optimum."""

    label: str
    stage: Optional[int]
    lhs: float
    rhs: float
    slack: float
    satisfied: bool


def _cached_evaluator(objective: StringObjective) -> Callable[[ActionString], float]:
    # Per-call memo; safe because objectives are deterministic by contract.
    memo: dict[ActionString, float] = {}
    raw = objective.evaluate

    def evaluate(string: ActionString) -> float:
        value = memo.get(string)
        if value is None:
            value = float(raw(string))
            memo[string] = value
        return value

    return evaluate


def _greedy(ev: Callable[[ActionString], float], ground_size: int, horizon: int) -> GreedyTrace:
    string: ActionString = ()
    prefix_values: list[float] = []
    tie_sets: list[tuple[int, ...]] = []
    for _ in range(horizon):
        best_value: Optional[float] = None
        for action in range(ground_size):
            value = ev(string + (action,))
            if best_value is None or value > best_value:
                best_value = value
        ties = tuple(
            action
            for action in range(ground_size)
            if ev(string + (action,)) == best_value
        )
        string = string + (ties[0],)
        prefix_values.append(ev(string))
        tie_sets.append(ties)
    return GreedyTrace(string=string, prefix_values=tuple(prefix_values), tie_sets=tuple(tie_sets))


def greedy_string(f: StringObjective, horizon: int) -> GreedyTrace:
    """Build the greedy strategy of length ``horizon``.

    Stage ``i`` appends the action maximizing the objective of the extended
    prefix; ties break toward the smallest action index and the full tie set
    is recorded.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if f.ground_size < 1:
        raise ValueError("ground set must contain at least one action")
    return _greedy(_cached_evaluator(f), f.ground_size, horizon)


def _bruteforce(
    ev: Callable[[ActionString], float],
    ground_size: int,
    horizon: int,
    budget: int,
) -> tuple[ActionString, float]:
    required = ground_size**horizon
    ensure_budget(required, budget, "brute-force string search")
    best_string: Optional[ActionString] = None
    best_value = -math.inf
    for candidate in itertools.product(range(ground_size), repeat=horizon):
        value = ev(candidate)
        if value > best_value:
            best_string = candidate
            best_value = value
    assert best_string is not None
    return best_string, best_value


def optimal_string_bruteforce(
    f: StringObjective, horizon: int, budget: int = DEFAULT_BUDGET
) -> tuple[ActionString, float]:
    """Exhaustively maximize ``f`` over strings of length exactly ``horizon``.

    Ties break lexicographically.  Restricting to full-length strings loses
    nothing for prefix-monotone objectives; diagnostics on other objectives
    should note the restriction.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    return _bruteforce(_cached_evaluator(f), f.ground_size, horizon, budget)


def _all_strings(ground_size: int, max_len: int):
    for length in range(1, max_len + 1):
        yield from itertools.product(range(ground_size), repeat=length)


def check_prefix_monotone(
    f: StringObjective,
    horizon: int,
    budget: int = DEFAULT_BUDGET,
    tol: float = VALUE_TOL,
) -> tuple[bool, Optional[tuple[ActionString, ActionString]]]:
    """Exhaustively test whether extending any string can lower the objective.

    Checks every pair (prefix, string) with string length up to ``horizon``,
    including the empty prefix (so nonnegativity is covered).  Returns the
    first witness pair on failure.
    """
    m = f.ground_size
    required = sum((n + 1) * m**n for n in range(1, horizon + 1))
    ensure_budget(required, budget, "prefix-monotonicity check")
    ev = _cached_evaluator(f)
    for string in _all_strings(m, horizon):
        value = ev(string)
        for cut in range(len(string)):
            prefix = string[:cut]
            if value < ev(prefix) - tol:
                return False, (prefix, string)
    return True, None


def check_diminishing_return(
    f: StringObjective,
    horizon: int,
    budget: int = DEFAULT_BUDGET,
    tol: float = VALUE_TOL,
) -> tuple[bool, Optional[tuple[ActionString, ActionString, int]]]:
    """Exhaustively test whether marginal gains can grow along prefix extensions.

    For every prefix pair M of N with |N| <= horizon - 1 and every action a,
    requires gain of a at M >= gain of a at N.  Returns a witness (M, N, a)
    on failure.
    """
    m = f.ground_size
    required = sum((n + 1) * m**n * m for n in range(horizon))
    ensure_budget(required, budget, "diminishing-return check")
    ev = _cached_evaluator(f)
    for length in range(horizon):
        for longer in itertools.product(range(m), repeat=length):
            gain_long = [ev(longer + (a,)) - ev(longer) for a in range(m)]
            for cut in range(length):
                shorter = longer[:cut]
                for action in range(m):
                    if ev(shorter + (action,)) - ev(shorter) < gain_long[action] - tol:
                        return False, (shorter, longer, action)
    return True, None


def _eta(
    ev: Callable[[ActionString], float],
    trace: GreedyTrace,
    ground_size: int,
    horizon: int,
    budget: int,
) -> tuple[float, int]:
    if horizon < 2:
        raise UndefinedCurvatureError("total curvature has no terms for a single-stage horizon")
    full_count = ground_size**horizon
    ensure_budget((horizon - 1) * full_count, budget, "total-curvature enumeration")
    full_strings = list(itertools.product(range(ground_size), repeat=horizon))
    full_values = [ev(s) for s in full_strings]
    best = -math.inf
    skipped = 0
    for i in range(1, horizon):
        denom = trace.prefix_values[i - 1]
        if denom <= 0.0:
            skipped += full_count
            continue
        head = trace.string[:i]
        scale = horizon / (horizon - i)
        frac = (horizon - i) / horizon
        for string, value in zip(full_strings, full_values):
            spliced = ev(head + string[i:])
            term = scale * (1.0 - (spliced - frac * value) / denom)
            if term > best:
                best = term
    if best == -math.inf:
        raise UndefinedCurvatureError("every total-curvature term was skipped")
    return best, skipped


def total_curvature_eta(
    f: StringObjective,
    greedy: GreedyTrace,
    horizon: int,
    budget: int = DEFAULT_BUDGET,
) -> tuple[float, int]:
    """Worst-case total curvature of ``f`` along the greedy trajectory.

    Maximizes, over every full-length string M and every split stage i, the
    normalized shortfall of the spliced value f((G_{1:i}, M_{i+1:K})) against
    the proportional share of f(M), measured relative to f(G_{1:i}).  Splits
    whose greedy prefix value is not strictly positive are skipped and
    counted; if nothing survives the curvature is undefined.
    """
    return _eta(_cached_evaluator(f), greedy, f.ground_size, horizon, budget)


def _sigma_required(ground_size: int, horizon: int) -> int:
    return sum(
        ground_size ** (j - i)
        for i in range(horizon)
        for j in range(i + 1, horizon + 1)
    )


def _sigma(
    ev: Callable[[ActionString], float],
    trace: GreedyTrace,
    ground_size: int,
    horizon: int,
    budget: int,
    tol: float,
) -> tuple[float, int]:
    ensure_budget(_sigma_required(ground_size, horizon), budget, "forward-curvature enumeration")
    best = -math.inf
    skipped = 0
    for i in range(horizon):
        head = trace.string[:i]
        base = ev(head)
        for j in range(i + 1, horizon + 1):
            for block in itertools.product(range(ground_size), repeat=j - i):
                denom = ev(head + block) - ev(head + block[:-1])
                if denom <= tol:
                    skipped += 1
                    continue
                numer = ev(head + (block[-1],)) - base
                term = 1.0 - numer / denom
                if term > best:
                    best = term
    if best == -math.inf:
        raise UndefinedCurvatureError("every forward-curvature term was skipped")
    return best, skipped


def forward_curvature_sigma(
    f: StringObjective,
    greedy: GreedyTrace,
    horizon: int,
    budget: int = DEFAULT_BUDGET,
    tol: float = DENOM_TOL,
) -> tuple[float, int]:
    """Worst-case forward curvature of ``f`` along the greedy trajectory.

    For every greedy prefix G_{1:i}, block of appended actions, and block
    length, compares the one-step gain of the block's last action against the
    block's final marginal gain.  Terms whose denominator is at most ``tol``
    are skipped and counted.
    """
    return _sigma(_cached_evaluator(f), greedy, f.ground_size, horizon, budget, tol)


def curvature_bound(eta: float, sigma: float, horizon: int) -> float:
    """Finite-horizon guarantee on greedy/optimal implied by the curvatures.

    Evaluates (1/eta) * (1 - (1 - eta*(1-sigma)/K)^K).  Near eta = 0 the
    formula degenerates numerically, so values with |eta| <= 1e-9 return the
    analytic limit 1 - sigma.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if abs(eta) <= ETA_ZERO_TOL:
        return 1.0 - sigma
    base = 1.0 - eta * (1.0 - sigma) / horizon
    try:
        power = base**horizon
    except OverflowError:
        # Diagnostic inputs far outside the certified domain; keep the sign.
        power = math.inf if base > 0 or horizon % 2 == 0 else -math.inf
    return (1.0 - power) / eta


def asymptotic_curvature_bound(eta: float, sigma: float) -> float:
    """Large-horizon limit of :func:`curvature_bound`, (1 - e^{-eta(1-sigma)})/eta."""
    if abs(eta) <= ETA_ZERO_TOL:
        return 1.0 - sigma
    try:
        decayed = math.exp(-eta * (1.0 - sigma))
    except OverflowError:
        decayed = math.inf
    return (1.0 - decayed) / eta


def greedy_guarantee_report(
    f: StringObjective,
    horizon: int,
    budget: int = DEFAULT_BUDGET,
) -> CurvatureReport:
    """Run the full guarantee pipeline on one objective and certify the result.

    Computes the greedy strategy, the brute-force optimum, both structural
    property checks, both curvatures, and both bounds.  Whenever the objective
    is prefix-monotone and the curvatures are defined, the achieved ratio is
    asserted against the finite-horizon bound (tolerance 1e-12); a violation
    raises :class:`GuaranteeViolationError` because the bound is proven.
    """
    ev = _cached_evaluator(f)
    m = f.ground_size
    trace = _greedy(ev, m, horizon)
    _, optimal_value = _bruteforce(ev, m, horizon, budget)
    greedy_value = trace.prefix_values[-1]

    monotone, _ = check_prefix_monotone(f, horizon, budget=budget)
    diminishing, _ = check_diminishing_return(f, horizon, budget=budget)

    flags: list[str] = []
    skipped = 0
    try:
        eta, eta_skipped = _eta(ev, trace, m, horizon, budget)
        skipped += eta_skipped
    except UndefinedCurvatureError:
        eta = math.nan
        flags.append("eta_undefined")
    try:
        sigma, sigma_skipped = _sigma(ev, trace, m, horizon, budget, DENOM_TOL)
        skipped += sigma_skipped
    except UndefinedCurvatureError:
        sigma = math.nan
        flags.append("sigma_undefined")

    eta_defined = not math.isnan(eta)
    sigma_defined = not math.isnan(sigma)
    eta_nonpositive = eta_defined and eta <= -ETA_ZERO_TOL
    if eta_nonpositive:
        flags.append("eta_nonpositive")

    if eta_defined and sigma_defined:
        bound_finite = curvature_bound(eta, sigma, horizon)
        bound_asymptotic = asymptotic_curvature_bound(eta, sigma)
    elif horizon == 1 and sigma_defined:
        # The horizon-1 bound is (1 - sigma) for every eta, so it survives
        # the empty total-curvature maximum.
        bound_finite = 1.0 - sigma
        bound_asymptotic = math.nan
    else:
        bound_finite = math.nan
        bound_asymptotic = math.nan

    if optimal_value == 0.0 and greedy_value == 0.0:
        ratio = 1.0
        flags.append("degenerate_zero_optimum")
    else:
        ratio = greedy_value / optimal_value

    if monotone and not math.isnan(bound_finite) and ratio < bound_finite - VALUE_TOL:
        raise GuaranteeViolationError(
            f"greedy/optimal ratio {ratio!r} fell below the certified bound {bound_finite!r}"
        )

    return CurvatureReport(
        eta=eta,
        sigma=sigma,
        bound_finite_K=bound_finite,
        bound_asymptotic=bound_asymptotic,
        greedy_value=greedy_value,
        optimal_value=optimal_value,
        ratio=ratio,
        prefix_monotone=monotone,
        diminishing_return=diminishing,
        eta_nonpositive=eta_nonpositive,
        skipped_terms=skipped,
        flags=tuple(flags),
    )


def greedy_recursion_checks(
    f: StringObjective,
    horizon: int,
    budget: int = DEFAULT_BUDGET,
    tol: float = VALUE_TOL,
) -> tuple[InequalityCheck, ...]:
    """Verify the inequalities that chain greedy prefix values to the optimum.

    Three families are checked numerically for a prefix-monotone objective:
    the first greedy value against its share of the optimum, the stage
    recursion linking consecutive greedy prefixes, and the fully chained
    consequence of that recursion.  All must hold with slack >= -tol whenever
    the guarantee itself holds, so a violation points at an implementation
    bug rather than at the instance.
    """
    ev = _cached_evaluator(f)
    m = f.ground_size
    trace = _greedy(ev, m, horizon)
    _, optimal_value = _bruteforce(ev, m, horizon, budget)
    eta, _ = _eta(ev, trace, m, horizon, budget) if horizon >= 2 else (0.0, 0)
    sigma, _ = _sigma(ev, trace, m, horizon, budget, DENOM_TOL)

    share = (1.0 - sigma) / horizon
    decay = 1.0 - eta * share
    checks: list[InequalityCheck] = []

    lhs = trace.prefix_values[0]
    rhs = share * optimal_value
    checks.append(
        InequalityCheck(
            label="first_stage_share",
            stage=None,
            lhs=lhs,
            rhs=rhs,
            slack=lhs - rhs,
            satisfied=lhs - rhs >= -tol,
        )
    )

    for i in range(1, horizon):
        lhs = trace.prefix_values[i]
        rhs = share * optimal_value + decay * trace.prefix_values[i - 1]
        checks.append(
            InequalityCheck(
                label="stage_recursion",
                stage=i,
                lhs=lhs,
                rhs=rhs,
                slack=lhs - rhs,
                satisfied=lhs - rhs >= -tol,
            )
        )

    chained = 0.0
    for t in range(horizon - 1):
        chained += decay**t * share * optimal_value
    chained += decay ** (horizon - 1) * trace.prefix_values[0]
    lhs = trace.prefix_values[-1]
    checks.append(
        InequalityCheck(
            label="chained_recursion",
            stage=None,
            lhs=lhs,
            rhs=chained,
            slack=lhs - chained,
            satisfied=lhs - chained >= -tol,
        )
    )
    return tuple(checks)
