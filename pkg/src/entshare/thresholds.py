"""Bracketed root finding for exponent thresholds.

Scan-then-bisect: a uniform scan locates the first sign change, bisection
shrinks that bracket. Robust on the smooth but non-monotone residual
functions this toolkit produces, and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bounds import BASE, RESIDUAL_MAX, ComponentTable, bound_value
from .errors import EvaluationError, InvalidParameterError
from .measures import DEFAULT_OPT, CorrelationMeasure, OptimizerConfig

DEFAULT_TOL = 1e-6
DEFAULT_SCAN_STEPS = 256
DEFAULT_SEARCH_CAP = 4.0


@dataclass(frozen=True)
class ThresholdResult:
    root: float
    bracket: tuple[float, float]
    iterations: int
    residual_at_root: float
    scan_profile: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "residual_at_root": self.residual_at_root,
            "scan_profile": [list(p) for p in self.scan_profile],
        }


def find_zero(f, lo: float, hi: float, tol: float = DEFAULT_TOL,
              scan_steps: int = DEFAULT_SCAN_STEPS) -> ThresholdResult | None:
    """Smallest root of f in [lo, hi], or None when the scan sees no sign change."""
    if scan_steps < 8:
        raise InvalidParameterError("scan_steps must be at least 8")
    if not lo < hi:
        raise InvalidParameterError(f"invalid range [{lo}, {hi}]")
    xs = [lo + (hi - lo) * i / scan_steps for i in range(scan_steps + 1)]
    profile = []
    for x in xs:
        v = f(x)
        if not math.isfinite(v):
            raise EvaluationError(f"function returned non-finite value at {x}", at=x)
        profile.append((x, v))

    bracket = None
    for (x0, v0), (x1, v1) in zip(profile, profile[1:]):
        if v0 == 0.0:
            return ThresholdResult(x0, (x0, x0), 0, 0.0, tuple(profile))
        if v0 * v1 < 0:
            bracket = (x0, v0, x1, v1)
            break
    else:
        if profile[-1][1] == 0.0:
            x = profile[-1][0]
            return ThresholdResult(x, (x, x), 0, 0.0, tuple(profile))
        return None

    a, fa, b, fb = bracket
    iterations = 0
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = f(mid)
        if not math.isfinite(fm):
            raise EvaluationError(f"function returned non-finite value at {mid}", at=mid)
        iterations += 1
        if fm == 0.0:
            a = b = mid
            fa = fb = fm
            break
        if fa * fm < 0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
        if iterations > 200:
            break
    root = 0.5 * (a + b)
    return ThresholdResult(root, (a, b), iterations, f(root), tuple(profile))


def residual_zero_exponent(state, measure: CorrelationMeasure,
                           opt: OptimizerConfig = DEFAULT_OPT, tol: float = DEFAULT_TOL,
                           scan_steps: int = DEFAULT_SCAN_STEPS) -> ThresholdResult | None:
    """Exponent where the three-party residual changes sign, or None.

    None covers both fixed-sign residuals and the degenerate case of states
    whose pairwise components vanish.
    """
    if state.n_parties != 3:
        raise InvalidParameterError("residual-zero threshold is defined for three parties")
    table = ComponentTable(state, measure, opt)
    q_ab = table.marginal(1).value
    q_ac = table.marginal(2).value
    q_abc = table.lhs().value
    if q_ab == 0.0 and q_ac == 0.0:
        return None

    def f(alpha):
        return q_ab**alpha + q_ac**alpha - q_abc**alpha

    lo = max(tol, 1e-4)
    return find_zero(f, lo, measure.beta_max, tol=tol, scan_steps=scan_steps)


_BETA_BOUND_IDS = (BASE, RESIDUAL_MAX)


def empirical_beta(state, measure: CorrelationMeasure, bound_id: str = RESIDUAL_MAX,
                   opt: OptimizerConfig = DEFAULT_OPT, tol: float = DEFAULT_TOL,
                   scan_steps: int = DEFAULT_SCAN_STEPS,
                   search_cap: float = DEFAULT_SEARCH_CAP) -> ThresholdResult | None:
    """Largest exponent at which the chosen upper bound still holds for this state.

    Solved as the smallest root of bound(a) - lhs^a + shift, where the shift
    is the comparison margin: states that saturate the bound make the plain
    difference identically zero on the valid range, so the margin-shifted
    function is what actually changes sign at the transition to violation.
    Returns None when no transition occurs below the cap.
    """
    if bound_id not in _BETA_BOUND_IDS:
        raise InvalidParameterError(f"empirical beta supports bounds {_BETA_BOUND_IDS}")
    table = ComponentTable(state, measure, opt)
    lhs = table.lhs().value
    # prime the cache so every scan point reuses the same measured components
    bound_value(table, bound_id, 1.0, "polygamy")
    shift = 1e-9 if table.all_exact() else opt.margin()

    def f(alpha):
        val, _ = bound_value(table, bound_id, alpha, "polygamy")
        return val - lhs**alpha + shift

    lo = max(tol, 1e-4)
    result = find_zero(f, lo, search_cap, tol=tol, scan_steps=scan_steps)
    if result is None:
        return None
    if f(lo) < 0:
        # violated from the start: no transition inside the range
        return None
    return result
