"""Closed-form welfare and revenue bounds for first-price CCEs.

Natural logarithms throughout.  Root finding is plain bisection
(``scipy.optimize.bisect``) on fixed brackets with a 1e-12 argument
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.optimize import bisect

from .errors import ParameterError

E = math.e
ROOT_XTOL = 1e-12
WELFARE_BRACKET = (0.2, 0.35)
CASE1_BRACKET = (0.1, 0.5)
CERTIFIED_ALPHA = (0.27, 0.28)


@dataclass(frozen=True)
class BoundResult:
    value: float
    params: dict[str, float] = field(default_factory=dict)
    residual: float = 0.0
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out = {"value": self.value, **self.params, "residual": self.residual}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def welfare_lb_case1(alpha: float, beta: float) -> float:
    """Welfare floor when beta >= v*alpha: the envelope is alpha/(1 - x) throughout."""
    return alpha + beta + 1 - alpha + alpha * math.log(alpha)


def welfare_lb_case2(alpha: float, beta: float, v: float) -> float:
    """Welfare floor when the envelope switches branches at (v*alpha - beta)/(alpha - beta).

    Equals alpha + beta + the envelope mean while that crossover lies at or
    below v - beta, which covers every point the minimization visits.
    """
    if v == 1:
        raise ParameterError("v = 1 with beta < v*alpha is singular")
    revenue = alpha * math.log((alpha - beta) / (1 - v)) + 1 - alpha
    if beta:
        revenue += beta * math.log(beta * (1 - v) / (v * (alpha - beta)))
    return alpha + beta + revenue


def welfare_lb(alpha: float, beta: float, v: float) -> float:
    """alpha + beta + the mean of the min-envelope price distribution."""
    if not (0 < alpha <= 1 and beta >= 0 and 0 < v <= 1):
        raise ParameterError(f"need 0 < alpha <= 1, beta >= 0, 0 < v <= 1; got {alpha}, {beta}, {v}")
    if beta >= v * alpha:
        return welfare_lb_case1(alpha, beta)
    return welfare_lb_case2(alpha, beta, v)


def beta_of_alpha(alpha: float) -> float:
    """Bob's utility that makes the welfare expression stationary in beta."""
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return (alpha - alpha * alpha) / (E * alpha - alpha + 1)


def welfare_case2a(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha * math.log(E * alpha / ((E - 1) * alpha + 1)) + 1


def welfare_root_equation(x: float) -> float:
    """Derivative of ``welfare_case2a``; its zero is the welfare minimizer."""
    d = (E - 1) * x + 1
    return (d * math.log(E * x / d) + 1) / d


def case1_root_equation(x: float) -> float:
    return 2 * x - math.log(x) - 2


def case1_welfare(alpha: float) -> float:
    """Welfare floor on the boundary beta = alpha (1 - alpha)."""
    return 1 + alpha * (1 - alpha) + alpha * math.log(alpha)


def case1_alpha() -> float:
    # 2x - ln x - 2 is decreasing on the bracket.
    return bisect(case1_root_equation, *CASE1_BRACKET, xtol=ROOT_XTOL)


def minimize_welfare() -> BoundResult:
    alpha = bisect(welfare_root_equation, *WELFARE_BRACKET, xtol=ROOT_XTOL)
    beta = beta_of_alpha(alpha)
    w = welfare_case2a(alpha)
    a1 = case1_alpha()
    w1 = case1_welfare(a1)
    if not beta < alpha * (1 - alpha):
        raise ParameterError("stationary beta falls outside the beta < v*alpha branch")
    if not w < w1:
        raise ParameterError("boundary candidate undercuts the interior minimum")
    return BoundResult(
        value=w,
        params={
            "alpha": alpha,
            "beta": beta,
            "v": 1 - alpha,
            "case1_alpha": a1,
            "case1_value": w1,
            "case1_residual": abs(case1_root_equation(a1)),
        },
        residual=abs(welfare_root_equation(alpha)),
    )


def q_of_alpha(alpha: float) -> float:
    """Alice's win probability in the tight welfare construction."""
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return 2 + math.log(alpha / (1 + (E - 1) * alpha))


def crossover(alpha: float) -> float:
    """Price where the two branches of the min-envelope meet, for v = 1 - alpha."""
    return (E - 1) * (1 - alpha) / E


@dataclass(frozen=True)
class UBounds:
    u_min: float
    u_max: float
    in_certified_range: bool

    def to_dict(self) -> dict:
        return {"u_min": self.u_min, "u_max": self.u_max, "in_certified_range": self.in_certified_range}


def u_bounds(alpha: float) -> UBounds:
    """Alice's utility when she wins the top (u_min) or bottom (u_max) q-quantile of prices."""
    alpha = float(alpha)
    q = q_of_alpha(alpha)
    beta = beta_of_alpha(alpha)
    v = 1 - alpha
    u_min = -alpha * math.log(1 - q)
    u_max = q - v * q + beta - beta * math.log(beta / (q * v))
    lo, hi = CERTIFIED_ALPHA
    return UBounds(u_min, u_max, lo <= alpha <= hi)


@dataclass(frozen=True)
class WorstWelfareParams:
    alpha: float
    beta: float
    v: float
    q: float
    W: float
    X: float
    u_min: float
    u_max: float

    @classmethod
    def from_alpha(cls, alpha: float) -> "WorstWelfareParams":
        ub = u_bounds(alpha)
        return cls(alpha, beta_of_alpha(alpha), 1 - alpha, q_of_alpha(alpha), welfare_case2a(alpha),
                   crossover(alpha), ub.u_min, ub.u_max)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def revenue_floor() -> float:
    return 1 - 2 / E


def symmetric_alpha(n: int, v: float) -> float:
    _check_symmetric(n, v)
    return v * math.exp(-(n - 1))


def symmetric_revenue_bound(n: int, v: float) -> float:
    _check_symmetric(n, v)
    return (1 - n * math.exp(-(n - 1))) * v


def _check_symmetric(n: int, v: float) -> None:
    if int(n) != n or n < 2:
        raise ParameterError(f"n must be an integer >= 2, got {n}")
    if not v > 0:
        raise ParameterError(f"v must be positive, got {v}")


def revenue_lb_rhs(alpha: float, v: float) -> float:
    """Mean of c/(v - x) with c = (1 - 1/e)(v - 1) + alpha: the price floor when Alice (value v) holds back."""
    if not (0 < alpha <= 1 and v >= 1):
        raise ParameterError(f"need 0 < alpha <= 1 and v >= 1, got {alpha}, {v}")
    c = (1 - 1 / E) * (v - 1) + alpha
    return v - c + c * math.log(c / v)


def revenue_gap_margin(alpha: float, v: float) -> float:
    """revenue_lb_rhs - (1 - 2 alpha); positive for alpha in (1/e, 1] and v >= 1."""
    return revenue_lb_rhs(alpha, v) - 1 + 2 * alpha


def gap_threshold(epsilon: float) -> float:
    if not 0 < epsilon < 1:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    return 324 / epsilon**4
