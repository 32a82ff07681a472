"""Analytic curvature of the single-qubit pure curve, with FD validation.

Substituting y = c*x turns the conclusive-rate cubic into
y^3 - 2y^2 + (1 - P_I)y + P_I c^2 = 0, whose maximizing root gives the
pure-curve success as

    P_S = (1 - P_I)/2 + (sqrt(1-c^2)/2c) * sqrt(c^2-y^2) * [1 - P_I/(1-y)].

Implicit differentiation yields y', y'' and an explicit second derivative
d2 P_S / d P_I^2 = (sqrt(1-c^2)/2c) * (alpha*y' + beta*y'^2 + gamma*y''),
which is non-negative up to the q = 0 boundary budget; past it the curve
follows the q = 0 arc whose curvature -c*sqrt(1-c^2)*(c^2-(1-2P_I)^2)^(-3/2)
is strictly negative. finite_difference_check validates either branch
numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _cubic
from .errors import BranchCrossingError, DomainError, SingularityError, ValidationError
from .strategies import boundary_PIB, single_pure_curve

TOL = 1e-12
DENOM_FLOOR = 1e-10


@dataclass(frozen=True)
class DerivativeBundle:
    """y and its budget-derivatives plus the assembled curvature."""

    y: float
    y_prime: float
    y_double_prime: float
    alpha: float
    beta: float
    gamma: float
    d2PS_dPI2: float


def _check_convex_domain(c: float, p_inc: float) -> float:
    if not TOL < c < 1.0 - TOL:
        raise DomainError("overlap c must lie strictly inside (0, 1)")
    pib = boundary_PIB(c)
    if not -TOL <= p_inc < pib:
        raise DomainError("budget outside [0, boundary_PIB)")
    return pib


def _success_from_y(c: float, p_inc: float, y: float) -> float:
    sq = math.sqrt(max(0.0, c * c - y * y))
    return 0.5 * (1.0 - p_inc) + (math.sqrt(1.0 - c * c) / (2.0 * c)) * sq * (
        1.0 - p_inc / (1.0 - y)
    )


def y_root(c: float, p_inc: float) -> float:
    """The maximizing root of the substituted cubic, consistent with c*x."""
    _check_convex_domain(c, p_inc)
    roots = _cubic.real_roots(1.0, -2.0, 1.0 - p_inc, p_inc * c * c)
    best: float | None = None
    best_ps = -math.inf
    for y in roots:
        if abs(y) > c + 1e-9 or y >= 1.0:
            continue
        q = 1.0 - 2.0 * p_inc / (1.0 - y)
        if not -1e-9 <= q <= 1.0 + 1e-9:
            continue
        y = min(max(float(y), -c), c)
        ps = _success_from_y(c, p_inc, y)
        if ps > best_ps + TOL or (ps > best_ps - TOL and (best is None or y > best)):
            best, best_ps = y, ps
    if best is None:
        raise DomainError("no admissible root of the substituted cubic")
    theta = 0.5 * math.acos(c)
    x = single_pure_curve(theta, p_inc)[1].x
    if abs(best - c * x) > 1e-10:
        raise ValidationError(
            f"substituted root {best} disagrees with c*x = {c * x}"
        )
    return best


def second_derivative(c: float, p_inc: float) -> DerivativeBundle:
    """Curvature of the pure curve below the q = 0 boundary budget."""
    _check_convex_domain(c, p_inc)
    if p_inc <= TOL:
        raise DomainError("curvature defined on the open interval (0, boundary_PIB)")
    y = y_root(c, p_inc)
    denom = 3.0 * y * y - 4.0 * y + 1.0 - p_inc
    if abs(denom) <= DENOM_FLOOR:
        raise SingularityError(
            f"implicit-derivative denominator 3y^2-4y+1-P_I = {denom:.3e} "
            f"vanishes at c = {c}, p_inc = {p_inc}"
        )
    y_prime = (y - c * c) / denom
    y_double_prime = 2.0 * (y_prime + y_prime * y_prime * (2.0 - 3.0 * y)) / denom

    c2 = c * c
    one = 1.0 - y
    sq = math.sqrt(max(1e-300, c2 - y * y))
    alpha = 2.0 * (y - c2) / (sq * one * one)
    beta = (
        p_inc * (3.0 * c2 * y * y + c2 - 2.0 * c2 * c2 - 2.0 * y**3)
        - c2 * one**3
    ) / (sq**3 * one**3)
    gamma = (y - c2) * p_inc / (sq * one * one) - y / sq
    d2 = (math.sqrt(1.0 - c2) / (2.0 * c)) * (
        alpha * y_prime + beta * y_prime * y_prime + gamma * y_double_prime
    )
    return DerivativeBundle(
        y=y,
        y_prime=y_prime,
        y_double_prime=y_double_prime,
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        d2PS_dPI2=d2,
    )


def concave_second_derivative(c: float, p_inc: float) -> float:
    """Curvature of the q = 0 arc; strictly negative on its domain."""
    if not TOL < c < 1.0 - TOL:
        raise DomainError("overlap c must lie strictly inside (0, 1)")
    if not boundary_PIB(c) < p_inc < 0.5 * (1.0 + c * c):
        raise DomainError("budget outside (boundary_PIB, (1 + c^2)/2)")
    bracket = c * c - (1.0 - 2.0 * p_inc) ** 2
    if bracket <= 0.0:
        raise DomainError("q = 0 arc curvature undefined: c^2 - (1-2*p_inc)^2 <= 0")
    return -c * math.sqrt(1.0 - c * c) * bracket**-1.5


def _concave_success(c: float, p_inc: float) -> float:
    ratio = (1.0 - 2.0 * p_inc) / c
    return 0.5 * (1.0 - p_inc) + 0.25 * math.sqrt(1.0 - c * c) * math.sqrt(
        max(0.0, 1.0 - ratio * ratio)
    )


def finite_difference_check(
    c: float, p_inc: float, h: float = 1e-4
) -> tuple[float, float, float]:
    """Compare analytic curvature against a central second difference.

    Uses a five-point stencil at half steps, so exactly [p_inc - h,
    p_inc + h] must stay inside one branch; straddling the q = 0 boundary
    budget raises BranchCrossingError. Returns (analytic, numeric,
    rel_err) with rel_err = |a - n| / max(|a|, 1e-12).
    """
    if h <= 0.0:
        raise DomainError("step h must be positive")
    if not TOL < c < 1.0 - TOL:
        raise DomainError("overlap c must lie strictly inside (0, 1)")
    pib = boundary_PIB(c)
    if p_inc - h < pib < p_inc + h or abs(p_inc - pib) <= TOL:
        raise BranchCrossingError(
            f"stencil [{p_inc - h}, {p_inc + h}] straddles the branch "
            f"boundary at {pib}"
        )
    if p_inc < pib:
        if p_inc - h <= 0.0:
            raise BranchCrossingError("stencil leaves the convex branch at 0")
        analytic = second_derivative(c, p_inc).d2PS_dPI2

        def f(p: float) -> float:
            return _success_from_y(c, p, y_root(c, p))

    else:
        if p_inc + h >= 0.5 * (1.0 + c * c):
            raise BranchCrossingError(
                "stencil leaves the q = 0 arc at the unambiguous endpoint"
            )
        analytic = concave_second_derivative(c, p_inc)

        def f(p: float) -> float:
            return _concave_success(c, p)

    s = 0.5 * h
    numeric = (
        -f(p_inc - h)
        + 16.0 * f(p_inc - s)
        - 30.0 * f(p_inc)
        + 16.0 * f(p_inc + s)
        - f(p_inc + h)
    ) / (3.0 * h * h)
    rel_err = abs(analytic - numeric) / max(abs(analytic), 1e-12)
    return analytic, numeric, rel_err
