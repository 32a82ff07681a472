"""Closed-form real-root solver for low-degree polynomials.

Solves a3*x^3 + a2*x^2 + a1*x + a0 = 0 by the trigonometric method when
three real roots exist and by Cardano's formula otherwise, with graceful
degradation to quadratic/linear solves when leading coefficients vanish.
A bisection fallback guards the nearly-degenerate discriminant region and
every root is polished by a few Newton steps.
"""

from __future__ import annotations

import math

import numpy as np

# Relative threshold below which a leading coefficient is treated as zero.
_COEF_EPS = 1e-14
# Discriminant region where closed forms lose accuracy; see real_roots.
_DEGENERATE_DISC = 1e-14


def _newton_polish(coefs: tuple[float, float, float, float], x: float) -> float:
    a3, a2, a1, a0 = coefs
    for _ in range(3):
        f = ((a3 * x + a2) * x + a1) * x + a0
        df = (3.0 * a3 * x + 2.0 * a2) * x + a1
        if df == 0.0:
            break
        step = f / df
        x -= step
        if abs(step) < 1e-17 * max(1.0, abs(x)):
            break
    return x


def _bisect(coefs: tuple[float, float, float, float], lo: float, hi: float) -> float:
    a3, a2, a1, a0 = coefs

    def f(x: float) -> float:
        return ((a3 * x + a2) * x + a1) * x + a0

    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0 or hi - lo < 1e-16 * max(1.0, abs(mid)):
            return mid
        if (flo < 0.0) == (fmid < 0.0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return 0.5 * (lo + hi)


def real_roots(a3: float, a2: float, a1: float, a0: float) -> np.ndarray:
    """All real roots of the cubic, ascending, without multiplicity."""
    scale = max(abs(a3), abs(a2), abs(a1), abs(a0))
    if scale == 0.0:
        raise ValueError("all coefficients are zero")
    a3, a2, a1, a0 = a3 / scale, a2 / scale, a1 / scale, a0 / scale

    if abs(a3) < _COEF_EPS:
        return _quadratic_roots(a2, a1, a0)

    # Depressed form t^3 + p t + q with x = t - a2/(3 a3).
    b2, b1, b0 = a2 / a3, a1 / a3, a0 / a3
    shift = b2 / 3.0
    p = b1 - b2 * b2 / 3.0
    q = 2.0 * b2**3 / 27.0 - b2 * b1 / 3.0 + b0
    disc = -4.0 * p**3 - 27.0 * q * q

    coefs = (a3, a2, a1, a0)
    if abs(disc) < _DEGENERATE_DISC * max(1.0, p * p * p * p):
        # Near a multiple root the closed forms cancel badly; bracket the
        # distinct roots off the stationary points and bisect instead.
        roots = _degenerate_roots(coefs, p, shift)
    elif disc > 0.0:
        # Three distinct real roots (trigonometric method).
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        phi = math.acos(arg) / 3.0
        roots = [m * math.cos(phi - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]
    else:
        # One real root (Cardano).
        half_q = q / 2.0
        rad = math.sqrt(q * q / 4.0 + p**3 / 27.0)
        u = math.copysign(abs(-half_q + rad) ** (1.0 / 3.0), -half_q + rad)
        v = math.copysign(abs(-half_q - rad) ** (1.0 / 3.0), -half_q - rad)
        roots = [u + v - shift]

    polished = sorted(_newton_polish(coefs, x) for x in roots)
    # Collapse duplicates the degenerate path may produce.
    out: list[float] = []
    for x in polished:
        if not out or abs(x - out[-1]) > 1e-9 * max(1.0, abs(x)):
            out.append(x)
    return np.array(out)


def _quadratic_roots(a2: float, a1: float, a0: float) -> np.ndarray:
    if abs(a2) < _COEF_EPS:
        if abs(a1) < _COEF_EPS:
            raise ValueError("degenerate polynomial with no finite roots")
        return np.array([-a0 / a1])
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0.0:
        return np.array([])
    s = math.sqrt(disc)
    # Citardauq form for the cancellation-prone root.
    q = -0.5 * (a1 + math.copysign(s, a1))
    r1 = q / a2
    r2 = a0 / q if q != 0.0 else -a1 / a2 - r1
    return np.array(sorted({r1, r2}))


def _degenerate_roots(
    coefs: tuple[float, float, float, float], p: float, shift: float
) -> list[float]:
    a3 = coefs[0]
    lo, hi = -1e8, 1e8
    if p >= 0.0:
        # Monotone cubic: single real root.
        return [_bisect(coefs, lo, hi)]
    crit = math.sqrt(-p / 3.0)
    xs = sorted((-crit - shift, crit - shift))
    brackets = [(lo, xs[0]), (xs[0], xs[1]), (xs[1], hi)]

    def f(x: float) -> float:
        b3, b2, b1, b0 = coefs
        return ((b3 * x + b2) * x + b1) * x + b0

    roots = []
    for a, b in brackets:
        fa, fb = f(a), f(b)
        if fa == 0.0:
            roots.append(a)
        elif (fa < 0.0) != (fb < 0.0):
            roots.append(_bisect(coefs, a, b))
    # A double root sits at a critical point without a sign change; keep any
    # critical point where the polynomial nearly vanishes.
    span = max(abs(xs[0]), abs(xs[1]), 1.0)
    for x in xs:
        if abs(f(x)) <= 1e-10 * max(abs(a3), 1.0) * span**3:
            roots.append(x)
    if not roots:
        roots = [min(xs, key=lambda x: abs(f(x)))]
    return roots
