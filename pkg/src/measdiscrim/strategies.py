"""Closed-form optimal discrimination curves and their characteristic points.

Discriminating the two measurements at overlap c = cos(2*theta) with a
fixed inconclusive budget P_I admits two families of protocols:

* entangled probe: success ½(1 - P_I + sin(2θ)·sqrt(1 - P_I/cos²θ)) on
  P_I ∈ [0, cos 2θ], interpolating from minimum-error discrimination at
  P_I = 0 to unambiguous discrimination at the endpoint;
* single-qubit probe at angle ϑ with post-processing probability q of
  guessing on the unfavorable outcome. The best pure protocol at fixed
  P_I follows a cubic in x = cos(2ϑ) up to the budget boundary_PIB, then
  a q = 0 arc; probabilistically mixing the P_I = 0 protocol with the
  arc's tangent point (at tangent_PIT) is strictly better in between, and
  the resulting piecewise curve is the upper boundary of the convex hull
  of all pure protocols.

`hull_verify` rebuilds that hull numerically from sampled protocols;
`advantage` measures how much the entangled family wins by.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _cubic
from .errors import DomainError, ValidationError

TOL = 1e-12
# Below this overlap the measurements are effectively orthogonal and the
# single-qubit formulas are replaced by their analytic limits.
DEGENERATE_C = 1e-12


@dataclass(frozen=True)
class StrategyPoint:
    """Outcome probabilities (success, error, inconclusive) of a protocol."""

    p_success: float
    p_error: float
    p_inconclusive: float

    def __post_init__(self):
        vals = (self.p_success, self.p_error, self.p_inconclusive)
        for v in vals:
            if not -TOL <= v <= 1.0 + TOL:
                raise ValidationError(f"probability {v} outside [0, 1]")
        if abs(sum(vals) - 1.0) > TOL:
            raise ValidationError(f"probabilities sum to {sum(vals)}, not 1")
        object.__setattr__(self, "p_success", min(max(self.p_success, 0.0), 1.0))
        object.__setattr__(self, "p_error", min(max(self.p_error, 0.0), 1.0))
        object.__setattr__(
            self, "p_inconclusive", min(max(self.p_inconclusive, 0.0), 1.0)
        )


@dataclass(frozen=True)
class SingleQubitStrategy:
    """A single-qubit protocol: probe angle ϑ, x = cos 2ϑ, guess rate q.

    Hull points carry `mixture`, a pair of (weight, component strategy);
    the angle fields are then None.
    """

    probe_angle: float | None
    x: float | None
    q: float | None
    mixture: tuple[tuple[float, "SingleQubitStrategy"], ...] | None = None

    def __post_init__(self):
        if self.mixture is None:
            if self.probe_angle is None or self.x is None or self.q is None:
                raise ValidationError("pure strategy needs probe_angle, x and q")
            if abs(math.cos(2.0 * self.probe_angle) - self.x) > TOL:
                raise ValidationError("x must equal cos(2*probe_angle)")
            if not -TOL <= self.q <= 1.0 + TOL:
                raise ValidationError("q outside [0, 1]")
            object.__setattr__(self, "q", min(max(self.q, 0.0), 1.0))
        else:
            weights = [w for w, _ in self.mixture]
            if abs(sum(weights) - 1.0) > TOL:
                raise ValidationError("mixture weights must sum to 1")


@dataclass(frozen=True)
class CurveTable:
    """A columnar table of curve samples.

    When `monotone_key` is set, that column must be strictly increasing
    (within each distinct value of `group_key`, if given).
    """

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    monotone_key: str | None = "p_inc"
    group_key: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValidationError("row width does not match columns")
        if self.monotone_key is not None and self.rows:
            k = self.columns.index(self.monotone_key)
            g = self.columns.index(self.group_key) if self.group_key else None
            last: dict = {}
            for row in self.rows:
                key = row[g] if g is not None else None
                if key in last and not row[k] > last[key]:
                    raise ValidationError(
                        f"column {self.monotone_key} is not strictly increasing"
                    )
                last[key] = row[k]

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _check_theta(theta: float) -> float:
    if not -TOL <= theta <= math.pi / 4.0 + TOL:
        raise DomainError("theta outside [0, pi/4]")
    return float(min(max(theta, 0.0), math.pi / 4.0))


def _point(p_success: float, p_inc: float) -> StrategyPoint:
    return StrategyPoint(p_success, 1.0 - p_success - p_inc, p_inc)


def entangled_success(theta: float, p_inc: float) -> StrategyPoint:
    """Best entangled-probe success at inconclusive budget p_inc.

    Defined for p_inc ∈ [0, cos 2θ]; beyond that endpoint discarding
    conclusive outcomes is never useful, so larger budgets are rejected.
    """
    theta = _check_theta(theta)
    c = math.cos(2.0 * theta)
    if p_inc < -TOL or p_inc > c + TOL:
        raise DomainError("budget exceeds IDP point")
    p_inc = min(max(p_inc, 0.0), c)
    root = math.sqrt(max(0.0, 1.0 - p_inc / math.cos(theta) ** 2))
    ps = 0.5 * (1.0 - p_inc + math.sin(2.0 * theta) * root)
    return _point(ps, p_inc)


def relative_success(point: StrategyPoint) -> float:
    """P_S conditioned on a conclusive result: P_S / (1 - P_I)."""
    if point.p_inconclusive >= 1.0 - TOL:
        raise DomainError("relative success undefined at p_inconclusive = 1")
    return point.p_success / (1.0 - point.p_inconclusive)


def helstrom_point(theta: float) -> StrategyPoint:
    """Minimum-error discrimination: P_I = 0, P_S = (1 + sin 2θ)/2."""
    theta = _check_theta(theta)
    return _point(0.5 * (1.0 + math.sin(2.0 * theta)), 0.0)


def boundary_PIB(c: float) -> float:
    """Budget where the pure-curve optimum hits q = 0: (3 + sqrt(1+8c²))/8."""
    if not -TOL <= c <= 1.0 + TOL:
        raise DomainError("overlap c outside [0, 1]")
    return (3.0 + math.sqrt(1.0 + 8.0 * c * c)) / 8.0


def tangent_PIT(c: float) -> float:
    """Budget where the line from the P_I = 0 point touches the q = 0 arc."""
    if not -TOL <= c <= 1.0 + TOL:
        raise DomainError("overlap c outside [0, 1]")
    if c < DEGENERATE_C:
        raise DomainError(
            "tangent point undefined at c = 0 (hull degenerates to a segment)"
        )
    c2 = c * c
    pit = (1.0 + 3.0 * c2 + 2.0 * c2 * math.sqrt(1.0 + 3.0 * c2)) / (
        2.0 * (1.0 + 4.0 * c2)
    )
    assert pit >= boundary_PIB(c) - TOL
    return pit


def concave_branch(theta: float, p_inc: float) -> StrategyPoint:
    """The q = 0 single-qubit arc: sqrt requires |1 - 2 P_I| ≤ cos 2θ."""
    theta = _check_theta(theta)
    c = math.cos(2.0 * theta)
    if abs(1.0 - 2.0 * p_inc) > c + TOL:
        raise DomainError("q = 0 arc undefined: |1 - 2*p_inc| exceeds cos(2*theta)")
    ratio = (1.0 - 2.0 * p_inc) / c if c > 0.0 else 0.0
    arg = max(0.0, 1.0 - ratio * ratio)
    ps = 0.5 * (1.0 - p_inc) + 0.25 * math.sin(2.0 * theta) * math.sqrt(arg)
    return _point(ps, p_inc)


def _pure_probe_success(c: float, p_inc: float, x: float) -> float:
    return 0.5 * (1.0 - p_inc) + 0.5 * math.sqrt(
        max(0.0, (1.0 - c * c) * (1.0 - x * x))
    ) * (1.0 - p_inc / (1.0 - x * c))


def _single_domain(theta: float, p_inc: float) -> tuple[float, float, float]:
    theta = _check_theta(theta)
    c = math.cos(2.0 * theta)
    p_max = 0.5 * (1.0 + c * c)
    if p_inc < -TOL or p_inc > p_max + TOL:
        raise DomainError("budget exceeds the unambiguous endpoint (1 + c^2)/2")
    return theta, c, min(max(p_inc, 0.0), p_max)


def single_pure_curve(
    theta: float, p_inc: float
) -> tuple[StrategyPoint, SingleQubitStrategy]:
    """Best unmixed single-qubit protocol at inconclusive budget p_inc.

    Below boundary_PIB the optimal x solves
    c²x³ - 2cx² + (1 - P_I)x + P_I c = 0 with q = 1 - 2 P_I/(1 - xc);
    above it the optimum sits on the q = 0 boundary.
    """
    theta, c, p_inc = _single_domain(theta, p_inc)
    if c < DEGENERATE_C:
        # Orthogonal measurements: the curve is the straight P_S = 1 - P_I.
        strat = SingleQubitStrategy(probe_angle=math.pi / 4.0, x=0.0, q=1.0 - 2.0 * p_inc)
        return _point(1.0 - p_inc, p_inc), strat

    pib = boundary_PIB(c)
    if p_inc < pib:
        roots = _cubic.real_roots(c * c, -2.0 * c, 1.0 - p_inc, p_inc * c)
        best: tuple[float, float, float] | None = None
        for x in roots:
            if abs(x) > 1.0 + 1e-9:
                continue
            denom = 1.0 - x * c
            if denom <= 0.0:
                continue
            q = 1.0 - 2.0 * p_inc / denom
            if not -1e-9 <= q <= 1.0 + 1e-9:
                continue
            x = min(max(float(x), -1.0), 1.0)
            ps = _pure_probe_success(c, p_inc, x)
            # Tie-break toward larger x on equal success.
            if best is None or ps > best[0] + TOL or (ps > best[0] - TOL and x > best[1]):
                best = (ps, x, min(max(q, 0.0), 1.0))
        if best is None:
            raise DomainError("no admissible root of the conclusive-rate cubic")
        ps, x, q = best
    else:
        x = (1.0 - 2.0 * p_inc) / c
        x = min(max(x, -1.0), 1.0)
        q = 0.0
        ps = concave_branch(theta, p_inc).p_success
    strat = SingleQubitStrategy(probe_angle=0.5 * math.acos(x), x=x, q=q)
    return _point(ps, p_inc), strat


def single_optimal(
    theta: float, p_inc: float
) -> tuple[StrategyPoint, SingleQubitStrategy]:
    """Best single-qubit protocol allowing mixtures (the hull boundary).

    Below tangent_PIT this mixes the P_I = 0 protocol (weight 1 - P_I/P_IT)
    with the tangent-point protocol (weight P_I/P_IT); from the tangent
    point on, the pure q = 0 arc is already optimal.
    """
    theta, c, p_inc = _single_domain(theta, p_inc)
    if c < DEGENERATE_C:
        return single_pure_curve(theta, p_inc)

    pit = tangent_PIT(c)
    if p_inc >= pit:
        return single_pure_curve(theta, p_inc)

    point_a = helstrom_point(theta)
    strat_a = SingleQubitStrategy(probe_angle=math.pi / 4.0, x=0.0, q=1.0)
    point_t, strat_t = single_pure_curve(theta, pit)
    w_t = p_inc / pit
    w_a = 1.0 - w_t
    ps = w_a * point_a.p_success + w_t * point_t.p_success
    strat = SingleQubitStrategy(
        probe_angle=None,
        x=None,
        q=None,
        mixture=((w_a, strat_a), (w_t, strat_t)),
    )
    return _point(ps, p_inc), strat


def unambiguous_points(theta: float) -> tuple[StrategyPoint, StrategyPoint]:
    """Zero-error endpoints of the two families.

    Entangled probes reach (P_S, P_E, P_I) = (2sin²θ, 0, cos 2θ); a single
    qubit cannot do better than ((1-c²)/2, 0, (1+c²)/2).
    """
    theta = _check_theta(theta)
    c = math.cos(2.0 * theta)
    entangled = StrategyPoint(2.0 * math.sin(theta) ** 2, 0.0, c)
    single = StrategyPoint(0.5 * (1.0 - c * c), 0.0, 0.5 * (1.0 + c * c))
    return entangled, single


def advantage(theta: float, p_inc: float) -> float:
    """Entangled-minus-single-qubit success at the same budget.

    Strictly positive whenever p_inc > 0, exactly zero at p_inc = 0 where
    both families reduce to minimum-error discrimination.
    """
    ent = entangled_success(theta, p_inc)
    single, _ = single_optimal(theta, p_inc)
    return ent.p_success - single.p_success


def default_pi_grid(upper: float, step: float = 0.01) -> np.ndarray:
    """Uniform budget grid over [0, upper] with both endpoints exact."""
    if upper < 0.0:
        raise DomainError("grid upper bound must be non-negative")
    n = int(math.floor(upper / step + 1e-9))
    values = [k * step for k in range(n + 1)]
    if not values or values[-1] < upper - TOL:
        values.append(upper)
    else:
        values[-1] = upper if abs(values[-1] - upper) <= TOL else values[-1]
    return np.array(values)


def q_strategy_points(
    theta: float, probe_angles: np.ndarray, qs: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (P_I, P_S) of arbitrary (ϑ, q) single-qubit protocols.

    Labels are canonicalized first: measurements are swapped so that the
    outcome-probability chain P_M0/P_N0 ≥ P_N1/P_M1 holds, then outcomes
    are swapped so the chain ends ≥ 1. Guess-on-outcome-0, hedge-on-1 with
    rate q is then the optimal post-processing convention.
    """
    pm0 = np.cos(theta - probe_angles) ** 2
    pn0 = np.cos(theta + probe_angles) ** 2
    pm1 = np.sin(theta - probe_angles) ** 2
    pn1 = np.sin(theta + probe_angles) ** 2

    swap_meas = pm0 * pm1 < pn0 * pn1
    qm0 = np.where(swap_meas, pn0, pm0)
    qm1 = np.where(swap_meas, pn1, pm1)
    qn0 = np.where(swap_meas, pm0, pn0)
    qn1 = np.where(swap_meas, pm1, pn1)

    swap_out = qn1 < qm1
    rm0 = np.where(swap_out, qm1, qm0)
    rm1 = np.where(swap_out, qm0, qm1)
    rn1 = np.where(swap_out, qn0, qn1)

    p_success = 0.5 * (rm0 + qs * rn1)
    p_inc = 0.5 * (1.0 - qs) * (rm1 + rn1)
    return p_inc, p_success


def _upper_hull(points: np.ndarray) -> np.ndarray:
    """Vertices of the upper convex hull, left to right (Andrew chain)."""
    order = np.lexsort((-points[:, 1], points[:, 0]))
    pts = points[order]
    # One candidate per x: the highest point.
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.diff(pts[:, 0]) > 0.0
    pts = pts[keep]
    if len(pts) <= 2:
        return pts
    hull: list[np.ndarray] = []
    for p in pts:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
            if cross >= -1e-15:
                hull.pop()
            else:
                break
        hull.append(p)
    return np.array(hull)


@dataclass(frozen=True)
class HullReport:
    """Result of numerically convexifying sampled single-qubit protocols."""

    c: float
    n_samples: int
    seed: int
    degenerate: bool
    max_deviation: float
    tangent_p_inc: float | None
    tangent_error: float | None
    vertices: np.ndarray
    points: np.ndarray
    point_a: tuple[float, float]
    point_t: tuple[float, float] | None
    point_u: tuple[float, float]


def hull_verify(c: float, n_samples: int, seed: int) -> HullReport:
    """Rebuild the single-qubit hull from samples and compare to closed form.

    Samples n protocols (an exact on-curve budget grid including the
    branch and tangency budgets, plus seeded random (ϑ, q) draws), takes
    the planar upper hull of their (P_I, P_S) pairs, and reports the worst
    vertex deviation from the piecewise analytic boundary along with the
    location of the tangency vertex. Degenerate overlaps (c near 0 or 1)
    yield a straight-segment report without a tangency point.
    """
    if n_samples < 100:
        raise DomainError("hull verification needs at least 100 samples")
    if not -TOL <= c <= 1.0 + TOL:
        raise DomainError("overlap c outside [0, 1]")
    c = min(max(c, 0.0), 1.0)
    theta = 0.5 * math.acos(c)
    p_max = 0.5 * (1.0 + c * c)
    degenerate = c < DEGENERATE_C or c > 1.0 - DEGENERATE_C

    n_grid = n_samples // 2
    grid = np.linspace(0.0, p_max, max(n_grid - 2, 2))
    if not degenerate:
        special = np.array([boundary_PIB(c), tangent_PIT(c)])
        grid = np.unique(np.concatenate([grid, special]))
    curve_pts = np.array(
        [[p, single_pure_curve(theta, p)[0].p_success] for p in grid]
    )

    rng = np.random.default_rng(seed)
    n_rand = max(n_samples - len(curve_pts), 0)
    angles = rng.uniform(0.0, math.pi / 2.0, n_rand)
    qs = rng.uniform(0.0, 1.0, n_rand)
    pi_r, ps_r = q_strategy_points(theta, angles, qs)
    inside = pi_r <= p_max + TOL
    rand_pts = np.column_stack([pi_r[inside], ps_r[inside]])

    points = np.vstack([curve_pts, rand_pts])
    vertices = _upper_hull(points)

    deviations = [
        abs(ps - single_optimal(theta, min(max(pi, 0.0), p_max))[0].p_success)
        for pi, ps in vertices
    ]
    max_deviation = float(max(deviations))

    point_a = (0.0, helstrom_point(theta).p_success)
    point_u = (p_max, 0.5 * (1.0 - c * c))
    if degenerate:
        point_t = None
        tangent_p_inc = None
        tangent_error = None
    else:
        pit = tangent_PIT(c)
        point_t = (pit, single_pure_curve(theta, pit)[0].p_success)
        tangent_p_inc = float(vertices[1][0]) if len(vertices) > 1 else None
        tangent_error = (
            abs(tangent_p_inc - pit) if tangent_p_inc is not None else None
        )
    return HullReport(
        c=c,
        n_samples=n_samples,
        seed=seed,
        degenerate=degenerate,
        max_deviation=max_deviation,
        tangent_p_inc=tangent_p_inc,
        tangent_error=tangent_error,
        vertices=vertices,
        points=points,
        point_a=point_a,
        point_t=point_t,
        point_u=point_u,
    )
