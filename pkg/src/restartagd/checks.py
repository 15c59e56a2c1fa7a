"""Executable smoothness inequalities and the potential function.

These checks make the method's assumptions testable without ever forming a
Hessian: every bound uses only values and gradients.  Each check returns an
:class:`InequalityReport` comparing its two sides with a relative tolerance,
so a failing report carries the witness points that broke the inequality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .oracle import Objective, Vector

# Potential-function convention for the anchor index: the momentum weight
# "before the first step" is the square of the first real weight, (1/2)^2.
THETA0 = 0.25


class WeightError(Exception):
    """The supplied weights are not a convex combination."""


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    slack: float          # rhs - lhs; negative means the inequality failed
    holds: bool           # slack >= -tol
    tol: float
    witness: Tuple[Vector, ...]

    def __str__(self) -> str:
        verdict = "holds" if self.holds else "VIOLATED"
        return (f"{self.name}: lhs={self.lhs:.6e} rhs={self.rhs:.6e} "
                f"slack={self.slack:.3e} ({verdict})")


def _tol(rhs: float) -> float:
    return 1e-9 * (1.0 + abs(rhs))


def _report(name: str, lhs: float, rhs: float, witness) -> InequalityReport:
    slack = rhs - lhs
    tol = _tol(rhs)
    return InequalityReport(name=name, lhs=lhs, rhs=rhs, slack=slack,
                            holds=slack >= -tol, tol=tol, witness=tuple(witness))


def check_descent_lemma(obj: Objective, x: Vector, y: Vector, L: float) -> InequalityReport:
    """Quadratic upper bound from L-smoothness:
    f(x) - f(y) - <grad f(y), x - y>  <=  (L/2) ||x - y||^2."""
    d = x - y
    lhs = obj.value_fn(x) - obj.value_fn(y) - float(np.asarray(obj.grad_fn(y)) @ d)
    rhs = 0.5 * L * float(d @ d)
    return _report("descent_lemma", lhs, rhs, (x, y))


def check_jensen_gradient(obj: Objective, points: Sequence[Vector],
                          weights: Sequence[float], M: float) -> InequalityReport:
    """Gradient-of-average versus average-of-gradients under M-Lipschitz
    Hessians:

        || grad f(sum_i w_i z_i) - sum_i w_i grad f(z_i) ||
            <= (M/2) sum_{i<j} w_i w_j ||z_i - z_j||^2.

    ``weights`` must be a convex combination (sum within 1e-12 of one, no
    negative entries), else :class:`WeightError`.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(points) != w.size:
        raise WeightError("need one weight per point")
    if np.any(w < 0):
        raise WeightError("weights must be nonnegative")
    if abs(float(w.sum()) - 1.0) > 1e-12:
        raise WeightError(f"weights sum to {w.sum()!r}, expected 1")
    pts = [np.asarray(z, dtype=np.float64) for z in points]
    mix = sum(wi * z for wi, z in zip(w, pts))
    grad_mix = np.asarray(obj.grad_fn(mix))
    avg_grad = sum(wi * np.asarray(obj.grad_fn(z)) for wi, z in zip(w, pts))
    lhs = float(np.linalg.norm(grad_mix - avg_grad))
    spread = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = pts[i] - pts[j]
            spread += float(w[i] * w[j]) * float(d @ d)
    rhs = 0.5 * M * spread
    return _report("jensen_gradient", lhs, rhs, pts)


def check_trapezoid(obj: Objective, x: Vector, y: Vector, M: float) -> InequalityReport:
    """Trapezoid-rule bound under M-Lipschitz Hessians:
    f(x) - f(y) - (1/2) <grad f(x) + grad f(y), x - y>  <=  (M/12) ||x - y||^3."""
    d = x - y
    gsum = np.asarray(obj.grad_fn(x)) + np.asarray(obj.grad_fn(y))
    lhs = obj.value_fn(x) - obj.value_fn(y) - 0.5 * float(gsum @ d)
    h2 = float(d @ d)
    rhs = (M / 12.0) * h2 * math.sqrt(h2)
    return _report("trapezoid", lhs, rhs, (x, y))


def estimate_M_bruteforce(obj: Objective, region: Tuple[Vector, Vector],
                          samples: int, seed: int = 0) -> float:
    """Sampled lower estimate of the Hessian's Lipschitz constant over a box.

    Draws point pairs uniformly from ``region = (lower, upper)`` and takes the
    largest of two certified ratios per pair: the trapezoid gap scaled by
    12/||x-y||^3 (both orientations, via the absolute value) and the midpoint
    interpolation error scaled by 8/||x-y||^2.  Both never exceed the true
    constant, so the return value approaches it from below as sampling
    densifies.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    lo = np.broadcast_to(np.asarray(region[0], dtype=np.float64), (obj.dim,))
    hi = np.broadcast_to(np.asarray(region[1], dtype=np.float64), (obj.dim,))
    if np.any(hi <= lo):
        raise ValueError("region upper bounds must exceed lower bounds")
    rng = np.random.default_rng(seed)
    estimate = 0.0
    for _ in range(samples):
        x = rng.uniform(lo, hi)
        y = rng.uniform(lo, hi)
        d = x - y
        h2 = float(d @ d)
        if h2 == 0.0:
            continue
        h = math.sqrt(h2)
        gx = np.asarray(obj.grad_fn(x))
        gy = np.asarray(obj.grad_fn(y))
        gap = obj.value_fn(x) - obj.value_fn(y) - 0.5 * float((gx + gy) @ d)
        estimate = max(estimate, 12.0 * abs(gap) / (h2 * h))
        gm = np.asarray(obj.grad_fn(0.5 * (x + y)))
        err = float(np.linalg.norm(gm - 0.5 * (gx + gy)))
        estimate = max(estimate, 8.0 * err / h2)
    return estimate


def potential(f_x: float, x: Vector, x_prev: Vector, grad_x_prev: Vector,
              th: float, L: float) -> float:
    """Lyapunov value for one iterate pair:

        f(x) + (th^2/2) ( <grad f(x_prev), x - x_prev>
                          + ||grad f(x_prev)||^2 / (2L)
                          + L ||x - x_prev||^2 ).

    Always >= f(x): the bracket equals ||g + L d||^2/(2L) + (L/2)||d||^2 with
    d = x - x_prev, a sum of squares.  At an epoch anchor (x == x_prev) use
    th = THETA0.
    """
    d = x - x_prev
    g = grad_x_prev
    bracket = float(g @ d) + float(g @ g) / (2.0 * L) + L * float(d @ d)
    return f_x + 0.5 * th * th * bracket
