"""Built-in test problems and the benchmark problem registry.

Closed-form objectives (Rosenbrock, isotropic quadratic, sum of cosines) plus
low-rank matrix completion over an observed entry set, with a loader for the
MovieLens-100K ratings file.  Everything randomized is driven by an explicit
seed so that rebuilding a problem reproduces the same oracle bit for bit.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse

from .oracle import Objective, Vector, as_point


class ParseError(Exception):
    """A data file line could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DimensionError(Exception):
    """An index in a data file falls outside the declared matrix shape."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def rosenbrock() -> Objective:
    """The classic banana function on R^2, f(x, y) = (x-1)^2 + 100(y-x^2)^2."""

    def value(v: Vector) -> float:
        a = v[0] - 1.0
        b = v[1] - v[0] * v[0]
        return a * a + 100.0 * b * b

    def grad(v: Vector) -> Vector:
        b = v[1] - v[0] * v[0]
        return np.array([2.0 * (v[0] - 1.0) - 400.0 * v[0] * b, 200.0 * b])

    return Objective(dim=2, value_fn=value, grad_fn=grad, lower_bound=0.0)


def quadratic(d: int, lam: float = 1.0) -> Objective:
    """Isotropic quadratic f(x) = (lam/2) ||x||^2 with curvature ``lam`` > 0."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if lam <= 0:
        raise ValueError("lam must be positive")

    def value(v: Vector) -> float:
        return 0.5 * lam * float(v @ v)

    def grad(v: Vector) -> Vector:
        return lam * v

    return Objective(
        dim=d, value_fn=value, grad_fn=grad,
        known_L=lam, known_M=0.0, lower_bound=0.0,
    )


def cosine_sum(d: int) -> Objective:
    """f(x) = sum_i cos(x_i): smooth, nonconvex, curvature and third
    derivative both bounded by 1."""
    if d < 1:
        raise ValueError("d must be >= 1")

    def value(v: Vector) -> float:
        return float(np.sum(np.cos(v)))

    def grad(v: Vector) -> Vector:
        return -np.sin(v)

    return Objective(
        dim=d, value_fn=value, grad_fn=grad,
        known_L=1.0, known_M=1.0, lower_bound=-float(d),
    )


@dataclass(frozen=True)
class MatrixCompletionInstance:
    """Observed entries of a p x q matrix: parallel arrays of 0-based row
    indices, column indices, and values."""

    p: int
    q: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("matrix shape must be positive")
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        vals = np.asarray(self.vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape) or rows.ndim != 1:
            raise ValueError("rows, cols, vals must be 1-D arrays of equal length")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "vals", vals)
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.p:
                raise ValueError("row index out of range")
            if cols.min() < 0 or cols.max() >= self.q:
                raise ValueError("column index out of range")
            codes = rows * self.q + cols
            if np.unique(codes).size != codes.size:
                raise ValueError("duplicate (row, column) observation")
        if not np.all(np.isfinite(vals)):
            raise ValueError("observed values must be finite")

    @property
    def n_observed(self) -> int:
        return int(self.rows.size)


def matrix_completion(instance: MatrixCompletionInstance, rank: int) -> Objective:
    """Factorized completion objective over x = vec(U rows, then V rows).

    With U of shape (p, rank) and V of shape (q, rank),

        f = (1/2N) sum_{(i,j,s) observed} ((U V^T)_ij - s)^2
          + (1/2N) || U^T U - V^T V ||_F^2

    where N is the number of observed entries.  The balance penalty removes
    the scale ambiguity of the factorization; the whole objective is invariant
    under a joint rotation (U, V) -> (U Q, V Q).  With N = 0 the objective is
    identically zero.
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    p, q, n = instance.p, instance.q, instance.n_observed
    dim = (p + q) * rank
    rows, cols, vals = instance.rows, instance.cols, instance.vals

    if n == 0:
        zero = np.zeros(dim)
        return Objective(dim=dim, value_fn=lambda v: 0.0,
                         grad_fn=lambda v: zero.copy(), lower_bound=0.0)

    # Fixed sparsity structure, reused for every gradient: slot j of the CSR
    # data array corresponds to observation perm[j].
    structure = sparse.csr_matrix(
        (np.arange(1, n + 1, dtype=np.float64), (rows, cols)), shape=(p, q)
    )
    perm = structure.data.astype(np.int64) - 1
    scale = 1.0 / n

    def split(v: Vector):
        u = v[: p * rank].reshape(p, rank)
        w = v[p * rank:].reshape(q, rank)
        return u, w

    def residual(u, w):
        return np.einsum("ij,ij->i", u[rows], w[cols]) - vals

    def value(v: Vector) -> float:
        u, w = split(v)
        r = residual(u, w)
        d = u.T @ u - w.T @ w
        return 0.5 * scale * (float(r @ r) + float(np.sum(d * d)))

    def grad(v: Vector) -> Vector:
        u, w = split(v)
        r = residual(u, w)
        d = u.T @ u - w.T @ w
        rmat = sparse.csr_matrix((r[perm], structure.indices, structure.indptr),
                                 shape=(p, q))
        gu = scale * (rmat @ w) + 2.0 * scale * (u @ d)
        gw = scale * (rmat.T @ u) - 2.0 * scale * (w @ d)
        return np.concatenate([gu.ravel(), gw.ravel()])

    return Objective(dim=dim, value_fn=value, grad_fn=grad, lower_bound=0.0)


def load_movielens_100k(path: str) -> MatrixCompletionInstance:
    """Parse a MovieLens-100K ``u.data`` ratings file.

    Rows are tab-separated ``user  item  rating  timestamp`` with 1-based
    user ids up to 943 and item ids up to 1682.  Raises :class:`ParseError`
    for malformed rows and :class:`DimensionError` for out-of-range ids,
    both carrying the offending line number.  An empty file yields a valid
    instance with zero observations.
    """
    p, q = 943, 1682
    rows, cols, vals = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped:
                continue
            parts = stripped.split("\t")
            if len(parts) != 4:
                raise ParseError(lineno, f"expected 4 tab-separated fields, got {len(parts)}")
            try:
                user = int(parts[0])
                item = int(parts[1])
                rating = float(parts[2])
                int(parts[3])
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from None
            if not (1 <= user <= p):
                raise DimensionError(lineno, f"user id {user} outside [1, {p}]")
            if not (1 <= item <= q):
                raise DimensionError(lineno, f"item id {item} outside [1, {q}]")
            rows.append(user - 1)
            cols.append(item - 1)
            vals.append(rating)
    return MatrixCompletionInstance(
        p=p, q=q,
        rows=np.array(rows, dtype=np.int64),
        cols=np.array(cols, dtype=np.int64),
        vals=np.array(vals, dtype=np.float64),
    )


def synthetic_completion_instance(p: int = 100, q: int = 80, rank: int = 5,
                                  fraction: float = 0.3, seed: int = 0,
                                  ) -> MatrixCompletionInstance:
    """Plant a random rank-``rank`` matrix and reveal a seeded fraction of it."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((p, rank)) / np.sqrt(rank)
    w = rng.standard_normal((q, rank)) / np.sqrt(rank)
    full = u @ w.T
    n_obs = max(1, int(round(fraction * p * q)))
    flat = rng.choice(p * q, size=n_obs, replace=False)
    flat.sort()
    rows, cols = np.divmod(flat, q)
    return MatrixCompletionInstance(p=p, q=q, rows=rows, cols=cols,
                                    vals=full[rows, cols])


def completion_init(instance: MatrixCompletionInstance, rank: int, seed: int = 0) -> Vector:
    """Standard benchmark start for completion: i.i.d. normal entries scaled
    by 1/sqrt(rank)."""
    rng = np.random.default_rng(seed)
    dim = (instance.p + instance.q) * rank
    return rng.standard_normal(dim) / np.sqrt(rank)


@dataclass(frozen=True)
class ProblemSpec:
    """A named, fully-instantiated benchmark problem: the objective plus the
    starting point the harness will use."""

    name: str
    objective: Objective
    x_init: Vector
    seed: int = 0

    @property
    def dim(self) -> int:
        return self.objective.dim

    @property
    def known_L(self) -> Optional[float]:
        return self.objective.known_L

    @property
    def known_M(self) -> Optional[float]:
        return self.objective.known_M

    @property
    def lower_bound(self) -> Optional[float]:
        return self.objective.lower_bound


DATA_ENV_VAR = "RESTARTAGD_DATA"

PROBLEM_NAMES = ("rosenbrock", "quadratic", "cosine_sum", "matcomp_synthetic", "movielens")


def make_problem(name: str, seed: int = 0, dim: Optional[int] = None,
                 lam: float = 1.0, rank: Optional[int] = None,
                 fraction: float = 0.3, data_path: Optional[str] = None,
                 ) -> ProblemSpec:
    """Build a registered problem by name.

    The same (name, seed, shape) always produces bitwise-identical data and
    starting points.  ``movielens`` reads ``u.data`` from ``data_path`` or,
    failing that, from the directory named by the RESTARTAGD_DATA environment
    variable.
    """
    if name == "rosenbrock":
        return ProblemSpec(name, rosenbrock(), as_point([-1.0, 1.0]), seed)
    if name == "quadratic":
        d = dim or 10
        rng = np.random.default_rng(seed)
        return ProblemSpec(name, quadratic(d, lam), rng.standard_normal(d), seed)
    if name == "cosine_sum":
        d = dim or 10
        rng = np.random.default_rng(seed)
        return ProblemSpec(name, cosine_sum(d), rng.uniform(-3.0, 3.0, d), seed)
    if name == "matcomp_synthetic":
        r = rank or 5
        inst = synthetic_completion_instance(rank=r, fraction=fraction, seed=seed)
        return ProblemSpec(name, matrix_completion(inst, r),
                           completion_init(inst, r, seed + 1), seed)
    if name == "movielens":
        r = rank or 100
        if data_path is None:
            root = os.environ.get(DATA_ENV_VAR)
            if root is None:
                raise ValueError(
                    f"movielens needs a data path: pass one or set {DATA_ENV_VAR}"
                )
            data_path = os.path.join(root, "u.data")
        inst = load_movielens_100k(data_path)
        return ProblemSpec(name, matrix_completion(inst, r),
                           completion_init(inst, r, seed + 1), seed)
    raise ValueError(f"unknown problem {name!r}; known: {', '.join(PROBLEM_NAMES)}")
