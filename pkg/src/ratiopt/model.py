"""Problem data model, objective, gradients, and stationarity checks.

The objective is

    F(x) = gamma * ||x||_1 / ||x||_2 + Phi(x),    x in the cone,

with the convention ||0||_1 / ||0||_2 = 1, and Phi either the least-squares
fit 0.5*||Ax - b||^2 or the residual norm ||Ax - b||.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import (
    ConeViolation,
    DimensionMismatch,
    NonConvergence,
    SingularResidual,
    ZeroVector,
)


class Cone(Enum):
    """Feasible set for the recovery variable."""

    FREE = "free"
    NONNEG = "nonneg"


class Fidelity(Enum):
    """Data-fitting term."""

    LEAST_SQUARES = "least_squares"
    RESIDUAL_NORM = "residual_norm"


def ratio(x) -> float:
    """L1-over-L2 sparseness measure with ratio(0) = 1 by convention."""
    x = np.asarray(x, dtype=float)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        return 1.0
    return float(np.abs(x).sum() / nrm)


@dataclass(frozen=True)
class Support:
    """Sorted set of column indices forming a support set."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("support indices must be strictly increasing")
        if idx and idx[0] < 0:
            raise ValueError("support indices must be nonnegative")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_vector(cls, x) -> "Support":
        return cls(tuple(np.flatnonzero(np.asarray(x))))

    def to_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int)

    def complement(self, n: int) -> np.ndarray:
        mask = np.ones(n, dtype=bool)
        mask[self.to_array()] = False
        return np.flatnonzero(mask)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, i):
        return i in self.indices

    def __iter__(self):
        return iter(self.indices)


@dataclass(frozen=True)
class Problem:
    """Sensing matrix, observation, regularization weight, cone, fidelity."""

    A: np.ndarray
    b: np.ndarray
    gamma: float
    cone: Cone = Cone.FREE
    fidelity: Fidelity = Fidelity.LEAST_SQUARES

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise DimensionMismatch("A must be a nonempty 2-D matrix")
        if b.shape[0] != A.shape[0]:
            raise DimensionMismatch(
                f"b has length {b.shape[0]}, expected {A.shape[0]}"
            )
        if not np.isfinite(A).all() or not np.isfinite(b).all():
            raise ValueError("A and b must be finite")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def data_condition_holds(self) -> bool:
        """True when A^T b admits a nonzero limit point on the cone.

        Free cone: A^T b != 0.  Nonnegative cone: max(A^T b) > 0.
        """
        c = self.A.T @ self.b
        if self.cone is Cone.FREE:
            return bool(np.any(c != 0.0))
        return bool(np.max(c) > 0.0)

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.n:
            raise DimensionMismatch(f"x has length {x.shape[0]}, expected {self.n}")
        if self.cone is Cone.NONNEG and np.any(x < 0.0):
            raise ConeViolation("x has negative entries but the cone is nonnegative")
        return x


@dataclass(frozen=True)
class NewtonConfig:
    """Parameters of the globalized semismooth Newton phase."""

    eta: float = 1e-3
    nu: float = 1e-8
    mu: float = 1e-8
    delta: float = 0.95
    b_scale: float = 0.1
    grad_tol: float = 1e-11
    ssn_max: int = 2500

    def __post_init__(self):
        if not 0.0 < self.mu < 0.5:
            raise ValueError("mu must lie in (0, 1/2)")
        for name in ("eta", "nu", "delta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if not self.b_scale > 0:
            raise ValueError("b_scale must be positive")


@dataclass(frozen=True)
class SolverConfig:
    """ADMM and two-phase solver parameters."""

    beta: float
    T: int = 5
    tau: float = 0.0
    imax: int = 2000
    rel_tol: float = 1e-8
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    seed: int = 0

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.T < 0:
            raise ValueError("T must be nonnegative")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")


def fidelity_value(p: Problem, x: np.ndarray) -> float:
    res = p.A @ x - p.b
    if p.fidelity is Fidelity.LEAST_SQUARES:
        return 0.5 * float(res @ res)
    return float(np.linalg.norm(res))


def objective(p: Problem, x) -> float:
    """Full objective gamma*ratio(x) + Phi(x); raises on cone violations."""
    x = p.check_point(x)
    return p.gamma * ratio(x) + fidelity_value(p, x)


def fidelity_grad(p: Problem, x) -> np.ndarray:
    """Gradient of the data-fitting term Phi at x."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != p.n:
        raise DimensionMismatch(f"x has length {x.shape[0]}, expected {p.n}")
    res = p.A @ x - p.b
    if p.fidelity is Fidelity.LEAST_SQUARES:
        return p.A.T @ res
    nrm = np.linalg.norm(res)
    if nrm == 0.0:
        raise SingularResidual("residual-norm gradient undefined at Ax = b")
    return p.A.T @ (res / nrm)


def lipschitz_estimate(p: Problem, seed: int = 0, tol: float = 1e-6,
                       max_iters: int = 10000) -> float:
    """Largest eigenvalue of A^T A by seeded power iteration.

    Only meaningful for the least-squares fidelity: the residual-norm
    gradient has no global curvature bound, so callers must supply beta
    directly in that case.
    """
    if p.fidelity is not Fidelity.LEAST_SQUARES:
        raise ValueError(
            "residual-norm fidelity has no global Lipschitz constant; "
            "choose beta explicitly"
        )
    A = p.A
    rng = np.random.Generator(np.random.Philox(seed))
    v = rng.standard_normal(p.n)
    v /= np.linalg.norm(v)
    lam = 0.0
    # eigenvalue error is quadratic in the eigenvector error, so a tighter
    # internal change tolerance comfortably reaches tol relative accuracy
    inner_tol = tol * 1e-3
    for _ in range(max_iters):
        w = A.T @ (A @ v)
        lam_new = float(v @ w)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        if abs(lam_new - lam) <= inner_tol * max(lam_new, 1e-300):
            return lam_new
        lam = lam_new
    raise NonConvergence("power iteration did not converge")


def kkt_residual(p: Problem, x) -> float:
    """Norm of the stationarity residual restricted to supp(x)."""
    x = np.asarray(x, dtype=float).ravel()
    if not np.any(x):
        raise ZeroVector("KKT residual undefined at x = 0")
    idx = np.flatnonzero(x)
    a = float(np.abs(x).sum())
    r = float(np.linalg.norm(x))
    grad = fidelity_grad(p, x)
    res = p.gamma * (np.sign(x[idx]) / r - (a / r**3) * x[idx]) + grad[idx]
    return float(np.linalg.norm(res))


def subgradient_distance(p: Problem, x) -> float:
    """Distance from 0 to the subdifferential of the full objective at x.

    On the support the subdifferential is a singleton; off the support the
    ratio term contributes the interval [-gamma/r, gamma/r] per coordinate
    (free cone), or (-inf, gamma/r] under the nonnegativity constraint.
    """
    x = np.asarray(x, dtype=float).ravel()
    if not np.any(x):
        raise ZeroVector("subgradient distance undefined at x = 0")
    idx = np.flatnonzero(x)
    mask = np.zeros(x.shape[0], dtype=bool)
    mask[idx] = True
    a = float(np.abs(x).sum())
    r = float(np.linalg.norm(x))
    grad = fidelity_grad(p, x)
    thr = p.gamma / r
    if p.cone is Cone.FREE:
        on = p.gamma * (np.sign(x[idx]) / r - (a / r**3) * x[idx]) + grad[idx]
        off = np.maximum(np.abs(grad[~mask]) - thr, 0.0)
    else:
        on = p.gamma * (1.0 / r - (a / r**3) * x[idx]) + grad[idx]
        off = np.maximum(-(grad[~mask] + thr), 0.0)
    return float(np.sqrt(np.dot(on, on) + np.dot(off, off)))


@dataclass(frozen=True)
class Nondegeneracy:
    """Outcome of the strict off-support optimality check."""

    nondegenerate: bool
    margin: float


def nondegeneracy_check(p: Problem, x, stationarity_tol: float = 1e-6) -> Nondegeneracy:
    """Strict off-support condition at an (approximately) stationary point.

    Free cone: ||grad_off||_inf < gamma/r.  Nonnegative cone:
    grad_off + gamma/r > 0 componentwise.  The margin is the distance to
    the boundary of the strict inequality (positive iff nondegenerate).
    """
    x = np.asarray(x, dtype=float).ravel()
    if not np.any(x):
        raise ZeroVector("nondegeneracy undefined at x = 0")
    if kkt_residual(p, x) > stationarity_tol:
        raise ValueError("x is not approximately stationary at the given tolerance")
    supp = Support.from_vector(x)
    comp = supp.complement(x.shape[0])
    r = float(np.linalg.norm(x))
    thr = p.gamma / r
    if comp.size == 0:
        return Nondegeneracy(True, np.inf)
    grad_off = fidelity_grad(p, x)[comp]
    if p.cone is Cone.FREE:
        margin = thr - float(np.max(np.abs(grad_off)))
    else:
        margin = float(np.min(grad_off + thr))
    return Nondegeneracy(margin > 0.0, margin)
