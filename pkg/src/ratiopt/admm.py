"""Unified ADMM iteration with the L1/L2 prox x-update, plus an L1 baseline.

One step:

    x^{k+1} = prox of the ratio at q = y^k - z^k/beta, with rho = beta/gamma
    y^{k+1} = argmin_y Phi(y) + (beta/2)||y - x^{k+1} - z^k/beta||^2
    z^{k+1} = z^k + beta (x^{k+1} - y^{k+1})

stopping on the relative change of x or on a caller-supplied support
stability window (the two-phase solver's transition rule).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import FactorizationFailure, InnerNoConvergence
from .model import (
    Cone,
    Fidelity,
    Problem,
    SolverConfig,
    Support,
    fidelity_grad,
    lipschitz_estimate,
    objective,
    subgradient_distance,
)
from .prox import ProxQuery, prox_l1_over_l2, soft_threshold


class LeastSquaresYSolver:
    """Cached solver for (A^T A + beta I) y = A^T b + beta v.

    Uses the m x m system (beta I + A A^T) when the matrix is wide.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, beta: float):
        if not beta > 0 or not np.isfinite(A).all():
            raise FactorizationFailure("beta must be positive and A finite")
        self.A = A
        self.beta = float(beta)
        self.atb = A.T @ b
        m, n = A.shape
        self.wide = m < n
        try:
            if self.wide:
                self.factor = scipy.linalg.cho_factor(beta * np.eye(m) + A @ A.T)
            else:
                self.factor = scipy.linalg.cho_factor(A.T @ A + beta * np.eye(n))
        except scipy.linalg.LinAlgError as exc:
            raise FactorizationFailure(str(exc)) from exc

    def _solve_once(self, rhs: np.ndarray) -> np.ndarray:
        if self.wide:
            return (rhs - self.A.T @ scipy.linalg.cho_solve(
                self.factor, self.A @ rhs)) / self.beta
        return scipy.linalg.cho_solve(self.factor, rhs)

    def solve(self, v: np.ndarray) -> np.ndarray:
        rhs = self.atb + self.beta * v
        y = self._solve_once(rhs)
        # one step of iterative refinement: the wide-path Woodbury solve
        # amplifies roundoff by 1/beta, which the downstream stationarity
        # telemetry would otherwise see
        res = rhs - (self.A.T @ (self.A @ y) + self.beta * y)
        return y + self._solve_once(res)


def y_update_least_squares(p: Problem, beta: float, v) -> np.ndarray:
    """Exact y-subproblem solution for the least-squares fidelity."""
    return LeastSquaresYSolver(p.A, p.b, beta).solve(np.asarray(v, dtype=float))


def y_update_residual_norm(p: Problem, beta: float, v, inner_tol: float = 1e-9,
                           max_iters: int = 10000) -> np.ndarray:
    """y-subproblem for Phi = ||Ay - b||, solved through its dual.

    The dual maximizes <lam, Av - b> - ||A^T lam||^2/(2 beta) over the unit
    ball, a smooth quadratic handled by accelerated projected gradient;
    the primal point is recovered as y = v - A^T lam / beta.
    """
    A, b = p.A, p.b
    v = np.asarray(v, dtype=float)
    g0 = A @ v - b
    sigma = np.linalg.norm(A, 2)
    if sigma == 0.0:
        return v.copy()
    lip = sigma * sigma / beta
    lam = np.zeros(p.m)
    lam_prev = lam
    tk = 1.0
    for _ in range(max_iters):
        tk_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        w = lam + ((tk - 1.0) / tk_next) * (lam - lam_prev)
        grad = A @ (A.T @ w) / beta - g0
        cand = w - grad / lip
        nrm = np.linalg.norm(cand)
        if nrm > 1.0:
            cand /= nrm
        lam_prev, lam, tk = lam, cand, tk_next
        y = v - (A.T @ lam) / beta
        res = A @ y - b
        res_nrm = np.linalg.norm(res)
        if res_nrm > 0.0:
            sub = A.T @ (res / res_nrm) + beta * (y - v)
            if np.linalg.norm(sub) <= inner_tol:
                return y
        else:
            return y
    raise InnerNoConvergence("residual-norm y-subproblem did not converge")


@dataclass
class AdmmState:
    """Iterate triple plus support history and convergence telemetry."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    k: int = 0
    support_history: tuple = ()
    relerr: float = np.inf
    y_residual: float = np.inf


@dataclass
class AdmmTrace:
    """Per-iteration records (append-only, equal lengths)."""

    relerr: list = field(default_factory=list)
    y_residual: list = field(default_factory=list)
    kkt_upper_bound: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    support: list = field(default_factory=list)
    grad_gap: list = field(default_factory=list)       # ||grad Phi(y) - z||
    subgrad_distance: list = field(default_factory=list)
    lipschitz: float | None = None
    stop_reason: str = ""


def relative_change(x_prev, x_new) -> float:
    num = np.linalg.norm(np.asarray(x_prev) - np.asarray(x_new))
    den = max(1e-16, np.linalg.norm(x_prev), np.linalg.norm(x_new))
    return float(num / den)


def _windows_equal(window) -> bool:
    first = window[0]
    return all(np.array_equal(first, s) for s in window)


def _make_y_step(p: Problem, cfg: SolverConfig):
    if p.fidelity is Fidelity.LEAST_SQUARES:
        solver = LeastSquaresYSolver(p.A, p.b, cfg.beta)
        return solver.solve
    return lambda v: y_update_residual_norm(p, cfg.beta, v)


def _ratio_x_step(p: Problem, cfg: SolverConfig):
    rho = cfg.beta / p.gamma

    def step(q):
        res = prox_l1_over_l2(ProxQuery(q, rho, p.cone))
        return res.x, res.support.to_array()

    return step


def _l1_x_step(p: Problem, cfg: SolverConfig):
    level = p.gamma / cfg.beta

    def step(q):
        if p.cone is Cone.NONNEG:
            x = np.maximum(q - level, 0.0)
        else:
            x = soft_threshold(q, level)
        return x, np.flatnonzero(x)

    return step


def _run_loop(p, cfg, x0, x_step, support_window=None, record=True,
              ratio_model=True):
    beta = cfg.beta
    x = np.asarray(x0, dtype=float).ravel().copy()
    y = x.copy()
    z = x.copy()
    y_step = _make_y_step(p, cfg)
    L = None
    bound_coef = np.nan
    if record and ratio_model and p.fidelity is Fidelity.LEAST_SQUARES:
        L = lipschitz_estimate(p, seed=cfg.seed)
        bound_coef = L * L / beta + beta
    window_len = (support_window + 1) if support_window is not None else 1
    window = deque(maxlen=max(window_len, 1))
    trace = AdmmTrace(lipschitz=L)
    trace.stop_reason = "imax"
    relerr = np.inf
    y_res = np.inf
    k = 0
    for k in range(1, cfg.imax + 1):
        q = y - z / beta
        x_new, supp = x_step(q)
        v = x_new + z / beta
        y_new = y_step(v)
        z_new = z + beta * (x_new - y_new)
        y_res = float(np.linalg.norm(y - y_new))
        relerr = relative_change(x, x_new)
        if record:
            trace.relerr.append(relerr)
            trace.y_residual.append(y_res)
            trace.kkt_upper_bound.append(bound_coef * y_res)
            trace.support.append(supp)
            if ratio_model:
                trace.objective.append(objective(p, x_new))
                gap = np.linalg.norm(fidelity_grad(p, y_new) - z_new)
                trace.grad_gap.append(float(gap))
                if np.any(x_new):
                    trace.subgrad_distance.append(subgradient_distance(p, x_new))
                else:
                    trace.subgrad_distance.append(np.nan)
            else:
                res = p.A @ x_new - p.b
                trace.objective.append(
                    p.gamma * np.abs(x_new).sum() + 0.5 * float(res @ res))
                trace.grad_gap.append(np.nan)
                trace.subgrad_distance.append(np.nan)
        x, y, z = x_new, y_new, z_new
        window.append(supp)
        if support_window is not None and len(window) == support_window + 1 \
                and _windows_equal(window):
            trace.stop_reason = "support_stable"
            break
        # x = 0 is never stationary under the data condition; a zero
        # iterate early on (e.g. from a zero start) must not trip the
        # relative-change stop.
        if relerr < cfg.rel_tol and np.any(x_new):
            trace.stop_reason = "relerr"
            break
    history = tuple(Support(tuple(s)) for s in window)
    state = AdmmState(x=x, y=y, z=z, k=k, support_history=history,
                      relerr=relerr, y_residual=y_res)
    return state, trace


def admm_step(p: Problem, cfg: SolverConfig, st: AdmmState,
              y_step=None) -> AdmmState:
    """One full (x, y, z) update from the given state."""
    if y_step is None:
        y_step = _make_y_step(p, cfg)
    beta = cfg.beta
    q = st.y - st.z / beta
    res = prox_l1_over_l2(ProxQuery(q, beta / p.gamma, p.cone))
    x_new = res.x
    v = x_new + st.z / beta
    y_new = y_step(v)
    z_new = st.z + beta * (x_new - y_new)
    history = (st.support_history + (res.support,))[-(cfg.T + 1):]
    return AdmmState(
        x=x_new, y=y_new, z=z_new, k=st.k + 1, support_history=history,
        relerr=relative_change(st.x, x_new),
        y_residual=float(np.linalg.norm(st.y - y_new)),
    )


def run_admm(p: Problem, cfg: SolverConfig, x0, support_window=None,
             record=True):
    """Iterate until RelErr < rel_tol or the iteration cap.

    With support_window = T the loop instead stops as soon as the support
    is unchanged over T+1 consecutive iterates (two-phase transition rule).
    Initialization follows y0 = z0 = x0.
    """
    x_step = _ratio_x_step(p, cfg)
    return _run_loop(p, cfg, x0, x_step, support_window=support_window,
                     record=record, ratio_model=True)


def run_admm_l1_baseline(p: Problem, cfg: SolverConfig, x0, record=True):
    """Same splitting with the soft-threshold x-update (lasso comparator)."""
    x_step = _l1_x_step(p, cfg)
    return _run_loop(p, cfg, x0, x_step, support_window=None, record=record,
                     ratio_model=False)
