"""Two-phase solver: ADMM until the support stabilizes, then Newton.

Phase I runs the ratio-prox ADMM until the support set is unchanged over
T+1 consecutive iterates.  The phase-one iterate is hard-shrunk, the
problem is restricted to the surviving support, and the reduced problem is
solved by the globalized semismooth Newton method; the result is embedded
back into the full space with exact zeros off the support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .admm import run_admm
from .exceptions import EmptySupportAfterShrink, IndexOutOfRange
from .model import Problem, SolverConfig, Support
from .prox import fraction_tau, hard_shrink_support
from .ssnewton import ReducedProblem, run_ssnewton


@dataclass(frozen=True)
class AbsoluteTau:
    """Fixed shrink level (tau = 0 for noiseless data)."""

    tau: float


@dataclass(frozen=True)
class FractionOfL1:
    """Shrink level chosen so the removed entries hold < frac of the L1 mass."""

    frac: float


def support_stable(history, T: int) -> bool:
    """True iff the last T+1 supports exist and are identical."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    history = list(history)
    if len(history) < T + 1:
        return False
    tail = history[-(T + 1):]
    return all(s == tail[0] for s in tail)


def embed(u, support: Support, n: int) -> np.ndarray:
    """Scatter u onto the support inside an n-vector of exact zeros."""
    u = np.asarray(u, dtype=float).ravel()
    idx = support.to_array()
    if u.shape[0] != idx.shape[0]:
        raise IndexOutOfRange(
            f"u has length {u.shape[0]} but the support has {idx.shape[0]}")
    if idx.size and idx.max() >= n:
        raise IndexOutOfRange(f"support index {idx.max()} out of range for n={n}")
    x = np.zeros(n)
    x[idx] = u
    return x


def restrict(x, support: Support) -> np.ndarray:
    return np.asarray(x, dtype=float).ravel()[support.to_array()]


@dataclass
class HafamReport:
    x_final: np.ndarray
    x_phase1: np.ndarray
    tran_it: int
    total_it: int
    support: Support
    phase1_trace: object
    phase2_trace: object
    tau: float = 0.0
    phase2_skipped: bool = False


def run_hafam(p: Problem, cfg: SolverConfig, x0, tau_rule=None) -> HafamReport:
    """Full two-phase run; degrades to the phase-one output if the support
    never stabilizes within the iteration cap."""
    if tau_rule is None:
        tau_rule = AbsoluteTau(cfg.tau)
    state, tr1 = run_admm(p, cfg, x0, support_window=cfg.T)
    x_phase1 = state.x
    tran_it = state.k
    if tr1.stop_reason == "imax":
        return HafamReport(
            x_final=x_phase1, x_phase1=x_phase1, tran_it=tran_it,
            total_it=tran_it, support=Support.from_vector(x_phase1),
            phase1_trace=tr1, phase2_trace=None, phase2_skipped=True,
        )
    if isinstance(tau_rule, FractionOfL1):
        tau = fraction_tau(x_phase1, tau_rule.frac)
    else:
        tau = float(tau_rule.tau)
    xhat, supp = hard_shrink_support(x_phase1, tau)
    if len(supp) == 0:
        raise EmptySupportAfterShrink(
            f"tau={tau} removed every entry of the phase-one iterate")
    rp = ReducedProblem.from_support(p, supp)
    u0 = restrict(xhat, supp)
    u, tr2 = run_ssnewton(rp, u0, cfg.newton)
    x_final = embed(u, supp, p.n)
    return HafamReport(
        x_final=x_final, x_phase1=x_phase1, tran_it=tran_it,
        total_it=tran_it + tr2.iterations, support=supp,
        phase1_trace=tr1, phase2_trace=tr2, tau=tau,
    )
