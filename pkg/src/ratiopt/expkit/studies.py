"""Experiment drivers: identification heatmaps and noisy-threshold sweeps."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..admm import run_admm
from ..hafam import AbsoluteTau, run_hafam
from ..model import Cone, Fidelity, Problem, SolverConfig
from .generate import SynthSpec
from .metrics import iacc, rerr


@dataclass(frozen=True)
class IdentCell:
    """Mean Phase-I identification accuracy for one (m, s, T) grid cell."""

    m: int
    s: int
    T: int
    sparsity_level: float  # s / m
    sample_level: float    # m / m_max over the grid
    mean_iacc: float
    n_ok: int
    n_failed: int


@dataclass
class StudyResult:
    cells: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (m, s, T, seed, message)


def _solve_pair(spec: SynthSpec, gamma: float, beta: float, T: int,
                imax: int = 2000):
    """Standalone ADMM solution x_hat and the Phase-I iterate x_T^I."""
    A, b, xstar = spec.build()
    p = Problem(A=A, b=b, gamma=gamma, cone=Cone.FREE,
                fidelity=Fidelity.LEAST_SQUARES)
    x0 = np.zeros(p.n)
    cfg_full = SolverConfig(beta=beta, T=T, imax=imax)
    st_full, _ = run_admm(p, cfg_full, x0, record=False)
    rep = run_hafam(p, cfg_full, x0)
    return xstar, st_full.x, rep


def finite_identification_study(m_list, s_list, T_list, *, n: int,
                                seeds, gamma: float, beta: float,
                                coherence: float = 0.8,
                                imax: int = 2000) -> StudyResult:
    """IAcc(x_hat, x_T^I) averaged over seeds for every (m, s, T) cell.

    Per-seed solver failures are recorded in the result, not raised.
    """
    if not (list(m_list) and list(s_list) and list(T_list)):
        raise ValueError("study grid must be nonempty")
    m_max = max(m_list)
    out = StudyResult()
    for m in m_list:
        for s in s_list:
            for T in T_list:
                vals = []
                failed = 0
                for seed in seeds:
                    spec = SynthSpec(family="gaussian", m=m, n=n, s=s,
                                     coherence=coherence, dynamic_D=1.0,
                                     seed=seed)
                    try:
                        _, x_hat, rep = _solve_pair(spec, gamma, beta, T,
                                                    imax=imax)
                        vals.append(iacc(x_hat, rep.x_phase1))
                    except Exception as exc:  # noqa: BLE001 - per-cell ledger
                        failed += 1
                        out.failures.append((m, s, T, seed, str(exc)))
                mean = float(np.mean(vals)) if vals else float("nan")
                out.cells.append(IdentCell(
                    m=m, s=s, T=T, sparsity_level=s / m,
                    sample_level=m / m_max, mean_iacc=mean,
                    n_ok=len(vals), n_failed=failed,
                ))
    return out


@dataclass(frozen=True)
class NoisyRun:
    tau: float
    seed: int
    rerr: float
    iacc_truth: float


def noisy_tau_study(spec_base: SynthSpec, tau_list, seeds, *, gamma: float,
                    beta: float, T: int = 5, imax: int = 2000):
    """HAFAM under noise for a sweep of shrinkage thresholds tau.

    IAcc is measured between the thresholded Phase-I support and the ground
    truth, which is what the threshold actually controls.
    """
    runs = []
    for seed in seeds:
        spec = SynthSpec(family=spec_base.family, m=spec_base.m,
                         n=spec_base.n, s=spec_base.s,
                         coherence=spec_base.coherence,
                         dynamic_D=spec_base.dynamic_D,
                         noise_sigma=spec_base.noise_sigma, seed=seed)
        A, b, xstar = spec.build()
        p = Problem(A=A, b=b, gamma=gamma, cone=Cone.FREE,
                    fidelity=Fidelity.LEAST_SQUARES)
        cfg = SolverConfig(beta=beta, T=T, imax=imax)
        for tau in tau_list:
            rep = run_hafam(p, cfg, np.zeros(p.n),
                            tau_rule=AbsoluteTau(float(tau)))
            shrunk = np.zeros(p.n)
            shrunk[rep.support.to_array()] = 1.0
            truth_pattern = (xstar != 0).astype(float)
            runs.append(NoisyRun(tau=float(tau), seed=seed,
                                 rerr=rerr(rep.x_final, xstar),
                                 iacc_truth=iacc(shrunk, truth_pattern)))
    return runs


def profile_times(problems, solvers) -> np.ndarray:
    """Wall-clock matrix t[p, j] for performance profiles.

    problems: list of (Problem, x0); solvers: list of (name, fn) with
    fn(problem, x0) -> x; failures become +inf.
    """
    t = np.full((len(problems), len(solvers)), np.inf)
    for i, (p, x0) in enumerate(problems):
        for j, (_, fn) in enumerate(solvers):
            tic = time.perf_counter()
            try:
                fn(p, x0)
                t[i, j] = max(time.perf_counter() - tic, 1e-9)
            except Exception:  # noqa: BLE001 - non-solve
                pass
    return t
