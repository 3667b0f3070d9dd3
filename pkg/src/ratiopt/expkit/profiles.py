"""Dolan-More performance profiles."""

from __future__ import annotations

import numpy as np


def performance_ratios(times) -> np.ndarray:
    """r[p, j] = t[p, j] / min_j t[p, j]; failures enter as +inf."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 2:
        raise ValueError("times must be a problems-by-solvers matrix")
    if np.any(t[np.isfinite(t)] <= 0.0):
        raise ValueError("times must be positive (failures as +inf)")
    best = np.min(t, axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        r = t / best
    # problems where every solver failed count as unsolved for everyone
    r[~np.isfinite(r)] = np.inf
    return r


def performance_profile(times, taus=None):
    """Returns (taus, pi) with pi[i, j] = fraction of problems where solver j
    is within a factor taus[i] of the best; curves are nondecreasing."""
    r = performance_ratios(times)
    if taus is None:
        finite = r[np.isfinite(r)]
        top = float(finite.max()) if finite.size else 1.0
        taus = np.geomspace(1.0, max(top * 1.01, 1.01), 200)
    taus = np.asarray(taus, dtype=float)
    pi = np.mean(r[None, :, :] <= taus[:, None, None], axis=1)
    return taus, pi
