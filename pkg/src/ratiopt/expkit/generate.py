"""Synthetic sensing matrices and ground-truth signals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import make_rng, standard_normal


def gen_gaussian_corr(m: int, n: int, r: float, seed: int) -> np.ndarray:
    """Rows i.i.d. N(0, (1-r) I + r 11^T), via the single-factor split
    sqrt(1-r) g + sqrt(r) z per row."""
    if not 0.0 < r < 1.0:
        raise ValueError("correlation r must lie in (0, 1)")
    rng = make_rng(seed)
    g = standard_normal(rng, (m, n))
    z = standard_normal(rng, (m, 1))
    return np.sqrt(1.0 - r) * g + np.sqrt(r) * z


def gen_odct(m: int, n: int, F: float, seed: int) -> np.ndarray:
    """Oversampled DCT columns a_j = cos(2 pi w j / F)/sqrt(m), w ~ U[0,1]^m;
    larger F means higher mutual coherence."""
    if not F > 0:
        raise ValueError("F must be positive")
    rng = make_rng(seed)
    w = rng.random(m)
    j = np.arange(1, n + 1, dtype=float)
    return np.cos(2.0 * np.pi * np.outer(w, j) / F) / np.sqrt(m)


def gen_ground_truth(n: int, s: int, D: float, seed: int) -> np.ndarray:
    """s-sparse signal at uniformly random positions with values
    sign(g1) * 10^(D (u - 1/2)) * g2, u ~ U[0, 1].

    D sets the per-entry dynamic range (the 10^D spread between the largest
    and smallest scale factors) while keeping the overall signal scale at
    unity; D = 0 gives plain random-sign normals.
    """
    if not 1 <= s <= n:
        raise ValueError("sparsity must satisfy 1 <= s <= n")
    rng = make_rng(seed)
    positions = rng.permutation(n)[:s]
    values = np.zeros(s)
    todo = np.arange(s)
    while todo.size:
        g1 = standard_normal(rng, todo.size)
        g2 = standard_normal(rng, todo.size)
        u = rng.random(todo.size)
        values[todo] = np.sign(g1) * (10.0 ** (D * (u - 0.5))) * g2
        todo = todo[values[todo] == 0.0]
    x = np.zeros(n)
    x[positions] = values
    return x


def mutual_coherence(A: np.ndarray) -> float:
    norms = np.linalg.norm(A, axis=0)
    G = (A / norms).T @ (A / norms)
    np.fill_diagonal(G, 0.0)
    return float(np.max(np.abs(G)))


@dataclass(frozen=True)
class SynthSpec:
    """One synthetic instance family; coherence is r (gaussian) or F (odct)."""

    family: str
    m: int
    n: int
    s: int
    coherence: float
    dynamic_D: float = 1.0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.family not in ("gaussian", "odct"):
            raise ValueError("family must be 'gaussian' or 'odct'")
        if self.family == "gaussian" and not 0.0 < self.coherence < 1.0:
            raise ValueError("gaussian correlation must lie in (0, 1)")
        if self.family == "odct" and not self.coherence > 0:
            raise ValueError("odct oversampling factor must be positive")
        if not 1 <= self.s <= self.n:
            raise ValueError("sparsity must satisfy 1 <= s <= n")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")

    def build(self):
        """Returns (A, b, x_star), deterministic in the seed."""
        if self.family == "gaussian":
            A = gen_gaussian_corr(self.m, self.n, self.coherence, self.seed)
        else:
            A = gen_odct(self.m, self.n, self.coherence, self.seed)
        xstar = gen_ground_truth(self.n, self.s, self.dynamic_D,
                                 self.seed + 1_000_003)
        b = A @ xstar
        if self.noise_sigma > 0:
            rng = make_rng(self.seed + 2_000_003)
            b = b + self.noise_sigma * standard_normal(rng, self.m)
        return A, b, xstar
