"""Deterministic cross-platform randomness.

All generators use the counter-based Philox bit stream and draw normals by
inverse CDF, so identical seeds give bit-identical samples independently of
platform and numpy's ziggurat tables.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    u = rng.random(shape)
    # rng.random lives in [0, 1); nudge exact zeros off the ndtri pole
    u = np.where(u == 0.0, 0.5 ** 54, u)
    return ndtri(u)
