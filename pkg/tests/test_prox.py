"""Exact ratio proximal operator and shrinkage helpers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prox_oracle import oracle_value
from ratiopt.exceptions import ZeroVector
from ratiopt.model import Cone, ratio
from ratiopt.prox import (
    ProxQuery,
    fraction_tau,
    hard_shrink_support,
    prox_l1_over_l2,
    soft_threshold,
)


def prox(q, rho, cone=Cone.FREE):
    return prox_l1_over_l2(ProxQuery(np.asarray(q, float), rho, cone))


class TestProxQuery:
    def test_rho_positive(self):
        with pytest.raises(ValueError):
            ProxQuery(np.ones(2), 0.0)

    def test_nonempty(self):
        with pytest.raises(ValueError):
            ProxQuery(np.zeros(0), 1.0)


class TestProxExamples:
    def test_one_sparse_anchor(self):
        res = prox([5.0, 0.0, 0.0], 10.0)
        assert res.x == pytest.approx([5.0, 0.0, 0.0])
        assert res.value == pytest.approx(1.0)

    def test_zero_anchor(self):
        res = prox(np.zeros(3), 10.0)
        assert not np.any(res.x) and res.value == pytest.approx(1.0)

    def test_nonneg_negative_anchor(self):
        res = prox([-5.0, 0.0], 10.0, Cone.NONNEG)
        assert not np.any(res.x)

    def test_equal_magnitude_fixed_point(self):
        # at q = (2, 2) the ratio gradient vanishes, so x = q is stationary
        # and (by the oracle) globally optimal for rho = 1
        res = prox([2.0, 2.0], 1.0)
        assert res.x == pytest.approx([2.0, 2.0], abs=1e-9)
        assert res.value <= oracle_value([2.0, 2.0], 1.0) + 1e-8

    def test_one_dimensional_identity(self):
        # in 1-D the ratio is constant, so the prox returns the anchor for
        # any rho (the weak-coupling branch when rho*q^2 < 1)
        for q, rho in ((0.1, 0.05), (3.0, 20.0), (-0.4, 0.01)):
            res = prox([q], rho)
            assert res.x == pytest.approx([q], abs=1e-10)


class TestProxStructure:
    def test_value_consistency(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            q = rng.standard_normal(6)
            rho = float(10.0 ** rng.uniform(-1, 1))
            res = prox(q, rho)
            direct = ratio(res.x) + 0.5 * rho * float((res.x - q) @ (res.x - q))
            assert res.value == pytest.approx(direct, abs=1e-12)

    def test_sign_consistency_and_exact_zeros(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            q = rng.standard_normal(5)
            res = prox(q, float(10.0 ** rng.uniform(-1, 1)))
            on = res.support.to_array()
            assert np.all(np.sign(res.x[on]) == np.sign(q[on]))
            off = res.support.complement(5)
            assert np.all(res.x[off] == 0.0)

    def test_stationarity_residual(self):
        # 0 = sign(x)/r - (a/r^3) x + rho (x - q) on the support
        rng = np.random.default_rng(2)
        for _ in range(20):
            q = rng.standard_normal(5) * 2.0
            rho = float(10.0 ** rng.uniform(-1, 1))
            res = prox(q, rho)
            on = res.support.to_array()
            if on.size == 0:
                continue
            a = np.abs(res.x).sum()
            r = np.linalg.norm(res.x)
            resid = (np.sign(res.x[on]) / r - (a / r**3) * res.x[on]
                     + rho * (res.x[on] - q[on]))
            assert np.linalg.norm(resid) <= 1e-10 * (1 + rho)

    def test_support_is_prefix_of_sorted_anchor(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            q = rng.standard_normal(6)
            res = prox(q, float(10.0 ** rng.uniform(-1, 1)))
            k = len(res.support)
            prefix = set(np.argsort(-np.abs(q), kind="stable")[:k])
            assert set(res.support.indices) == prefix

    def test_removing_smallest_support_entry_never_improves(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            q = rng.standard_normal(4) * 1.5
            rho = float(10.0 ** rng.uniform(-1, 1))
            res = prox(q, rho)
            k = len(res.support)
            if k < 2:
                continue
            order = np.argsort(-np.abs(q), kind="stable")
            sub = np.sort(order[:k - 1])
            mask = np.zeros(4, bool)
            mask[sub] = True
            off = float(q[~mask] @ q[~mask])
            from prox_oracle import _restricted_min
            sub_best = _restricted_min(np.abs(q[sub]), rho) + 0.5 * rho * off
            assert sub_best >= res.value - 1e-8

    def test_oracle_agreement_smoke(self):
        rng = np.random.default_rng(5)
        for trial in range(40):
            n = int(rng.integers(1, 5))
            q = rng.standard_normal(n) * (10.0 ** rng.uniform(-1, 1))
            rho = float(10.0 ** rng.uniform(-2, 2))
            cone = Cone.NONNEG if trial % 2 else Cone.FREE
            res = prox(q, rho, cone)
            assert res.value <= oracle_value(
                q, rho, nonneg=(cone is Cone.NONNEG)) + 1e-8


class TestHardShrink:
    def test_support_selector(self):
        xhat, supp = hard_shrink_support([3.0, 0.5, -2.0], 1.0)
        assert xhat == pytest.approx([3.0, 0.0, -2.0])
        assert supp.indices == (0, 2)

    def test_tau_zero_is_identity(self):
        x = np.array([0.0, 1.5, -0.2])
        xhat, supp = hard_shrink_support(x, 0.0)
        assert xhat == pytest.approx(x)
        assert supp.indices == (1, 2)

    def test_everything_removed(self):
        xhat, supp = hard_shrink_support([0.1, -0.2], 1.0)
        assert not np.any(xhat) and len(supp) == 0

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(-100, 100).filter(
               lambda v: v == 0.0 or abs(v) > 1e-6), min_size=1, max_size=8),
           st.floats(0, 10))
    def test_support_matches_rescaling_formula(self, entries, tau):
        # entries away from the underflow region, where the rescaling
        # formula's product cannot denormalize to zero
        x = np.array(entries)
        _, supp = hard_shrink_support(x, tau)
        literal = np.maximum(np.abs(x) - tau, 0.0) * x
        assert set(supp.indices) == set(np.flatnonzero(literal != 0.0))


class TestSoftThreshold:
    def test_examples(self):
        assert soft_threshold([3.0], 1.0) == pytest.approx([2.0])
        assert soft_threshold([-0.5], 1.0) == pytest.approx([0.0])
        assert soft_threshold([0.0], 1.0) == pytest.approx([0.0])


class TestFractionTau:
    def test_uniform_vector(self):
        assert fraction_tau([1.0, 1.0, 1.0, 1.0], 0.3) == pytest.approx(1.0)

    def test_two_scales(self):
        assert fraction_tau([10.0, 0.1], 0.5) == pytest.approx(0.1)

    def test_zero_fraction(self):
        assert fraction_tau([3.0, 1.0], 0.0) == 0.0

    def test_zero_vector_raises(self):
        with pytest.raises(ZeroVector):
            fraction_tau(np.zeros(3), 0.5)
