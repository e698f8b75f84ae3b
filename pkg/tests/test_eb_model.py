import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from ebmt.eb_model import (
    CountsDataset,
    beta_fn,
    beta_w,
    cl_value,
    g_slab,
    g_slab_alpha,
    l_value,
    log_marginal,
    mmle,
    q_value,
    score,
    slab_posterior_params,
    statistic,
)


def frac_beta(m, x):
    phi = Fraction(math.comb(m, x), 2 ** m)
    return Fraction(1, m + 1) / phi - 1


class TestSlab:
    def test_g_slab(self):
        assert g_slab(4) == 0.2
        assert g_slab(10**6) == 1 / (10**6 + 1)
        with pytest.raises(ValueError):
            g_slab(0)

    def test_g_slab_alpha(self):
        assert g_slab_alpha(4, 2, 1) == pytest.approx(0.2, rel=1e-13)
        assert g_slab_alpha(4, 0, 1) == pytest.approx(0.2, rel=1e-13)
        assert math.fsum(g_slab_alpha(6, x, 3) for x in range(7)) == pytest.approx(1.0, rel=1e-13)
        for m, x, a in [(10, 3, 2), (40, 31, 5)]:
            ref = mp.binomial(m, x) * mp.beta(x + a, m - x + a) / mp.beta(a, a)
            assert g_slab_alpha(m, x, a) == pytest.approx(float(ref), rel=1e-12)

    def test_posterior_params(self):
        assert slab_posterior_params(3, 10) == (4, 8)


class TestBeta:
    def test_examples(self):
        assert beta_fn(4, 2) == pytest.approx(-0.4666666666666667, rel=1e-14)
        assert beta_fn(4, 4) == pytest.approx(2.2, rel=1e-14)
        assert beta_w(4, 4, 0.5) == pytest.approx(2.2 / 2.1, rel=1e-14)
        assert beta_w(4, 2, 0.0) == pytest.approx(-0.4666666666666667, rel=1e-14)

    def test_against_rationals(self):
        for m in (1, 2, 7, 30):
            for x in range(m + 1):
                b = frac_beta(m, x)
                assert beta_fn(m, x) == pytest.approx(float(b), rel=1e-13, abs=1e-15)
                for w in (Fraction(1, 3), Fraction(9, 10)):
                    assert beta_w(m, x, float(w)) == pytest.approx(float(b / (1 + w * b)), rel=1e-13, abs=1e-15)

    def test_symmetry_and_minimum(self):
        for m in (8, 9, 100):
            vals = beta_fn(m, np.arange(m + 1))
            assert np.allclose(vals, vals[::-1], rtol=1e-13)
            assert vals.min() > -1
            assert vals.argmin() in (m // 2, (m + 1) // 2)

    def test_decreasing_in_w(self):
        ws = np.linspace(0.01, 1, 30)
        for m, x in [(20, 20), (20, 10), (1000, 600)]:
            vals = [beta_w(m, x, w) for w in ws]
            assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_huge_ratio_is_finite(self):
        # beta(m) = 2^m/(m+1) - 1 overflows; beta_w saturates at 1/w
        assert beta_w(10**6, 10**6, 0.25) == pytest.approx(4.0, rel=1e-14)
        assert np.isfinite(beta_w(10**6, np.arange(0, 10**6 + 1, 1000), 1e-6)).all()


def ds(counts, m):
    return CountsDataset.homogeneous(counts, m)


class TestLikelihood:
    def test_examples(self):
        assert log_marginal(ds([2], 4), 0.0) == pytest.approx(math.log(0.375), rel=1e-14)
        assert log_marginal(ds([2], 4), 1.0) == pytest.approx(math.log(0.2), rel=1e-14)
        assert score(ds([4], 4), 1.0) == pytest.approx(0.6875, rel=1e-14)
        assert score(ds([4, 2], 4), 0.5) == pytest.approx(2.2 / 2.1 - (7 / 15) / (23 / 30), rel=1e-13)
        assert score(ds([4, 2], 4), 0.5) == pytest.approx(0.438923, abs=1e-6)

    def test_additive(self):
        a, b = ds([1, 5, 7], 8), ds([0, 8], 8)
        both = ds([1, 5, 7, 0, 8], 8)
        for w in (0.0, 0.2, 0.9, 1.0):
            assert log_marginal(both, w) == pytest.approx(log_marginal(a, w) + log_marginal(b, w), rel=1e-13)

    def test_score_matches_finite_difference(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            m = int(rng.integers(2, 200))
            d = CountsDataset.homogeneous(rng.integers(0, m + 1, size=int(rng.integers(1, 50))), m)
            for w in (0.05, 0.3, 0.7):
                h = 1e-6
                fd = (log_marginal(d, w + h) - log_marginal(d, w - h)) / (2 * h)
                s = score(d, w)
                assert abs(fd - s) <= 1e-6 * max(1.0, abs(s))

    def test_concave_and_score_decreasing(self):
        d = ds([0, 3, 10, 10, 5, 6], 10)
        ws = np.linspace(0.01, 0.99, 60)
        L = np.array([log_marginal(d, w) for w in ws])
        assert np.all(np.diff(L, 2) <= 1e-12)
        S = [score(d, w) for w in ws]
        assert all(b < a for a, b in zip(S, S[1:]))

    def test_constant_score_when_beta_zero(self):
        # m = 1: phi = 1/2 = g, so beta = 0 at both outcomes
        d = ds([0, 1, 1], 1)
        assert score(d, 0.3) == 0.0 and score(d, 0.9) == 0.0


class TestMMLE:
    def test_examples(self):
        e = mmle(ds([4], 4))
        assert e.at_upper_boundary and e.w_hat == 1.0
        e = mmle(ds([4, 2], 4))
        # 2.2(1 - (7/15) w) = (7/15)(1 + 2.2 w)  =>  w = (2.2 - 7/15) / (2 * 2.2 * 7/15)
        w_ref = (2.2 - 7 / 15) / (2 * 2.2 * 7 / 15)
        assert w_ref == pytest.approx(0.844156, abs=1e-6)
        assert not (e.at_lower_boundary or e.at_upper_boundary)
        assert abs(e.w_hat - w_ref) <= 1e-12
        n = 9
        e = mmle(ds([2] * n, 4))
        assert e.at_lower_boundary and e.w_hat == 1 / n

    def test_interior_root_quality(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            m = int(rng.integers(2, 500))
            n = int(rng.integers(5, 400))
            s = int(rng.integers(1, n))
            x = np.r_[rng.binomial(m, 0.9, s), rng.binomial(m, 0.5, n - s)]
            d = CountsDataset.homogeneous(x, m)
            e = mmle(d)
            if e.at_lower_boundary:
                assert score(d, 1 / n) <= 0
            elif e.at_upper_boundary:
                assert score(d, 1.0) >= 0
            else:
                assert abs(e.score_at_w) <= 1e-8 * n
                delta = 1e-9
                assert score(d, max(1 / n, e.w_hat - delta)) >= 0 >= score(d, min(1.0, e.w_hat + delta))

    def test_heterogeneous_path_matches(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            m = int(rng.integers(2, 300))
            x = rng.binomial(m, 0.6, size=int(rng.integers(1, 300)))
            d = CountsDataset.homogeneous(x, m)
            a, b = mmle(d), mmle(d, general=True)
            assert a == b

    def test_mixed_trial_counts(self):
        d = CountsDataset(np.array([4, 2, 30, 15]), np.array([4, 4, 30, 30]))
        split = [CountsDataset.homogeneous([4, 2], 4), CountsDataset.homogeneous([30, 15], 30)]
        for w in (0.1, 0.6):
            assert score(d, w) == pytest.approx(sum(score(s, w) for s in split), rel=1e-13)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            CountsDataset(np.array([], dtype=int), np.array([], dtype=int))


class TestStatistics:
    def test_examples(self):
        assert l_value(4, 4, 0.5) == pytest.approx(0.0625 / 0.2625, rel=1e-13)
        assert l_value(4, 2, 0.5) == pytest.approx(0.375 / 0.575, rel=1e-13)
        assert l_value(4, 3, 0.0) == 1.0
        c = 5 / math.sqrt(2 * math.pi)
        assert cl_value(4, 4, 0.5) == pytest.approx(0.0625 / (0.0625 + 0.2 * c), rel=1e-13)
        assert cl_value(4, 4, 0.5) == pytest.approx(0.1354449, abs=1e-7)
        assert cl_value(7, 1, 0.0) == 1.0
        assert q_value(4, 3, 0.5) == pytest.approx(0.3125 / 0.7125, rel=1e-13)
        assert q_value(4, 2, 0.0) == 1.0
        assert q_value(4, 2, 0.3) < 1.0
        assert cl_value(1000, 500, 0.1) > cl_value(1000, 700, 0.1)

    def test_exclusive_tail_flag(self):
        # slab tail (m - u)/(m + 1) vanishes at the extremes
        assert q_value(4, 4, 0.5, exclusive_tail=True) == 1.0
        assert q_value(4, 3, 0.5, exclusive_tail=True) == pytest.approx(0.3125 / (0.3125 + 0.2), rel=1e-13)

    @pytest.mark.parametrize("m", [8, 9, 50, 1001])
    def test_symmetry_and_monotonicity(self, m):
        x = np.arange(m + 1)
        for w in (0.01, 0.3, 0.9):
            for f in (l_value, cl_value, q_value):
                v = f(m, x, w)
                assert np.array_equal(v, v[::-1])
                upper = v[(m + 1) // 2:]
                assert np.all(np.diff(upper) <= 0)
                assert np.all((v >= 0) & (v <= 1))
            assert np.all(cl_value(m, x, w) <= l_value(m, x, w))

    def test_q_strictly_inside(self):
        v = q_value(40, np.arange(41), 0.2)
        assert np.all((v > 0) & (v < 1))

    def test_endpoint_limits(self):
        assert l_value(10, 10, 1.0) == 0.0
        assert q_value(10, 5, 1.0) == 0.0

    def test_statistic_paths_agree(self):
        rng = np.random.default_rng(1)
        x = rng.integers(0, 51, size=200)
        d = CountsDataset.homogeneous(x, 50)
        for proc in ("ell", "cl", "q"):
            assert np.array_equal(statistic(d, proc, 0.2), statistic(d, proc, 0.2, general=True))

    def test_statistic_uses_each_trial_count(self):
        d = CountsDataset(np.array([4, 3, 9]), np.array([4, 6, 10]))
        got = statistic(d, "ell", 0.4)
        assert got[0] == l_value(4, 4, 0.4)
        assert got[1] == l_value(6, 3, 0.4)
        assert got[2] == l_value(10, 9, 0.4)
