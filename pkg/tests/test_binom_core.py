import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from ebmt.binom_core import (
    BinomParams,
    cdf,
    entropy_T,
    gauss_pdf,
    gauss_survival,
    inv_survival,
    log_coeff_continuous,
    log_pmf,
    log_pmf_array,
    log_survival,
    pmf,
    survival,
    survival_array,
)

mp.mp.dps = 40


def mp_log_pmf(m, theta, x):
    return mp.log(mp.binomial(m, x)) + x * mp.log(theta) + (m - x) * mp.log(1 - mp.mpf(theta))


def mp_tail(m, theta, k):
    """P(X >= k) by summing the smaller side with the term recurrence in high precision."""
    theta = mp.mpf(theta)
    ratio = theta / (1 - theta)
    if k > m * theta:
        term = mp.exp(mp_log_pmf(m, theta, k))
        total, j = mp.mpf(0), k
        while j <= m and (term > total * mp.mpf(10) ** -35 or j == k):
            total += term
            term *= (m - j) * ratio / (j + 1)
            j += 1
        return total
    if k == 0:
        return mp.mpf(1)
    term = mp.exp(mp_log_pmf(m, theta, k - 1))
    total, j = mp.mpf(0), k - 1
    while j >= 0 and (term > total * mp.mpf(10) ** -35 or j == k - 1):
        total += term
        term *= j / ((m - j + 1) * ratio)
        j -= 1
    return 1 - total


def exact_tail(m, k):
    return Fraction(sum(math.comb(m, j) for j in range(k, m + 1)), 2 ** m)


class TestLogPmf:
    def test_examples(self):
        assert log_pmf(BinomParams(4, 0.5), 2) == pytest.approx(math.log(6 / 16), rel=1e-14)
        assert log_pmf(BinomParams(4, 1.0), 4) == 0.0
        assert log_pmf(BinomParams(4, 0.5), 1) == pytest.approx(math.log(4 / 16), rel=1e-14)

    def test_degenerate(self):
        assert log_pmf(BinomParams(4, 1.0), 3) == -math.inf
        assert log_pmf(BinomParams(4, 0.0), 0) == 0.0
        assert log_pmf(BinomParams(4, 0.0), 1) == -math.inf

    def test_domain(self):
        with pytest.raises(ValueError):
            log_pmf(BinomParams(4, 0.5), 5)
        with pytest.raises(ValueError):
            log_pmf(BinomParams(4, 0.5), -1)
        with pytest.raises(ValueError):
            BinomParams(0, 0.5)
        with pytest.raises(ValueError):
            BinomParams(3, 1.5)

    @pytest.mark.parametrize("m", [1, 7, 50, 999, 10**4, 10**6])
    @pytest.mark.parametrize("theta", [0.5, 0.03, 0.77, 0.999])
    def test_relative_accuracy_against_mpmath(self, m, theta):
        rng = np.random.default_rng(m)
        xs = np.unique(np.r_[0, m, rng.integers(0, m + 1, size=40), int(m * theta)])
        got = log_pmf_array(m, theta, xs)
        for x, g in zip(xs, got):
            ref = mp_log_pmf(m, theta, int(x))
            if ref < -700:
                # exp underflows; only the log value is meaningful here
                assert abs(g - float(ref)) <= 1e-12 * abs(float(ref))
                continue
            assert abs(math.expm1(g - float(ref))) <= 1e-12

    def test_symmetry_bit_exact(self):
        for m in (5, 40, 1001, 20000):
            x = np.arange(m + 1)
            a = log_pmf_array(m, 0.5, x)
            assert np.array_equal(a, a[::-1])

    @pytest.mark.parametrize("m", [1, 10, 333, 10**4])
    def test_normalisation(self, m):
        for theta in (0.01, 0.3, 0.5, 0.8, 0.99):
            total = math.fsum(np.exp(log_pmf_array(m, theta, np.arange(m + 1))))
            assert abs(total - 1.0) <= 1e-10


class TestTails:
    def test_examples(self):
        p = BinomParams(4, 0.5)
        assert survival(p, 3) == pytest.approx(0.3125, rel=1e-14)
        assert survival(p, 0) == 1.0
        assert survival(p, 4) == pytest.approx(1 / 16, rel=1e-14)
        assert survival(p, 5) == 0.0
        assert cdf(p, 2) == pytest.approx(11 / 16, rel=1e-14)
        assert cdf(p, -1) == 0.0
        assert cdf(p, 4) == 1.0

    def test_exact_rationals_small_m(self):
        for m in range(1, 21):
            p = BinomParams(m, 0.5)
            arr = survival_array(m, 0.5)
            for k in range(m + 2):
                ref = float(exact_tail(m, k)) if k <= m else 0.0
                assert survival(p, k) == pytest.approx(ref, rel=1e-13, abs=1e-15)
                assert arr[k] == pytest.approx(ref, rel=1e-13, abs=1e-15)
                if k <= m:
                    assert cdf(p, k) == pytest.approx(1 - float(exact_tail(m, k + 1)), rel=1e-13, abs=1e-15)

    @pytest.mark.parametrize("m,theta", [(200, 0.5), (1000, 0.3), (5000, 0.9), (10**5, 0.5)])
    def test_against_mpmath(self, m, theta):
        p = BinomParams(m, theta)
        mean = m * theta
        sd = math.sqrt(m * theta * (1 - theta))
        for k in sorted({int(mean + z * sd) for z in (-8, -3, -1, 0, 1, 3, 8)} & set(range(m + 2))):
            ref = mp_tail(m, theta, k)
            got = survival(p, k)
            assert abs(got - float(ref)) <= max(1e-14, 1e-12 * float(ref))

    def test_cdf_plus_survival(self):
        for m, theta in [(30, 0.2), (300, 0.5), (3000, 0.71)]:
            p = BinomParams(m, theta)
            for k in range(-1, m + 1, max(1, m // 37)):
                assert abs(cdf(p, k) + survival(p, k + 1) - 1.0) <= 1e-12

    def test_log_survival_deep_tail(self):
        p = BinomParams(2000, 0.5)
        ref = mp.log(mp.fsum(mp.binomial(2000, j) for j in range(1990, 2001))) - 2000 * mp.log(2)
        assert log_survival(p, 1990) == pytest.approx(float(ref), rel=1e-12)
        assert survival(p, 1990) == 0.0 or survival(p, 1990) < 1e-300

    def test_degenerate_tails(self):
        p = BinomParams(5, 1.0)
        assert survival(p, 5) == 1.0 and cdf(p, 4) == 0.0
        q = BinomParams(5, 0.0)
        assert survival(q, 1) == 0.0 and cdf(q, 0) == 1.0


class TestInverse:
    def test_examples(self):
        p = BinomParams(4, 0.5)
        assert inv_survival(p, 0.3) == 4
        assert inv_survival(p, 1.0) == 0
        assert inv_survival(p, 0.3125) == 3
        with pytest.raises(ValueError):
            inv_survival(p, 0.0)

    def test_round_trip(self):
        for m, theta in [(12, 0.5), (100, 0.5), (250, 0.37)]:
            p = BinomParams(m, theta)
            for k in range(m + 1):
                s = survival(p, k)
                if s > 0:
                    # several k can share a tail value once it rounds to 1
                    j = inv_survival(p, s)
                    assert j <= k and survival(p, j) == pytest.approx(s, rel=1e-12)
                    if s < 0.999:
                        assert j == k


class TestContinuousCoefficient:
    def test_examples(self):
        assert log_coeff_continuous(4, 2) == pytest.approx(math.log(6), rel=1e-14)
        assert log_coeff_continuous(4, 0) == pytest.approx(0.0, abs=1e-15)
        assert log_coeff_continuous(4, 2.0) == log_coeff_continuous(4, 2)

    def test_integer_agreement_and_symmetry(self):
        for m in (9, 100, 4000):
            for x in range(0, m + 1, max(1, m // 50)):
                assert log_coeff_continuous(m, x) == pytest.approx(math.log(math.comb(m, x)), abs=1e-10)
            for x in np.linspace(0, m, 17):
                assert log_coeff_continuous(m, x) == pytest.approx(log_coeff_continuous(m, m - x), abs=1e-10)

    def test_real_argument_against_gamma(self):
        for m, x in [(10, 3.3), (1000, 612.75), (10**6, 500123.5)]:
            ref = mp.loggamma(m + 1) - mp.loggamma(x + 1) - mp.loggamma(m - x + 1)
            assert log_coeff_continuous(m, x) == pytest.approx(float(ref), rel=1e-12)


class TestEntropyAndNormal:
    def test_entropy_examples(self):
        assert entropy_T(0.5, 0.5) == 0.0
        v = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)
        assert entropy_T(0.75, 0.5) == pytest.approx(v, rel=1e-14)
        assert v == pytest.approx(0.130812, abs=1e-6)
        assert entropy_T(0.25, 0.5) == pytest.approx(entropy_T(0.75, 0.5), rel=1e-14)
        assert entropy_T(1.0, 0.5) == pytest.approx(math.log(2))
        assert entropy_T(0.3, 1.0) == math.inf

    def test_entropy_nonnegative(self):
        rng = np.random.default_rng(1)
        for a, p in rng.uniform(0.01, 0.99, size=(200, 2)):
            assert entropy_T(a, p) >= 0

    def test_normal_examples(self):
        assert gauss_survival(0.0) == 0.5
        assert gauss_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)
        assert gauss_survival(1.959964) == pytest.approx(0.025, abs=1e-7)

    def test_normal_tail_accuracy(self):
        for z in np.linspace(-38, 38, 153):
            ref = mp.ncdf(-mp.mpf(float(z)))
            assert abs(gauss_survival(float(z)) / float(ref) - 1) <= 1e-12
            assert abs(gauss_survival(float(z)) + gauss_survival(float(-z)) - 1) <= 1e-14

    def test_mills_sandwich(self):
        for x in np.linspace(0.01, 30, 300):
            phi = gauss_pdf(float(x))
            s = gauss_survival(float(x))
            assert x * phi / (1 + x * x) < s < phi / x
