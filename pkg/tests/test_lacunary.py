"""Fixed-point reduction, trigonometric sums, Monte Carlo distributions."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from permutalab import (
    FixedPointX,
    FourierFunction,
    LabError,
    MixedNormal,
    clt_sample,
    empirical_measure,
    f_sum,
    frac_mul,
    gen_hadamard,
    ks_distance,
    lil_trajectory,
    trig_sum,
)
from permutalab.lacunary import ceil_log2, required_bits
from permutalab.rng import Stream
from permutalab.sequences import block_interleave_permutation, reverse_permutation


class TestFixedPoint:
    def test_dyadic_annihilation(self):
        x = FixedPointX.from_fraction(1, 2)
        assert frac_mul(x, 2).value == 0
        x = FixedPointX.from_fraction(1, 4)
        assert frac_mul(x, 8).value == 0

    def test_third_times_four(self):
        x = FixedPointX.from_fraction(1, 3)
        got = frac_mul(x, 4).to_fraction()
        assert abs(got - Fraction(1, 3)) <= Fraction(1, 2 ** (x.bits - 2))

    def test_precision_exhausted(self):
        x = FixedPointX(0, bits=128)
        with pytest.raises(LabError) as err:
            frac_mul(x, 1 << 64)
        assert err.value.token == "precision-exhausted"

    def test_rational_oracle_error_bound(self):
        # random rationals with denominator <= 1e6: exact arithmetic agrees
        # within the documented bound 2**-(B - ceil(log2 n))
        stream = Stream(8080)
        for _ in range(1000):
            den = 2 + stream.below(999_999)
            num = stream.below(den)
            n = 1 + stream.below(10**9)
            x = FixedPointX.from_fraction(num, den)
            got = frac_mul(x, n).to_fraction()
            want = (Fraction(num, den) * n) % 1
            err = min(abs(got - want), 1 - abs(got - want))  # circular distance
            assert err <= Fraction(1, 2 ** (x.bits - ceil_log2(max(n, 2))))

    def test_required_bits(self):
        assert required_bits(2**100) == 256
        assert required_bits(2**255) == 320
        assert required_bits(2**4095) == 4160

    def test_ceil_log2(self):
        assert [ceil_log2(n) for n in (1, 2, 3, 8, 9)] == [0, 1, 2, 3, 4]


class TestTrigSum:
    def test_x_zero(self):
        assert trig_sum([1, 5, 9], FixedPointX(0)) == 0.0

    def test_x_half(self):
        # sin of integer multiples of pi
        assert abs(trig_sum([3, 7, 11], FixedPointX.from_fraction(1, 2))) < 1e-12

    def test_hand_value_third(self):
        # sin(4 pi/3) + sin(8 pi/3) = 0
        assert abs(trig_sum([2, 4], FixedPointX.from_fraction(1, 3))) < 1e-9

    def test_order_invariance_exact(self):
        x = FixedPointX.from_fraction(17, 97)
        freqs = [3, 1, 16, 9, 27]
        assert trig_sum(freqs, x) == trig_sum(list(reversed(freqs)), x)
        assert trig_sum(freqs, x) == trig_sum(sorted(freqs), x)

    def test_fourier_consistency_with_sine(self):
        f = FourierFunction(sin_coeffs=(1.0,))
        x = FixedPointX.from_fraction(5, 13)
        freqs = [1, 2, 4, 8]
        assert f_sum(f, freqs, x) == pytest.approx(trig_sum(freqs, x), abs=1e-12)

    def test_pure_sine_at_zero(self):
        f = FourierFunction(sin_coeffs=(0.3, 0.7))
        assert f_sum(f, [1, 2, 4], FixedPointX(0)) == 0.0

    def test_cos_hand_value(self):
        # cos(pi/2) + cos(pi) = -1
        f = FourierFunction(cos_coeffs=(1.0,))
        x = FixedPointX.from_fraction(1, 4)
        assert f_sum(f, [1, 2], x) == pytest.approx(-1.0, abs=1e-12)

    def test_l2_norm(self):
        f = FourierFunction(cos_coeffs=(1.0,), sin_coeffs=(2.0,))
        assert f.l2_norm_sq() == pytest.approx(2.5)


def arcsine_cdf(t: float) -> float:
    """Law of sqrt(2) sin(2 pi U): F(t) = 1/2 + arcsin(t / sqrt 2) / pi."""
    z = t / math.sqrt(2.0)
    if z <= -1.0:
        return 0.0
    if z >= 1.0:
        return 1.0
    return 0.5 + math.asin(z) / math.pi


class TestCltSample:
    SEQ = gen_hadamard(2, 1, 600)

    def test_single_term_arcsine_law(self):
        sample = clt_sample(gen_hadamard(2, 1, 1), 1, 20_000, seed=5)
        vals = np.sort(sample.as_array())
        emp = np.arange(1, len(vals) + 1) / len(vals)
        want = np.array([arcsine_cdf(v) for v in vals])
        assert np.max(np.abs(emp - want)) < 0.015  # DKW at M=2e4

    def test_deterministic(self):
        a = clt_sample(self.SEQ, 16, 100, seed=11)
        b = clt_sample(self.SEQ, 16, 100, seed=11)
        assert a.values == b.values

    def test_thread_count_invariance(self):
        a = clt_sample(self.SEQ, 16, 9000, seed=11, threads=1)
        b = clt_sample(self.SEQ, 16, 9000, seed=11, threads=4)
        assert a.values == b.values

    def test_permutation_fixing_prefix_is_identical(self):
        # any permutation mapping {1..N} onto itself gives bit-identical
        # samples: the summation order is canonicalized
        n = 16
        perm = reverse_permutation(n)
        a = clt_sample(self.SEQ, n, 200, seed=3)
        b = clt_sample(self.SEQ, n, 200, perm=perm, seed=3)
        assert a.values == b.values

    def test_block_perm_changes_index_set(self):
        perm = block_interleave_permutation(32, 4)
        a = clt_sample(self.SEQ, 16, 200, seed=3)
        b = clt_sample(self.SEQ, 16, 200, perm=perm, seed=3)
        assert a.values != b.values

    def test_variance_orthogonality(self):
        # distinct sine frequencies are orthogonal: Var S_N = N/2, so the
        # normalized variance is 1; quadrature oracle below confirms N/2
        n = 64
        sample = clt_sample(self.SEQ, n, 20_000, seed=21)
        assert abs(sample.as_array().var() - 1.0) < 0.05

    def test_variance_quadrature_oracle(self):
        # integral of (sum sin(2 pi n x))^2 over [0,1] equals N/2 for
        # distinct frequencies; midpoint rule on a fine grid
        freqs = [1, 2, 4]
        grid = (np.arange(20_000) + 0.5) / 20_000
        s = sum(np.sin(2 * np.pi * f * grid) for f in freqs)
        assert np.mean(s**2) == pytest.approx(1.5, abs=1e-6)

    def test_norm_variants(self):
        a = clt_sample(self.SEQ, 8, 50, norm="sqrtN_over_2", seed=2)
        b = clt_sample(self.SEQ, 8, 50, norm="sqrtN", seed=2)
        ratio = a.as_array() / b.as_array()
        assert np.allclose(ratio, math.sqrt(2.0))

    def test_ks_at_moderate_n(self):
        sample = clt_sample(self.SEQ, 128, 20_000, seed=77)
        ks = ks_distance(empirical_measure(sample), MixedNormal.standard())
        assert ks < 0.05

    def test_bad_norm(self):
        with pytest.raises(LabError) as err:
            clt_sample(self.SEQ, 4, 10, norm="none", seed=1)
        assert err.value.token == "bad-norm"


class TestLilTrajectory:
    SEQ = gen_hadamard(2, 1, 64)

    def test_x_zero_all_zero(self):
        traj = lil_trajectory(self.SEQ, FixedPointX(0), 64)
        assert all(v == 0.0 for _, v in traj.points)

    def test_x_half_all_zero(self):
        traj = lil_trajectory(self.SEQ, FixedPointX.from_fraction(1, 2), 64)
        assert all(abs(v) < 1e-12 for _, v in traj.points)

    def test_needs_three_terms(self):
        with pytest.raises(LabError):
            lil_trajectory(self.SEQ, FixedPointX(0), 2)

    def test_points_range(self):
        traj = lil_trajectory(self.SEQ, FixedPointX.from_fraction(1, 7), 64)
        assert traj.points[0][0] == 3
        assert traj.points[-1][0] == 64
        assert traj.max_value == max(v for _, v in traj.points)
