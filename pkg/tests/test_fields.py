import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gfflab.basis import build_interval_basis
from gfflab.fields import (
    RngStream,
    covariance_two_sided,
    field_values,
    pair_field,
    sample_brownian_bridge,
    sample_brownian_motion,
    sample_cylindrical_bm,
    sample_gff,
    sample_two_sided_bm,
    two_sided_antiderivative,
)
from gfflab.fourier_cov import gaussian_bump, gff_covariance, make_s0_function
from gfflab.greens import series_green
from gfflab.hilbert_scale import unit_field
from gfflab.quadrature import composite_legendre, gauss_legendre


def mc_stderr_of_variance(var, n):
    return var * math.sqrt(2.0 / n)


class TestRngStream:
    @given(st.integers(0, 2**32 - 1), st.integers(0, 2**16 - 1))
    def test_same_key_same_stream(self, seed, sid):
        a = RngStream(seed, sid).generator().standard_normal(8)
        b = RngStream(seed, sid).generator().standard_normal(8)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(7, 0).generator().standard_normal(16)
        b = RngStream(7, 1).generator().standard_normal(16)
        assert not np.array_equal(a, b)

    def test_substreams_are_distinct(self):
        s = RngStream(7, 3)
        subs = {s.substream(i).stream_id for i in range(100)}
        assert len(subs) == 100


class TestSampleGff:
    def test_rejects_zero_mode(self, rng):
        basis = build_interval_basis("neumann", 0.0, 1.0, 8)
        with pytest.raises(ValueError, match="lambda_1 > 0"):
            sample_gff(basis, 1.0, rng)

    def test_white_noise_unit_variance(self, dirichlet16):
        gen = RngStream(11, 0).generator()
        draws = np.array([sample_gff(dirichlet16, 0.0, gen).coeffs for _ in range(4000)])
        var = draws.var(axis=0, ddof=1)
        assert np.all(np.abs(var - 1.0) < 4.0 * mc_stderr_of_variance(1.0, 4000))

    def test_first_mode_variance_matches_green(self, dirichlet16):
        gen = RngStream(12, 0).generator()
        n = 100000
        draws = np.array([sample_gff(dirichlet16, 1.0, gen).coeffs[0] for _ in range(n)])
        target = 1.0 / math.pi**2
        assert draws.var(ddof=1) == pytest.approx(target, abs=3.0 * mc_stderr_of_variance(target, n))

    def test_pointwise_covariance_matches_series_green(self):
        basis = build_interval_basis("dirichlet", 0.0, 1.0, 1024)
        pts = np.array([0.2, 0.5, 0.8])
        n = 20000
        stream = RngStream(13, 0)
        vals = np.empty((n, 3))
        gen = stream.generator()
        for i in range(n):
            vals[i] = field_values(sample_gff(basis, 1.0, gen), pts)
        emp = vals.T @ vals / n
        for i in range(3):
            for j in range(3):
                target = series_green(basis, 1.0, pts[i], pts[j])
                se = math.sqrt((emp[i, i] * emp[j, j] + emp[i, j] ** 2) / n)
                assert abs(emp[i, j] - target) < 4.0 * se


class TestPairField:
    def test_unit_functional_reads_coefficient(self, dirichlet16, rng):
        w = sample_gff(dirichlet16, 1.0, rng)
        for k in (1, 7, 16):
            assert pair_field(w, unit_field(dirichlet16, k)) == w.coeffs[k - 1]

    def test_pair_covariance_matches_weighted_inner_product(self, dirichlet16):
        gen = RngStream(14, 0).generator()
        f = unit_field(dirichlet16, 1)
        g = unit_field(dirichlet16, 1)
        n = 50000
        prods = np.empty(n)
        for i in range(n):
            w = sample_gff(dirichlet16, 1.0, gen)
            prods[i] = pair_field(w, f) * pair_field(w, g)
        target = 1.0 / dirichlet16.lambdas_squared[0]
        se = prods.std(ddof=1) / math.sqrt(n)
        assert abs(prods.mean() - target) < 3.0 * se

    def test_mc_covariance_matrix_is_psd(self, dirichlet16):
        gen = RngStream(15, 0).generator()
        fns = [unit_field(dirichlet16, k) for k in (1, 2, 3, 5, 8)]
        n = 2000
        vals = np.array(
            [[pair_field(sample_gff(dirichlet16, 1.0, gen), f) for f in fns] for _ in range(n)]
        )
        cov = vals.T @ vals / n
        eigs = np.linalg.eigvalsh(0.5 * (cov + cov.T))
        assert eigs.min() > -1e-10


class TestCylindricalBm:
    def test_marginal_variance(self, dirichlet16):
        gen = RngStream(16, 0).generator()
        times = np.array([0.3, 0.7, 1.4])
        n = 5000
        w1 = np.array([sample_cylindrical_bm(dirichlet16, times, gen).values()[2] for _ in range(n)])
        for j, t in enumerate(times):
            var = w1[:, j].var(ddof=1)
            assert abs(var - t) < 4.0 * mc_stderr_of_variance(t, n)

    def test_cross_mode_covariance(self, dirichlet16):
        gen = RngStream(17, 0).generator()
        times = np.array([0.5, 1.0])
        n = 8000
        vals = np.array([sample_cylindrical_bm(dirichlet16, times, gen).values() for _ in range(n)])
        # cov(w_1(0.5), w_1(1.0)) = 0.5; cov(w_1, w_2) = 0
        c_same = np.mean(vals[:, 0, 0] * vals[:, 0, 1])
        c_cross = np.mean(vals[:, 0, 1] * vals[:, 1, 1])
        assert abs(c_same - 0.5) < 4.0 * np.std(vals[:, 0, 0] * vals[:, 0, 1]) / math.sqrt(n)
        assert abs(c_cross) < 4.0 * np.std(vals[:, 0, 1] * vals[:, 1, 1]) / math.sqrt(n)

    def test_quadratic_variation_of_single_mode(self):
        basis = build_interval_basis("dirichlet", 0.0, 1.0, 1)
        gen = RngStream(18, 0).generator()
        times = np.linspace(1e-4, 1.0, 10000)
        path = sample_cylindrical_bm(basis, times, gen).values()[0]
        qv = float(np.sum(np.diff(np.concatenate(([0.0], path))) ** 2))
        assert qv == pytest.approx(1.0, rel=0.05)

    def test_decreasing_times_rejected(self, dirichlet16, rng):
        with pytest.raises(ValueError, match="increasing"):
            sample_cylindrical_bm(dirichlet16, [0.5, 0.2], rng)


class TestBridgeAndMotion:
    def test_boundary_values_exact(self, rng):
        vals = sample_brownian_bridge(np.array([0.0, 0.5, 1.0]), rng)
        assert vals[0] == 0.0
        assert vals[2] == 0.0

    def test_grid_outside_unit_interval(self, rng):
        with pytest.raises(ValueError, match="0, 1"):
            sample_brownian_bridge(np.array([-0.1, 0.5]), rng)

    def test_bridge_covariance(self):
        gen = RngStream(19, 0).generator()
        pts = np.array([0.3, 0.6])
        n = 30000
        vals = np.array([sample_brownian_bridge(pts, gen, modes=512) for _ in range(n)])
        emp = vals.T @ vals / n
        target = np.minimum.outer(pts, pts) - np.outer(pts, pts)
        for i in range(2):
            for j in range(2):
                se = math.sqrt((emp[i, i] * emp[j, j] + emp[i, j] ** 2) / n)
                assert abs(emp[i, j] - target[i, j]) < 4.0 * se

    def test_motion_covariance_is_min(self):
        gen = RngStream(20, 0).generator()
        pts = np.array([0.3, 0.6])
        n = 30000
        vals = np.array([sample_brownian_motion(pts, gen, modes=512) for _ in range(n)])
        emp = vals.T @ vals / n
        target = np.minimum.outer(pts, pts)
        for i in range(2):
            for j in range(2):
                se = math.sqrt((emp[i, i] * emp[j, j] + emp[i, j] ** 2) / n)
                assert abs(emp[i, j] - target[i, j]) < 4.0 * se

    def test_pointwise_variance_nondecreasing_in_modes(self):
        # partial sums of 2 sin^2(k pi x) / (k pi)^2 only grow
        x = 0.37
        k = np.arange(1, 65, dtype=float)
        terms = 2.0 * np.sin(k * np.pi * x) ** 2 / (k * np.pi) ** 2
        assert np.all(np.cumsum(terms)[1:] >= np.cumsum(terms)[:-1])

    def test_seed_determinism(self):
        a = sample_brownian_bridge([0.2, 0.8], RngStream(21, 4).generator())
        b = sample_brownian_bridge([0.2, 0.8], RngStream(21, 4).generator())
        assert np.array_equal(a, b)


class TestTwoSidedBm:
    def test_zero_at_origin(self, rng):
        assert sample_two_sided_bm(np.array([0.0]), rng)[0] == 0.0

    def test_opposite_signs_uncorrelated(self):
        gen = RngStream(22, 0).generator()
        n = 40000
        vals = np.array([sample_two_sided_bm(np.array([1.0, -2.0]), gen) for _ in range(n)])
        c = float(np.mean(vals[:, 0] * vals[:, 1]))
        se = float(np.std(vals[:, 0] * vals[:, 1])) / math.sqrt(n)
        assert abs(c) < 3.0 * se

    def test_same_sign_covariance_is_min(self):
        gen = RngStream(23, 0).generator()
        n = 40000
        vals = np.array([sample_two_sided_bm(np.array([1.0, 2.0]), gen) for _ in range(n)])
        c = float(np.mean(vals[:, 0] * vals[:, 1]))
        se = float(np.std(vals[:, 0] * vals[:, 1])) / math.sqrt(n)
        assert abs(c - 1.0) < 4.0 * se

    def test_increment_variance_across_origin(self):
        gen = RngStream(24, 0).generator()
        n = 40000
        vals = np.array([sample_two_sided_bm(np.array([0.5, -0.7]), gen) for _ in range(n)])
        d2 = (vals[:, 0] - vals[:, 1]) ** 2
        se = float(np.std(d2)) / math.sqrt(n)
        assert abs(float(np.mean(d2)) - 1.2) < 4.0 * se

    def test_duplicate_points_share_values(self, rng):
        vals = sample_two_sided_bm(np.array([0.5, 0.5, -0.3, -0.3]), rng)
        assert vals[0] == vals[1]
        assert vals[2] == vals[3]


class TestAntiderivative:
    def test_matches_tail_integrals(self):
        f = lambda x: np.exp(-0.5 * x * x)
        for x0 in (0.5, 1.5, -0.8):
            val = two_sided_antiderivative(f, x0, r_max=12.0)
            if x0 > 0:
                q, w = gauss_legendre(x0, 12.0, 400)
                expected = -float(np.sum(w * f(q)))
            else:
                q, w = gauss_legendre(-12.0, x0, 400)
                expected = float(np.sum(w * f(q)))
            assert val == pytest.approx(expected, abs=1e-12)

    def test_rapid_decay(self):
        f = lambda x: np.exp(-0.5 * x * x)
        tail = two_sided_antiderivative(f, 20.0, r_max=30.0)
        assert abs(20.0**4 * tail) < 1e-8

    def test_transform_identity(self):
        # F-hat equals (fhat - fhat(0)) / (i xi) away from zero, and the
        # removable value at zero is -i fhat'(0)
        f = lambda x: np.exp(-0.5 * (x - 0.4) ** 2)
        x, wx = composite_legendre(-20.0, 20.0, 128, 16)
        fvals = f(x)
        favals = two_sided_antiderivative(f, x, r_max=20.0)
        for xi in (0.5, 1.0, 3.0, -2.0):
            fhat_xi = np.sum(wx * fvals * np.exp(-1j * x * xi)) / math.sqrt(2 * math.pi)
            fhat_0 = np.sum(wx * fvals) / math.sqrt(2 * math.pi)
            lhs = np.sum(wx * favals * np.exp(-1j * x * xi)) / math.sqrt(2 * math.pi)
            rhs = (fhat_xi - fhat_0) / (1j * xi)
            assert abs(lhs - rhs) < 1e-6
        # removable singularity at xi = 0: the limit -i fhat'(0) means
        # Fhat(0) = -int x f dx / sqrt(2 pi), i.e. int F dx = -int x f dx
        assert float(np.sum(wx * favals)) == pytest.approx(
            -float(np.sum(wx * x * fvals)), abs=1e-10
        )

    def test_discontinuity_point_rejected(self):
        with pytest.raises(ValueError, match="discontinuous"):
            two_sided_antiderivative(lambda x: np.exp(-x * x), 0.0)


class TestCovarianceTwoSided:
    def test_three_modes_agree_gaussian_pair(self):
        f = lambda x: np.exp(-0.5 * (x - 0.4) ** 2)
        g = lambda x: np.exp(-0.5 * (x + 0.2) ** 2 / 0.49)
        vals = [covariance_two_sided(f, g, m) for m in ("direct", "antiderivative", "fourier")]
        assert max(vals) - min(vals) < 1e-6

    def test_odd_function_yields_positive_value(self):
        f = lambda x: x * np.exp(-x * x)
        v = covariance_two_sided(f, f, "antiderivative")
        assert v > 0.0
        assert covariance_two_sided(f, f, "direct") == pytest.approx(v, abs=1e-8)

    def test_matches_monte_carlo(self):
        f = lambda x: np.exp(-2.0 * x * x)
        target = covariance_two_sided(f, f, "direct")
        grid = np.linspace(-4.0, 4.0, 81)
        wq = np.gradient(grid)
        gen = RngStream(25, 0).generator()
        n = 20000
        vals = np.empty(n)
        for i in range(n):
            path = sample_two_sided_bm(grid, gen)
            vals[i] = float(np.sum(wq * f(grid) * path))
        est = float(np.mean(vals**2))
        se = float(np.std(vals**2)) / math.sqrt(n)
        # grid bias from the trapezoidal pairing is well under the MC noise
        assert abs(est - target) < 5.0 * se

    def test_first_moment_guard(self):
        heavy = lambda x: 1.0 / (1.0 + x * x)
        with pytest.raises(ValueError, match="first-moment"):
            covariance_two_sided(heavy, heavy, "fourier")

    def test_s0_fourier_equals_free_field_exactly(self):
        f = make_s0_function(4.0, 0.25)
        g = make_s0_function(5.0, 0.3)
        assert covariance_two_sided(f, g, "fourier") == gff_covariance(f, g, nu_scale=1.0)

    def test_nonzero_mean_pair_differs_from_unsubtracted(self):
        f = gaussian_bump(0.4, 1.0)
        g = gaussian_bump(-0.2, 0.7)
        sub = covariance_two_sided(f, g, "fourier")
        unsub = gff_covariance(f, g, nu_scale=1.0, check_floor=False)
        assert abs(sub - unsub) > 1e-3

    def test_testfunction_only_in_fourier_mode(self):
        f = gaussian_bump(0.0, 1.0)
        with pytest.raises(ValueError, match="fourier"):
            covariance_two_sided(f, f, "direct")

    def test_unknown_mode(self):
        f = lambda x: np.exp(-x * x)
        with pytest.raises(ValueError, match="mode"):
            covariance_two_sided(f, f, "spectral")
