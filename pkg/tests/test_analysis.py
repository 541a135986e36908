"""Norm machinery: frozen Sobolev values, the slowly-varying sums, the
dyadic partition, and the discretized space-time norm with its probes."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from tlle import (
    BesovConfig,
    analytic_field,
    besov_block_profile,
    besov_norm,
    default_besov_config,
    free_wave,
    from_spectral,
    l2_norm,
    littlewood_paley_blocks,
    make_grid,
    phi_beta,
    phi_beta_sweep,
    pointwise_product,
    single_mode_profile,
    sobolev_norm,
    space_time_field,
    step_profile,
    time_taper,
    to_spectral,
    trilinear_ratio,
    weierstrass_profile,
    xsb_norm,
)
from tlle.analysis import (SpaceTimeField, TRILINEAR_DENOMINATOR_B,
                           smooth_transition)


class TestSobolevNorm:
    def test_single_mode_frozen_value(self):
        g = make_grid(64)
        f = analytic_field(single_mode_profile(k0=1, amplitude=1.0), g)
        assert_allclose(sobolev_norm(f, 1.0), 2 * np.pi * np.sqrt(2), rtol=1e-14)

    def test_constant_any_s(self):
        g = make_grid(32)
        f = to_spectral(g, np.full(32, 1.0 + 0j))
        for s in (0.0, 0.5, 2.0):
            assert_allclose(sobolev_norm(f, s), 2 * np.pi, rtol=1e-13)

    def test_step_l2_frozen_value(self):
        """Sum |c_k|^2 = pi^2 + 4 sum_{odd} k^-2 = 2 pi^2 for the unit step
        on half the circle; the grid truncation costs ~5e-5 at n = 4096."""
        g = make_grid(4096)
        f = analytic_field(step_profile(0.0, np.pi, 1.0), g)
        assert_allclose(sobolev_norm(f, 0.0), np.pi * np.sqrt(2), rtol=1e-4)

    def test_monotone_in_s(self):
        rng = np.random.default_rng(2)
        g = make_grid(128)
        f = to_spectral(g, rng.standard_normal(128) + 1j * rng.standard_normal(128))
        values = [sobolev_norm(f, s) for s in (0.0, 0.5, 1.0, 2.0)]
        assert np.all(np.diff(values) > 0)

    def test_s_zero_is_scaled_l2(self):
        rng = np.random.default_rng(4)
        g = make_grid(64)
        f = to_spectral(g, rng.standard_normal(64) + 1j * rng.standard_normal(64))
        assert_allclose(sobolev_norm(f, 0.0), np.sqrt(2 * np.pi) * l2_norm(f),
                        rtol=1e-13)

    def test_band_restriction(self):
        g = make_grid(64)
        f = analytic_field(step_profile(), g)
        assert_allclose(sobolev_norm(f, 0.0, band=0), np.abs(f.coeffs[0]),
                        rtol=1e-14)
        assert sobolev_norm(f, 0.0, band=10) < sobolev_norm(f, 0.0)


class TestPhiBeta:
    def test_zero_argument(self):
        for beta in (0.0, 0.5, 1.0, 2.0):
            assert phi_beta(0, beta) == 1.0

    def test_counting_measure(self):
        for k in (1, 5, -7, 100):
            assert_allclose(phi_beta(k, 0.0), 2 * abs(k) + 1, rtol=1e-15)

    def test_frozen_value_and_loop_oracle(self):
        want = sum((1.0 + n * n) ** -1.0 for n in range(-10, 11))
        assert_allclose(phi_beta(10, 2.0), want, rtol=1e-14)
        assert_allclose(phi_beta(10, 2.0), 2.96358564467035, rtol=1e-12)

    def test_sweep_matches_pointwise(self):
        for beta in (0.5, 1.0, 2.0):
            sweep = phi_beta_sweep(200, beta)
            for k in (0, 1, 7, 63, 200):
                assert_allclose(sweep[k], phi_beta(k, beta), rtol=1e-13)

    def test_sweep_rejects_negative(self):
        with pytest.raises(ValueError):
            phi_beta_sweep(-1, 1.0)

    def test_summable_case_is_bounded(self):
        # beta = 2: the full sum converges to pi coth(pi) ~ 3.153
        assert phi_beta_sweep(10 ** 5, 2.0).max() < 4.0


class TestDyadicPartition:
    def test_transition_plateaus_are_exact(self):
        t = np.array([0.0, 0.5, 1.0, 2.0, 3.0])
        g = smooth_transition(t)
        assert np.all(g[:3] == 1.0)
        assert np.all(g[3:] == 0.0)

    def test_partition_of_unity_on_resolved_band(self):
        cfg = default_besov_config(256)
        assert cfg.j_max == 6
        k = np.arange(-128, 128)
        total = sum(cfg.block_weight(j, k) for j in range(cfg.j_max + 1))
        inside = np.abs(k) <= 2 ** cfg.j_max
        assert np.all(total[inside] == 1.0)
        assert np.all(total[~inside] <= 1.0)

    def test_reconstruction_of_band_limited_samples(self):
        rng = np.random.default_rng(12)
        n = 256
        cfg = default_besov_config(n)
        spectrum = np.zeros(n, dtype=complex)
        k = np.fft.fftfreq(n, d=1.0 / n)
        band = np.abs(k) <= 2 ** cfg.j_max
        spectrum[band] = rng.standard_normal(band.sum()) + 1j * rng.standard_normal(band.sum())
        samples = np.fft.ifft(spectrum)
        blocks = littlewood_paley_blocks(samples, cfg)
        assert np.max(np.abs(sum(blocks) - samples)) < 1e-10

    def test_constant_besov_norm(self):
        for c in (1.0, 2.5 - 1.0j):
            assert_allclose(besov_norm(np.full(64, c), 0.7, 1), 2 * np.pi * abs(c),
                            rtol=1e-13)

    def test_pure_mode_hits_one_block(self):
        """A mode at k = 2^j sits where psi(1) = 1, so exactly one block
        survives and the norm is 2^{sj} times that mode's L^p size."""
        n, j, a, s = 128, 2, 0.6 - 0.2j, 0.7
        x = 2 * np.pi * np.arange(n) / n
        samples = a * np.exp(1j * (2 ** j) * x)
        assert_allclose(besov_norm(samples, s, np.inf), 2 ** (s * j) * abs(a),
                        rtol=1e-12)
        assert_allclose(besov_norm(samples, s, 2),
                        2 ** (s * j) * abs(a) * np.sqrt(2 * np.pi), rtol=1e-12)
        assert_allclose(besov_norm(samples, s, 1),
                        2 ** (s * j) * abs(a) * 2 * np.pi, rtol=1e-12)

    def test_weierstrass_block_ladder(self):
        """Coefficients 2^{-j/2} put the series on the s = 1/2 boundary:
        flat weighted blocks there, growth for larger s."""
        g = make_grid(1024)
        samples = from_spectral(analytic_field(weierstrass_profile(0.5), g))
        cfg = default_besov_config(1024)
        at_half = besov_block_profile(samples, 0.5, np.inf, cfg)
        live = at_half[1:]  # the mean block is empty for this series
        assert live.max() / live.min() < 4.0
        above = besov_block_profile(samples, 0.75, np.inf, cfg)
        assert above[-1] / above[1] > 2.0

    def test_grid_too_coarse(self):
        with pytest.raises(ValueError):
            littlewood_paley_blocks(np.zeros(32), BesovConfig(j_max=5))
        with pytest.raises(ValueError):
            default_besov_config(4)

    def test_unsupported_p(self):
        with pytest.raises(ValueError):
            besov_norm(np.ones(64), 0.5, 3)


class TestSpaceTimeField:
    def test_taper_shape(self):
        w = time_taper(64)
        # end rows sit at xi = +-(1 - 1/n), weight ~ e^{-n/2}
        assert w[0] < 1e-12 and w[-1] < 1e-12
        assert w.max() > 0.999
        assert_allclose(w, w[::-1], rtol=0, atol=0)
        long = time_taper(2048)
        assert long[0] == 0.0 and long[-1] == 0.0  # underflow for long windows

    def test_taper_applied_exactly_once(self):
        rng = np.random.default_rng(8)
        raw = rng.standard_normal((32, 8)) + 1j * rng.standard_normal((32, 8))
        stf = space_time_field(raw, 4.0)
        w = time_taper(32)
        assert np.array_equal(stf.samples, raw * w[:, None])
        assert stf.dt == 4.0 / 32
        # products never re-apply the window
        prod = pointwise_product(stf, stf)
        assert np.array_equal(prod.samples, (raw * w[:, None]) ** 2)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            SpaceTimeField((0.0, 1.0), np.zeros(8, dtype=complex), np.ones(8))
        a = space_time_field(np.ones((16, 8)), 1.0)
        b = space_time_field(np.ones((16, 8)), 2.0)
        with pytest.raises(ValueError):
            pointwise_product(a, b)


class TestXsbNorm:
    def test_zero_field(self):
        stf = space_time_field(np.zeros((16, 8)), 1.0)
        assert xsb_norm(stf, 0.5, 0.375) == 0.0

    def test_single_grid_mode_closed_form(self):
        """Constructed untapered so the mode is exactly one (tau, k) bin."""
        n_t, n_x, T = 16, 8, 2.0
        k0, j0, amp = 2, 3, 0.7
        t = (np.arange(n_t) + 0.5) * (T / n_t)
        x = 2 * np.pi * np.arange(n_x) / n_x
        tau0 = 2 * np.pi * j0 / T
        samples = amp * np.exp(1j * (k0 * x[None, :] + tau0 * t[:, None]))
        stf = SpaceTimeField((0.0, T), samples, np.ones(n_t))
        s, b = 0.5, 0.375
        want = (amp * (1 + k0 ** 2) ** (s / 2)
                * (1 + (tau0 + k0 ** 3 + k0 ** 2) ** 2) ** (b / 2))
        assert_allclose(xsb_norm(stf, s, b), want, rtol=1e-12)

    def test_refinement_convergence(self):
        """Doubling the time resolution twice barely moves the discrete norm
        of a smooth tapered wave: the smooth compact window decays faster
        than any power in tau, so 512 rows already sit at the rounding
        floor (measured ~2e-16, required < 1e-3)."""
        vals = [xsb_norm(free_wave([(1, 1.0)], n_t, 16, 4.0), 0.5, 0.375)
                for n_t in (512, 1024, 2048)]
        assert abs(vals[0] - vals[2]) / vals[2] < 1e-3
        assert abs(vals[1] - vals[2]) / vals[2] < 1e-3


def _dft_matrix(n):
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n)


def _xsb_longhand(stf, s, b):
    """The defining double sum evaluated with explicit DFT matrices, no fft."""
    Ft = _dft_matrix(stf.n_t)
    Fx = _dft_matrix(stf.n_x)
    fh = Ft @ stf.samples @ Fx.T / (stf.n_t * stf.n_x)
    k = np.fft.fftfreq(stf.n_x, d=1.0 / stf.n_x)
    tau = 2 * np.pi * np.fft.fftfreq(stf.n_t, d=stf.dt)
    total = 0.0
    for l in range(stf.n_t):
        for m in range(stf.n_x):
            w = (1 + k[m] ** 2) ** s * (1 + (tau[l] + k[m] ** 3 + k[m] ** 2) ** 2) ** b
            total += w * abs(fh[l, m]) ** 2
    return np.sqrt(total)


class TestTrilinearRatio:
    def test_scaling_invariance(self):
        u = free_wave([(1, 0.3), (2, 0.1j)], 128, 16, 4.0)
        lam = 17.3
        scaled = SpaceTimeField(u.time_window, lam * u.samples, u.taper)
        r1 = trilinear_ratio(u, u, u, 0.5, 0.625)
        r2 = trilinear_ratio(scaled, scaled, scaled, 0.5, 0.625)
        assert_allclose(r2, r1, rtol=1e-12)

    def test_zero_factor_rejected(self):
        u = free_wave([(1, 1.0)], 64, 8, 4.0)
        z = space_time_field(np.zeros((64, 8)), 4.0)
        with pytest.raises(ValueError):
            trilinear_ratio(u, z, u, 0.5, 0.625)

    def test_single_mode_longhand(self):
        """Everything recomputed with dense DFT matrices and scalar loops."""
        u = free_wave([(1, 1.0)], 64, 8, 4.0)
        s, bp = 0.5, 0.625
        got = trilinear_ratio(u, u, u, s, bp)
        cube = SpaceTimeField(u.time_window, u.samples ** 3, u.taper)
        want = _xsb_longhand(cube, s, bp - 1.0) / _xsb_longhand(u, s, TRILINEAR_DENOMINATOR_B) ** 3
        assert_allclose(got, want, rtol=1e-10)

    def test_ensemble_max_stable_across_resolution(self):
        """The probe's point: the worst ratio over a random band-limited
        ensemble does not blow up when the spatial grid doubles."""
        def worst(n_x):
            rng = np.random.default_rng(77)
            ks = np.arange(-4, 5)
            out = 0.0
            for _ in range(10):
                amps = rng.standard_normal(ks.size) + 1j * rng.standard_normal(ks.size)
                amps /= np.linalg.norm(amps)
                u = free_wave(list(zip(ks, amps)), 256, n_x, 4.0)
                out = max(out, trilinear_ratio(u, u, u, 0.5, 0.625))
            return out

        a, b = worst(32), worst(64)
        assert 0.5 < a / b < 2.0, (a, b)
