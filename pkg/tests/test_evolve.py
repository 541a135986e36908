"""Integrator tests: weight identities, aliasing policies, closed-form
affine oracles, and measured convergence orders."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from tlle import (
    BlowUpError,
    CubicTerm,
    ModelParams,
    analytic_field,
    constant_profile,
    dispersion_symbol,
    energy_balance_residual,
    l2_norm,
    l2_norm_sq,
    linear_evolve,
    make_grid,
    phi_functions,
    single_mode_profile,
    solve,
    spectral_field,
    step,
    step_profile,
    to_spectral,
)
from tlle.evolve import Etd4Stepper, MIN_RESIDUAL_FRAMES, make_stepper


def _ring(radius, count=16):
    ang = 2 * np.pi * np.arange(count) / count
    return radius * np.exp(1j * ang)


class TestPhiFunctions:
    def test_values_at_zero(self):
        p1, p2, p3 = phi_functions(np.array([0.0]))
        assert p1[0] == 1.0
        assert p2[0] == 0.5
        assert p3[0] == 1.0 / 6.0

    def test_frozen_values_at_one(self):
        p1, p2, p3 = phi_functions(np.array([1.0]))
        e = np.e
        assert_allclose(p1[0], e - 1.0, rtol=1e-14)
        assert_allclose(p2[0], e - 2.0, rtol=1e-14)
        assert_allclose(p3[0], e - 2.5, rtol=1e-13)

    def test_series_region_against_closed_form(self):
        """Inside |z| <= 0.5 the implementation uses the series; at radius
        0.4 the straight closed form is still good to ~3e-14, enough to
        cross-check it."""
        z = _ring(0.4)
        p1, p2, p3 = phi_functions(z)
        e = np.exp(z)
        assert_allclose(p1, (e - 1) / z, rtol=1e-12)
        assert_allclose(p2, (e - 1 - z) / z ** 2, rtol=1e-12)
        assert_allclose(p3, (e - 1 - z - z ** 2 / 2) / z ** 3, rtol=1e-11)

    def test_closed_region_against_series(self):
        # outside the disk the closed form runs; a 30-term series checks it
        z = _ring(0.7)
        p1, p2, p3 = phi_functions(z)
        s1 = sum(z ** m / math.factorial(m + 1) for m in range(30))
        s2 = sum(z ** m / math.factorial(m + 2) for m in range(30))
        s3 = sum(z ** m / math.factorial(m + 3) for m in range(30))
        assert_allclose(p1, s1, rtol=1e-13)
        assert_allclose(p2, s2, rtol=1e-13)
        assert_allclose(p3, s3, rtol=1e-13)


def _field_from_modes(grid, modes):
    c = np.zeros(grid.n_modes, dtype=complex)
    for k0, a in modes.items():
        c[np.where(grid.wavenumbers == k0)[0][0]] = 2 * np.pi * a
    return c


def _brute_cubic(grid, modes):
    """Plain triple sum over the mode dictionary, no FFT anywhere."""
    out = {}
    for k1, a1 in modes.items():
        for k2, a2 in modes.items():
            for k3, a3 in modes.items():
                k = k1 - k2 + k3
                out[k] = out.get(k, 0.0) + a1 * np.conj(a2) * a3
    c = np.zeros(grid.n_modes, dtype=complex)
    for k0, a in out.items():
        idx = np.where(grid.wavenumbers == k0)[0]
        if idx.size:
            c[idx[0]] = 2 * np.pi * a
    c[grid.nyquist_index] = 0.0
    return c


class TestCubicTerm:
    def test_single_mode_all_policies_agree(self):
        """One mode has constant |u|^2, so no policy can alias: every
        route returns 2 pi |a|^2 a on the same mode."""
        g = make_grid(16)
        a = 0.5 + 0.25j
        c = _field_from_modes(g, {1: a})
        want = _field_from_modes(g, {1: abs(a) ** 2 * a})
        for mode in ("exact", "two-thirds", "none"):
            got = CubicTerm(g, mode)(c)
            assert_allclose(got, want, rtol=0, atol=1e-14)

    def test_exact_matches_brute_force_two_modes(self):
        g = make_grid(32)
        modes = {1: 0.3 - 0.1j, 2: 0.2 + 0.4j}
        got = CubicTerm(g, "exact")(_field_from_modes(g, modes))
        assert_allclose(got, _brute_cubic(g, modes), rtol=0, atol=1e-13)

    def test_two_thirds_exact_on_inner_half_band(self):
        """Input confined to |k| <= n/6 cannot wrap into the retained band,
        so the masked product equals the padded one there."""
        rng = np.random.default_rng(21)
        g = make_grid(48)
        band = np.abs(g.wavenumbers) <= 8
        c = np.where(band, rng.standard_normal(48) + 1j * rng.standard_normal(48), 0.0)
        masked = CubicTerm(g, "two-thirds")(c)
        padded = CubicTerm(g, "exact")(c)
        keep = np.abs(g.wavenumbers) <= 16
        assert_allclose(masked[keep], padded[keep], rtol=0, atol=1e-12)
        assert np.all(masked[~keep] == 0)

    def test_two_thirds_wraps_at_full_band(self):
        """Modes at +-n//3 produce a triple product at 3(n//3) that folds
        back into the band; this is the failure the padded policy removes."""
        g = make_grid(16)
        c = _field_from_modes(g, {5: 1.0, -5: 1.0})
        masked = CubicTerm(g, "two-thirds")(c)
        padded = CubicTerm(g, "exact")(c)
        idx = np.where(g.wavenumbers == -1)[0][0]
        assert np.abs(padded[idx]) < 1e-12   # no resolved triple lands at -1
        assert np.abs(masked[idx]) > 1.0     # the wrapped image does

    def test_nyquist_always_zero(self):
        rng = np.random.default_rng(3)
        g = make_grid(32)
        c = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        for mode in ("exact", "two-thirds", "none"):
            assert CubicTerm(g, mode)(c)[g.nyquist_index] == 0.0

    def test_unknown_policy_rejected(self):
        with pytest.raises(ValueError):
            CubicTerm(make_grid(16), "half")


class TestEtd4Weights:
    def test_constant_stage_order_condition(self):
        """w1 + 2 w2 + w3 = dt phi1(dt m): constant forcing is integrated
        exactly, which the affine oracle below depends on."""
        g = make_grid(64)
        dt = 0.01
        s = Etd4Stepper(g, dt, ModelParams())
        z = dt * dispersion_symbol(g.wavenumbers, ModelParams())
        p1, _, _ = phi_functions(z)
        lhs = s.w1 + 2.0 * s.w2 + s.w3
        assert np.max(np.abs(lhs - dt * p1)) < 1e-14 * dt

    def test_half_step_weight(self):
        g = make_grid(32)
        dt = 0.02
        s = Etd4Stepper(g, dt, ModelParams())
        z2 = (dt / 2) * dispersion_symbol(g.wavenumbers, ModelParams())
        p1, _, _ = phi_functions(z2)
        assert_allclose(s.f_half, (dt / 2) * p1, rtol=1e-14)


class TestAffineOracle:
    """With the cubic switched off the model is du/dt = m u + f, solved in
    closed form by u(t) = e^{tm} u0 + t phi1(tm) f. Both schemes integrate
    each affine step exactly, so many steps stay at machine precision."""

    @pytest.mark.parametrize("scheme", ["etd4", "strang2"])
    def test_matches_closed_form(self, scheme):
        g = make_grid(64)
        rng = np.random.default_rng(9)
        raw = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        u0 = to_spectral(g, raw)
        f0 = analytic_field(step_profile(height=0.3), g)
        params = ModelParams(theta=0.2, nonlinearity_on=False, forcing=f0)
        t_end, n_steps = 0.8, 16
        dt = t_end / n_steps
        stepper = make_stepper(g, dt, params, scheme)
        c = u0.coeffs.copy()
        for _ in range(n_steps):
            c = stepper.step_coeffs(c, f0.coeffs)
        m = dispersion_symbol(g.wavenumbers, params)
        p1, _, _ = phi_functions(t_end * m)
        exact = np.exp(t_end * m) * u0.coeffs + t_end * p1 * f0.coeffs
        err = np.max(np.abs(c - exact)) / np.max(np.abs(exact))
        assert err < 1e-12

    @pytest.mark.parametrize("scheme", ["etd4", "strang2"])
    def test_unforced_matches_exact_propagator(self, scheme):
        g = make_grid(128)
        zero = spectral_field(g, np.zeros(128, dtype=complex))
        params = ModelParams(nonlinearity_on=False, forcing=zero)
        traj = solve(step_profile(), 0.5, 1.0 / 64, params, g,
                     stride=32, scheme=scheme, init="analytic")
        ref = linear_evolve(traj.fields[0], 0.5, params)
        gap = l2_norm(ref.with_coeffs(traj.fields[-1].coeffs - ref.coeffs))
        assert gap / l2_norm(ref) < 1e-11


def _final_coeffs(n_steps, scheme, dealias):
    g = make_grid(64)
    t_end = 0.5
    traj = solve(single_mode_profile(k0=1, amplitude=0.4), t_end,
                 t_end / n_steps, ModelParams(), g, stride=n_steps,
                 scheme=scheme, dealias=dealias)
    return traj.fields[-1].coeffs


class TestConvergenceOrders:
    def test_etd4_is_fourth_order(self):
        ref = _final_coeffs(2048, "etd4", "exact")
        errs = [np.linalg.norm(_final_coeffs(ns, "etd4", "exact") - ref)
                for ns in (8, 16, 32, 64)]
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders > 3.7) and np.all(orders < 4.3), orders

    def test_strang2_is_second_order(self):
        ref = _final_coeffs(4096, "strang2", "two-thirds")
        errs = [np.linalg.norm(_final_coeffs(ns, "strang2", "two-thirds") - ref)
                for ns in (16, 32, 64, 128)]
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders > 1.8) and np.all(orders < 2.2), orders


class TestStepApi:
    def test_nonpositive_dt_rejected(self):
        g = make_grid(16)
        f = analytic_field(step_profile(), g)
        for bad in (0.0, -0.1):
            with pytest.raises(ValueError):
                step(f, bad, ModelParams())

    def test_unknown_scheme_and_bad_pairing(self):
        g = make_grid(16)
        with pytest.raises(ValueError):
            make_stepper(g, 0.01, ModelParams(), scheme="rk4")
        with pytest.raises(ValueError):
            make_stepper(g, 0.01, ModelParams(), scheme="strang2", dealias="exact")

    def test_default_forcing_is_the_input_field(self):
        g = make_grid(32)
        f = analytic_field(step_profile(height=0.2), g)
        tied = step(f, 0.01, ModelParams())
        explicit = step(f, 0.01, ModelParams(forcing=f))
        assert np.array_equal(tied.coeffs, explicit.coeffs)

    def test_blow_up_detected(self):
        g = make_grid(16)
        f = analytic_field(single_mode_profile(k0=1, amplitude=1e200), g)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(BlowUpError):
                step(f, 1.0, ModelParams())


class TestSolve:
    def test_trajectory_layout(self):
        g = make_grid(32)
        traj = solve(step_profile(), 0.1, 0.01, ModelParams(), g, stride=5)
        assert_allclose(traj.times, [0.0, 0.05, 0.1], rtol=1e-12)
        assert traj.phase[0] == 0.0
        assert np.all(np.diff(traj.phase) >= 0)
        assert traj.field_at(0.05) is traj.fields[1]
        assert traj.phase_at(0.1) == traj.phase[-1]
        with pytest.raises(ValueError):
            traj.field_at(0.033)
        with pytest.raises(ValueError):
            traj.phase_at(0.033)

    def test_zero_t_end_is_single_frame(self):
        g = make_grid(16)
        traj = solve(step_profile(), 0.0, 0.01, ModelParams(), g)
        assert len(traj.fields) == 1
        assert traj.times[0] == 0.0

    def test_bad_arguments(self):
        g = make_grid(16)
        with pytest.raises(ValueError):
            solve(step_profile(), 0.1, 0.01, ModelParams(), g, stride=3)
        with pytest.raises(ValueError):
            solve(step_profile(), -1.0, 0.01, ModelParams(), g)
        with pytest.raises(ValueError):
            solve(step_profile(), 0.1, 0.01, ModelParams(), g, init="spectral")

    def test_blow_up_carries_partial_trajectory(self):
        g = make_grid(16)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(BlowUpError) as exc:
                solve(constant_profile(1e200), 0.1, 0.01, ModelParams(), g)
        assert exc.value.trajectory is not None
        assert len(exc.value.trajectory.fields) >= 1
        assert exc.value.t_reached == 0.0

    def test_gauge_phase_quadrature_is_second_order(self):
        """Damping-only dynamics give a closed-form phase integral; halving
        dt must cut the trapezoid defect by ~4."""
        g = make_grid(16)
        zero = spectral_field(g, np.zeros(16, dtype=complex))
        params = ModelParams(nonlinearity_on=False, forcing=zero)
        prof = single_mode_profile(k0=1, amplitude=1.0)
        e0 = l2_norm_sq(analytic_field(prof, g))
        exact = (1.0 / np.pi) * e0 * (1.0 - np.exp(-2.0)) / 2.0
        errs = []
        for dt in (0.01, 0.005):
            traj = solve(prof, 1.0, dt, params, g,
                         stride=int(round(1.0 / dt)), init="analytic")
            errs.append(abs(traj.phase[-1] - exact))
        ratio = errs[0] / errs[1]
        assert 3.5 < ratio < 4.5, ratio


class TestEnergyResidual:
    def test_needs_five_frames(self):
        g = make_grid(16)
        traj = solve(step_profile(), 0.03, 0.01, ModelParams(), g)
        assert len(traj.times) == 4
        with pytest.raises(ValueError):
            energy_balance_residual(traj)

    def test_nan_edges_and_small_interior(self):
        """Affine dynamics on a single slow mode: the step is exact and the
        stored energy is smooth on the frame scale, so the interior residual
        is pure fourth-order stencil noise. (A broadband datum would not do:
        forced cross terms oscillate at ~k^3 and swamp the stencil.)"""
        g = make_grid(16)
        params = ModelParams(nonlinearity_on=False)
        traj = solve(single_mode_profile(k0=1, amplitude=0.5), 0.02, 1e-3,
                     params, g)
        res = energy_balance_residual(traj)
        assert len(traj.times) >= MIN_RESIDUAL_FRAMES
        assert np.all(np.isnan(res[:2])) and np.all(np.isnan(res[-2:]))
        assert np.nanmax(np.abs(res)) < 1e-10
