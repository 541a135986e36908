"""Nonlinear time integration with the stiff linear part applied exactly.

The third-order dispersion makes the semidiscrete system stiff (|m(k)| grows
like (n/2)^3), so explicit Runge-Kutta would need dt ~ n^-3. Both schemes
here apply e^{dt m(k)} exactly per mode and quadrature only to the cubic
term and forcing: a fourth-order exponential integrator (default) and a
second-order splitting.

The integrators also accumulate the gauge phase Phi(t), the trapezoid
integral of (1/pi)||u||_{L2}^2, at every step; the decomposition module
consumes it. The constant 1/pi is pinned by the requirement that e^{i Phi}
exactly cancels the mean part of the cubic convolution under this package's
transform normalization, and is certified by the dt^2 agreement of the two
independent Duhamel constructions in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import List, Optional

import numpy as np

from .grid import (FourierGrid, ModelParams, SpectralField, l2_norm_sq,
                   spectral_field)
from .profiles import AnalyticProfile, analytic_field, sampled_field
from .propagator import dispersion_symbol

SCHEMES = ("etd4", "strang2")
DEALIAS_MODES = ("two-thirds", "none", "exact")

PHI_SERIES_RADIUS = 0.5
PHI_SERIES_TERMS = 24


class BlowUpError(RuntimeError):
    """Solution left the resolvable range (NaN/overflow).

    Attributes
    ----------
    t_reached : float
        Last time with finite data.
    trajectory : Trajectory or None
        Partial trajectory up to t_reached when raised by solve().
    """

    def __init__(self, t_reached: float, trajectory=None):
        super().__init__(f"blow-up detected at t = {t_reached:.6g}")
        self.t_reached = t_reached
        self.trajectory = trajectory


def phi_functions(z: np.ndarray):
    """phi_1, phi_2, phi_3 with a series fallback near z = 0.

    phi_j(z) = (e^z - sum_{m<j} z^m/m!) / z^j; the closed forms cancel
    catastrophically for small |z| (k = 0, -1 give m = -damping, and
    diagnostics may set damping = 0), so |z| <= 0.5 uses a 24-term Horner
    series, giving full double precision on that disk.
    """
    z = np.asarray(z, dtype=complex)
    phi1 = np.empty_like(z)
    phi2 = np.empty_like(z)
    phi3 = np.empty_like(z)
    small = np.abs(z) <= PHI_SERIES_RADIUS
    zs = z[small]
    p1 = np.zeros_like(zs)
    p2 = np.zeros_like(zs)
    p3 = np.zeros_like(zs)
    for m in range(PHI_SERIES_TERMS, -1, -1):
        p1 = p1 * zs + 1.0 / factorial(m + 1)
        p2 = p2 * zs + 1.0 / factorial(m + 2)
        p3 = p3 * zs + 1.0 / factorial(m + 3)
    phi1[small], phi2[small], phi3[small] = p1, p2, p3
    zl = z[~small]
    e = np.exp(zl)
    phi1[~small] = (e - 1.0) / zl
    phi2[~small] = (e - 1.0 - zl) / zl ** 2
    phi3[~small] = (e - 1.0 - zl - zl ** 2 / 2.0) / zl ** 3
    return phi1, phi2, phi3


class CubicTerm:
    """Pseudospectral cubic |u|^2 u with a selectable aliasing policy.

    "two-thirds": mask |k| > n//3 on input and output. Triple products of
    the full retained band reach |k| ~ n and can still wrap back in, so
    this is exact only when the input occupies the inner half of the band;
    it is the usual cost/accuracy compromise for time stepping. "none":
    raw grid product. "exact": zero-pad to 4n so the result is the plain
    triple convolution of the input band (no aliasing anywhere); used
    where the algebraic identities must hold to machine precision.
    """

    def __init__(self, grid: FourierGrid, dealias: str = "two-thirds"):
        if dealias not in DEALIAS_MODES:
            raise ValueError(f"dealias must be one of {DEALIAS_MODES}, got {dealias!r}")
        self.grid = grid
        self.dealias = dealias
        n = grid.n_modes
        k = grid.wavenumbers
        self.nyq = grid.nyquist_index
        if dealias == "two-thirds":
            self.mask = (np.abs(k) <= n // 3).astype(float)
        elif dealias == "exact":
            self.npad = 4 * n

    def retained_band(self) -> int:
        """Largest |k| the output mask keeps."""
        n = self.grid.n_modes
        return n // 3 if self.dealias == "two-thirds" else n // 2 - 1

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        n = self.grid.n_modes
        if self.dealias == "exact":
            npad = self.npad
            half = n // 2
            cp = np.zeros(npad, dtype=complex)
            cp[:half] = coeffs[:half]
            cp[npad - half:] = coeffs[half:]
            g = np.fft.ifft(cp) * npad            # series sum c_k e^{ikx}
            w = (np.abs(g) ** 2) * g
            T = np.fft.fft(w) / npad              # plain triple-sum coefficients
            out = np.concatenate([T[:half], T[npad - half:]])
            out = out / (4.0 * np.pi ** 2)        # back to transform scaling
            out[self.nyq] = 0.0
            return out
        cm = coeffs * self.mask if self.dealias == "two-thirds" else coeffs
        u = np.fft.ifft(cm) * (n / (2.0 * np.pi))
        w = (np.abs(u) ** 2) * u
        wh = (2.0 * np.pi / n) * np.fft.fft(w)
        if self.dealias == "two-thirds":
            wh = wh * self.mask
        wh[self.nyq] = 0.0
        return wh


class Etd4Stepper:
    """Fourth-order exponential integrator (Cox-Matthews tableau).

    With a constant nonlinear stage the weights satisfy
    w1 + 2 w2 + w3 = dt phi1(dt m), so constant forcing is integrated
    exactly; the unit tests pin this order condition directly.
    """

    order = 4

    def __init__(self, grid: FourierGrid, dt: float, params: ModelParams,
                 dealias: str = "two-thirds"):
        self.grid = grid
        self.dt = dt
        self.params = params
        self.cubic = CubicTerm(grid, dealias)
        z = dt * dispersion_symbol(grid.wavenumbers, params)
        self.E = np.exp(z)
        self.E2 = np.exp(z / 2.0)
        h1, _, _ = phi_functions(z / 2.0)
        self.f_half = (dt / 2.0) * h1
        p1, p2, p3 = phi_functions(z)
        self.w1 = dt * (p1 - 3.0 * p2 + 4.0 * p3)
        self.w2 = 2.0 * dt * (p2 - 2.0 * p3)
        self.w3 = dt * (4.0 * p3 - p2)
        self.nyq = grid.nyquist_index

    def _nonlinear(self, c: np.ndarray, f: np.ndarray) -> np.ndarray:
        if not self.params.nonlinearity_on:
            return f
        return 1j * self.cubic(c) + f

    def step_coeffs(self, c: np.ndarray, f: np.ndarray) -> np.ndarray:
        N1 = self._nonlinear(c, f)
        a = self.E2 * c + self.f_half * N1
        N2 = self._nonlinear(a, f)
        b = self.E2 * c + self.f_half * N2
        N3 = self._nonlinear(b, f)
        cc = self.E2 * a + self.f_half * (2.0 * N3 - N1)
        N4 = self._nonlinear(cc, f)
        out = self.E * c + self.w1 * N1 + self.w2 * (N2 + N3) + self.w3 * N4
        out[self.nyq] = 0.0
        return out


class Strang2Stepper:
    """Second-order splitting: exact affine linear half-steps around an
    exact pointwise phase rotation for the cubic term.

    The linear+forcing subflow du/dt = m u + f is an affine ODE solved
    exactly per mode, so with the nonlinearity off the scheme reproduces the
    closed-form solution to machine precision, like the fourth-order scheme.
    The "exact" aliasing policy has no meaning for the non-polynomial
    rotation and is rejected.
    """

    order = 2

    def __init__(self, grid: FourierGrid, dt: float, params: ModelParams,
                 dealias: str = "two-thirds"):
        if dealias == "exact":
            raise ValueError("strang2 supports dealias 'two-thirds' or 'none'")
        self.grid = grid
        self.dt = dt
        self.params = params
        self.dealias = dealias
        n = grid.n_modes
        k = grid.wavenumbers
        self.mask = (np.abs(k) <= n // 3).astype(float) if dealias == "two-thirds" else None
        z2 = (dt / 2.0) * dispersion_symbol(k, params)
        self.E2 = np.exp(z2)
        h1, _, _ = phi_functions(z2)
        self.g2 = (dt / 2.0) * h1     # exact integral of e^{(dt/2 - s) m} ds
        self.nyq = grid.nyquist_index

    def _half_linear(self, c: np.ndarray, f: np.ndarray) -> np.ndarray:
        return self.E2 * c + self.g2 * f

    def _rotate(self, c: np.ndarray) -> np.ndarray:
        if not self.params.nonlinearity_on:
            return c
        n = self.grid.n_modes
        cm = c * self.mask if self.mask is not None else c
        u = np.fft.ifft(cm) * (n / (2.0 * np.pi))
        u = u * np.exp(1j * self.dt * np.abs(u) ** 2)
        wh = (2.0 * np.pi / n) * np.fft.fft(u)
        if self.mask is not None:
            # keep the unmasked tail evolving linearly instead of dropping it
            wh = wh * self.mask + c * (1.0 - self.mask)
        return wh

    def step_coeffs(self, c: np.ndarray, f: np.ndarray) -> np.ndarray:
        out = self._half_linear(c, f)
        out = self._rotate(out)
        out = self._half_linear(out, f)
        out[self.nyq] = 0.0
        return out


def make_stepper(grid: FourierGrid, dt: float, params: ModelParams,
                 scheme: str = "etd4", dealias: str = "two-thirds"):
    if scheme == "etd4":
        return Etd4Stepper(grid, dt, params, dealias)
    if scheme == "strang2":
        return Strang2Stepper(grid, dt, params, dealias)
    raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")


def step(f: SpectralField, dt: float, params: ModelParams,
         scheme: str = "etd4", dealias: str = "two-thirds",
         stepper=None) -> SpectralField:
    """One time step. Forcing comes from params; None means tied, i.e.
    the input field itself forces this step.

    Raises BlowUpError when the result is no longer finite.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if stepper is None:
        stepper = make_stepper(f.grid, dt, params, scheme, dealias)
    forcing = params.forcing.coeffs if params.forcing is not None else f.coeffs
    out = stepper.step_coeffs(f.coeffs.copy(), forcing)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(dt)
    return spectral_field(f.grid, out)


@dataclass(frozen=True)
class Trajectory:
    """Stored frames of one solve, with the running gauge phase.

    times[0] = 0 and fields[0] is the initial datum; phase[0] = 0 and phase
    is nondecreasing (its integrand is a squared norm). Frames are stored
    every `stride` steps; the phase is accumulated at every step regardless,
    so the stored values carry full step resolution.
    """

    times: np.ndarray
    fields: List[SpectralField]
    phase: np.ndarray
    dt: float
    stride: int
    scheme: str
    dealias: str
    params: ModelParams

    @property
    def grid(self) -> FourierGrid:
        return self.fields[0].grid

    def field_at(self, t: float) -> SpectralField:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 + 1e-9 * abs(t):
            raise ValueError(f"time {t} not stored (nearest {self.times[i]})")
        return self.fields[i]

    def phase_at(self, t: float) -> float:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 + 1e-9 * abs(t):
            raise ValueError(f"time {t} not stored (nearest {self.times[i]})")
        return float(self.phase[i])


GAUGE_RATE = 1.0 / np.pi  # d Phi/dt = (1/pi) ||u||_{L2}^2 under our transform pair


def solve(profile: AnalyticProfile, t_end: float, dt: float, params: ModelParams,
          grid: FourierGrid, stride: int = 1, scheme: str = "etd4",
          dealias: str = "two-thirds", init: str = "sampled") -> Trajectory:
    """Integrate from the profile to t_end, storing every `stride` steps.

    init selects how the datum reaches the grid: "sampled" takes pointwise
    samples (preserves jump heights exactly; the default for nonlinear
    experiments), "analytic" truncates the exact coefficients (the linear
    diagnostics' convention). Forcing defaults to the initial datum unless
    params.forcing overrides it.

    The step count is round(t_end/dt) and must be a multiple of stride; dt
    is re-derived from it so the trajectory lands on t_end exactly.
    """
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")
    if init not in ("sampled", "analytic"):
        raise ValueError(f"init must be 'sampled' or 'analytic', got {init!r}")
    c0 = sampled_field(profile, grid) if init == "sampled" else analytic_field(profile, grid)
    n_steps = int(round(t_end / dt)) if t_end > 0 else 0
    if n_steps > 0:
        dt = t_end / n_steps
    if stride < 1 or (n_steps > 0 and n_steps % stride != 0):
        raise ValueError(f"stride {stride} must divide the step count {n_steps}")

    forcing = params.forcing if params.forcing is not None else c0
    fc = forcing.coeffs
    times = [0.0]
    fields = [c0]
    phases = [0.0]
    if n_steps == 0:
        return Trajectory(np.array(times), fields, np.array(phases), dt,
                          stride, scheme, dealias, params)

    stepper = make_stepper(grid, dt, params, scheme, dealias)
    c = c0.coeffs.copy()
    phase = 0.0
    prev_sq = l2_norm_sq(c0)
    for i in range(n_steps):
        c = stepper.step_coeffs(c, fc)
        if not np.all(np.isfinite(c)):
            partial = Trajectory(np.array(times), fields, np.array(phases),
                                 dt, stride, scheme, dealias, params)
            raise BlowUpError(i * dt, partial)
        cur_sq = float(np.sum(np.abs(c) ** 2) / (2.0 * np.pi))
        phase += GAUGE_RATE * 0.5 * dt * (prev_sq + cur_sq)
        prev_sq = cur_sq
        if (i + 1) % stride == 0:
            times.append((i + 1) * dt)
            fields.append(spectral_field(grid, c))
            phases.append(phase)
    return Trajectory(np.array(times), fields, np.array(phases), dt,
                      stride, scheme, dealias, params)


MIN_RESIDUAL_FRAMES = 5  # 5-point interior stencil


def energy_balance_residual(traj: Trajectory) -> np.ndarray:
    """Pointwise defect of d/dt ||u||^2 = -2 delta ||u||^2 + 2 Re int f conj(u) dx.

    The time derivative is taken with the fourth-order five-point stencil on
    the stored frames, so for the fourth-order scheme the residual decays at
    the scheme's own order (a second-order stencil would floor the measured
    slope at 2 regardless of the integrator). Entries without a full stencil
    (the two frames at each end) are NaN.

    Raises
    ------
    ValueError
        If fewer than 5 frames are stored.
    """
    m = len(traj.times)
    if m < MIN_RESIDUAL_FRAMES:
        raise ValueError(
            f"need at least {MIN_RESIDUAL_FRAMES} stored frames to difference, got {m}"
        )
    h = traj.times[1] - traj.times[0]
    f = traj.params.forcing if traj.params.forcing is not None else traj.fields[0]
    E = np.array([l2_norm_sq(fr) for fr in traj.fields])
    F = np.array([
        2.0 * np.real(np.sum(f.coeffs * np.conj(fr.coeffs)) / (2.0 * np.pi))
        for fr in traj.fields
    ])
    res = np.full(m, np.nan)
    dE = (-E[4:] + 8.0 * E[3:-1] - 8.0 * E[1:-3] + E[:-4]) / (12.0 * h)
    res[2:-2] = dE - (-2.0 * traj.params.damping * E[2:-2] + F[2:-2])
    return res
