"""Resonant decomposition of the cubic term and the gauged integral form
of the solution.

The cubic convolution T(c)(k) = sum_{k1,k2} c(k1) conj(c(k2)) c(k-k1+k2)
splits into a mean part 2||c||^2 c (removable by a time-dependent phase),
a diagonal part -|c(k)|^2 c(k), and a nonresonant remainder. The gauged
nonlinear part

    N(t) = u(t) - e^{i Phi(t)} e^{t m} u0,        Phi' = (1/pi) ||u||_{L2}^2

measures everything the flow does beyond the linear propagator and the
mean-phase rotation. Two independent constructions of N are kept side by
side: the subtraction above (production) and direct quadrature of the
integral form (tests); their O(dt^2) agreement is what certifies the gauge
constant under this package's transform normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .analysis import sobolev_norm
from .evolve import CubicTerm, Trajectory
from .grid import SpectralField, l2_norm_sq, spectral_field
from .profiles import AnalyticProfile, sampled_field
from .propagator import dispersion_symbol, linear_multiplier

FOUR_PI_SQ = 4.0 * np.pi ** 2


def cubic_convolution(f: SpectralField) -> SpectralField:
    """The plain triple sum T(c)(k) over the stored band, alias-free."""
    T = CubicTerm(f.grid, "exact")(f.coeffs) * FOUR_PI_SQ
    return spectral_field(f.grid, T)


@dataclass(frozen=True)
class ResonantSplit:
    """The three pieces of the cubic convolution; they sum back to it."""

    mean_part: SpectralField
    rho: SpectralField
    r_term: SpectralField

    @property
    def total(self) -> SpectralField:
        return self.mean_part.with_coeffs(
            self.mean_part.coeffs + self.rho.coeffs + self.r_term.coeffs
        )


def resonant_split(f: SpectralField) -> ResonantSplit:
    """Split T(c) into mean, diagonal and nonresonant parts.

    The remainder is computed as full convolution minus the two closed-form
    corrections; the quadratic-cost restricted double sum exists only as a
    test oracle.
    """
    c = f.coeffs
    T = cubic_convolution(f).coeffs
    mean = 2.0 * np.sum(np.abs(c) ** 2) * c
    rho = -(np.abs(c) ** 2) * c
    r = T - mean - rho
    return ResonantSplit(
        mean_part=f.with_coeffs(mean),
        rho=f.with_coeffs(rho),
        r_term=f.with_coeffs(r),
    )


def gauge_phase(traj: Trajectory) -> np.ndarray:
    """Phi at the stored times: trapezoid rule applied to (1/pi)||u||^2.

    solve() accumulates the same trapezoid at full step resolution in
    traj.phase; for densely stored trajectories (stride 1) the two agree to
    rounding. This recomputation exists so the phase is a pure function of
    the frames.
    """
    sq = np.array([l2_norm_sq(fr) for fr in traj.fields])
    out = np.zeros(len(traj.times))
    if len(out) > 1:
        h = np.diff(traj.times)
        out[1:] = np.cumsum(0.5 * h * (sq[:-1] + sq[1:])) / np.pi
    return out


@dataclass(frozen=True)
class DuhamelSeries:
    """N(t, .) at the stored times, with the gauge phase used to build it.

    n_fields[0] is identically zero and gauge_phase[0] = 0.
    """

    times: np.ndarray
    n_fields: List[SpectralField]
    gauge_phase: np.ndarray


def _initial_coeffs(traj: Trajectory, profile: Optional[AnalyticProfile]) -> np.ndarray:
    if profile is None:
        return traj.fields[0].coeffs
    return sampled_field(profile, traj.grid).coeffs


def duhamel_part(traj: Trajectory,
                 profile: Optional[AnalyticProfile] = None) -> DuhamelSeries:
    """N(t) = u(t) - e^{i Phi(t)} e^{t m} u0 at every stored time.

    u0 defaults to the trajectory's own first frame, which makes N(0) = 0
    an identity; passing the profile reconstructs the same datum by
    pointwise sampling (the solver's default), so it must match how the
    trajectory was initialized.
    """
    u0 = _initial_coeffs(traj, profile)
    k = traj.grid.wavenumbers
    fields = []
    for t, fr, ph in zip(traj.times, traj.fields, traj.phase):
        lin = np.exp(1j * ph) * linear_multiplier(k, float(t), traj.params) * u0
        fields.append(fr.with_coeffs(fr.coeffs - lin))
    return DuhamelSeries(traj.times.copy(), fields, traj.phase.copy())


def duhamel_part_quadrature(traj: Trajectory,
                            profile: Optional[AnalyticProfile] = None) -> DuhamelSeries:
    """N via trapezoid quadrature of the integral form: the independent
    cross-check of duhamel_part.

    N(t) = e^{i Phi(t)} e^{t m} int_0^t e^{-t1 m} [e^{-i Phi} f
           + i (T(v) - mean(v)) / (4 pi^2)] dt1,    v = e^{-i Phi} u.

    Needs a densely stored trajectory (stride 1) and, for the O(dt^2)
    agreement with the subtraction form, a solve with dealias="exact": any
    aliasing in the solver's cubic enters the two constructions differently
    and floors the gap. Quadratic cost in frame count; a test-scale tool.
    """
    if traj.stride != 1:
        raise ValueError("quadrature form needs a densely stored trajectory (stride 1)")
    grid = traj.grid
    k = grid.wavenumbers
    m = dispersion_symbol(k, traj.params)
    f = (traj.params.forcing.coeffs if traj.params.forcing is not None
         else _initial_coeffs(traj, profile))
    cub = CubicTerm(grid, "exact")
    dt = traj.times[1] - traj.times[0] if len(traj.times) > 1 else 0.0

    fields = [traj.fields[0].with_coeffs(np.zeros(grid.n_modes, dtype=complex))]
    running = np.zeros(grid.n_modes, dtype=complex)
    prev_g = None
    for l, (t, fr, ph) in enumerate(zip(traj.times, traj.fields, traj.phase)):
        v = np.exp(-1j * ph) * fr.coeffs
        nl = cub(v) - (np.sum(np.abs(v) ** 2) * v) / (2.0 * np.pi ** 2)
        g = np.exp(-t * m) * (np.exp(-1j * ph) * f + 1j * nl)
        if l > 0:
            running = running + 0.5 * dt * (prev_g + g)
            fields.append(fr.with_coeffs(np.exp(1j * ph) * np.exp(t * m) * running))
        prev_g = g
    return DuhamelSeries(traj.times.copy(), fields, traj.phase.copy())


def smoothing_profile(series: DuhamelSeries, s_plus_a: float,
                      band: Optional[int] = None) -> np.ndarray:
    """t -> ||N(t)||_{H^{s+a}}; band restricts to |k| <= band (see
    sobolev_norm). Starts at exactly 0."""
    return np.array([sobolev_norm(f, s_plus_a, band) for f in series.n_fields])


def linear_norm_profile(traj: Trajectory, s_plus_a: float,
                        band: Optional[int] = None,
                        u0: Optional[SpectralField] = None) -> np.ndarray:
    """t -> ||e^{t m} u0||_{H^{s+a}}: the yardstick the nonlinear part is
    measured against (the gauge phase drops out of any norm).

    u0 defaults to the trajectory's first frame; pass the truncated
    analytic coefficients instead when the yardstick should carry the
    datum's exact 1/k tail rather than the sampled datum's folded one.
    """
    c0 = traj.fields[0].coeffs if u0 is None else u0.coeffs
    k = traj.grid.wavenumbers
    out = []
    for t in traj.times:
        lin = linear_multiplier(k, float(t), traj.params) * c0
        out.append(sobolev_norm(traj.fields[0].with_coeffs(lin), s_plus_a, band))
    return np.array(out)
