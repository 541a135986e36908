"""Exact linear evolution and its rational-time translate representation.

The linear flow is diagonal in Fourier: mode k evolves as e^{t m(k)} with
m(k) = -i(beta k^3 + k^2 + theta) - damping. Everything delicate here is
phase arithmetic. At t = pi p/q with integer beta the dispersive phase
pi (p/q)(beta k^3 + k^2) is reduced with int64 modular arithmetic and is
exact; at float times the product t * (beta k^3 + k^2) is reduced mod 2pi in
extended precision before the complex exponential. Plain float64 phases lose
~2e-4 radians by k = 512, which is fatal for the revival identity.

At rational t the multiplier k -> e^{-i pi (p/q)(beta k^3 + k^2)} is periodic
in k with period 2q, so the evolution is a finite combination of translates
of the datum by multiples of pi/q; the combination coefficients come from a
discrete Gauss sum over the residues.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Union

import numpy as np

from .grid import FourierGrid, ModelParams, SpectralField, spectral_field
from .profiles import AnalyticProfile, analytic_field

LONG = np.float128
TWO_PI_LONG = LONG("6.283185307179586476925286766559005768394")


@dataclass(frozen=True)
class RationalTime:
    """t = pi p / q in lowest terms, p >= 0, q >= 1."""

    p: int
    q: int

    def __post_init__(self):
        if self.q < 1 or self.p < 0:
            raise ValueError(f"need p >= 0 and q >= 1, got p={self.p} q={self.q}")
        if gcd(self.p, self.q) != 1:
            raise ValueError(f"p/q must be in lowest terms, got {self.p}/{self.q}")

    @property
    def value(self) -> float:
        return np.pi * self.p / self.q


TimeLike = Union[float, RationalTime]


def dispersion_symbol(k: np.ndarray, params: ModelParams) -> np.ndarray:
    """Per-mode growth rate m(k) = -i(beta k^3 + k^2 + theta) - damping."""
    kk = np.asarray(k, dtype=float)
    return -1j * (params.beta * kk ** 3 + kk ** 2 + params.theta) - params.damping


def _int_dispersion(k: np.ndarray, beta: int) -> np.ndarray:
    # beta k^3 + k^2 in int64; exact for |k| < ~2^17 at beta ~ 1
    ki = k.astype(np.int64)
    return beta * ki ** 3 + ki ** 2


def linear_multiplier(k: np.ndarray, t: TimeLike, params: ModelParams) -> np.ndarray:
    """e^{t m(k)} with exact phase reduction.

    RationalTime uses integer arithmetic mod 2q (no rounding at all in the
    dispersive phase); float times reduce the phase in extended precision.
    """
    if isinstance(t, RationalTime):
        beta = params.beta_int()
        r = np.mod(t.p * _int_dispersion(k, beta), 2 * t.q)
        tv = t.value
        phase = np.pi * r / t.q + tv * params.theta
        return np.exp(-1j * phase) * np.exp(-tv * params.damping)
    tv = float(t)
    M = _int_dispersion(k, params.beta_int()) if float(params.beta).is_integer() \
        else params.beta * k.astype(float) ** 3 + k.astype(float) ** 2
    phase = np.mod(LONG(tv) * M.astype(LONG) + LONG(tv) * LONG(params.theta),
                   TWO_PI_LONG)
    return np.exp(-1j * phase.astype(np.float64)) * np.exp(-tv * params.damping)


def linear_evolve(f: SpectralField, t: TimeLike, params: ModelParams) -> SpectralField:
    """Apply the exact propagator for time t; no time stepping involved."""
    return f.with_coeffs(f.coeffs * linear_multiplier(f.k, t, params))


@dataclass(frozen=True)
class RevivalRepresentation:
    """Finite-translate form of the rational-time linear flow.

    The unimodular dispersive part of the evolution at t = pi p/q equals
    sum_j coefficients[j] * (datum translated by 2 pi j / period), with
    period = 2q; damping and detuning enter only through scalar_factor
    = e^{-t(1 + i theta)}.
    """

    rt: RationalTime
    period: int
    coefficients: np.ndarray
    scalar_factor: complex

    @property
    def shifts(self) -> np.ndarray:
        """Translate offsets 2 pi j / period, j = 0..period-1."""
        return 2.0 * np.pi * np.arange(self.period) / self.period


def revival_coefficients(rt: RationalTime, params: ModelParams) -> RevivalRepresentation:
    """Translate coefficients c_j from the Gauss sum over residues.

    c_j = (1/Q) sum_{m=0}^{Q-1} e^{-i pi (p/q)(beta m^3 + m^2)} e^{2 pi i jm/Q}
    with Q = 2q, evaluated as an inverse DFT of the exactly-reduced
    multiplier sequence. Requires integer beta (the multiplier is periodic
    in k with period 2q only then).
    """
    beta = params.beta_int()
    Q = 2 * rt.q
    m = np.arange(Q, dtype=np.int64)
    r = np.mod(rt.p * (beta * m ** 3 + m ** 2), Q)
    mult = np.exp(-1j * np.pi * r / rt.q)
    cj = np.fft.ifft(mult)
    scalar = np.exp(-rt.value * params.damping) * np.exp(-1j * rt.value * params.theta)
    return RevivalRepresentation(rt=rt, period=Q, coefficients=cj,
                                 scalar_factor=complex(scalar))


def revival_evolve(profile: AnalyticProfile, rt: RationalTime,
                   params: ModelParams, grid: FourierGrid) -> SpectralField:
    """Assemble the rational-time evolution from analytic translates.

    Translates are applied as exact coefficient phase shifts
    e^{-ik 2pi j/Q} (integer mod Q), not by resampling, so agreement with
    linear_evolve is independent of any interpolation error.
    """
    rep = revival_coefficients(rt, params)
    Q = rep.period
    c0 = analytic_field(profile, grid).coeffs
    k = grid.wavenumbers
    j = np.arange(Q)
    # exp(-2pi i (k j mod Q)/Q), exact unit-circle roots
    phases = np.exp(-2j * np.pi * np.mod(np.outer(k, j), Q) / Q)
    coeffs = rep.scalar_factor * (phases @ rep.coefficients) * c0
    return spectral_field(grid, coeffs)
