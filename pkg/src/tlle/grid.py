"""Periodic spatial grid, spectral fields, and model parameters.

Everything downstream shares one Fourier convention: the analysis transform
is unnormalized, coeffs[k] ~= integral_0^{2pi} e^{-ikx} u(x) dx, realized by
the trapezoid/DFT rule, and synthesis carries the 1/(2pi). Consequences used
throughout: a constant c has coeffs[0] = 2pi c, and Parseval reads
sum_k |coeffs[k]|^2 = 2pi ||u||_{L2}^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

MIN_MODES = 4


def wavenumbers(n_modes: int) -> np.ndarray:
    """Integer wavenumbers in FFT order: 0..n/2-1, -n/2..-1."""
    return np.fft.fftfreq(n_modes, 1.0 / n_modes).astype(np.int64)


@dataclass(frozen=True)
class FourierGrid:
    """Uniform grid on [0, 2pi) with its integer wavenumber set.

    Attributes
    ----------
    n_modes : int
        Even number of sample points / retained Fourier modes, >= 4.
    sample_points : ndarray
        x_j = 2 pi j / n_modes.
    wavenumbers : ndarray
        Integers in FFT order; the set {-n/2, ..., n/2 - 1}. The single
        asymmetric index -n/2 is the Nyquist mode, kept identically zero in
        every SpectralField.
    """

    n_modes: int
    sample_points: np.ndarray = field(repr=False)
    wavenumbers: np.ndarray = field(repr=False)

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_modes

    @property
    def nyquist_index(self) -> int:
        # position of k = -n/2 in FFT order
        return self.n_modes // 2


def make_grid(n_modes: int) -> FourierGrid:
    """Build the periodic grid.

    Raises
    ------
    ValueError
        If n_modes is odd or smaller than 4.
    """
    if n_modes < MIN_MODES or n_modes % 2 != 0:
        raise ValueError(
            f"n_modes must be an even integer >= {MIN_MODES}, got {n_modes}"
        )
    x = 2.0 * np.pi * np.arange(n_modes) / n_modes
    return FourierGrid(n_modes=n_modes, sample_points=x, wavenumbers=wavenumbers(n_modes))


@dataclass(frozen=True)
class SpectralField:
    """Complex Fourier coefficients on a FourierGrid, Nyquist forced to zero."""

    grid: FourierGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.coeffs) != self.grid.n_modes:
            raise ValueError(
                f"coefficient count {len(self.coeffs)} != n_modes {self.grid.n_modes}"
            )

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return SpectralField(self.grid, _clean(coeffs, self.grid))

    @property
    def k(self) -> np.ndarray:
        return self.grid.wavenumbers


def _clean(coeffs: np.ndarray, grid: FourierGrid) -> np.ndarray:
    out = np.asarray(coeffs, dtype=complex)
    if len(out) != grid.n_modes:
        raise ValueError(
            f"coefficient count {len(out)} != n_modes {grid.n_modes}"
        )
    out = out.copy()
    out[grid.nyquist_index] = 0.0
    return out


def spectral_field(grid: FourierGrid, coeffs: np.ndarray) -> SpectralField:
    """Wrap raw coefficients, zeroing the Nyquist slot."""
    return SpectralField(grid, _clean(coeffs, grid))


def to_spectral(grid: FourierGrid, samples: np.ndarray) -> SpectralField:
    """Trapezoid-rule realization of u -> (integral e^{-ikx} u dx)_k.

    Parameters
    ----------
    samples : complex array of length grid.n_modes
        Values u(x_j) on the grid. Complex fields are the norm here, not an
        edge case: solutions of the evolution are complex-valued.
    """
    samples = np.asarray(samples, dtype=complex)
    if len(samples) != grid.n_modes:
        raise ValueError(
            f"sample count {len(samples)} != n_modes {grid.n_modes}"
        )
    coeffs = (2.0 * np.pi / grid.n_modes) * np.fft.fft(samples)
    return spectral_field(grid, coeffs)


def from_spectral(f: SpectralField) -> np.ndarray:
    """Inverse of to_spectral: synthesis with the 1/(2pi) factor."""
    return np.fft.ifft(f.coeffs) * (f.grid.n_modes / (2.0 * np.pi))


def l2_norm(f: SpectralField) -> float:
    """Continuum L2 norm on the circle, via Parseval."""
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2) / (2.0 * np.pi)))


def l2_norm_sq(f: SpectralField) -> float:
    return float(np.sum(np.abs(f.coeffs) ** 2) / (2.0 * np.pi))


@dataclass(frozen=True)
class ModelParams:
    """Parameters of du/dt = beta u_xxx + i u_xx - damping (1 + i theta) u + i|u|^2 u + f.

    Attributes
    ----------
    beta : float
        Third-order dispersion coefficient. Must be an integer for the
        rational-time revival operations.
    theta : float
        Detuning, default 0.
    damping : float
        Fixed 1 for the physical model; overridable for diagnostics (e.g.
        measuring the unimodular dispersive part alone).
    nonlinearity_on : bool
        Gates the cubic term in the time steppers.
    forcing : SpectralField or None
        None means "tied to the initial datum": the solver forces with the
        same field it starts from.
    """

    beta: float = 1.0
    theta: float = 0.0
    damping: float = 1.0
    nonlinearity_on: bool = True
    forcing: Optional[SpectralField] = None

    def beta_int(self) -> int:
        """beta as an exact integer, or raise for the revival paths."""
        b = int(round(self.beta))
        if self.beta != b:
            raise ValueError(
                f"operation requires integer beta, got {self.beta}"
            )
        return b


@dataclass(frozen=True)
class NormParams:
    """Exponent bundle for the smoothing/space-time diagnostics.

    s is the Sobolev order of the data class, b the modulation order,
    a the smoothing gain above s, b_prime the trilinear modulation order.
    Admissible ranges are stated by each consuming operation.
    """

    s: float = 0.5
    b: float = 0.625
    a: float = 0.8
    b_prime: float = 0.625
