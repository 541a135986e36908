"""Library of rough initial data with closed-form Fourier coefficients.

Each profile carries three synchronized descriptions: a coefficient map
k -> c_k (exact), a pointwise sampler (right-continuous at jumps), and jump
metadata with the known Sobolev threshold sigma0 = sup{sigma : u in H^sigma}.
Jump data sit exactly at sigma0 = 1/2 (1/k coefficient decay).

The solver initializes from pointwise samples while the exact propagator and
the linear-part diagnostics use truncated analytic coefficients; keeping both
on the profile makes that split explicit instead of accidental.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np

from .grid import FourierGrid, SpectralField, spectral_field, to_spectral

DEFAULT_AMPLITUDE = 0.1  # keeps nonlinear runs inside the observed stability window

WEIERSTRASS_TERMS = 21  # lacunary modes 2^0 .. 2^20


class DegenerateFitError(ValueError):
    """Raised when a regression range contains no usable coefficients."""


@dataclass(frozen=True)
class AnalyticProfile:
    """Initial datum with exact coefficients and jump metadata.

    Attributes
    ----------
    name : str
        Identifier used by the CLI and in run metadata.
    coeff_fn : callable
        Vectorized map from integer wavenumbers to complex coefficients
        (unnormalized transform convention).
    sample_fn : callable
        Pointwise values on [0, 2pi), right-continuous at jumps.
    jumps : list of (location, height)
        Jump discontinuities; empty for continuous profiles.
    sigma0_true : float
        sup{sigma : profile in H^sigma}; +inf for smooth data, 1/2 whenever
        the jump list is nonempty.
    amplitude : float
        Overall scale factor already baked into coeff_fn/sample_fn.
    """

    name: str
    coeff_fn: Callable[[np.ndarray], np.ndarray]
    sample_fn: Callable[[np.ndarray], np.ndarray]
    jumps: List[Tuple[float, complex]]
    sigma0_true: float
    amplitude: float


def step_profile(left: float = 0.0, right: float = np.pi,
                 height: float = 1.0) -> AnalyticProfile:
    """Indicator of [left, right) scaled by height.

    Coefficients: c_k = height (e^{-ik left} - e^{-ik right})/(ik) for k != 0,
    c_0 = height (right - left). Degenerate supports (empty or the full
    circle) collapse to a constant with no jumps.
    """
    if not (0.0 <= left < right <= 2.0 * np.pi):
        raise ValueError(f"need 0 <= left < right <= 2pi, got ({left}, {right})")
    full = left == 0.0 and right == 2.0 * np.pi

    def coeff_fn(k: np.ndarray) -> np.ndarray:
        k = np.asarray(k)
        c = np.zeros(k.shape, dtype=complex)
        nz = k != 0
        kk = k[nz].astype(float)
        c[nz] = height * (np.exp(-1j * kk * left) - np.exp(-1j * kk * right)) / (1j * kk)
        c[~nz] = height * (right - left)
        return c

    def sample_fn(x: np.ndarray) -> np.ndarray:
        return np.where((x >= left) & (x < right), height, 0.0).astype(complex)

    jumps = [] if full else [(left, complex(height)), (right, complex(-height))]
    return AnalyticProfile(
        name="step",
        coeff_fn=coeff_fn,
        sample_fn=sample_fn,
        jumps=jumps,
        sigma0_true=math.inf if full else 0.5,
        amplitude=height,
    )


def sawtooth_profile(amplitude: float = 1.0) -> AnalyticProfile:
    """amplitude * x/(2pi) on [0, 2pi), one downward jump at 0.

    c_0 = pi * amplitude, c_k = i * amplitude / k otherwise.
    """

    def coeff_fn(k: np.ndarray) -> np.ndarray:
        k = np.asarray(k)
        c = np.zeros(k.shape, dtype=complex)
        nz = k != 0
        c[nz] = 1j * amplitude / k[nz].astype(float)
        c[~nz] = np.pi * amplitude
        return c

    def sample_fn(x: np.ndarray) -> np.ndarray:
        return (amplitude * x / (2.0 * np.pi)).astype(complex)

    return AnalyticProfile(
        name="sawtooth",
        coeff_fn=coeff_fn,
        sample_fn=sample_fn,
        jumps=[(0.0, complex(-amplitude))],
        sigma0_true=0.5,
        amplitude=amplitude,
    )


def constant_profile(value: float = 1.0) -> AnalyticProfile:
    def coeff_fn(k: np.ndarray) -> np.ndarray:
        k = np.asarray(k)
        c = np.zeros(k.shape, dtype=complex)
        c[k == 0] = 2.0 * np.pi * value
        return c

    return AnalyticProfile(
        name="constant",
        coeff_fn=coeff_fn,
        sample_fn=lambda x: np.full(np.shape(x), value, dtype=complex),
        jumps=[],
        sigma0_true=math.inf,
        amplitude=value,
    )


def single_mode_profile(k0: int = 1, amplitude: float = 1.0) -> AnalyticProfile:
    """amplitude * e^{i k0 x}; the smooth reference datum."""

    def coeff_fn(k: np.ndarray) -> np.ndarray:
        k = np.asarray(k)
        c = np.zeros(k.shape, dtype=complex)
        c[k == k0] = 2.0 * np.pi * amplitude
        return c

    return AnalyticProfile(
        name=f"single-mode(k={k0})",
        coeff_fn=coeff_fn,
        sample_fn=lambda x: amplitude * np.exp(1j * k0 * np.asarray(x)),
        jumps=[],
        sigma0_true=math.inf,
        amplitude=amplitude,
    )


def modes_profile(pairs: List[Tuple[int, float]], name: str = "modes") -> AnalyticProfile:
    """Finite combination sum_j a_j e^{i k_j x}; used for smooth diagnostics."""
    pairs = list(pairs)

    def coeff_fn(k: np.ndarray) -> np.ndarray:
        k = np.asarray(k)
        c = np.zeros(k.shape, dtype=complex)
        for kj, aj in pairs:
            c[k == kj] = 2.0 * np.pi * aj
        return c

    def sample_fn(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        out = np.zeros(x.shape, dtype=complex)
        for kj, aj in pairs:
            out += aj * np.exp(1j * kj * x)
        return out

    return AnalyticProfile(
        name=name,
        coeff_fn=coeff_fn,
        sample_fn=sample_fn,
        jumps=[],
        sigma0_true=math.inf,
        amplitude=max(abs(a) for _, a in pairs) if pairs else 0.0,
    )


def weierstrass_profile(alpha: float, amplitude: float = 1.0) -> AnalyticProfile:
    """amplitude * sum_{j=0}^{20} 2^{-alpha j} cos(2^j x).

    Lacunary spectrum: c_{+-2^j} = pi * amplitude * 2^{-alpha j}. Continuous
    (C^alpha) for alpha > 0, with sigma0 = alpha exactly.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    js = np.arange(WEIERSTRASS_TERMS)
    ladder = {int(2 ** j): np.pi * amplitude * 2.0 ** (-alpha * j) for j in js}

    def coeff_fn(k: np.ndarray) -> np.ndarray:
        k = np.asarray(k)
        c = np.zeros(k.shape, dtype=complex)
        for kj, a in ladder.items():
            c[np.abs(k) == kj] = a
        return c

    def sample_fn(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for j in js:
            out = out + 2.0 ** (-alpha * j) * np.cos((2.0 ** j) * x)
        return (amplitude * out).astype(complex)

    return AnalyticProfile(
        name=f"weierstrass:{alpha:g}",
        coeff_fn=coeff_fn,
        sample_fn=sample_fn,
        jumps=[],
        sigma0_true=float(alpha),
        amplitude=amplitude,
    )


def tabulated_profile(path: str | Path) -> AnalyticProfile:
    """Profile from a CSV of rows k, re, im (header optional).

    sigma0_true is reported as nan (unknown for arbitrary tables); the
    sampler is band-limited synthesis of the tabulated coefficients.
    """
    path = Path(path)
    table: dict[int, complex] = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                k = int(row[0])
            except ValueError:
                continue  # header line
            table[k] = complex(float(row[1]), float(row[2]))

    if not table:
        raise ValueError(f"no coefficient rows found in {path}")

    def coeff_fn(k: np.ndarray) -> np.ndarray:
        k = np.asarray(k)
        c = np.zeros(k.shape, dtype=complex)
        for kj, a in table.items():
            c[k == kj] = a
        return c

    def sample_fn(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for kj, a in table.items():
            out += a * np.exp(1j * kj * x) / (2.0 * np.pi)
        return out

    return AnalyticProfile(
        name=path.stem,
        coeff_fn=coeff_fn,
        sample_fn=sample_fn,
        jumps=[],
        sigma0_true=math.nan,
        amplitude=max(abs(a) for a in table.values()) / (2.0 * np.pi),
    )


def profile_from_name(name: str, amplitude: float = DEFAULT_AMPLITUDE) -> AnalyticProfile:
    """Resolve a CLI profile name.

    Accepted: "step", "sawtooth", "constant", "single-mode",
    "weierstrass:ALPHA", or a path to a tabulated coefficient CSV.
    """
    if name == "step":
        return step_profile(0.0, np.pi, amplitude)
    if name == "sawtooth":
        return sawtooth_profile(amplitude)
    if name == "constant":
        return constant_profile(amplitude)
    if name == "single-mode":
        return single_mode_profile(1, amplitude)
    if name.startswith("weierstrass:"):
        return weierstrass_profile(float(name.split(":", 1)[1]), amplitude)
    if Path(name).is_file():
        return tabulated_profile(name)
    raise ValueError(f"unknown profile {name!r}")


def analytic_field(profile: AnalyticProfile, grid: FourierGrid) -> SpectralField:
    """Truncated analytic coefficients on the grid (Nyquist zeroed)."""
    return spectral_field(grid, profile.coeff_fn(grid.wavenumbers))


def sampled_field(profile: AnalyticProfile, grid: FourierGrid) -> SpectralField:
    """DFT of pointwise samples; what the nonlinear solver starts from.

    For jump data this differs from analytic_field by aliasing, and that is
    the point: pointwise sampling preserves the exact jump height on the
    grid, while truncated analytic coefficients split it (Gibbs).
    """
    return to_spectral(grid, profile.sample_fn(grid.sample_points))


@dataclass(frozen=True)
class Sigma0Estimate:
    """Regression readout of the coefficient decay exponent.

    value is sigma_hat with |c_k| ~ k^{-(sigma_hat + 1/2)}; inf with
    above_cap=True means the decay outran what the grid resolves.
    """

    value: float
    stderr: float
    n_points: int
    fit_range: Tuple[int, int]
    above_cap: bool = False


MIN_FIT_POINTS = 8
COEFF_FLOOR_REL = 1e-13


def estimate_sigma0(f: SpectralField,
                    fit_range: Optional[Tuple[int, int]] = None) -> Sigma0Estimate:
    """Estimate sigma0 from a least-squares fit of log|c_k| vs log k.

    The fitted slope is read as -(sigma_hat + 1/2). Coefficients below
    1e-13 of the field maximum are masked out (identically-vanishing modes,
    e.g. even modes of the symmetric step, would otherwise inject log(0)).
    Fewer than 8 surviving points means the decay is steeper than the grid
    can resolve and the estimate is reported as above-cap (value inf).

    The default range [1, n/4] starts at k=1 on purpose: lacunary spectra
    keep only ~log2(n) live modes in total, and a higher cutoff would
    spuriously report them above-cap. For such spectra the dense power-law
    model reads the ladder exponent minus 1/2, not sigma0 itself; profiles
    carry sigma0_true analytically for that comparison.

    Raises
    ------
    DegenerateFitError
        If every coefficient in the range is exactly zero.
    """
    n = f.grid.n_modes
    if fit_range is None:
        fit_range = (1, n // 4)
    lo, hi = fit_range
    k = f.grid.wavenumbers
    sel = (k >= lo) & (k <= hi)
    kk = k[sel].astype(float)
    av = np.abs(f.coeffs[sel])
    if not np.any(av > 0):
        raise DegenerateFitError(
            f"all coefficients vanish on fit range [{lo}, {hi}]"
        )
    good = av > COEFF_FLOOR_REL * np.abs(f.coeffs).max()
    m = int(good.sum())
    if m < MIN_FIT_POINTS:
        return Sigma0Estimate(math.inf, math.nan, m, (lo, hi), above_cap=True)

    X = np.vstack([np.log(kk[good]), np.ones(m)]).T
    y = np.log(av[good])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    s2 = resid @ resid / max(m - 2, 1)
    stderr = float(np.sqrt((s2 * np.linalg.inv(X.T @ X))[0, 0]))
    return Sigma0Estimate(float(-coef[0] - 0.5), stderr, m, (lo, hi))
