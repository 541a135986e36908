"""Figure rendering for experiment outputs.

Every figure is derived from the same arrays that land in the CSVs, never
from internal state, so plots are regenerable after the fact and carry no
information of their own. matplotlib runs headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

DPI = 120


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
    return str(path)


def plot_revival_field(x, u, u0, path):
    """Evolved field against the datum: translates should be visible."""
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(x, np.real(u0), color="0.6", lw=1.0, label="datum (re)")
    ax.plot(x, np.real(u), color="C0", lw=1.2, label="evolved (re)")
    ax.plot(x, np.imag(u), color="C3", lw=1.2, label="evolved (im)")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def plot_jump_ratios(ns, ratios, window, path, ylabel="jump / target"):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.semilogx(ns, ratios, "o-", base=2)
    ax.axhspan(window[0], window[1], color="C2", alpha=0.15)
    ax.axhline(1.0, color="0.5", lw=0.8)
    ax.set_xlabel("modes")
    ax.set_ylabel(ylabel)
    return _save(fig, path)


def plot_increments(ns, ratios, threshold, path):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.loglog(ns, ratios, "o-", base=2)
    ax.axhline(threshold, color="C3", lw=0.8, ls="--", label=f"threshold {threshold}")
    ax.set_xlabel("modes")
    ax.set_ylabel("max increment / rational-time jump")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_graph_profile(x, y, path, ylabel="Re u"):
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(x, y, lw=0.4, color="C0")
    ax.set_xlabel("x")
    ax.set_ylabel(ylabel)
    return _save(fig, path)


def plot_dimension_fits(labels, slopes, stderrs, window, path):
    fig, ax = plt.subplots(figsize=(6.5, 4))
    pos = np.arange(len(labels))
    ax.errorbar(pos, slopes, yerr=stderrs, fmt="o", capsize=3)
    ax.axhspan(window[0], window[1], color="C2", alpha=0.15)
    ax.set_xticks(pos)
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("box dimension")
    return _save(fig, path)


def plot_count_fit(log_inv_eps, log_count, slope, intercept, path):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(log_inv_eps, log_count, "o", label="counts")
    ax.plot(log_inv_eps, slope * log_inv_eps + intercept, "-",
            label=f"slope {slope:.3f}")
    ax.set_xlabel("log 1/eps")
    ax.set_ylabel("log count")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_smoothing_profiles(curves, path, order):
    """curves: list of (n_modes, times, norm_N, norm_linear)."""
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for i, (n, t, nn, nl) in enumerate(curves):
        ax.plot(t, nn, f"C{i}-", label=f"nonlinear part, n={n}")
        ax.plot(t, nl, f"C{i}--", label=f"linear part, n={n}")
    ax.set_xlabel("t")
    ax.set_ylabel(f"H^{order} norm")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_energy_slope(dts, maxres, slope, path):
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.loglog(dts, maxres, "o", label="max residual")
    anchor = maxres[0] * (np.asarray(dts) / dts[0]) ** slope
    ax.loglog(dts, anchor, "-", label=f"slope {slope:.2f}")
    ax.set_xlabel("dt")
    ax.set_ylabel("max energy residual")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_trilinear(ratio_sets, baseline, path):
    """ratio_sets: dict n_x -> array of ratios."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, (nx, r) in enumerate(sorted(ratio_sets.items())):
        ax.hist(r, bins=24, alpha=0.55, color=f"C{i}", label=f"n_x={nx}")
    ax.axvline(baseline, color="0.3", ls="--", lw=1.0, label="single-mode baseline")
    ax.set_xlabel("trilinear ratio")
    ax.set_ylabel("trials")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_carpet(times, x, magnitudes, path):
    """|u|(t, x) for stored frames as an image."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    im = ax.imshow(magnitudes, aspect="auto", origin="lower",
                   extent=[x[0], x[-1], times[0], times[-1]], cmap="magma")
    fig.colorbar(im, ax=ax, label="|u|")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    return _save(fig, path)


def plot_energy_series(times, l2sq, path):
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(times, l2sq, color="C0")
    ax.set_xlabel("t")
    ax.set_ylabel("squared L2 mass")
    return _save(fig, path)
