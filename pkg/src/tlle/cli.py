"""Command-line front end.

Subcommands: simulate, revival, dimension, smoothing, sweep, preset.
Exit codes: 0 success, 2 a run completed but an acceptance check failed,
1 operational error (bad arguments, unreadable files, solver blow-up).
Figures are rendered next to every delimited output; the CSVs remain the
source of truth.
"""

from __future__ import annotations

import argparse
import sys
from math import gcd
from pathlib import Path

import numpy as np

from . import plots
from .decompose import duhamel_part, linear_norm_profile, smoothing_profile
from .evolve import energy_balance_residual, solve, MIN_RESIDUAL_FRAMES
from .fractal import box_dimension
from .grid import ModelParams, from_spectral, l2_norm_sq, make_grid
from .harness import (ExperimentConfig, parse_config, read_csv,
                      resolve_simulate_config, run_experiment, write_csv,
                      PRESETS)
from .profiles import analytic_field, profile_from_name
from .propagator import RationalTime, revival_coefficients, revival_evolve


class CliError(Exception):
    """Operational error surfaced as exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is reserved for
    # acceptance failures here, so route usage problems through CliError.
    def error(self, message):
        raise CliError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="tlle", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate the model per a config file")
    sim.add_argument("--config", required=True, help="flat key=value config file")

    rev = sub.add_parser("revival", help="closed-form translate coefficients at t = pi p/q")
    rev.add_argument("--p", type=int, required=True)
    rev.add_argument("--q", type=int, required=True)
    rev.add_argument("--beta", type=int, default=1)
    rev.add_argument("--profile", default="step")
    rev.add_argument("--amplitude", type=float, default=0.1)
    rev.add_argument("--modes", type=int, default=1024)
    rev.add_argument("--out", required=True, help="coefficients CSV path")

    dim = sub.add_parser("dimension", help="box-counting dimension of a stored frame")
    dim.add_argument("--in", dest="infile", required=True, help="solution.csv from simulate")
    dim.add_argument("--component", choices=("re", "im"), required=True)
    dim.add_argument("--scales", default=None, metavar="A:B",
                     help="dyadic levels, e.g. 3:10 for eps = 1/8 .. 1/1024")
    dim.add_argument("--out", default=None, help="output CSV (default: dimension.csv beside input)")

    smo = sub.add_parser("smoothing", help="nonlinear-part norm against the linear yardstick")
    smo.add_argument("--config", required=True)
    smo.add_argument("--order", type=float, required=True, help="Sobolev order s+a")

    pre = sub.add_parser("preset", help="run a named experiment")
    pre.add_argument("--name", required=True, choices=sorted(PRESETS))
    pre.add_argument("--seed", type=int, default=1234)
    pre.add_argument("--out", default=".")
    pre.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override a config key")

    swp = sub.add_parser("sweep", help="run a preset across a seed range")
    swp.add_argument("--name", required=True, choices=sorted(PRESETS))
    swp.add_argument("--seeds", required=True, metavar="A:B", help="inclusive seed range")
    swp.add_argument("--out", default=".")
    swp.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE")
    return p


def _parse_overrides(pairs) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise CliError(f"override must look like key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _cmd_simulate(args) -> int:
    opts = resolve_simulate_config(parse_config(args.config))
    out = Path(opts["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    grid = make_grid(opts["modes"])
    par = ModelParams(beta=opts["beta"], theta=opts["theta"])
    prof = profile_from_name(opts["profile"], opts["amplitude"])
    traj = solve(prof, opts["t_end"], opts["dt"], par, grid,
                 stride=opts["stride"], scheme=opts["scheme"], dealias=opts["dealias"])

    x = grid.sample_points
    frames = [from_spectral(f) for f in traj.fields]
    sol_rows = ((t, xi, ui.real, ui.imag)
                for t, u in zip(traj.times, frames) for xi, ui in zip(x, u))
    write_csv(out / "solution.csv", ["t", "x", "re_u", "im_u"], sol_rows)

    if len(traj.times) >= MIN_RESIDUAL_FRAMES:
        res = energy_balance_residual(traj)
    else:
        res = np.full(len(traj.times), np.nan)
    mass = [l2_norm_sq(f) for f in traj.fields]
    write_csv(out / "energy.csv", ["t", "l2sq", "residual"],
              zip(traj.times, mass, res))

    plots.plot_carpet(traj.times, x, np.abs(np.array(frames)), out / "solution.png")
    plots.plot_energy_series(traj.times, mass, out / "energy.png")
    print(f"wrote {out / 'solution.csv'} ({len(traj.times)} frames)")
    return 0


def _cmd_revival(args) -> int:
    if args.q <= 0:
        raise CliError("q must be positive")
    if args.p < 0:
        raise CliError("p must be nonnegative")
    g = gcd(args.p, args.q) or 1
    rt = RationalTime(args.p // g, args.q // g)
    par = ModelParams(beta=float(args.beta))
    prof = profile_from_name(args.profile, args.amplitude)
    grid = make_grid(args.modes)

    rep = revival_coefficients(rt, par)
    field = revival_evolve(prof, rt, par, grid)
    u = from_spectral(field)
    x = grid.sample_points

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(out, ["j", "re_c", "im_c", "abs_c"],
              [(j, c.real, c.imag, abs(c)) for j, c in enumerate(rep.coefficients)])
    field_path = out.with_name(out.stem + "_field" + (out.suffix or ".csv"))
    write_csv(field_path, ["x", "re_u", "im_u", "abs_u"],
              [(xi, ui.real, ui.imag, abs(ui)) for xi, ui in zip(x, u)])
    plots.plot_revival_field(x, u, prof.sample_fn(x), out.with_suffix(".png"))
    print(f"wrote {out} and {field_path} (t = pi*{rt.p}/{rt.q}, {2 * rt.q} translates)")
    return 0


def _parse_scales(text, n) -> tuple:
    a, _, b = text.partition(":")
    try:
        lo_level, hi_level = int(a), int(b)
    except ValueError:
        raise CliError(f"scales must be A:B with integer dyadic levels, got {text!r}")
    if lo_level > hi_level:
        raise CliError("scales A:B needs A <= B")
    return (2.0 ** -hi_level, 2.0 ** -lo_level)


def _cmd_dimension(args) -> int:
    cols = read_csv(args.infile)
    for need in ("t", "x", "re_u", "im_u"):
        if need not in cols:
            raise CliError(f"{args.infile} lacks column {need!r}")
    t = cols["t"]
    last = t == t.max()
    xs = cols["x"][last]
    ys = cols[args.component + "_u"][last]
    scale_range = _parse_scales(args.scales, xs.size) if args.scales else None
    est = box_dimension(xs, ys, scale_range)

    out = Path(args.out) if args.out else Path(args.infile).parent / "dimension.csv"
    write_csv(out, ["log_inv_eps", "log_count"],
              zip(np.log(1.0 / est.scales), np.log(est.counts)))
    intercept = float(np.mean(np.log(est.counts) - est.slope * np.log(1.0 / est.scales)))
    plots.plot_count_fit(np.log(1.0 / est.scales), np.log(est.counts),
                         est.slope, intercept, out.with_suffix(".png"))
    print(f"slope={est.slope:.6g} stderr={est.stderr:.6g}")
    return 0


def _cmd_smoothing(args) -> int:
    opts = resolve_simulate_config(parse_config(args.config))
    out = Path(opts["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    n = opts["modes"]
    grid = make_grid(n)
    par = ModelParams(beta=opts["beta"], theta=opts["theta"])
    prof = profile_from_name(opts["profile"], opts["amplitude"])
    traj = solve(prof, opts["t_end"], opts["dt"], par, grid,
                 stride=opts["stride"], scheme=opts["scheme"], dealias=opts["dealias"])
    band = n // 3
    series = duhamel_part(traj)
    norm_n = smoothing_profile(series, args.order, band)
    norm_lin = linear_norm_profile(traj, args.order, band,
                                   u0=analytic_field(prof, grid))
    write_csv(out / "smoothing.csv", ["t", "h_norm_N", "h_norm_linear", "n_modes"],
              [(t, a, b, n) for t, a, b in zip(traj.times, norm_n, norm_lin)])
    plots.plot_smoothing_profiles([(n, traj.times, norm_n, norm_lin)],
                                  out / "smoothing.png", args.order)
    print(f"wrote {out / 'smoothing.csv'} (order {args.order}, band |k| <= {band})")
    return 0


def _cmd_preset(args) -> int:
    cfg = ExperimentConfig(preset=args.name,
                           overrides=_parse_overrides(args.overrides),
                           seed=args.seed, out_dir=args.out)
    report = run_experiment(cfg)
    for name, ok in sorted(report.checks.items()):
        print(f"  {name}: {'pass' if ok else 'FAIL'}")
    print(f"{args.name}: {'PASS' if report.passed else 'FAIL'} "
          f"({report.wall_time_s:.1f}s, report at {Path(args.out) / 'report.json'})")
    return 0 if report.passed else 2


def _cmd_sweep(args) -> int:
    a, _, b = args.seeds.partition(":")
    try:
        lo, hi = int(a), int(b)
    except ValueError:
        raise CliError(f"seeds must be A:B with integers, got {args.seeds!r}")
    if lo > hi:
        raise CliError("seed range A:B needs A <= B")
    overrides = _parse_overrides(args.overrides)
    out = Path(args.out)
    rows = []
    all_ok = True
    for seed in range(lo, hi + 1):
        cfg = ExperimentConfig(preset=args.name, overrides=dict(overrides),
                               seed=seed, out_dir=str(out / f"seed-{seed}"))
        report = run_experiment(cfg)
        rows.append((seed, report.passed, report.failure or ""))
        all_ok &= report.passed
        print(f"seed {seed}: {'pass' if report.passed else 'FAIL'}")
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", ["seed", "passed", "failing_check"], rows)
    return 0 if all_ok else 2


_COMMANDS = {
    "simulate": _cmd_simulate,
    "revival": _cmd_revival,
    "dimension": _cmd_dimension,
    "smoothing": _cmd_smoothing,
    "preset": _cmd_preset,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
