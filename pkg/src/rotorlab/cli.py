"""Batch front end: exact sweeps, simulation campaigns, validation, figures.

Outputs are CSV tables (17 significant digits, round-trip exact for 64-bit
floats) plus rendered PNG figures next to them. Exit codes: 0 success,
1 validation failure, 2 config error, 3 numerical error.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .config import ConfigError, RunConfig, parse_config, serialize_config
from .engine import (
    InsufficientSamplesError,
    NonFiniteStateError,
    run_ensemble,
)
from .exact import steady_state_report
from .model import NoiseModel

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_EXACT_COLUMNS = ("axis", "L0", "L0_classical", "M_xi", "I0",
                  "r_w", "r_q1", "r_q2", "delta_rq")
_SIM_OBSERVABLES = ("L", "M_xi", "I", "r_q1", "r_q2", "r_w")
_RIGID_COLUMNS = ("L_over_r2_mean", "L_over_r2_stderr",
                  "L_over_r2_of_means", "L_over_r2_of_means_stderr")
# observable pairing between exact and simulated tables
_VALIDATE_PAIRS = (("L0", "L"), ("M_xi", "M_xi"), ("I0", "I"),
                   ("r_q1", "r_q1"), ("r_q2", "r_q2"), ("r_w", "r_w"))


class _NumericalError(Exception):
    """Wraps a numerical failure with the offending grid point."""


def _write_csv(path, header, rows, deterministic: bool) -> None:
    with open(path, "w", newline="") as fh:
        if not deterministic:
            fh.write(f"# generated {datetime.datetime.now().isoformat()}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                "%.17g" % v if isinstance(v, float) else str(v) for v in row
            )


def _read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader])
    return header, data


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("ROTOR_LAB_THREADS")
    return int(env) if env else 1


def _load(args) -> RunConfig:
    cfg = parse_config(args.config)
    if getattr(args, "seed", None) is not None and cfg.sim is not None:
        cfg = replace(cfg, sim=replace(cfg.sim, master_seed=args.seed))
    return cfg


def _require_sweep(cfg: RunConfig):
    if cfg.sweep is None:
        raise ConfigError("this command requires a [sweep] section")
    return cfg.sweep


def cmd_exact(args) -> int:
    cfg = _load(args)
    sweep = _require_sweep(cfg)
    rows = []
    for value, params, baths, drive in sweep.points(cfg.params, cfg.baths, cfg.drive):
        try:
            rep = steady_state_report(params, baths, drive)
        except ArithmeticError as exc:
            raise _NumericalError(f"at {sweep.axis} = {value:g}: {exc}") from exc
        rows.append((value, rep.L0, rep.L0_classical, rep.M_xi, rep.I0,
                     rep.r_w, rep.r_q1, rep.r_q2, rep.delta_rq))
    out = os.path.join(args.out, "exact.csv")
    _write_csv(out, _EXACT_COLUMNS, rows, args.deterministic)
    print(out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    sweep = _require_sweep(cfg)
    if cfg.sim is None:
        raise ConfigError("simulate requires a [sim] section")
    workers = _resolve_threads(args)
    rigid = cfg.rigid_body and cfg.baths.model is NoiseModel.CLASSICAL_WHITE
    header = ["axis"]
    for name in _SIM_OBSERVABLES:
        header += [f"{name}_mean", f"{name}_stderr"]
    if rigid:
        header += list(_RIGID_COLUMNS)
    rows = []
    for value, params, baths, drive in sweep.points(cfg.params, cfg.baths, cfg.drive):
        try:
            res = run_ensemble(params, baths, drive, cfg.sim, n_workers=workers)
        except (NonFiniteStateError, InsufficientSamplesError) as exc:
            raise _NumericalError(f"at {sweep.axis} = {value:g}: {exc}") from exc
        row = [value]
        for name in _SIM_OBSERVABLES:
            est = res.estimates[name]
            row += [est.mean, est.std_error]
        if rigid:
            row += [res.mean_of_ratio.mean, res.mean_of_ratio.std_error,
                    res.ratio_of_means.mean, res.ratio_of_means.std_error]
        rows.append(row)
    out = os.path.join(args.out, "sim.csv")
    _write_csv(out, header, rows, args.deterministic)
    print(out)
    return EXIT_OK


def _z_score(sim: float, exact: float, stderr: float) -> float:
    if stderr and math.isfinite(stderr) and stderr > 0:
        return (sim - exact) / stderr
    return 0.0 if abs(sim - exact) <= 1e-12 else math.inf


def cmd_validate(args) -> int:
    ex_header, ex_data = _read_csv(args.exact)
    sim_header, sim_data = _read_csv(args.sim)
    if ex_data.shape[0] != sim_data.shape[0] or not np.array_equal(
        ex_data[:, ex_header.index("axis")], sim_data[:, sim_header.index("axis")]
    ):
        raise ConfigError("exact and simulated tables have mismatched grids")
    rows = []
    n_fail = 0
    for ex_name, sim_name in _VALIDATE_PAIRS:
        if ex_name not in ex_header or f"{sim_name}_mean" not in sim_header:
            continue
        exact = ex_data[:, ex_header.index(ex_name)]
        mean = sim_data[:, sim_header.index(f"{sim_name}_mean")]
        stderr = sim_data[:, sim_header.index(f"{sim_name}_stderr")]
        axis = ex_data[:, ex_header.index("axis")]
        for a, e, m, s in zip(axis, exact, mean, stderr):
            z = _z_score(m, e, s)
            ok = abs(z) <= 3.0
            n_fail += not ok
            rows.append((sim_name, a, e, m, s, z, int(ok)))
    header = ("observable", "axis", "exact", "sim_mean", "sim_stderr", "z_score", "pass")
    out = os.path.join(args.out, "validation.csv")
    _write_csv(out, header, rows, args.deterministic)
    print(out)
    frac_fail = n_fail / len(rows) if rows else 0.0
    return EXIT_VALIDATION if frac_fail > 0.05 else EXIT_OK


# ---------------------------------------------------------------------------
# figures


def _dense_grid(sweep) -> np.ndarray:
    lo, hi = sweep.grid[0], sweep.grid[-1]
    if sweep.axis == "theta" and lo > 0:
        return np.geomspace(lo, hi, 150)
    return np.linspace(lo, hi, 200)


def _exact_over(cfg: RunConfig, values, axis=None):
    sweep = cfg.sweep if axis is None else replace(cfg.sweep, axis=axis)
    sweep = replace(sweep, grid=tuple(values))
    return [
        steady_state_report(p, b, d)
        for _, p, b, d in sweep.points(cfg.params, cfg.baths, cfg.drive)
    ]


def _sim_table(cfg: RunConfig, workers: int):
    results = []
    for value, p, b, d in cfg.sweep.points(cfg.params, cfg.baths, cfg.drive):
        results.append((value, run_ensemble(p, b, d, cfg.sim, n_workers=workers)))
    return results


def _figure_axes():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def cmd_figures(args) -> int:
    cfg = _load(args)
    sweep = _require_sweep(cfg)
    workers = _resolve_threads(args)
    plt = _figure_axes()
    which = args.which
    outdir = args.out
    det = args.deterministic

    expected_axis = {"fig1_top": "theta", "fig1_bottom": "alpha",
                     "fig2": "omega0", "figB1": sweep.axis}[which]
    if sweep.axis != expected_axis:
        raise ConfigError(f"{which} requires sweep axis {expected_axis!r}, "
                          f"got {sweep.axis!r}")

    if which == "figB1":
        if cfg.sim is None or cfg.baths.model is not NoiseModel.CLASSICAL_WHITE:
            raise ConfigError("figB1 needs [sim] and the classical-white model")
        rows = []
        for value, p, b, d in sweep.points(cfg.params, cfg.baths, cfg.drive):
            res = run_ensemble(p, b, d, cfg.sim, n_workers=workers)
            rows.append((value,
                         res.mean_of_ratio.mean, res.mean_of_ratio.std_error,
                         res.ratio_of_means.mean, res.ratio_of_means.std_error))
        _write_csv(os.path.join(outdir, "figB1.csv"),
                   ("axis",) + _RIGID_COLUMNS, rows, det)
        data = np.array(rows)
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.errorbar(data[:, 0], data[:, 1], yerr=data[:, 2], fmt="o-",
                    label=r"$\langle L/r^2\rangle$")
        ax.errorbar(data[:, 0], data[:, 3], yerr=data[:, 4], fmt="s--",
                    label=r"$\langle L\rangle/\langle r^2\rangle$")
        ax.set_xlabel(sweep.axis)
        ax.legend()
        fig.tight_layout()
        fig.savefig(os.path.join(outdir, "figB1.png"), dpi=150)
        plt.close(fig)
        print(os.path.join(outdir, "figB1.png"))
        return EXIT_OK

    dense = _dense_grid(sweep)
    reports = _exact_over(cfg, dense)
    sim = _sim_table(cfg, workers) if cfg.sim is not None else []

    if which in ("fig1_top", "fig1_bottom"):
        rows = [(v, r.L0, r.L0_classical, r.M_xi) for v, r in zip(dense, reports)]
        _write_csv(os.path.join(outdir, f"{which}_exact.csv"),
                   ("axis", "L0", "L0_classical", "M_xi"), rows, det)
        if sim:
            sim_rows = [
                (v, res.estimates["L"].mean, res.estimates["L"].std_error,
                 res.estimates["M_xi"].mean, res.estimates["M_xi"].std_error)
                for v, res in sim
            ]
            _write_csv(os.path.join(outdir, f"{which}_sim.csv"),
                       ("axis", "L_mean", "L_stderr", "M_xi_mean", "M_xi_stderr"),
                       sim_rows, det)
        fig, ax = plt.subplots(figsize=(5.5, 4))
        ax.plot(dense, [r.L0 for r in reports], "-", label="quantum")
        ax.plot(dense, [r.L0_classical for r in reports], "--", label="classical")
        if sim:
            pts = np.array([(v, res.estimates["L"].mean, res.estimates["L"].std_error)
                            for v, res in sim])
            ax.errorbar(pts[:, 0], pts[:, 1], yerr=pts[:, 2], fmt="o", label="simulation")
        ax.set_xlabel(sweep.axis)
        ax.set_ylabel(r"$\langle L\rangle_0$")
        if which == "fig1_top":
            ax.set_xscale("log")
        ax.legend(loc="upper left")
        inset = ax.inset_axes([0.6, 0.12, 0.36, 0.32])
        if which == "fig1_top":
            inset.plot(dense, [r.M_xi for r in reports], "-")
            inset.set_xscale("log")
            if sim:
                pts = np.array(
                    [(v, res.estimates["M_xi"].mean, res.estimates["M_xi"].std_error)
                     for v, res in sim])
                inset.errorbar(pts[:, 0], pts[:, 1], yerr=pts[:, 2], fmt="o")
        else:
            # two reference temperature scalings for the torque inset; the
            # scale factors are configurable placeholders, not measured values
            inset_rows = [dense]
            for theta in args.inset_theta:
                c2 = replace(cfg, baths=replace(cfg.baths, T1=cfg.sweep.tau1 * theta,
                                                T2=cfg.sweep.tau2 * theta))
                reps = _exact_over(c2, dense)
                inset.plot(dense, [r.M_xi for r in reps], "-",
                           label=rf"$\theta={theta:g}$")
                inset_rows.append([r.M_xi for r in reps])
            inset.legend(fontsize=6)
            _write_csv(
                os.path.join(outdir, "fig1_bottom_inset.csv"),
                ["axis"] + [f"M_xi_theta_{t:g}" for t in args.inset_theta],
                list(zip(*inset_rows)), det)
        inset.set_ylabel(r"$\langle M_\xi\rangle_0$", fontsize=7)
        fig.tight_layout()
        fig.savefig(os.path.join(outdir, f"{which}.png"), dpi=150)
        plt.close(fig)
        print(os.path.join(outdir, f"{which}.png"))
        return EXIT_OK

    # fig2: work and heat rates over the drive frequency
    rows = [(v, r.r_w, r.r_q1, r.r_q2) for v, r in zip(dense, reports)]
    _write_csv(os.path.join(outdir, "fig2_exact.csv"),
               ("axis", "r_w", "r_q1", "r_q2"), rows, det)
    if sim:
        sim_rows = []
        for v, res in sim:
            row = [v]
            for name in ("r_w", "r_q1", "r_q2"):
                row += [res.estimates[name].mean, res.estimates[name].std_error]
            sim_rows.append(row)
        _write_csv(os.path.join(outdir, "fig2_sim.csv"),
                   ("axis", "r_w_mean", "r_w_stderr", "r_q1_mean", "r_q1_stderr",
                    "r_q2_mean", "r_q2_stderr"), sim_rows, det)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(dense, [r.r_w for r in reports], "-", label=r"$r_w$")
    ax.plot(dense, [r.r_q1 for r in reports], "--", label=r"$r_{q_1}$")
    ax.plot(dense, [r.r_q2 for r in reports], ":", label=r"$r_{q_2}$")
    ax.set_xlabel(r"$\omega_0$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(outdir, "fig2.png"), dpi=150)
    plt.close(fig)
    print(os.path.join(outdir, "fig2.png"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub, config=True):
    if config:
        sub.add_argument("--config", required=True, help="path to a run config file")
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--seed", type=int, default=None,
                     help="override [sim] master_seed")
    sub.add_argument("--threads", type=int, default=None,
                     help="worker count (fallback: ROTOR_LAB_THREADS, then 1)")
    sub.add_argument("--deterministic", action="store_true",
                     help="suppress timestamp headers for byte-stable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotorlab",
        description="Two-temperature quantum rotator: exact observables and simulation",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("exact", help="exact steady-state sweep to CSV")
    _add_common(sub)
    sub.set_defaults(func=cmd_exact)

    sub = subs.add_parser("simulate", help="Langevin ensemble sweep to CSV")
    _add_common(sub)
    sub.set_defaults(func=cmd_simulate)

    sub = subs.add_parser("validate", help="z-score a simulation against exact values")
    sub.add_argument("--exact", required=True, help="exact CSV table")
    sub.add_argument("--sim", required=True, help="simulated CSV table")
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--deterministic", action="store_true")
    sub.set_defaults(func=cmd_validate)

    sub = subs.add_parser("figures", help="figure-ready CSV plus rendered PNG")
    sub.add_argument("--which", required=True,
                     choices=("fig1_top", "fig1_bottom", "fig2", "figB1"))
    sub.add_argument("--inset-theta", type=float, nargs=2, default=(0.1, 1.0),
                     help="temperature scale factors for the fig1_bottom inset")
    _add_common(sub)
    sub.set_defaults(func=cmd_figures)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
