"""Command-line interface.

Subcommands: ``prepare`` (state ladder), ``tomo`` (simulate counts and
reconstruct), ``decay`` (full delay-scan pipeline), ``fit`` (decay CSV ->
Gaussian fit) and ``calibrate`` (heating).  Exit codes: 0 success,
1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import runner
from .channels import analysis_pulse_error
from .runner import ConfigError, NumericalError, Scenario
from .sequence import format_log, prepare_bell, transfer_to_dfs
from .states import best_phase, f_min, fidelity_vs_bell, format_density_matrix
from .tomo import estimate_fmin_parity, write_counts_csv, write_parity_csv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionbell",
        description="Two-trapped-ion entangled-pair lifetime simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", type=Path, help="flat key = value config file")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out", type=Path, help="output directory or file")

    p_prepare = sub.add_parser("prepare", help="print the preparation/transfer state ladder")
    add_common(p_prepare)

    p_tomo = sub.add_parser("tomo", help="simulate a measurement run and estimate the state")
    add_common(p_tomo)
    p_tomo.add_argument("--delay", type=float, default=1.0, help="wait time in seconds")
    p_tomo.add_argument("--shots", type=int, default=1000, help="shots per setting/phase")
    p_tomo.add_argument(
        "--mode",
        choices=runner.MODES,
        default="full_tomography",
        help="full reconstruction or a direct parity scan of the bound",
    )

    p_decay = sub.add_parser("decay", help="run the delay scan and fit the decay")
    add_common(p_decay)
    p_decay.add_argument("--mode", choices=runner.MODES, help="estimation mode override")

    p_fit = sub.add_parser("fit", help="fit a Gaussian decay to a curve CSV")
    add_common(p_fit)
    p_fit.add_argument("curve", type=Path, help="decay CSV (t_s,fmin,stderr)")
    p_fit.add_argument("--offset", action="store_true", help="include a constant offset term")

    p_cal = sub.add_parser("calibrate", help="calibrate the heating coupling factor")
    add_common(p_cal)
    p_cal.add_argument("--target-loss", type=float, default=0.1)
    p_cal.add_argument("--at", type=float, default=20.0, help="calibration time in seconds")
    return parser


def _scenario(args) -> Scenario:
    scenario = runner.load_config(args.config) if args.config else Scenario()
    if args.seed is not None:
        scenario = scenario.replace(seed=args.seed)
    return scenario


def _cmd_prepare(args) -> int:
    scenario = _scenario(args)
    cfg = scenario.noise
    prepared = prepare_bell(cfg)
    transferred = transfer_to_dfs(prepared, cfg)
    for label, result in (("prepared", prepared), ("transferred", transferred)):
        state = result.state
        phi = best_phase(state)
        print(
            f"{label}: fidelity={fidelity_vs_bell(state, phi):.6f} "
            f"f_min={f_min(state):.6f} best_phase={phi:.6f} encoding={result.encoding}"
        )
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "prepared.dm").write_text(format_density_matrix(prepared.state))
        (args.out / "transferred.dm").write_text(format_density_matrix(transferred.state))
        (args.out / "sequence.log").write_text(format_log(transferred.log))
        print(f"wrote prepared.dm, transferred.dm, sequence.log to {args.out}")
    return 0


def _cmd_tomo(args) -> int:
    scenario = _scenario(args)
    if args.mode == "parity_fmin":
        return _cmd_tomo_parity(args, scenario)
    snap = runner.tomography_snapshot(args.delay, scenario.noise, args.shots, scenario.seed)
    true_phi = best_phase(snap.true_state)
    print(
        f"delay={args.delay:g}s shots={args.shots} "
        f"pulse_deficit={analysis_pulse_error(args.delay, scenario.noise):.6f}rad"
    )
    print(
        f"reconstructed: fidelity={snap.fidelity_best_phase:.6f} "
        f"f_min={snap.fmin:.6f} best_phase={snap.phase:.6f}"
    )
    print(
        f"true state:    fidelity={fidelity_vs_bell(snap.true_state, true_phi):.6f} "
        f"f_min={f_min(snap.true_state):.6f} best_phase={true_phi:.6f}"
    )
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        write_counts_csv(snap.records, args.out / "counts.csv")
        (args.out / "reconstructed.dm").write_text(format_density_matrix(snap.state_hat))
        print(f"wrote counts.csv, reconstructed.dm to {args.out}")
    return 0


def _cmd_tomo_parity(args, scenario) -> int:
    cfg = scenario.noise
    truth = runner.true_state_at(args.delay, cfg)
    estimate = estimate_fmin_parity(
        truth,
        scenario.phase_grid,
        args.shots,
        args.delay,
        cfg,
        seed=np.random.default_rng([scenario.seed, 17]),
        n_bootstrap=scenario.n_bootstrap,
    )
    print(f"delay={args.delay:g}s shots={args.shots} phases={scenario.phase_points}")
    print(
        f"parity scan: f_min={estimate.fmin:.6f} +- {estimate.stderr:.6f} "
        f"phase={estimate.phase:.6f}"
    )
    print(f"true state:  f_min={f_min(truth):.6f}")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        write_parity_csv(estimate.scan, args.out / "parity.csv")
        print(f"wrote parity.csv to {args.out}")
    return 0


def _cmd_decay(args) -> int:
    scenario = _scenario(args)
    if args.mode:
        scenario = scenario.replace(mode=args.mode)
    curve = runner.run_decay_experiment(scenario)
    print("t_s fmin stderr")
    for t, value, err in zip(curve.times_s, curve.fmin, curve.stderr):
        print(f"{t:g} {value:.6f} {err:.6f}")
    fit = runner.fit_gaussian_decay(curve, include_offset=scenario.fit_offset)
    print(
        f"fit: amplitude={fit.amplitude:.6f} tau_s={fit.tau_s:.4f} "
        f"tau_stderr_s={fit.tau_stderr_s:.4f} residual_rms={fit.residual_rms:.6f}"
    )
    print(f"entangled_until_s={runner.entangled_until(curve):g}")
    if args.out:
        paths = runner.emit_report(curve, fit, args.out)
        print("wrote " + ", ".join(p.name for p in paths) + f" to {args.out}")
    return 0


def _cmd_fit(args) -> int:
    curve = runner.read_decay_csv(args.curve)
    fit = runner.fit_gaussian_decay(curve, include_offset=args.offset)
    print(runner.format_fit_summary(curve, fit), end="")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "fit_summary.txt").write_text(runner.format_fit_summary(curve, fit))
        print(f"wrote fit_summary.txt to {args.out}")
    return 0


def _cmd_calibrate(args) -> int:
    scenario = _scenario(args)
    calibrated = runner.calibrate_heating(
        scenario.noise, target_loss=args.target_loss, at_time_s=args.at
    )
    loss = runner.analysis_fidelity_loss(args.at, calibrated)
    print(f"lamb_dicke = {calibrated.lamb_dicke:.6f}")
    print(f"analysis loss at t={args.at:g}s: {loss:.6f} (target {args.target_loss:g})")
    if args.out:
        out = args.out
        if out.suffix == "":
            out.mkdir(parents=True, exist_ok=True)
            out = out / "calibrated.cfg"
        out.write_text(runner.dump_config(scenario.replace(noise=calibrated)))
        print(f"wrote {out}")
    return 0


_COMMANDS = {
    "prepare": _cmd_prepare,
    "tomo": _cmd_tomo,
    "decay": _cmd_decay,
    "fit": _cmd_fit,
    "calibrate": _cmd_calibrate,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
