"""Command line interface.

    vortex-tunnel run       [--config FILE] [--out DIR] [--m0 M] [--emit-plots]
    vortex-tunnel sweep     [--config FILE] [--out DIR] [--m0 M] [--threads N] [--emit-plots]
    vortex-tunnel calibrate [--config FILE] [--out DIR] [--m0 M_cal]
    vortex-tunnel check     [--config FILE]

Exit status is 0 on success and the error category's code otherwise
(2 configuration/domain, 3 integration, 4 convergence/sweep, 5 fit, 6 I/O).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import RunConfig, load_config
from .errors import SweepError, VortexTunnelError
from .observables import SweepEntry, SweepResult
from .output import emit_outputs

log = logging.getLogger("vortex_tunnel")


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file (defaults if omitted)")
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--m0", type=float, help="override M0 (run), the sweep (sweep) or M_cal (calibrate)")
    common.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
    common.add_argument("--emit-plots", action="store_true", help="also write plot scripts")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="vortex-tunnel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="single M0 run with dt convergence")
    sub.add_parser("sweep", parents=[common], help="M0 sweep with exponential fit")
    sub.add_parser("calibrate", parents=[common], help="derive the UV correction coefficient")
    sub.add_parser("check", parents=[common], help="validate config and run quick invariant checks")
    return parser


def _load(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def _cmd_run(args, cfg):
    from .runner import run_single

    M0 = args.m0 if args.m0 is not None else cfg.pulse.M0
    runs = [run_single(cfg, M0, m_y=m_y) for m_y in cfg.m_y]
    sweep = SweepResult([
        SweepEntry(
            M0=float(M0),
            Q=sum(r.Q for r in runs),
            N_final=sum(r.N_final for r in runs),
            wronskian_drift=max(r.wronskian_drift for r in runs),
            dt_used=min(r.dt_used for r in runs),
        )
    ])
    emit_outputs(runs, cfg, sweep, out_dir=args.out, emit_plots=args.emit_plots or None)
    e = sweep.entries[0]
    print(f"M0={e.M0:g} Q={e.Q!r} N_final={e.N_final:.3e} dt_used={e.dt_used:g} "
          f"drift={e.wronskian_drift:.2e}")


def _cmd_sweep(args, cfg):
    from .runner import run_sweep

    if args.m0 is not None:
        cfg = cfg.replace(sweep=(args.m0,))
    try:
        result, runs = run_sweep(cfg, threads=max(1, args.threads))
    except SweepError as exc:
        if exc.partial is not None:
            partial, runs = exc.partial
            emit_outputs(runs, cfg, partial, out_dir=args.out, emit_plots=args.emit_plots or None)
        raise
    emit_outputs(runs, cfg, result, out_dir=args.out, emit_plots=args.emit_plots or None)
    for e in result.entries:
        print(f"M0={e.M0:g} Q={e.Q!r} N_final={e.N_final:.3e} dt_used={e.dt_used:g}")
    if result.has_fit:
        print(f"fit: amplitude={result.fit_amplitude!r} rate={result.fit_rate!r} "
              f"residual={result.fit_residual!r}")


def _cmd_calibrate(args, cfg):
    from .runner import calibrate

    M_cal = args.m0 if args.m0 is not None else cfg.M_cal
    coeff = calibrate(cfg, M_cal)
    emit_outputs([], cfg, None, out_dir=args.out, emit_plots=False, calibration=(M_cal, coeff))
    print(f"uv_coeff={coeff!r} (M_cal={M_cal:g}, N_x={cfg.N_x})")


def _cmd_check(args, cfg):
    from .checks import run_invariant_checks

    failed = 0
    for res in run_invariant_checks(cfg):
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}")
        failed += not res.passed
    if failed:
        return 7
    return 0


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "calibrate": _cmd_calibrate, "check": _cmd_check}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
        if args.out:
            cfg = cfg.replace(output_dir=args.out)
        status = COMMANDS[args.command](args, cfg)
    except VortexTunnelError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return exc.exit_code
    return status or 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
