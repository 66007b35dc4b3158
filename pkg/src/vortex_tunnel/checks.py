"""Fast self-checks on a coarse grid, used by the ``check`` command."""

from __future__ import annotations

import dataclasses
from typing import NamedTuple

import numpy as np

from .config import RunConfig
from .dynamics import integrate_modes
from .errors import VortexTunnelError
from .pulse import check_quantization
from .runner import grid_for, run_single

CHECK_NX = 8


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _free_mode(cfg):
    grid = grid_for(cfg, cfg.m_y[0])
    pulse = cfg.pulse
    traj = integrate_modes(grid, pulse, cfg.device, cfg.dt, cfg.sample_stride)
    omega = np.sqrt(grid.k_y**2 + grid.k_rel**2 + pulse.M0**2)
    exact = np.exp(-1j * np.outer(traj.t - pulse.t_i, omega)) / np.sqrt(2 * omega * grid.V)
    err = float(np.max(np.abs(traj.f - exact) / np.abs(exact)))
    return CheckResult("free-mode analytic solution", err <= 1e-9, f"max rel err {err:.2e}")


def _null_drive(cfg):
    run = run_single(cfg, cfg.pulse.M0, uv_coeff=0.0, per_mode=False)
    q = float(np.max(np.abs(run.series.q_bare)))
    N = float(np.max(np.abs(run.series.N_total)))
    ok = q == 0.0 and N <= 1e-12
    return CheckResult("zero drive carries no current", ok, f"max|q_bare| {q:.1e}, max|N| {N:.1e}")


def _mirror(cfg):
    grid = grid_for(cfg, cfg.m_y[0])
    traj = integrate_modes(grid, cfg.pulse, cfg.device, cfg.dt, cfg.sample_stride)
    a2 = np.abs(traj.f) ** 2
    diff = float(np.max(np.abs(a2[:, 1::2] - a2[:, 2::2]) / a2[:, 1::2]))
    return CheckResult("mirror symmetry k_x -> -k_x", diff <= 1e-14, f"max rel diff {diff:.1e}")


def _adiabatic(cfg):
    run = run_single(cfg, cfg.pulse.M0, uv_coeff=0.0, per_mode=False)
    ok = run.wronskian_drift <= cfg.wronskian_tol and abs(run.N_final) <= 1e-10
    return CheckResult(
        "driven run: Wronskian and residual occupation",
        ok,
        f"drift {run.wronskian_drift:.1e}, N_final {run.N_final:.1e}, dt {run.dt_used:g}",
    )


def _quantization(cfg):
    try:
        n = check_quantization(cfg.pulse, cfg.device)
    except VortexTunnelError as exc:
        return CheckResult("force quantization", False, str(exc))
    return CheckResult("force quantization", True, f"n' = {n}")


def run_invariant_checks(config: RunConfig) -> list[CheckResult]:
    """Quick invariant suite on an N_x = 8 grid with the configured pulse."""
    cfg = config.replace(N_x=CHECK_NX, emit_per_mode=False)
    undriven = cfg.replace(pulse=dataclasses.replace(cfg.pulse, C=0.0))
    checks = [
        lambda: _quantization(cfg),
        lambda: _free_mode(undriven),
        lambda: _null_drive(undriven),
        lambda: _mirror(undriven),
        lambda: _adiabatic(cfg),
    ]
    results = []
    for check in checks:
        try:
            results.append(check())
        except VortexTunnelError as exc:
            results.append(CheckResult(getattr(check, "__name__", "check"), False, str(exc)))
    return results
