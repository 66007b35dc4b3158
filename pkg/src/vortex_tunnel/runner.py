"""Run orchestration: single runs with dt halving, sweeps, calibration, fits."""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .config import RunConfig
from .dynamics import ModeGrid, integrate_modes
from .errors import ConvergenceError, FitDomainError, IntegrationError, SweepError
from .observables import (
    SweepEntry,
    SweepResult,
    TimeSeriesRecord,
    calibrate_uv_coefficient,
    time_series,
    transport_integral,
)

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Converged result of one (M0, k_y) run."""

    M0: float
    m_y: int
    series: TimeSeriesRecord
    Q: float
    Q_integral: float
    uv_coeff: float
    N_final: float
    dt_used: float
    wronskian_drift: float
    history: list = field(default_factory=list)


class FitResult(NamedTuple):
    amplitude: float
    rate: float
    residual: float


def grid_for(config: RunConfig, m_y: int) -> ModeGrid:
    d = config.device
    return ModeGrid(config.N_x, d.L_x, d.L_y, m_y, config.pulse.baseline_quanta)


def simulate(config: RunConfig, M0, m_y, dt, sample_stride, uv_coeff, per_mode=False) -> RunResult:
    """One integration at a fixed step, no convergence control."""
    pulse = dataclasses.replace(config.pulse, M0=float(M0))
    grid = grid_for(config, m_y)
    traj = integrate_modes(grid, pulse, config.device, dt, sample_stride)
    series = time_series(traj, grid, pulse, config.device, per_mode=per_mode)
    integral = transport_integral(series.t, series.q_reg, grid.L_y, (pulse.t_i, pulse.t_f))
    return RunResult(
        M0=float(M0),
        m_y=m_y,
        series=series,
        Q=integral + uv_coeff * M0 * M0,
        Q_integral=integral,
        uv_coeff=uv_coeff,
        N_final=float(series.N_total[-1]),
        dt_used=dt,
        wronskian_drift=traj.wronskian_drift,
    )


def _resolve_uv(config: RunConfig, uv_coeff):
    if uv_coeff is None:
        uv_coeff = config.uv_coeff
    if uv_coeff == "calibrate":
        uv_coeff = calibrate(config)
    return float(uv_coeff)


def run_single(config: RunConfig, M0, m_y=None, uv_coeff=None, per_mode=None) -> RunResult:
    """Run one (M0, k_y) point, halving dt until the transport settles.

    The sample spacing in time is held at ``config.dt * config.sample_stride``
    for every level, so successive levels produce the same sample times. A
    level is accepted when its transport differs from the previous level's by
    less than ``convergence_tol`` (relative to the larger of |Q| and its
    integral part) and its Wronskian drift is within ``wronskian_tol``.
    Levels whose drift exceeds the hard limit are skipped.
    """
    if m_y is None:
        m_y = config.m_y[0]
    if per_mode is None:
        per_mode = config.emit_per_mode
    uv = _resolve_uv(config, uv_coeff)
    history = []
    prev = None
    for level in range(config.max_halvings + 1):
        dt = config.dt / 2**level
        stride = config.sample_stride * 2**level
        try:
            cur = simulate(config, M0, m_y, dt, stride, uv, per_mode)
        except IntegrationError as exc:
            log.info("M0=%g dt=%g rejected: %s", M0, dt, exc)
            history.append((dt, math.nan, math.inf))
            prev = None
            continue
        history.append((dt, cur.Q, cur.wronskian_drift))
        log.debug("M0=%g dt=%g Q=%.12g drift=%.3g", M0, dt, cur.Q, cur.wronskian_drift)
        if prev is not None:
            scale = max(abs(cur.Q), abs(cur.Q_integral))
            settled = abs(cur.Q - prev.Q) <= config.convergence_tol * scale
            if settled and cur.wronskian_drift <= config.wronskian_tol:
                cur.history = history
                return cur
        prev = cur
    raise ConvergenceError(
        f"M0={M0:g}, m_y={m_y}: no convergence after {config.max_halvings} halvings "
        f"(dt, Q, drift) = {history}",
        history,
    )


def calibrate(config: RunConfig, M_cal=None, m_y=None) -> float:
    """UV coefficient making the transport vanish at the heavy mass ``M_cal``."""
    M_cal = config.M_cal if M_cal is None else M_cal
    return calibrate_uv_coefficient(
        lambda M: run_single(config, M, m_y=m_y, uv_coeff=0.0, per_mode=False).Q, M_cal
    )


def fit_exponential(points) -> FitResult:
    """Least-squares fit of ln|Q| = ln|A| - rate * M0.

    ``points`` is a sequence of (M0, Q). ``residual`` is the largest
    deviation on the log scale. The amplitude carries the common sign of Q.
    """
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise FitDomainError("need at least three (M0, Q) points")
    M, Q = pts[:, 0], pts[:, 1]
    if np.any(Q == 0) or not (np.all(Q > 0) or np.all(Q < 0)):
        raise FitDomainError(f"transport changes sign or vanishes: {Q.tolist()}")
    y = np.log(np.abs(Q))
    design = np.stack([np.ones_like(M), -M], axis=1)
    (log_a, rate), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.max(np.abs(y - design @ np.array([log_a, rate]))))
    return FitResult(float(np.sign(Q[0]) * math.exp(log_a)), float(rate), residual)


def run_sweep(config: RunConfig, threads=1, keep_runs=True):
    """Run every sweep mass for every configured k_y.

    Returns ``(SweepResult, runs)``. Transport and occupation of a mass are
    summed over the k_y list in its configured order. Points are independent;
    with ``threads > 1`` they run concurrently but are reduced in the same
    order, so results do not depend on the thread count.
    """
    uv = _resolve_uv(config, None)
    masses = sorted(config.sweep)
    jobs = [(M0, m_y) for M0 in masses for m_y in config.m_y]

    def job(args):
        return run_single(config, args[0], m_y=args[1], uv_coeff=uv)

    runs = []
    failure = None
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(job, j) for j in jobs]
            for fut in futures:
                try:
                    runs.append(fut.result())
                except Exception as exc:  # noqa: BLE001 - re-raised below
                    failure = failure or exc
    else:
        for j in jobs:
            try:
                runs.append(job(j))
            except Exception as exc:  # noqa: BLE001 - re-raised below
                failure = exc
                break

    entries = []
    for M0 in masses:
        group = [r for r in runs if r.M0 == M0]
        if len(group) != len(config.m_y):
            continue
        entries.append(
            SweepEntry(
                M0=M0,
                Q=sum(r.Q for r in group),
                N_final=sum(r.N_final for r in group),
                wronskian_drift=max(r.wronskian_drift for r in group),
                dt_used=min(r.dt_used for r in group),
            )
        )
    result = SweepResult(entries)
    if failure is not None:
        raise SweepError(f"sweep aborted: {failure}", partial=(result, runs)) from failure
    if len(entries) >= 3:
        try:
            fit = fit_exponential([(e.M0, e.Q) for e in entries])
        except FitDomainError as exc:
            log.warning("no exponential fit: %s", exc)
        else:
            result.fit_amplitude, result.fit_rate, result.fit_residual = fit
    return result, (runs if keep_runs else [])
