"""Physical outputs computed from sampled mode functions.

Mode sums run in the grid's order (ascending |m|, +m before -m) with
Neumaier compensated summation; the vortex current is a small difference of
large, nearly symmetric terms. The Pauli-Villars regulator is never
integrated: its contribution is the analytic WKB counterterm
``(E_tilde - k_center) / (pi L_y)``. The finite-cutoff artifact of order
M0^2/Lambda^2 is removed by the ``uv_coeff * M0^2`` term of the transport.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .device import DeviceParams
from .dynamics import ModeGrid, Trajectory
from .errors import IncompleteGridError, SeriesGapError
from .pulse import EffectiveFieldProfile, MassProfile, PulseSpec

UV_COEFF = 0.0215
M_CAL = 10.0


def neumaier_sum(terms, axis=-1):
    """Compensated sum of ``terms`` along ``axis``, in index order."""
    terms = np.moveaxis(np.asarray(terms, dtype=float), axis, 0)
    s = np.zeros(terms.shape[1:])
    comp = np.zeros(terms.shape[1:])
    for x in terms:
        t = s + x
        comp += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
        s = t
    return s + comp


def _check_complete(values, grid: ModeGrid):
    if np.shape(values)[-1] != grid.n_modes:
        raise IncompleteGridError(
            f"expected {grid.n_modes} k_x slots, got {np.shape(values)[-1]}"
        )


def bare_current_density(f, E_tilde, grid: ModeGrid):
    """q = 2 sum_kx (k_x - E_tilde) |f_k|^2 (c1 = 1).

    ``f`` has modes on its last axis in grid order; ``E_tilde`` broadcasts
    against the leading axes (one value per sample time).
    """
    _check_complete(f, grid)
    E = np.asarray(E_tilde, dtype=float)[..., None]
    terms = 2.0 * (grid.k_x - E) * np.abs(f) ** 2
    return neumaier_sum(terms)


def pv_counterterm(E_tilde, L_y, k_center=0.0):
    """Analytic regulator current (E_tilde - k_center) / (pi L_y)."""
    return (np.asarray(E_tilde, dtype=float) - k_center) / (math.pi * L_y)


def regularized_current(q_bare, q_prime):
    return np.asarray(q_bare) + np.asarray(q_prime)


def transport_integral(t, q_reg, L_y, window=None):
    """L_y times the trapezoidal time integral of ``q_reg``.

    Raises if a sampling gap exceeds twice the typical spacing or, when
    ``window = (t_i, t_f)`` is given, if the samples do not span it.
    """
    t = np.asarray(t, dtype=float)
    q_reg = np.asarray(q_reg, dtype=float)
    if t.ndim != 1 or t.shape != q_reg.shape or t.size < 2:
        raise SeriesGapError("need matching 1-d series of at least two samples")
    h = np.diff(t)
    if np.any(h <= 0):
        raise SeriesGapError("sample times must increase")
    nominal = np.median(h)
    if h.max() > 2.0 * nominal * (1 + 1e-9):
        raise SeriesGapError(f"gap of {h.max():g} exceeds twice the spacing {nominal:g}")
    if window is not None:
        slack = 1e-9 * (window[1] - window[0])
        if abs(t[0] - window[0]) > slack or abs(t[-1] - window[1]) > slack:
            raise SeriesGapError("series does not span the integration window")
    return L_y * float(np.trapezoid(q_reg, t))


def total_transport(t, q_reg, L_y, M0, uv_coeff=UV_COEFF, window=None):
    """Q = L_y int q_reg dt + uv_coeff * M0^2."""
    return transport_integral(t, q_reg, L_y, window) + uv_coeff * M0 * M0


def calibrate_uv_coefficient(run_fn, M_cal=M_CAL):
    """Coefficient that makes the transport vanish at the heavy mass ``M_cal``.

    ``run_fn(M0)`` must return the transport computed with ``uv_coeff = 0``.
    Tunneling is negligible at ``M_cal``, so what remains is the cutoff
    artifact, assumed proportional to M0^2.
    """
    return -run_fn(M_cal) / (M_cal * M_cal)


def mode_energy(f, f_dot, omega_sq):
    """|f_dot|^2 + omega^2 |f|^2 (energy over hbar)."""
    return np.abs(f_dot) ** 2 + omega_sq * np.abs(f) ** 2


def occupation(f, f_dot, omega, V):
    """n_k = (V / omega) E_k - 1; round-off may leave it slightly negative."""
    return V / omega * mode_energy(f, f_dot, omega * omega) - 1.0


def bogoliubov_beta2(f, f_dot, omega, V):
    """|beta|^2 of f against the instantaneous positive-frequency solution.

    With f = alpha u + beta conj(u), u = exp(-i omega t) / sqrt(2 omega V),
    one has f_dot + i omega f = 2 i omega beta conj(u). The mode occupation
    above equals |alpha|^2 + |beta|^2 - 1 = 2 |beta|^2 (a vortex and an
    antivortex per created pair).
    """
    return V / (2.0 * omega) * np.abs(f_dot + 1j * omega * f) ** 2


def total_occupation(n_k, grid: ModeGrid):
    """Sum of occupations over the k_x grid (last axis)."""
    _check_complete(n_k, grid)
    return neumaier_sum(n_k)


@dataclass
class TimeSeriesRecord:
    """Observables of one (M0, k_y) run at the sampled times."""

    t: np.ndarray
    E_tilde: np.ndarray
    q_bare: np.ndarray
    q_prime: np.ndarray
    q_reg: np.ndarray
    N_total: np.ndarray
    k_x: np.ndarray | None = None
    abs_f2: np.ndarray | None = None
    n_k: np.ndarray | None = None

    @property
    def has_per_mode(self) -> bool:
        return self.n_k is not None


def time_series(traj: Trajectory, grid: ModeGrid, pulse: PulseSpec,
                device: DeviceParams, per_mode=False) -> TimeSeriesRecord:
    """Evaluate current and occupation at every sample of ``traj``."""
    t = traj.t
    E = EffectiveFieldProfile(pulse, device)(t)
    M = MassProfile(pulse)(t)
    q_bare = bare_current_density(traj.f, E, grid)
    q_prime = pv_counterterm(E, grid.L_y, grid.k_center)
    q = grid.k_x[None, :] - E[:, None]
    omega = np.sqrt(grid.k_y**2 + q * q + (M * M)[:, None])
    n_k = occupation(traj.f, traj.f_dot, omega, grid.V)
    record = TimeSeriesRecord(
        t=t,
        E_tilde=E,
        q_bare=q_bare,
        q_prime=q_prime,
        q_reg=regularized_current(q_bare, q_prime),
        N_total=total_occupation(n_k, grid),
    )
    if per_mode:
        record.k_x = grid.k_x
        record.abs_f2 = np.abs(traj.f) ** 2
        record.n_k = n_k
    return record


@dataclass
class SweepEntry:
    M0: float
    Q: float
    N_final: float
    wronskian_drift: float
    dt_used: float


@dataclass
class SweepResult:
    """Per-M0 transport; the exponential fit is attached for >= 3 points.

    ``fit_rate * L_x`` plays the role of the instanton action per unit mass.
    """

    entries: list[SweepEntry] = field(default_factory=list)
    fit_amplitude: float | None = None
    fit_rate: float | None = None
    fit_residual: float | None = None

    def __post_init__(self):
        self.entries = sorted(self.entries, key=lambda e: e.M0)

    @property
    def has_fit(self) -> bool:
        return self.fit_rate is not None
