"""Mode functions of the vortex field on a periodic grid.

Each Fourier mode obeys ``f'' + omega^2(t) f = 0`` with

    omega^2 = k_y^2 + (k_x - E_tilde(t))^2 + M(t)^2        (c1 = 1)

and starts in the instantaneous vacuum. Integration uses Butcher's explicit
seven-stage sixth-order Runge-Kutta method at a fixed step. The complex
equation is advanced as real lanes (Re f, Im f interleaved, each with its own
k_x), so the inner loop vectorizes.

Mode order everywhere is ascending |m| with +m before -m, where
``k_x = 2 pi (m_center + m) / L_x``. Mirror pairs are therefore adjacent,
which is the order the observables reduce in.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numba
import numpy as np

from .device import DeviceParams
from .errors import DomainError, InitializationError, IntegrationError, StepSizeError
from .pulse import EffectiveFieldProfile, MassProfile, PulseSpec

log = logging.getLogger(__name__)

# Butcher (1964), 7 stages, order 6.
A21 = 1 / 3
A32 = 2 / 3
A41, A42, A43 = 1 / 12, 1 / 3, -1 / 12
A51, A52, A53, A54 = -1 / 16, 9 / 8, -3 / 16, -3 / 8
A62, A63, A64, A65 = 9 / 8, -3 / 8, -3 / 4, 1 / 2
A71, A72, A73, A74, A76 = 9 / 44, -9 / 11, 63 / 44, 18 / 11, -16 / 11
B1, B3, B4, B5, B6, B7 = 11 / 120, 27 / 40, 27 / 40, -4 / 15, -4 / 15, 11 / 120

RK6_C = np.array([0.0, 1 / 3, 2 / 3, 1 / 3, 1 / 2, 1 / 2, 1.0])
RK6_A = np.array(
    [
        [0, 0, 0, 0, 0, 0, 0],
        [A21, 0, 0, 0, 0, 0, 0],
        [0, A32, 0, 0, 0, 0, 0],
        [A41, A42, A43, 0, 0, 0, 0],
        [A51, A52, A53, A54, 0, 0, 0],
        [0, A62, A63, A64, A65, 0, 0],
        [A71, A72, A73, A74, 0, A76, 0],
    ]
)
RK6_B = np.array([B1, 0.0, B3, B4, B5, B6, B7])

# Distinct stage abscissae and the node used by each stage.
STAGE_NODES = np.array([0.0, 1 / 3, 1 / 2, 2 / 3, 1.0])
_STAGE_TO_NODE = (0, 1, 3, 1, 2, 2, 4)

MAX_OMEGA_DT = 0.5
WRONSKIAN_TOL = 1e-10
WRONSKIAN_FAIL = 1e-6
_CHUNK_STEPS = 1 << 15


@dataclass(frozen=True)
class ModeGrid:
    """Periodic k_x grid of N_x - 1 modes for a single k_y.

    ``m_center`` shifts the window by whole quanta; it is chosen to match the
    effective field's baseline so that a shifted drive is a relabelling.
    """

    N_x: int
    L_x: float
    L_y: float
    m_y: int = 0
    m_center: int = 0

    def __post_init__(self):
        if int(self.N_x) != self.N_x or self.N_x % 2 or self.N_x < 4:
            raise DomainError(f"N_x must be an even integer >= 4, got {self.N_x!r}")
        if not (self.L_x > 0 and self.L_y > 0):
            raise DomainError("L_x and L_y must be positive")

    @property
    def n_modes(self) -> int:
        return self.N_x - 1

    @property
    def m(self) -> np.ndarray:
        """Offsets from the window center in reduction order 0, 1, -1, 2, -2, ..."""
        half = self.N_x // 2 - 1
        out = [0]
        for j in range(1, half + 1):
            out += [j, -j]
        return np.array(out, dtype=np.int64)

    @property
    def k_rel(self) -> np.ndarray:
        return 2.0 * math.pi * self.m / self.L_x

    @property
    def k_center(self) -> float:
        return 2.0 * math.pi * self.m_center / self.L_x

    @property
    def k_x(self) -> np.ndarray:
        return 2.0 * math.pi * (self.m_center + self.m) / self.L_x

    @property
    def k_y(self) -> float:
        return 2.0 * math.pi * self.m_y / self.L_y

    @property
    def Lambda(self) -> float:
        """Cutoff: the largest |k_x - k_center|."""
        return 2.0 * math.pi * (self.N_x // 2 - 1) / self.L_x

    @property
    def V(self) -> float:
        return self.L_x * self.L_y


def build_mode_grid(N_x, L_x, L_y, m_y=0, m_center=0) -> ModeGrid:
    return ModeGrid(N_x, L_x, L_y, m_y, m_center)


@dataclass
class ModeState:
    """Mode functions ``f`` and their derivatives at time ``t``.

    ``f`` and ``f_dot`` may be scalars or arrays over modes.
    """

    f: np.ndarray
    f_dot: np.ndarray
    t: float
    k_x: np.ndarray
    k_y: float = 0.0

    def wronskian(self):
        """f conj(f_dot) - conj(f) f_dot; equals i/V for vacuum normalization."""
        return self.f * np.conj(self.f_dot) - np.conj(self.f) * self.f_dot


def omega_squared(k_x, k_y, t, pulse: PulseSpec, device: DeviceParams):
    """k_y^2 + (k_x - E_tilde(t))^2 + M(t)^2 in units c1 = 1."""
    E = EffectiveFieldProfile(pulse, device)(t)
    M = MassProfile(pulse)(t)
    q = np.asarray(k_x) - E
    return k_y * k_y + q * q + M * M


def vacuum_init(grid: ModeGrid, M0, t_i, E_tilde_i=None) -> ModeState:
    """Vacuum mode functions f = (2 omega0 V)^-1/2, f_dot = -i omega0 f.

    ``omega0`` is measured from the window center, which must coincide with
    the effective field at ``t_i`` (zero unless the grid is relabelled).
    """
    if E_tilde_i is not None:
        quantum = 2.0 * math.pi / grid.L_x
        if abs(E_tilde_i - grid.k_center) > 1e-9 * quantum:
            raise InitializationError(
                f"E_tilde(t_i) = {E_tilde_i!r} differs from the grid center "
                f"{grid.k_center!r}; vacuum initial conditions need the drive off"
            )
    k_rel = grid.k_rel
    omega0 = np.sqrt(grid.k_y**2 + k_rel * k_rel + M0 * M0)
    f = (1.0 / np.sqrt(2.0 * omega0 * grid.V)).astype(complex)
    return ModeState(f, -1j * omega0 * f, float(t_i), grid.k_x, grid.k_y)


def rk6_step(state: ModeState, dt, omega_sq_fn) -> ModeState:
    """Advance ``(f, f_dot)`` by one step of the sixth-order tableau.

    ``omega_sq_fn(t)`` must return omega^2 for the modes held in ``state``.
    This is the straightforward reference stepper; production runs go
    through :func:`integrate_modes`, which uses the same coefficients.
    """
    if not dt > 0:
        raise StepSizeError("dt must be positive")
    t = state.t
    w2 = [np.asarray(omega_sq_fn(t + c * dt), dtype=float) for c in RK6_C]
    w_max = math.sqrt(max(float(np.max(w)) for w in w2))
    if w_max * dt > MAX_OMEGA_DT:
        raise StepSizeError(f"omega_max * dt = {w_max * dt:.3g} exceeds {MAX_OMEGA_DT}")
    f0 = np.asarray(state.f, dtype=complex)
    g0 = np.asarray(state.f_dot, dtype=complex)
    kf, kg = [], []
    for s in range(7):
        x, v = f0, g0
        for r in range(s):
            a = RK6_A[s, r]
            if a:
                x = x + dt * a * kf[r]
                v = v + dt * a * kg[r]
        kf.append(v)
        kg.append(-w2[s] * x)
    f1 = f0 + dt * sum(b * k for b, k in zip(RK6_B, kf) if b)
    g1 = g0 + dt * sum(b * k for b, k in zip(RK6_B, kg) if b)
    return ModeState(f1, g1, t + dt, state.k_x, state.k_y)


@numba.njit(cache=True, nogil=True)
def _rk6_lanes(kx, ky2, x, v, E, M2, dt, stride, out_x, out_v):  # pragma: no cover - jitted
    n_steps = E.shape[0]
    n_lanes = kx.shape[0]
    row = 0
    for n in range(n_steps):
        e0 = E[n, 0]
        e1 = E[n, 1]
        e2 = E[n, 2]
        e3 = E[n, 3]
        e4 = E[n, 4]
        m0 = ky2 + M2[n, 0]
        m1 = ky2 + M2[n, 1]
        m2 = ky2 + M2[n, 2]
        m3 = ky2 + M2[n, 3]
        m4 = ky2 + M2[n, 4]
        for j in range(n_lanes):
            k = kx[j]
            y = x[j]
            u = v[j]
            # stage nodes: c = 0, 1/3, 2/3, 1/3, 1/2, 1/2, 1
            q = k - e0
            w1 = q * q + m0
            q = k - e1
            w2 = q * q + m1
            q = k - e3
            w3 = q * q + m3
            q = k - e2
            w5 = q * q + m2
            q = k - e4
            w7 = q * q + m4
            kf1 = u
            kg1 = -w1 * y
            kf2 = u + dt * (A21 * kg1)
            kg2 = -w2 * (y + dt * (A21 * kf1))
            kf3 = u + dt * (A32 * kg2)
            kg3 = -w3 * (y + dt * (A32 * kf2))
            kf4 = u + dt * (A41 * kg1 + A42 * kg2 + A43 * kg3)
            kg4 = -w2 * (y + dt * (A41 * kf1 + A42 * kf2 + A43 * kf3))
            kf5 = u + dt * (A51 * kg1 + A52 * kg2 + A53 * kg3 + A54 * kg4)
            kg5 = -w5 * (y + dt * (A51 * kf1 + A52 * kf2 + A53 * kf3 + A54 * kf4))
            kf6 = u + dt * (A62 * kg2 + A63 * kg3 + A64 * kg4 + A65 * kg5)
            kg6 = -w5 * (y + dt * (A62 * kf2 + A63 * kf3 + A64 * kf4 + A65 * kf5))
            kf7 = u + dt * (A71 * kg1 + A72 * kg2 + A73 * kg3 + A74 * kg4 + A76 * kg6)
            kg7 = -w7 * (y + dt * (A71 * kf1 + A72 * kf2 + A73 * kf3 + A74 * kf4 + A76 * kf6))
            x[j] = y + dt * (B1 * kf1 + B3 * kf3 + B4 * kf4 + B5 * kf5 + B6 * kf6 + B7 * kf7)
            v[j] = u + dt * (B1 * kg1 + B3 * kg3 + B4 * kg4 + B5 * kg5 + B6 * kg6 + B7 * kg7)
        if (n + 1) % stride == 0:
            for j in range(n_lanes):
                out_x[row, j] = x[j]
                out_v[row, j] = v[j]
            row += 1


@dataclass
class Trajectory:
    """Sampled mode functions; ``f[i, j]`` is mode j of the grid at ``t[i]``."""

    t: np.ndarray
    f: np.ndarray
    f_dot: np.ndarray
    k_x: np.ndarray
    k_y: float
    V: float
    dt: float
    n_steps: int
    sample_stride: int
    wronskian_drift: float

    @property
    def drift_ok(self) -> bool:
        return self.wronskian_drift <= WRONSKIAN_TOL

    def state(self, i) -> ModeState:
        return ModeState(self.f[i], self.f_dot[i], float(self.t[i]), self.k_x, self.k_y)


def wronskian_drift(f, f_dot, V) -> float:
    """max |W - i/V| / (1/V) over all entries."""
    W = (f * np.conj(f_dot) - np.conj(f) * f_dot) * V
    return float(np.max(np.abs(W - 1j))) if W.size else 0.0


def step_count(t_i, t_f, dt) -> int:
    n = (t_f - t_i) / dt
    n_int = round(n)
    if n_int < 1 or abs(n - n_int) > 1e-9 * max(n, 1.0):
        raise DomainError(f"window length {t_f - t_i} is not a whole number of steps dt={dt}")
    return int(n_int)


def _integrate(k_x, k_rel, k_y, V, pulse, device, dt, sample_stride):
    if not dt > 0:
        raise StepSizeError("dt must be positive")
    if int(sample_stride) != sample_stride or sample_stride < 1:
        raise DomainError("sample_stride must be a positive integer")
    sample_stride = int(sample_stride)
    field = EffectiveFieldProfile(pulse, device)
    mass = MassProfile(pulse)
    t_i = pulse.t_i
    n_steps = step_count(t_i, pulse.t_f, dt)

    k_x = np.asarray(k_x, dtype=float)
    k_rel = np.asarray(k_rel, dtype=float)
    omega0 = np.sqrt(k_y * k_y + k_rel * k_rel + pulse.M0 * pulse.M0)
    f0 = 1.0 / np.sqrt(2.0 * omega0 * V)
    lanes_k = np.repeat(k_x, 2)
    x = np.zeros(lanes_k.size)
    v = np.zeros(lanes_k.size)
    x[0::2] = f0
    v[1::2] = -omega0 * f0

    n_rows = n_steps // sample_stride
    has_tail = n_steps % sample_stride != 0
    n_samples = 1 + n_rows + int(has_tail)
    X = np.empty((n_samples, lanes_k.size))
    Vd = np.empty((n_samples, lanes_k.size))
    X[0], Vd[0] = x, v

    chunk = max(sample_stride, (_CHUNK_STEPS // sample_stride) * sample_stride)
    ky2 = float(k_y * k_y)
    k_lo, k_hi = float(k_x.min()), float(k_x.max())
    row = 1
    for start in range(0, n_steps, chunk):
        ns = min(chunk, n_steps - start)
        t_start = t_i + np.arange(start, start + ns) * dt
        E = np.ascontiguousarray(field.on_steps(t_start, dt, STAGE_NODES))
        M = mass.on_steps(t_start, dt, STAGE_NODES)
        M2 = np.ascontiguousarray(M * M)
        q_max = max(abs(k_hi - E.min()), abs(k_lo - E.max()))
        w_max = math.sqrt(ky2 + q_max * q_max + float(M2.max()))
        if w_max * dt > MAX_OMEGA_DT:
            raise StepSizeError(f"omega_max * dt = {w_max * dt:.3g} exceeds {MAX_OMEGA_DT}")
        rows = ns // sample_stride
        _rk6_lanes(lanes_k, ky2, x, v, E, M2, dt, sample_stride,
                   X[row:row + rows], Vd[row:row + rows])
        row += rows
    if has_tail:
        X[row], Vd[row] = x, v

    steps = np.arange(n_rows + 1) * sample_stride
    if has_tail:
        steps = np.append(steps, n_steps)
    t = t_i + steps * dt
    f = X[:, 0::2] + 1j * X[:, 1::2]
    f_dot = Vd[:, 0::2] + 1j * Vd[:, 1::2]
    drift = wronskian_drift(f, f_dot, V)
    if drift > WRONSKIAN_FAIL:
        raise IntegrationError(
            f"Wronskian drift {drift:.3g} exceeds {WRONSKIAN_FAIL:g} at dt={dt:g}"
        )
    if drift > WRONSKIAN_TOL:
        log.info("Wronskian drift %.3g above %.0e at dt=%g", drift, WRONSKIAN_TOL, dt)
    return Trajectory(t, f, f_dot, k_x, float(k_y), V, dt, n_steps, sample_stride, drift)


def integrate_modes(grid: ModeGrid, pulse: PulseSpec, device: DeviceParams, dt,
                    sample_stride=100) -> Trajectory:
    """Integrate every mode of ``grid`` from vacuum at t_i to t_f.

    Samples are taken every ``sample_stride`` steps plus both endpoints.
    """
    E_i = float(EffectiveFieldProfile(pulse, device)(pulse.t_i))
    vacuum_init(grid, pulse.M0, pulse.t_i, E_i)
    return _integrate(grid.k_x, grid.k_rel, grid.k_y, grid.V, pulse, device, dt,
                      sample_stride)


def integrate_mode(k_x, k_y, pulse: PulseSpec, device: DeviceParams, dt,
                   sample_stride=100) -> Trajectory:
    """Single-mode version of :func:`integrate_modes` (volume from ``device``)."""
    field = EffectiveFieldProfile(pulse, device)
    E_i = float(field(pulse.t_i))
    k_rel = k_x - field.offset
    if abs(E_i - field.offset) > 1e-9 * 2.0 * math.pi / device.L_x:
        raise InitializationError("E_tilde(t_i) must vanish (up to the baseline shift)")
    return _integrate([k_x], [k_rel], k_y, device.volume, pulse, device, dt,
                      sample_stride)
