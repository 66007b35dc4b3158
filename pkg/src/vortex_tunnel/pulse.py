"""Time-dependent drive: biasing pulse, effective field and mass profile.

All times are in units of 1 um / c1 and the effective field is a shift of
k_x, so it carries units of inverse microns. The force appears only through
the effective field, i.e. the field equation is used in the frame where the
potential -F(t) x has been absorbed into the vector potential.

Sign convention: ``F = -prefactor * A'/A_c`` and
``E_tilde(t) = prefactor * int_{t_i}^t A'/A_c``. Flipping the sign of ``C``
flips the transport.

Tabulated drives are linearly interpolated, so their effective field is the
exact integral of that interpolant (piecewise quadratic). The dE/dt term of
the effective Maxwell equation is neglected for all shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .device import DeviceParams
from .errors import DomainError, ProfileError, QuantizationError

GAUSSIAN_DERIVATIVE = "gaussian_derivative"
TABULATED = "tabulated"
SHAPES = (GAUSSIAN_DERIVATIVE, TABULATED)

# Pulse must have decayed by exp(-25) at the window edges.
MIN_EDGE_WIDTHS = 5.0
QUANTIZATION_TOL = 1e-6


def load_table(path) -> np.ndarray:
    """Read a two-column ``t value`` text table (whitespace or comma separated)."""
    text = Path(path).read_text().replace(",", " ")
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ProfileError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
        rows.append((float(parts[0]), float(parts[1])))
    if len(rows) < 2:
        raise ProfileError(f"{path}: need at least two rows")
    return np.array(rows, dtype=float)


def _as_table(samples, name, allow_jumps=False) -> np.ndarray:
    table = np.array(samples, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 2:
        raise ProfileError(f"{name} must be an (n >= 2, 2) table of (t, value)")
    if not np.all(np.isfinite(table)):
        raise ProfileError(f"{name} contains non-finite entries")
    dt = np.diff(table[:, 0])
    if allow_jumps:
        if np.any(dt < 0):
            raise ProfileError(f"{name}: t must be non-decreasing")
        if np.any((dt[1:] == 0) & (dt[:-1] == 0)):
            raise ProfileError(f"{name}: at most two rows may share a time")
    elif np.any(dt <= 0):
        raise ProfileError(f"{name}: t must be strictly increasing")
    table.setflags(write=False)
    return table


@dataclass(frozen=True, eq=False)
class PulseSpec:
    """Drive profile and integration window.

    ``shape`` is ``"gaussian_derivative"`` (A'/A_c = C (t/t0) exp(-(t/t0)^2))
    or ``"tabulated"``, in which case ``samples`` holds (t, A'/A_c) rows
    covering the window. ``mass_samples`` optionally replaces the constant
    mass ``M0`` by a piecewise linear M(t); two rows with the same time
    encode a jump. ``baseline_quanta`` adds ``2 pi n / L_x`` to the effective
    field at all times, a pure relabelling of the k_x grid.
    """

    C: float = 0.005
    t0: float = 80.0
    t_i: float = -400.0
    t_f: float = 400.0
    M0: float = 5.0
    shape: str = GAUSSIAN_DERIVATIVE
    samples: np.ndarray | None = field(default=None, repr=False)
    mass_samples: np.ndarray | None = field(default=None, repr=False)
    M_prime: float | None = None
    baseline_quanta: int = 0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError(f"unknown pulse shape {self.shape!r}; expected one of {SHAPES}")
        if not self.t_i < 0 < self.t_f:
            raise DomainError(f"window must satisfy t_i < 0 < t_f, got [{self.t_i}, {self.t_f}]")
        if not self.M0 > 0:
            raise DomainError("M0 must be positive")
        if self.M_prime is not None and not self.M_prime > 0:
            raise DomainError("M_prime must be positive when set")
        if int(self.baseline_quanta) != self.baseline_quanta:
            raise DomainError("baseline_quanta must be an integer")
        if self.shape == GAUSSIAN_DERIVATIVE:
            if not self.t0 > 0:
                raise DomainError("t0 must be positive")
            edge = MIN_EDGE_WIDTHS * self.t0
            if -self.t_i < edge or self.t_f < edge:
                raise DomainError(
                    f"window [{self.t_i}, {self.t_f}] must extend at least "
                    f"{MIN_EDGE_WIDTHS:g} t0 = {edge:g} on both sides"
                )
        else:
            if self.samples is None:
                raise DomainError("tabulated shape needs samples")
            table = _as_table(self.samples, "samples")
            if table[0, 0] > self.t_i or table[-1, 0] < self.t_f:
                raise ProfileError("pulse samples must cover the integration window")
            object.__setattr__(self, "samples", table)
        if self.mass_samples is not None:
            table = _as_table(self.mass_samples, "mass_samples", allow_jumps=True)
            if table[0, 0] > self.t_i or table[-1, 0] < self.t_f:
                raise ProfileError("mass samples must cover the integration window")
            if np.any(table[:, 1] <= 0):
                raise ProfileError("mass profile must stay positive")
            object.__setattr__(self, "mass_samples", table)
            m_start = float(_PiecewisePolynomial.linear(table)(self.t_i))
            if not math.isclose(m_start, self.M0, rel_tol=1e-12, abs_tol=0.0):
                raise ProfileError(
                    f"tabulated mass at t_i is {m_start!r}, inconsistent with M0 = {self.M0!r}"
                )

    @property
    def duration(self) -> float:
        return self.t_f - self.t_i

    def in_window(self, t) -> bool:
        slack = 1e-9 * self.duration
        t = np.asarray(t)
        return bool(np.all((t >= self.t_i - slack) & (t <= self.t_f + slack)))


class _PiecewisePolynomial:
    """Piecewise polynomial of degree <= 2 in the local variable t - start.

    Evaluation at a knot is right-continuous. :meth:`on_steps` instead picks
    the segment containing each step's midpoint, so a jump that falls on a
    step boundary is seen exactly by every stage of that step.
    """

    def __init__(self, starts, coeffs):
        self.starts = np.asarray(starts, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=float)

    @classmethod
    def linear(cls, table):
        t, y = table[:, 0], table[:, 1]
        h = np.diff(t)
        keep = h > 0
        slope = np.zeros_like(h)
        slope[keep] = np.diff(y)[keep] / h[keep]
        coeffs = np.stack([y[:-1], slope, np.zeros_like(h)], axis=1)
        return cls(t[:-1][keep], coeffs[keep])

    @classmethod
    def linear_integral(cls, table, t_start):
        """Exact running integral from ``t_start`` of the linear interpolant."""
        lin = cls.linear(table)
        starts, c = lin.starts, lin.coeffs
        ends = np.append(starts[1:], table[-1, 0])
        h = ends - starts
        seg_int = c[:, 0] * h + 0.5 * c[:, 1] * h**2
        base = np.concatenate([[0.0], np.cumsum(seg_int)[:-1]])
        coeffs = np.stack([base, c[:, 0], 0.5 * c[:, 1]], axis=1)
        prof = cls(starts, coeffs)
        prof.coeffs[:, 0] -= prof(t_start)
        return prof

    def _eval(self, seg, t):
        tau = t - self.starts[seg]
        c = self.coeffs[seg]
        return c[..., 0] + tau * (c[..., 1] + tau * c[..., 2])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        seg = np.clip(np.searchsorted(self.starts, t, side="right") - 1, 0, len(self.starts) - 1)
        return self._eval(seg, t)

    def on_steps(self, t_start, dt, nodes):
        t_start = np.asarray(t_start, dtype=float)
        seg = np.searchsorted(self.starts, t_start + 0.5 * dt, side="right") - 1
        seg = np.clip(seg, 0, len(self.starts) - 1)[:, None]
        return self._eval(seg, t_start[:, None] + dt * np.asarray(nodes)[None, :])


class EffectiveFieldProfile:
    """E_tilde(t) = prefactor * int_{t_i}^t A'/A_c dt' + 2 pi n / L_x.

    The gaussian-derivative pulse uses the closed-form integral
    (C t0 / 2) [exp(-(t_i/t0)^2) - exp(-(t/t0)^2)].
    """

    def __init__(self, spec: PulseSpec, device: DeviceParams):
        self.spec = spec
        self.prefactor = device.field_prefactor
        self.offset = 2.0 * math.pi * spec.baseline_quanta / device.L_x
        if spec.shape == TABULATED:
            self._table = _PiecewisePolynomial.linear_integral(spec.samples, spec.t_i)
        else:
            self._table = None
            self._edge = math.exp(-((spec.t_i / spec.t0) ** 2))

    def integral(self, t):
        """int_{t_i}^t A'/A_c dt' (no prefactor)."""
        if self._table is not None:
            return self._table(t)
        s = self.spec
        return 0.5 * s.C * s.t0 * (self._edge - np.exp(-((np.asarray(t) / s.t0) ** 2)))

    def __call__(self, t):
        return self.prefactor * self.integral(t) + self.offset

    def rate(self, t):
        """dE_tilde/dt = prefactor * A'/A_c."""
        return self.prefactor * vector_potential_ratio(t, self.spec)

    def on_steps(self, t_start, dt, nodes):
        """Values at ``t_start[:, None] + dt * nodes`` for each step."""
        if self._table is not None:
            return self.prefactor * self._table.on_steps(t_start, dt, nodes) + self.offset
        t = np.asarray(t_start)[:, None] + dt * np.asarray(nodes)[None, :]
        return self(t)


class MassProfile:
    """Constant M0, or the piecewise linear table ``spec.mass_samples``."""

    def __init__(self, spec: PulseSpec):
        self.M0 = spec.M0
        self._table = None
        if spec.mass_samples is not None:
            self._table = _PiecewisePolynomial.linear(spec.mass_samples)

    @property
    def constant(self) -> bool:
        return self._table is None

    def __call__(self, t):
        if self._table is None:
            return np.full(np.shape(t), self.M0)
        return self._table(t)

    def on_steps(self, t_start, dt, nodes):
        if self._table is None:
            return np.full((len(t_start), len(nodes)), self.M0)
        return self._table.on_steps(t_start, dt, nodes)


def vector_potential_ratio(t, spec: PulseSpec):
    """A'/A_c at time(s) ``t``."""
    t = np.asarray(t, dtype=float)
    if spec.shape == TABULATED:
        return np.interp(t, spec.samples[:, 0], spec.samples[:, 1])
    x = t / spec.t0
    return spec.C * x * np.exp(-x * x)


def driving_force_from_potential(a_ratio, device: DeviceParams):
    """F = -(hbar c d / 8 alpha_EM lambda_bar^2 xi) A'/A_c, hbar = c1 = 1."""
    return -device.field_prefactor * np.asarray(a_ratio, dtype=float)


def driving_force(t, spec: PulseSpec, device: DeviceParams):
    return driving_force_from_potential(vector_potential_ratio(t, spec), device)


def effective_field(t, spec: PulseSpec, device: DeviceParams):
    """E_tilde at time(s) ``t`` inside the integration window."""
    if not spec.in_window(t):
        raise DomainError(f"t outside the window [{spec.t_i}, {spec.t_f}]")
    return EffectiveFieldProfile(spec, device)(t)


def mass_profile(t, spec: PulseSpec):
    """Vortex pair-production frequency M(t)."""
    return MassProfile(spec)(t)


def force_quanta(spec: PulseSpec, device: DeviceParams) -> float:
    """int F dt over the window in units of 2 pi hbar / L_x."""
    profile = EffectiveFieldProfile(spec, device)
    impulse = -profile.prefactor * float(profile.integral(spec.t_f))
    return impulse * device.L_x / (2.0 * math.pi)


def check_quantization(spec: PulseSpec, device: DeviceParams, tol=QUANTIZATION_TOL) -> int:
    """Integer n' with int F dt = 2 pi n' / L_x, or raise if there is none.

    The gaussian-derivative pulse is odd in t and always gives n' = 0.
    """
    x = force_quanta(spec, device)
    n_prime = round(x)
    if abs(x - n_prime) >= tol:
        raise QuantizationError(
            f"int F dt = {x:.9g} quanta of 2 pi/L_x; the transformed problem is "
            "not equivalent to the original one"
        )
    return int(n_prime)
