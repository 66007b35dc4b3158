"""Circuit and material formulas for the driven superconducting ring.

Conventions
-----------
* Gaussian (CGS) electromagnetic units. Inductances are lengths; fluxes are
  measured in units of the flux quantum, so ``flux_quantum = 1`` unless a
  caller says otherwise.
* The dynamics use hbar = c1 = 1 with lengths in microns, where c1 is the
  limiting vortex speed. The speed of light is then ``c_over_c1``.
* The geometric inductance helper ``geometric_inductance`` returns
  ``2 L_y ln(L_y / L_x)`` in the same length unit as its inputs; that unit
  convention is an assumption, the estimate itself is order-of-magnitude.
"""

from __future__ import annotations

import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

from scipy.optimize import brentq

from .errors import AboveDepairingError, DomainError, SingularCircuitError

ALPHA_EM = 1.0 / 137.0
# 1 um / c1 in picoseconds for c/c1 = 7.5; bookkeeping only.
TIME_UNIT_PS = 0.025
DEFAULT_C_OVER_C1 = 7.5
# Maximum of u^2 (1 - u), reached at u = 2/3.
DEPAIRING_J2 = 4.0 / 27.0


def _require_positive(**values):
    for name, value in values.items():
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class DeviceParams:
    """Film geometry and material lengths, all in microns.

    ``lambda_bar`` is derived: ``lambda_bar**2 = suppression_factor * lambda0**2``.
    Defaults are the toroidal film used throughout the package.
    """

    L_x: float = 1.0
    L_y: float = 10.0
    d: float = 0.004
    xi: float = 0.02
    lambda0: float = 0.15
    suppression_factor: float = 25.0
    c_over_c1: float = DEFAULT_C_OVER_C1
    alpha_em: float = ALPHA_EM
    lambda_bar: float = field(init=False)

    def __post_init__(self):
        _require_positive(
            L_x=self.L_x,
            L_y=self.L_y,
            d=self.d,
            xi=self.xi,
            lambda0=self.lambda0,
            suppression_factor=self.suppression_factor,
            c_over_c1=self.c_over_c1,
            alpha_em=self.alpha_em,
        )
        if self.L_x > self.L_y:
            raise DomainError(f"need L_x <= L_y, got L_x={self.L_x}, L_y={self.L_y}")
        object.__setattr__(
            self, "lambda_bar", math.sqrt(self.suppression_factor) * self.lambda0
        )

    @property
    def volume(self) -> float:
        """Film area L_x * L_y (the two-dimensional volume)."""
        return self.L_x * self.L_y

    @property
    def field_prefactor(self) -> float:
        """c d / (8 alpha_EM lambda_bar^2 xi) in units hbar = c1 = 1.

        Converts A'/A_c into a driving force (with a minus sign) and its time
        integral into the effective field shift of k_x.
        """
        return self.c_over_c1 * self.d / (
            8.0 * self.alpha_em * self.lambda_bar**2 * self.xi
        )


@dataclass(frozen=True)
class CircuitParams:
    """Inductances of the double-arm device (Gaussian units, lengths).

    ``L1 = L11 - L12`` and ``L2 = L12`` are the effective geometric
    inductances; ``L_tot = ell1 + L2``.
    """

    ell1: float
    L12: float
    ell2: float = 0.0
    L11: float = 0.0
    L22: float = 0.0
    ell: float | None = None
    L0: float | None = None
    flux_quantum: float = 1.0

    def __post_init__(self):
        for name in ("ell1", "L12", "ell2", "L11", "L22"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")
        for name in ("ell", "L0"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise DomainError(f"{name} must be non-negative")

    @property
    def L1(self) -> float:
        return self.L11 - self.L12

    @property
    def L2(self) -> float:
        return self.L12

    @property
    def L_tot(self) -> float:
        return self.ell1 + self.L2


@dataclass(frozen=True)
class FrictionInputs:
    """Inputs of the core-fermion friction action.

    ``k_F`` is an inverse length and ``L_x``, ``d`` lengths in the reciprocal
    unit. ``omega0_ratio`` is 2 omega_0 / (k_F v_F). ``v_F`` cancels from the
    action and only needs to be positive.
    """

    k_F: float
    omega0_ratio: float
    L_x: float
    d: float
    v_F: float = 1.0

    def __post_init__(self):
        _require_positive(
            k_F=self.k_F,
            omega0_ratio=self.omega0_ratio,
            L_x=self.L_x,
            d=self.d,
            v_F=self.v_F,
        )


def kinetic_inductance(lambda_bar, L_y, S):
    """Kinetic inductance 4 pi lambda_bar^2 L_y / S of a ring of cross-section S."""
    _require_positive(lambda_bar=lambda_bar, L_y=L_y, S=S)
    return 4.0 * math.pi * lambda_bar**2 * L_y / S


def geometric_inductance(L_y, L_x):
    """Rough ordinary inductance of a single ring, 2 L_y ln(L_y / L_x)."""
    _require_positive(L_y=L_y, L_x=L_x)
    return 2.0 * L_y * math.log(L_y / L_x)


def supercurrent(phi_ext, n, ell, L0, c=DEFAULT_C_OVER_C1, flux_quantum=1.0):
    """London current of a ring threaded by external flux ``phi_ext``.

    Returns ``-c (phi_ext - n flux_quantum) / (ell + L0)``. For ``ell >> L0``
    the external flux only fixes the product ``ell * I``.
    """
    total = ell + L0
    if total == 0:
        raise SingularCircuitError("ell + L0 vanishes")
    return -c * (phi_ext - n * flux_quantum) / total


def crossover_area(lambda_bar, L_y, L_x, unit_log=False):
    """Cross-section below which the kinetic inductance dominates.

    ``2 pi lambda_bar^2 / ln(L_y / L_x)``; with ``unit_log=True`` the
    logarithm is taken to be 1. The area comes out in the square of the
    length unit of ``lambda_bar``.
    """
    _require_positive(lambda_bar=lambda_bar, L_y=L_y, L_x=L_x)
    if unit_log:
        log_factor = 1.0
    else:
        if L_y <= L_x:
            raise DomainError("crossover_area needs L_y > L_x")
        log_factor = math.log(L_y / L_x)
    return 2.0 * math.pi * lambda_bar**2 / log_factor


def arm_currents(I, phi_ext, n, circuit: CircuitParams, c=DEFAULT_C_OVER_C1):
    """Currents (I1, I2) in the two arms of the double-arm device.

    I1 carries ``L2 I - c (phi_ext - n Phi0)`` and I2 ``ell1 I + c (...)``,
    both over ``L_tot``; they always add up to ``I``.
    """
    L_tot = circuit.L_tot
    if L_tot <= 0:
        raise SingularCircuitError("L_tot = ell1 + L2 must be positive")
    flux_term = c * (phi_ext - n * circuit.flux_quantum)
    I1 = (circuit.L2 * I - flux_term) / L_tot
    I2 = (circuit.ell1 * I + flux_term) / L_tot
    return I1, I2


class EnergyBias(NamedTuple):
    delta_E: float
    force: float
    below_nucleation: bool | None


def energy_bias(delta_phi_ext, L_tot, L_x, M=None, flux_quantum=1.0):
    """Energy splitting of the n = 0, 1 minima and the resulting force.

    ``delta_phi_ext`` is the deviation from half a flux quantum. If the pair
    production energy scale ``M`` is given, ``below_nucleation`` reports
    whether ``|delta_E| <= 2 M``; exceeding it only warns, since the
    nucleation regime may be explored on purpose.
    """
    if L_tot <= 0:
        raise SingularCircuitError("L_tot must be positive")
    _require_positive(L_x=L_x)
    delta_E = flux_quantum * delta_phi_ext / L_tot
    force = delta_E / L_x
    safe = None
    if M is not None:
        safe = abs(delta_E) <= 2.0 * M
        if not safe:
            warnings.warn(
                f"|delta_E| = {abs(delta_E):.3g} exceeds 2M = {2 * M:.3g}; "
                "real vortex pairs can nucleate",
                RuntimeWarning,
                stacklevel=2,
            )
    return EnergyBias(delta_E, force, safe)


def friction_action(inputs: FrictionInputs) -> float:
    """Euclidean action pi omega0 tau_el n_e L_x^2 d from core-fermion friction."""
    k_F, v_F = inputs.k_F, inputs.v_F
    omega0 = 0.5 * inputs.omega0_ratio * k_F * v_F
    tau_el = 2.0 * inputs.d / v_F
    n_e = k_F**3 / (3.0 * math.pi**2)
    return math.pi * omega0 * tau_el * n_e * inputs.L_x**2 * inputs.d


def order_parameter_suppression(j_norm) -> float:
    """Stable Ginzburg-Landau branch u = |psi|^2/|psi_0|^2 at normalized current.

    Solves ``u^2 (1 - u) = j_norm^2`` for the largest root, which lies in
    [2/3, 1] and connects to u = 1 at zero current.
    """
    if j_norm < 0:
        raise DomainError("j_norm must be non-negative")
    j2 = j_norm * j_norm
    if j2 > DEPAIRING_J2 * (1 + 4 * sys.float_info.epsilon):
        raise AboveDepairingError(
            f"j_norm^2 = {j2:.6g} exceeds the depairing value 4/27"
        )
    if j2 == 0:
        return 1.0

    def residual(u):
        return u * u * (1.0 - u) - j2

    lo = 2.0 / 3.0
    if residual(lo) <= 0:
        # at (or rounding-level below) the depairing point
        return lo
    return brentq(residual, lo, 1.0, xtol=1e-15, rtol=1e-12, maxiter=200)
