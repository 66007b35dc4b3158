"""Induced vortex tunneling across a toroidal superconducting film.

The vortex field is expanded in periodic modes whose mode functions are
integrated under a biasing pulse; the regularized vortex current, total
transport and residual occupation follow from them. :mod:`.device` holds the
circuit formulas that set the drive parameters.
"""

from .config import RunConfig, load_config
from .device import CircuitParams, DeviceParams, FrictionInputs
from .dynamics import ModeGrid, ModeState, build_mode_grid, integrate_mode, integrate_modes
from .observables import SweepResult, TimeSeriesRecord
from .pulse import PulseSpec
from .runner import calibrate, fit_exponential, run_single, run_sweep

__all__ = [
    "CircuitParams",
    "DeviceParams",
    "FrictionInputs",
    "ModeGrid",
    "ModeState",
    "PulseSpec",
    "RunConfig",
    "SweepResult",
    "TimeSeriesRecord",
    "build_mode_grid",
    "calibrate",
    "fit_exponential",
    "integrate_mode",
    "integrate_modes",
    "load_config",
    "run_single",
    "run_sweep",
]

__version__ = "0.1.0"
