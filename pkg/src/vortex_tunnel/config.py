"""Run configuration: flat ``section.key = value`` files (TOML dotted keys).

An empty file yields the defaults of the toroidal-film study. Unknown keys
are rejected, and every validation message names the offending key.

Example::

    grid.N_x = 32
    grid.m_y = [0]
    pulse.C = 0.005
    pulse.t0 = 80
    sweep.M0 = [3, 4, 5, 6, 7]
    calibration.uv_coeff = "calibrate"
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .device import DeviceParams
from .errors import ConfigError, VortexTunnelError
from .pulse import GAUSSIAN_DERIVATIVE, MIN_EDGE_WIDTHS, SHAPES, TABULATED, PulseSpec, load_table

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CALIBRATE = "calibrate"

# key -> (kind, default); kinds: float, int, bool, str, int_list, float_list, coeff
_SCHEMA = {
    "device.L_x": ("float", 1.0),
    "device.L_y": ("float", 10.0),
    "device.d": ("float", 0.004),
    "device.xi": ("float", 0.02),
    "device.lambda0": ("float", 0.15),
    "device.suppression_factor": ("float", 25.0),
    "device.c_over_c1": ("float", 7.5),
    "device.alpha_em": ("float", 1.0 / 137.0),
    "pulse.C": ("float", 0.005),
    "pulse.t0": ("float", 80.0),
    "pulse.t_i": ("float", -400.0),
    "pulse.t_f": ("float", 400.0),
    "pulse.M0": ("float", 5.0),
    "pulse.shape": ("str", GAUSSIAN_DERIVATIVE),
    "pulse.samples_file": ("str", None),
    "pulse.mass_file": ("str", None),
    "pulse.M_prime": ("float", None),
    "pulse.baseline_quanta": ("int", 0),
    "grid.N_x": ("int", 32),
    "grid.m_y": ("int_list", (0,)),
    "integrator.dt": ("float", 1e-3),
    "integrator.sample_stride": ("int", 100),
    "integrator.convergence_tol": ("float", 1e-6),
    "integrator.max_halvings": ("int", 6),
    "integrator.wronskian_tol": ("float", 1e-10),
    "sweep.M0": ("float_list", (3.0, 4.0, 5.0, 6.0, 7.0)),
    "calibration.uv_coeff": ("coeff", 0.0215),
    "calibration.M_cal": ("float", 10.0),
    "output.directory": ("str", "out"),
    "output.emit_per_mode": ("bool", False),
    "output.emit_plot_scripts": ("bool", False),
}


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Everything needed to reproduce a run or sweep. All runs are deterministic."""

    device: DeviceParams = field(default_factory=DeviceParams)
    pulse: PulseSpec = field(default_factory=PulseSpec)
    N_x: int = 32
    m_y: tuple = (0,)
    dt: float = 1e-3
    sample_stride: int = 100
    convergence_tol: float = 1e-6
    max_halvings: int = 6
    wronskian_tol: float = 1e-10
    sweep: tuple = (3.0, 4.0, 5.0, 6.0, 7.0)
    uv_coeff: float | str = 0.0215
    M_cal: float = 10.0
    output_dir: str = "out"
    emit_per_mode: bool = False
    emit_plot_scripts: bool = False

    def __post_init__(self):
        _validate(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    @property
    def calibrate(self) -> bool:
        return self.uv_coeff == CALIBRATE


def _fail(key, constraint):
    raise ConfigError(f"{key}: {constraint}")


def _validate(cfg: RunConfig):
    if cfg.N_x % 2 or cfg.N_x < 4:
        _fail("grid.N_x", f"must be an even integer >= 4, got {cfg.N_x}")
    if not cfg.m_y:
        _fail("grid.m_y", "needs at least one entry")
    if len(set(cfg.m_y)) != len(cfg.m_y):
        _fail("grid.m_y", "duplicate entries")
    if not cfg.dt > 0:
        _fail("integrator.dt", "must be positive")
    if cfg.sample_stride < 1:
        _fail("integrator.sample_stride", "must be >= 1")
    if not cfg.convergence_tol > 0:
        _fail("integrator.convergence_tol", "must be positive")
    if not 0 <= cfg.max_halvings <= 12:
        _fail("integrator.max_halvings", "must be in [0, 12]")
    if not cfg.wronskian_tol > 0:
        _fail("integrator.wronskian_tol", "must be positive")
    steps = (cfg.pulse.t_f - cfg.pulse.t_i) / cfg.dt
    if abs(steps - round(steps)) > 1e-9 * steps:
        _fail("integrator.dt", "must divide t_f - t_i into a whole number of steps")
    if not cfg.sweep:
        _fail("sweep.M0", "needs at least one value")
    if any(not m > 0 for m in cfg.sweep):
        _fail("sweep.M0", "values must be positive")
    if len(set(cfg.sweep)) != len(cfg.sweep):
        _fail("sweep.M0", "duplicate values")
    if cfg.uv_coeff != CALIBRATE and not isinstance(cfg.uv_coeff, (int, float)):
        _fail("calibration.uv_coeff", f"must be a number or {CALIBRATE!r}")
    if not cfg.M_cal > 0:
        _fail("calibration.M_cal", "must be positive")


def _flatten(mapping, prefix=""):
    flat = {}
    for key, value in mapping.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


def _coerce(key, kind, value):
    is_num = isinstance(value, (int, float)) and not isinstance(value, bool)
    if kind == "float":
        if not is_num:
            _fail(key, f"must be a number, got {value!r}")
        return float(value)
    if kind == "int":
        if not isinstance(value, int) or isinstance(value, bool):
            _fail(key, f"must be an integer, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            _fail(key, f"must be true or false, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            _fail(key, f"must be a string, got {value!r}")
        return value
    if kind in ("int_list", "float_list"):
        items = value if isinstance(value, list) else [value]
        sub = "int" if kind == "int_list" else "float"
        return tuple(_coerce(key, sub, v) for v in items)
    if kind == "coeff":
        if value == CALIBRATE:
            return CALIBRATE
        return _coerce(key, "float", value)
    raise AssertionError(kind)


def config_from_mapping(mapping, base_dir=".") -> RunConfig:
    """Build a validated :class:`RunConfig` from a (possibly nested) mapping."""
    flat = _flatten(mapping)
    unknown = sorted(set(flat) - set(_SCHEMA))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    v = {key: default for key, (_, default) in _SCHEMA.items()}
    for key, value in flat.items():
        v[key] = _coerce(key, _SCHEMA[key][0], value)

    def resolve(path):
        p = Path(path)
        return p if p.is_absolute() else Path(base_dir) / p

    try:
        device = DeviceParams(
            L_x=v["device.L_x"],
            L_y=v["device.L_y"],
            d=v["device.d"],
            xi=v["device.xi"],
            lambda0=v["device.lambda0"],
            suppression_factor=v["device.suppression_factor"],
            c_over_c1=v["device.c_over_c1"],
            alpha_em=v["device.alpha_em"],
        )
    except VortexTunnelError as exc:
        raise ConfigError(f"device: {exc}") from exc

    shape = v["pulse.shape"]
    if shape not in SHAPES:
        _fail("pulse.shape", f"must be one of {SHAPES}")
    t_i, t_f, t0 = v["pulse.t_i"], v["pulse.t_f"], v["pulse.t0"]
    if not t_i < 0:
        _fail("pulse.t_i", "must be negative")
    if not t_f > 0:
        _fail("pulse.t_f", "must be positive")
    if shape == GAUSSIAN_DERIVATIVE:
        if not t0 > 0:
            _fail("pulse.t0", "must be positive")
        if -t_i < MIN_EDGE_WIDTHS * t0:
            _fail("pulse.t_i", f"|t_i| must be >= {MIN_EDGE_WIDTHS:g} t0 = {MIN_EDGE_WIDTHS * t0:g}")
        if t_f < MIN_EDGE_WIDTHS * t0:
            _fail("pulse.t_f", f"t_f must be >= {MIN_EDGE_WIDTHS:g} t0 = {MIN_EDGE_WIDTHS * t0:g}")
    samples = None
    if shape == TABULATED:
        if v["pulse.samples_file"] is None:
            _fail("pulse.samples_file", "required for the tabulated shape")
    if v["pulse.samples_file"] is not None:
        samples = _read_table("pulse.samples_file", resolve(v["pulse.samples_file"]))
    mass = None
    if v["pulse.mass_file"] is not None:
        mass = _read_table("pulse.mass_file", resolve(v["pulse.mass_file"]))
    try:
        pulse = PulseSpec(
            C=v["pulse.C"],
            t0=t0,
            t_i=t_i,
            t_f=t_f,
            M0=v["pulse.M0"],
            shape=shape,
            samples=samples if shape == TABULATED else None,
            mass_samples=mass,
            M_prime=v["pulse.M_prime"],
            baseline_quanta=v["pulse.baseline_quanta"],
        )
    except VortexTunnelError as exc:
        raise ConfigError(f"pulse: {exc}") from exc

    return RunConfig(
        device=device,
        pulse=pulse,
        N_x=v["grid.N_x"],
        m_y=v["grid.m_y"],
        dt=v["integrator.dt"],
        sample_stride=v["integrator.sample_stride"],
        convergence_tol=v["integrator.convergence_tol"],
        max_halvings=v["integrator.max_halvings"],
        wronskian_tol=v["integrator.wronskian_tol"],
        sweep=v["sweep.M0"],
        uv_coeff=v["calibration.uv_coeff"],
        M_cal=v["calibration.M_cal"],
        output_dir=v["output.directory"],
        emit_per_mode=v["output.emit_per_mode"],
        emit_plot_scripts=v["output.emit_plot_scripts"],
    )


def _read_table(key, path):
    try:
        return load_table(path)
    except OSError as exc:
        raise ConfigError(f"{key}: cannot read {path}: {exc.strerror}") from exc
    except VortexTunnelError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def load_config(path) -> RunConfig:
    """Parse and validate a configuration file."""
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = tomllib.loads(raw)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: parse error: {exc}") from exc
    return config_from_mapping(data, base_dir=path.parent)
