"""CSV and plot-script emission.

Numbers are written with ``repr`` (shortest round-trip form, ``.`` as the
decimal separator, independent of locale) and lines end in ``\\n``, so
identical results give byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

from .errors import OutputError
from .observables import SweepResult

TIMESERIES_HEADER = ("t", "E_tilde", "q_reg", "N_total")
MODES_HEADER = ("t", "k_x", "abs_f2", "n_k")
SWEEP_HEADER = ("M0", "Q", "N_final", "dt_used", "wronskian_drift")
FIT_HEADER = ("amplitude", "rate", "residual")
CALIBRATION_HEADER = ("M_cal", "uv_coeff")


def fmt(x) -> str:
    return repr(float(x))


def mass_tag(M0) -> str:
    return f"{float(M0):g}"


def timeseries_name(M0, m_y) -> str:
    return f"timeseries_M{mass_tag(M0)}_ky{m_y}.csv"


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _timeseries_rows(series):
    return zip(series.t, series.E_tilde, series.q_reg, series.N_total)


def _mode_rows(series):
    for i, t in enumerate(series.t):
        for j, k in enumerate(series.k_x):
            yield (t, k, series.abs_f2[i, j], series.n_k[i, j])


TRANSPORT_SCRIPT = '''"""Total vortex transport versus M0 with the exponential fit (log scale)."""
import csv
import math
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).parent
with open(here / "sweep.csv") as fh:
    rows = list(csv.DictReader(fh))
M0 = [float(r["M0"]) for r in rows]
Q = [abs(float(r["Q"])) for r in rows]
fig, ax = plt.subplots(figsize=(4.5, 3.5))
ax.semilogy(M0, Q, "o", label="|Q|")
fit = here / "fit.csv"
if fit.exists():
    with open(fit) as fh:
        p = next(csv.DictReader(fh))
    a, rate = abs(float(p["amplitude"])), float(p["rate"])
    xs = [min(M0) + i * (max(M0) - min(M0)) / 100 for i in range(101)]
    ax.semilogy(xs, [a * math.exp(-rate * x) for x in xs], "-",
                label=f"fit, rate = {rate:.3f}")
ax.set_xlabel("M0 [c1/um]")
ax.set_ylabel("Q (k_y = 0)")
ax.legend()
fig.tight_layout()
fig.savefig(here / "transport.png", dpi=150)
'''

OCCUPATION_SCRIPT = '''"""Total occupation number versus time."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).parent
files = sorted(here.glob("timeseries_M*_ky*.csv"))
fig, ax = plt.subplots(figsize=(4.5, 3.5))
for path in files:
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    t = [float(r["t"]) for r in rows]
    N = [float(r["N_total"]) for r in rows]
    ax.plot(t, N, label=path.stem.replace("timeseries_", ""))
ax.set_xlabel("t [um/c1]")
ax.set_ylabel("N(k_y, t)")
ax.legend(fontsize="small")
fig.tight_layout()
fig.savefig(here / "occupation.png", dpi=150)
'''


def emit_outputs(runs, config, sweep: SweepResult | None = None, out_dir=None,
                 emit_plots=None, calibration=None):
    """Write the CSV files (and optionally plot scripts) for ``runs``.

    Returns the list of written paths. Every file is attempted; failures are
    collected and raised together as :class:`OutputError`.
    """
    out = Path(out_dir if out_dir is not None else config.output_dir)
    emit_plots = config.emit_plot_scripts if emit_plots is None else emit_plots
    files = {}
    for run in runs:
        files[timeseries_name(run.M0, run.m_y)] = csv_text(
            TIMESERIES_HEADER, _timeseries_rows(run.series)
        )
        if config.emit_per_mode and run.series.has_per_mode:
            files[f"modes_M{mass_tag(run.M0)}_ky{run.m_y}.csv"] = csv_text(
                MODES_HEADER, _mode_rows(run.series)
            )
    if sweep is not None:
        files["sweep.csv"] = csv_text(
            SWEEP_HEADER,
            [(e.M0, e.Q, e.N_final, e.dt_used, e.wronskian_drift) for e in sweep.entries],
        )
        if sweep.has_fit:
            files["fit.csv"] = csv_text(
                FIT_HEADER, [(sweep.fit_amplitude, sweep.fit_rate, sweep.fit_residual)]
            )
    if calibration is not None:
        files["calibration.csv"] = csv_text(CALIBRATION_HEADER, [calibration])
    if emit_plots:
        files["plot_transport.py"] = TRANSPORT_SCRIPT
        files["plot_occupation.py"] = OCCUPATION_SCRIPT

    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError({str(out): exc.strerror or str(exc)}) from exc
    written, failures = [], {}
    for name, text in files.items():
        path = out / name
        try:
            with open(path, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            failures[str(path)] = exc.strerror or str(exc)
        else:
            written.append(path)
    if failures:
        raise OutputError(failures)
    return written
