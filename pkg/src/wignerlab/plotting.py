"""SVG plots drawn from ``results.csv`` rows.

Plots are a view on the CSV only; nothing here feeds back into a result.
Output is deterministic: fonts are kept as text, the SVG id salt is fixed
and no creation date is embedded.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bounds import concentration_bound  # noqa: E402
from .mc import fit_scaling  # noqa: E402

__all__ = ["PlotError", "GUIDE_SLOPES", "load_rows", "plot_scaling", "plot_concentration", "plot_results"]

# reference decay exponents drawn as guides on the scaling plot
GUIDE_SLOPES = {"-6/11": 6.0 / 11.0, "-2/3": 2.0 / 3.0}

_REQUIRED = ("params", "observable", "value", "stderr")
_RC = {"svg.fonttype": "none", "svg.hashsalt": "wignerlab", "figure.figsize": (6.0, 4.2)}


class PlotError(ValueError):
    pass


def load_rows(path: str | Path) -> list[dict]:
    """Read a results CSV, checking the columns the plots use."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise PlotError(f"{path}: empty input")
        missing = [c for c in _REQUIRED if c not in reader.fieldnames]
        if missing:
            raise PlotError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise PlotError(f"{path}: no result rows")
    return rows


def _param(row: dict, key: str) -> float:
    for item in row["params"].split(";"):
        k, _, v = item.partition("=")
        if k == key:
            return float(v)
    raise PlotError(f"row {row['observable']!r} has no parameter {key!r}")


def _save(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_scaling(
    rows: list[dict], path: str | Path, observable: str = "norm_gap", x_key: str = "n", guides: bool = True
) -> dict:
    """Log-log scatter of ``observable`` against ``x_key`` with fit and guide slopes.

    Returns the plotted data: ``x``, ``y``, ``err``, the fitted exponent and
    the guide-line values keyed by label.
    """
    sel = [r for r in rows if r["observable"] == observable]
    if len(sel) < 3:
        raise PlotError(f"scaling plot needs at least three {observable!r} rows, found {len(sel)}")
    x = np.array([_param(r, x_key) for r in sel])
    y = np.array([float(r["value"]) for r in sel])
    err = np.array([float(r["stderr"]) for r in sel])
    order = np.argsort(x)
    x, y, err = x[order], y[order], err[order]
    fit = fit_scaling(zip(x, y))
    lines = {}
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.errorbar(x, y, yerr=err, fmt="o", color="black", label=observable)
        ax.plot(x, fit.predict(x), "-", color="tab:blue", label=f"fit: slope {-fit.exponent:+.3f}")
        # guides pass through the first point
        for (label, exp), style in zip(GUIDE_SLOPES.items() if guides else (), ("--", ":")):
            g = y[0] * (x / x[0]) ** (-exp)
            lines[label] = g
            ax.plot(x, g, style, color="gray", label=f"slope {label}")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(x_key)
        ax.set_ylabel(observable)
        ax.legend()
        _save(fig, Path(path))
    return {"x": x, "y": y, "err": err, "exponent": fit.exponent, "guides": lines}


def plot_concentration(rows: list[dict], path: str | Path) -> dict:
    """Empirical tail against ``4 exp(-t^2/32)`` at the tested ``t`` values."""
    sel = [r for r in rows if r["observable"] == "empirical_tail"]
    if not sel:
        raise PlotError("concentration plot needs 'empirical_tail' rows")
    t = np.array([_param(r, "t") for r in sel])
    tail = np.array([float(r["value"]) for r in sel])
    order = np.argsort(t)
    t, tail = t[order], tail[order]
    bound = np.array([concentration_bound(v) for v in t])
    dense = np.linspace(0.0, t.max() * 1.1, 200)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.plot(dense, [concentration_bound(v) for v in dense], "-", color="gray", label="4 exp(-t²/32)")
        ax.plot(t, bound, "s", color="gray", mfc="none")
        ax.plot(t, np.maximum(tail, 1e-6), "o", color="black", label="empirical tail")
        ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("P(|‖A‖ - E‖A‖| > C t / √n)")
        ax.legend()
        _save(fig, Path(path))
    return {"t": t, "tail": tail, "bound": bound}


def plot_results(csv_path: str | Path, out_dir: str | Path) -> dict[str, Path]:
    """Draw every plot the rows of ``csv_path`` support; error if none apply."""
    rows = load_rows(csv_path)
    out_dir = Path(out_dir)
    observables = {r["observable"] for r in rows}
    written = {}
    if "norm_gap" in observables:
        written["scaling"] = out_dir / "scaling.svg"
        plot_scaling(rows, written["scaling"])
    if "mean_marked_moments" in observables:
        written["dyck"] = out_dir / "marked_moments.svg"
        plot_scaling(rows, written["dyck"], observable="mean_marked_moments", x_key="s", guides=False)
    if "empirical_tail" in observables:
        written["concentration"] = out_dir / "concentration.svg"
        plot_concentration(rows, written["concentration"])
    if not written:
        raise PlotError(f"{csv_path}: no plottable observables (have {', '.join(sorted(observables))})")
    return written
