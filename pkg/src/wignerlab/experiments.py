"""Experiment kinds: each turns an :class:`ExperimentConfig` into result rows.

Rows are written to ``results.csv`` with the fixed column order
:data:`CSV_COLUMNS`.  Every value is a pure function of the config and the
code version, so reruns reproduce the files byte for byte.  The
``timestamp`` column is taken from ``SOURCE_DATE_EPOCH`` (default 0) for the
same reason.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, bounds, mc, pathcomb
from .config import ExperimentConfig
from .seeding import derive_seed

__all__ = ["CSV_COLUMNS", "ResultRow", "run_experiment", "write_results", "read_results", "version_stamp"]

CSV_COLUMNS = ("experiment", "params", "observable", "value", "stderr", "trials", "timestamp", "version")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    params: str
    observable: str
    value: float
    stderr: float
    trials: int
    timestamp: str
    version: str

    def __post_init__(self):
        if not (math.isfinite(self.value) and math.isfinite(self.stderr)):
            raise ValueError(f"non-finite result in row {self.observable!r} ({self.params})")

    def as_csv(self) -> list[str]:
        return [
            self.experiment,
            self.params,
            self.observable,
            repr(float(self.value)),
            repr(float(self.stderr)),
            str(self.trials),
            self.timestamp,
            self.version,
        ]


def version_stamp() -> str:
    """``v<version>`` plus ``+g<hash>`` when running from a git checkout."""
    stamp = f"v{__version__}"
    root = Path(__file__).resolve().parents[2]
    head = root / ".git" / "HEAD"
    try:
        ref = head.read_text().strip()
        if ref.startswith("ref: "):
            ref = (root / ".git" / ref[5:]).read_text().strip()
        return f"{stamp}+g{ref[:7]}"
    except OSError:
        return stamp


def _timestamp() -> str:
    import datetime as dt

    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0") or 0)
    return dt.datetime.fromtimestamp(epoch, tz=dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class _Rows:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.rows: list[ResultRow] = []
        self.stamp = version_stamp()
        self.time = _timestamp()

    def add(self, params: dict, observable: str, value: float, stderr: float = 0.0, trials: int = 0) -> None:
        text = ";".join(f"{k}={_fmt(v)}" for k, v in params.items())
        self.rows.append(
            ResultRow(self.cfg.experiment_id, text, observable, float(value), float(stderr), int(trials), self.time, self.stamp)
        )


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _var_stderr(values: np.ndarray) -> float:
    # large-sample standard error of the unbiased variance
    x = values - values.mean()
    m4 = float(np.mean(x**4))
    var = float(np.var(values, ddof=1))
    return math.sqrt(max(m4 - var * var, 0.0) / values.size)


def _half_length(cfg: ExperimentConfig, n: int) -> int:
    return cfg.s if cfg.s is not None else mc.s_rule(n, cfg.epsilon)


def _need_n(cfg: ExperimentConfig) -> tuple[int, ...]:
    if not cfg.n:
        raise ValueError(f"experiment kind {cfg.kind!r} needs key 'n'")
    return cfg.n


def _exact_vs_mc(cfg, out: _Rows, workers, summary):
    d = cfg.entry_distribution()
    s = cfg.s or 2
    for n in _need_n(cfg):
        exact = pathcomb.exact_trace_moment(n, s, d)
        est = mc.mc_estimate("trace_power", d, n, s, cfg.trials, derive_seed(cfg.seed, n), workers=workers)
        z = (est.mean - exact) / est.stderr
        p = {"n": n, "s": s}
        out.add(p, "exact_trace_moment", exact)
        out.add(p, "mc_trace_power_mean", est.mean, est.stderr, est.trials)
        out.add(p, "z_score", z, 0.0, est.trials)
        summary.setdefault("z_scores", {})[str(n)] = z
        print(f"n={n} s={s}: exact {exact:.10g}  mc {est.mean:.10g} +- {est.stderr:.3g}  z = {z:+.3f}")


def _moments(cfg, out: _Rows, workers, summary):
    d = cfg.entry_distribution()
    for n in _need_n(cfg):
        s = _half_length(cfg, n)
        est = mc.mc_estimate("trace_power", d, n, s, cfg.trials, derive_seed(cfg.seed, n), workers=workers)
        asym = bounds.asymptotic_moment(n, s, d.sigma)
        p = {"n": n, "s": s}
        out.add(p, "mc_trace_power_mean", est.mean, est.stderr, est.trials)
        out.add(p, "asymptotic_moment", asym)
        out.add(p, "ratio_to_asymptotic", est.mean / asym, est.stderr / asym, est.trials)
        summary.setdefault("ratios", {})[str(n)] = est.mean / asym


def _variance(cfg, out: _Rows, workers, summary):
    d = cfg.entry_distribution()
    for n in _need_n(cfg):
        s = _half_length(cfg, n)
        batch = mc.simulate_spectra(d, n, cfg.trials, derive_seed(cfg.seed, n), workers=workers)
        values = mc.observable_values(batch, "trace_power", s)
        est = mc.MomentEstimate.from_values(values)
        scale = bounds.variance_bound(s, d.sigma, 1.0)
        se = _var_stderr(values)
        p = {"n": n, "s": s}
        out.add(p, "mc_trace_power_variance", est.variance, se, est.trials)
        out.add(p, "variance_ratio", est.variance / scale, se / scale, est.trials)
        out.add(p, "relative_variance", est.variance / est.mean**2, se / est.mean**2, est.trials)
        out.add(p, "chebyshev_scale", bounds.chebyshev_ratio(n, s, 1.0))
        if n ** (4 * s) <= 10**6:
            out.add(p, "exact_variance", pathcomb.exact_variance(n, s, d))
        summary.setdefault("variance_ratios", {})[str(n)] = est.variance / scale


def _lln(cfg, out: _Rows, workers, summary):
    d = cfg.entry_distribution()
    for n in _need_n(cfg):
        res = mc.lln_check(
            d, n, cfg.trials, derive_seed(cfg.seed, n), cfg.epsilon, cfg.reference_trials, workers=workers
        )
        p = {"n": n, "s": res.s}
        out.add(p, "exceed_fraction", res.exceed_fraction, res.exceed_stderr, res.delta_samples.size)
        out.add(p, "threshold", res.threshold)
        out.add(p, "reference_mean", res.reference.mean, res.reference.stderr, res.reference.trials)
        out.add(p, "delta_std", float(np.std(res.delta_samples, ddof=1)), 0.0, res.delta_samples.size)
        summary.setdefault("exceed_fraction", {})[str(n)] = res.exceed_fraction


def _concentration(cfg, out: _Rows, workers, summary):
    d = cfg.entry_distribution()
    for n in _need_n(cfg):
        rows = mc.concentration_check(d, n, cfg.trials, cfg.t_grid, derive_seed(cfg.seed, n), workers=workers)
        for r in rows:
            p = {"n": n, "t": r.t}
            se = math.sqrt(max(r.empirical_tail * (1 - r.empirical_tail), 1.0 / cfg.trials) / cfg.trials)
            out.add(p, "empirical_tail", r.empirical_tail, se, cfg.trials)
            out.add(p, "tail_bound", r.bound)
        summary.setdefault("holds", {})[str(n)] = all(r.holds for r in rows)


def _slope_stderr(fit: mc.ScalingFit) -> float:
    lx = np.log([x for x, _ in fit.points])
    ly = np.log([y for _, y in fit.points])
    resid = ly - (fit.intercept - fit.exponent * lx)
    dof = len(lx) - 2
    if dof <= 0:
        return 0.0
    return float(math.sqrt(np.sum(resid**2) / dof / np.sum((lx - lx.mean()) ** 2)))


def _scaling(cfg, out: _Rows, workers, summary):
    d = cfg.entry_distribution()
    pts = mc.norm_gap_points(d, _need_n(cfg), cfg.trials, cfg.seed, workers=workers)
    for n, gap, se in pts:
        out.add({"n": n}, "norm_gap", gap, se, cfg.trials)
    fit = mc.fit_scaling([(n, g) for n, g, _ in pts])
    out.add({"n_min": min(cfg.n), "n_max": max(cfg.n)}, "gap_exponent", fit.exponent, _slope_stderr(fit), cfg.trials)
    out.add({"n_min": min(cfg.n), "n_max": max(cfg.n)}, "gap_log_intercept", fit.intercept)
    summary["gap_exponent"] = fit.exponent


def _glue_audit(cfg, out: _Rows, workers, summary):
    n = cfg.n[0] if cfg.n else 3
    s = cfg.s or 2
    audit = pathcomb.audit_gluing(n, s)
    standalone, aug_viol = pathcomb.audit_augmentation(n, s)
    p = {"n": n, "s": s}
    for name in ("pairs", "correlated_pairs", "distinct_glued", "max_preimages", "preimage_bound", "case1_pairs", "augmented"):
        out.add(p, name, getattr(audit, name))
    out.add(p, "violations", audit.violation_count)
    out.add(p, "standalone_augmentations", standalone)
    out.add(p, "standalone_augmentation_violations", sum(aug_viol.values()))
    summary["violations"] = dict(audit.violations + aug_viol)
    summary["max_preimages"] = audit.max_preimages
    print(
        f"glue audit n={n} s={s}: {audit.correlated_pairs} correlated pairs, max preimages "
        f"{audit.max_preimages} (bound {audit.preimage_bound}), violations {audit.violation_count + sum(aug_viol.values())}"
    )


def _dyck(cfg, out: _Rows, workers, summary):
    rows = pathcomb.mean_marked_moments(cfg.s_grid, cfg.samples, cfg.seed)
    for s, mean, se in rows:
        out.add({"s": s}, "mean_marked_moments", mean, se, cfg.samples)
    fit = mc.fit_scaling([(s, m) for s, m, _ in rows])
    p = {"s_min": min(cfg.s_grid), "s_max": max(cfg.s_grid)}
    # growth exponent is the negated decay exponent
    out.add(p, "growth_exponent", -fit.exponent, _slope_stderr(fit), cfg.samples)
    summary["growth_exponent"] = -fit.exponent


def _bound_chain(cfg, out: _Rows, workers, summary):
    reports, threshold = bounds.scan_bound_chain(cfg.delta, cfg.epsilon, cfg.log10_n_max)
    for rep in reports:
        p = {"n": rep.n, "s": rep.s}
        out.add(p, "consistent", float(rep.consistent))
        out.add(p, "log_lower_bound_margin", _log_margin(rep))
        for key in ("omega_c", "omega_2", "omega_1_coefficient", "moment_lower", "target"):
            out.add(p, f"log_{key}", rep.log_terms[key])
    out.add({"delta": cfg.delta, "epsilon": cfg.epsilon}, "threshold_n", threshold if threshold is not None else -1.0)
    summary["threshold_n"] = threshold


def _log_margin(rep: bounds.BoundChainReport) -> float:
    # log(lower_bound / target); -inf replaced by a large negative sentinel
    if rep.lower_bound <= 0:
        return -1e300
    return math.log(rep.lower_bound) - rep.log_terms["target"]


_RUNNERS: dict[str, Callable] = {
    "exact-vs-mc": _exact_vs_mc,
    "moments": _moments,
    "variance": _variance,
    "lln": _lln,
    "concentration": _concentration,
    "scaling": _scaling,
    "glue-audit": _glue_audit,
    "dyck": _dyck,
    "bound-chain": _bound_chain,
}


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> tuple[list[ResultRow], dict]:
    """Execute ``cfg`` and return its rows and a JSON-ready summary."""
    out = _Rows(cfg)
    summary: dict = {}
    _RUNNERS[cfg.kind](cfg, out, workers, summary)
    meta = {
        "experiment": cfg.experiment_id,
        "kind": cfg.kind,
        "config": cfg.as_dict(),
        "version": out.stamp,
        "timestamp": out.time,
        "rows": len(out.rows),
        "results": summary,
    }
    return out.rows, meta


def write_results(rows: list[ResultRow], summary: dict, out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.as_csv())
    json_path = out_dir / "summary.json"
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=_json_default) + "\n")
    return csv_path, json_path


def _json_default(obj):
    if isinstance(obj, tuple):
        return list(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def read_results(path: str | Path) -> list[dict]:
    """Rows of a ``results.csv`` as dicts with ``value``/``stderr`` as floats."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {', '.join(missing)}")
        rows = []
        for row in reader:
            row["value"] = float(row["value"])
            row["stderr"] = float(row["stderr"])
            row["trials"] = int(row["trials"])
            rows.append(row)
    return rows
