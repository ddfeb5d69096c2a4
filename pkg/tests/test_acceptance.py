"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line through ``acceptance_report``; the lines
are repeated in the terminal summary.  Monte Carlo seeds are fixed in advance
and the shared batches come from ``conftest.py``.
"""

import math
import time

import numpy as np
import pytest

from wignerlab.bounds import asymptotic_moment, preliminary_bound_chain, scan_bound_chain, variance_bound
from wignerlab.cli import main
from wignerlab.mc import (
    concentration_check,
    fit_scaling,
    lln_check,
    mc_estimate,
    norm_gap_points,
    observable_values,
    s_rule,
    simulate_spectra,
)
from wignerlab.pathcomb import (
    audit_augmentation,
    audit_gluing,
    catalan,
    enumerate_dyck_paths,
    exact_trace_moment,
    exact_variance,
    mean_marked_moments,
)

from conftest import SEED_500, SEED_1000, SEED_2000


def test_criterion_01_exact_moment_oracle(two_point, acceptance_report):
    start = time.perf_counter()
    est = mc_estimate("trace_power", two_point, 4, 2, 100_000, seed=101)
    elapsed = time.perf_counter() - start
    exact = exact_trace_moment(4, 2, two_point)
    z = (est.mean - exact) / est.stderr
    ok = abs(z) <= 4 and elapsed < 60
    acceptance_report(1, ok, f"exact {exact:.8f}, MC {est.mean:.8f} +- {est.stderr:.2g}, z={z:+.2f}, {elapsed:.1f}s")
    assert ok


def test_criterion_02_exact_variance_oracle(two_point, acceptance_report):
    batch = simulate_spectra(two_point, 3, 100_000, seed=202)
    values = observable_values(batch, "trace_power", 2)
    var = values.var(ddof=1)
    x = values - values.mean()
    stderr = math.sqrt((np.mean(x**4) - var**2) / values.size)
    full = exact_variance(3, 2, two_point)
    restricted = exact_variance(3, 2, two_point, restricted=True)
    z = (var - full) / stderr
    ok = abs(z) <= 4 and abs(full - restricted) <= 1e-12
    acceptance_report(
        2, ok, f"exact {full:.8f}, MC {var:.8f} +- {stderr:.2g}, z={z:+.2f}, |full-restricted|={abs(full - restricted):.1e}"
    )
    assert ok


def test_criterion_03_semicircle_moment(symmetric, acceptance_report):
    dyck = sum(1 for _ in enumerate_dyck_paths(3))
    assert dyck == catalan(3) == 5
    target = dyck * 0.5**6
    est = mc_estimate("trace_power", symmetric, 400, 3, 200, seed=303)
    value = est.mean / 400
    rel = abs(value / target - 1)
    ok = rel <= 0.05
    acceptance_report(3, ok, f"(1/n) E Tr A^6 = {value:.6f} +- {est.stderr / 400:.1g} vs 5/64 = {target}, rel {rel:.2%}")
    assert ok


def test_criterion_04_edge_moment(two_point, batch_2000, acceptance_report):
    n = 2000
    s = s_rule(n, 0.05)
    est = mc_estimate("trace_power", two_point, n, s, batch_2000.trials, SEED_2000, batch=batch_2000)
    ratio = est.mean / asymptotic_moment(n, s, 0.5)
    ok = abs(ratio - 1) <= 0.25
    acceptance_report(4, ok, f"n={n} s={s}: E Tr A^2s / (n/(sqrt(pi) s^1.5)) = {ratio:.4f} +- {est.stderr / asymptotic_moment(n, s, 0.5):.2g}")
    assert ok


def test_criterion_05_variance_bound(two_point, grid_batches, acceptance_report):
    parts, worst = [], 0.0
    for n, batch in grid_batches.items():
        s = s_rule(n, 0.1)
        values = observable_values(batch.slice(0, 400), "trace_power", s)
        ratio = values.var(ddof=1) / variance_bound(s, 0.5)
        worst = max(worst, ratio)
        parts.append(f"n={n} s={s}: {ratio:.4f}")
    ok = worst <= 10
    acceptance_report(5, ok, "Var/sqrt(s): " + ", ".join(parts))
    assert ok


def test_criterion_06_lln(two_point, grid_batches, acceptance_report):
    seeds = {500: SEED_500, 1000: SEED_1000, 2000: SEED_2000}
    rows = [
        lln_check(two_point, n, 200, seeds[n], epsilon=0.1, reference_trials=200, batch=batch)
        for n, batch in grid_batches.items()
    ]
    monotone = all(
        b.exceed_fraction <= a.exceed_fraction + 2 * math.hypot(a.exceed_stderr, b.exceed_stderr)
        for a, b in zip(rows, rows[1:])
    )
    ok = rows[-1].exceed_fraction <= 0.1 and monotone
    detail = ", ".join(f"n={r.n}: {r.exceed_fraction:.3f} (max|delta| {np.abs(r.delta_samples).max():.3f} vs {r.threshold:.3f})" for r in rows)
    acceptance_report(6, ok, "exceed fraction " + detail)
    assert ok


def test_criterion_07_concentration(two_point, batch_500, acceptance_report):
    rows = concentration_check(two_point, 500, 10_000, [4, 8, 12], SEED_500, batch=batch_500)
    ok = all(r.holds for r in rows)
    acceptance_report(7, ok, ", ".join(f"t={r.t:g}: {r.empirical_tail:.4f} <= {r.bound:.4f}" for r in rows))
    assert ok


def test_criterion_08_gluing_audit(acceptance_report):
    audit = audit_gluing(3, 2)
    augmented, aug_violations = audit_augmentation(3, 2)
    ok = (
        audit.violation_count == 0
        and audit.correlated_pairs > 0
        and audit.max_preimages <= 32
        and augmented > 0
        and not aug_violations
    )
    acceptance_report(
        8,
        ok,
        f"{audit.correlated_pairs} correlated pairs, 0 == {audit.violation_count} violations, max preimages "
        f"{audit.max_preimages} <= 32, {augmented} length-8 augmentations with {sum(aug_violations.values())} violations",
    )
    assert ok


def test_criterion_09_scaling_exponent(two_point, acceptance_report):
    grid = (200, 400, 800, 1600, 3200)
    points = norm_gap_points(two_point, grid, 200, seed=909)
    fit = fit_scaling([(n, gap) for n, gap, _ in points])
    ok = 0.55 <= fit.exponent <= 0.75
    gaps = ", ".join(f"{n}: {gap:.5f}+-{se:.1g}" for n, gap, se in points)
    acceptance_report(9, ok, f"exponent {fit.exponent:.3f} (gaps {gaps})")
    assert ok


def test_criterion_10_marked_moments(acceptance_report):
    rows = mean_marked_moments([64, 128, 256, 512, 1024], 400, seed=1010)
    fit = fit_scaling([(s, m) for s, m, _ in rows])
    growth = -fit.exponent
    ok = 0.4 <= growth <= 0.6
    acceptance_report(10, ok, f"growth exponent {growth:.3f}; means " + ", ".join(f"{s}: {m:.2f}" for s, m, _ in rows))
    assert ok


def test_criterion_11_bound_chain(acceptance_report):
    reports, threshold = scan_bound_chain(0.3, 0.25, log10_n_max=80)
    flags = [r.consistent for r in reports]
    stays = threshold is not None and all(r.consistent for r in reports if r.n >= threshold)
    monotone = flags == sorted(flags)
    rejected = 0
    for delta, eps in ((0.3, 0.2), (0.3, 0.1), (0.3, 0.3), (0.3, 0.35)):
        with pytest.raises(ValueError):
            preliminary_bound_chain(1e30, delta, eps)
        rejected += 1
    ok = stays and monotone and rejected == 4
    acceptance_report(11, ok, f"consistent for all scanned n >= {threshold:.3g} (up to 1e80); 4/4 invalid windows rejected")
    assert ok


@pytest.mark.parametrize(
    "text",
    [
        "kind = exact-vs-mc\nseed = 12\nn = 4\ns = 2\ntrials = 3000\n",
        "kind = variance\nseed = 12\nn = 30, 60\ntrials = 40\n",
        "kind = glue-audit\nseed = 12\nn = 3\ns = 2\n",
        "kind = dyck\nseed = 12\ns_grid = 8, 16, 32\nsamples = 30\n",
        "kind = bound-chain\nseed = 12\nepsilon = 0.25\nlog10_n_max = 40\n",
        "kind = scaling\nseed = 12\nn = 20, 40, 80\ntrials = 20\n",
        "kind = lln\nseed = 12\nn = 40, 80\ntrials = 30\nreference_trials = 300\n",
        "kind = concentration\nseed = 12\nn = 40\ntrials = 300\n",
        "kind = moments\nseed = 12\nn = 50, 100\ntrials = 30\n",
    ],
    ids=lambda t: t.split("\n")[0].split("= ")[1],
)
def test_criterion_12_determinism(text, tmp_path, acceptance_report):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(text)
    outputs = []
    for k, threads in enumerate(("1", "2")):
        out = tmp_path / f"run{k}"
        assert main(["run", "--config", str(cfg), "--out", str(out), "--threads", threads]) == 0
        outputs.append((out / "results.csv").read_bytes())
    ok = outputs[0] == outputs[1]
    kind = text.split("\n")[0].split("= ")[1]
    acceptance_report(12, ok, f"{kind}: byte-identical results.csv across two runs ({len(outputs[0])} bytes)")
    assert ok
