"""Monte Carlo estimation of trace moments, norms and their fluctuations.

Trial ``k`` of a run with master seed ``seed`` uses the matrix seed
``derive_seed(seed, k)``, so any trial range can be regenerated on its own
and the worker count never changes a result.  Per-trial values are stored in
trial order and reduced in that order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .ensemble import EntryDistribution, sample_matrix
from .seeding import derive_seed
from .spectra import EigensolverError, eigenvalues_array, trace_powers

__all__ = [
    "THREADS_ENV",
    "MAX_FAILURE_FRACTION",
    "MonteCarloAbort",
    "SpectrumBatch",
    "MomentEstimate",
    "LLNResult",
    "ConcentrationRow",
    "ScalingFit",
    "resolve_workers",
    "trial_seed",
    "simulate_spectra",
    "observable_values",
    "mc_estimate",
    "s_rule",
    "lln_check",
    "concentration_check",
    "fit_scaling",
    "variance_ratio",
    "norm_gap_points",
    "chebyshev_constant",
]

THREADS_ENV = "WIGNERLAB_THREADS"
MAX_FAILURE_FRACTION = 1e-3


class MonteCarloAbort(RuntimeError):
    """Too many trials failed for the run to be trusted."""


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, "1") or 1)
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


def trial_seed(seed: int, index: int) -> int:
    return derive_seed(seed, index)


@dataclass(frozen=True, eq=False)
class SpectrumBatch:
    """Spectra of trials ``start .. start + trials - 1`` of one master seed.

    Rows of failed trials are NaN and flagged in ``failed``.
    """

    distribution: EntryDistribution
    n: int
    seed: int
    start: int
    spectra: np.ndarray
    failed: np.ndarray

    @property
    def trials(self) -> int:
        return self.spectra.shape[0]

    @property
    def valid(self) -> np.ndarray:
        return self.spectra[~self.failed]

    def slice(self, lo: int, hi: int) -> "SpectrumBatch":
        """Trials with local indices ``lo .. hi - 1``."""
        if not 0 <= lo <= hi <= self.trials:
            raise ValueError(f"slice [{lo}, {hi}) outside batch of {self.trials} trials")
        return SpectrumBatch(
            self.distribution, self.n, self.seed, self.start + lo, self.spectra[lo:hi], self.failed[lo:hi]
        )


def _one_trial(d: EntryDistribution, n: int, seed: int, index: int) -> np.ndarray | None:
    m = sample_matrix(d, n, trial_seed(seed, index))
    try:
        return eigenvalues_array(m.entries)
    except EigensolverError:
        return None


def simulate_spectra(
    d: EntryDistribution, n: int, trials: int, seed: int, start: int = 0, workers: int | None = None
) -> SpectrumBatch:
    """Full spectra of ``trials`` independent Wigner matrices."""
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    workers = resolve_workers(workers)
    indices = range(start, start + trials)
    if workers == 1:
        results = [_one_trial(d, n, seed, k) for k in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda k: _one_trial(d, n, seed, k), indices))
    spectra = np.full((trials, n), np.nan)
    failed = np.zeros(trials, dtype=bool)
    for row, res in enumerate(results):
        if res is None:
            failed[row] = True
        else:
            spectra[row] = res
    if failed.sum() > MAX_FAILURE_FRACTION * trials:
        raise MonteCarloAbort(f"{int(failed.sum())} of {trials} eigensolver runs failed (n={n}, seed={seed})")
    return SpectrumBatch(d, n, int(seed), int(start), spectra, failed)


def observable_values(batch: SpectrumBatch, observable: str, s: int | None = None) -> np.ndarray:
    """Per-trial values of ``"trace_power"`` (``Tr A^{2s}``) or ``"spectral_norm"``."""
    lam = batch.valid
    if observable == "trace_power":
        if s is None or s < 1:
            raise ValueError("trace_power needs a half-length s >= 1")
        return trace_powers(lam, 2 * s)
    if observable == "spectral_norm":
        return np.abs(lam).max(axis=1)
    raise ValueError(f"unknown observable {observable!r}")


@dataclass(frozen=True)
class MomentEstimate:
    """Mean and unbiased variance of one observable over ``trials`` runs.

    Stored as ``(trials, mean, m2)`` with ``m2`` the centred sum of squares,
    which merges exactly (Chan et al.) across disjoint trial ranges.
    """

    trials: int
    mean: float
    m2: float
    observable: str = ""
    params: tuple = ()

    @classmethod
    def from_values(cls, values: Sequence[float], observable: str = "", params: tuple = ()) -> "MomentEstimate":
        x = np.asarray(values, dtype=np.float64)
        if x.size == 0:
            raise ValueError("no values to aggregate")
        mean = float(x.mean())
        return cls(int(x.size), mean, float(np.sum((x - mean) ** 2)), observable, params)

    @property
    def variance(self) -> float:
        return self.m2 / (self.trials - 1) if self.trials > 1 else float("nan")

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.trials)

    def merge(self, other: "MomentEstimate") -> "MomentEstimate":
        n = self.trials + other.trials
        delta = other.mean - self.mean
        mean = self.mean + delta * other.trials / n
        m2 = self.m2 + other.m2 + delta * delta * self.trials * other.trials / n
        return MomentEstimate(n, mean, m2, self.observable, self.params)


def mc_estimate(
    observable: str,
    d: EntryDistribution,
    n: int,
    s: int | None,
    trials: int,
    seed: int,
    workers: int | None = None,
    batch: SpectrumBatch | None = None,
) -> MomentEstimate:
    """Monte Carlo mean/variance of ``Tr A^{2s}`` or ``||A||``.

    A precomputed ``batch`` (same distribution, ``n`` and seed) may be passed
    to share spectra between observables; its first ``trials`` rows are used.
    """
    if trials < 2:
        raise ValueError(f"need at least two trials, got {trials}")
    if batch is None:
        batch = simulate_spectra(d, n, trials, seed, workers=workers)
    else:
        _check_batch(batch, d, n, seed, trials)
        batch = batch.slice(0, trials)
    values = observable_values(batch, observable, s)
    return MomentEstimate.from_values(values, observable, (n, s, d.name, seed))


def _check_batch(batch: SpectrumBatch, d: EntryDistribution, n: int, seed: int, trials: int) -> None:
    if batch.distribution != d or batch.n != n or batch.seed != seed or batch.start != 0:
        raise ValueError("precomputed batch does not match the requested distribution, n or seed")
    if batch.trials < trials:
        raise ValueError(f"batch holds {batch.trials} trials, {trials} requested")


def s_rule(n: int, epsilon: float) -> int:
    """Moment half-length ``round(n**(6/11 - epsilon))``, at least 1."""
    if not 0.0 < epsilon < 6.0 / 11.0:
        raise ValueError(f"epsilon must lie in (0, 6/11), got {epsilon}")
    return max(1, int(math.floor(n ** (6.0 / 11.0 - epsilon) + 0.5)))


@dataclass(frozen=True, eq=False)
class LLNResult:
    """Relative deviations ``delta = Tr A^{2s} / reference - 1`` and their tail frequency."""

    n: int
    s: int
    delta_samples: np.ndarray
    threshold: float
    exceed_fraction: float
    reference: MomentEstimate

    @property
    def exceed_stderr(self) -> float:
        """Binomial standard error of ``exceed_fraction`` (at least ``1/trials``)."""
        m = self.delta_samples.size
        f = self.exceed_fraction
        return max(math.sqrt(f * (1.0 - f) / m), 1.0 / m)


def lln_check(
    d: EntryDistribution,
    n: int,
    trials: int,
    seed: int,
    epsilon: float = 0.1,
    reference_trials: int | None = None,
    workers: int | None = None,
    batch: SpectrumBatch | None = None,
) -> LLNResult:
    """Fraction of trials with ``|delta| >= n**(-1/22)`` at ``s = s_rule(n, epsilon)``.

    The reference mean uses trials ``0 .. reference_trials - 1``; the tested
    trials are the next ``trials`` indices, so the two sets are independent.
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    reference_trials = trials if reference_trials is None else reference_trials
    if reference_trials < 2:
        raise ValueError("reference needs at least two trials")
    total = reference_trials + trials
    if batch is None:
        batch = simulate_spectra(d, n, total, seed, workers=workers)
    else:
        _check_batch(batch, d, n, seed, total)
    s = s_rule(n, epsilon)
    threshold = n ** (-1.0 / 22.0)
    reference = MomentEstimate.from_values(
        observable_values(batch.slice(0, reference_trials), "trace_power", s), "trace_power", (n, s, d.name, seed)
    )
    if reference.stderr > reference.mean * threshold / 10.0:
        raise ValueError(
            f"reference mean too noisy: relative stderr {reference.stderr / reference.mean:.3g} "
            f"exceeds threshold/10 = {threshold / 10:.3g}; increase reference_trials"
        )
    tested = observable_values(batch.slice(reference_trials, total), "trace_power", s)
    delta = tested / reference.mean - 1.0
    exceed = float(np.mean(np.abs(delta) >= threshold))
    return LLNResult(n, s, delta, threshold, exceed, reference)


@dataclass(frozen=True)
class ConcentrationRow:
    t: float
    deviation: float  # C * t / sqrt(n)
    empirical_tail: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.empirical_tail <= self.bound


def concentration_check(
    d: EntryDistribution,
    n: int,
    trials: int,
    t_grid: Iterable[float],
    seed: int,
    workers: int | None = None,
    batch: SpectrumBatch | None = None,
) -> list[ConcentrationRow]:
    """Empirical ``P(| ||A|| - E||A|| | > C t / sqrt(n))`` against ``4 exp(-t^2/32)``.

    ``E||A||`` is replaced by the sample mean of the same trials.
    """
    from .bounds import concentration_bound

    if trials < 2:
        raise ValueError(f"need at least two trials, got {trials}")
    if batch is None:
        batch = simulate_spectra(d, n, trials, seed, workers=workers)
    else:
        _check_batch(batch, d, n, seed, trials)
        batch = batch.slice(0, trials)
    norms = observable_values(batch, "spectral_norm")
    dev = np.abs(norms - norms.mean())
    rows = []
    for t in t_grid:
        width = d.bound * t / math.sqrt(n)
        rows.append(ConcentrationRow(float(t), width, float(np.mean(dev > width)), concentration_bound(t)))
    return rows


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of ``log y = intercept - exponent * log N``."""

    points: tuple[tuple[float, float], ...]
    exponent: float
    intercept: float
    residual: float

    def predict(self, n) -> np.ndarray:
        return np.exp(self.intercept) * np.asarray(n, dtype=np.float64) ** (-self.exponent)


def fit_scaling(points: Iterable[tuple[float, float]]) -> ScalingFit:
    """Fit ``y ~ N**(-exponent)`` in log-log coordinates."""
    pts = tuple((float(x), float(y)) for x, y in points)
    if len(pts) < 3:
        raise ValueError(f"need at least three points, got {len(pts)}")
    if any(y <= 0 for _, y in pts) or any(x <= 0 for x, _ in pts):
        raise ValueError("scaling fit needs positive N and y")
    lx = np.log([x for x, _ in pts])
    ly = np.log([y for _, y in pts])
    design = np.column_stack([np.ones_like(lx), lx])
    (intercept, slope), *_ = np.linalg.lstsq(design, ly, rcond=None)
    residual = float(np.max(np.abs(ly - (intercept + slope * lx))))
    return ScalingFit(pts, float(-slope), float(intercept), residual)


def variance_ratio(
    d: EntryDistribution,
    n: int,
    s: int,
    trials: int,
    seed: int,
    workers: int | None = None,
    batch: SpectrumBatch | None = None,
) -> float:
    """MC ``Var Tr A^{2s}`` divided by ``sqrt(s) (2 sigma)^{4s}``."""
    est = mc_estimate("trace_power", d, n, s, trials, seed, workers=workers, batch=batch)
    return est.variance / (math.sqrt(s) * (2.0 * d.sigma) ** (4 * s))


def norm_gap_points(
    d: EntryDistribution, n_grid: Iterable[int], trials: int, seed: int, workers: int | None = None
) -> list[tuple[int, float, float]]:
    """``(n, 2 sigma - mean ||A||, stderr)`` for each ``n`` (seed folded with ``n``)."""
    rows = []
    for n in n_grid:
        est = mc_estimate("spectral_norm", d, n, None, trials, derive_seed(seed, n), workers=workers)
        rows.append((int(n), 2.0 * d.sigma - est.mean, est.stderr))
    return rows


def chebyshev_constant(rows: Iterable[tuple[int, int, float, float]]) -> float:
    """Smallest ``c`` with ``Var/E^2 <= c s^{7/2} / n^2`` over ``(n, s, mean, variance)`` rows."""
    return max(var / mean**2 / (s**3.5 / n**2) for n, s, mean, var in rows)
