"""Closed-form evaluators for the moment, variance and norm bounds.

Everything is evaluated at finite ``n`` with the unspecified constants and
``o(1)`` corrections exposed as parameters (default 1 and 0 respectively), so
callers see the raw finite-size gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .mc import s_rule

__all__ = [
    "BoundChainReport",
    "asymptotic_moment",
    "variance_bound",
    "chebyshev_ratio",
    "preliminary_bound_chain",
    "scan_bound_chain",
    "concentration_bound",
    "mean_norm_bound",
]


def asymptotic_moment(n: float, s: float, sigma: float) -> float:
    """Leading-order edge moment ``n (2 sigma)^{2s} / (sqrt(pi) s^{3/2})``."""
    if n < 1 or s < 1:
        raise ValueError("need n >= 1 and s >= 1")
    return n * (2.0 * sigma) ** (2 * s) / (math.sqrt(math.pi) * s**1.5)


def variance_bound(s: float, sigma: float, const: float = 1.0) -> float:
    """``const * sqrt(s) * (2 sigma)^{4s}``."""
    return const * math.sqrt(s) * (2.0 * sigma) ** (4 * s)


def chebyshev_ratio(n: float, s: float, const: float = 1.0) -> float:
    """Relative-variance bound ``const * s^{7/2} / n^2``."""
    return const * s**3.5 / n**2


def concentration_bound(t: float) -> float:
    """Tail bound ``4 exp(-t^2 / 32)`` for deviations of the norm from its mean."""
    return 4.0 * math.exp(-t * t / 32.0)


def mean_norm_bound(n: float, c_entry: float) -> float:
    """Lower bound ``1 - (3/sqrt(11)) C sqrt(log n / n)`` on ``E||A||`` (sigma = 1/2)."""
    if n < 2:
        raise ValueError("need n >= 2")
    return 1.0 - 3.0 / math.sqrt(11.0) * c_entry * math.sqrt(math.log(n) / n)


@dataclass
class BoundChainReport:
    """Terms of the finite-``n`` lower-bound chain for ``P(||A|| > 2 sigma (1 - n^{-6/11+delta}))``.

    ``terms`` holds the values, ``log_terms`` their natural logarithms (kept
    separately so that terms far below the float range stay comparable).
    ``lower_bound`` may be negative when the subtracted terms dominate.
    """

    n: float
    sigma: float
    delta: float
    epsilon: float
    s: int
    terms: dict[str, float] = field(default_factory=dict)
    log_terms: dict[str, float] = field(default_factory=dict)
    lower_bound: float = float("nan")
    consistent: bool = False
    notes: tuple[str, ...] = ()


def preliminary_bound_chain(n: float, delta: float, epsilon: float, sigma: float = 0.5) -> BoundChainReport:
    """Evaluate the preliminary lower-bound chain at finite ``n``.

    With ``s = s_rule(n, epsilon)`` and ``x = n^{-6/11+delta}``, every term is
    measured in units of ``(2 sigma)^{2s}``:

    * ``omega_c``: ``n (1 - x)^{2s}`` bounds the moment on ``||A|| <= 2 sigma (1 - x)``;
    * ``omega_2``: ``n^2 exp(-2 n^{3 epsilon / 4})`` bounds it above ``2 sigma (1 + n^{-6/11+epsilon})``;
    * ``omega_1_coefficient``: ``n e^2`` (the ``o(1)`` correction is taken as 0);
    * ``moment_lower``: ``n / (2 s^{3/2})``, the moment lower bound;
    * ``target``: ``n^{-9/11+delta}``.

    ``lower_bound = (moment_lower - omega_c - omega_2) / omega_1_coefficient``
    and the chain is consistent when ``lower_bound > target``.  The result
    does not depend on ``sigma``; only ``scale_log`` reflects it.
    """
    if not 0.0 < delta < 6.0 / 11.0:
        raise ValueError(f"delta must lie in (0, 6/11), got {delta}")
    # strict window with a relative guard so that boundary values such as
    # epsilon = 2 * 0.3 / 3 are rejected despite rounding
    if not (2.0 * delta / 3.0) * (1 + 1e-12) < epsilon < delta * (1 - 1e-12):
        raise ValueError(f"need 2*delta/3 < epsilon < delta, got delta={delta}, epsilon={epsilon}")
    if n < 2:
        raise ValueError("need n >= 2")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    s = s_rule(n, epsilon)
    log_n = math.log(n)
    x = math.exp((-6.0 / 11.0 + delta) * log_n)
    logs = {
        "omega_c": log_n + 2 * s * math.log1p(-x),
        "omega_2": 2 * log_n - 2.0 * math.exp(0.75 * epsilon * log_n),
        "omega_1_coefficient": log_n + 2.0,
        "moment_lower": log_n - math.log(2.0) - 1.5 * math.log(s),
        "target": (-9.0 / 11.0 + delta) * log_n,
    }
    terms = {k: math.exp(v) for k, v in logs.items()}
    # factor multiplying moment_lower once the two subtracted terms are removed
    remaining = 1.0 - math.exp(logs["omega_c"] - logs["moment_lower"]) - math.exp(logs["omega_2"] - logs["moment_lower"])
    log_ratio = logs["moment_lower"] - logs["omega_1_coefficient"]
    lower = math.exp(log_ratio) * remaining
    consistent = remaining > 0 and log_ratio + math.log(remaining) > logs["target"]
    report = BoundChainReport(
        n=float(n),
        sigma=float(sigma),
        delta=float(delta),
        epsilon=float(epsilon),
        s=s,
        terms=terms,
        log_terms=logs,
        lower_bound=lower,
        consistent=bool(consistent),
        notes=("o(1) in the n*(e^2 + o(1)) coefficient taken as 0",),
    )
    report.log_terms["scale_log"] = 2 * s * math.log(2.0 * sigma)
    return report


def scan_bound_chain(
    delta: float, epsilon: float, log10_n_max: float = 60.0, points_per_decade: int = 4, log10_n_min: float = 3.0
) -> tuple[list[BoundChainReport], float | None]:
    """Evaluate the chain on a log grid and return the reports and the threshold ``N*``.

    ``N*`` is the smallest grid point from which the chain stays consistent
    up to the end of the grid (``None`` if the last point is inconsistent).
    """
    count = int(round((log10_n_max - log10_n_min) * points_per_decade)) + 1
    grid = [10 ** (log10_n_min + k / points_per_decade) for k in range(count)]
    reports = [preliminary_bound_chain(n, delta, epsilon) for n in grid]
    threshold = None
    for rep in reversed(reports):
        if not rep.consistent:
            break
        threshold = rep.n
    return reports, threshold
