"""Bounded, centred entry laws and Wigner matrix sampling.

Entries are finitely supported, so every raw moment is available in closed
form and expectations over closed paths are exact finite sums.  The canonical
non-symmetric law is the two-point law; the symmetric ``+-sigma`` law is the
mu_3 = 0 baseline.

Sampling is counter based: the entry at ``(i, j)`` with ``i <= j`` is a pure
function of ``(seed, i, j)``, so a matrix can be rebuilt bit for bit from its
seed and dimension alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .seeding import derive_seed, mix64_array, uniforms

__all__ = [
    "EntryDistribution",
    "MatrixSample",
    "UnsupportedMomentError",
    "make_two_point",
    "make_symmetric",
    "distribution_from_spec",
    "moment_of",
    "sample_matrix",
]


class UnsupportedMomentError(ValueError):
    """Requested a moment order the distribution cannot provide."""


@dataclass(frozen=True)
class EntryDistribution:
    """Finitely supported, mean-zero law of a single matrix entry.

    Parameters
    ----------
    name : str
        Identifier used in configs and result rows.
    values, probs : tuple of float
        Support points and their probabilities.
    params : tuple of (str, float)
        Constructor parameters (``p``, ``sigma``), echoed by :meth:`to_spec`.
    max_order : int or None
        Highest moment order served.  ``None`` means closed form for all orders.
    """

    name: str
    values: tuple[float, ...]
    probs: tuple[float, ...]
    params: tuple[tuple[str, float], ...] = ()
    max_order: int | None = None

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise ValueError("values and probs must be non-empty and of equal length")
        if any(q <= 0 for q in self.probs) or not math.isclose(sum(self.probs), 1.0, abs_tol=1e-12):
            raise ValueError("probs must be positive and sum to 1")
        mean = math.fsum(q * v for q, v in zip(self.probs, self.values))
        if abs(mean) > 1e-12 * self.bound:
            raise ValueError(f"entry law must be centred, got mean {mean!r}")
        if self.variance <= 0:
            raise ValueError("entry law must have positive variance")

    @property
    def bound(self) -> float:
        """Almost-sure bound C with ``|a| <= C``."""
        return max(abs(v) for v in self.values)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    @property
    def variance(self) -> float:
        return math.fsum(q * v * v for q, v in zip(self.probs, self.values))

    @property
    def mu3(self) -> float:
        return moment_of(self, 3)

    def moments(self, k_max: int) -> list[float]:
        """Raw moments ``[m_1, ..., m_{k_max}]`` (``m_1`` is exactly 0)."""
        return [moment_of(self, k) for k in range(1, k_max + 1)]

    def to_spec(self) -> dict[str, object]:
        return {"name": self.name, **dict(self.params)}


def _two_point_support(p: float, sigma: float) -> tuple[float, float]:
    a = sigma * math.sqrt((1.0 - p) / p)
    b = -sigma * math.sqrt(p / (1.0 - p))
    return a, b


def make_two_point(p: float, sigma: float) -> EntryDistribution:
    """Two-point law: ``sigma*sqrt((1-p)/p)`` w.p. ``p``, ``-sigma*sqrt(p/(1-p))`` otherwise.

    Mean 0, variance ``sigma**2`` and third moment
    ``sigma**3 * (1 - 2p) / sqrt(p (1 - p))``.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie strictly between 0 and 1, got {p!r}")
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    a, b = _two_point_support(p, sigma)
    return EntryDistribution(
        name="two-point",
        values=(a, b),
        probs=(p, 1.0 - p),
        params=(("p", float(p)), ("sigma", float(sigma))),
    )


def make_symmetric(sigma: float) -> EntryDistribution:
    """Symmetric ``+-sigma`` law (all odd moments vanish)."""
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    return EntryDistribution(
        name="symmetric",
        values=(float(sigma), -float(sigma)),
        probs=(0.5, 0.5),
        params=(("sigma", float(sigma)),),
    )


def distribution_from_spec(spec: Mapping[str, object]) -> EntryDistribution:
    """Build a distribution from ``{"name": ..., "p": ..., "sigma": ...}``."""
    name = spec.get("name", "two-point")
    try:
        if name == "two-point":
            return make_two_point(float(spec["p"]), float(spec["sigma"]))
        if name == "symmetric":
            return make_symmetric(float(spec["sigma"]))
    except KeyError as exc:
        raise ValueError(f"distribution {name!r} needs parameter {exc.args[0]!r}") from None
    raise ValueError(f"unknown distribution {name!r} (expected 'two-point' or 'symmetric')")


def moment_of(d: EntryDistribution, k: int) -> float:
    """Raw moment ``E[a**k]`` of the entry law."""
    if k < 1:
        raise ValueError(f"moment order must be positive, got {k}")
    if d.max_order is not None and k > d.max_order:
        raise UnsupportedMomentError(f"{d.name}: moment of order {k} exceeds available order {d.max_order}")
    if k == 1:
        return 0.0
    if d.name == "symmetric" and k % 2 == 1:
        return 0.0
    return math.fsum(q * v**k for q, v in zip(d.probs, d.values))


@dataclass(frozen=True, eq=False)
class MatrixSample:
    """One realisation of ``A_N = (a_ij) / sqrt(N)``; ``entries`` is read-only."""

    n: int
    entries: np.ndarray
    seed: int
    distribution: EntryDistribution

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def _upper_uniforms(n: int, seed: int) -> tuple[tuple[np.ndarray, np.ndarray], np.ndarray]:
    iu = np.triu_indices(n)
    keys = (iu[0].astype(np.uint64) << np.uint64(32)) | iu[1].astype(np.uint64)
    base = np.uint64(derive_seed(seed, 0x5749474E4552))
    return iu, uniforms(mix64_array(mix64_array(keys ^ base)))


def sample_matrix(d: EntryDistribution, n: int, seed: int) -> MatrixSample:
    """Draw a symmetric Wigner matrix with i.i.d. entries (diagonal included)."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    iu, u = _upper_uniforms(n, seed)
    cum = np.cumsum(d.probs)[:-1]
    values = np.asarray(d.values, dtype=np.float64) / math.sqrt(n)
    upper = values[np.searchsorted(cum, u, side="right")]
    entries = np.empty((n, n))
    entries[iu] = upper
    entries.T[iu] = upper
    entries.flags.writeable = False
    return MatrixSample(n=n, entries=entries, seed=int(seed), distribution=d)
