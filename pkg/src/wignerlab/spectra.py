"""Symmetric eigenvalues, spectral norm and scaled trace powers.

The hot path is LAPACK: ``dsytrd`` (Householder reduction to tridiagonal form)
followed by ``dsterf`` (root-free implicit QL/QR on the tridiagonal).  A cyclic
Jacobi solver is provided as an independent reference for small matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .ensemble import MatrixSample

__all__ = [
    "TOLERANCES",
    "EigensolverError",
    "Spectrum",
    "eigenvalues",
    "eigenvalues_array",
    "spectral_norm",
    "trace_power",
    "trace_powers",
    "check_spectrum",
    "jacobi_eigenvalues",
]

#: Tolerance constants.  The QL iteration cap (30 per eigenvalue, 30 N in
#: total) is fixed inside ``dsterf``; it is recorded here for error messages.
TOLERANCES = {
    "identity_rel": 1e-10,  # trace / Frobenius identities, scaled by N
    "ql_iterations_per_eigenvalue": 30,
    "jacobi_tol": 1e-14,
    "jacobi_max_sweeps": 100,
}


class EigensolverError(RuntimeError):
    """The tridiagonal QL iteration did not converge."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues of an ``n x n`` symmetric matrix."""

    eigenvalues: np.ndarray
    n: int

    def __post_init__(self):
        if self.eigenvalues.shape != (self.n,):
            raise ValueError("eigenvalue count must equal n")


def _as_array(m) -> np.ndarray:
    a = m.entries if isinstance(m, MatrixSample) else np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def eigenvalues_array(a: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the symmetric array ``a`` (upper triangle is read)."""
    n = a.shape[0]
    if n == 0:
        return np.empty(0)
    if n == 1:
        return np.array([float(a[0, 0])])
    lwork = int(lapack.dsytrd_lwork(n)[0])
    _, d, e, _, info = lapack.dsytrd(a, lwork=lwork)
    if info != 0:
        raise EigensolverError(f"dsytrd: illegal argument {-info}")
    e = np.asfortranarray(e)
    vals, info = lapack.dsterf(d, e, overwrite_e=1)
    if info > 0:
        # dsterf leaves unconverged couplings non-zero in e
        bad = np.flatnonzero(e)
        index = int(bad[0]) if bad.size else None
        raise EigensolverError(
            f"QL iteration failed to converge after {TOLERANCES['ql_iterations_per_eigenvalue']}*N "
            f"iterations; {info} off-diagonal entries unconverged (first at index {index})",
            index=index,
        )
    return np.sort(vals)


def eigenvalues(m) -> Spectrum:
    """Full spectrum of a :class:`MatrixSample` (or a symmetric array)."""
    a = _as_array(m)
    return Spectrum(eigenvalues=eigenvalues_array(a), n=a.shape[0])


def _values(s) -> np.ndarray:
    return s.eigenvalues if isinstance(s, Spectrum) else np.asarray(s, dtype=np.float64)


def spectral_norm(s) -> float:
    """``max |lambda_i|``."""
    lam = _values(s)
    if lam.size == 0:
        return 0.0
    return float(max(abs(lam.min()), abs(lam.max())))


def trace_power(s, two_s: int) -> float:
    """``sum_i lambda_i**two_s`` evaluated as ``M**two_s * sum (|lambda_i|/M)**two_s``."""
    if two_s < 2 or two_s % 2:
        raise ValueError(f"two_s must be an even integer >= 2, got {two_s}")
    lam = _values(s)
    top = spectral_norm(lam)
    if top == 0.0:
        return 0.0
    ratio_sum = float(np.sum((np.abs(lam) / top) ** two_s))
    return _scale_up(np.array([top]), np.array([ratio_sum]), two_s)[0]


def trace_powers(spectra: np.ndarray, two_s: int) -> np.ndarray:
    """Row-wise :func:`trace_power` over a ``(trials, n)`` block of spectra."""
    if two_s < 2 or two_s % 2:
        raise ValueError(f"two_s must be an even integer >= 2, got {two_s}")
    lam = np.abs(np.atleast_2d(spectra))
    top = lam.max(axis=1)
    out = np.zeros(lam.shape[0])
    nz = top > 0
    ratio_sum = np.sum((lam[nz] / top[nz, None]) ** two_s, axis=1)
    out[nz] = _scale_up(top[nz], ratio_sum, two_s)
    return out


def _scale_up(top: np.ndarray, ratio_sum: np.ndarray, two_s: int) -> np.ndarray:
    # plain power when representable, log space otherwise
    with np.errstate(over="ignore", under="ignore"):
        power = top**two_s
        ok = (power > 1e-290) & (power < 1e290)
        return np.where(ok, power * ratio_sum, np.exp(two_s * np.log(top) + np.log(ratio_sum)))


def check_spectrum(s: Spectrum, m) -> None:
    """Assert the trace and Frobenius identities between ``s`` and its matrix."""
    a = _as_array(m)
    tol = TOLERANCES["identity_rel"] * max(s.n, 1)
    lam = s.eigenvalues
    if not np.all(np.diff(lam) >= 0):
        raise AssertionError("eigenvalues are not sorted ascending")
    trace_err = abs(math.fsum(lam) - math.fsum(np.diag(a)))
    frob_err = abs(math.fsum(lam * lam) - math.fsum((a * a).ravel()))
    if trace_err > tol or frob_err > tol:
        raise AssertionError(f"spectral identities violated: trace {trace_err:.3e}, frobenius {frob_err:.3e}")


def jacobi_eigenvalues(m) -> np.ndarray:
    """Reference eigenvalues by cyclic Jacobi rotations (small matrices only)."""
    a = np.array(_as_array(m), dtype=np.float64)
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n)
    for _ in range(TOLERANCES["jacobi_max_sweeps"]):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= TOLERANCES["jacobi_tol"] * scale:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300 * scale:
                    # negligible coupling; dropping it avoids overflow in theta
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                sn = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - sn * aq
                a[:, q] = sn * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - sn * rq
                a[q, :] = sn * rp + c * rq
    raise EigensolverError("Jacobi sweeps did not converge")
