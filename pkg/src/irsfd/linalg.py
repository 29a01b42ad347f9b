"""Small dense-complex linear algebra helpers shared across the package.

Everything operates on complex128 ndarrays. Hermitian inputs are re-symmetrized
where round-off would otherwise accumulate, and log-determinants go through a
Cholesky factor so non-positive-definite arguments fail loudly instead of
returning garbage.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg


def herm(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def hermitize(a: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part, (A + A^H)/2."""
    return 0.5 * (a + a.conj().T)


def trace_prod_t(x: np.ndarray, j: np.ndarray) -> float:
    """Tr(X J^T) as a real scalar, computed elementwise without forming X @ J^T.

    For Hermitian PSD X and J the value is real; the imaginary round-off is
    dropped.
    """
    return float(np.sum(x * j).real)


def logdet_pd(a: np.ndarray) -> float:
    """log det of a Hermitian positive definite matrix via Cholesky."""
    chol = np.linalg.cholesky(a)
    return 2.0 * float(np.sum(np.log(np.diag(chol).real)))


def solve_hermitian_pd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A X = B for Hermitian positive definite A."""
    c, low = scipy.linalg.cho_factor(a, check_finite=False)
    return scipy.linalg.cho_solve((c, low), b, check_finite=False)


def psd_sqrt(a: np.ndarray, neg_tol: float = 1e-12) -> np.ndarray:
    """Hermitian square root of a PSD matrix by eigendecomposition.

    Eigenvalues in [-neg_tol_eff, 0) are clamped to zero; anything more
    negative raises, since a genuinely indefinite covariance is a caller bug.
    """
    vals, vecs = np.linalg.eigh(hermitize(a))
    neg_tol_eff = max(neg_tol, neg_tol * float(vals[-1]) if vals.size else neg_tol)
    if vals.size and float(vals[0]) < -neg_tol_eff:
        raise ValueError(f"matrix is not PSD: min eigenvalue {vals[0]:.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def max_abs_offherm(a: np.ndarray) -> float:
    """Largest deviation from Hermitian symmetry, for assertions."""
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def rand_cn(rng: np.random.Generator, *shape: int) -> np.ndarray:
    """iid CN(0, 1) entries: unit-variance circularly symmetric Gaussian."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
