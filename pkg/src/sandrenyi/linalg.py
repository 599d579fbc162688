"""Dense Hermitian linear algebra on small complex matrices.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Norm orders are
floats; ``math.inf`` stands for the operator norm and is always branched on
explicitly rather than used as a large number.

Support convention: a negative power (or a negative Schatten order) only acts
on the support of its argument, i.e. on eigenvalues/singular values above
``SUPPORT_EPS`` times the largest one.  Everything off the support maps to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SUPPORT_EPS = 1e-10
PSD_CLIP = 1e-12
PSD_FLOOR = 1e-14
HERMITIAN_TOL = 1e-8


class NotPSDError(ValueError):
    """Raised when a matrix expected to be positive semi-definite is not."""


def as_matrix(x, square: bool = False) -> np.ndarray:
    """Validate ``x`` as a finite 2-d complex matrix and return it."""
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def op_norm_abs(x: np.ndarray) -> float:
    """Largest absolute entry; the cheap max-norm used for tolerance checks."""
    return float(np.max(np.abs(x))) if x.size else 0.0


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def hermitian_eig(h) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrized before decomposition.  A deviation from
    Hermiticity larger than ``1e-8 * max(1, |H|)`` is rejected.
    """
    h = as_matrix(h, square=True)
    dev = op_norm_abs(h - dagger(h))
    if dev > HERMITIAN_TOL * max(1.0, op_norm_abs(h)):
        raise ValueError(f"matrix is not Hermitian (deviation {dev:.3g})")
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    return HermitianEig(w, v)


def _psd_eig(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    top = max(float(w[-1]), 0.0)
    # the absolute floor absorbs roundoff in products that vanish identically
    if w[0] < -max(PSD_CLIP * top, PSD_FLOOR):
        raise NotPSDError(f"matrix is not positive semi-definite (min eigenvalue {w[0]:.3g})")
    return np.clip(w, 0.0, None), v


def psd_eigvals(h) -> np.ndarray:
    """Clipped eigenvalues (ascending) of a PSD matrix."""
    w, _ = _psd_eig(np.asarray(h, dtype=complex))
    return w


def support_mask(values: np.ndarray, eps: float = SUPPORT_EPS) -> np.ndarray:
    top = float(np.max(values)) if values.size else 0.0
    if top <= 0.0:
        return np.zeros(values.shape, dtype=bool)
    return values > eps * top


def spectral_apply(h, fn, support_only: bool = True) -> np.ndarray:
    """Apply ``fn`` to the eigenvalues of a PSD matrix.

    With ``support_only`` the function is evaluated on the support only and
    the kernel is mapped to zero.
    """
    w, v = _psd_eig(np.asarray(h, dtype=complex))
    if support_only:
        mask = support_mask(w)
        fw = np.zeros_like(w)
        fw[mask] = fn(w[mask])
    else:
        fw = fn(w)
    return (v * fw) @ dagger(v)


def matrix_power(h, t: float) -> np.ndarray:
    """PSD matrix raised to a real power ``t``.

    Powers are taken on the support only, so ``matrix_power(h, 0)`` is the
    support projector and ``matrix_power(h, -1)`` the support-restricted
    inverse.  Eigenvalues below the support cutoff count as zero for positive
    ``t`` as well; otherwise roundoff of size 1e-17 would turn into 1e-9 under
    a square root.
    """
    if t == 1:
        w, v = _psd_eig(np.asarray(h, dtype=complex))
        return (v * w) @ dagger(v)
    return spectral_apply(h, lambda w: w ** t)


def support_projector(h) -> np.ndarray:
    return matrix_power(h, 0.0)


def matrix_log(h) -> np.ndarray:
    """Support-restricted natural logarithm of a PSD matrix."""
    return spectral_apply(h, np.log)


def singular_values(x) -> np.ndarray:
    """Singular values, descending.  Hermitian input goes through ``eigvalsh``."""
    x = np.asarray(x, dtype=complex)
    if x.shape[0] == x.shape[1] and op_norm_abs(x - dagger(x)) <= 1e-14 * max(1.0, op_norm_abs(x)):
        s = np.abs(np.linalg.eigvalsh(0.5 * (x + dagger(x))))
        return np.sort(s)[::-1]
    return np.linalg.svd(x, compute_uv=False)


def _check_order(p: float) -> float:
    p = float(p)
    if p == 0.0 or math.isnan(p):
        raise ValueError("norm order must be a nonzero real or inf")
    if p < 0 and math.isinf(p):
        raise ValueError("norm order -inf is not supported")
    return p


def norm_from_singular_values(s: np.ndarray, p: float) -> float:
    p = _check_order(p)
    s = np.asarray(s, dtype=float)
    if s.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.max(s))
    if p < 0:
        s = s[support_mask(s)]
        if s.size == 0:
            # empty support; the convention gives the zero operator norm 0
            return 0.0
        return float(np.sum(s ** p) ** (1.0 / p))
    top = float(np.max(s))
    if top == 0.0:
        return 0.0
    if p < 1:
        # small p amplifies roundoff in numerically zero values
        s = s[support_mask(s)]
    # factor out the largest value to avoid overflow for large p
    return top * float(np.sum((s / top) ** p) ** (1.0 / p))


def schatten_norm(x, p: float) -> float:
    """Schatten ``p``-(quasi-)norm ``(sum s_i^p)^(1/p)``.

    ``p`` may be any nonzero real or ``math.inf``.  For ``0 < p < 1`` the value
    is a quasi-norm; for ``p < 0`` it runs over the supported singular values.
    """
    p = _check_order(p)
    return norm_from_singular_values(singular_values(x), p)


def holder_conjugate(p: float) -> float:
    """Return ``p'`` with ``1/p + 1/p' = 1``; the conjugate of 1 is inf and vice versa."""
    p = _check_order(p)
    if math.isinf(p):
        return 1.0
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def gamma_map(sigma, x, s: float) -> np.ndarray:
    """The sandwich ``sigma^(s/2) X sigma^(s/2)`` (support convention for s <= 0)."""
    sigma = np.asarray(sigma, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if sigma.shape != x.shape or x.shape[0] != x.shape[1]:
        raise ValueError(f"dimension mismatch: sigma {sigma.shape}, X {x.shape}")
    half = matrix_power(sigma, 0.5 * s)
    return half @ x @ half


def weighted_norm(x, p: float, sigma) -> float:
    """``||X||_{p,sigma} = || sigma^(1/2p) X sigma^(1/2p) ||_p``."""
    p = _check_order(p)
    inv = 0.0 if math.isinf(p) else 1.0 / p
    return schatten_norm(gamma_map(sigma, x, inv), p)
