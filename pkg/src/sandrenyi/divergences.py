"""Closed-form Rényi quantities, in nats.

Orders are floats, ``math.inf``, or :data:`ONE` (the relative-entropy limit).
Floats within ``1e-6`` of 1 are rejected: ask for ``ONE`` instead.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .linalg import (
    SUPPORT_EPS,
    _psd_eig,
    dagger,
    gamma_map,
    holder_conjugate,
    matrix_log,
    matrix_power,
    norm_from_singular_values,
    psd_eigvals,
    support_mask,
    support_projector,
)

ONE = "one"
ALPHA_ONE_GAP = 1e-6
SUPPORT_TOL = 1e-9
SIMPLEX_TOL = 1e-10


class DivergenceValue(NamedTuple):
    value: float
    support_violated: bool = False

    def __float__(self):
        return float(self.value)


def check_alpha(alpha):
    """Normalize an order: returns a float > 0 (possibly inf) or ``ONE``."""
    if isinstance(alpha, str):
        key = alpha.strip().lower()
        if key in ("one", "1"):
            return ONE
        if key in ("inf", "infinity", "∞"):
            return math.inf
        alpha = float(key)
    a = float(alpha)
    if math.isnan(a) or a <= 0:
        raise ValueError(f"order must be positive, got {alpha!r}")
    if abs(a - 1.0) <= ALPHA_ONE_GAP:
        raise ValueError(f"order {alpha!r} is too close to 1; request ONE explicitly")
    return a


def support_violation(rho, sigma) -> float:
    """Size of the part of ``rho`` living off the support of ``sigma``."""
    rho = np.asarray(rho, dtype=complex)
    q = np.eye(rho.shape[0]) - support_projector(sigma)
    r = q @ rho @ q
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (r + dagger(r))))))


def _pair(rho, sigma):
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.ndim != 2 or rho.shape != sigma.shape or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    return rho, sigma


def _simplex(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or np.any(p < -SIMPLEX_TOL) or abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError("input is not a probability vector")
    return np.clip(p, 0.0, None)


def classical_renyi(p, q, alpha) -> DivergenceValue:
    p, q = _simplex(p), _simplex(q)
    if p.shape != q.shape:
        raise ValueError("probability vectors differ in length")
    a = check_alpha(alpha)
    pos = p > SUPPORT_EPS
    zero_q = q <= SUPPORT_EPS
    violated = bool(np.any(pos & zero_q))
    both = pos & ~zero_q
    if a == ONE:
        if violated:
            return DivergenceValue(math.inf, True)
        return DivergenceValue(float(np.sum(p[pos] * (np.log(p[pos]) - np.log(q[pos])))))
    if violated and a > 1:
        return DivergenceValue(math.inf, True)
    if math.isinf(a):
        return DivergenceValue(float(np.log(np.max(p[both] / q[both]))))
    s = float(np.sum(p[both] ** a * q[both] ** (1.0 - a)))
    return DivergenceValue(math.log(s) / (a - 1.0), violated)


def _sandwich_value(rho, sigma, a: float) -> float:
    # norm form: alpha' log || sigma^(-1/2a') rho sigma^(-1/2a') ||_alpha
    if math.isinf(a):
        m = gamma_map(sigma, rho, -1.0)
        return math.log(float(psd_eigvals(m)[-1]))
    ap = holder_conjugate(a)
    m = gamma_map(sigma, rho, -1.0 / ap)
    norm = norm_from_singular_values(psd_eigvals(m), a)
    if norm == 0.0:
        return math.inf
    return ap * math.log(norm)


def sandwiched_renyi(rho, sigma, alpha) -> DivergenceValue:
    """Sandwiched Rényi divergence ``D_alpha(rho || sigma)``.

    For ``alpha > 1`` (and inf) the value is ``+inf`` whenever ``rho`` is not
    supported inside ``sigma``.  For ``alpha < 1`` no support test applies;
    incomparable supports still give a finite number computed with
    support-restricted powers, reported with ``support_violated=True``.
    """
    rho, sigma = _pair(rho, sigma)
    a = check_alpha(alpha)
    if a == ONE:
        return umegaki(rho, sigma)
    violated = support_violation(rho, sigma) > SUPPORT_TOL
    if violated and a > 1:
        return DivergenceValue(math.inf, True)
    return DivergenceValue(_sandwich_value(rho, sigma, a), violated)


def sandwiched_renyi_trace_form(rho, sigma, alpha) -> DivergenceValue:
    """Same quantity written as ``log tr(sigma^s rho sigma^s)^alpha / (alpha - 1)``.

    Kept as an independent route for cross-checking; finite orders only.
    """
    rho, sigma = _pair(rho, sigma)
    a = check_alpha(alpha)
    if a == ONE or math.isinf(a):
        raise ValueError("trace form needs a finite order != 1")
    violated = support_violation(rho, sigma) > SUPPORT_TOL
    if violated and a > 1:
        return DivergenceValue(math.inf, True)
    s = matrix_power(sigma, (1.0 - a) / (2.0 * a))
    q = np.trace(matrix_power(s @ rho @ s, a)).real
    if q <= 0.0:
        return DivergenceValue(math.inf, violated)
    return DivergenceValue(math.log(q) / (a - 1.0), violated)


def umegaki(rho, sigma) -> DivergenceValue:
    """Relative entropy ``tr rho (log rho - log sigma)`` with support-restricted logs."""
    rho, sigma = _pair(rho, sigma)
    if support_violation(rho, sigma) > SUPPORT_TOL:
        return DivergenceValue(math.inf, True)
    w = psd_eigvals(rho)
    w = w[support_mask(w)]
    neg_entropy = float(np.sum(w * np.log(w)))
    cross = float(np.trace(rho @ matrix_log(sigma)).real)
    return DivergenceValue(neg_entropy - cross)


def renyi_entropy(rho, alpha) -> float:
    """``log(tr rho^alpha) / (1 - alpha)``; ``ONE`` gives the von Neumann entropy."""
    a = check_alpha(alpha)
    w = psd_eigvals(rho)
    w = w[support_mask(w)]
    if a == ONE:
        return float(-np.sum(w * np.log(w)))
    if math.isinf(a):
        return -math.log(float(w[-1]))
    return math.log(float(np.sum(w ** a))) / (1.0 - a)


def nats_to_bits(value: float) -> float:
    return value / math.log(2.0)
