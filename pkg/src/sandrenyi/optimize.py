"""Optimization over density matrices and the entropic quantities built on it.

States are parametrized as ``sigma = A A^+ / tr(A A^+)`` with an unconstrained
complex square factor ``A``.  Each restart runs gradient descent on the real
coordinates of ``A`` with central-difference gradients, Barzilai-Borwein trial
steps and step halving until the value decreases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .divergences import ONE, check_alpha, sandwiched_renyi
from .linalg import dagger, holder_conjugate, matrix_power, norm_from_singular_values, psd_eigvals
from .states import (
    Channel,
    DensityMatrix,
    apply_channel,
    complex_gaussian,
    derive_seed,
    make_rng,
    partial_trace,
    purify,
)

BOUNDARY_EIG = 1e-6


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    max_iters: int = 2000
    step_init: float = 0.1
    grad_eps: float = 1e-6
    tol: float = 1e-9
    seed: int = 0
    patience: int = 20

    def __post_init__(self):
        for name in ("restarts", "max_iters", "patience"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        for name in ("step_init", "grad_eps", "tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.tol >= 1e-3:
            raise ValueError("tol must be below 1e-3")


@dataclass
class OptimizerResult:
    value: float
    argopt: DensityMatrix
    converged: bool
    iterations: int
    best_restart: int
    boundary: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def conclusive(self) -> bool:
        return self.converged and not self.boundary


# -- generic descent -------------------------------------------------------------

def _to_state(x: np.ndarray, d: int) -> np.ndarray:
    a = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
    m = a @ dagger(a)
    return m / np.trace(m).real


def _to_coords(a: np.ndarray) -> np.ndarray:
    x = np.concatenate([a.real.ravel(), a.imag.ravel()])
    return x / np.linalg.norm(x)


def _central_gradient(f, x, h):
    g = np.empty_like(x)
    for i in range(x.size):
        e = x[i]
        x[i] = e + h
        fp = f(x)
        x[i] = e - h
        fm = f(x)
        x[i] = e
        g[i] = (fp - fm) / (2.0 * h)
    return g


def descend(f: Callable[[np.ndarray], float], x0: np.ndarray, config: OptimizerConfig,
            grad: Callable | None = None, normalize: bool = True):
    """Minimize ``f`` over real vectors from ``x0``.

    Returns ``(x, fx, converged, iterations, note)``.  ``note`` is ``None`` or a
    short reason string when the run was aborted.
    """
    if grad is None:
        def grad(x):
            return _central_gradient(f, x, config.grad_eps)
    x = np.array(x0, dtype=float)
    if normalize:
        x /= np.linalg.norm(x)
    fx = f(x)
    if not np.isfinite(fx):
        return x, fx, False, 0, "non-finite start"
    g = grad(x)
    if not np.all(np.isfinite(g)):
        return x, fx, False, 0, "non-finite gradient"
    step = config.step_init
    history = [fx]
    for it in range(1, config.max_iters + 1):
        while True:
            xn = x - step * g
            if normalize:
                xn /= np.linalg.norm(xn)
            fn = f(xn)
            if math.isnan(fn):
                return x, fx, False, it, "objective returned NaN"
            if fn < fx:
                break
            step *= 0.5
            if step < 1e-16:
                # no descent direction left at working precision
                return x, fx, True, it, None
        gn = grad(xn)
        if not np.all(np.isfinite(gn)):
            return xn, fn, False, it, "non-finite gradient"
        s = xn - x
        y = gn - g
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 0 else 2.0 * step
        step = min(max(step, 1e-12), 1e4)
        x, fx, g = xn, fn, gn
        history.append(fx)
        if len(history) > config.patience and history[-1 - config.patience] - fx < config.tol:
            return x, fx, True, it, None
    return x, fx, False, config.max_iters, None


def _start_factor(state: np.ndarray) -> np.ndarray:
    return matrix_power(state, 0.5)


def optimize_over_density(objective: Callable[[np.ndarray], float], dim: int,
                          direction: str = "min", config: OptimizerConfig | None = None,
                          init: Sequence | None = None) -> OptimizerResult:
    """Best value of ``objective`` over ``dim``-dimensional density matrices.

    ``init`` holds warm-start states; they take the first restart slots and
    the remaining slots start from seeded random factors.  The winner is the
    best value, ties broken by the lower restart index.
    """
    config = config or OptimizerConfig()
    if direction not in ("min", "max"):
        raise ValueError("direction must be 'min' or 'max'")
    sign = 1.0 if direction == "min" else -1.0
    init = [np.asarray(s, dtype=complex) for s in (init or [])]
    n_runs = max(config.restarts, len(init))

    def f(x):
        v = float(objective(_to_state(x, dim)))
        return sign * v if not math.isnan(v) else math.nan

    runs = []
    aborted = {}
    for r in range(n_runs):
        if r < len(init):
            x0 = _to_coords(_start_factor(init[r]))
            if not np.isfinite(f(x0)):
                mixed = 0.999 * init[r] + 0.001 * np.eye(dim) / dim
                x0 = _to_coords(_start_factor(mixed))
        else:
            rng = make_rng(derive_seed(config.seed, r))
            x0 = _to_coords(complex_gaussian(rng, (dim, dim)))
        x, fx, conv, its, note = descend(f, x0, config)
        if note is not None:
            aborted[r] = note
            continue
        runs.append((fx, r, x, conv, its))
    if not runs:
        raise RuntimeError(f"all restarts aborted: {aborted}")
    fx, r, x, conv, its = min(runs, key=lambda t: (t[0], t[1]))
    state = _to_state(x, dim)
    lam_min = float(np.linalg.eigvalsh(state)[0])
    return OptimizerResult(
        value=sign * fx,
        argopt=DensityMatrix(state),
        converged=conv,
        iterations=its,
        best_restart=r,
        boundary=lam_min < BOUNDARY_EIG,
        diagnostics={
            "restart_values": {int(t[1]): sign * t[0] for t in sorted(runs, key=lambda t: t[1])},
            "aborted": aborted,
            "min_eigenvalue": lam_min,
        },
    )


# -- objectives ----------------------------------------------------------------

def _bipartite(rho, dims=None) -> tuple[np.ndarray, int, int]:
    m = np.asarray(rho, dtype=complex)
    dims = tuple(dims if dims is not None else getattr(rho, "dims", ()))
    if len(dims) != 2 or dims[0] * dims[1] != m.shape[0]:
        raise ValueError("a bipartite state with declared dims (dA, dB) is required")
    return m, dims[0], dims[1]


def _power_with_support(sigma: np.ndarray, t: float) -> tuple[np.ndarray, bool]:
    w, v = np.linalg.eigh(0.5 * (sigma + dagger(sigma)))
    top = float(w[-1])
    full = bool(w[0] > 1e-10 * top)
    w = np.clip(w, 0.0, None)
    mask = w > 1e-10 * top
    fw = np.zeros_like(w)
    fw[mask] = w[mask] ** t
    return (v * fw) @ dagger(v), full


def _sandwich_norm(m: np.ndarray, a: float) -> float:
    return norm_from_singular_values(psd_eigvals(m), a)


def product_divergence(rho_ab: np.ndarray, left: np.ndarray, alpha, dims) -> Callable:
    """``sigma_B -> D_alpha(rho_AB || left (x) sigma_B)`` with a precomputed left factor."""
    a = check_alpha(alpha)
    d_a, d_b = dims
    if a == ONE:
        return lambda s: sandwiched_renyi(rho_ab, np.kron(left, s), ONE).value
    ap = 1.0 if math.isinf(a) else holder_conjugate(a)
    t = -0.5 / ap
    left_pow = matrix_power(left, t)

    def objective(sigma):
        sig_pow, full = _power_with_support(sigma, t)
        if not full:
            return sandwiched_renyi(rho_ab, np.kron(left, sigma), a).value
        k = np.kron(left_pow, sig_pow)
        m = k @ rho_ab @ k
        if math.isinf(a):
            return math.log(float(psd_eigvals(m)[-1]))
        nrm = _sandwich_norm(m, a)
        return ap * math.log(nrm) if nrm > 0 else math.inf

    return objective


def _opt_config(config, **overrides) -> OptimizerConfig:
    config = config or OptimizerConfig()
    return replace(config, **overrides) if overrides else config


def conditional_renyi_entropy(rho_ab, alpha, config: OptimizerConfig | None = None,
                              dims=None, init=()) -> OptimizerResult:
    """``H_alpha(A|B) = -inf_sigma D_alpha(rho_AB || I_A (x) sigma_B)``.

    ``argopt`` is the minimizing ``sigma_B``.  ``rho_B`` is always a warm start,
    after any states passed in ``init``.
    """
    m, d_a, d_b = _bipartite(rho_ab, dims)
    obj = product_divergence(m, np.eye(d_a, dtype=complex), alpha, (d_a, d_b))
    rho_b = partial_trace(m, [1], (d_a, d_b))
    res = optimize_over_density(obj, d_b, "min", config, init=[*init, rho_b])
    res.value = -res.value
    return res


def mutual_info_primal(rho_ab, alpha, config: OptimizerConfig | None = None,
                       dims=None, init=()) -> OptimizerResult:
    """``I_alpha(A;B) = min_sigma D_alpha(rho_AB || rho_A (x) sigma_B)``."""
    m, d_a, d_b = _bipartite(rho_ab, dims)
    rho_a = partial_trace(m, [0], (d_a, d_b))
    rho_b = partial_trace(m, [1], (d_a, d_b))
    obj = product_divergence(m, rho_a, alpha, (d_a, d_b))
    return optimize_over_density(obj, d_b, "min", config, init=[*init, rho_b])


def _greater_than_one(alpha) -> float:
    a = check_alpha(alpha)
    if a == ONE or a <= 1:
        raise ValueError("this quantity needs alpha > 1")
    return a


def conjugate_order(alpha: float) -> float:
    """The order beta with ``1/alpha + 1/beta = 2``."""
    if math.isinf(alpha):
        return 0.5
    return alpha / (2.0 * alpha - 1.0)


def mutual_info_dual(rho_ab, alpha, config: OptimizerConfig | None = None,
                     dims=None) -> OptimizerResult:
    """Dual form of ``I_alpha(A;B)`` for ``alpha > 1``, a maximum over ``tau_C``.

    Uses a purification ``psi_ABC`` of ``rho_AB`` and returns
    ``alpha' log max_tau || tr_AC[(rho_A^(-1/2a') (x) I (x) tau^(1/2a')) psi] ||_beta``.
    """
    a = _greater_than_one(alpha)
    m, d_a, d_b = _bipartite(rho_ab, dims)
    beta = conjugate_order(a)
    ap = 1.0 if math.isinf(a) else holder_conjugate(a)
    psi = purify(m).amplitudes.reshape(d_a, d_b, d_a * d_b)
    d_c = d_a * d_b
    rho_a = partial_trace(m, [0], (d_a, d_b))
    left = matrix_power(rho_a, -0.5 / ap)
    psi = np.einsum("xa,abc->xbc", left, psi)

    def objective(tau):
        phi = psi @ matrix_power(tau, 0.5 / ap).T
        mb = np.einsum("abc,adc->bd", phi, phi.conj())
        return norm_from_singular_values(psd_eigvals(mb), beta)

    rho_c = partial_trace(DensityMatrix(np.outer(psi.ravel(), psi.ravel().conj()) /
                                        np.vdot(psi.ravel(), psi.ravel()).real),
                          [2], (d_a, d_b, d_c))
    res = optimize_over_density(objective, d_c, "max", config, init=[rho_c])
    res.diagnostics["norm_value"] = res.value
    res.value = ap * math.log(res.value)
    return res


def minimax_objective(rho_bc, alpha, sigma, tau, dims=None) -> float:
    """``f(sigma, tau) = tr[rho_BC (sigma^(-1/a') (x) tau^(1/a'))]``."""
    a = _greater_than_one(alpha)
    m, d_b, d_c = _bipartite(rho_bc, dims)
    ap = 1.0 if math.isinf(a) else holder_conjugate(a)
    op = np.kron(matrix_power(sigma, -1.0 / ap), matrix_power(tau, 1.0 / ap))
    return float(np.trace(m @ op).real)


def _best_tau_value(m, d_b, d_c, a, ap):
    def value(sigma):
        k = np.kron(matrix_power(sigma, -0.5 / ap), np.eye(d_c))
        x = partial_trace(k @ m @ k, [1], (d_b, d_c))
        return norm_from_singular_values(psd_eigvals(x), a)
    return value


def _best_sigma_value(m, d_b, d_c, a, ap):
    beta = conjugate_order(a)

    def value(tau):
        k = np.kron(np.eye(d_b), matrix_power(tau, 0.5 / ap))
        y = partial_trace(k @ m @ k, [0], (d_b, d_c))
        return norm_from_singular_values(psd_eigvals(y), beta)
    return value


def minimax_value(rho_bc, alpha, order: str = "infsup", config: OptimizerConfig | None = None,
                  dims=None, sigma=None, tau=None) -> OptimizerResult:
    """inf-sup or sup-inf of :func:`minimax_objective` over density matrices.

    The inner problem is solved by its best response in closed form
    (Hölder duality for the sup over ``tau``, the reverse duality for the inf
    over ``sigma``), the outer one numerically.  Passing ``sigma`` and/or
    ``tau`` restricts that variable to a single point.
    """
    a = _greater_than_one(alpha)
    if order not in ("infsup", "supinf"):
        raise ValueError("order must be 'infsup' or 'supinf'")
    m, d_b, d_c = _bipartite(rho_bc, dims)
    ap = 1.0 if math.isinf(a) else holder_conjugate(a)
    sup_tau = _best_tau_value(m, d_b, d_c, a, ap)
    inf_sigma = _best_sigma_value(m, d_b, d_c, a, ap)

    def fixed(value, state):
        return OptimizerResult(value, DensityMatrix(np.asarray(state, dtype=complex)),
                               True, 0, 0, diagnostics={"fixed": True})

    if sigma is not None and tau is not None:
        return fixed(minimax_objective(m, a, sigma, tau, (d_b, d_c)), sigma)
    if sigma is not None:
        return fixed(sup_tau(np.asarray(sigma, dtype=complex)), sigma)
    if tau is not None:
        return fixed(inf_sigma(np.asarray(tau, dtype=complex)), tau)
    if order == "infsup":
        rho_b = partial_trace(m, [0], (d_b, d_c))
        return optimize_over_density(sup_tau, d_b, "min", config, init=[rho_b])
    rho_c = partial_trace(m, [1], (d_b, d_c))
    return optimize_over_density(inf_sigma, d_c, "max", config, init=[rho_c])


# -- alpha-Holevo information ----------------------------------------------------

@dataclass(frozen=True)
class Ensemble:
    probabilities: np.ndarray
    vectors: np.ndarray  # (k, d_in) unit rows

    def states(self) -> list[np.ndarray]:
        return [np.outer(v, v.conj()) for v in self.vectors]


def _ensemble_from_params(theta: np.ndarray, k: int, d: int) -> Ensemble:
    z = theta[:k]
    p = np.exp(z - z.max())
    p /= p.sum()
    raw = theta[k:]
    vec = (raw[: k * d] + 1j * raw[k * d:]).reshape(k, d)
    vec = vec / np.linalg.norm(vec, axis=1, keepdims=True)
    return Ensemble(p, vec)


def _params_from_ensemble(ens: Ensemble) -> np.ndarray:
    p = np.clip(np.asarray(ens.probabilities, dtype=float), 1e-300, None)
    vec = np.asarray(ens.vectors, dtype=complex)
    return np.concatenate([np.log(p), vec.real.ravel(), vec.imag.ravel()])


def cq_output(channel: Channel, ens: Ensemble) -> tuple[np.ndarray, np.ndarray]:
    """Block-diagonal ``sum_x p_x |x><x| (x) Phi(psi_x)`` and the diagonal ``rho_X``."""
    k = ens.probabilities.size
    d = channel.output_dim
    out = np.zeros((k * d, k * d), dtype=complex)
    for x in range(k):
        out[x * d:(x + 1) * d, x * d:(x + 1) * d] = ens.probabilities[x] * apply_channel(
            channel, np.outer(ens.vectors[x], ens.vectors[x].conj()))
    return out, np.diag(ens.probabilities).astype(complex)


def holevo_information_at(channel: Channel, ens: Ensemble, alpha, config=None,
                          init_sigma=None) -> OptimizerResult:
    """``I_alpha(X;B)`` of the c-q output produced by one fixed ensemble."""
    rho_xb, rho_x = cq_output(channel, ens)
    k = ens.probabilities.size
    obj = product_divergence(rho_xb, rho_x, alpha, (k, channel.output_dim))
    rho_b = partial_trace(rho_xb, [1], (k, channel.output_dim))
    init = [rho_b] if init_sigma is None else [init_sigma]
    return optimize_over_density(obj, channel.output_dim, "min", config, init=init)


@dataclass
class HolevoResult:
    """Lower bound on ``chi_alpha``, attained by ``ensemble``."""

    value: float
    ensemble: Ensemble
    sigma: DensityMatrix
    converged: bool
    iterations: int
    best_restart: int
    lower_bound: bool = True
    diagnostics: dict = field(default_factory=dict)


def holevo_alpha(channel: Channel, k: int, alpha, config: OptimizerConfig | None = None,
                 init_ensembles: Sequence[Ensemble] = (), init_sigmas: Sequence | None = None,
                 inner_config: OptimizerConfig | None = None) -> HolevoResult:
    """Heuristic lower bound on the alpha-Holevo information of ``channel``.

    Maximizes ``I_alpha(X;B)`` over ``k`` pure input states and their
    probabilities.  The outer ascent differentiates the inner objective at the
    current minimizing ``sigma_B`` (envelope rule) and accepts a step only
    when the re-optimized inner value improves.  Only a lower bound: nothing
    certifies the supremum.
    """
    if k < 1:
        raise ValueError("ensemble size must be at least 1")
    config = config or OptimizerConfig()
    inner = inner_config or replace(config, restarts=1, patience=5)
    d_in, d_out = channel.input_dim, channel.output_dim
    alpha = check_alpha(alpha)
    n_runs = max(config.restarts, len(init_ensembles))
    init_sigmas = list(init_sigmas or [])

    runs = []
    for r in range(n_runs):
        if r < len(init_ensembles):
            if init_ensembles[r].vectors.shape != (k, d_in):
                raise ValueError("initial ensemble does not match (k, input_dim)")
            theta0 = _params_from_ensemble(init_ensembles[r])
            sigma0 = init_sigmas[r] if r < len(init_sigmas) else None
        else:
            rng = make_rng(derive_seed(config.seed, 1000 + r))
            theta0 = np.concatenate([0.1 * rng.standard_normal(k), rng.standard_normal(2 * k * d_in)])
            sigma0 = None
        runs.append(_holevo_ascent(channel, k, alpha, theta0, sigma0, config, inner, r))
    best = max(runs, key=lambda t: (t.value, -t.best_restart))
    best.diagnostics["restart_values"] = {t.best_restart: t.value for t in runs}
    return best


def _holevo_ascent(channel, k, alpha, theta0, sigma0, config, inner, restart) -> HolevoResult:
    d_in, d_out = channel.input_dim, channel.output_dim

    def inner_value(theta, sigma):
        ens = _ensemble_from_params(theta, k, d_in)
        return holevo_information_at(channel, ens, alpha, inner, sigma)

    def at_sigma(theta, sigma):
        rho_xb, rho_x = cq_output(channel, _ensemble_from_params(theta, k, d_in))
        return product_divergence(rho_xb, rho_x, alpha, (k, d_out))(np.asarray(sigma))

    def envelope_grad(theta, sigma):
        # d/dtheta of the inner objective at the fixed minimizer sigma
        return _central_gradient(lambda t: at_sigma(t, sigma), theta.copy(), config.grad_eps)

    theta = np.array(theta0, dtype=float)
    cur = inner_value(theta, sigma0)
    g = envelope_grad(theta, cur.argopt)
    step = config.step_init
    history = [cur.value]
    converged = False
    its = 0
    for its in range(1, config.max_iters + 1):
        if not np.any(np.abs(g) > 1e-12):
            converged = True
            break
        while True:
            cand = theta + step * g
            # the inner minimum never exceeds the objective at the old minimizer
            if at_sigma(cand, cur.argopt) > cur.value:
                res = inner_value(cand, cur.argopt)
                if res.value > cur.value:
                    break
            step *= 0.5
            if step < 1e-16:
                break
        if step < 1e-16:
            converged = True
            break
        gn = envelope_grad(cand, res.argopt)
        s = cand - theta
        y = g - gn
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 0 else 2.0 * step
        step = min(max(step, 1e-12), 1e4)
        theta, cur, g = cand, res, gn
        history.append(cur.value)
        if len(history) > config.patience and cur.value - history[-1 - config.patience] < config.tol:
            converged = True
            break
    return HolevoResult(
        value=cur.value,
        ensemble=_ensemble_from_params(theta, k, d_in),
        sigma=cur.argopt,
        converged=converged,
        iterations=its,
        best_restart=restart,
        diagnostics={"inner_converged": cur.converged},
    )
