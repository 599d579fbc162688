"""Randomized verification suites.

Each check draws independent random instances per trial from a seed derived
from ``(master seed, check id, trial index)``, so reports do not depend on
execution order or on how trials are spread over worker processes.

A trial yields a list of labelled slacks (positive means the inequality
holds with room to spare).  A trial fails when some slack drops below minus
its tolerance; optimizer-backed trials may instead be marked inconclusive,
which is counted separately and never treated as a failure.
"""

from __future__ import annotations

import itertools
import json
import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .divergences import sandwiched_renyi, umegaki, ONE
from .io import density_to_json, dumps, matrix_to_json, channel_to_json
from .linalg import dagger, gamma_map, holder_conjugate, matrix_power, schatten_norm, weighted_norm
from .optimize import (
    Ensemble,
    OptimizerConfig,
    conditional_renyi_entropy,
    conjugate_order,
    holevo_alpha,
    minimax_value,
    mutual_info_primal,
)
from .states import (
    Channel,
    DensityMatrix,
    apply_channel,
    complex_gaussian,
    depolarizing_channel,
    derive_seed,
    haar_unitary,
    make_rng,
    partial_trace,
    partial_trace_channel,
    permute_systems,
    random_channel,
    random_density,
    random_pure,
    tensor_channel,
    unitary_channel,
)

INF = math.inf


@dataclass(frozen=True)
class TrialPlan:
    """What to run.  ``None`` fields fall back to the check's own defaults."""

    dims: tuple[int, ...] | None = None
    alphas: tuple[float, ...] | None = None
    trials: int | None = None
    seed: int = 42
    tolerances: Mapping[str, float] = field(default_factory=dict)
    workers: int = 1
    failure_dir: str | None = None

    def __post_init__(self):
        if self.dims is not None and (not self.dims or any(int(d) < 2 for d in self.dims)):
            raise ValueError("dims must all be >= 2")
        if self.trials is not None and int(self.trials) < 1:
            raise ValueError("trial count must be >= 1")
        if self.alphas is not None and (not self.alphas or any(not a > 0 for a in self.alphas)):
            raise ValueError("alphas must be positive")
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class Context:
    """A plan resolved against one check's defaults; handed to trial functions."""

    check: str
    dims: tuple[int, ...]
    alphas: tuple[float, ...]
    trials: int
    seed: int
    tolerances: Mapping[str, float]

    def rng(self, index: int) -> np.random.Generator:
        return make_rng(derive_seed(self.seed, _check_id(self.check), index))

    def tol(self, label: str, default: float) -> float:
        return float(self.tolerances.get(label, default))


@dataclass
class TrialOutcome:
    slacks: list = field(default_factory=list)  # (label, slack, tolerance)
    inconclusive: bool = False
    warnings: int = 0
    instance: dict = field(default_factory=dict)

    def add(self, label: str, slack: float, tol: float):
        self.slacks.append((label, float(slack), float(tol)))

    @property
    def failed(self) -> bool:
        return not self.inconclusive and any(s < -t for _, s, t in self.slacks)

    @property
    def worst(self) -> float:
        return min((s for _, s, _ in self.slacks), default=INF)


@dataclass
class PropertyReport:
    check: str
    trials: int
    failures: int
    inconclusive: int
    worst_margin: float
    seed: int
    elapsed_s: float
    failure_instances: list = field(default_factory=list)
    warnings: int = 0

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d["elapsed_s"] = 0.0
        return d

    def to_json(self, timing: bool = True) -> str:
        return dumps(self.to_dict(timing))


def _check_id(name: str) -> int:
    return zlib.crc32(name.encode())


# -- instance helpers -------------------------------------------------------------

def _seed(rng) -> int:
    return int(rng.integers(0, 2 ** 63))


def _rand_state(rng, d, rank=None) -> DensityMatrix:
    return random_density(d, rank, seed=_seed(rng))


def _rand_rank(rng, d) -> int:
    return int(rng.integers(1, d + 1))


def _orthogonal_pair(rng, d) -> tuple[DensityMatrix, DensityMatrix]:
    """A pure state orthogonal to the support of a rank-(d-1) state."""
    u = haar_unitary(d, rng)
    w = rng.random(d - 1) + 0.1
    sigma = (u[:, :-1] * (w / w.sum())) @ dagger(u[:, :-1])
    rho = np.outer(u[:, -1], u[:, -1].conj())
    return DensityMatrix(rho), DensityMatrix(sigma)


def _value(rho, sigma, alpha) -> float:
    return sandwiched_renyi(rho, sigma, alpha).value


# -- closed-form checks -------------------------------------------------------------

def trial_positivity(ctx: Context, index: int) -> TrialOutcome:
    rng = ctx.rng(index)
    d = ctx.dims[index % len(ctx.dims)]
    if index % 7 == 3:
        rho, sigma = _orthogonal_pair(rng, d)
    else:
        rho = _rand_state(rng, d, _rand_rank(rng, d))
        sigma = _rand_state(rng, d, _rand_rank(rng, d))
    out = TrialOutcome(instance={"rho": density_to_json(rho), "sigma": density_to_json(sigma)})
    distance = schatten_norm(rho.matrix - sigma.matrix, 1)
    for a in ctx.alphas:
        v = _value(rho, sigma, a)
        out.add(f"positivity[{a}]", v, ctx.tol("positivity", 1e-9))
        out.add(f"self[{a}]", -abs(_value(rho, rho, a)), ctx.tol("self", 1e-9))
        # strictness proxy: reported as a warning only
        if distance >= 0.1 and v < 1e-6:
            out.warnings += 1
    return out


def _dpi_channel(rng, kind: str, d: int):
    """Returns (channel, input dim)."""
    if kind == "partial_trace":
        return partial_trace_channel((d, 2), [0]), 2 * d
    if kind == "unitary":
        return unitary_channel(haar_unitary(d, rng)), d
    if kind == "depolarizing":
        return depolarizing_channel(d), d
    out_dim = int(rng.integers(2, 4))
    env = int(rng.integers(1, 5))
    while out_dim * env < d:
        env += 1
    return random_channel(d, out_dim, env, seed=_seed(rng)), d


DPI_KINDS = ("stinespring", "partial_trace", "unitary", "depolarizing")


def trial_dpi(ctx: Context, index: int) -> TrialOutcome:
    rng = ctx.rng(index)
    d = ctx.dims[index % len(ctx.dims)]
    kind = DPI_KINDS[(index // len(ctx.dims)) % len(DPI_KINDS)]
    channel, d_in = _dpi_channel(rng, kind, d)
    rho = _rand_state(rng, d_in, _rand_rank(rng, d_in))
    sigma = _rand_state(rng, d_in)
    out = TrialOutcome(instance={"kind": kind, "rho": density_to_json(rho),
                                 "sigma": density_to_json(sigma), "channel": channel_to_json(channel)})
    prho, psigma = apply_channel(channel, rho), apply_channel(channel, sigma)
    for a in ctx.alphas:
        margin = _value(rho, sigma, a) - _value(prho, psigma, a)
        if math.isnan(margin):
            margin = -INF
        out.add(f"dpi[{a}]", margin, ctx.tol("dpi", 1e-8))
        if kind == "unitary":
            out.add(f"unitary-equality[{a}]", -abs(margin), ctx.tol("unitary-equality", 1e-9))
    return out


def _contraction_ratio(channel: Channel, sigma, psigma, x, alpha) -> float:
    num = weighted_norm(gamma_map(psigma, apply_channel(channel, gamma_map(sigma, x, 1.0)), -1.0),
                        alpha, psigma)
    return num / weighted_norm(x, alpha, sigma)


def trial_contraction(ctx: Context, index: int, samples: int = 20) -> TrialOutcome:
    rng = ctx.rng(index)
    d = ctx.dims[index % len(ctx.dims)]
    sigma = _rand_state(rng, d)
    for _ in range(100):
        channel, _ = _dpi_channel(rng, "stinespring", d)
        psigma = apply_channel(channel, sigma)
        w = np.linalg.eigvalsh(psigma)
        if w[0] > 1e-8 * w[-1]:
            break
    out = TrialOutcome(instance={"sigma": density_to_json(sigma), "channel": channel_to_json(channel)})
    xs = [np.eye(d, dtype=complex)]
    g = complex_gaussian(rng, (d, d))
    xs.append(g @ dagger(g))
    while len(xs) < samples:
        g = complex_gaussian(rng, (d, d))
        xs.append(g + dagger(g) if len(xs) % 3 == 0 else g)
    for a in ctx.alphas:
        for j, x in enumerate(xs):
            r = _contraction_ratio(channel, sigma, psigma, x, a)
            out.add(f"contraction[{a}][{j}]", 1.0 - r, ctx.tol("contraction", 1e-8))
    return out


def trial_monotonicity_alpha(ctx: Context, index: int) -> TrialOutcome:
    rng = ctx.rng(index)
    d = ctx.dims[index % len(ctx.dims)]
    rho = _rand_state(rng, d, _rand_rank(rng, d))
    sigma = _rand_state(rng, d)
    out = TrialOutcome(instance={"rho": density_to_json(rho), "sigma": density_to_json(sigma)})
    grid = sorted(ctx.alphas)
    values = [_value(rho, sigma, a) for a in grid]
    lifted = gamma_map(sigma, rho, -1.0)
    powers = [weighted_norm(lifted, a, sigma) ** holder_conjugate(a) for a in grid]
    d_max = _value(rho, sigma, INF)
    for j in range(len(grid) - 1):
        out.add(f"monotone[{grid[j]},{grid[j + 1]}]", values[j + 1] - values[j], ctx.tol("monotone", 1e-9))
        out.add(f"norm-power[{grid[j]},{grid[j + 1]}]", powers[j + 1] - powers[j],
                ctx.tol("norm-power", 1e-9))
    for a, v in zip(grid, values):
        out.add(f"below-max[{a}]", d_max - v, ctx.tol("below-max", 1e-8))
    return out


def convexity_weight(a: float, b: float, c: float) -> float:
    """theta with ``1/b = (1 - theta)/a + theta/c``."""
    ic = 0.0 if math.isinf(c) else 1.0 / c
    return (1.0 / a - 1.0 / b) / (1.0 / a - ic)


def trial_convexity(ctx: Context, index: int) -> TrialOutcome:
    rng = ctx.rng(index)
    d = ctx.dims[index % len(ctx.dims)]
    rho = _rand_state(rng, d, _rand_rank(rng, d))
    sigma = _rand_state(rng, d)
    out = TrialOutcome(instance={"rho": density_to_json(rho), "sigma": density_to_json(sigma)})
    grid = sorted(ctx.alphas)
    scaled = {a: _value(rho, sigma, a) / holder_conjugate(a) for a in grid}
    for a, b, c in itertools.combinations(grid, 3):
        th = convexity_weight(a, b, c)
        rhs = (1 - th) * scaled[a] + th * scaled[c]
        out.add(f"convexity[{a},{b},{c}]", rhs - scaled[b], ctx.tol("convexity", 1e-8))
    return out


INTERPOLATION_PAIRS = ((1.0, 2.0), (1.0, INF), (2.0, 4.0))
INTERPOLATION_THETAS = (0.25, 0.5, 0.75)


def interpolated_order(p0: float, p1: float, theta: float) -> float:
    inv = (1 - theta) / p0 + (0.0 if math.isinf(p1) else theta / p1)
    return INF if inv == 0 else 1.0 / inv


def trial_interpolation(ctx: Context, index: int) -> TrialOutcome:
    rng = ctx.rng(index)
    d = ctx.dims[index % len(ctx.dims)]
    x = complex_gaussian(rng, (d, d))
    sigma = _rand_state(rng, d)
    out = TrialOutcome(instance={"x": matrix_to_json(x), "sigma": density_to_json(sigma)})
    for p0, p1 in INTERPOLATION_PAIRS:
        n0, n1 = weighted_norm(x, p0, sigma), weighted_norm(x, p1, sigma)
        for th in INTERPOLATION_THETAS:
            pt = interpolated_order(p0, p1, th)
            lhs = weighted_norm(x, pt, sigma)
            out.add(f"interpolation[{p0},{p1},{th}]", n0 ** (1 - th) * n1 ** th - lhs,
                    ctx.tol("interpolation", 1e-9))
    return out


def holder_dual_witness(x, p: float) -> np.ndarray:
    """``Y`` with ``||Y||_{p'} = 1`` and ``tr(Y^+ X) = ||X||_p`` (from the SVD of ``X``)."""
    u, s, vh = np.linalg.svd(x)
    if math.isinf(p):
        return np.outer(u[:, 0], vh[0])
    if p == 1:
        return u @ vh
    w = s ** (p - 1.0)
    w /= np.sum(s ** p) ** (1.0 / holder_conjugate(p))
    return (u * w) @ vh


def inverse_duality_witness(x, p: float) -> np.ndarray:
    """PSD ``Y`` with ``||Y||_{p'} = 1`` attaining ``tr(XY) = ||X||_p`` for PSD full-rank ``X``, 0<p<1."""
    y = matrix_power(x, p - 1.0)
    return y / schatten_norm(y, holder_conjugate(p))


def equality_pair(rng, d: int, p: float, q: float) -> tuple[np.ndarray, np.ndarray]:
    """``X, Y`` with ``|X|^p`` and ``|Y^+|^q`` proportional."""
    u, v, w = haar_unitary(d, rng), haar_unitary(d, rng), haar_unitary(d, rng)
    diag = rng.random(d) + 0.05
    x = (u * diag ** (1.0 / p)) @ w
    y = (dagger(w) * diag ** (1.0 / q)) @ v
    return 2.0 * x, 0.5 * y


HOLDER_ORDERS = (1.0, 1.5, 2.0, 4.0, INF)
POSITIVE_ORDERS = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0, INF)
NEGATIVE_ORDERS = (-0.5, -1.0, -2.0, -4.0)
SUB_ONE_ORDERS = (0.25, 0.5, 0.75)


def _inv(p):
    return 0.0 if math.isinf(p) else 1.0 / p


def trial_holder_family(ctx: Context, index: int, n_dual: int = 200) -> TrialOutcome:
    rng = ctx.rng(index)
    d = ctx.dims[index % len(ctx.dims)]
    x, y = complex_gaussian(rng, (d, d)), complex_gaussian(rng, (d, d))
    out = TrialOutcome(instance={"x": matrix_to_json(x), "y": matrix_to_json(y)})
    tol = ctx.tol("holder", 1e-9)

    # ||XY||_1 <= ||X||_p ||Y||_p'
    n_xy = schatten_norm(x @ y, 1)
    for p in HOLDER_ORDERS:
        out.add(f"holder[{p}]", schatten_norm(x, p) * schatten_norm(y, holder_conjugate(p)) - n_xy, tol)

    # dual characterization of ||X||_p
    p = HOLDER_ORDERS[index % len(HOLDER_ORDERS)]
    pc = holder_conjugate(p)
    nx = schatten_norm(x, p)
    best = 0.0
    for _ in range(n_dual):
        z = complex_gaussian(rng, (d, d))
        z /= schatten_norm(z, pc)
        best = max(best, abs(np.trace(dagger(z) @ x)))
    out.add(f"duality-bound[{p}]", nx - best, tol)
    wit = holder_dual_witness(x, p)
    out.add(f"duality-attained[{p}]", -abs(np.trace(dagger(wit) @ x).real - nx),
            ctx.tol("duality-attained", 1e-9))

    # equality case of ||XY||_r <= ||X||_p ||Y||_q
    pe, qe = rng.choice(POSITIVE_ORDERS[:-1], size=2)
    ex, ey = equality_pair(rng, d, pe, qe)
    re_ = 1.0 / (1.0 / pe + 1.0 / qe)
    rhs = schatten_norm(ex, pe) * schatten_norm(ey, qe)
    out.add("equality", -abs(schatten_norm(ex @ ey, re_) - rhs) / rhs, ctx.tol("equality", 1e-8))

    # three factors, all orders positive
    xs = [complex_gaussian(rng, (d, d)) for _ in range(3)]
    ps = [float(p) for p in rng.choice(POSITIVE_ORDERS, size=3)]
    r = 1.0 / sum(_inv(p) for p in ps)
    prod = np.prod([schatten_norm(m, p) for m, p in zip(xs, ps)])
    out.add(f"multi-holder{ps}", prod - schatten_norm(xs[0] @ xs[1] @ xs[2], r), tol)

    # reverse: exactly one positive order
    negs = [float(p) for p in rng.choice(NEGATIVE_ORDERS, size=2)]
    r = float(rng.choice((0.5, 1.0, 2.0)))
    pos = 1.0 / (1.0 / r - sum(1.0 / p for p in negs))
    ps = negs[:]
    ps.insert(int(rng.integers(0, 3)), pos)
    prod = np.prod([schatten_norm(m, p) for m, p in zip(xs, ps)])
    out.add(f"reverse-holder{[round(p, 6) for p in ps]}", schatten_norm(xs[0] @ xs[1] @ xs[2], r) - prod, tol)

    # ||X||_p ||Y||_p' <= ||XY||_1 for 0 < p < 1
    for p in SUB_ONE_ORDERS:
        out.add(f"reverse-pair[{p}]", n_xy - schatten_norm(x, p) * schatten_norm(y, holder_conjugate(p)), tol)

    # ||X||_p = inf tr(XY) over PSD Y with ||Y||_p' = 1, for PSD X and 0 < p < 1
    g = complex_gaussian(rng, (d, d))
    xp = g @ dagger(g)
    for p in SUB_ONE_ORDERS:
        pc = holder_conjugate(p)
        nx = schatten_norm(xp, p)
        worst = INF
        for _ in range(20):
            h = complex_gaussian(rng, (d, d))
            yp = h @ dagger(h)
            yp /= schatten_norm(yp, pc)
            worst = min(worst, np.trace(xp @ yp).real)
        out.add(f"inverse-duality-bound[{p}]", worst - nx, tol)
        wit = inverse_duality_witness(xp, p)
        out.add(f"inverse-duality-attained[{p}]", -abs(np.trace(xp @ wit).real - nx),
                ctx.tol("inverse-duality-attained", 1e-8))
    return out


def trial_limit_alpha1(ctx: Context, index: int, steps=(0.1, 0.05, 0.025)) -> TrialOutcome:
    rng = ctx.rng(index)
    d = ctx.dims[index % len(ctx.dims)]
    rho = _rand_state(rng, d, _rand_rank(rng, d))
    sigma = _rand_state(rng, d)
    out = TrialOutcome(instance={"rho": density_to_json(rho), "sigma": density_to_json(sigma)})
    ref = umegaki(rho, sigma).value
    gaps = [abs(_value(rho, sigma, 1.0 + h) - ref) for h in steps]
    if gaps[0] < 1e-10:
        return out
    for j in range(len(gaps) - 1):
        out.add(f"gap-decrease[{steps[j + 1]}]", gaps[j] - gaps[j + 1], ctx.tol("gap-decrease", 0.0))
        ratio = gaps[j + 1] / gaps[j]
        out.add(f"gap-ratio[{steps[j + 1]}]", min(ratio - 0.3, 0.7 - ratio), ctx.tol("gap-ratio", 0.0))
    return out


# -- optimizer-backed checks ----------------------------------------------------

def _config(ctx: Context, index: int, **kw) -> OptimizerConfig:
    return OptimizerConfig(seed=derive_seed(ctx.seed, _check_id(ctx.check), index, 1), **kw)


def _flag(out: TrialOutcome, results):
    # only non-convergence makes a trial inconclusive; boundary optima are
    # legitimate for rank-deficient marginals and are counted as warnings
    if not all(r.converged for r in results):
        out.inconclusive = True
    out.warnings += sum(bool(r.boundary) for r in results)


DUALITY_SHAPES = ((2, 2, 2), (2, 2, 4))


def trial_duality(ctx: Context, index: int) -> TrialOutcome:
    rng = ctx.rng(index)
    shape = DUALITY_SHAPES[index % len(DUALITY_SHAPES)]
    psi = random_pure(shape, seed=_seed(rng)).density()
    out = TrialOutcome(instance={"psi": density_to_json(psi)})
    cfg = _config(ctx, index, restarts=3)
    rho_ab = partial_trace(psi, [0, 1])
    rho_ac = partial_trace(psi, [0, 2])
    rho_bc = partial_trace(psi, [1, 2])
    d_ab, d_ac = (shape[0], shape[1]), (shape[0], shape[2])
    for a in ctx.alphas:
        b = conjugate_order(a)
        h_ab = conditional_renyi_entropy(rho_ab, a, cfg, dims=d_ab)
        h_ac = conditional_renyi_entropy(rho_ac, b, cfg, dims=d_ac)
        infsup = minimax_value(rho_bc, a, "infsup", cfg, dims=(shape[1], shape[2]))
        supinf = minimax_value(rho_bc, a, "supinf", cfg, dims=(shape[1], shape[2]))
        _flag(out, (h_ab, h_ac, infsup, supinf))
        out.add(f"duality[{a},{b:.6g}]", -abs(h_ab.value + h_ac.value), ctx.tol("duality", 2e-5))
        out.add(f"sion[{a}]", -abs(infsup.value - supinf.value), ctx.tol("sion", 1e-5))
    return out


def trial_mi_additivity(ctx: Context, index: int) -> TrialOutcome:
    rng = ctx.rng(index)
    r1 = _rand_state(rng, 4).with_dims((2, 2))
    r2 = _rand_state(rng, 4).with_dims((2, 2))
    out = TrialOutcome(instance={"rho": density_to_json(r1), "rho_prime": density_to_json(r2)})
    # A B A' B'  ->  A A' B B'
    joint = permute_systems(np.kron(r1.matrix, r2.matrix), (0, 2, 1, 3), (2, 2, 2, 2))
    for a in ctx.alphas:
        cfg = _config(ctx, index, restarts=3)
        m1 = mutual_info_primal(r1, a, cfg)
        m2 = mutual_info_primal(r2, a, cfg)
        seed_state = np.kron(m1.argopt.matrix, m2.argopt.matrix)
        mj = mutual_info_primal(joint, a, _config(ctx, index, restarts=2), dims=(4, 4), init=[seed_state])
        _flag(out, (m1, m2, mj))
        out.add(f"additivity[{a}]", -abs(mj.value - m1.value - m2.value), ctx.tol("additivity", 5e-5))
    return out


def product_ensemble(e1: Ensemble, e2: Ensemble) -> Ensemble:
    p = np.kron(e1.probabilities, e2.probabilities)
    v = np.array([np.kron(a, b) for a in e1.vectors for b in e2.vectors])
    return Ensemble(p, v)


def _qubit_channel(rng) -> Channel:
    return random_channel(2, 2, int(rng.integers(1, 4)), seed=_seed(rng))


def trial_chi_superadditivity(ctx: Context, index: int) -> TrialOutcome:
    rng = ctx.rng(index)
    c1, c2 = _qubit_channel(rng), _qubit_channel(rng)
    a = ctx.alphas[index % len(ctx.alphas)]
    out = TrialOutcome(instance={"alpha": a, "channel": channel_to_json(c1),
                                 "channel_prime": channel_to_json(c2)})
    cfg = _config(ctx, index, restarts=2, max_iters=300)
    h1 = holevo_alpha(c1, 2, a, cfg)
    h2 = holevo_alpha(c2, 2, a, cfg)
    joint_cfg = _config(ctx, index, restarts=1, max_iters=30)
    hj = holevo_alpha(tensor_channel(c1, c2), 4, a, joint_cfg,
                      init_ensembles=[product_ensemble(h1.ensemble, h2.ensemble)],
                      init_sigmas=[np.kron(h1.sigma.matrix, h2.sigma.matrix)])
    if not (h1.converged and h2.converged and hj.diagnostics.get("inner_converged", True)):
        out.inconclusive = True
    out.add(f"superadditivity[{a}]", hj.value - h1.value - h2.value, ctx.tol("superadditivity", 1e-6))
    return out


# -- registry and runner --------------------------------------------------------

@dataclass(frozen=True)
class CheckSpec:
    trial: Callable[[Context, int], TrialOutcome]
    dims: tuple[int, ...]
    alphas: tuple[float, ...]
    trials: int
    alpha_domain: Callable[[float], bool] = lambda a: a > 0 and a != 1


def _above_one(a):
    return a > 1


CHECKS: dict[str, CheckSpec] = {
    "positivity": CheckSpec(trial_positivity, (2, 3, 4), (0.5, 0.75, 1.5, 2.0, 3.0, 10.0), 500),
    "dpi": CheckSpec(trial_dpi, (2, 3), (0.5, 0.8, 1.25, 2.0, 4.0, INF), 200,
                     lambda a: a >= 0.5 and a != 1),
    "contraction": CheckSpec(trial_contraction, (2, 3), (1.5, 2.0, 4.0), 100, lambda a: a >= 1),
    "monotonicity-alpha": CheckSpec(trial_monotonicity_alpha, (2, 3, 4),
                                    (1.05, 1.2, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0), 100, _above_one),
    "convexity": CheckSpec(trial_convexity, (2, 3), (1.2, 1.5, 2.0, 3.0, 6.0), 100, _above_one),
    "interpolation": CheckSpec(trial_interpolation, (2, 3, 4), (), 200, lambda a: True),
    "holder-family": CheckSpec(trial_holder_family, (2, 3, 4), (), 200, lambda a: True),
    "duality": CheckSpec(trial_duality, (2,), (2.0, 3.0, 1.5), 30, _above_one),
    "mi-additivity": CheckSpec(trial_mi_additivity, (2,), (1.5, 2.0, 3.0), 20, _above_one),
    "chi-superadditivity": CheckSpec(trial_chi_superadditivity, (2,), (1.5, 2.0, 3.0), 10, _above_one),
    "limit-alpha1": CheckSpec(trial_limit_alpha1, (2, 3), (), 50, lambda a: True),
}


def resolve(name: str, plan: TrialPlan) -> Context:
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")
    spec = CHECKS[name]
    alphas = tuple(float(a) for a in plan.alphas) if plan.alphas is not None else spec.alphas
    if spec.alphas and not alphas:
        raise ValueError(f"check {name!r} needs at least one alpha")
    bad = [a for a in alphas if not spec.alpha_domain(a)]
    if bad:
        raise ValueError(f"alphas {bad} are outside the range of check {name!r}")
    if name == "convexity" and len(alphas) < 3:
        raise ValueError("convexity needs at least three alphas")
    return Context(
        check=name,
        dims=tuple(int(d) for d in plan.dims) if plan.dims is not None else spec.dims,
        alphas=alphas,
        trials=int(plan.trials) if plan.trials is not None else spec.trials,
        seed=int(plan.seed),
        tolerances=dict(plan.tolerances),
    )


def run_trial(name: str, ctx: Context, index: int) -> TrialOutcome:
    return CHECKS[name].trial(ctx, index)


def _write_failure(path: Path, ctx: Context, index: int, outcome: TrialOutcome) -> str:
    path.mkdir(parents=True, exist_ok=True)
    target = path / f"{ctx.check}-{ctx.seed}-{index}.json"
    target.write_text(dumps({
        "check": ctx.check,
        "seed": ctx.seed,
        "trial": index,
        "context": {"dims": list(ctx.dims), "alphas": list(ctx.alphas), "trials": ctx.trials,
                    "tolerances": dict(ctx.tolerances)},
        "inputs": outcome.instance,
        "slacks": [list(s) for s in outcome.slacks],
    }))
    return str(target)


def run_check(name: str, plan: TrialPlan | None = None) -> PropertyReport:
    plan = plan or TrialPlan()
    ctx = resolve(name, plan)
    start = time.perf_counter()
    fn = partial(run_trial, name, ctx)
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            outcomes = list(pool.map(fn, range(ctx.trials)))
    else:
        outcomes = [fn(i) for i in range(ctx.trials)]
    elapsed = time.perf_counter() - start

    failures, inconclusive, warnings = 0, 0, 0
    worst = INF
    refs = []
    for i, o in enumerate(outcomes):
        warnings += o.warnings
        if o.inconclusive:
            inconclusive += 1
            continue
        worst = min(worst, o.worst)
        if o.failed:
            failures += 1
            if plan.failure_dir is not None:
                refs.append(_write_failure(Path(plan.failure_dir), ctx, i, o))
            else:
                refs.append(f"{name}#{i}")
    return PropertyReport(name, ctx.trials, failures, inconclusive, worst, ctx.seed, elapsed, refs, warnings)


def verify_all(plan: TrialPlan | None = None, names=None, on_report=None) -> list[PropertyReport]:
    """Run several checks (all by default) under one plan and master seed."""
    plan = plan or TrialPlan()
    names = list(names or CHECKS)
    for n in names:
        resolve(n, plan)  # validate every plan before running anything
    reports = []
    for n in names:
        reports.append(run_check(n, plan))
        if on_report is not None:
            on_report(reports[-1])
    return reports


def aggregate(reports: list[PropertyReport], seed: int, timing: bool = True) -> dict:
    return {
        "seed": seed,
        "failures": sum(r.failures for r in reports),
        "inconclusive": sum(r.inconclusive for r in reports),
        "checks": [r.to_dict(timing) for r in reports],
    }


def replay(path) -> tuple[TrialOutcome, Context]:
    """Re-run one serialized failure instance from its seed and trial index."""
    record = json.loads(Path(path).read_text())
    c = record["context"]
    ctx = Context(record["check"], tuple(c["dims"]), tuple(float(a) for a in c["alphas"]),
                  int(c["trials"]), int(record["seed"]), dict(c.get("tolerances", {})))
    return run_trial(ctx.check, ctx, int(record["trial"])), ctx
