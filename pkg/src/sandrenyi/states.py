"""Density matrices, channels and seeded random instances.

Subsystems are ordered left to right in tensor order (row-major), so for dims
``(dA, dB)`` the basis vector ``|a>|b>`` has index ``a * dB + b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Sequence

import numpy as np

from .linalg import PSD_CLIP, as_matrix, dagger, psd_eigvals, _psd_eig

TRACE_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
_U64 = (1 << 64) - 1


# -- seeding -----------------------------------------------------------------

def derive_seed(master: int, *keys: int) -> int:
    """Hash a master seed and integer keys into an independent 64-bit seed."""
    entropy = [int(master) & _U64] + [int(k) & _U64 for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator that is a pure function of ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & _U64)))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


# -- value types -------------------------------------------------------------

def _check_dims(dims, n: int) -> tuple[int, ...]:
    if dims is None:
        return (n,)
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims) or int(np.prod(dims)) != n:
        raise ValueError(f"subsystem dims {dims} do not multiply to {n}")
    return dims


class DensityMatrix:
    """Validated density matrix with optional subsystem dimensions.

    Usable anywhere an array is expected (``np.asarray(rho)``).
    """

    def __init__(self, matrix, dims: Sequence[int] | None = None, *, tol: float = TRACE_TOL):
        m = as_matrix(matrix, square=True)
        tr = np.trace(m)
        if abs(tr - 1.0) > tol:
            raise ValueError(f"trace {tr.real:.12g} is not 1")
        m = 0.5 * (m + dagger(m))
        w = np.linalg.eigvalsh(m)
        if w[0] < -PSD_CLIP * max(1.0, float(w[-1])):
            raise ValueError(f"matrix is not positive semi-definite (min eigenvalue {w[0]:.3g})")
        m.setflags(write=False)
        self.matrix = m
        self.dims = _check_dims(dims, m.shape[0])

    @classmethod
    def from_psd(cls, matrix, dims=None) -> "DensityMatrix":
        """Normalize a PSD matrix to unit trace."""
        m = np.asarray(matrix, dtype=complex)
        return cls(m / np.trace(m).real, dims)

    @classmethod
    def from_pure(cls, psi, dims=None) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return psd_eigvals(self.matrix)

    def with_dims(self, dims) -> "DensityMatrix":
        return DensityMatrix(self.matrix, dims)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, dims={self.dims})"


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).ravel()
        if abs(np.linalg.norm(amp) - 1.0) > TRACE_TOL:
            raise ValueError("state vector is not normalized")
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "dims", _check_dims(self.dims, amp.size))

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)


@dataclass(frozen=True)
class Channel:
    """CPTP map given by Kraus operators of shape ``(output_dim, input_dim)``."""

    input_dim: int
    output_dim: int
    kraus_ops: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        ops = tuple(as_matrix(k) for k in self.kraus_ops)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (self.output_dim, self.input_dim):
                raise ValueError(f"Kraus operator shape {k.shape} != ({self.output_dim}, {self.input_dim})")
        gram = sum(dagger(k) @ k for k in ops)
        err = float(np.max(np.abs(gram - np.eye(self.input_dim))))
        if err > COMPLETENESS_TOL:
            raise ValueError(f"Kraus operators are not trace preserving (error {err:.3g})")
        object.__setattr__(self, "kraus_ops", ops)

    def __call__(self, rho) -> np.ndarray:
        return apply_channel(self, rho)

    @property
    def stinespring(self) -> np.ndarray:
        """Isometry ``V: in -> out (x) env`` with ``K_e = (I (x) <e|) V``."""
        stack = np.stack(self.kraus_ops, axis=-1)  # (out, in, env)
        return stack.transpose(0, 2, 1).reshape(self.output_dim * len(self.kraus_ops), self.input_dim)


@dataclass(frozen=True)
class CQState:
    probabilities: np.ndarray
    states: tuple

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float).ravel()
        if p.size != len(self.states) or p.size == 0:
            raise ValueError("need one probability per state")
        if np.any(p < 0) or abs(p.sum() - 1.0) > TRACE_TOL:
            raise ValueError("probabilities must lie on the simplex")
        dims = {np.asarray(s).shape for s in self.states}
        if len(dims) != 1:
            raise ValueError("ensemble states must share one dimension")
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "states", tuple(np.asarray(s, dtype=complex) for s in self.states))


# -- operations ----------------------------------------------------------------

def tensor(*ops):
    """Kronecker product; density matrices keep concatenated subsystem dims."""
    if not ops:
        raise ValueError("tensor needs at least one factor")
    out = reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))
    if all(isinstance(o, DensityMatrix) for o in ops):
        return DensityMatrix(out, sum((o.dims for o in ops), ()), tol=1e-9)
    return out


def _resolve_dims(rho, dims) -> tuple[int, ...]:
    if dims is None:
        dims = getattr(rho, "dims", None)
        if dims is None:
            raise ValueError("subsystem dims must be declared")
    return _check_dims(dims, np.asarray(rho).shape[0])


def partial_trace(rho, keep, dims=None) -> np.ndarray:
    """Reduced operator on the subsystems listed in ``keep`` (in their given order).

    ``dims`` defaults to ``rho.dims`` for a :class:`DensityMatrix`.
    """
    m = np.asarray(rho, dtype=complex)
    dims = _resolve_dims(rho, dims)
    keep = [keep] if isinstance(keep, (int, np.integer)) else list(keep)
    n = len(dims)
    if len(set(keep)) != len(keep) or any(not 0 <= k < n for k in keep):
        raise ValueError(f"invalid subsystem selection {keep} for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]
    t = m.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = [letters[i] for i in range(n)]
    col = [letters[i].upper() for i in range(n)]
    for i in traced:
        col[i] = row[i]
    out_idx = "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    res = np.einsum("".join(row) + "".join(col) + "->" + out_idx, t)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return res.reshape(dk, dk)


def permute_systems(rho, perm, dims=None) -> np.ndarray:
    """Reorder tensor factors so that new factor ``i`` is old factor ``perm[i]``."""
    m = np.asarray(rho, dtype=complex)
    dims = _resolve_dims(rho, dims)
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm} is not a permutation of {n} subsystems")
    t = m.reshape(dims + dims).transpose(list(perm) + [n + p for p in perm])
    return t.reshape(m.shape)


def purify(rho) -> PureState:
    """Purification ``sum_i sqrt(l_i) |v_i>|i>`` on ``H (x) H``; environment is last."""
    m = np.asarray(rho, dtype=complex)
    w, v = _psd_eig(m)
    w, v = w[::-1], v[:, ::-1]  # largest weight on environment index 0
    d = m.shape[0]
    w = w / w.sum()
    psi = (v * np.sqrt(w)).reshape(d * d)
    dims = tuple(getattr(rho, "dims", (d,))) + (d,)
    return PureState(psi / np.linalg.norm(psi), dims)


def random_density(dim: int, rank: int | None = None, seed: int = 0) -> DensityMatrix:
    """Ginibre-induced random state ``G G^+ / tr(G G^+)`` with ``G`` of shape (dim, rank)."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank {rank} must lie in [1, {dim}]")
    g = complex_gaussian(make_rng(seed), (dim, rank))
    m = g @ dagger(g)
    return DensityMatrix(m / np.trace(m).real)


def random_pure(dims: Sequence[int], seed: int = 0) -> PureState:
    d = int(np.prod(dims))
    psi = complex_gaussian(make_rng(seed), d)
    return PureState(psi / np.linalg.norm(psi), tuple(dims))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return haar_isometry(dim, dim, rng)


def haar_isometry(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Haar isometry via QR of a Gaussian matrix, phases fixed so diag(R) > 0."""
    q, r = np.linalg.qr(complex_gaussian(rng, (rows, cols)))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_channel(in_dim: int, out_dim: int, env_dim: int, seed: int = 0) -> Channel:
    """Random CPTP map from a Haar isometry ``in -> out (x) env``."""
    if out_dim * env_dim < in_dim:
        raise ValueError("need out_dim * env_dim >= in_dim for an isometry")
    v = haar_isometry(out_dim * env_dim, in_dim, make_rng(seed))
    v3 = v.reshape(out_dim, env_dim, in_dim)
    return Channel(in_dim, out_dim, tuple(v3[:, e, :] for e in range(env_dim)))


def unitary_channel(u) -> Channel:
    u = np.asarray(u, dtype=complex)
    return Channel(u.shape[1], u.shape[0], (u,))


def identity_channel(dim: int) -> Channel:
    return Channel(dim, dim, (np.eye(dim, dtype=complex),))


def depolarizing_channel(dim: int) -> Channel:
    """Completely depolarizing map, Kraus set ``{|i><j| / sqrt(d)}``."""
    ops = []
    for i in range(dim):
        for j in range(dim):
            k = np.zeros((dim, dim), dtype=complex)
            k[i, j] = 1.0 / np.sqrt(dim)
            ops.append(k)
    return Channel(dim, dim, tuple(ops))


def partial_trace_channel(dims: Sequence[int], keep: Sequence[int]) -> Channel:
    """The partial trace as a channel with Kraus operators ``I_keep (x) <e|``."""
    dims = tuple(dims)
    n = len(dims)
    keep = list(keep)
    traced = [i for i in range(n) if i not in keep]
    d_in = int(np.prod(dims))
    d_keep = int(np.prod([dims[k] for k in keep]))
    ops = []
    for env in np.ndindex(*[dims[t] for t in traced]):
        k = np.zeros((d_keep, d_in), dtype=complex)
        for idx in np.ndindex(*[dims[i] for i in keep]):
            full = [0] * n
            for pos, i in enumerate(keep):
                full[i] = idx[pos]
            for pos, t in enumerate(traced):
                full[t] = env[pos]
            k[np.ravel_multi_index(idx, [dims[i] for i in keep]) if keep else 0,
              np.ravel_multi_index(full, dims)] = 1.0
        ops.append(k)
    return Channel(d_in, d_keep, tuple(ops))


def tensor_channel(a: Channel, b: Channel) -> Channel:
    ops = tuple(np.kron(ka, kb) for ka in a.kraus_ops for kb in b.kraus_ops)
    return Channel(a.input_dim * b.input_dim, a.output_dim * b.output_dim, ops)


def apply_channel(channel: Channel, rho) -> np.ndarray:
    """``sum_i K_i X K_i^+``; also valid for non-Hermitian ``X``."""
    m = np.asarray(rho, dtype=complex)
    if m.shape != (channel.input_dim, channel.input_dim):
        raise ValueError(f"state of shape {m.shape} does not match channel input {channel.input_dim}")
    return sum(k @ m @ dagger(k) for k in channel.kraus_ops)


def cq_embed(ensemble: CQState) -> DensityMatrix:
    """Block-diagonal ``sum_x p_x |x><x| (x) rho_x`` with dims ``(k, d_A)``."""
    k = ensemble.probabilities.size
    d = ensemble.states[0].shape[0]
    out = np.zeros((k * d, k * d), dtype=complex)
    for x, (p, s) in enumerate(zip(ensemble.probabilities, ensemble.states)):
        out[x * d:(x + 1) * d, x * d:(x + 1) * d] = p * s
    return DensityMatrix(out, (k, d))
