"""JSON encodings for matrices, states and channels.

Matrix: ``{"rows": n, "cols": m, "re": [...], "im": [...]}`` in row-major order.
Density matrix: the matrix object plus ``"dims": [d1, ...]``.
Channel: ``{"in": n, "out": m, "kraus": [matrix, ...]}``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .states import Channel, DensityMatrix


class FormatError(ValueError):
    pass


def _int_field(obj, key) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise FormatError(f"field {key!r} must be a positive integer")
    return v


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in m.real.ravel()],
        "im": [float(x) for x in m.imag.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict):
        raise FormatError("matrix must be a JSON object")
    rows, cols = _int_field(obj, "rows"), _int_field(obj, "cols")
    re, im = obj.get("re"), obj.get("im", [0.0] * (rows * cols))
    if not isinstance(re, list) or not isinstance(im, list):
        raise FormatError("'re' and 'im' must be lists")
    if len(re) != rows * cols or len(im) != rows * cols:
        raise FormatError(f"expected {rows * cols} entries, got re={len(re)} im={len(im)}")
    try:
        m = np.array(re, dtype=float) + 1j * np.array(im, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"non-numeric matrix entry: {exc}") from None
    if not np.all(np.isfinite(m)):
        raise FormatError("matrix has non-finite entries")
    return m.reshape(rows, cols)


def density_to_json(rho) -> dict:
    obj = matrix_to_json(rho)
    obj["dims"] = list(getattr(rho, "dims", (obj["rows"],)))
    return obj


def density_from_json(obj) -> DensityMatrix:
    m = matrix_from_json(obj)
    dims = obj.get("dims")
    try:
        return DensityMatrix(m, dims)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def channel_to_json(channel: Channel) -> dict:
    return {
        "in": channel.input_dim,
        "out": channel.output_dim,
        "kraus": [matrix_to_json(k) for k in channel.kraus_ops],
    }


def channel_from_json(obj) -> Channel:
    if not isinstance(obj, dict) or not isinstance(obj.get("kraus"), list):
        raise FormatError("channel must be an object with a 'kraus' list")
    try:
        return Channel(_int_field(obj, "in"), _int_field(obj, "out"),
                       tuple(matrix_from_json(k) for k in obj["kraus"]))
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None


def load_density(path) -> DensityMatrix:
    return density_from_json(load_json(path))


def load_channel(path) -> Channel:
    return channel_from_json(load_json(path))


def _finite_or_str(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x + 0.0  # no negative zero in output


def jsonable(obj):
    """Recursively convert to JSON-safe values; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _finite_or_str(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    """Stable JSON text: sorted keys; floats use the shortest exact round-trip form."""
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False)
