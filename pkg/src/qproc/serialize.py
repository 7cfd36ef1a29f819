"""JSON encoding of complex matrices as nested ``[re, im]`` pairs."""
from __future__ import annotations

import json

import numpy as np

from .errors import ShapeError


def encode(arr):
    """Nested lists with every complex scalar written as ``[re, im]``."""
    arr = np.asarray(arr)
    if arr.ndim == 0:
        z = complex(arr)
        return [z.real, z.imag]
    return [encode(a) for a in arr]


def encode_real(arr):
    return np.asarray(arr, dtype=float).tolist()


def _is_pair(x):
    return (
        isinstance(x, list)
        and len(x) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)
    )


def decode(obj, ndim=2) -> np.ndarray:
    """Inverse of :func:`encode`.

    Plain real numbers are accepted in place of ``[re, im]`` pairs, so real
    matrices may be written as ordinary nested lists.  ``ndim`` is the
    expected array rank; it disambiguates a length-2 real row from a pair.
    """

    def walk(x, depth):
        if depth == ndim:
            if isinstance(x, (int, float)) and not isinstance(x, bool):
                return complex(x)
            if _is_pair(x):
                return complex(x[0], x[1])
            raise ShapeError(f"expected a scalar or [re, im] pair, got {x!r}")
        if not isinstance(x, list):
            raise ShapeError(f"expected a list at depth {depth}, got {x!r}")
        return [walk(v, depth + 1) for v in x]

    try:
        out = np.array(walk(obj, 0), dtype=complex)
    except ValueError as exc:  # ragged rows
        raise ShapeError(str(exc)) from exc
    if out.ndim != ndim:
        raise ShapeError(f"expected a rank-{ndim} array, got shape {out.shape}")
    return out


def decode_real(obj, ndim=2, name="array") -> np.ndarray:
    out = decode(obj, ndim)
    if np.any(out.imag != 0):
        raise ShapeError(f"{name} must be real")
    return out.real.copy()


def dumps(obj, **kw) -> str:
    """``json.dumps`` that understands numpy scalars and arrays."""

    def default(o):
        if isinstance(o, np.ndarray):
            if np.iscomplexobj(o):
                return encode(o)
            return o.tolist()
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, complex):
            return [o.real, o.imag]
        raise TypeError(f"cannot serialize {type(o).__name__}")

    kw.setdefault("indent", 2)
    kw.setdefault("sort_keys", True)
    return json.dumps(obj, default=default, **kw)
