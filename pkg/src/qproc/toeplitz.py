"""Block Toeplitz operators, their finite sections and Szego-type limits.

A symbol ``T(theta)`` with Fourier coefficients
``That(k) = (1/2pi) int T(theta) exp(-i k theta) dtheta`` generates the block
Toeplitz operator whose ``(i, j)`` block is ``That(j - i)``.
"""
from __future__ import annotations

from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ShapeError
from .fermion import FermionProcessSpec, binary_entropy_sum, qinf_blocks, symbol_function

FOURIER_POINTS = 4096


class ToeplitzSymbolFn:
    """Hermitian-matrix valued function on the circle.

    Give either ``fn`` (vectorized: an array of angles to an array of shape
    ``(len, d, d)``, or ``(len,)`` when ``d == 1``) or ``coeffs``, a mapping
    ``k -> That(k)`` for ``k >= 0``; negative coefficients follow from
    Hermiticity.  Coefficients beyond ``kmax`` are treated as zero.
    """

    def __init__(self, d: int = 1, fn: Callable | None = None, coeffs: dict | None = None, kmax: int | None = None,
                 points: int = FOURIER_POINTS):
        if (fn is None) == (coeffs is None):
            raise ValueError("give exactly one of fn and coeffs")
        self.d = int(d)
        self._fn = fn
        self.points = int(points)
        self._coeffs: dict[int, np.ndarray] = {}
        if coeffs is not None:
            for k, v in coeffs.items():
                v = np.asarray(v, dtype=complex).reshape(self.d, self.d)
                if int(k) < 0:
                    raise ValueError("give coefficients for k >= 0 only")
                self._coeffs[int(k)] = v
            if np.abs(self._coeffs.get(0, np.zeros((self.d, self.d)))
                      - self._coeffs.get(0, np.zeros((self.d, self.d))).conj().T).max() > 1e-12:
                raise ShapeError("That(0) must be Hermitian")
            self.kmax = max(self._coeffs) if kmax is None else int(kmax)
        else:
            self.kmax = kmax
        self._sampled = None

    def __call__(self, theta) -> np.ndarray:
        th = np.atleast_1d(np.asarray(theta, dtype=float))
        if self._fn is not None:
            out = np.asarray(self._fn(th), dtype=complex).reshape(len(th), self.d, self.d)
        else:
            out = np.zeros((len(th), self.d, self.d), dtype=complex)
            for k, c in self._coeffs.items():
                if k > self.kmax:
                    continue
                z = np.exp(1j * k * th)[:, None, None]
                out += c[None] * z
                if k:
                    out += c.conj().T[None] / z
        return out[0] if np.ndim(theta) == 0 else out

    def coefficient(self, k: int) -> np.ndarray:
        k = int(k)
        if self.kmax is not None and abs(k) > self.kmax:
            return np.zeros((self.d, self.d), dtype=complex)
        if self._fn is None:
            if k >= 0:
                return self._coeffs.get(k, np.zeros((self.d, self.d), dtype=complex))
            return self._coeffs.get(-k, np.zeros((self.d, self.d), dtype=complex)).conj().T
        if self._sampled is None:
            n = self.points
            th = 2 * np.pi * np.arange(n) / n
            # trapezoid rule on the periodic grid = discrete Fourier transform
            self._sampled = np.fft.fft(self(th), axis=0) / n
        n = self.points
        if abs(k) >= n // 2:
            return np.zeros((self.d, self.d), dtype=complex)
        return self._sampled[k % n]

    def section(self, n: int) -> np.ndarray:
        return block_toeplitz(self, n)


def scalar_symbol(fn: Callable[[np.ndarray], np.ndarray], **kw) -> ToeplitzSymbolFn:
    return ToeplitzSymbolFn(1, fn=lambda th: np.asarray(fn(th)).reshape(-1, 1, 1), **kw)


def figure1_function(theta):
    theta = np.asarray(theta, dtype=float)
    return 0.5 + np.cos(theta) / 5 + np.sin(2 * theta) / 3


def figure1_symbol() -> ToeplitzSymbolFn:
    """``T(theta) = 1/2 + cos(theta)/5 + sin(2 theta)/3`` by its exact coefficients."""
    return ToeplitzSymbolFn(1, coeffs={0: 0.5, 1: 0.1, 2: -1j / 6})


def fermion_symbol(spec: FermionProcessSpec, kmax: int | None = None) -> ToeplitzSymbolFn:
    """``Q_inf(theta)`` of a fermionic process; exact blocks when ``kmax`` is given."""
    if kmax is None:
        return ToeplitzSymbolFn(spec.d, fn=lambda th: symbol_function(spec, th))
    return ToeplitzSymbolFn(spec.d, coeffs=dict(enumerate(qinf_blocks(spec, kmax))))


def block_toeplitz(Tfn: ToeplitzSymbolFn, n: int) -> np.ndarray:
    d = Tfn.d
    coef = {k: Tfn.coefficient(k) for k in range(-(n - 1), n)}
    M = np.zeros((n * d, n * d), dtype=complex)
    for i in range(n):
        for j in range(n):
            M[i * d : (i + 1) * d, j * d : (j + 1) * d] = coef[j - i]
    return 0.5 * (M + M.conj().T)


def toeplitz_eigs(Tfn: ToeplitzSymbolFn, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    return np.linalg.eigvalsh(block_toeplitz(Tfn, n))


def interlacing_residual(small, big) -> float:
    """Largest violation of ``big[j] <= small[j] <= big[j + 1]`` (0 when interlaced)."""
    small, big = np.sort(small), np.sort(big)
    if len(big) != len(small) + 1:
        raise ShapeError("interlacing compares spectra of sizes n and n + 1")
    lo = np.maximum(big[:-1] - small, 0.0)
    hi = np.maximum(small - big[1:], 0.0)
    return float(max(lo.max(initial=0.0), hi.max(initial=0.0)))


class SzegoRow(NamedTuple):
    n: int
    average: float  # (1/n) tr f(P_n T P_n)
    increment: float  # tr f(P_n T P_n) - tr f(P_{n-1} T P_{n-1})
    target: float


def szego_target(Tfn: ToeplitzSymbolFn, f: Callable[[np.ndarray], np.ndarray], points=1 << 14) -> float:
    th = -np.pi + 2 * np.pi * np.arange(points) / points
    ev = np.linalg.eigvalsh(Tfn(th))
    return float(np.mean(np.sum(f(ev), axis=-1)))


def szego_check(
    Tfn: ToeplitzSymbolFn,
    f: Callable[[np.ndarray], np.ndarray],
    n_list: Sequence[int],
    target: float | None = None,
) -> list[SzegoRow]:
    """Finite-section averages and increments of ``tr f`` against the angular mean."""
    if target is None:
        target = szego_target(Tfn, f)

    def tr_f(n):
        return float(np.sum(f(toeplitz_eigs(Tfn, n)))) if n else 0.0

    rows = []
    for n in n_list:
        a, b = tr_f(n), tr_f(n - 1)
        rows.append(SzegoRow(int(n), a / n, a - b, target))
    return rows


def binary_entropy_fn(x):
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return -(np.where(x > 0, x * np.log(x), 0.0) + np.where(x < 1, (1 - x) * np.log1p(-x), 0.0))


def level_set_cdf(Tfn: ToeplitzSymbolFn, x, points=1 << 16) -> np.ndarray:
    """``(1/2pi) |{theta : T(theta) <= x}|`` (eigenvalue counting for ``d > 1``)."""
    th = -np.pi + 2 * np.pi * np.arange(points) / points
    vals = np.sort(np.linalg.eigvalsh(Tfn(th)).ravel())
    return np.searchsorted(vals, np.asarray(x, dtype=float), side="right") / len(vals)


def kolmogorov_distance(Tfn: ToeplitzSymbolFn, n: int, points=1 << 16) -> float:
    """Sup distance between the eigenvalue CDF of the ``n``-section and the level-set measure."""
    ev = np.sort(toeplitz_eigs(Tfn, n))
    m = len(ev)
    F = level_set_cdf(Tfn, ev, points)
    # the empirical CDF jumps at each eigenvalue: compare both one-sided limits
    upper = np.arange(1, m + 1) / m
    lower = np.arange(0, m) / m
    F_left = level_set_cdf(Tfn, np.nextafter(ev, -np.inf), points)
    return float(max(np.abs(upper - F).max(), np.abs(lower - F_left).max()))


FIGURE1_POINTS = 1024
FIGURE2_SIZES = tuple(range(1, 51)) + (100,)


def figure1_rows(points=FIGURE1_POINTS) -> list[tuple[float, float]]:
    th = -np.pi + 2 * np.pi * np.arange(points) / points
    return list(zip(th.tolist(), figure1_function(th).tolist()))


def figure2_rows(sizes: Sequence[int] = FIGURE2_SIZES) -> list[tuple[int, int, float]]:
    T = figure1_symbol()
    rows = []
    for n in sizes:
        for i, v in enumerate(toeplitz_eigs(T, n)):
            rows.append((n, i, float(v)))
    return rows


def eigenvalue_spacings(Tfn: ToeplitzSymbolFn, n: int) -> np.ndarray:
    """Gaps between consecutive eigenvalues; irregular spacing is data, not a failure."""
    return np.diff(toeplitz_eigs(Tfn, n))


__all__ = [
    "ToeplitzSymbolFn",
    "binary_entropy_fn",
    "binary_entropy_sum",
    "block_toeplitz",
    "eigenvalue_spacings",
    "fermion_symbol",
    "figure1_function",
    "figure1_rows",
    "figure1_symbol",
    "figure2_rows",
    "interlacing_residual",
    "kolmogorov_distance",
    "level_set_cdf",
    "scalar_symbol",
    "szego_check",
    "szego_target",
    "toeplitz_eigs",
]
