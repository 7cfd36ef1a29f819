"""Free-fermionic processes described by symbols ``0 <= Q <= 1``.

A free CP map is a pair ``(A, B)`` with ``0 <= B <= 1 - A*A`` acting as
``Q -> A* Q A + B``.  A process is fixed by ``(A, B, X)``: the invariant
symbol ``Q = A* Q A + B`` and the block Toeplitz operator ``Q_inf`` with
blocks ``(Q_inf)_{i, i+k} = (A*)^k Y`` where ``Y = Q - B + X``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ContractError, NonContractiveError, ShapeError, SizeError, SpectralError
from .mathcore import check_hermitian, hermitian_part

SYMBOL_TOL = 1e-10
MAX_TRUNCATION_DIM = 4000


def _mat(M, name) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {M.shape}")
    return M


def _dag(M):
    return M.conj().T


def _min_eig(M) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(M))[0])


def check_symbol(Q, tol=SYMBOL_TOL) -> np.ndarray:
    """Return ``Q`` (Hermitian part) if ``0 <= Q <= 1`` within ``tol``."""
    Q = check_hermitian(_mat(Q, "Q"))
    ev = np.linalg.eigvalsh(Q)
    if ev[0] < -tol or ev[-1] > 1 + tol:
        raise ContractError(f"symbol eigenvalues [{ev[0]:.3e}, {ev[-1]:.3e}] leave [0, 1]")
    return Q


class FreeCpReport(NamedTuple):
    valid: bool
    b_min_eig: float  # of B
    gap_min_eig: float  # of 1 - A*A - B


@dataclass(frozen=True)
class FreeCpMap:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A, B = _mat(self.A, "A"), _mat(self.B, "B")
        if A.shape != B.shape:
            raise ShapeError(f"A {A.shape} and B {B.shape} differ in shape")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", check_hermitian(B))

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def validate(self, tol=SYMBOL_TOL) -> FreeCpReport:
        bmin = _min_eig(self.B)
        gap = _min_eig(np.eye(self.m) - _dag(self.A) @ self.A - self.B)
        return FreeCpReport(bmin >= -tol and gap >= -tol, bmin, gap)

    def __call__(self, Q):
        return free_cp_apply(self, Q)


def free_cp_validate(A, B, tol=SYMBOL_TOL) -> FreeCpReport:
    return FreeCpMap(A, B).validate(tol)


def _require_valid(m: FreeCpMap, tol=SYMBOL_TOL):
    rep = m.validate(tol)
    if not rep.valid:
        raise ContractError(
            f"not a free CP map: min eig of B {rep.b_min_eig:.3e}, of 1 - A*A - B {rep.gap_min_eig:.3e}"
        )


def free_cp_apply(m: FreeCpMap, Q, tol=SYMBOL_TOL) -> np.ndarray:
    _require_valid(m, tol)
    Q = check_symbol(Q, tol)
    if Q.shape != m.A.shape:
        raise ShapeError(f"symbol of shape {Q.shape} for a map on {m.m} modes")
    out = _dag(m.A) @ Q @ m.A + m.B
    return check_symbol(hermitian_part(out), tol)


def free_cp_compose(m1: FreeCpMap, m2: FreeCpMap) -> FreeCpMap:
    """The map ``Q -> m2(m1(Q))``, i.e. ``(A1 A2, B2 + A2* B1 A2)``."""
    if m1.m != m2.m:
        raise ShapeError(f"cannot compose maps on {m1.m} and {m2.m} modes")
    A = m1.A @ m2.A
    B = hermitian_part(m2.B + _dag(m2.A) @ m1.B @ m2.A)
    return FreeCpMap(A, B)


class ExtensionReport(NamedTuple):
    exists: bool
    cd_valid: bool
    half_gap: float  # min eig of 1/2 - A*A
    b_gap: float  # min eig of 1 - B - A*A
    d_min_eig: float
    cd_gap: float  # min eig of 1 - C*C - D


def extension_blocks(A, B, X) -> tuple[np.ndarray, np.ndarray]:
    """``C = (A A)`` and ``D = [[B, X], [X*, B]]`` of the two-site extension."""
    A, B, X = _mat(A, "A"), _mat(B, "B"), _mat(X, "X")
    return np.hstack([A, A]), np.block([[B, X], [_dag(X), B]])


def extension_check(A, B, X, tol=SYMBOL_TOL) -> ExtensionReport:
    """Existence of a compatible extension and validity of the one labelled by ``X``.

    Existence is read as the pair of conditions ``A*A <= 1/2`` and
    ``A*A <= 1 - B``.
    """
    A, B, X = _mat(A, "A"), _mat(B, "B"), _mat(X, "X")
    d = A.shape[0]
    if B.shape != (d, d) or X.shape != (d, d):
        raise ShapeError("A, B and X must share one square shape")
    AA = _dag(A) @ A
    half = _min_eig(0.5 * np.eye(d) - AA)
    bgap = _min_eig(np.eye(d) - B - AA)
    C, D = extension_blocks(A, B, X)
    dmin = _min_eig(D)
    cdgap = _min_eig(np.eye(2 * d) - _dag(C) @ C - D)
    return ExtensionReport(
        half >= -tol and bgap >= -tol,
        dmin >= -tol and cdgap >= -tol,
        half,
        bgap,
        dmin,
        cdgap,
    )


def spectral_radius(A) -> float:
    return float(np.abs(np.linalg.eigvals(A)).max())


def invariant_symbol(A, B, tol=1e-12, max_iter=1_000_000) -> np.ndarray:
    """Solution of ``Q = A* Q A + B``.

    Solved as a linear system on the vectorized matrix; when that system is
    badly conditioned the fixed-point iteration is used instead.
    """
    A, B = _mat(A, "A"), _mat(B, "B")
    r = spectral_radius(A)
    if r >= 1:
        raise NonContractiveError(f"spectral radius of A is {r:.6g} >= 1; the fixed point is not unique")
    d = A.shape[0]
    Ad = _dag(A)
    # row-major vec: vec(M Q N) = kron(M, N.T) vec(Q)
    L = np.eye(d * d) - np.kron(Ad, A.T)
    Q = None
    if np.linalg.cond(L) < 1e10:
        Q = np.linalg.solve(L, B.reshape(-1)).reshape(d, d)
    if Q is None or np.abs(Q - Ad @ Q @ A - B).max() > tol:
        Q = B.copy()
        for _ in range(max_iter):
            nxt = Ad @ Q @ A + B
            if np.abs(nxt - Q).max() < tol * 1e-2:
                Q = nxt
                break
            Q = nxt
    return hermitian_part(Q)


@dataclass
class FermionProcessSpec:
    A: np.ndarray
    B: np.ndarray
    X: np.ndarray = None
    name: str = field(default="", repr=False)
    Q: np.ndarray = field(init=False)

    def __post_init__(self):
        self.A, self.B = _mat(self.A, "A"), _mat(self.B, "B")
        self.X = np.zeros_like(self.A) if self.X is None else _mat(self.X, "X")
        _require_valid(FreeCpMap(self.A, self.B))
        rep = extension_check(self.A, self.B, self.X)
        if not rep.exists:
            raise ContractError(
                f"no compatible extension: min eig of 1/2 - A*A {rep.half_gap:.3e}, of 1 - B - A*A {rep.b_gap:.3e}"
            )
        if not rep.cd_valid:
            raise ContractError(
                f"extension X is invalid: min eig of D {rep.d_min_eig:.3e}, of 1 - C*C - D {rep.cd_gap:.3e}"
            )
        self.Q = check_symbol(invariant_symbol(self.A, self.B))

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def Y(self) -> np.ndarray:
        return self.Q - self.B + self.X

    def as_dict(self) -> dict:
        from .serialize import encode

        return {"A": encode(self.A), "B": encode(self.B), "X": encode(self.X)}


def spec_from_dict(obj: dict) -> FermionProcessSpec:
    from .serialize import decode

    unknown = set(obj) - {"A", "B", "X", "name"}
    if unknown:
        raise ShapeError(f"unknown keys in fermion spec: {sorted(unknown)}")
    try:
        A, B = decode(obj["A"]), decode(obj["B"])
    except KeyError as exc:
        raise ShapeError(f"fermion spec is missing {exc.args[0]!r}") from None
    X = decode(obj["X"]) if "X" in obj else None
    return FermionProcessSpec(A, B, X, name=obj.get("name", ""))


def qinf_blocks(spec: FermionProcessSpec, kmax: int) -> list[np.ndarray]:
    """``[Q, A* Y, (A*)^2 Y, ...]`` up to offset ``kmax``."""
    Ad = _dag(spec.A)
    out = [spec.Q.copy()]
    cur = spec.Y
    for _ in range(kmax):
        cur = Ad @ cur
        out.append(cur)
    return out


def qinf_truncation(spec: FermionProcessSpec, n: int) -> np.ndarray:
    """Leading ``n x n`` block section of ``Q_inf``."""
    d = spec.d
    if n * d > MAX_TRUNCATION_DIM:
        raise SizeError(f"{n} blocks of size {d} exceed {MAX_TRUNCATION_DIM}")
    blocks = qinf_blocks(spec, n - 1)
    M = np.zeros((n * d, n * d), dtype=complex)
    for i in range(n):
        M[i * d : (i + 1) * d, i * d : (i + 1) * d] = blocks[0]
        for k in range(1, n - i):
            j = i + k
            M[i * d : (i + 1) * d, j * d : (j + 1) * d] = blocks[k]
            M[j * d : (j + 1) * d, i * d : (i + 1) * d] = _dag(blocks[k])
    return M


def symbol_function(spec: FermionProcessSpec, theta) -> np.ndarray:
    """``Q_inf(theta) = Q + R + R*`` with ``R = (1 - A* z)^-1 A* z Y``, ``z = exp(i theta)``.

    Accepts a scalar or an array of angles; an array gives shape ``(len, d, d)``.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    d = spec.d
    Ad = _dag(spec.A)
    z = np.exp(1j * th)[:, None, None]
    M = np.eye(d)[None] - Ad[None] * z
    rhs = (Ad[None] * z) @ spec.Y
    try:
        R = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SpectralError("resolvent of A* exp(i theta) is singular") from exc
    out = spec.Q[None] + R + np.conj(np.swapaxes(R, 1, 2))
    return out[0] if np.ndim(theta) == 0 else out


def binary_entropy_sum(ev, tol=SYMBOL_TOL) -> float:
    """``-sum x log x + (1 - x) log(1 - x)`` over eigenvalues in ``[0, 1]``."""
    ev = np.asarray(ev, dtype=float)
    if ev.size and (ev.min() < -tol or ev.max() > 1 + tol):
        raise ContractError(f"eigenvalues [{ev.min():.3e}, {ev.max():.3e}] leave [0, 1]")
    x = np.clip(ev, 0.0, 1.0)
    y = 1.0 - x
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(x > 0, x * np.log(x), 0.0) + np.where(y > 0, y * np.log(y), 0.0)
    return float(-t.sum())


def symbol_entropy(Q, tol=SYMBOL_TOL) -> float:
    Q = check_hermitian(_mat(Q, "Q"))
    return binary_entropy_sum(np.linalg.eigvalsh(Q), tol)


class IntegralResult(NamedTuple):
    value: float
    points: int
    error_estimate: float
    history: list


def periodic_mean(fn, tol=1e-8, k_min=4, k_max=16) -> IntegralResult:
    """``(1/2pi) int fn(theta) dtheta`` over a period by trapezoid doubling.

    ``fn`` takes an array of angles.  Each doubling reuses the previous nodes.
    """
    n = 2**k_min
    th = -np.pi + 2 * np.pi * np.arange(n) / n
    total = float(np.sum(fn(th)))
    history = [(n, total / n)]
    err = float("inf")
    for _ in range(k_min, k_max):
        mid = th + np.pi / n
        total += float(np.sum(fn(mid)))
        th = np.sort(np.concatenate([th, mid]))
        n *= 2
        history.append((n, total / n))
        err = abs(history[-1][1] - history[-2][1])
        if err < tol:
            break
    return IntegralResult(history[-1][1], n, err, history)


def _entropy_at(spec, th):
    mats = symbol_function(spec, th)
    ev = np.linalg.eigvalsh(0.5 * (mats + np.conj(np.swapaxes(mats, 1, 2))))
    x = np.clip(ev, 0.0, 1.0)
    y = 1.0 - x
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(x > 0, x * np.log(x), 0.0) + np.where(y > 0, y * np.log(y), 0.0)
    return -t.sum(axis=-1)


def entropy_rate_integral(spec: FermionProcessSpec, quadrature_points=None, tol=1e-8) -> IntegralResult:
    """``(1/2pi) int H(Q_inf(theta)) dtheta``.

    With ``quadrature_points`` a fixed trapezoid rule is used; otherwise the
    node count doubles until successive values agree to ``tol``.
    """
    f = lambda th: _entropy_at(spec, th)  # noqa: E731
    if quadrature_points:
        n = int(quadrature_points)
        th = -np.pi + 2 * np.pi * np.arange(n) / n
        v = float(np.mean(f(th)))
        return IntegralResult(v, n, float("nan"), [(n, v)])
    return periodic_mean(f, tol=tol)


class TruncationResult(NamedTuple):
    ns: np.ndarray
    H: np.ndarray  # H of the n-block truncation, H[0] for n = ns[0]
    averages: np.ndarray  # H_n / n
    increments: np.ndarray  # H_n - H_{n-1}


def truncation_entropy(spec: FermionProcessSpec, n: int) -> float:
    if n == 0:
        return 0.0
    return symbol_entropy(qinf_truncation(spec, n), tol=1e-9)


def entropy_rate_truncation(spec: FermionProcessSpec, n: int | Sequence[int]) -> TruncationResult:
    """Entropies of block truncations and their increments.

    ``n`` is either a single block count (all of ``1..n`` are evaluated) or a
    list of block counts; increments always compare ``n`` with ``n - 1``.
    """
    ns = np.arange(1, int(n) + 1) if np.ndim(n) == 0 else np.array(sorted(set(int(k) for k in n)))
    if ns.size and ns.max() * spec.d > MAX_TRUNCATION_DIM:
        raise SizeError(f"{ns.max()} blocks of size {spec.d} exceed {MAX_TRUNCATION_DIM}")
    cache: dict[int, float] = {}

    def H(k):
        if k not in cache:
            cache[k] = truncation_entropy(spec, k)
        return cache[k]

    Hs = np.array([H(k) for k in ns])
    inc = np.array([H(k) - H(k - 1) for k in ns])
    return TruncationResult(ns, Hs, Hs / ns, inc)


def sample_specs() -> dict[str, FermionProcessSpec]:
    """Three reference processes: a scalar one, a normal 2x2 one and a non-normal 2x2 one."""
    scalar = FermionProcessSpec([[0.6]], [[0.3]], [[-0.1]], name="scalar")
    normal = FermionProcessSpec(
        np.diag([0.5, 0.3 + 0.2j]),
        [[0.35, 0.05], [0.05, 0.4]],
        [[-0.05, 0.02], [0.02, 0.1]],
        name="normal",
    )
    non_normal = FermionProcessSpec(
        [[0.4, 0.3], [0.0, 0.2]],
        [[0.3, 0.05j], [-0.05j, 0.45]],
        [[0.05, 0.0], [0.03, -0.05]],
        name="non_normal",
    )
    return {"scalar": scalar, "normal": normal, "non_normal": non_normal}
