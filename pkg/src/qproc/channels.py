"""Linear maps between matrix algebras via Choi matrices; Davies maps.

Choi convention: ``C = sum_ij |i><j| (x) G(|i><j|)`` with the input factor
first.  As a 4-tensor ``C4[i, a, j, b] = G(|i><j|)[a, b]``.

Davies maps are stored in the Heisenberg (observable) picture:
``G(dia(f)) = dia(T f)`` and ``G(e_ij) = D_ij e_ij`` for ``i != j``.  The state
action is the trace-dual map (:func:`adjoint`), under which diagonal states
evolve as row vectors ``mu -> mu T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

import numpy as np
from scipy.optimize import minimize

from .classical import check_stochastic, invariant_measure, row_entropies
from .errors import ContractError, ShapeError
from .mathcore import as_square, check_hermitian, psd_check, von_neumann_entropy
from .rng import substream

CP_TOL = 1e-10


@dataclass
class CpMap:
    d_in: int
    d_out: int
    choi: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.choi = np.asarray(self.choi, dtype=complex)
        n = self.d_in * self.d_out
        if self.choi.shape != (n, n):
            raise ShapeError(f"Choi matrix of a {self.d_in}->{self.d_out} map must be {n}x{n}")

    @property
    def tensor(self) -> np.ndarray:
        return self.choi.reshape(self.d_in, self.d_out, self.d_in, self.d_out)

    def __call__(self, X) -> np.ndarray:
        return apply_cp(self, X)


def choi_encode(fn: Callable[[np.ndarray], np.ndarray], d_in: int, d_out: int) -> CpMap:
    """Choi matrix of ``fn`` evaluated on the matrix units of ``M_{d_in}``."""
    C = np.zeros((d_in, d_out, d_in, d_out), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            unit = np.zeros((d_in, d_in), dtype=complex)
            unit[i, j] = 1.0
            out = np.asarray(fn(unit))
            if out.shape != (d_out, d_out):
                raise ShapeError(f"map returned shape {out.shape}, expected {(d_out, d_out)}")
            C[i, :, j, :] = out
    return CpMap(d_in, d_out, C.reshape(d_in * d_out, d_in * d_out))


def apply_cp(m: CpMap, X) -> np.ndarray:
    X = np.asarray(X)
    if X.shape != (m.d_in, m.d_in):
        raise ShapeError(f"input of shape {X.shape} for a map on {m.d_in}x{m.d_in} matrices")
    return np.einsum("ij,iajb->ab", X, m.tensor)


def apply_on_first(m: CpMap, Y, rest: int) -> np.ndarray:
    """``(m (x) id_rest)(Y)`` for ``Y`` acting on ``C^{d_in} (x) C^rest``."""
    Y = np.asarray(Y).reshape(m.d_in, rest, m.d_in, rest)
    out = np.einsum("ixjy,iajb->axby", Y, m.tensor)
    n = m.d_out * rest
    return out.reshape(n, n)


def adjoint(m: CpMap) -> CpMap:
    """Trace-dual map: ``tr(adjoint(m)(X) Y) == tr(X m(Y))``."""
    C4 = m.tensor.transpose(3, 2, 1, 0)
    n = m.d_in * m.d_out
    return CpMap(m.d_out, m.d_in, C4.reshape(n, n))


def compose(outer: CpMap, inner: CpMap) -> CpMap:
    """``outer o inner``."""
    if inner.d_out != outer.d_in:
        raise ShapeError("dimension mismatch in composition")
    return choi_encode(lambda X: apply_cp(outer, apply_cp(inner, X)), inner.d_in, outer.d_out)


def from_kraus(kraus: Iterable[np.ndarray]) -> CpMap:
    kraus = [np.asarray(k) for k in kraus]
    d_out, d_in = kraus[0].shape
    return choi_encode(lambda X: sum(k @ X @ k.conj().T for k in kraus), d_in, d_out)


def identity_map(d: int) -> CpMap:
    return choi_encode(lambda X: X, d, d)


def transpose_map(d: int) -> CpMap:
    return choi_encode(lambda X: X.T, d, d)


def depolarizing(d: int) -> CpMap:
    return choi_encode(lambda X: np.trace(X) * np.eye(d) / d, d, d)


def unitary_channel(U) -> CpMap:
    U = as_square(U)
    return choi_encode(lambda X: U @ X @ U.conj().T, U.shape[0], U.shape[0])


class CpReport(NamedTuple):
    cp: bool
    min_eig: float
    unital_residual: float
    trace_preserving_residual: float


def cp_properties(m: CpMap, tol=CP_TOL) -> CpReport:
    """Complete positivity (Choi PSD), unitality and trace preservation."""
    ok, lam = psd_check(m.choi, tol)
    unital = np.linalg.norm(apply_cp(m, np.eye(m.d_in)) - np.eye(m.d_out), 2)
    tr_out = np.einsum("iaja->ij", m.tensor)
    tp = np.linalg.norm(tr_out - np.eye(m.d_in), 2)
    return CpReport(ok, lam, float(unital), float(tp))


def covariance_residual(m: CpMap, pairs) -> float:
    """``max ||[conj(U1) (x) U2, C]||`` over the given unitary pairs.

    Zero for every pair iff ``m(U1 X U1*) = U2 m(X) U2*`` on the group they
    sample.
    """
    worst = 0.0
    for U1, U2 in pairs:
        U1, U2 = np.asarray(U1), np.asarray(U2)
        if U1.shape[0] != m.d_in or U2.shape[0] != m.d_out:
            raise ShapeError("unitary dimensions do not match the map")
        W = np.kron(U1.conj(), U2)
        worst = max(worst, float(np.linalg.norm(W @ m.choi - m.choi @ W, 2)))
    return worst


# -- Davies maps ---------------------------------------------------------------------------


def davies_matrix(T, D) -> np.ndarray:
    """Diagonal of ``T`` with the off-diagonal entries of ``D``; PSD iff the map is CP."""
    T = np.asarray(T, dtype=float)
    M = np.array(D, dtype=float, copy=True)
    np.fill_diagonal(M, np.diag(T))
    return M


def _check_davies_inputs(T, D):
    T = check_stochastic(T)
    D = np.asarray(D)
    if D.shape != T.shape:
        raise ShapeError(f"D has shape {D.shape}, T has shape {T.shape}")
    if np.iscomplexobj(D):
        if np.abs(D.imag).max() > 0:
            raise ShapeError("D must be real")
        D = D.real
    D = D.astype(float)
    if np.abs(D - D.T).max() > 1e-12:
        raise ShapeError("D must be symmetric")
    return T, D


def davies_build(T, D) -> CpMap:
    """Heisenberg-picture Davies map with transitions ``T`` and damping ``D``."""
    T, D = _check_davies_inputs(T, D)
    d = T.shape[0]

    def action(X):
        out = np.diag(T @ np.diag(X))
        off = ~np.eye(d, dtype=bool)
        out = out.astype(complex)
        out[off] = (D * X)[off]
        return out

    return choi_encode(action, d, d)


@dataclass
class DaviesReport:
    mu: np.ndarray
    detailed_balance_residual: float
    triangle_residual: float
    davies_min_eig: float
    davies_cp: bool
    choi_min_eig: float
    choi_cp: bool
    unital_residual: float
    trace_preserving_residual: float

    @property
    def agree(self) -> bool:
        return self.davies_cp == self.choi_cp

    @property
    def valid(self) -> bool:
        return (
            self.detailed_balance_residual <= 1e-10
            and self.triangle_residual <= 1e-10
            and self.davies_cp
            and self.choi_cp
        )

    def as_dict(self) -> dict:
        return {
            "mu": self.mu.tolist(),
            "detailed_balance_residual": self.detailed_balance_residual,
            "triangle_residual": self.triangle_residual,
            "davies_min_eig": self.davies_min_eig,
            "davies_cp": self.davies_cp,
            "choi_min_eig": self.choi_min_eig,
            "choi_cp": self.choi_cp,
            "agree": self.agree,
            "unital_residual": self.unital_residual,
            "trace_preserving_residual": self.trace_preserving_residual,
            "valid": self.valid,
        }


def triangle_residual(T) -> float:
    T = np.asarray(T, dtype=float)
    cyc = np.einsum("ij,jk,ki->ijk", T, T, T)
    rev = np.einsum("ik,kj,ji->ijk", T, T, T)
    return float(np.abs(cyc - rev).max())


def detailed_balance_residual(T, mu) -> float:
    flow = np.asarray(mu)[:, None] * np.asarray(T)
    return float(np.abs(flow - flow.T).max())


def davies_validate(T, D, mu=None, tol=CP_TOL) -> DaviesReport:
    T, D = _check_davies_inputs(T, D)
    if mu is None:
        mu = invariant_measure(T, allow_degenerate=True)
    mu = np.asarray(mu, dtype=float)
    lam = float(np.linalg.eigvalsh(davies_matrix(T, D))[0])
    props = cp_properties(davies_build(T, D), tol)
    return DaviesReport(
        mu=mu,
        detailed_balance_residual=detailed_balance_residual(T, mu),
        triangle_residual=triangle_residual(T),
        davies_min_eig=lam,
        davies_cp=lam >= -tol,
        choi_min_eig=props.min_eig,
        choi_cp=props.cp,
        unital_residual=props.unital_residual,
        trace_preserving_residual=props.trace_preserving_residual,
    )


def qubit_davies(a, b, d_off):
    """``T = [[1-a, a], [b, 1-b]]`` and off-diagonal damping ``d_off``."""
    T = np.array([[1 - a, a], [b, 1 - b]], dtype=float)
    D = np.array([[1.0, d_off], [d_off, 1.0]])
    return T, D


def davies_process_condition(a, b, d_off) -> bool:
    """Closed-form qubit criterion ``d_off**2 <= (1 - a)(1 - b) / 2``."""
    if not (0 <= b <= a <= 1):
        raise ContractError(f"need 0 <= b <= a <= 1, got a={a}, b={b}")
    return d_off * d_off <= 0.5 * (1 - a) * (1 - b)


def metropolis_chain(mu, laziness, rng=None) -> np.ndarray:
    """Detailed-balanced chain for ``mu`` with uniform proposals."""
    mu = np.asarray(mu, dtype=float)
    d = mu.shape[0]
    T = np.minimum(1.0, mu[None, :] / mu[:, None]) * (1 - laziness) / d
    np.fill_diagonal(T, 0.0)
    np.fill_diagonal(T, 1.0 - T.sum(axis=1))
    return T


def random_davies(d, rng, cp_scale=None):
    """Random detailed-balanced ``T`` and symmetric ``D``.

    ``D`` is a random symmetric direction scaled by ``cp_scale`` times the
    largest factor keeping the Davies matrix PSD; ``None`` draws the factor
    uniformly from ``[0, 1.5]`` so both CP and non-CP maps occur.
    """
    mu = rng.dirichlet(np.ones(d))
    T = metropolis_chain(mu, rng.random())
    S = rng.uniform(-1, 1, (d, d))
    S = 0.5 * (S + S.T)
    np.fill_diagonal(S, 0.0)
    smax = _max_psd_scale(np.diag(np.diag(T)), S)
    scale = rng.uniform(0.0, 1.5) if cp_scale is None else cp_scale
    return T, S * smax * scale, mu


def _max_psd_scale(base, direction, hi=1e6):
    """Largest ``s`` with ``base + s * direction`` PSD (``base`` diagonal PSD)."""
    lo_s, hi_s = 0.0, 1.0
    while np.linalg.eigvalsh(base + hi_s * direction)[0] >= 0 and hi_s < hi:
        hi_s *= 2
    for _ in range(80):
        mid = 0.5 * (lo_s + hi_s)
        if np.linalg.eigvalsh(base + mid * direction)[0] >= 0:
            lo_s = mid
        else:
            hi_s = mid
    return lo_s


def damping_rate_scan(d=2, samples=200, seed=0) -> dict:
    """Observed ratio of off-diagonal decay rate to diagonal relaxation rate.

    Off-diagonal rate ``1 - max|D_ij|``; diagonal rate ``1 - |lambda_2(T)|``.
    Samples are drawn on the boundary of the CP region, where the off-diagonal
    decay is slowest.  Exploration only.
    """
    rng = substream(seed, f"davies/rate-scan/{d}")
    ratios = []
    for _ in range(samples):
        T, D, _ = random_davies(d, rng, cp_scale=1.0)
        ev = np.sort(np.abs(np.linalg.eigvals(T)))[::-1]
        gap = 1.0 - ev[1]
        off = 1.0 - np.abs(D[~np.eye(d, dtype=bool)]).max()
        if gap > 1e-9:
            ratios.append(off / gap)
    ratios = np.array(ratios)
    return {
        "d": d,
        "samples": len(ratios),
        "min_ratio": float(ratios.min()),
        "median_ratio": float(np.median(ratios)),
    }


# -- minimal output entropy ----------------------------------------------------------------


class MinEntropyResult(NamedTuple):
    value: float
    state: np.ndarray


def _vec_to_state(x, d):
    psi = x[:d] + 1j * x[d:]
    nrm = np.linalg.norm(psi)
    if nrm < 1e-300:
        psi = np.zeros(d, dtype=complex)
        psi[0] = 1.0
        return psi
    return psi / nrm


def min_output_entropy_search(channel: CpMap, restarts=50, seed=0, tol=1e-9) -> MinEntropyResult:
    """Minimum of ``H(channel(|psi><psi|))`` over pure input states.

    ``channel`` acts on states and must be trace preserving.  Starts from every
    basis state plus random states up to ``restarts`` in total, refining each
    with Nelder-Mead on the unit sphere of ``C^d``.
    """
    props = cp_properties(channel)
    if props.trace_preserving_residual > 1e-9:
        raise ContractError(
            f"channel is not trace preserving (residual {props.trace_preserving_residual:.3e}); "
            "pass the state action, e.g. adjoint() of a unital map"
        )
    d = channel.d_in
    rng = substream(seed, "channels/min-output-entropy")

    def objective(x):
        psi = _vec_to_state(x, d)
        out = apply_cp(channel, np.outer(psi, psi.conj()))
        out = 0.5 * (out + out.conj().T)
        w = np.clip(np.linalg.eigvalsh(out), 0.0, None)
        w = w[w > 0]
        return float(-(w * np.log(w)).sum())

    starts = [np.concatenate([np.eye(d)[k], np.zeros(d)]) for k in range(d)]
    while len(starts) < max(restarts, d):
        starts.append(rng.standard_normal(2 * d))
    best_val, best_x = np.inf, starts[0]
    for x0 in starts:
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"xatol": tol, "fatol": tol * 1e-2, "maxiter": 4000, "maxfev": 8000},
        )
        val = min(res.fun, objective(x0))
        x = res.x if res.fun <= objective(x0) else x0
        if val < best_val:
            best_val, best_x = val, x
    psi = _vec_to_state(best_x, d)
    return MinEntropyResult(float(best_val), psi)


def davies_min_output_entropy(T, D, restarts=50, seed=0) -> MinEntropyResult:
    return min_output_entropy_search(adjoint(davies_build(T, D)), restarts=restarts, seed=seed)


def min_row_entropy(T) -> float:
    return float(row_entropies(T).min())


# -- compatible extensions (SDP) -----------------------------------------------------------


def max_compatible_damping(T, pattern=None, solver="CLARABEL") -> float:
    """Largest ``t`` such that the Davies map ``(T, t * pattern)`` has a compatible extension.

    Searches over all CP maps ``L: M_d (x) M_d -> M_d`` (Heisenberg picture)
    with ``L(A (x) 1) = L(1 (x) A) = G(A)``.  Needs ``cvxpy``.
    """
    import cvxpy as cp

    T = check_stochastic(T)
    d = T.shape[0]
    if pattern is None:
        pattern = np.ones((d, d))
    C = cp.Variable((d**3, d**3), hermitian=True)
    t = cp.Variable()

    def block(i, j):
        return C[d * i : d * (i + 1), d * j : d * (j + 1)]

    cons = [C >> 0]
    for k in range(d):
        for l in range(d):
            left = sum(block(d * k + m, d * l + m) for m in range(d))
            right = sum(block(d * m + k, d * m + l) for m in range(d))
            if k == l:
                target = np.diag(T[:, k])
            else:
                unit = np.zeros((d, d))
                unit[k, l] = pattern[k, l]
                target = t * unit
            cons += [left == target, right == target]
    prob = cp.Problem(cp.Maximize(t), cons)
    prob.solve(solver=solver)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise ContractError(f"SDP did not solve: {prob.status}")
    return float(t.value)


def swap_inputs(m: CpMap, d1: int, d2: int) -> CpMap:
    """The map ``X (x) Y -> m(Y (x) X)`` for ``m`` on ``M_{d1} (x) M_{d2}``.

    The result takes inputs ordered ``(d2, d1)``.
    """
    if m.d_in != d1 * d2:
        raise ShapeError("input factor dimensions do not match the map")
    S = np.zeros((d1 * d2, d1 * d2))
    for i in range(d1):
        for j in range(d2):
            S[i * d2 + j, j * d1 + i] = 1.0
    # S maps C^{d2} (x) C^{d1} onto C^{d1} (x) C^{d2}
    return choi_encode(lambda X: apply_cp(m, S @ X @ S.T), m.d_in, m.d_out)
