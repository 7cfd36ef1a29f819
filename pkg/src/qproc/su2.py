"""SU(2)-covariant qubit processes and bounds on the singlet fraction.

``p`` is the projector onto the singlet ``(|10> - |01>) / sqrt(2)`` and
``<p>`` its expectation on two neighbouring sites.

Covariant maps ``L: M_2 (x) M_2 -> M_2`` are fixed by their action on the
invariant pieces of the two-qubit algebra::

    L(s1 . s2) = alpha 1,   L(s1) = mu s,   L(s2) = nu s,   L(s1 x s2) = eta s

with symmetric traceless tensors sent to zero.  The three-parameter family is
``nu == mu``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from .channels import CpMap, choi_encode, cp_properties, swap_inputs
from .errors import OptimizationError, RegionError
from .fcs import FcsSpec, chain_marginal, fcs_marginal
from .mathcore import PAULI, bloch_state, partial_transpose, singlet_projector
from .rng import substream

LEVI_CIVITA = np.zeros((3, 3, 3))
for _a, _b, _c in itertools.permutations(range(3)):
    LEVI_CIVITA[_a, _b, _c] = np.linalg.det(np.eye(3)[[_a, _b, _c]])

P = singlet_projector()
P1 = np.kron(P, np.eye(2))
P2 = np.kron(np.eye(2), P)
Q3 = 4.0 / 3.0 * (P1 + P2 - P1 @ P2 - P2 @ P1)

BETHE_BOUND = {
    "expression": "log 2",
    "approximate": 0.69,
    "computed": False,
    "note": "shift-invariant SU(2) half-chain bound from the Bethe Ansatz; quoted, not computed",
}


@dataclass(frozen=True)
class Su2Params:
    alpha: float
    mu: float
    eta: float = 0.0
    nu: float | None = None

    @property
    def nu_eff(self) -> float:
        return self.mu if self.nu is None else self.nu

    @property
    def family(self) -> int:
        return 3 if self.nu is None else 4


class RegionCheck(NamedTuple):
    linear_slack: float
    quadratic_slack: float
    inside: bool
    choi_min_eig: float
    choi_psd: bool


def region_slacks(p: Su2Params) -> tuple[float, float]:
    """Slacks of the closed-form complete-positivity inequalities (>= 0 inside)."""
    a, m, n, e = p.alpha, p.mu, p.nu_eff, p.eta
    if p.family == 3:
        lin = 3 - abs(6 * m - a)
        quad = 3 - 2 * a - a * a + 12 * m - 12 * a * m - 9 * e * e
    else:
        lin = 3 - abs(3 * m + 3 * n - a)
        quad = 3 - 2 * a - a * a + 6 * (1 - a) * (m + n) - 9 * (m - n) ** 2 - 9 * e * e
    return lin, quad


def pauli_table(p: Su2Params) -> np.ndarray:
    """``table[a, b] = L(P_a (x) P_b)`` with ``P_0 = 1`` and ``P_1..3`` the Pauli matrices."""
    a, m, n, e = p.alpha, p.mu, p.nu_eff, p.eta
    table = np.zeros((4, 4, 2, 2), dtype=complex)
    table[0, 0] = PAULI[0]
    for i in range(3):
        table[i + 1, 0] = m * PAULI[i + 1]
        table[0, i + 1] = n * PAULI[i + 1]
        for j in range(3):
            out = (a / 3.0 if i == j else 0.0) * PAULI[0]
            for k in range(3):
                if LEVI_CIVITA[i, j, k]:
                    out = out + 0.5 * LEVI_CIVITA[i, j, k] * e * PAULI[k + 1]
            table[i + 1, j + 1] = out
    return table


_PAULI_PAIRS = np.array([[np.kron(PAULI[i], PAULI[j]) for j in range(4)] for i in range(4)])


def su2_lambda(p: Su2Params) -> CpMap:
    table = pauli_table(p)

    def action(X):
        coef = np.einsum("abij,ji->ab", _PAULI_PAIRS, X) / 4.0
        return np.einsum("ab,abxy->xy", coef, table)

    return choi_encode(action, 4, 2)


def region_check(p: Su2Params, tol=1e-10) -> RegionCheck:
    lin, quad = region_slacks(p)
    props = cp_properties(su2_lambda(p), tol)
    return RegionCheck(lin, quad, lin >= 0 and quad >= 0, props.min_eig, props.cp)


def su2_map_build(p: Su2Params, check=True) -> FcsSpec:
    """Stationary SU(2)-invariant process with ``rho = 1/2`` on the memory qubit.

    Raises RegionError naming the violated inequality when ``p`` lies outside
    the complete-positivity region (both the closed form and the Choi test are
    consulted).
    """
    if check:
        rc = region_check(p)
        failed = []
        if rc.linear_slack < -1e-12:
            failed.append("linear")
        if rc.quadratic_slack < -1e-12:
            failed.append("quadratic")
        if not rc.choi_psd:
            failed.append("choi")
        if failed:
            raise RegionError(f"parameters {p} outside the CP region: {', '.join(failed)}", failed)
    Lam = su2_lambda(p)
    return FcsSpec(2, Lam, np.eye(2) / 2, params=p, strict=p.family == 3 or p.mu == p.nu)


def gamma_qubit(mu) -> CpMap:
    """``G(1) = 1, G(s) = mu s``; completely positive for ``-1/3 <= mu <= 1``."""
    return choi_encode(
        lambda X: 0.5 * np.trace(X) * (1 - mu) * np.eye(2) + mu * X,
        2,
        2,
    )


def singlet_expectation(spec: FcsSpec) -> float:
    """``tr(rho_2 p)`` on the two-site marginal."""
    return float(np.trace(fcs_marginal(spec, 2) @ P).real)


def singlet_closed_form(p: Su2Params) -> float:
    """``(1 - alpha * nu) / 4``; equals ``(1 - alpha mu) / 4`` on the three-parameter family."""
    return 0.25 * (1.0 - p.alpha * p.nu_eff)


def spin_correlation(rho2) -> float:
    """``<s1 . s2>`` of a two-qubit state."""
    return float(sum(np.trace(rho2 @ np.kron(PAULI[k], PAULI[k])).real for k in range(1, 4)))


# -- Werner family -------------------------------------------------------------------------


class WernerResult(NamedTuple):
    state: np.ndarray
    singlet: float
    ppt_min_eig: float


def werner_state(lam) -> np.ndarray:
    return (1 - lam) * (np.eye(4) - P) / 3 + lam * P


def werner_analysis(lam) -> WernerResult:
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    rho = werner_state(lam)
    pt = partial_transpose(rho, [2, 2], 1)
    return WernerResult(rho, float(np.trace(rho @ P).real), float(np.linalg.eigvalsh(pt)[0]))


def werner_ppt_threshold(tol=1e-13) -> float:
    """Bisection for the sign change of the smallest partial-transpose eigenvalue."""
    lo, hi = 0.0, 1.0
    if werner_analysis(lo).ppt_min_eig < 0 or werner_analysis(hi).ppt_min_eig >= 0:
        raise OptimizationError("no sign change of the partial-transpose eigenvalue on [0, 1]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if werner_analysis(mid).ppt_min_eig >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- three qubits --------------------------------------------------------------------------


def three_qubit_state(lam, a, b, c) -> np.ndarray:
    c = complex(c)
    return 0.25 * (1 - lam) * (np.eye(8) - Q3) + lam * (
        a * P1 + b * P2 + c * (P1 @ P2) + np.conj(c) * (P2 @ P1)
    )


# -- period-2 processes --------------------------------------------------------------------


def period2_closed_form(p1: Su2Params, p2: Su2Params) -> float:
    return 0.25 - 0.125 * (p2.alpha * p1.mu + p1.alpha * p2.nu_eff)


def period2_singlet(p1: Su2Params, p2: Su2Params, mirrored=True) -> float:
    """``<p>`` of the equal-weight mixture of the two phases of an alternating process.

    The maps alternate from site to site.  With ``mirrored`` the first map
    takes the new site in its first tensor slot and the memory in its second
    (the second map uses the memory-first order throughout); without it both
    maps use the memory-first order.
    """
    L1, L2 = su2_lambda(p1), su2_lambda(p2)
    if mirrored:
        L1 = swap_inputs(L1, 2, 2)
    rho = np.eye(2) / 2
    phase_a = chain_marginal([L1, L2], rho, 2)
    phase_b = chain_marginal([L2, L1], rho, 2)
    mix = 0.5 * (phase_a + phase_b)
    return float(np.trace(mix @ P).real)


# -- optimizers ----------------------------------------------------------------------------


class OptResult(NamedTuple):
    value: float
    argmax: dict
    region_check: dict


def _maximize(
    fun: Callable[[np.ndarray], float],
    bounds: Sequence[tuple[float, float]],
    ineq: Callable[[np.ndarray], np.ndarray] | None = None,
    eq: Callable[[np.ndarray], np.ndarray] | None = None,
    grid=5,
    keep=8,
    extra_starts=0,
    seed=0,
    feas_tol=1e-9,
):
    """Coarse grid over the box, then SLSQP refinement from the best feasible points."""
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    axes = [np.linspace(l, h, grid) for l, h in zip(lo, hi)]
    scored = []
    for pt in itertools.product(*axes):
        x = np.array(pt)
        if ineq is not None and np.min(ineq(x)) < 0:
            continue
        scored.append((fun(x), x))
    scored.sort(key=lambda t: -t[0])
    starts = [x for _, x in scored[:keep]]
    rng = substream(seed, "su2/optimizer")
    for _ in range(extra_starts):
        starts.append(rng.uniform(lo, hi))
    if not starts:
        starts = [0.5 * (lo + hi)]
    cons = []
    if ineq is not None:
        cons.append({"type": "ineq", "fun": ineq})
    if eq is not None:
        cons.append({"type": "eq", "fun": eq})
    best = None
    for x0 in starts:
        res = minimize(
            lambda x: -fun(x),
            x0,
            method="SLSQP",
            bounds=list(zip(lo, hi)),
            constraints=cons,
            options={"ftol": 1e-15, "maxiter": 1000},
        )
        x = res.x
        ok = True
        if ineq is not None and np.min(ineq(x)) < -feas_tol:
            ok = False
        if eq is not None and np.max(np.abs(eq(x))) > feas_tol:
            ok = False
        if ok and (best is None or fun(x) > best[0]):
            best = (fun(x), x)
    if best is None:
        raise OptimizationError("no feasible point found")
    return best


def _into_ball(x):
    n = np.linalg.norm(x)
    return x / n if n > 1 else x


def _ball(x):
    return np.array([1.0 - np.dot(x, x)])


def _opt_exchangeable(seed):
    def fun(x):
        rho = bloch_state(x)
        return float(np.trace(np.kron(rho, rho) @ P).real)

    val, x = _maximize(fun, [(-1, 1)] * 3, ineq=_ball, grid=7, seed=seed)
    return OptResult(val, {"x": x.tolist()}, {"bloch_norm": float(np.linalg.norm(x))})


def _opt_separable(seed):
    def fun(v):
        return float(np.trace(np.kron(bloch_state(v[:3]), bloch_state(v[3:])) @ P).real)

    def ineq(v):
        return np.concatenate([_ball(v[:3]), _ball(v[3:])])

    _, v = _maximize(fun, [(-1, 1)] * 6, ineq=ineq, grid=3, keep=12, extra_starts=8, seed=seed)
    x1, x2 = _into_ball(v[:3]), _into_ball(v[3:])
    val = fun(np.concatenate([x1, x2]))
    # the Neel mixture realises the bound as a shift-invariant state
    e0, e1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    neel = 0.5 * (np.kron(e0, e1) + np.kron(e1, e0))
    return OptResult(
        val,
        {"x1": x1.tolist(), "x2": x2.tolist()},
        {
            "norms": [float(np.linalg.norm(x1)), float(np.linalg.norm(x2))],
            "x1_plus_x2": float(np.linalg.norm(x1 + x2)),
            "neel_singlet": float(np.trace(neel @ P).real),
        },
    )


def _cp3_ineq(v):
    lin, quad = region_slacks(Su2Params(v[0], v[1], v[2]))
    a, m = v[0], v[1]
    return np.array([3 - (6 * m - a), 3 + (6 * m - a), quad])


def _opt_su2_stationary(seed):
    def fun(v):
        return singlet_closed_form(Su2Params(v[0], v[1], v[2]))

    val, v = _maximize(fun, [(-3, 1), (-1 / 3, 1), (-1.2, 1.2)], ineq=_cp3_ineq, grid=9, seed=seed)
    p = Su2Params(float(v[0]), float(v[1]), float(v[2]))
    rc = region_check(p, tol=1e-9)
    spec = su2_map_build(Su2Params(p.alpha, p.mu, p.eta), check=False)
    return OptResult(
        val,
        {"alpha": p.alpha, "mu": p.mu, "eta": p.eta},
        {
            "linear_slack": rc.linear_slack,
            "quadratic_slack": rc.quadratic_slack,
            "choi_min_eig": rc.choi_min_eig,
            "choi_psd": rc.choi_psd,
            "fcs_singlet": singlet_expectation(spec),
        },
    )


def _cp4_ineq(v):
    a, m, n = v
    quad = 3 - 2 * a - a * a + 6 * (1 - a) * (m + n) - 9 * (m - n) ** 2
    s = 3 * m + 3 * n - a
    return np.array([3 - s, 3 + s, quad])


def _opt_period2(seed):
    def fun(v):
        return period2_closed_form(Su2Params(v[0], v[1], 0.0, v[2]), Su2Params(v[3], v[4], 0.0, v[5]))

    def ineq(v):
        return np.concatenate([_cp4_ineq(v[:3]), _cp4_ineq(v[3:])])

    bounds = [(-3, 1), (-1, 1), (-1, 1)] * 2
    val, v = _maximize(fun, bounds, ineq=ineq, grid=4, keep=16, extra_starts=16, seed=seed)
    p1 = Su2Params(float(v[0]), float(v[1]), 0.0, float(v[2]))
    p2 = Su2Params(float(v[3]), float(v[4]), 0.0, float(v[5]))
    r1, r2 = region_check(p1, tol=1e-9), region_check(p2, tol=1e-9)
    return OptResult(
        val,
        {
            "map1": {"alpha": p1.alpha, "mu": p1.mu, "nu": p1.nu, "eta": 0.0},
            "map2": {"alpha": p2.alpha, "mu": p2.mu, "nu": p2.nu, "eta": 0.0},
        },
        {
            "map1_choi_psd": r1.choi_psd,
            "map2_choi_psd": r2.choi_psd,
            "map1_choi_min_eig": r1.choi_min_eig,
            "map2_choi_min_eig": r2.choi_min_eig,
            "composed_mirrored": period2_singlet(p1, p2, mirrored=True),
            "composed_memory_first": period2_singlet(p1, p2, mirrored=False),
        },
    )


def _three_qubit_parts(v):
    rho = three_qubit_state(v[0], v[1], v[2], v[3] + 1j * v[4])
    return rho, np.trace(rho @ P1).real, np.trace(rho @ P2).real


def _opt_three_qubit(seed):
    def fun(v):
        return float(_three_qubit_parts(v)[1])

    def ineq(v):
        rho = _three_qubit_parts(v)[0]
        return np.array([4 * v[1] * v[2] - v[3] ** 2 - v[4] ** 2, np.linalg.eigvalsh(rho)[0]])

    def eq(v):
        _, e1, e2 = _three_qubit_parts(v)
        return np.array([2 * v[1] + 2 * v[2] + v[3] - 1, e1 - e2])

    bounds = [(0, 1), (-1, 1), (-1, 1), (-1, 1), (-1, 1)]
    val, v = _maximize(fun, bounds, ineq=ineq, eq=eq, grid=5, keep=16, extra_starts=16, seed=seed)
    rho, e1, e2 = _three_qubit_parts(v)
    return OptResult(
        val,
        {"lambda": float(v[0]), "a": float(v[1]), "b": float(v[2]), "c": [float(v[3]), float(v[4])]},
        {
            "min_eig": float(np.linalg.eigvalsh(rho)[0]),
            "trace": float(np.trace(rho).real),
            "p1": float(e1),
            "p2": float(e2),
            "c_bound_slack": float(4 * v[1] * v[2] - v[3] ** 2 - v[4] ** 2),
        },
    )


MODES = {
    "exchangeable": _opt_exchangeable,
    "separable": _opt_separable,
    "su2_stationary": _opt_su2_stationary,
    "period2": _opt_period2,
    "three_qubit_su2": _opt_three_qubit,
}


def optimize_singlet(mode: str, seed: int = 0) -> OptResult:
    """Largest ``<p>`` within one class of states; see ``MODES`` for the classes."""
    try:
        fn = MODES[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; choose from {sorted(MODES)}") from None
    return fn(seed)
