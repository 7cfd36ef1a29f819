"""Classical Markov chains: invariant laws, Markov extensions, entropy rates.

Joint laws are dense numpy arrays with one axis per site, ``omega[e0, e1, ...]``.
Stochastic matrices act on row vectors: ``mu @ T`` is the law one step later.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import (
    AmbiguityError,
    IncompatibilityError,
    InvalidDistributionError,
    ShapeError,
    SizeError,
    StationarityError,
)
from .mathcore import check_prob_vector, shannon_entropy

# 2**12 entries: arity 12 for a binary alphabet
MAX_JOINT_ENTRIES = 4096
STOCH_TOL = 1e-12


def check_stochastic(T, tol=STOCH_TOL) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ShapeError(f"stochastic matrix must be square, got {T.shape}")
    if T.min() < -tol:
        raise InvalidDistributionError(f"negative transition probability {T.min():.3e}")
    dev = np.abs(T.sum(axis=1) - 1.0).max()
    if dev > tol * T.shape[0]:
        raise InvalidDistributionError(f"rows do not sum to one (deviation {dev:.3e})")
    return T


def check_joint(omega, tol=1e-10) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    d = omega.shape[0] if omega.ndim else 0
    if omega.ndim == 0 or any(s != d for s in omega.shape):
        raise ShapeError(f"joint law must have equal axis lengths, got {omega.shape}")
    if omega.min() < -tol:
        raise InvalidDistributionError(f"negative joint probability {omega.min():.3e}")
    if abs(omega.sum() - 1.0) > tol:
        raise InvalidDistributionError(f"joint law has total mass {omega.sum()!r}")
    return omega


def marginal(omega, keep) -> np.ndarray:
    """Marginal of a joint law on the sites listed in ``keep``."""
    omega = np.asarray(omega)
    keep = set(np.atleast_1d(keep).tolist())
    drop = tuple(ax for ax in range(omega.ndim) if ax not in keep)
    return omega.sum(axis=drop)


def joint_entropy(omega) -> float:
    return shannon_entropy(np.asarray(omega).ravel(), tol=1e-10)


def is_ergodic(T) -> bool:
    """Strict positivity of ``T**(d*d)``: irreducible and aperiodic."""
    T = np.asarray(T, dtype=float)
    d = T.shape[0]
    pattern = (T > 0).astype(float)
    power = np.linalg.matrix_power(pattern, d * d)
    return bool(np.all(power > 0))


def invariant_measure(T, allow_degenerate=False, tol=1e-12) -> np.ndarray:
    """Row vector ``mu`` with ``mu @ T == mu``.

    The chain must be irreducible and aperiodic unless ``allow_degenerate`` is
    set; for a non-ergodic chain the returned vector is the stationary law of
    the lazy chain started from the uniform law.
    """
    T = check_stochastic(T)
    d = T.shape[0]
    ergodic = is_ergodic(T)
    if not ergodic and not allow_degenerate:
        raise AmbiguityError("chain is not irreducible and aperiodic; invariant law may not be unique")
    mu = None
    if ergodic:
        w, v = np.linalg.eig(T.T)
        k = int(np.argmin(np.abs(w - 1.0)))
        cand = np.real(v[:, k])
        cand = cand / cand.sum()
        if cand.min() >= -tol:
            mu = np.clip(cand, 0.0, None)
            mu = mu / mu.sum()
    if mu is None or np.abs(mu @ T - mu).sum() >= tol:
        mu = _lazy_power_iteration(T, np.full(d, 1.0 / d), tol)
    else:
        # one refinement sweep through the linear system
        mu = _polish(T, mu)
    return mu


def _polish(T, mu):
    d = T.shape[0]
    system = np.vstack([T.T - np.eye(d), np.ones((1, d))])
    rhs = np.concatenate([np.zeros(d), [1.0]])
    sol, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    if sol.min() < -1e-14 or np.abs(sol @ T - sol).sum() > np.abs(mu @ T - mu).sum():
        return mu
    sol = np.clip(sol, 0.0, None)
    return sol / sol.sum()


def _lazy_power_iteration(T, mu, tol, max_iter=1_000_000):
    lazy = 0.5 * (T + np.eye(T.shape[0]))
    for _ in range(max_iter):
        nxt = mu @ lazy
        if np.abs(nxt - mu).sum() < tol * 1e-2:
            mu = nxt
            break
        mu = nxt
    return mu / mu.sum()


def markov_extension(mu12, nu23, tol=1e-12) -> np.ndarray:
    """Maximal-entropy joint extension of two overlapping pair laws.

    ``xi[e1, e2, e3] = mu12[e1, e2] * nu23[e2, e3] / mu2[e2]``; terms with a
    zero middle probability are set to zero.
    """
    mu12 = np.asarray(mu12, dtype=float)
    nu23 = np.asarray(nu23, dtype=float)
    if mu12.ndim != 2 or nu23.ndim != 2 or mu12.shape[1] != nu23.shape[0]:
        raise ShapeError(f"incompatible pair shapes {mu12.shape} and {nu23.shape}")
    mid_left = mu12.sum(axis=0)
    mid_right = nu23.sum(axis=1)
    dev = float(np.abs(mid_left - mid_right).max())
    if dev > tol:
        raise IncompatibilityError(f"middle marginals differ by {dev:.3e}", deviation=dev)
    inv = np.zeros_like(mid_left)
    nz = mid_left > 0
    inv[nz] = 1.0 / mid_left[nz]
    return mu12[:, :, None] * inv[None, :, None] * nu23[None, :, :]


def pair_to_stochastic(mu12) -> np.ndarray:
    """Transition matrix ``T[a, b] = mu12[a, b] / mu1[a]`` of a pair law."""
    mu12 = np.asarray(mu12, dtype=float)
    first = mu12.sum(axis=1)
    T = np.zeros_like(mu12)
    nz = first > 0
    T[nz] = mu12[nz] / first[nz, None]
    T[~nz, :] = 1.0 / mu12.shape[0]
    return T


def _check_size(d, n):
    if d ** (n + 1) > MAX_JOINT_ENTRIES:
        raise SizeError(f"joint law over {n + 1} sites of {d} letters exceeds {MAX_JOINT_ENTRIES} entries")


def extend_pair_law(mu12, n) -> np.ndarray:
    """Stationary process on ``n + 1`` sites from a shift-invariant pair law.

    Repeated Markov extension: each new site is glued on with ``mu12`` along
    the previous last site.
    """
    mu12 = np.asarray(mu12, dtype=float)
    d = mu12.shape[0]
    _check_size(d, n)
    left, right = mu12.sum(axis=1), mu12.sum(axis=0)
    dev = float(np.abs(left - right).max())
    if dev > 1e-12:
        raise StationarityError(f"pair law is not shift invariant (deviation {dev:.3e})")
    if n == 0:
        return left.copy()
    omega = mu12.copy()
    for _ in range(n - 1):
        last = marginal(omega, omega.ndim - 1)
        inv = np.zeros_like(last)
        inv[last > 0] = 1.0 / last[last > 0]
        omega = omega[..., None] * (inv[:, None] * mu12)
    return omega


def markov_joint(T, mu, n: int, tol=1e-12) -> np.ndarray:
    """Joint law of ``n + 1`` consecutive sites of the stationary chain.

    ``omega[e0, ..., en] = mu[e0] * T[e0, e1] * ... * T[e_{n-1}, e_n]``.
    """
    T = check_stochastic(T)
    mu = check_prob_vector(mu)
    if mu.shape[0] != T.shape[0]:
        raise ShapeError("mu and T have different dimensions")
    dev = float(np.abs(mu @ T - mu).sum())
    if dev > tol * max(1, T.shape[0]):
        raise StationarityError(f"mu is not invariant for T (|mu T - mu|_1 = {dev:.3e})")
    if n < 0:
        raise ShapeError("n must be non-negative")
    _check_size(T.shape[0], n)
    omega = mu.copy()
    for _ in range(n):
        omega = omega[..., None] * T[(None,) * (omega.ndim - 1)]
    return omega


def row_entropies(T) -> np.ndarray:
    T = check_stochastic(T)
    return np.array([shannon_entropy(row) for row in T])


class EntropyRate(NamedTuple):
    h: float
    h_min: float
    increment: float  # H_2 - H_1 from the enumerated joint law, a cross-check of h


def entropy_rate_classical(T, mu=None) -> EntropyRate:
    """Entropy rate and minimal output entropy of a stationary Markov chain.

    ``h`` is the ``mu``-average of the row entropies of ``T``; ``h_min`` the
    smallest row entropy.
    """
    T = check_stochastic(T)
    if mu is None:
        mu = invariant_measure(T)
    rows = row_entropies(T)
    h = float(np.dot(mu, rows))
    d = T.shape[0]
    n = 2 if d**3 <= MAX_JOINT_ENTRIES else 1
    if d ** (n + 1) <= MAX_JOINT_ENTRIES:
        inc = joint_entropy(markov_joint(T, mu, n)) - joint_entropy(markov_joint(T, mu, n - 1))
    else:
        inc = float("nan")
    return EntropyRate(h, float(rows.min()), float(inc))


def block_entropies(omega_n) -> np.ndarray:
    """``[H_0, H_1, ..., H_n]`` of a stationary joint law on ``n + 1`` sites."""
    omega_n = np.asarray(omega_n)
    out = []
    for k in range(1, omega_n.ndim + 1):
        out.append(joint_entropy(marginal(omega_n, range(k))))
    return np.array(out)


def ssa_residual(xi) -> float:
    """``H(xi12) + H(xi23) - H(xi123) - H(xi2)``; non-negative for any law."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 3:
        raise ShapeError("strong sub-additivity residual needs a three-site law")
    h12 = joint_entropy(xi.sum(axis=2))
    h23 = joint_entropy(xi.sum(axis=0))
    h2 = joint_entropy(xi.sum(axis=(0, 2)))
    return h12 + h23 - joint_entropy(xi) - h2


def random_stochastic(d, rng, positive=True) -> np.ndarray:
    T = rng.random((d, d)) if positive else rng.random((d, d)) * (rng.random((d, d)) < 0.7)
    T[T.sum(axis=1) == 0, 0] = 1.0
    return T / T.sum(axis=1, keepdims=True)
