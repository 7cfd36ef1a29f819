"""Finitely correlated states generated by a compatible pair of CP maps.

``Lambda`` maps ``M_d (x) M_d -> M_d`` in the Heisenberg picture; its first
tensor slot is the memory and its second slot the newly added site.  For
local observables on sites ``0..n-1``::

    omega(A_0 (x) ... (x) A_{n-1})
        = tr rho Lambda(... Lambda(Lambda(1 (x) A_0) (x) A_1) ... (x) A_{n-1})

so the innermost map absorbs site 0.  ``Gamma(A) = Lambda(A (x) 1)`` is the
memory transfer map and ``rho`` must be invariant under its state action.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .channels import CpMap, adjoint, apply_cp, apply_on_first, choi_encode, cp_properties
from .errors import ContractError, ShapeError, SizeError
from .mathcore import check_density_matrix, partial_trace, von_neumann_entropy

MAX_SITES_DIM = 2**12
SPEC_TOL = 1e-10


def _units(d):
    for i in range(d):
        for j in range(d):
            u = np.zeros((d, d), dtype=complex)
            u[i, j] = 1.0
            yield u


def memory_map(Lambda: CpMap, d: int) -> CpMap:
    """``A -> Lambda(A (x) 1)``."""
    return choi_encode(lambda A: apply_cp(Lambda, np.kron(A, np.eye(d))), d, d)


def site_map(Lambda: CpMap, d: int) -> CpMap:
    """``A -> Lambda(1 (x) A)``."""
    return choi_encode(lambda A: apply_cp(Lambda, np.kron(np.eye(d), A)), d, d)


@dataclass
class FcsSpec:
    """Data ``(Lambda, Gamma, rho)`` of a finitely correlated process.

    With ``strict`` (the default) the construction checks unitality of
    ``Lambda``, the two-sided compatibility ``Lambda(A (x) 1) = Lambda(1 (x) A)
    = Gamma(A)`` and invariance of ``rho``.  ``strict=False`` only requires
    ``Gamma`` to be the memory map, which is all that consistency of the
    process needs.
    """

    d: int
    Lambda: CpMap
    rho: np.ndarray
    Gamma: CpMap = None
    params: object = field(default=None, repr=False)
    strict: bool = field(default=True, repr=False)

    def __post_init__(self):
        d = self.d
        if self.Lambda.d_in != d * d or self.Lambda.d_out != d:
            raise ShapeError("Lambda must map M_d (x) M_d to M_d")
        if self.Gamma is None:
            self.Gamma = memory_map(self.Lambda, d)
        self.rho = check_density_matrix(np.asarray(self.rho, dtype=complex))
        unital = np.abs(apply_cp(self.Lambda, np.eye(d * d)) - np.eye(d)).max()
        if unital > SPEC_TOL:
            raise ContractError(f"Lambda is not unital (residual {unital:.3e})")
        inv = invariance_residual(self)
        if inv > SPEC_TOL:
            raise ContractError(f"rho is not invariant under Gamma (residual {inv:.3e})")
        if self.strict:
            comp = compatibility_residual(self)
            if comp > SPEC_TOL:
                raise ContractError(f"Lambda is not compatible with Gamma (residual {comp:.3e})")
        else:
            mem = memory_residual(self)
            if mem > SPEC_TOL:
                raise ContractError(f"Gamma is not the memory map of Lambda (residual {mem:.3e})")


def compatibility_residual(spec: FcsSpec) -> float:
    """Largest deviation of ``Lambda(A (x) 1)`` and ``Lambda(1 (x) A)`` from ``Gamma(A)``."""
    d = spec.d
    worst = 0.0
    one = np.eye(d)
    for A in _units(d):
        g = apply_cp(spec.Gamma, A)
        worst = max(
            worst,
            np.linalg.norm(apply_cp(spec.Lambda, np.kron(A, one)) - g, 2),
            np.linalg.norm(apply_cp(spec.Lambda, np.kron(one, A)) - g, 2),
        )
    return float(worst)


def memory_residual(spec: FcsSpec) -> float:
    d = spec.d
    return float(
        max(
            np.linalg.norm(apply_cp(spec.Lambda, np.kron(A, np.eye(d))) - apply_cp(spec.Gamma, A), 2)
            for A in _units(d)
        )
    )


def invariance_residual(spec: FcsSpec) -> float:
    moved = apply_cp(adjoint(spec.Gamma), spec.rho)
    return float(np.abs(moved - spec.rho).max())


def iid_spec(rho) -> FcsSpec:
    """Product process ``rho (x) rho (x) ...``."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    pair = np.kron(rho, rho)
    Lam = choi_encode(lambda X: np.trace(pair @ X) * np.eye(d), d * d, d)
    return FcsSpec(d, Lam, rho)


def _size_guard(d, n):
    if d**n > MAX_SITES_DIM:
        raise SizeError(f"{n} sites of dimension {d} exceed the dense limit {MAX_SITES_DIM}")


def chain_marginal(maps: Sequence[CpMap], rho, d: int) -> np.ndarray:
    """Density matrix of sites ``0..len(maps)-1`` when ``maps[k]`` absorbs site ``k``.

    State picture: starting from ``rho`` on the memory, apply the dual of the
    outermost map first; each step splits the memory into memory (x) site and
    the new site is placed in front of those already produced.
    """
    n = len(maps)
    _size_guard(d, n)
    tau = np.asarray(rho, dtype=complex)
    rest = 1
    for m in reversed(maps):
        tau = apply_on_first(adjoint(m), tau, rest)
        rest *= d
    if n == 0:
        return np.ones((1, 1), dtype=complex) * np.trace(tau)
    out = partial_trace(tau, [d] + [d] * n, list(range(1, n + 1)))
    return 0.5 * (out + out.conj().T)


def fcs_marginal(spec: FcsSpec, n: int) -> np.ndarray:
    """Density matrix of ``n`` consecutive sites."""
    return chain_marginal([spec.Lambda] * n, spec.rho, spec.d)


def chain_expectation(maps: Sequence[CpMap], rho, d: int, A) -> complex:
    """Heisenberg evaluation of ``omega(A)`` for ``A`` on ``len(maps)`` sites."""
    n = len(maps)
    _size_guard(d, n)
    A = np.asarray(A)
    if A.shape != (d**n, d**n):
        raise ShapeError(f"observable of shape {A.shape} on {n} sites of dimension {d}")
    Y = np.kron(np.eye(d), A)
    rest = d**n
    for m in maps:
        rest //= d
        Y = apply_on_first(m, Y, rest)
    return complex(np.trace(np.asarray(rho) @ Y))


def fcs_expectation(spec: FcsSpec, A) -> complex:
    n = int(round(np.log(np.asarray(A).shape[0]) / np.log(spec.d)))
    return chain_expectation([spec.Lambda] * n, spec.rho, spec.d, A)


def heisenberg_marginal(spec: FcsSpec, n: int) -> np.ndarray:
    """``fcs_marginal`` recomputed from expectations of all matrix units."""
    dim = spec.d**n
    out = np.zeros((dim, dim), dtype=complex)
    maps = [spec.Lambda] * n
    for i in range(dim):
        for j in range(dim):
            unit = np.zeros((dim, dim))
            unit[i, j] = 1.0
            # tr(rho_n e_ij) = (rho_n)_{ji}
            out[j, i] = chain_expectation(maps, spec.rho, spec.d, unit)
    return out


def consistency_residual(spec: FcsSpec, n: int) -> float:
    """Deviation of the last-site and first-site restrictions of the ``n + 1`` site marginal."""
    big = fcs_marginal(spec, n + 1)
    small = fcs_marginal(spec, n)
    dims = [spec.d] * (n + 1)
    left = partial_trace(big, dims, list(range(n)))
    right = partial_trace(big, dims, list(range(1, n + 1)))
    return float(max(np.abs(left - small).max(), np.abs(right - small).max()))


class EntropySequence(NamedTuple):
    entropies: np.ndarray  # entropies[k - 1] = H of k consecutive sites
    increments: np.ndarray  # entropies[k - 1] - entropies[k - 2], with H of 0 sites = 0
    non_decreasing: bool
    increments_non_increasing: bool


def fcs_entropy_sequence(spec: FcsSpec, n_max: int, tol=1e-10) -> EntropySequence:
    _size_guard(spec.d, n_max)
    H = np.array([von_neumann_entropy(fcs_marginal(spec, k)) for k in range(1, n_max + 1)])
    inc = np.diff(np.concatenate([[0.0], H]))
    return EntropySequence(
        H,
        inc,
        bool(np.all(np.diff(H) >= -tol)),
        bool(np.all(np.diff(inc) <= tol)),
    )


def check_cp(spec: FcsSpec, tol=1e-10) -> bool:
    return cp_properties(spec.Lambda, tol).cp
