import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qproc.errors import InvalidDistributionError, ShapeError
from qproc.mathcore import (
    bloch_state,
    haar_unitary,
    kron_all,
    partial_trace,
    partial_transpose,
    psd_check,
    pure_state,
    random_density_matrix,
    shannon_entropy,
    singlet_projector,
    swap_operator,
    von_neumann_entropy,
)

LOG2 = 0.6931471805599453
# -0.2 log 0.2 - 0.8 log 0.8 at 30 digits
H_02 = 0.500402423538187851799951317152

PHI_PLUS = pure_state(np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_shannon_examples():
    assert abs(shannon_entropy([0.5, 0.5]) - LOG2) < 1e-15
    assert shannon_entropy([1.0, 0.0]) == 0.0
    assert abs(shannon_entropy([0.2, 0.8]) - H_02) < 1e-15


def test_shannon_rejects_negative():
    with pytest.raises(InvalidDistributionError):
        shannon_entropy([1.1, -0.1])
    with pytest.raises(InvalidDistributionError):
        shannon_entropy([0.3, 0.3])


@given(st.lists(st.floats(0, 1), min_size=1, max_size=8).filter(lambda v: sum(v) > 1e-3))
def test_shannon_bounds(v):
    p = np.array(v) / sum(v)
    h = shannon_entropy(p)
    assert -1e-15 <= h <= np.log(len(p)) + 1e-12


def test_von_neumann_examples():
    assert abs(von_neumann_entropy(np.eye(2) / 2) - LOG2) < 1e-14
    assert abs(von_neumann_entropy(PHI_PLUS)) < 1e-12
    assert abs(von_neumann_entropy(singlet_projector())) < 1e-12


def test_von_neumann_non_hermitian():
    with pytest.raises(ShapeError):
        von_neumann_entropy(np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_von_neumann_clipping_window():
    # tiny negative eigenvalue is clipped, a larger one is an error
    assert von_neumann_entropy(np.diag([1 + 5e-11, -5e-11])) < 1e-9
    with pytest.raises(InvalidDistributionError):
        von_neumann_entropy(np.diag([1.001, -0.001]))


def test_von_neumann_unitary_invariance(rng):
    for d in (2, 3, 5):
        rho = random_density_matrix(d, rng)
        U = haar_unitary(d, rng)
        assert abs(von_neumann_entropy(U @ rho @ U.conj().T) - von_neumann_entropy(rho)) < 1e-10
        assert 0 <= von_neumann_entropy(rho) <= np.log(d) + 1e-12


def _ptrace_loops(rho, dims, keep):
    """Index-by-index contraction, the reference for partial_trace."""
    n = len(dims)
    T = rho.reshape(list(dims) * 2)
    kd = [dims[k] for k in keep]
    out = np.zeros((int(np.prod(kd)),) * 2, dtype=complex)
    drop = [k for k in range(n) if k not in keep]
    for ki in itertools.product(*[range(d) for d in kd]):
        for kj in itertools.product(*[range(d) for d in kd]):
            s = 0
            for t in itertools.product(*[range(dims[k]) for k in drop]):
                a, b = [0] * n, [0] * n
                for pos, k in enumerate(keep):
                    a[k], b[k] = ki[pos], kj[pos]
                for pos, k in enumerate(drop):
                    a[k] = b[k] = t[pos]
                s += T[tuple(a) + tuple(b)]
            out[np.ravel_multi_index(ki, kd), np.ravel_multi_index(kj, kd)] = s
    return out


def test_partial_trace_examples(rng):
    assert np.abs(partial_trace(PHI_PLUS, [2, 2], [0]) - np.eye(2) / 2).max() < 1e-15
    r, s = random_density_matrix(2, rng), random_density_matrix(3, rng)
    assert np.abs(partial_trace(np.kron(r, s), [2, 3], [0]) - r).max() < 1e-14
    rho = random_density_matrix(8, rng)
    for keep in ([0], [1, 2], [0, 2]):
        out = partial_trace(rho, [2, 2, 2], keep)
        assert abs(np.trace(out) - 1) < 1e-12
        assert np.abs(out - _ptrace_loops(rho, [2, 2, 2], keep)).max() < 1e-14


def test_partial_trace_composes(rng):
    rho = random_density_matrix(12, rng)
    dims = [2, 3, 2]
    once = partial_trace(rho, dims, [0])
    twice = partial_trace(partial_trace(rho, dims, [0, 1]), [2, 3], [0])
    assert np.abs(once - twice).max() < 1e-12


def test_partial_trace_dims_mismatch():
    with pytest.raises(ShapeError):
        partial_trace(np.eye(4) / 4, [2, 3], [0])


def test_pure_marginal_factorizes(rng):
    for _ in range(10):
        psi = rng.normal(size=3) + 1j * rng.normal(size=3)
        r1 = pure_state(psi / np.linalg.norm(psi))
        sigma = random_density_matrix(2, rng)
        rho = np.kron(r1, sigma)
        m1 = partial_trace(rho, [3, 2], [0])
        m2 = partial_trace(rho, [3, 2], [1])
        assert np.linalg.norm(rho - np.kron(m1, m2)) < 1e-10


def test_psd_check_examples():
    ok, lam = psd_check(np.eye(3))
    assert ok and lam == 1.0
    assert not psd_check(np.diag([1.0, -1e-3]), tol=1e-9).ok
    res = psd_check(swap_operator(2))
    assert not res.ok and abs(res.min_eig + 1) < 1e-14


def test_partial_transpose_of_swap_is_maximally_entangled():
    pt = partial_transpose(swap_operator(2), [2, 2], 1)
    assert np.abs(pt - 2 * PHI_PLUS).max() < 1e-14


def test_bloch_state_and_kron():
    rho = bloch_state([0, 0, 1])
    assert np.allclose(rho, np.diag([1, 0]))
    assert kron_all([np.eye(2), np.eye(3)]).shape == (6, 6)


@settings(max_examples=30)
@given(st.integers(0, 2**31 - 1))
def test_random_density_matrix_valid(seed):
    rho = random_density_matrix(4, np.random.default_rng(seed))
    assert abs(np.trace(rho) - 1) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-12
