import numpy as np
import pytest

from qproc.errors import ContractError, NonContractiveError, ShapeError
from qproc.fermion import (
    FermionProcessSpec,
    FreeCpMap,
    check_symbol,
    entropy_rate_integral,
    entropy_rate_truncation,
    extension_check,
    free_cp_apply,
    free_cp_compose,
    free_cp_validate,
    invariant_symbol,
    qinf_truncation,
    sample_specs,
    spec_from_dict,
    symbol_entropy,
    symbol_function,
)

LOG2 = np.log(2)
H_02 = 0.500402423538187851799951317152
# (1/2pi) int h(q(theta)) for the shipped scalar spec, mpmath quadrature at 25 digits
SCALAR_RATE = 0.6804533040617591901704791


def random_symbol(m, rng):
    U = np.linalg.qr(rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))[0]
    return U @ np.diag(rng.uniform(0, 1, m)) @ U.conj().T


def random_free_map(m, rng, shrink=0.9):
    A = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    A *= shrink / np.linalg.norm(A, 2)
    gap = np.eye(m) - A.conj().T @ A
    w, V = np.linalg.eigh(gap)
    B = V @ np.diag(w * rng.uniform(0, 1, m)) @ V.conj().T
    B = 0.5 * (B + B.conj().T)
    return FreeCpMap(A, B)


def random_spec(m, rng):
    while True:
        fm = random_free_map(m, rng, shrink=rng.uniform(0.1, 0.7))
        X = 0.1 * (rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))
        rep = extension_check(fm.A, fm.B, X)
        if rep.exists and rep.cd_valid:
            return FermionProcessSpec(fm.A, fm.B, X)


def test_free_cp_examples(rng):
    Q = random_symbol(3, rng)
    assert np.abs(free_cp_apply(FreeCpMap(np.eye(3), np.zeros((3, 3))), Q) - Q).max() < 1e-15
    Q0 = random_symbol(3, rng)
    assert np.abs(free_cp_apply(FreeCpMap(np.zeros((3, 3)), Q0), Q) - Q0).max() < 1e-15
    rep = free_cp_validate([[0.6]], [[0.5]])
    assert rep.valid and abs(rep.gap_min_eig - 0.14) < 1e-15
    for q in (0.0, 0.3, 1.0):
        assert abs(free_cp_apply(FreeCpMap([[0.6]], [[0.5]]), [[q]])[0, 0] - (0.36 * q + 0.5)) < 1e-15


def test_invalid_map():
    assert not free_cp_validate([[0.9]], [[0.5]]).valid
    with pytest.raises(ContractError):
        free_cp_apply(FreeCpMap([[0.9]], [[0.5]]), [[0.5]])
    with pytest.raises(ShapeError):
        FreeCpMap(np.eye(2), np.eye(3))


def test_apply_keeps_symbols(rng):
    for _ in range(50):
        m = random_free_map(3, rng)
        out = free_cp_apply(m, random_symbol(3, rng))
        ev = np.linalg.eigvalsh(out)
        assert ev.min() > -1e-12 and ev.max() < 1 + 1e-12


def test_compose(rng):
    m1, m2, m3 = (random_free_map(3, rng) for _ in range(3))
    Q = random_symbol(3, rng)
    c = free_cp_compose(m1, m2)
    assert c.validate().valid
    assert np.abs(free_cp_apply(c, Q) - free_cp_apply(m2, free_cp_apply(m1, Q))).max() < 1e-12
    ident = FreeCpMap(np.eye(3), np.zeros((3, 3)))
    for a, b in ((free_cp_compose(ident, m1), m1), (free_cp_compose(m1, ident), m1)):
        assert np.abs(a.A - b.A).max() < 1e-15 and np.abs(a.B - b.B).max() < 1e-15
    zero = FreeCpMap(np.zeros((3, 3)), m2.B)
    c0 = free_cp_compose(m1, zero)
    assert np.abs(c0.A).max() == 0 and np.abs(c0.B - m2.B).max() < 1e-15
    left = free_cp_compose(free_cp_compose(m1, m2), m3)
    right = free_cp_compose(m1, free_cp_compose(m2, m3))
    assert np.abs(left.A - right.A).max() < 1e-12 and np.abs(left.B - right.B).max() < 1e-12


def test_extension_examples():
    a = np.sqrt(0.4)
    rep = extension_check([[a]], [[0.0]], [[0.0]])
    assert rep.exists and rep.cd_valid
    assert not extension_check([[1.0]], [[0.0]], [[0.0]]).exists
    rep = extension_check([[a]], [[0.0]], [[100.0]])
    assert rep.exists and not rep.cd_valid
    # second condition: A*A <= 1 - B fails while A*A <= 1/2 holds
    assert not extension_check([[0.6]], [[0.7]], [[0.0]]).exists


def test_invariant_symbol_examples(rng):
    B = random_symbol(2, rng)
    assert np.abs(invariant_symbol(np.zeros((2, 2)), B) - B).max() < 1e-15
    assert abs(invariant_symbol([[0.6]], [[0.3]])[0, 0] - 0.3 / 0.64) < 1e-15
    for _ in range(5):
        m = random_free_map(3, rng)
        Q = invariant_symbol(m.A, m.B)
        assert np.abs(Q - m.A.conj().T @ Q @ m.A - m.B).max() < 1e-12
        check_symbol(Q)
        it = np.zeros((3, 3), dtype=complex)
        for _ in range(5000):
            it = m.A.conj().T @ it @ m.A + m.B
        assert np.abs(Q - it).max() < 1e-10
    with pytest.raises(NonContractiveError):
        invariant_symbol(np.eye(2), np.zeros((2, 2)))


def test_qinf_blocks(rng):
    spec = random_spec(2, rng)
    assert np.abs(qinf_truncation(spec, 1) - spec.Q).max() == 0
    M2 = qinf_truncation(spec, 2)
    assert np.abs(M2[:2, 2:] - spec.A.conj().T @ (spec.Q - spec.B + spec.X)).max() < 1e-15
    M5 = qinf_truncation(spec, 5)
    assert np.array_equal(qinf_truncation(spec, 4), M5[:8, :8])
    ev = np.linalg.eigvalsh(M5)
    assert ev.min() > -1e-9 and ev.max() < 1 + 1e-9
    check_symbol(M2)


def test_iid_process_block_diagonal(rng):
    B = random_symbol(2, rng) * 0.5
    spec = FermionProcessSpec(np.zeros((2, 2)), B, np.zeros((2, 2)))
    M = qinf_truncation(spec, 3)
    assert np.abs(M - np.kron(np.eye(3), B)).max() < 1e-15
    h = symbol_entropy(B)
    assert abs(entropy_rate_integral(spec).value - h) < 1e-14
    tr = entropy_rate_truncation(spec, 4)
    assert np.abs(tr.H - h * np.arange(1, 5)).max() < 1e-12
    assert np.abs(tr.increments - h).max() < 1e-12
    for th in (0.0, 1.0, -2.5):
        assert np.abs(symbol_function(spec, th) - B).max() < 1e-15


def test_projector_valued_symbol():
    Pr = np.diag([1.0, 0.0])
    spec = FermionProcessSpec(np.zeros((2, 2)), Pr, np.zeros((2, 2)))
    assert entropy_rate_integral(spec).value == 0.0


def test_symbol_function_scalar():
    # a = 0.5, b = 0.3, x = 0.05: q = 0.4, q - b + x = 0.15, Q_inf(0) = q + 2 * 0.15
    spec = FermionProcessSpec([[0.5]], [[0.3]], [[0.05]])
    assert abs(spec.Q[0, 0] - 0.4) < 1e-15
    assert abs(symbol_function(spec, 0.0)[0, 0] - 0.7) < 1e-14


def _fourier_by_sum(spec, k, n=512):
    th = 2 * np.pi * np.arange(n) / n
    vals = np.array([symbol_function(spec, t) for t in th])
    return np.einsum("t,tij->ij", np.exp(-1j * k * th), vals) / n


@pytest.mark.parametrize("name", ["scalar", "normal", "non_normal"])
def test_fourier_reproduces_blocks(name):
    spec = sample_specs()[name]
    M = qinf_truncation(spec, 7)
    d = spec.d
    for k in range(6):
        block = M[:d, k * d : (k + 1) * d]
        assert np.abs(_fourier_by_sum(spec, k) - block).max() < 1e-10


def test_symbol_function_hermitian(rng):
    spec = random_spec(3, rng)
    mats = symbol_function(spec, np.linspace(-np.pi, np.pi, 9))
    assert np.abs(mats - np.conj(np.swapaxes(mats, 1, 2))).max() < 1e-14


def test_symbol_entropy_examples():
    assert abs(symbol_entropy([[0.5]]) - LOG2) < 1e-15
    U = np.linalg.qr(np.arange(9.0).reshape(3, 3) + np.eye(3))[0]
    assert symbol_entropy(U @ np.diag([1.0, 0.0, 1.0]) @ U.T) < 1e-12
    assert abs(symbol_entropy([[0.2]]) - H_02) < 1e-15
    with pytest.raises(ContractError):
        symbol_entropy([[1.2]])


def test_scalar_rate_against_quadrature_oracle():
    spec = sample_specs()["scalar"]
    assert abs(entropy_rate_integral(spec).value - SCALAR_RATE) < 1e-12
    fixed = entropy_rate_integral(spec, quadrature_points=256)
    assert abs(fixed.value - SCALAR_RATE) < 1e-12


@pytest.mark.parametrize("name", ["scalar", "normal", "non_normal"])
def test_increments_converge(name):
    spec = sample_specs()[name]
    target = entropy_rate_integral(spec).value
    tr = entropy_rate_truncation(spec, 10)
    err = np.abs(tr.increments - target)
    assert np.all(np.diff(err) < 0)
    assert np.all(np.abs(tr.averages - target) >= err - 1e-15)


def test_sample_specs_valid():
    for spec in sample_specs().values():
        rep = extension_check(spec.A, spec.B, spec.X)
        assert rep.exists and rep.cd_valid
        assert np.abs(spec.Q - spec.A.conj().T @ spec.Q @ spec.A - spec.B).max() < 1e-12
    A = sample_specs()["non_normal"].A
    assert np.abs(A @ A.conj().T - A.conj().T @ A).max() > 0.01


def test_spec_from_dict_roundtrip():
    spec = sample_specs()["normal"]
    back = spec_from_dict(spec.as_dict())
    assert np.abs(back.Q - spec.Q).max() < 1e-15
    with pytest.raises(ShapeError):
        spec_from_dict({"A": [[0.1]], "B": [[0.2]], "Y": [[0]]})


def test_invalid_spec():
    with pytest.raises(ContractError):
        FermionProcessSpec([[0.8]], [[0.1]])
    with pytest.raises(ContractError):
        FermionProcessSpec([[0.5]], [[0.3]], [[5.0]])
