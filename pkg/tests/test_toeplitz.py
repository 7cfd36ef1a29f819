import numpy as np
import pytest

from qproc.fermion import entropy_rate_integral, qinf_truncation, sample_specs
from qproc.toeplitz import (
    ToeplitzSymbolFn,
    binary_entropy_fn,
    block_toeplitz,
    eigenvalue_spacings,
    fermion_symbol,
    figure1_function,
    figure1_rows,
    figure1_symbol,
    figure2_rows,
    interlacing_residual,
    kolmogorov_distance,
    scalar_symbol,
    szego_check,
    toeplitz_eigs,
)

# (1/2pi) int T^2 for the figure-1 function: 1/4 + 1/50 + 1/18
MEAN_T2 = 0.325555555555555555555555555556


def test_coefficients_closed_form_vs_quadrature():
    exact = figure1_symbol()
    sampled = scalar_symbol(figure1_function)
    expect = {0: 0.5, 1: 0.1, -1: 0.1, 2: -1j / 6, -2: 1j / 6, 3: 0.0}
    for k, v in expect.items():
        assert abs(exact.coefficient(k)[0, 0] - v) < 1e-15
        assert abs(sampled.coefficient(k)[0, 0] - v) < 1e-15


def test_coefficient_symbol_evaluates():
    T = figure1_symbol()
    th = np.linspace(-np.pi, np.pi, 17)
    assert np.abs(T(th)[:, 0, 0] - figure1_function(th)).max() < 1e-15


def test_first_section():
    assert np.allclose(toeplitz_eigs(figure1_symbol(), 1), [0.5], atol=1e-15)


def test_eigenvalues_in_range():
    th = np.linspace(-np.pi, np.pi, 20001)
    lo, hi = figure1_function(th).min(), figure1_function(th).max()
    T = figure1_symbol()
    for n in (2, 10, 50, 100):
        ev = toeplitz_eigs(T, n)
        assert ev.min() >= lo - 1e-9 and ev.max() <= hi + 1e-9


def test_interlacing():
    T = figure1_symbol()
    prev = toeplitz_eigs(T, 1)
    for n in range(2, 101):
        cur = toeplitz_eigs(T, n)
        assert interlacing_residual(prev, cur) <= 1e-10
        prev = cur


def test_interlacing_residual_detects():
    assert interlacing_residual([0.0, 5.0], [1.0, 2.0, 3.0]) > 1


def test_linear_average_exact():
    T = figure1_symbol()
    for row in szego_check(T, lambda x: x, [1, 3, 10, 64]):
        assert abs(row.average - row.target) < 1e-14


def test_square_average_converges():
    T = figure1_symbol()
    rows = szego_check(T, lambda x: x**2, [25, 50, 100, 200], target=MEAN_T2)
    assert abs(rows[0].target - MEAN_T2) < 1e-15
    errs = [abs(r.average - MEAN_T2) for r in rows]
    for a, b in zip(errs, errs[1:]):
        assert a / b >= 1.5
    # increments are exact once n exceeds the coefficient range
    assert abs(rows[-1].increment - MEAN_T2) < 1e-12


def test_kolmogorov_level_sets():
    assert kolmogorov_distance(figure1_symbol(), 100) <= 0.05


def test_block_toeplitz_matches_qinf():
    spec = sample_specs()["non_normal"]
    exact = fermion_symbol(spec, kmax=10)
    assert np.abs(block_toeplitz(exact, 6) - qinf_truncation(spec, 6)).max() < 1e-15
    sampled = fermion_symbol(spec)
    assert np.abs(block_toeplitz(sampled, 6) - qinf_truncation(spec, 6)).max() < 1e-12


def test_entropy_increments_beat_averages():
    spec = sample_specs()["normal"]
    target = entropy_rate_integral(spec).value
    rows = szego_check(fermion_symbol(spec), binary_entropy_fn, [4, 8, 16], target=target)
    for r in rows:
        assert abs(r.increment - target) < abs(r.average - target)


def test_figure_rows():
    rows = figure1_rows()
    assert len(rows) == 1024
    zero = [t for t in rows if t[0] == 0.0]
    assert len(zero) == 1 and abs(zero[0][1] - 0.7) < 1e-15
    rows2 = figure2_rows()
    assert len(rows2) == sum(range(1, 51)) + 100
    assert rows2[0] == (1, 0, 0.5)
    for n in (7, 100):
        vals = [v for m, _, v in rows2 if m == n]
        assert vals == sorted(vals)


def test_spacings_are_data():
    gaps = eigenvalue_spacings(figure1_symbol(), 40)
    assert gaps.shape == (39,) and gaps.min() >= 0


def test_symbol_fn_arguments():
    with pytest.raises(ValueError):
        ToeplitzSymbolFn(1)
    with pytest.raises(ValueError):
        ToeplitzSymbolFn(1, coeffs={-1: 0.3})
    with pytest.raises(ValueError):
        toeplitz_eigs(figure1_symbol(), 0)
