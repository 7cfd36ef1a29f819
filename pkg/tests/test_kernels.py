import numpy as np
import pytest

from qproc import _backend, _fallback

BACKENDS = ["python"] + (["cython"] if _backend.BACKEND == "cython" else [])


def both(E, p0, u, burn_in):
    outs = [_backend.get_kernels(b).blackwell_filter(E, p0, u, burn_in) for b in BACKENDS]
    for h, r, dev in outs[1:]:
        assert np.array_equal(h, outs[0][0]) and r == outs[0][1] and dev == outs[0][2]
    return outs[0]


def test_backend_selection():
    assert _backend.get_kernels("python") is _fallback
    with pytest.raises(ValueError):
        _backend.get_kernels("fortran")


def test_random_inputs_identical():
    rng = np.random.default_rng(11)
    for d, k in ((1, 2), (3, 2), (4, 5)):
        E = rng.random((k, d, d))
        E /= E.sum(axis=(0, 2))[None, :, None]
        p0 = rng.dirichlet(np.ones(d))
        h, r, dev = both(E, p0, rng.random(2000), 100)
        assert len(h) == 1900 and r == 0 and dev < 1e-12
        assert h.min() >= 0 and h.max() <= np.log(k) + 1e-12


def test_dead_state_restarts():
    # hidden state 1 emits nothing, so every visit restarts from p0
    E = np.zeros((2, 2, 2))
    E[0, 0, 0] = 0.5
    E[1, 0, 1] = 0.5
    h, r, _ = both(E, np.array([1.0, 0.0]), np.random.default_rng(0).random(500), 0)
    assert r > 0 and len(h) == 500
    assert np.allclose(h, np.log(2))


def test_dead_start_flagged():
    E = np.zeros((1, 2, 2))
    E[0, 0, 0] = 1.0
    h, r, _ = both(E, np.array([0.0, 1.0]), np.random.default_rng(0).random(10), 0)
    assert r == -1


def test_burn_in_longer_than_run():
    E = np.ones((2, 1, 1)) / 2
    h, r, _ = both(E, np.ones(1), np.random.default_rng(0).random(5), 50)
    assert len(h) == 0 and r == 0
