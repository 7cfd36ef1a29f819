import json

import numpy as np
import pytest

from qproc.errors import ShapeError
from qproc.serialize import decode, decode_real, dumps, encode


def test_roundtrip(rng):
    M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    back = decode(json.loads(json.dumps(encode(M))))
    assert np.array_equal(back, M)


def test_real_entries_accepted():
    assert np.array_equal(decode([[1, 0], [0, 1]]), np.eye(2))
    assert decode([[[0, 1]]])[0, 0] == 1j


def test_shape_errors():
    with pytest.raises(ShapeError):
        decode([[1, 2], [3]])
    with pytest.raises(ShapeError):
        decode([1, 2, 3])
    with pytest.raises(ShapeError):
        decode_real([[[0, 1]]])


def test_dumps_numpy():
    text = dumps({"a": np.arange(2), "z": np.array([1j]), "f": np.float64(0.5)})
    obj = json.loads(text)
    assert obj == {"a": [0, 1], "f": 0.5, "z": [[0.0, 1.0]]}
