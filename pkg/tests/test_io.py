import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belt import maps
from belt.blockenc import exact_dilation
from belt.io import (
    block_encoding_from_json,
    block_encoding_to_json,
    dumps,
    map_from_json,
    map_to_json,
    matrix_from_json,
    matrix_to_json,
    phases_from_json,
    phases_to_json,
    read_json,
    write_json,
)
from belt.spectral import chebyshev_phases

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_matrix_round_trip_is_bit_exact(rows, cols, data):
    re = np.array(data.draw(st.lists(finite, min_size=rows * cols, max_size=rows * cols))).reshape(rows, cols)
    im = np.array(data.draw(st.lists(finite, min_size=rows * cols, max_size=rows * cols))).reshape(rows, cols)
    m = re + 1j * im
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(m))))
    assert np.array_equal(back.view(np.float64), m.astype(np.complex128).view(np.float64))


def test_matrix_format_fields():
    obj = matrix_to_json(np.array([[1 + 2j, 3]]))
    assert obj == {"rows": 1, "cols": 2, "re": [[1.0, 3.0]], "im": [[2.0, 0.0]]}


def test_matrix_shape_mismatch():
    with pytest.raises(ValueError):
        matrix_from_json({"rows": 2, "cols": 2, "re": [[1, 2]], "im": [[0, 0]]})
    with pytest.raises(ValueError):
        matrix_from_json({"rows": 2})


def test_map_round_trip_and_named_form():
    m = maps.random_map(1, 1, np.random.default_rng(0))
    back = map_from_json(json.loads(json.dumps(map_to_json(m))))
    assert np.array_equal(back.superop, m.superop)
    named = map_from_json({"name": "depolarizing", "p": 0.25, "qubits": 1})
    assert np.allclose(named.superop, maps.depolarizing(0.25).superop)


def test_block_encoding_round_trip():
    be = exact_dilation(np.diag([0.5, -0.25]))
    back = block_encoding_from_json(json.loads(json.dumps(block_encoding_to_json(be))))
    assert np.array_equal(back.unitary, be.unitary)
    assert (back.alpha, back.anc_qubits, back.declared_eps, back.sys_qubits) == (
        be.alpha,
        be.anc_qubits,
        be.declared_eps,
        be.sys_qubits,
    )


def test_phase_round_trip():
    ph = chebyshev_phases(4, "qetu-symmetric")
    assert phases_from_json(json.loads(json.dumps(phases_to_json(ph)))) == ph


def test_file_helpers(tmp_path):
    path = tmp_path / "m.json"
    write_json(matrix_to_json(np.eye(2)), path)
    assert np.array_equal(matrix_from_json(read_json(path)), np.eye(2))


def test_dumps_converts_numpy_values():
    out = json.loads(dumps({"a": np.float64(1.5), "b": np.int64(2), "c": np.bool_(True), "d": np.arange(2)}))
    assert out == {"a": 1.5, "b": 2, "c": True, "d": [0, 1]}
