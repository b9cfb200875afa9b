import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belt import maps
from belt.core import purify, sandwich
from belt.linalg import (
    haar_state,
    haar_unitary,
    is_hermitian,
    kron,
    make_rng,
    operator_norm,
    partial_trace,
    pure_density,
    random_density,
    swap_operator,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rand_matrix(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def test_vec_is_column_stacking():
    x = np.array([[1, 2], [3, 4]])
    assert np.array_equal(maps.vec(x), [1, 3, 2, 4])
    assert np.array_equal(maps.unvec(maps.vec(x), 2), x)


def test_kraus_pair_superoperator_convention():
    rng = make_rng(0)
    a, b, x = rand_matrix(rng, 2), rand_matrix(rng, 2), rand_matrix(rng, 2)
    m = maps.from_kraus_pairs([(a, b)])
    assert np.allclose(m.superop, np.kron(b.conj(), a))
    assert np.allclose(m(x), a @ x @ b.conj().T)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_apply_is_linear(seed):
    rng = np.random.default_rng(seed)
    m = maps.random_map(1, 2, rng)
    x, y = rand_matrix(rng, 2), rand_matrix(rng, 2)
    a, b = complex(rng.standard_normal(), 1.0), complex(-0.3, rng.standard_normal())
    assert np.allclose(m(a * x + b * y), a * m(x) + b * m(y), atol=1e-10)


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        maps.identity(1)(np.eye(4))


def test_choi_identity_is_unnormalised_bell_projector():
    c = maps.choi(maps.identity(1))
    expected = np.zeros((4, 4))
    for i in (0, 3):
        for j in (0, 3):
            expected[i, j] = 1
    assert np.array_equal(c, expected)


def test_choi_transpose_is_swap():
    assert np.allclose(maps.choi(maps.transpose(1)), swap_operator(1))


def test_reduction_map_action_and_round_trip():
    rng = make_rng(1)
    r = maps.reduction(1)
    a = rand_matrix(rng, 2)
    assert np.allclose(r(a), np.trace(a) * np.eye(2) - a)
    back = maps.from_choi(maps.choi(r), 1, 1)
    assert np.allclose(back(a), np.trace(a) * np.eye(2) - a)
    assert np.allclose(r(np.eye(2) / 2), np.eye(2) / 2)


def test_transpose_map_action():
    x = np.array([[1, 2j], [3, 4]])
    assert np.array_equal(maps.transpose(1)(x), x.T)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 2), st.integers(1, 2))
def test_choi_round_trips(seed, n, k):
    m = maps.random_map(n, k, np.random.default_rng(seed))
    assert np.allclose(maps.from_choi(maps.choi(m), n, k).superop, m.superop, atol=1e-12)
    assert np.allclose(maps.from_choi_t1(maps.choi_t1(m), n, k).superop, m.superop, atol=1e-12)


def test_choi_t1_identity_is_swap():
    for q in (1, 2):
        assert np.allclose(maps.choi_t1(maps.identity(q)), swap_operator(q))


def test_choi_t1_transpose_has_norm_two():
    lam = maps.choi_t1(maps.transpose(1))
    phi = np.array([1, 0, 0, 1])
    assert np.allclose(lam, np.outer(phi, phi))
    assert math.isclose(operator_norm(lam), 2.0, rel_tol=1e-14)


@pytest.mark.parametrize("q", [1, 2])
def test_choi_t1_partial_reduction_closed_form(q):
    swap_b, swap_all = maps.reduction_t1_terms(q)
    lam = maps.choi_t1(maps.partial_reduction(q))
    assert np.allclose(lam, swap_b - swap_all, atol=1e-14)
    assert math.isclose(operator_norm(lam), 2.0, rel_tol=1e-12)


def test_partial_reduction_on_product_state():
    rng = make_rng(3)
    pa, pb = pure_density(haar_state(1, rng)), pure_density(haar_state(1, rng))
    out = maps.partial_reduction(1)(kron(pa, pb))
    assert np.allclose(out, kron(np.eye(2) - pa, pb), atol=1e-14)


def test_sandwich_identity_matches_apply():
    rng = make_rng(4)
    for n, k in [(1, 1), (1, 2), (2, 1)]:
        m = maps.random_map(n, k, rng)
        rho = random_density(n, rng)
        psi = purify(rho).state()
        assert np.allclose(sandwich(maps.choi_t1(m), psi, k), m(rho), atol=1e-12)


def test_choi_t1_reconstruction_on_many_inputs():
    rng = make_rng(5)
    m = maps.random_map(1, 1, rng)
    back = maps.from_choi_t1(maps.choi_t1(m), 1, 1)
    for _ in range(50):
        x = rand_matrix(rng, 2)
        assert np.allclose(back(x), m(x), atol=1e-10)


def test_from_kraus_pairs_examples():
    assert np.allclose(maps.from_kraus_pairs([(np.eye(2), np.eye(2))]).superop, np.eye(4))
    rng = make_rng(6)
    a = rand_matrix(rng, 2)
    rho = random_density(1, rng)
    assert np.allclose(maps.from_kraus_pairs([(a, a)])(rho), a @ rho @ a.conj().T)


def test_from_kraus_pairs_dimension_mismatch():
    with pytest.raises(ValueError):
        maps.from_kraus_pairs([(np.eye(2), np.eye(4))])


def test_depolarizing_kraus_trace_preserving():
    for p in (0.0, 0.25, 1.0):
        strings = maps.pauli_strings(1)
        weights = [1 - p + p / 4] + [p / 4] * 3
        total = sum(w * s.conj().T @ s for w, s in zip(weights, strings))
        assert np.allclose(total, np.eye(2), atol=1e-12)
        assert maps.is_trace_preserving(maps.depolarizing(p))
    rho = random_density(1, make_rng(0))
    assert np.allclose(maps.depolarizing(0.3)(rho), 0.7 * rho + 0.3 * np.eye(2) / 2)


@pytest.mark.parametrize("p", [-0.1, 1.5, 2.0])
def test_depolarizing_rejects_out_of_range(p):
    with pytest.raises(ValueError):
        maps.depolarizing(p)


def test_tensor_with_identity():
    assert np.allclose(maps.tensor_with_identity(maps.identity(1), 1).superop, np.eye(16))
    rng = make_rng(7)
    m = maps.random_map(1, 1, rng)
    x = kron(rand_matrix(rng, 2), rand_matrix(rng, 2))
    a = x.reshape(2, 2, 2, 2)
    ext = maps.tensor_with_identity(m, 1)
    ref = sum(np.kron(m(a[:, i, :, j]), np.outer(np.eye(2)[i], np.eye(2)[j])) for i in range(2) for j in range(2))
    assert np.allclose(ext(x), ref, atol=1e-12)


def test_tensor_with_identity_commutes_with_choi_t1():
    # choi_t1(M (x) id) on (A, B, A', B') is choi_t1(M) on (A, A') times SWAP on (B, B')
    from belt.linalg import permute_qubits

    m = maps.random_map(1, 1, make_rng(8))
    lhs = maps.choi_t1(maps.tensor_with_identity(m, 1))
    rhs = permute_qubits(kron(maps.choi_t1(m), swap_operator(1)), [0, 2, 1, 3])
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_hermitian_preserving_iff_choi_hermitian():
    for m in (maps.reduction(1), maps.transpose(1), maps.partial_reduction(1), maps.depolarizing(0.2)):
        assert maps.is_hermitian_preserving(m)
        assert is_hermitian(maps.choi(m), 1e-12)
    rng = make_rng(9)
    a, b = rand_matrix(rng, 2), rand_matrix(rng, 2)
    m = maps.from_kraus_pairs([(a, b)])
    assert not maps.is_hermitian_preserving(m)
    assert not is_hermitian(maps.choi(m), 1e-6)


def test_complete_positivity_classification():
    assert maps.is_completely_positive(maps.depolarizing(0.4))
    assert maps.is_completely_positive(maps.amplitude_damping(0.3))
    assert not maps.is_completely_positive(maps.transpose(1))
    assert not maps.is_completely_positive(maps.reduction(1))


def test_invert_examples():
    assert np.allclose(maps.invert(maps.identity(1)).superop, np.eye(4))
    e = maps.depolarizing(0.5)
    inv = maps.invert(e)
    rng = make_rng(10)
    for _ in range(10):
        rho = random_density(1, rng)
        assert operator_norm(inv(e(rho)) - rho) <= 1e-10
    assert maps.is_trace_preserving(inv, 1e-10)
    assert maps.is_hermitian_preserving(inv)
    assert not maps.is_completely_positive(inv)


def test_invert_singular_reports_condition():
    with pytest.raises(maps.IllConditionedMapError) as info:
        maps.invert(maps.depolarizing(1.0))
    assert info.value.condition > info.value.cap


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_invert_composes_to_identity(seed):
    rng = np.random.default_rng(seed)
    m = maps.random_map(1, 1, rng)
    if maps.condition_number(m) > 1e6:
        return
    inv = maps.invert(m)
    for _ in range(3):
        rho = random_density(1, rng)
        assert operator_norm(inv(m(rho)) - rho) <= 1e-8


def test_choi_t1_cp_examples():
    assert np.allclose(maps.choi_t1_cp(np.eye(2), 0), swap_operator(1))
    rng = make_rng(11)
    iso = haar_unitary(2, rng)[:, :2]  # 1 qubit -> 2 qubits
    assert np.allclose(maps.choi_t1_cp(iso, 0), maps.choi_t1(maps.from_kraus_pairs([(iso, iso)])), atol=1e-12)
    a = rand_matrix(rng, 4)[:, :2]
    lam = maps.choi_t1_cp(a, 1)
    assert operator_norm(lam) <= operator_norm(a) ** 2 + 1e-12


def test_choi_t1_cp_matches_partial_trace_channel():
    rng = make_rng(12)
    a = rand_matrix(rng, 8)[:, :2]  # X (1 qubit) -> Y (2 qubits) (x) Z (1 qubit)
    lam = maps.choi_t1_cp(a, 1)
    m = maps.from_choi_t1(lam, 1, 2)
    rho = random_density(1, rng)
    ref = partial_trace(a @ rho @ a.conj().T, [2, 1], [0])
    assert np.allclose(m(rho), ref, atol=1e-12)


def test_composition_and_tensor():
    rng = make_rng(13)
    m1, m2 = maps.random_map(1, 1, rng), maps.random_map(1, 1, rng)
    x = rand_matrix(rng, 2)
    assert np.allclose((m1 @ m2)(x), m1(m2(x)))
    a, b = rand_matrix(rng, 2), rand_matrix(rng, 2)
    t = maps.tensor_maps(m1, m2)
    assert np.allclose(t(kron(a, b)), kron(m1(a), m2(b)), atol=1e-12)


def test_named_constructors_and_shorthand():
    assert np.allclose(maps.parse_shorthand("identity:2").superop, np.eye(16))
    assert np.allclose(maps.parse_shorthand("dep:0.25").superop, maps.depolarizing(0.25).superop)
    assert maps.parse_shorthand("dep:0.1:2").in_qubits == 2
    assert np.allclose(maps.parse_shorthand("pauli:0.1,0.2,0.3").superop, maps.pauli_channel(0.1, 0.2, 0.3).superop)
    assert maps.parse_shorthand("reduction-partial:1").in_qubits == 2
    assert maps.by_name("depolarizing", p=0.25, qubits=1).in_qubits == 1
    for bad in ("dep", "nope:1", "identity:0", "pauli:0.5,0.5,0.5"):
        with pytest.raises(ValueError):
            maps.parse_shorthand(bad)


def test_conjugation_by_unitary_is_cptp():
    u = haar_unitary(1, make_rng(14))
    m = maps.conjugation(u)
    assert maps.is_trace_preserving(m) and maps.is_completely_positive(m)


def test_kraus_from_choi_reconstructs_channel():
    e = maps.amplitude_damping(0.4)
    ks = maps.kraus_from_choi(maps.choi(e), 1, 1)
    assert np.allclose(maps.from_kraus(ks).superop, e.superop, atol=1e-12)
