import json

import numpy as np
import pytest
from hypothesis import given

from qht import ensembles
from qht.operators import (
    FunctionalCalculusError,
    HermitianOperator,
    NonHermitianError,
    abs_part,
    apply_function,
    decompose,
    dumps_matrix,
    embed,
    kron,
    loads_matrix,
    matrix_from_dict,
    matrix_to_dict,
    negative_part,
    positive_part,
    support,
    trace_norm,
    unitary_group,
)

from conftest import dims, seeds


def test_identity_has_single_eigenvalue():
    dec = decompose(np.eye(3))
    assert np.allclose(dec.eigenvalues, [1.0])
    assert np.allclose(dec.projector(0), np.eye(3))


def test_degenerate_diagonal_clusters():
    dec = decompose(np.diag([1.0, 1.0, 2.0]), cluster_tol=1e-10)
    assert np.allclose(dec.eigenvalues, [1.0, 2.0])
    assert list(dec.ranks) == [2, 1]


def test_near_degenerate_eigenvalues_merge_to_mean():
    dec = decompose(np.diag([1.0, 1.0 + 1e-13, 3.0]))
    assert len(dec) == 2
    assert dec.eigenvalues[0] == pytest.approx(1.0 + 0.5e-13, abs=1e-15)


@given(seeds)
def test_reconstruction_and_completeness(seed):
    a = ensembles.random_hermitian(ensembles.rng(seed), 6)
    dec = decompose(a)
    assert np.abs(dec.reconstruct() - a).max() <= 1e-11 * max(1, np.abs(a).max())
    assert np.allclose(sum(dec.projectors), np.eye(6), atol=1e-10)
    for i, p in enumerate(dec.projectors):
        assert np.allclose(p @ p, p, atol=1e-10)
        for q in dec.projectors[i + 1:]:
            assert np.abs(p @ q).max() < 1e-10


def test_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        HermitianOperator(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_symmetrizes_tiny_defect():
    m = np.array([[1.0, 1e-14], [0.0, 2.0]])
    op = HermitianOperator(m)
    assert np.allclose(op.matrix, op.matrix.conj().T, atol=0)


def test_exp_on_diagonal():
    out = apply_function(np.diag([0.0, np.log(2.0)]), np.exp)
    assert np.allclose(out.matrix, np.diag([1.0, 2.0]))


def test_identity_function(gen):
    a = ensembles.random_hermitian(gen, 5)
    assert np.abs(apply_function(a, lambda x: x).matrix - a).max() < 1e-12


def test_fractional_power_matches_root_iteration(gen):
    a = ensembles.random_positive(gen, 4)
    p = apply_function(a, lambda x: x**0.3).matrix
    # oracle: p^10 must equal a^3 (integer powers need no functional calculus)
    lhs = np.linalg.matrix_power(p, 10)
    rhs = np.linalg.matrix_power(a, 3)
    assert np.abs(lhs - rhs).max() <= 1e-9 * np.abs(rhs).max()


def test_non_finite_function_value_is_reported():
    with pytest.raises(FunctionalCalculusError, match="eigenvalue"):
        apply_function(np.diag([0.0, 1.0]), np.log)


@given(seeds)
def test_composition_homomorphism(seed):
    a = ensembles.random_positive(ensembles.rng(seed), 4)
    lhs = apply_function(a, lambda x: np.log(np.sqrt(x)))
    rhs = apply_function(apply_function(a, np.sqrt), np.log)
    assert np.abs(lhs.matrix - rhs.matrix).max() < 1e-9


def test_spectral_parts_of_diagonal():
    a = np.diag([2.0, -3.0])
    assert np.allclose(positive_part(a).matrix, np.diag([2.0, 0.0]))
    assert np.allclose(negative_part(a).matrix, np.diag([0.0, 3.0]))
    assert np.allclose(abs_part(a).matrix, np.diag([2.0, 3.0]))
    assert np.allclose(support(np.diag([2.0, 0.0])).matrix, np.diag([1.0, 0.0]))


def test_psd_has_zero_negative_part(gen):
    a = ensembles.random_positive(gen, 4)
    assert np.abs(negative_part(a).matrix).max() == 0


@given(seeds)
def test_parts_decompose_operator(seed):
    a = ensembles.random_hermitian(ensembles.rng(seed), 5)
    pp, nn = positive_part(a).matrix, negative_part(a).matrix
    assert np.allclose(pp - nn, a, atol=1e-11)
    assert np.allclose(pp + nn, abs_part(a).matrix, atol=1e-11)
    assert trace_norm(a) == pytest.approx(np.abs(np.linalg.eigvalsh(a)).sum(), rel=1e-11)


def test_trace_norm_and_kron_basics():
    assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)
    assert np.allclose(kron(np.eye(2), np.eye(3)).matrix, np.eye(6))


@given(seeds)
def test_trace_norm_multiplicative_and_subadditive(seed):
    g = ensembles.rng(seed)
    a, b, c = (ensembles.random_hermitian(g, 3) for _ in range(3))
    prod = trace_norm(kron(a, b))
    assert prod == pytest.approx(trace_norm(a) * trace_norm(b), rel=1e-10)
    assert trace_norm(a + c) <= trace_norm(a) + trace_norm(c) + 1e-10


def test_embed_places_factor():
    z = np.diag([1.0, -1.0])
    e = embed(z, [2, 3], 0).matrix
    assert np.allclose(e, np.kron(z, np.eye(3)))
    e = embed(z, [3, 2], 1).matrix
    assert np.allclose(e, np.kron(np.eye(3), z))


def test_unitary_group(gen):
    h = ensembles.random_hermitian(gen, 4)
    u = unitary_group(h, 0.7)
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)
    assert np.allclose(unitary_group(h, 0.3) @ unitary_group(h, 0.4), u, atol=1e-12)


def test_matrix_json_round_trip_is_bit_exact(gen):
    a = ensembles.random_hermitian(gen, 4)
    back = loads_matrix(dumps_matrix(a)).matrix
    assert np.array_equal(back, HermitianOperator(a).matrix)
    d = json.loads(dumps_matrix(a))
    assert d["dim"] == 4 and len(d["entries"]) == 16
    assert np.array_equal(matrix_from_dict(matrix_to_dict(a)), HermitianOperator(a).matrix)


def test_matrix_json_rejects_wrong_length():
    with pytest.raises(ValueError):
        matrix_from_dict({"dim": 2, "entries": [[1, 0]]})
