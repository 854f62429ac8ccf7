import numpy as np
import pytest

from app.errors import ArgumentError, PreconditionError
from app.services.linalg import (
    basis_ket,
    expectation,
    hermitian_eigs,
    partial_contraction,
    partial_transpose,
    projector,
    random_ket,
    tensor_product,
)


def random_hermitian(dim, rng):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


def test_tensor_product_of_basis_kets():
    zero = basis_ket(2, 0)
    assert np.allclose(tensor_product([zero, zero, zero]), basis_ket(8, 0))


def test_tensor_product_of_identities():
    assert np.allclose(tensor_product([np.eye(2), np.eye(2)]), np.eye(4))


def test_tensor_product_party_one_is_most_significant():
    e = np.array([1, 1]) / np.sqrt(2)
    vec = tensor_product([basis_ket(2, 1), e, e])
    assert np.allclose(vec[:4], 0)
    assert np.allclose(vec[4:], 0.5)


def test_tensor_product_rejects_mixed_factors():
    with pytest.raises(TypeError):
        tensor_product([basis_ket(2, 0), np.eye(2)])
    with pytest.raises(ArgumentError):
        tensor_product([])


def test_hermitian_eigs_descending():
    values, vectors = hermitian_eigs(np.diag([1.0, 3.0, -2.0]))
    assert np.allclose(values, [3, 1, -2])
    assert np.allclose(np.abs(vectors[:, 0]), [0, 1, 0])


def test_hermitian_eigs_reconstructs(rng):
    m = random_hermitian(6, rng)
    values, vectors = hermitian_eigs(m)
    assert np.allclose(vectors @ np.diag(values) @ vectors.conj().T, m, atol=1e-10)


def test_hermitian_eigs_rejects_non_hermitian():
    with pytest.raises(PreconditionError):
        hermitian_eigs(np.array([[0, 1], [0, 0]], dtype=complex))


def test_partial_transpose_empty_subset_is_identity(rng):
    m = random_hermitian(8, rng)
    assert np.allclose(partial_transpose(m, [2, 2, 2], []), m)


def test_partial_transpose_involution_and_trace(rng):
    m = random_hermitian(12, rng)
    once = partial_transpose(m, [2, 3, 2], [1])
    assert np.isclose(np.trace(once), np.trace(m))
    assert np.allclose(partial_transpose(once, [2, 3, 2], [1]), m)


def test_partial_transpose_of_all_parties_is_full_transpose(rng):
    m = random_hermitian(4, rng)
    assert np.allclose(partial_transpose(m, [2, 2], [0, 1]), m.T)


def test_partial_transpose_bad_dims():
    with pytest.raises(ArgumentError):
        partial_transpose(np.eye(8), [2, 3], [0])


def test_partial_contraction_identity():
    zero = basis_ket(2, 0)
    reduced = partial_contraction(np.eye(8), [2, 2, 2], [None, zero, zero])
    assert np.allclose(reduced, np.eye(2))


def test_partial_contraction_projector():
    zero = basis_ket(2, 0)
    m = projector(basis_ket(8, 0))
    reduced = partial_contraction(m, [2, 2, 2], [None, zero, zero])
    assert np.allclose(reduced, projector(zero))


def test_partial_contraction_matches_expectation(rng):
    dims = [2, 3, 2]
    m = random_hermitian(12, rng)
    kets = [random_ket(d, rng) for d in dims]
    for free in range(3):
        slots = list(kets)
        slots[free] = None
        reduced = partial_contraction(m, dims, slots)
        assert np.isclose(expectation(reduced, kets[free]), expectation(m, tensor_product(kets)))


def test_partial_contraction_needs_one_free_slot():
    zero = basis_ket(2, 0)
    with pytest.raises(ArgumentError):
        partial_contraction(np.eye(8), [2, 2, 2], [None, None, zero])
    with pytest.raises(ArgumentError):
        partial_contraction(np.eye(8), [2, 2, 2], [zero, zero, zero])


def test_tensor_product_is_associative(rng):
    a, b, c = (random_hermitian(d, rng) for d in (2, 3, 2))
    left = tensor_product([a, tensor_product([b, c])])
    right = tensor_product([tensor_product([a, b]), c])
    assert np.max(np.abs(left - right)) <= 1e-12

    u, v, w = (random_ket(d, rng) for d in (2, 3, 2))
    assert np.max(np.abs(tensor_product([u, tensor_product([v, w])]) - tensor_product([tensor_product([u, v]), w]))) <= 1e-12


def test_partial_contraction_is_linear(rng):
    dims = [2, 2, 3]
    m1, m2 = random_hermitian(12, rng), random_hermitian(12, rng)
    slots = [random_ket(2, rng), None, random_ket(3, rng)]
    combined = partial_contraction(2.5 * m1 - 0.75 * m2, dims, slots)
    separate = 2.5 * partial_contraction(m1, dims, slots) - 0.75 * partial_contraction(m2, dims, slots)
    assert np.allclose(combined, separate, atol=1e-12)


def test_partial_contraction_agrees_on_random_inputs(rng):
    dims = [2, 2, 2]
    for _ in range(100):
        m = random_hermitian(8, rng)
        kets = [random_ket(2, rng) for _ in dims]
        free = int(rng.integers(3))
        slots = list(kets)
        slots[free] = None
        reduced = partial_contraction(m, dims, slots)
        assert abs(expectation(reduced, kets[free]) - expectation(m, tensor_product(kets))) <= 1e-10
