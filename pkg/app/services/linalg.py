"""Dense complex linear algebra on kets and operators.

Kets are 1-D complex numpy arrays, operators are square 2-D complex arrays.
Party 1 is always the leftmost (most significant) tensor factor.
"""
from __future__ import annotations

from functools import reduce
from typing import Optional, Sequence

import numpy as np

from app.errors import ArgumentError, PreconditionError

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12


def ket(amplitudes) -> np.ndarray:
    vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(vec)):
        raise ArgumentError("ket amplitudes must be finite")
    return vec


def basis_ket(dim: int, index: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=complex)
    vec[index] = 1.0
    return vec


def is_normalized(vec: np.ndarray, tol: float = NORM_TOL) -> bool:
    return abs(np.vdot(vec, vec).real - 1.0) <= tol


def projector(vec: np.ndarray) -> np.ndarray:
    return np.outer(vec, vec.conj())


def tensor_product(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of kets or operators, left to right."""
    if len(factors) == 0:
        raise ArgumentError("tensor_product needs at least one factor")
    arrays = [np.asarray(f, dtype=complex) for f in factors]
    kinds = {a.ndim for a in arrays}
    if len(kinds) != 1 or not kinds <= {1, 2}:
        raise TypeError("tensor_product factors must all be kets or all be operators")
    return reduce(np.kron, arrays)


def check_hermitian(matrix: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    mat = np.asarray(matrix, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise PreconditionError(f"expected a square matrix, got shape {mat.shape}")
    deviation = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    if deviation > tol:
        raise PreconditionError(f"matrix is not Hermitian (max |M - M^dag| = {deviation:.3e})")
    return mat


def hermitian_eigs(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and the matching eigenvectors as columns."""
    mat = check_hermitian(matrix)
    # symmetrize away the sub-tolerance antihermitian part before eigh
    values, vectors = np.linalg.eigh((mat + mat.conj().T) / 2)
    return values[::-1].copy(), vectors[:, ::-1].copy()


def max_eigenvalue(matrix: np.ndarray) -> float:
    return float(hermitian_eigs(matrix)[0][0])


def min_eigenvalue(matrix: np.ndarray) -> float:
    return float(hermitian_eigs(matrix)[0][-1])


def _check_dims(matrix: np.ndarray, dims: Sequence[int]) -> None:
    if any(d < 1 for d in dims):
        raise ArgumentError(f"party dimensions must be positive, got {list(dims)}")
    if int(np.prod(dims)) != matrix.shape[0]:
        raise ArgumentError(f"dims {list(dims)} do not multiply to {matrix.shape[0]}")


def partial_transpose(matrix: np.ndarray, dims: Sequence[int], subset: Sequence[int]) -> np.ndarray:
    mat = np.asarray(matrix, dtype=complex)
    _check_dims(mat, dims)
    n = len(dims)
    if any(p < 0 or p >= n for p in subset):
        raise ArgumentError(f"party subset {list(subset)} out of range for {n} parties")
    tensor = mat.reshape(*dims, *dims)
    axes = list(range(2 * n))
    for party in set(subset):
        axes[party], axes[n + party] = axes[n + party], axes[party]
    return tensor.transpose(axes).reshape(mat.shape)


def partial_contraction(
    matrix: np.ndarray, dims: Sequence[int], kets: Sequence[Optional[np.ndarray]]
) -> np.ndarray:
    """Sandwich ``matrix`` between fixed kets on every party but one.

    ``kets`` holds one ket per party and ``None`` at the free slot. The result
    ``A`` satisfies <phi|A|phi> = <psi_prod|M|psi_prod> when the free slot
    holds ``phi``.
    """
    mat = np.asarray(matrix, dtype=complex)
    _check_dims(mat, dims)
    if len(kets) != len(dims):
        raise ArgumentError(f"expected {len(dims)} slots, got {len(kets)}")
    free = [i for i, k in enumerate(kets) if k is None]
    if len(free) != 1:
        raise ArgumentError(f"exactly one free slot required, got {len(free)}")
    blocks = []
    for dim, vec in zip(dims, kets):
        if vec is None:
            blocks.append(np.eye(dim, dtype=complex))
            continue
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (dim,) or not is_normalized(vec, 1e-9):
            raise ArgumentError("contraction kets must be normalized and match party dimensions")
        blocks.append(vec.reshape(dim, 1))
    isometry = tensor_product(blocks)
    reduced = isometry.conj().T @ mat @ isometry
    return (reduced + reduced.conj().T) / 2


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def expectation(matrix: np.ndarray, vec: np.ndarray) -> float:
    return float(np.vdot(vec, matrix @ vec).real)
