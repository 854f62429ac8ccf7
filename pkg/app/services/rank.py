"""Exact ranks of integer matrices: modular elimination with an integer audit."""
from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
from sympy import prevprime

from app.errors import InternalError

logger = logging.getLogger(__name__)

AUDIT_ROWS = 200


@lru_cache(maxsize=1)
def modular_primes() -> tuple[int, int]:
    """The two largest primes below 2^31; products of residues fit in int64."""
    first = int(prevprime(2**31))
    return first, int(prevprime(first))


def modular_rank(matrix, prime: int) -> int:
    work = np.mod(np.asarray(matrix, dtype=np.int64), prime)
    rows, cols = work.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        candidates = np.nonzero(work[rank:, col])[0]
        if candidates.size == 0:
            continue
        pivot = rank + int(candidates[0])
        if pivot != rank:
            work[[rank, pivot]] = work[[pivot, rank]]
        inverse = pow(int(work[rank, col]), -1, prime)
        work[rank] = (work[rank] * inverse) % prime
        below = work[rank + 1:]
        factors = below[:, col].copy()
        nonzero = np.nonzero(factors)[0]
        if nonzero.size:
            below[nonzero] = (below[nonzero] - np.outer(factors[nonzero], work[rank]) % prime) % prime
        rank += 1
    return rank


def bareiss_rank(matrix) -> int:
    """Fraction-free elimination in Python integers."""
    work = [[int(v) for v in row] for row in np.asarray(matrix).tolist()]
    if not work:
        return 0
    rows, cols = len(work), len(work[0])
    rank = 0
    previous = 1
    for col in range(cols):
        if rank == rows:
            break
        pivot = next((r for r in range(rank, rows) if work[r][col] != 0), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        head = work[rank][col]
        for r in range(rank + 1, rows):
            factor = work[r][col]
            line = work[r]
            pivot_row = work[rank]
            for c in range(col, cols):
                # exact division is guaranteed by Sylvester's identity
                line[c] = (head * line[c] - factor * pivot_row[c]) // previous
        previous = head
        rank += 1
    return rank


def exact_rank(matrix, audit_rows: int = AUDIT_ROWS) -> int:
    matrix = np.asarray(matrix, dtype=np.int64)
    if matrix.size == 0:
        return 0
    first, second = (modular_rank(matrix, p) for p in modular_primes())
    if first != second:
        raise InternalError(f"modular ranks disagree ({first} vs {second})")
    if matrix.shape[0] <= audit_rows:
        audited = bareiss_rank(matrix)
        if audited != first:
            raise InternalError(f"modular rank {first} disagrees with integer rank {audited}")
    return first


def affine_dimension(points) -> int:
    """Dimension of the affine hull of the rows; -1 for no points."""
    points = np.asarray(points, dtype=np.int64)
    if points.shape[0] == 0:
        return -1
    differences = points[1:] - points[0]
    return exact_rank(differences) if differences.shape[0] else 0
