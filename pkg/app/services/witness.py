"""Product-state minimum, UPB entanglement witness and the bound entangled state."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import unitary_group

from app.config import default_restarts, default_seed, thread_count
from app.errors import ArgumentError, InternalError, PreconditionError
from app.services.linalg import (
    check_hermitian,
    expectation,
    hermitian_eigs,
    min_eigenvalue,
    partial_contraction,
    partial_transpose,
    projector,
    random_ket,
    tensor_product,
)
from app.services.product_sets import ProductVectorSet, span_projector, span_rank

logger = logging.getLogger(__name__)

PSD_TOL = 1e-9
CONVERGENCE_TOL = 1e-12
PPT_TOL = 1e-10
TRACE_TOL = 1e-10
HEURISTIC_STATUS = "heuristic-upper-bound"


# ============================================================
# PRODUCT-STATE MINIMUM
# ============================================================

@dataclass(frozen=True, eq=False)
class EpsilonResult:
    value: float
    kets: tuple[np.ndarray, ...]
    restarts: int
    seed: int
    status: str = HEURISTIC_STATUS


def _descend(matrix: np.ndarray, dims, seed_seq: np.random.SeedSequence, max_iters: int):
    rng = np.random.default_rng(seed_seq)
    kets = [random_ket(d, rng) for d in dims]
    value = expectation(matrix, tensor_product(kets))
    for _ in range(max_iters):
        previous = value
        for party in range(len(dims)):
            slots = list(kets)
            slots[party] = None
            values, vectors = hermitian_eigs(partial_contraction(matrix, dims, slots))
            kets[party] = vectors[:, -1]
            value = float(values[-1])
        if previous - value <= CONVERGENCE_TOL:
            break
    return value, tuple(kets)


def product_epsilon(
    matrix: np.ndarray,
    dims: Sequence[int],
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    max_iters: int = 1000,
) -> EpsilonResult:
    """min over product states of <psi|M|psi>, by alternating minimization.

    Each sweep replaces one party's ket by the lowest eigenvector of the
    partially contracted operator. The best of ``restarts`` seeded runs is
    returned; it is an upper bound on the true minimum.
    """
    matrix = check_hermitian(matrix, 1e-9)
    if min_eigenvalue(matrix) < -PSD_TOL:
        raise PreconditionError("product_epsilon expects a positive semidefinite operator")
    restarts = default_restarts() if restarts is None else restarts
    seed = default_seed() if seed is None else seed
    if restarts < 1:
        raise ArgumentError("restarts must be >= 1")
    children = np.random.SeedSequence(seed).spawn(restarts)
    runs = Parallel(n_jobs=thread_count(), prefer="threads")(
        delayed(_descend)(matrix, list(dims), child, max_iters) for child in children
    )
    best = int(np.argmin([value for value, _ in runs]))
    value, kets = runs[best]
    if -PSD_TOL < value < 0:
        value = 0.0
    logger.info("product minimum %.3e (restart %d of %d, %s)", value, best, restarts, HEURISTIC_STATUS)
    return EpsilonResult(value=value, kets=kets, restarts=restarts, seed=seed)


# ============================================================
# WITNESS AND STATE
# ============================================================

@dataclass(frozen=True, eq=False)
class WitnessReport:
    epsilon: float
    epsilon_status: str
    witness: np.ndarray
    trace_BW: float
    formula_value: float
    state: np.ndarray
    ppt_flags: dict
    min_pt_eigenvalues: dict
    trace_W_rho: float
    seed: Optional[int] = None
    restarts: Optional[int] = None


def bipartitions(n: int) -> list[tuple[int, ...]]:
    """One side of every nontrivial bipartition, each listed once."""
    sides = []
    for size in range(1, n // 2 + 1):
        for subset in combinations(range(n), size):
            if 2 * size == n and 0 not in subset:
                continue
            sides.append(subset)
    return sides


def ppt_report(state: np.ndarray, dims: Sequence[int]) -> tuple[dict, dict]:
    flags, minima = {}, {}
    for side in bipartitions(len(dims)):
        lowest = min_eigenvalue(partial_transpose(state, dims, side))
        flags[side] = lowest >= -PPT_TOL
        minima[side] = lowest
    return flags, minima


def upb_witness(
    product_set: ProductVectorSet,
    epsilon: float,
    bell_operator: Optional[np.ndarray] = None,
    epsilon_status: str = HEURISTIC_STATUS,
    seed: Optional[int] = None,
    restarts: Optional[int] = None,
) -> WitnessReport:
    """W = (Pi - eps 1)/(|S| - eps D) and rho = (1 - Pi)/(D - |S|).

    ``bell_operator`` defaults to Pi itself (unit weights, own projectors).
    ``seed`` and ``restarts`` record how eps was obtained.
    """
    size = len(product_set)
    dim = product_set.total_dim
    if size <= epsilon * dim:
        raise PreconditionError(f"|S| = {size} <= eps * D = {epsilon * dim:.6g}; the set does not behave as a UPB")
    if span_rank(product_set) >= dim:
        raise PreconditionError("the set spans the whole space; no complementary state exists")
    pi = span_projector(product_set)
    identity = np.eye(dim, dtype=complex)
    witness = (pi - epsilon * identity) / (size - epsilon * dim)
    state = (identity - pi) / (dim - size)
    operator = pi if bell_operator is None else check_hermitian(bell_operator, 1e-9)
    if operator.shape != (dim, dim):
        raise ArgumentError(f"Bell operator has shape {operator.shape}, expected {(dim, dim)}")
    trace_bw = float(np.trace(operator @ witness).real)
    formula = size * (1 - epsilon) / (size - epsilon * dim)
    flags, minima = ppt_report(state, product_set.dims)
    return WitnessReport(
        epsilon=float(epsilon),
        epsilon_status=epsilon_status,
        witness=witness,
        trace_BW=trace_bw,
        formula_value=formula,
        state=state,
        ppt_flags=flags,
        min_pt_eigenvalues=minima,
        trace_W_rho=float(np.trace(witness @ state).real),
        seed=seed,
        restarts=restarts,
    )


def witness_value_check(bell_operator: np.ndarray, witness: np.ndarray) -> float:
    witness = check_hermitian(witness, 1e-9)
    trace = float(np.trace(witness).real)
    if abs(trace - 1.0) > TRACE_TOL:
        raise PreconditionError(f"witness must have unit trace, got {trace:.12g}")
    return float(np.trace(np.asarray(bell_operator) @ witness).real)


# ============================================================
# SAMPLED WITNESSES
# ============================================================

def witness_from_projector(
    pi: np.ndarray, dims: Sequence[int], restarts: Optional[int] = None, seed: Optional[int] = None
) -> np.ndarray:
    """(Pi - eps' 1)/(rank - eps' D), eps' the product minimum of Pi."""
    dim = pi.shape[0]
    rank = int(round(float(np.trace(pi).real)))
    if rank == dim:
        return np.eye(dim, dtype=complex) / dim
    eps = product_epsilon(pi, dims, restarts=restarts, seed=seed).value
    denominator = rank - eps * dim
    if denominator <= 1e-9:
        raise InternalError(f"degenerate witness: rank {rank} equals eps * D = {eps * dim:.6g}")
    return (pi - eps * np.eye(dim, dtype=complex)) / denominator


def sample_normalized_witness(
    dims: Sequence[int], seed: int, restarts: Optional[int] = None, max_attempts: int = 16
) -> np.ndarray:
    """Normalized witness built from a random-subspace projector.

    Rank is drawn in [1, D-1]; a degenerate draw (rank = eps' D) is replaced
    by the next one from the same seed.
    """
    dim = int(np.prod(dims))
    rng = np.random.default_rng(seed)
    for attempt in range(max_attempts):
        rank = int(rng.integers(1, dim)) if dim > 1 else 1
        basis = unitary_group.rvs(dim, random_state=rng)[:, :rank] if dim > 1 else np.ones((1, 1), dtype=complex)
        pi = basis @ basis.conj().T
        pi = (pi + pi.conj().T) / 2
        try:
            return witness_from_projector(pi, dims, restarts=restarts, seed=int(rng.integers(2**31)))
        except InternalError:
            logger.info("witness sample %d degenerate, resampling", attempt)
    raise InternalError(f"no non-degenerate witness after {max_attempts} draws")


# ============================================================
# COMPLETABLE SETS
# ============================================================

@dataclass(frozen=True)
class Fact4Chain:
    trace_BW: float
    max_weight_trace_PiW: float
    max_weight_complement: float
    completion_expectations: tuple[float, ...]


def fact4_chain(
    product_set: ProductVectorSet,
    completion: ProductVectorSet,
    weights: Sequence[float],
    witness: np.ndarray,
) -> Fact4Chain:
    """Tr(BW) <= max q Tr(Pi W) = max q (1 - Tr(Pi_perp W)) for a completable set.

    B is the Bell operator of the set's own rank-1 projectors,
    sum_j q_j |psi_j><psi_j|.
    """
    if len(weights) != len(product_set):
        raise ArgumentError(f"expected {len(product_set)} weights, got {len(weights)}")
    if completion.dims != product_set.dims:
        raise ArgumentError("completion lives on different party dimensions")
    merged = ProductVectorSet(product_set.dims, product_set.members + completion.members)
    if span_rank(merged) != product_set.total_dim:
        raise PreconditionError("set and completion do not span the whole space")
    operator = sum(float(q) * projector(product_set.vector(j)) for j, q in enumerate(weights))
    top = float(max(weights))
    return Fact4Chain(
        trace_BW=witness_value_check(operator, witness),
        max_weight_trace_PiW=top * float(np.trace(span_projector(product_set) @ witness).real),
        max_weight_complement=top * (1.0 - float(np.trace(span_projector(completion) @ witness).real)),
        completion_expectations=tuple(
            expectation(witness, completion.vector(j)) for j in range(len(completion))
        ),
    )
