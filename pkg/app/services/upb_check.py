"""Unextendibility of product-vector sets and completion search."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from app.errors import ArgumentError, InternalError
from app.services.families import perp
from app.services.linalg import basis_ket
from app.services.product_sets import (
    ORTH_TOL,
    ProductVectorSet,
    distinct_local_rays,
    gram_orthogonality_check,
    orthogonal,
    same_ray,
    span_projector,
    span_rank,
)
from app.services.witness import product_epsilon

logger = logging.getLogger(__name__)

NUMERIC_THRESHOLD = 1e-7
DEFAULT_NODE_CAP = 10**7
DEFAULT_COMPLETION_BUDGET = 10**6

QUBIT = "qubit-combinatorial"
PARTITION = "partition-search"
NUMERIC = "numeric"


class _Undecided(Exception):
    pass


@dataclass(frozen=True, eq=False)
class ExtendibilityReport:
    """``status`` is one of unextendible, extendible, span-complete, undecided."""

    status: str
    method: str
    witness: Optional[tuple[np.ndarray, ...]] = None
    numeric_value: Optional[float] = None
    seed: Optional[int] = None
    restarts: Optional[int] = None

    @property
    def unextendible(self) -> Optional[bool]:
        if self.status == "undecided":
            return None
        return self.status in ("unextendible", "span-complete")

    @property
    def span_complete(self) -> bool:
        return self.status == "span-complete"


def _verified(product_set: ProductVectorSet, kets) -> tuple[np.ndarray, ...]:
    kets = tuple(k / np.linalg.norm(k) for k in kets)
    for j, member in enumerate(product_set.members):
        overlap = np.prod([abs(np.vdot(k, v)) for k, v in zip(kets, member)])
        if overlap > ORTH_TOL:
            raise InternalError(f"extension candidate overlaps member {j} ({overlap:.3e})")
    return kets


def _no_extension(product_set: ProductVectorSet, method: str) -> ExtendibilityReport:
    status = "span-complete" if span_rank(product_set) >= product_set.total_dim else "unextendible"
    return ExtendibilityReport(status=status, method=method)


def unextendible_qubit(product_set: ProductVectorSet) -> ExtendibilityReport:
    """Exact verdict for qubit sets.

    A qubit ket kills exactly the members whose local ray it is the
    orthocomplement of, so candidate extensions are the per-party choices
    of one distinct ray to orthocomplement, or none.
    """
    if any(d != 2 for d in product_set.dims):
        raise ArgumentError("unextendible_qubit needs all party dimensions 2; use unextendible_general")
    if len(product_set) == 0:
        return ExtendibilityReport("extendible", QUBIT, tuple(basis_ket(2, 0) for _ in product_set.dims))
    full = (1 << len(product_set)) - 1
    tables = [distinct_local_rays(product_set, i) for i in range(product_set.n)]
    options = []
    for table in tables:
        masks = [0] * len(table.rays)
        for member, ray in enumerate(table.member_map):
            masks[ray] |= 1 << member
        options.append([(None, 0)] + list(enumerate(masks)))
    for choice in product(*options):
        covered = 0
        for _, mask in choice:
            covered |= mask
        if covered == full:
            kets = [
                basis_ket(2, 0) if ray is None else perp(table.rays[ray])
                for (ray, _), table in zip(choice, tables)
            ]
            return ExtendibilityReport("extendible", QUBIT, _verified(product_set, kets))
    return _no_extension(product_set, QUBIT)


def unextendible_general(product_set: ProductVectorSet, node_cap: int = DEFAULT_NODE_CAP) -> ExtendibilityReport:
    """Search for an assignment of members to parties that leaves every party a proper subspace.

    Each member must be killed at some party; a party can kill all members
    assigned to it iff their local kets span less than the local space.
    """
    n = product_set.n
    dims = product_set.dims
    if len(product_set) == 0:
        return ExtendibilityReport("extendible", PARTITION, tuple(basis_ket(d, 0) for d in dims))
    size = len(product_set)
    assigned: list[list[np.ndarray]] = [[] for _ in range(n)]
    ranks = [0] * n
    nodes = 0

    def rank_with(party: int, vec: np.ndarray) -> int:
        if any(same_ray(vec, other) for other in assigned[party]):
            return ranks[party]
        if ranks[party] == 0:
            return 1
        return int(np.linalg.matrix_rank(np.column_stack(assigned[party] + [vec]), tol=1e-9))

    def placeable(j: int) -> bool:
        return any(rank_with(p, product_set.members[j][p]) < dims[p] for p in range(n))

    def search(j: int) -> bool:
        nonlocal nodes
        if j == size:
            return True
        for party in range(n):
            nodes += 1
            if nodes > node_cap:
                raise _Undecided()
            rank = rank_with(party, product_set.members[j][party])
            if rank >= dims[party]:
                continue
            assigned[party].append(product_set.members[j][party])
            previous, ranks[party] = ranks[party], rank
            # forward check: every later member still needs a party to kill it
            if all(placeable(k) for k in range(j + 1, size)) and search(j + 1):
                return True
            assigned[party].pop()
            ranks[party] = previous
        return False

    try:
        found = search(0)
    except _Undecided:
        logger.warning("partition search stopped after %d nodes", node_cap)
        return ExtendibilityReport("undecided", PARTITION)
    logger.debug("partition search visited %d nodes", nodes)
    if not found:
        return _no_extension(product_set, PARTITION)
    kets = []
    for party, dim in enumerate(dims):
        if not assigned[party]:
            kets.append(basis_ket(dim, 0))
            continue
        complement = null_space(np.column_stack(assigned[party]).conj().T, rcond=1e-9)
        kets.append(complement[:, 0])
    return ExtendibilityReport("extendible", PARTITION, _verified(product_set, kets))


def numeric_extendibility(product_set: ProductVectorSet, restarts: Optional[int] = None, seed: Optional[int] = None):
    """Product-state minimum of the projector onto span(S); about 0 when extendible."""
    return product_epsilon(span_projector(product_set), product_set.dims, restarts=restarts, seed=seed)


def extendibility_report_numeric(
    product_set: ProductVectorSet,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    threshold: float = NUMERIC_THRESHOLD,
) -> ExtendibilityReport:
    if span_rank(product_set) >= product_set.total_dim:
        return ExtendibilityReport("span-complete", NUMERIC, numeric_value=1.0)
    result = numeric_extendibility(product_set, restarts=restarts, seed=seed)
    if result.value > threshold:
        return ExtendibilityReport(
            "unextendible", NUMERIC, numeric_value=result.value, seed=result.seed, restarts=result.restarts
        )
    try:
        witness = _verified(product_set, result.kets)
    except InternalError:
        # near-zero minimum whose argmin is not orthogonal to working precision
        witness = None
    return ExtendibilityReport(
        "extendible", NUMERIC, witness, numeric_value=result.value, seed=result.seed, restarts=result.restarts
    )


# ============================================================
# COMPLETION SEARCH
# ============================================================

@dataclass(frozen=True, eq=False)
class CompletionResult:
    """``status``: completed, none (search exhausted) or undecided (budget hit)."""

    status: str
    completion: Optional[ProductVectorSet] = None
    nodes: int = 0


def _vocabulary(product_set: ProductVectorSet, party: int) -> list[np.ndarray]:
    rays: list[np.ndarray] = []
    for ray in distinct_local_rays(product_set, party).rays:
        for vec in (ray, perp(ray)):
            if not any(same_ray(vec, known) for known in rays):
                rays.append(vec)
    return rays


def completability_search(product_set: ProductVectorSet, budget: int = DEFAULT_COMPLETION_BUDGET) -> CompletionResult:
    """Extend an orthogonal qubit set to a full orthogonal product basis.

    Candidates are products of the distinct rays of the set and their
    orthocomplements; the search adds candidates in lexicographic order
    and backtracks.
    """
    if any(d != 2 for d in product_set.dims):
        raise ArgumentError("completability_search works on qubit sets")
    if not gram_orthogonality_check(product_set).ok:
        raise ArgumentError("completability_search needs an orthogonal set")
    dim = product_set.total_dim
    missing = dim - len(product_set)
    vocab = [_vocabulary(product_set, i) for i in range(product_set.n)] if len(product_set) else [
        [basis_ket(2, 0), basis_ket(2, 1)] for _ in product_set.dims
    ]
    candidates = [
        member for member in product(*vocab)
        if all(any(orthogonal(u, v) for u, v in zip(member, other)) for other in product_set.members)
    ]
    chosen: list[tuple[np.ndarray, ...]] = []
    nodes = 0

    def fits(member) -> bool:
        return all(any(orthogonal(u, v) for u, v in zip(member, other)) for other in chosen)

    def search(start: int) -> bool:
        nonlocal nodes
        if len(chosen) == missing:
            return True
        for k in range(start, len(candidates)):
            if len(candidates) - k < missing - len(chosen):
                return False
            nodes += 1
            if nodes > budget:
                raise _Undecided()
            if fits(candidates[k]):
                chosen.append(candidates[k])
                if search(k + 1):
                    return True
                chosen.pop()
        return False

    try:
        found = search(0)
    except _Undecided:
        logger.warning("completion search hit its budget of %d nodes", budget)
        return CompletionResult("undecided", nodes=nodes)
    if not found:
        return CompletionResult("none", nodes=nodes)
    completion = ProductVectorSet(product_set.dims, tuple(tuple(m) for m in chosen))
    return CompletionResult("completed", completion, nodes)
