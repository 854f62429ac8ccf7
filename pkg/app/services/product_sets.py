"""Sets of product vectors, local ray tables and property (P)."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from app.errors import ArgumentError
from app.services.linalg import NORM_TOL, is_normalized, ket, tensor_product

logger = logging.getLogger(__name__)

RAY_TOL = 1e-9
ORTH_TOL = 1e-9
PHASE_TOL = 1e-9


# ============================================================
# MODELS
# ============================================================

@dataclass(frozen=True, eq=False)
class SubsetAnnotation:
    """Declared local measurement subsets of a generated set.

    ``kets[i][k][a]`` is output ``a`` of subset ``k`` at party ``i``;
    ``labels[j][i]`` is the ``(k, a)`` pair member ``j`` uses at party ``i``.
    """

    kets: tuple[tuple[tuple[np.ndarray, ...], ...], ...]
    labels: tuple[tuple[tuple[int, int], ...], ...]


@dataclass(frozen=True, eq=False)
class ProductVectorSet:
    dims: tuple[int, ...]
    members: tuple[tuple[np.ndarray, ...], ...]
    annotation: Optional[SubsetAnnotation] = None

    def __post_init__(self):
        if len(self.dims) == 0 or any(d < 1 for d in self.dims):
            raise ArgumentError(f"invalid party dimensions {self.dims}")
        for j, member in enumerate(self.members):
            if len(member) != len(self.dims):
                raise ArgumentError(f"member {j} has {len(member)} factors, expected {len(self.dims)}")
            for i, (vec, dim) in enumerate(zip(member, self.dims)):
                if vec.shape != (dim,):
                    raise ArgumentError(f"member {j} party {i}: ket of dimension {vec.shape[0]}, expected {dim}")
                if not is_normalized(vec, NORM_TOL):
                    raise ArgumentError(f"member {j} party {i}: ket is not normalized")
        if self.annotation is not None and len(self.annotation.labels) != len(self.members):
            raise ArgumentError("subset annotation does not label every member")

    @classmethod
    def build(cls, dims: Sequence[int], members, annotation: Optional[SubsetAnnotation] = None):
        return cls(
            dims=tuple(int(d) for d in dims),
            members=tuple(tuple(ket(v) for v in member) for member in members),
            annotation=annotation,
        )

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self) -> int:
        return len(self.members)

    def vector(self, j: int) -> np.ndarray:
        return tensor_product(self.members[j])

    def matrix(self) -> np.ndarray:
        """Members as the columns of a D x |S| matrix."""
        if not self.members:
            return np.zeros((self.total_dim, 0), dtype=complex)
        return np.column_stack([self.vector(j) for j in range(len(self))])

    def without_annotation(self) -> "ProductVectorSet":
        return ProductVectorSet(self.dims, self.members)


@dataclass(frozen=True, eq=False)
class RayTable:
    party: int
    rays: tuple[np.ndarray, ...]
    member_map: tuple[int, ...]


@dataclass(frozen=True)
class MeasurementPartition:
    """Per party: the subsets of ray indices, and per member the (input, output) pair."""

    subsets: tuple[tuple[tuple[int, ...], ...], ...]
    assignment: tuple[tuple[tuple[int, int], ...], ...]
    tables: tuple[RayTable, ...] = field(compare=False, repr=False)

    def subset_kets(self, party: int) -> list[list[np.ndarray]]:
        rays = self.tables[party].rays
        return [[rays[r] for r in subset] for subset in self.subsets[party]]


@dataclass(frozen=True)
class PropertyViolation:
    party: int
    pair: tuple[int, int]
    overlap: float


@dataclass(frozen=True)
class PropertyCheck:
    ok: bool
    partition: Optional[MeasurementPartition] = None
    violation: Optional[PropertyViolation] = None


@dataclass(frozen=True)
class OrthogonalityCheck:
    ok: bool
    worst_pair: Optional[tuple[int, int]]
    worst_overlap: float


# ============================================================
# RAYS
# ============================================================

def canonical_ray(vec: np.ndarray) -> np.ndarray:
    """First amplitude above tolerance rotated to the positive real axis."""
    for amp in vec:
        if abs(amp) > PHASE_TOL:
            return vec * (abs(amp) / amp)
    return vec.copy()


def same_ray(u: np.ndarray, v: np.ndarray) -> bool:
    return abs(np.vdot(u, v)) >= 1.0 - RAY_TOL


def orthogonal(u: np.ndarray, v: np.ndarray) -> bool:
    return abs(np.vdot(u, v)) <= ORTH_TOL


def distinct_local_rays(product_set: ProductVectorSet, party: int) -> RayTable:
    if party < 0 or party >= product_set.n:
        raise ArgumentError(f"party {party} out of range")
    rays: list[np.ndarray] = []
    member_map = []
    for member in product_set.members:
        vec = member[party]
        for index, ray in enumerate(rays):
            if same_ray(ray, vec):
                member_map.append(index)
                break
        else:
            rays.append(canonical_ray(vec))
            member_map.append(len(rays) - 1)
    return RayTable(party=party, rays=tuple(rays), member_map=tuple(member_map))


def orthogonality_graph(table: RayTable) -> np.ndarray:
    """Boolean adjacency matrix: edge (u, v) iff the rays are orthogonal."""
    count = len(table.rays)
    adjacency = np.zeros((count, count), dtype=bool)
    for u, v in combinations(range(count), 2):
        if orthogonal(table.rays[u], table.rays[v]):
            adjacency[u, v] = adjacency[v, u] = True
    return adjacency


# ============================================================
# PROPERTY (P)
# ============================================================

def check_property_P(product_set: ProductVectorSet) -> PropertyCheck:
    """Split every party's rays into measurement subsets, or report why (P) fails.

    The subsets are the connected components of the orthogonality graph; (P)
    holds iff every component is a clique. Subsets are ordered by their first
    ray (i.e. by the smallest member index using them), outputs by first use.
    """
    tables = []
    subsets_per_party = []
    position = []
    for party in range(product_set.n):
        table = distinct_local_rays(product_set, party)
        adjacency = orthogonality_graph(table)
        count, labels = connected_components(adjacency, directed=False)
        components: dict[int, list[int]] = {}
        for ray_index, label in enumerate(labels):
            components.setdefault(int(label), []).append(ray_index)
        ordered = sorted(components.values(), key=lambda comp: comp[0])
        for comp in ordered:
            for u, v in combinations(comp, 2):
                if not adjacency[u, v]:
                    overlap = float(abs(np.vdot(table.rays[u], table.rays[v])))
                    logger.info("property (P) fails at party %d: rays %d and %d overlap %.3g", party, u, v, overlap)
                    return PropertyCheck(ok=False, violation=PropertyViolation(party, (u, v), overlap))
        lookup = {}
        for k, comp in enumerate(ordered):
            for a, ray_index in enumerate(comp):
                lookup[ray_index] = (k, a)
        tables.append(table)
        subsets_per_party.append(tuple(tuple(comp) for comp in ordered))
        position.append(lookup)

    assignment = tuple(
        tuple(position[i][tables[i].member_map[j]] for i in range(product_set.n))
        for j in range(len(product_set))
    )
    partition = MeasurementPartition(
        subsets=tuple(subsets_per_party), assignment=assignment, tables=tuple(tables)
    )
    return PropertyCheck(ok=True, partition=partition)


def gram_orthogonality_check(product_set: ProductVectorSet) -> OrthogonalityCheck:
    size = len(product_set)
    if size < 2:
        return OrthogonalityCheck(ok=True, worst_pair=None, worst_overlap=0.0)
    overlaps = np.ones((size, size))
    for party in range(product_set.n):
        local = np.column_stack([m[party] for m in product_set.members])
        overlaps *= np.abs(local.conj().T @ local)
    np.fill_diagonal(overlaps, 0.0)
    j, k = np.unravel_index(int(np.argmax(overlaps)), overlaps.shape)
    worst = float(overlaps[j, k])
    pair = (int(min(j, k)), int(max(j, k)))
    return OrthogonalityCheck(ok=worst <= ORTH_TOL, worst_pair=pair, worst_overlap=worst)


# ============================================================
# SET COMPARISON AND SPAN
# ============================================================

def same_members(first: ProductVectorSet, second: ProductVectorSet) -> bool:
    """Equality up to member ordering and per-ray phase."""
    if first.dims != second.dims or len(first) != len(second):
        return False
    unused = list(range(len(second)))
    for member in first.members:
        for position, k in enumerate(unused):
            if all(same_ray(u, v) for u, v in zip(member, second.members[k])):
                del unused[position]
                break
        else:
            return False
    return True


def span_rank(product_set: ProductVectorSet, tol: float = 1e-9) -> int:
    if len(product_set) == 0:
        return 0
    singular = np.linalg.svd(product_set.matrix(), compute_uv=False)
    return int(np.sum(singular > tol))


def span_projector(product_set: ProductVectorSet, tol: float = 1e-9) -> np.ndarray:
    """Orthogonal projector onto span(S); members need not be orthogonal."""
    dim = product_set.total_dim
    if len(product_set) == 0:
        return np.zeros((dim, dim), dtype=complex)
    left, singular, _ = np.linalg.svd(product_set.matrix(), full_matrices=False)
    basis = left[:, singular > tol]
    return basis @ basis.conj().T
