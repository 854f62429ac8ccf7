"""Local polytope vertices and facet checks."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from math import lcm

import numpy as np

from app.config import max_tight_vertices
from app.errors import CapacityError, MalformedInequalityError
from app.services.bounds import classical_bound
from app.services.inequalities import BellInequality, Scenario
from app.services.rank import affine_dimension

logger = logging.getLogger(__name__)

MAX_VERTICES = 10**6


@dataclass(frozen=True)
class TightnessReport:
    polytope_dim: int
    face_dim: int
    is_facet: bool
    saturating_count: int
    saturating_indices: tuple[int, ...] = ()


def _local_block(outputs: tuple[int, ...]) -> np.ndarray:
    """Deterministic points of one party; columns (x, a) in lexicographic order."""
    maps = list(product(*(range(r) for r in outputs)))
    offsets = np.cumsum((0,) + outputs[:-1])
    block = np.zeros((len(maps), sum(outputs)), dtype=np.int8)
    for row, choice in enumerate(maps):
        block[row, offsets + np.array(choice)] = 1
    return block


def _column_order(scenario: Scenario) -> np.ndarray:
    """Position of each (x, a) coordinate inside the Kronecker column layout."""
    widths = [sum(outs) for outs in scenario.outputs]
    strides = [int(np.prod(widths[i + 1:])) for i in range(scenario.n)]
    offsets = [np.cumsum((0,) + outs[:-1]) for outs in scenario.outputs]
    return np.array([
        sum(strides[i] * (int(offsets[i][xi]) + ai) for i, (xi, ai) in enumerate(zip(x, a)))
        for x, a in scenario.coordinates()
    ])


def local_vertices(scenario: Scenario) -> np.ndarray:
    """0/1 matrix: one row per deterministic strategy, one column per (x, a)."""
    count = scenario.strategy_count()
    if count > MAX_VERTICES:
        raise CapacityError("local vertices", count, MAX_VERTICES)
    kron = reduce(np.kron, (_local_block(outs) for outs in scenario.outputs))
    return kron[:, _column_order(scenario)]


def _checked_vertices(scenario: Scenario, allow_large: bool) -> np.ndarray:
    count = scenario.strategy_count()
    limit = max_tight_vertices()
    if count > limit:
        if not allow_large:
            raise CapacityError("facet-check vertices", count, limit)
        logger.warning("facet check over %d vertices exceeds the configured %d; this can take long", count, limit)
    return local_vertices(scenario)


def polytope_dimension(scenario: Scenario, allow_large: bool = False) -> int:
    return affine_dimension(_checked_vertices(scenario, allow_large))


def _vertex_values(inequality: BellInequality, vertices: np.ndarray) -> tuple[np.ndarray, int]:
    """Integer Bell values of every vertex, scaled by the weights' common denominator."""
    scale = reduce(lcm, (t.q.denominator for t in inequality.terms), 1)
    index = {c: k for k, c in enumerate(inequality.scenario.coordinates())}
    values = np.zeros(vertices.shape[0], dtype=object)
    for t in inequality.terms:
        values = values + vertices[:, index[(t.x, t.a)]].astype(object) * int(t.q * scale)
    return values, scale


def saturating_vertex_indices(inequality: BellInequality, vertices=None, bound=None) -> tuple[int, ...]:
    scenario = inequality.scenario
    vertices = local_vertices(scenario) if vertices is None else vertices
    if bound is None:
        bound = inequality.classical_bound
        if bound is None:
            bound = classical_bound(inequality)[0]
    values, scale = _vertex_values(inequality, vertices)
    target = bound * scale
    if any(v > target for v in values):
        raise MalformedInequalityError(f"a deterministic point exceeds the stated classical bound {bound}")
    indices = tuple(int(k) for k in np.nonzero(values == target)[0]) if target.denominator == 1 else ()
    if not indices:
        raise MalformedInequalityError(f"no deterministic point attains the stated classical bound {bound}")
    index = {c: k for k, c in enumerate(scenario.coordinates())}
    for k in indices:
        exact = sum((t.q for t in inequality.terms if vertices[k, index[(t.x, t.a)]]), Fraction(0))
        if exact != bound:
            raise MalformedInequalityError(f"vertex {k} re-evaluates to {exact}, not {bound}")
    return indices


def is_tight(inequality: BellInequality, allow_large: bool = False) -> TightnessReport:
    """Facet test: the saturating deterministic points span a face one below the polytope."""
    vertices = _checked_vertices(inequality.scenario, allow_large)
    bound = inequality.classical_bound
    if bound is None:
        bound = classical_bound(inequality)[0]
    indices = saturating_vertex_indices(inequality, vertices, bound)
    polytope_dim = affine_dimension(vertices)
    face_dim = affine_dimension(vertices[list(indices)])
    report = TightnessReport(
        polytope_dim=polytope_dim,
        face_dim=face_dim,
        is_facet=face_dim == polytope_dim - 1,
        saturating_count=len(indices),
        saturating_indices=indices,
    )
    logger.info("face dimension %d in a %d-dimensional polytope", face_dim, polytope_dim)
    return report
