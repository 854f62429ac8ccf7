"""Exact nonsignalling value of a Bell inequality."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import prod

from app.errors import CapacityError, InternalError
from app.services.inequalities import BellInequality, Scenario, term_table
from app.services.simplex import maximize

logger = logging.getLogger(__name__)

MAX_LP_VARIABLES = 10**5


@dataclass(frozen=True)
class NonsignallingResult:
    value: Fraction
    # behavior[(x, a)] = p(a|x)
    behavior: dict
    method: str

    def table(self, scenario: Scenario) -> list[list[Fraction]]:
        """Dense p(a|x): one row per input vector, outputs in lexicographic order."""
        return [[self.behavior[(x, a)] for a in scenario.output_vectors(x)] for x in scenario.input_vectors()]


def _marginal_row(index, scenario, kept, x, a_kept, sign_row, sign):
    for a in scenario.output_vectors(x):
        if all(a[i] == ai for i, ai in zip(kept, a_kept)):
            sign_row[index[(x, a)]] += sign


def nonsignalling_constraints(scenario: Scenario):
    """Equality system (rows, rhs) over the full p(a|x) table.

    Normalization for every input vector, plus: for every strict nonempty
    party subset A, every x_A and a_A, the marginal of A is the same for
    every choice of the other parties' inputs.
    """
    coordinates = scenario.coordinates()
    index = {c: k for k, c in enumerate(coordinates)}
    width = len(coordinates)
    rows, rhs = [], []
    inputs = scenario.input_vectors()
    for x in inputs:
        row = [0] * width
        for a in scenario.output_vectors(x):
            row[index[(x, a)]] = 1
        rows.append(row)
        rhs.append(1)

    n = scenario.n
    for size in range(1, n):
        for kept in combinations(range(n), size):
            groups: dict = {}
            for x in inputs:
                groups.setdefault(tuple(x[i] for i in kept), []).append(x)
            for x_kept, members in groups.items():
                reference = members[0]
                outputs_kept = _kept_outputs(scenario, kept, x_kept)
                for other in members[1:]:
                    for a_kept in outputs_kept:
                        row = [0] * width
                        _marginal_row(index, scenario, kept, other, a_kept, row, 1)
                        _marginal_row(index, scenario, kept, reference, a_kept, row, -1)
                        rows.append(row)
                        rhs.append(0)
    return coordinates, rows, rhs


def _kept_outputs(scenario, kept, x_kept):
    return list(product(*(range(scenario.outputs[i][xi]) for i, xi in zip(kept, x_kept))))


def ns_bound(inequality: BellInequality, warm_start: bool = True) -> NonsignallingResult:
    """Maximum of sum T p(a|x) over nonsignalling behaviors, in exact rationals."""
    scenario = inequality.scenario
    width = sum(prod(scenario.outputs[i][xi] for i, xi in enumerate(x)) for x in scenario.input_vectors())
    if width > MAX_LP_VARIABLES:
        raise CapacityError("behavior table entries", width, MAX_LP_VARIABLES)
    coordinates, rows, rhs = nonsignalling_constraints(scenario)
    weights = term_table(inequality)
    cost = [weights.get(c, Fraction(0)) for c in coordinates]
    logger.info("nonsignalling LP: %d variables, %d equalities", len(coordinates), len(rows))
    result = maximize(rows, rhs, cost, warm_start=warm_start)
    if result.status != "optimal":
        raise InternalError(f"nonsignalling LP ended {result.status}; the polytope is never empty or unbounded")
    behavior = {c: v for c, v in zip(coordinates, result.x)}
    return NonsignallingResult(value=result.value, behavior=behavior, method=result.method)


def check_nonsignalling(scenario: Scenario, behavior: dict) -> bool:
    """Exact verification of nonnegativity, normalization and no-signalling."""
    coordinates, rows, rhs = nonsignalling_constraints(scenario)
    values = [Fraction(behavior[c]) for c in coordinates]
    if any(v < 0 for v in values):
        return False
    return all(
        sum((r * v for r, v in zip(row, values) if r), Fraction(0)) == b for row, b in zip(rows, rhs)
    )
