"""Bell inequalities as sparse weighted terms, and the maps to and from product sets."""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations, permutations, product
from math import prod
from typing import Optional, Sequence

from app.errors import ArgumentError
from app.services.product_sets import (
    MeasurementPartition,
    ProductVectorSet,
    SubsetAnnotation,
    orthogonal,
)
from app.services.linalg import is_normalized, ket


def as_fraction(value) -> Fraction:
    """Exact rational from int, Fraction, ``"num/den"``/decimal text or float (via its repr)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ArgumentError("booleans are not weights")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ArgumentError(f"not a rational number: {value!r}")
    raise ArgumentError(f"not a rational number: {value!r}")


def format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


# ============================================================
# MODELS
# ============================================================

@dataclass(frozen=True)
class Scenario:
    """Inputs per party and outputs per party per input."""

    outputs: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.outputs:
            raise ArgumentError("scenario needs at least one party")
        for party, outs in enumerate(self.outputs):
            if len(outs) < 1 or any(r < 1 for r in outs):
                raise ArgumentError(f"party {party}: input and output counts must be >= 1")

    @classmethod
    def uniform(cls, n: int, inputs: int = 2, outputs: int = 2) -> "Scenario":
        return cls(tuple((outputs,) * inputs for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.outputs)

    @property
    def inputs(self) -> tuple[int, ...]:
        return tuple(len(outs) for outs in self.outputs)

    def strategy_count(self) -> int:
        return prod(prod(outs) for outs in self.outputs)

    def input_vectors(self) -> list[tuple[int, ...]]:
        return list(product(*(range(m) for m in self.inputs)))

    def output_vectors(self, x: Sequence[int]) -> list[tuple[int, ...]]:
        return list(product(*(range(self.outputs[i][xi]) for i, xi in enumerate(x))))

    def coordinates(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """All (x, a) pairs of a behavior table, x-major lexicographic."""
        return [(x, a) for x in self.input_vectors() for a in self.output_vectors(x)]


@dataclass(frozen=True)
class BellTerm:
    x: tuple[int, ...]
    a: tuple[int, ...]
    q: Fraction


@dataclass(frozen=True)
class BellInequality:
    scenario: Scenario
    terms: tuple[BellTerm, ...]
    classical_bound: Optional[Fraction] = None

    def __post_init__(self):
        if not self.terms:
            raise ArgumentError("an inequality needs at least one term")
        seen = set()
        for term in self.terms:
            if len(term.x) != self.scenario.n or len(term.a) != self.scenario.n:
                raise ArgumentError(f"term {term} does not match {self.scenario.n} parties")
            for i, (xi, ai) in enumerate(zip(term.x, term.a)):
                if not 0 <= xi < self.scenario.inputs[i]:
                    raise ArgumentError(f"term {term}: input {xi} out of range at party {i}")
                if not 0 <= ai < self.scenario.outputs[i][xi]:
                    raise ArgumentError(f"term {term}: output {ai} out of range at party {i}")
            if term.q <= 0:
                raise ArgumentError(f"term {term}: weights must be positive")
            if (term.x, term.a) in seen:
                raise ArgumentError(f"duplicate term p({term.a}|{term.x})")
            seen.add((term.x, term.a))

    def with_classical_bound(self, bound: Fraction) -> "BellInequality":
        return replace(self, classical_bound=bound)

    def describe(self) -> str:
        parts = []
        for t in self.terms:
            weight = "" if t.q == 1 else f"{t.q}*"
            parts.append(f"{weight}p({''.join(map(str, t.a))}|{''.join(map(str, t.x))})")
        bound = "?" if self.classical_bound is None else str(self.classical_bound)
        return " + ".join(parts) + f" <= {bound}"


# ============================================================
# SET -> INEQUALITY
# ============================================================

def inequality_from_set(
    product_set: ProductVectorSet,
    partition: MeasurementPartition,
    weights: Optional[Sequence] = None,
) -> BellInequality:
    if len(partition.assignment) != len(product_set) or len(partition.subsets) != product_set.n:
        raise ArgumentError("partition does not belong to this product set")
    if weights is None:
        weights = [1] * len(product_set)
    if len(weights) != len(product_set):
        raise ArgumentError(f"expected {len(product_set)} weights, got {len(weights)}")
    scenario = Scenario(
        tuple(tuple(len(subset) for subset in party_subsets) for party_subsets in partition.subsets)
    )
    terms = []
    for labels, weight in zip(partition.assignment, weights):
        q = as_fraction(weight)
        if q <= 0:
            raise ArgumentError("weights must be positive")
        x = tuple(k for k, _ in labels)
        a = tuple(a for _, a in labels)
        terms.append(BellTerm(x=x, a=a, q=q))
    return BellInequality(scenario=scenario, terms=tuple(terms))


# ============================================================
# GYNI-TYPE FAMILY
# ============================================================

def _even_subsets(elements: Sequence[int]) -> list[tuple[int, ...]]:
    subsets = []
    for size in range(0, len(elements) + 1, 2):
        subsets.extend(combinations(elements, size))
    return sorted(subsets)


def _predecessor(i: int, n: int) -> int:
    # 1-based positions; 1 - 1 wraps to n
    return (i - 2) % n + 1


def gyni_flip_patterns(n: int) -> list[tuple[frozenset, frozenset]]:
    """(input flips, output flips) per term, 1-based positions, ordered by (seed, I)."""
    if n < 3:
        raise ArgumentError(f"the GYNI-type family needs n >= 3, got {n}")
    patterns = []
    if n % 2 == 1:
        for subset in _even_subsets(range(1, n + 1)):
            patterns.append((frozenset(subset), frozenset(_predecessor(i, n) for i in subset)))
        return patterns
    subsets = _even_subsets(range(2, n + 1))
    for subset in subsets:
        patterns.append((frozenset(subset), frozenset(i - 1 for i in subset)))
    for subset in subsets:
        patterns.append((frozenset(subset) | {1}, frozenset(i - 1 for i in subset) | {n}))
    return patterns


def gyni_inequality(n: int) -> BellInequality:
    terms = []
    for inputs, outputs in gyni_flip_patterns(n):
        x = tuple(int(i in inputs) for i in range(1, n + 1))
        a = tuple(int(i in outputs) for i in range(1, n + 1))
        terms.append(BellTerm(x=x, a=a, q=Fraction(1)))
    return BellInequality(Scenario.uniform(n), tuple(terms), classical_bound=Fraction(1))


# ============================================================
# INEQUALITY -> SET
# ============================================================

def vectors_from_inequality(inequality: BellInequality, dictionaries) -> ProductVectorSet:
    """Product vectors whose party-i ket is ``dictionaries[i][x_i][a_i]``.

    Party i's dimension is that of its dictionary kets; it must be shared by
    all of them and be at least the party's largest output count.
    """
    scenario = inequality.scenario
    if len(dictionaries) != scenario.n:
        raise ArgumentError(f"expected dictionaries for {scenario.n} parties, got {len(dictionaries)}")
    dims = []
    kets = []
    for i, party_dict in enumerate(dictionaries):
        if len(party_dict) != scenario.inputs[i]:
            raise ArgumentError(f"party {i}: expected {scenario.inputs[i]} inputs, got {len(party_dict)}")
        party_kets = []
        dim = None
        for x, outs in enumerate(party_dict):
            if len(outs) != scenario.outputs[i][x]:
                raise ArgumentError(f"party {i} input {x}: expected {scenario.outputs[i][x]} kets")
            vecs = tuple(ket(v) for v in outs)
            if dim is None:
                dim = vecs[0].shape[0]
                if dim < max(scenario.outputs[i]):
                    raise ArgumentError(
                        f"party {i}: dimension {dim} is below the {max(scenario.outputs[i])} outputs it must resolve"
                    )
            for v in vecs:
                if v.shape != (dim,) or not is_normalized(v):
                    raise ArgumentError(f"party {i} input {x}: kets must be normalized of dimension {dim}")
            for u, v in combinations(vecs, 2):
                if not orthogonal(u, v):
                    raise ArgumentError(f"party {i} input {x}: kets are not orthonormal")
            party_kets.append(vecs)
        dims.append(dim)
        kets.append(tuple(party_kets))
    members = []
    labels = []
    for term in inequality.terms:
        members.append(tuple(kets[i][xi][ai] for i, (xi, ai) in enumerate(zip(term.x, term.a))))
        labels.append(tuple(zip(term.x, term.a)))
    annotation = SubsetAnnotation(kets=tuple(kets), labels=tuple(labels))
    return ProductVectorSet(tuple(dims), tuple(members), annotation)


# ============================================================
# CANONICAL FORM
# ============================================================

def _local_relabelings(outputs: tuple[int, ...]):
    """Every (input permutation, output permutations) of one party.

    Yields ``(mapping, new_outputs)`` with ``mapping[(x, a)] = (x', a')``.
    """
    inputs = len(outputs)
    for order in permutations(range(inputs)):
        # order[new] = old
        new_outputs = tuple(outputs[old] for old in order)
        for output_perms in product(*(permutations(range(outputs[old])) for old in order)):
            mapping = {}
            for new_x, old_x in enumerate(order):
                for new_a, old_a in enumerate(output_perms[new_x]):
                    mapping[(old_x, old_a)] = (new_x, new_a)
            yield mapping, new_outputs


def _canonical_key(inequality: BellInequality):
    """Minimal relabeled (outputs, terms), built one party position at a time.

    A labeling is compared position by position on (output counts of the
    party placed there, sorted multiset of term prefixes with weights), so a
    partial labeling that loses at some position is dropped together with
    all its completions. Partial labelings with identical futures are merged.
    """
    scenario = inequality.scenario
    n = scenario.n
    terms = inequality.terms
    local = [list(_local_relabelings(outs)) for outs in scenario.outputs]
    frontier = [((), (), tuple(() for _ in terms))]
    for _ in range(n):
        best = None
        survivors: dict = {}
        for used, outputs, prefixes in frontier:
            for party in range(n):
                if party in used:
                    continue
                rest = [j for j in range(n) if j not in used and j != party]
                for mapping, new_outputs in local[party]:
                    extended = tuple(
                        prefix + (mapping[(t.x[party], t.a[party])],) for prefix, t in zip(prefixes, terms)
                    )
                    key = (new_outputs, tuple(sorted(zip(extended, (t.q for t in terms)))))
                    if best is not None and key > best:
                        continue
                    if best is None or key < best:
                        best = key
                        survivors = {}
                    state = (
                        frozenset(used) | {party},
                        tuple(sorted(
                            (prefix, tuple((t.x[j], t.a[j]) for j in rest), t.q)
                            for prefix, t in zip(extended, terms)
                        )),
                    )
                    survivors.setdefault(state, (used + (party,), outputs + (new_outputs,), extended))
        frontier = list(survivors.values())
    _, outputs, prefixes = frontier[0]
    new_terms = sorted(
        (tuple(x for x, _ in prefix), tuple(a for _, a in prefix), t.q) for prefix, t in zip(prefixes, terms)
    )
    return outputs, tuple(new_terms)


def relabel_canonical(inequality: BellInequality) -> BellInequality:
    """Deterministic representative of the inequality's relabeling class.

    Minimal over party permutations, per-party input permutations and
    per-input output permutations, so two inequalities are equivalent exactly
    when their canonical forms coincide.
    """
    outputs, terms = _canonical_key(inequality)
    return BellInequality(
        scenario=Scenario(outputs),
        terms=tuple(BellTerm(x=x, a=a, q=q) for x, a, q in terms),
        classical_bound=inequality.classical_bound,
    )


def equivalent(first: BellInequality, second: BellInequality) -> bool:
    if first.scenario.n != second.scenario.n or len(first.terms) != len(second.terms):
        return False
    one = relabel_canonical(first)
    two = relabel_canonical(second)
    return one.scenario == two.scenario and one.terms == two.terms


def term_table(inequality: BellInequality) -> dict:
    return {(t.x, t.a): t.q for t in inequality.terms}
