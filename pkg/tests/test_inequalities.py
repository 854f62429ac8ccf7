from fractions import Fraction

import numpy as np
import pytest

from app.errors import ArgumentError
from app.services.families import DEFAULT_E, KET_0, KET_1, gyni_upb, perp
from app.services.inequalities import (
    BellInequality,
    BellTerm,
    Scenario,
    as_fraction,
    equivalent,
    gyni_inequality,
    inequality_from_set,
    relabel_canonical,
    vectors_from_inequality,
)
from app.services.product_sets import check_property_P, same_members

from tests.conftest import computational_set, shifts_dictionaries, single_term_inequality


def from_set(product_set, weights=None):
    return inequality_from_set(product_set, check_property_P(product_set).partition, weights)


def test_shifts_inequality_matches_known_terms(shifts, shifts_terms):
    inequality = from_set(shifts)
    assert inequality.scenario == Scenario.uniform(3)
    assert [(t.x, t.a, t.q) for t in inequality.terms] == [(t.x, t.a, t.q) for t in shifts_terms.terms]


def test_single_member_weight():
    inequality = from_set(computational_set("00"), weights=[0.7])
    assert len(inequality.terms) == 1
    assert inequality.terms[0].q == Fraction(7, 10)
    assert inequality.scenario.outputs == ((1,), (1,))


def test_weights_must_be_positive(shifts):
    with pytest.raises(ArgumentError):
        from_set(shifts, weights=[1, 1, 0, 1])
    with pytest.raises(ArgumentError):
        from_set(shifts, weights=[1, 1])


def test_as_fraction():
    assert as_fraction("3/4") == Fraction(3, 4)
    assert as_fraction(0.1) == Fraction(1, 10)
    assert as_fraction(2) == Fraction(2)
    with pytest.raises(ArgumentError):
        as_fraction("three")
    with pytest.raises(ArgumentError):
        as_fraction(True)


def test_shifts_terms_are_pairwise_distinguishable(shifts_terms):
    terms = shifts_terms.terms
    for j, first in enumerate(terms):
        for second in terms[j + 1:]:
            assert any(
                xi == yi and ai != bi for xi, yi, ai, bi in zip(first.x, second.x, first.a, second.a)
            )


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8])
def test_gyni_term_count(n):
    inequality = gyni_inequality(n)
    assert len(inequality.terms) == 2 ** (n - 1)
    assert len({t.x for t in inequality.terms}) == 2 ** (n - 1)
    assert inequality.classical_bound == 1


def test_gyni_three_contains_known_term():
    terms = {(t.x, t.a) for t in gyni_inequality(3).terms}
    assert ((0, 0, 0), (0, 0, 0)) in terms
    assert ((1, 0, 1), (0, 1, 1)) in terms


def test_gyni_rejects_small_n():
    with pytest.raises(ArgumentError):
        gyni_inequality(2)


def test_vectors_from_shifts_inequality(shifts, shifts_terms):
    rebuilt = vectors_from_inequality(shifts_terms, shifts_dictionaries())
    assert same_members(rebuilt, shifts)


def test_vectors_from_single_term():
    dictionaries = [[[KET_0]], [[KET_0]]]
    inequality = BellInequality(Scenario(((1,), (1,))), (BellTerm((0, 0), (0, 0), Fraction(1)),))
    assert same_members(vectors_from_inequality(inequality, dictionaries), computational_set("00"))


def test_vectors_need_orthonormal_dictionaries(shifts_terms):
    broken = shifts_dictionaries()
    broken[0][0] = [KET_0, KET_0]
    with pytest.raises(ArgumentError):
        vectors_from_inequality(shifts_terms, broken)


def test_gyni_vectors_match_generator():
    rebuilt = vectors_from_inequality(gyni_inequality(3), shifts_dictionaries())
    assert same_members(rebuilt, gyni_upb(3))


@pytest.mark.parametrize("n", [3, 4])
def test_set_inequality_round_trip(n):
    inequality = gyni_inequality(n)
    dictionaries = [[[KET_0, KET_1], [DEFAULT_E, perp(DEFAULT_E)]] for _ in range(n)]
    rebuilt = from_set(vectors_from_inequality(inequality, dictionaries))
    assert equivalent(rebuilt, inequality)


def test_gyni_set_gives_gyni_inequality():
    assert equivalent(from_set(gyni_upb(4)), gyni_inequality(4))
    assert equivalent(from_set(gyni_upb(3)), gyni_inequality(3))


def test_shifts_equivalent_to_gyni_three(shifts_terms):
    assert equivalent(shifts_terms, gyni_inequality(3))


def test_canonical_form_idempotent(shifts_terms):
    once = relabel_canonical(shifts_terms)
    assert relabel_canonical(once) == once


def test_canonical_form_invariant_under_relabeling(shifts_terms):
    swapped = BellInequality(
        shifts_terms.scenario,
        tuple(BellTerm((t.x[2], t.x[0], 1 - t.x[1]), (1 - t.a[2], t.a[0], t.a[1]), t.q) for t in shifts_terms.terms),
    )
    first = relabel_canonical(shifts_terms)
    second = relabel_canonical(swapped)
    assert first.terms == second.terms
    assert first.scenario == second.scenario


def test_inequivalent_inequalities():
    assert not equivalent(single_term_inequality(), single_term_inequality(Fraction(1, 2)))


def test_inequality_validation():
    scenario = Scenario.uniform(2)
    with pytest.raises(ArgumentError):
        BellInequality(scenario, ())
    with pytest.raises(ArgumentError):
        BellInequality(scenario, (BellTerm((0, 0), (0, 0), Fraction(1)), BellTerm((0, 0), (0, 0), Fraction(2))))
    with pytest.raises(ArgumentError):
        BellInequality(scenario, (BellTerm((0, 2), (0, 0), Fraction(1)),))
    with pytest.raises(ArgumentError):
        BellInequality(scenario, (BellTerm((0, 0), (0, 0), Fraction(-1)),))


def test_vectors_take_dimension_from_dictionaries():
    qutrit = [[1, 0, 0], [0, 1, 0]]
    inequality = BellInequality(Scenario(((2,), (1,))), (BellTerm((0, 0), (1, 0), Fraction(1)),))
    product_set = vectors_from_inequality(inequality, [[qutrit], [[KET_0]]])
    assert product_set.dims == (3, 2)


def test_vectors_reject_too_small_or_mixed_dimensions():
    inequality = BellInequality(Scenario(((3,), (1,))), (BellTerm((0, 0), (2, 0), Fraction(1)),))
    with pytest.raises(ArgumentError):
        vectors_from_inequality(inequality, [[[KET_0, KET_1, KET_0]], [[KET_0]]])

    two_inputs = BellInequality(Scenario(((1, 1), (1,))), (BellTerm((1, 0), (0, 0), Fraction(1)),))
    with pytest.raises(ArgumentError):
        vectors_from_inequality(two_inputs, [[[KET_0], [[1, 0, 0]]], [[KET_0]]])


def relabeled(inequality, order, input_flips, output_flips):
    """Parties reordered by ``order`` (new -> old), then binary flips per party and per (party, input)."""
    terms = []
    for t in inequality.terms:
        x = tuple(t.x[old] ^ input_flips[p] for p, old in enumerate(order))
        a = tuple(t.a[old] ^ output_flips[p][t.x[old]] for p, old in enumerate(order))
        terms.append(BellTerm(x, a, t.q))
    return BellInequality(inequality.scenario, tuple(terms), inequality.classical_bound)


@pytest.mark.parametrize("n", [5, 6])
def test_canonical_form_survives_relabeling_beyond_four_parties(n):
    inequality = gyni_inequality(n)
    identity = list(range(n))
    swapped = [1, 0] + identity[2:]
    no_flips = [0] * n
    no_output_flips = [(0, 0)] * n
    target = relabel_canonical(inequality)

    assert relabel_canonical(relabeled(inequality, swapped, no_flips, no_output_flips)) == target
    flipped = [(1, 1)] + no_output_flips[1:]
    assert relabel_canonical(relabeled(inequality, identity, no_flips, flipped)) == target

    rng = np.random.default_rng(n)
    for _ in range(3):
        order = [int(i) for i in rng.permutation(n)]
        input_flips = [int(b) for b in rng.integers(0, 2, size=n)]
        output_flips = [tuple(int(b) for b in pair) for pair in rng.integers(0, 2, size=(n, 2))]
        assert equivalent(relabeled(inequality, order, input_flips, output_flips), inequality)


@pytest.mark.parametrize("n", [5, 6])
def test_gyni_set_gives_gyni_inequality_beyond_four_parties(n):
    assert equivalent(from_set(gyni_upb(n)), gyni_inequality(n))


def test_canonical_form_separates_weights():
    inequality = gyni_inequality(5)
    terms = list(inequality.terms)
    terms[0] = BellTerm(terms[0].x, terms[0].a, Fraction(2))
    reweighted = BellInequality(inequality.scenario, tuple(terms))
    assert not equivalent(reweighted, inequality)
