from fractions import Fraction

import numpy as np
import pytest

from app.services.families import DEFAULT_E, KET_0, KET_1, perp, shifts_upb
from app.services.inequalities import BellInequality, BellTerm, Scenario, inequality_from_set
from app.services.linalg import basis_ket
from app.services.product_sets import ProductVectorSet, check_property_P

UPBBELL_VARIABLES = (
    "UPBBELL_THREADS",
    "UPBBELL_SEED",
    "UPBBELL_RESTARTS",
    "UPBBELL_LOG_LEVEL",
    "UPBBELL_MAX_TIGHT_VERTICES",
)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in UPBBELL_VARIABLES:
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("UPBBELL_RESTARTS", "16")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def shifts():
    return shifts_upb()


@pytest.fixture
def shifts_inequality(shifts):
    return inequality_from_set(shifts, check_property_P(shifts).partition).with_classical_bound(Fraction(1))


def listed_shifts_inequality() -> BellInequality:
    """p(000|000) + p(100|011) + p(011|101) + p(111|110) <= 1."""
    terms = [
        ((0, 0, 0), (0, 0, 0)),
        ((0, 1, 1), (1, 0, 0)),
        ((1, 0, 1), (0, 1, 1)),
        ((1, 1, 0), (1, 1, 1)),
    ]
    return BellInequality(
        Scenario.uniform(3),
        tuple(BellTerm(x, a, Fraction(1)) for x, a in terms),
        classical_bound=Fraction(1),
    )


@pytest.fixture
def shifts_terms():
    return listed_shifts_inequality()


def shifts_dictionaries():
    """S_0 = {|0>, |1>}, S_1 = {|e>, |e_perp>} at every party."""
    return [[[KET_0, KET_1], [DEFAULT_E, perp(DEFAULT_E)]] for _ in range(3)]


def computational_set(*bitstrings: str) -> ProductVectorSet:
    return ProductVectorSet.build(
        [2] * len(bitstrings[0]),
        [[basis_ket(2, int(bit)) for bit in bits] for bits in bitstrings],
    )


def single_term_inequality(q=Fraction(1)) -> BellInequality:
    return BellInequality(Scenario.uniform(2), (BellTerm((0, 0), (0, 0), Fraction(q)),))


def chsh_game() -> BellInequality:
    terms = []
    for x in (0, 1):
        for y in (0, 1):
            for a in (0, 1):
                b = a ^ (x & y)
                terms.append(BellTerm((x, y), (a, b), Fraction(1)))
    return BellInequality(Scenario.uniform(2), tuple(terms))
