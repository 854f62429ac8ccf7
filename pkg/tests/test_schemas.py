import json
from fractions import Fraction

import pytest
from pydantic import ValidationError

from app.errors import ArgumentError
from app.schemas import (
    InequalityModel,
    OrthogonalityModel,
    ProductSetModel,
    TermModel,
    WitnessReportModel,
    dump,
    e_from_components,
    ket_from_json,
)
from app.services.product_sets import same_members, span_projector
from app.services.witness import product_epsilon, upb_witness


def test_product_set_model_keeps_annotation(shifts):
    model = ProductSetModel.from_domain(shifts)
    restored = ProductSetModel.model_validate_json(model.model_dump_json()).to_domain()
    assert same_members(restored, shifts)
    assert restored.annotation.labels == shifts.annotation.labels


def test_inequality_model_is_exact(shifts_terms):
    model = InequalityModel.from_domain(shifts_terms)
    assert model.classical_bound == "1/1"
    assert InequalityModel.model_validate_json(model.model_dump_json()).to_domain() == shifts_terms


def test_term_weights_normalized():
    assert TermModel(x=[0], a=[0], q=0.25).q == "1/4"
    assert TermModel(x=[0], a=[0], q="6/8").q == "3/4"
    assert Fraction(TermModel(x=[0], a=[0], q=2).q) == 2


def test_scenario_shape_validated():
    data = {"scenario": {"inputs": [2], "outputs": [[2]]}, "terms": [{"x": [0], "a": [0]}]}
    with pytest.raises(ValidationError):
        InequalityModel.model_validate(data)


def test_ket_pairs():
    with pytest.raises(ArgumentError):
        ket_from_json([[1.0]])
    assert e_from_components([1, 0, 0, 1]) == [1, 1j]
    with pytest.raises(ArgumentError):
        e_from_components([1, 0])


def test_reals_written_at_seventeen_digits():
    model = OrthogonalityModel(ok=True, worst_pair=None, worst_overlap=0.1)
    text = dump(model, pretty=False)
    assert '"worst_overlap":0.10000000000000001' in text
    assert json.loads(text)["worst_overlap"] == 0.1

    assert '"worst_overlap":1.0' in dump(OrthogonalityModel(ok=True, worst_overlap=1.0), pretty=False)
    assert '"worst_overlap": 0.0' in dump(OrthogonalityModel(ok=True, worst_overlap=0.0))


def test_witness_model_keeps_seed(shifts):
    epsilon = product_epsilon(span_projector(shifts), shifts.dims, restarts=4, seed=3)
    report = upb_witness(shifts, epsilon.value, seed=epsilon.seed, restarts=epsilon.restarts)
    data = json.loads(dump(WitnessReportModel.from_domain(report)))
    assert data["seed"] == 3
    assert data["restarts"] == 4
