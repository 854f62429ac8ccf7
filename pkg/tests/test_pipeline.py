from fractions import Fraction

import pytest

from app.errors import ArgumentError, PreconditionError
from app.schemas import PipelineReportModel, dump
from app.services.inequalities import relabel_canonical
from app.services.pipeline import bounds_by_kind, run_pipeline, run_pipeline_for_set
from app.services.product_sets import ProductVectorSet

from tests.conftest import computational_set


@pytest.fixture(scope="module")
def shifts_report():
    return run_pipeline(3, seed=7, restarts=8)


def test_shifts_pipeline(shifts_report, shifts_terms):
    report = shifts_report
    assert report.descriptor == {"family": "shifts", "n": 3}
    assert report.orthogonality.ok
    assert report.property_p.ok
    assert report.extendibility.status == "unextendible"
    assert report.canonical.terms == relabel_canonical(shifts_terms).terms
    assert report.inequality.classical_bound == 1
    assert report.skipped == {}
    assert report.warnings == []


def test_shifts_pipeline_bounds(shifts_report):
    bounds = shifts_report.bounds
    assert bounds.beta_c == 1
    assert bounds.beta_q_spectral == pytest.approx(1.0, abs=1e-9)
    assert float(bounds.beta_c) <= bounds.beta_q_seesaw + 1e-6
    assert bounds.beta_q_seesaw <= bounds.beta_q_spectral + 1e-6
    assert bounds.beta_n == Fraction(4, 3)
    assert bounds.nontrivial
    assert not bounds.quantum_violation


def test_shifts_pipeline_witness_and_facet(shifts_report):
    witness = shifts_report.witness
    assert 0 < witness.epsilon < 0.5
    assert witness.trace_BW > 1 + 1e-6
    assert witness.trace_BW == pytest.approx(witness.formula_value, abs=1e-8)
    assert all(witness.ppt_flags.values())
    assert shifts_report.tightness.is_facet


def test_pipeline_is_deterministic(shifts_report):
    again = run_pipeline(3, seed=7, restarts=8)
    first = dump(PipelineReportModel.from_domain(shifts_report))
    second = dump(PipelineReportModel.from_domain(again))
    assert first == second


def test_pipeline_rejects_small_n():
    with pytest.raises(ArgumentError):
        run_pipeline(2)


def test_pipeline_skips_witness_for_extendible_set():
    report = run_pipeline_for_set(computational_set("00", "01"), {"set": "two"}, seed=0, restarts=2)
    assert report.extendibility.status == "extendible"
    assert "witness" in report.skipped
    assert report.witness is None
    assert report.bounds.beta_c == 1
    assert report.bounds.beta_n == 1
    assert report.tightness is not None
    assert not report.tightness.is_facet


def test_pipeline_stops_without_property_p():
    product_set = ProductVectorSet.build(
        [3, 2],
        [
            [[1, 0, 0], [1, 0]],
            [[0, 1, 0], [1, 0]],
            [[0, 2**-0.5, 2**-0.5], [0, 1]],
        ],
    )
    report = run_pipeline_for_set(product_set, {"set": "qutrit path"}, seed=0, restarts=2)
    assert not report.property_p.ok
    assert report.inequality is None
    assert report.bounds is None
    assert set(report.skipped) == {"inequality", "bounds", "witness", "tightness"}


def test_tightness_skipped_over_vertex_cap(monkeypatch):
    monkeypatch.setenv("UPBBELL_MAX_TIGHT_VERTICES", "16")
    report = run_pipeline(3, seed=1, restarts=2)
    assert report.tightness is None
    assert "tightness" in report.skipped


def test_bounds_by_kind(shifts, shifts_inequality):
    classical = bounds_by_kind("classical", shifts_inequality)
    assert classical.beta_c == 1
    assert classical.beta_n is None and classical.beta_q_seesaw is None
    spectral = bounds_by_kind("spectral", shifts_inequality, shifts)
    assert spectral.beta_q_spectral == pytest.approx(1.0, abs=1e-9)
    assert bounds_by_kind("ns", shifts_inequality).beta_n == Fraction(4, 3)


def test_bounds_by_kind_errors(shifts_inequality):
    with pytest.raises(ArgumentError):
        bounds_by_kind("quantum", shifts_inequality)
    with pytest.raises(ArgumentError):
        bounds_by_kind("spectral", shifts_inequality)
    qutrit_path = ProductVectorSet.build(
        [3], [[[1, 0, 0]], [[0, 1, 0]], [[0, 2**-0.5, 2**-0.5]]]
    )
    with pytest.raises(PreconditionError):
        bounds_by_kind("spectral", shifts_inequality, qutrit_path)
