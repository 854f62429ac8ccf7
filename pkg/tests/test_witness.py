import numpy as np
import pytest

from app.errors import PreconditionError
from app.services.families import gyni_upb
from app.services.linalg import basis_ket, projector
from app.services.product_sets import ProductVectorSet, span_projector
from app.services.upb_check import completability_search
from app.services.witness import (
    HEURISTIC_STATUS,
    bipartitions,
    fact4_chain,
    product_epsilon,
    sample_normalized_witness,
    upb_witness,
    witness_from_projector,
    witness_value_check,
)

from tests.conftest import computational_set

PLUS = np.array([1, 1]) / np.sqrt(2)


def test_epsilon_of_identity():
    assert product_epsilon(np.eye(8), [2, 2, 2], restarts=4).value == pytest.approx(1.0, abs=1e-12)


def test_epsilon_of_product_projector():
    result = product_epsilon(projector(basis_ket(4, 0)), [2, 2], restarts=4)
    assert 0 <= result.value <= 1e-12
    assert result.status == HEURISTIC_STATUS


def test_epsilon_rejects_non_psd():
    with pytest.raises(PreconditionError):
        product_epsilon(np.diag([1.0, -1.0]), [2])


def test_shifts_epsilon(shifts):
    pi = span_projector(shifts)
    epsilon = product_epsilon(pi, shifts.dims, seed=2).value
    assert 0 < epsilon < 0.5

    # real product states on a coarse grid can only do worse
    angles = np.linspace(0, np.pi, 40, endpoint=False)
    qubits = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    states = np.einsum("ai,bj,ck->abcijk", qubits, qubits, qubits).reshape(-1, 8)
    grid = np.einsum("sx,xy,sy->s", states, pi.real, states)
    assert epsilon <= grid.min() + 1e-9


SHIFTS_EPSILON = 0.0814413


def test_shifts_epsilon_value(shifts):
    pi = span_projector(shifts)
    epsilon = product_epsilon(pi, shifts.dims, restarts=256, seed=0).value
    assert epsilon == pytest.approx(SHIFTS_EPSILON, abs=1e-5)

    angles = np.arange(200) * np.pi / 200
    qubits = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    pairs = np.einsum("bj,ck->bcjk", qubits, qubits).reshape(-1, 4)
    blocks = pi.real.reshape(2, 4, 2, 4)
    grid_min = min(
        np.einsum("sx,xy,sy->s", pairs, np.einsum("i,ixjy,j->xy", first, blocks, first), pairs).min()
        for first in qubits
    )
    assert abs(epsilon - grid_min) <= 1e-4
    assert epsilon <= grid_min + 1e-9


def test_epsilon_is_reproducible(shifts):
    pi = span_projector(shifts)
    first = product_epsilon(pi, shifts.dims, restarts=6, seed=9)
    second = product_epsilon(pi, shifts.dims, restarts=6, seed=9)
    assert first.value == second.value


def test_bipartitions():
    assert bipartitions(3) == [(0,), (1,), (2,)]
    assert len(bipartitions(4)) == 7
    assert len(bipartitions(5)) == 15


def test_shifts_witness(shifts):
    epsilon = product_epsilon(span_projector(shifts), shifts.dims, seed=2).value
    report = upb_witness(shifts, epsilon)
    assert report.trace_BW > 1 + 1e-6
    assert report.trace_BW == pytest.approx(report.formula_value, abs=1e-8)
    assert report.formula_value == pytest.approx(4 * (1 - epsilon) / (4 - 8 * epsilon), abs=1e-12)
    assert report.trace_W_rho == pytest.approx(-epsilon / (4 - 8 * epsilon), abs=1e-10)
    assert report.trace_W_rho < -1e-6
    assert np.trace(report.state).real == pytest.approx(1.0, abs=1e-12)
    assert np.trace(report.witness).real == pytest.approx(1.0, abs=1e-12)
    assert len(report.ppt_flags) == 3
    assert all(report.ppt_flags.values())
    assert all(v >= -1e-10 for v in report.min_pt_eigenvalues.values())


def test_witness_with_zero_epsilon(shifts):
    assert upb_witness(shifts, 0.0).trace_BW == pytest.approx(1.0, abs=1e-12)


def test_witness_of_gyni_four():
    product_set = gyni_upb(4)
    epsilon = product_epsilon(span_projector(product_set), product_set.dims, restarts=8, seed=1).value
    report = upb_witness(product_set, epsilon)
    assert report.trace_BW > 1
    assert len(report.ppt_flags) == 7
    assert all(report.ppt_flags.values())


def test_witness_preconditions(shifts):
    with pytest.raises(PreconditionError):
        upb_witness(shifts, 0.5)
    with pytest.raises(PreconditionError):
        upb_witness(computational_set("00", "01", "10", "11"), 0.0)


def test_witness_value_check():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(4, 4))
    b = m + m.T
    assert witness_value_check(b, np.eye(4) / 4) == pytest.approx(np.trace(b) / 4)
    with pytest.raises(PreconditionError):
        witness_value_check(b, np.eye(4))


def test_witness_from_full_projector():
    assert np.allclose(witness_from_projector(np.eye(4), [2, 2]), np.eye(4) / 4)


def test_witness_from_projector_matches_upb_witness(shifts):
    pi = span_projector(shifts)
    epsilon = product_epsilon(pi, shifts.dims, restarts=8, seed=4).value
    expected = upb_witness(shifts, epsilon).witness
    assert np.allclose(witness_from_projector(pi, shifts.dims, restarts=8, seed=4), expected)


def random_product_states(rng, parties, count):
    kets = rng.normal(size=(parties, count, 2)) + 1j * rng.normal(size=(parties, count, 2))
    kets /= np.linalg.norm(kets, axis=2, keepdims=True)
    states = kets[0]
    for factor in kets[1:]:
        states = np.einsum("si,sj->sij", states, factor).reshape(count, -1)
    return states


def test_sampled_witnesses_are_block_positive(rng):
    states = random_product_states(rng, 3, 10**4)
    for seed in range(50):
        witness = sample_normalized_witness([2, 2, 2], seed=seed, restarts=32)
        assert np.trace(witness).real == pytest.approx(1.0, abs=1e-10)
        values = np.einsum("sx,xy,sy->s", states.conj(), witness, states).real
        assert values.min() >= -1e-6


COMPLETABLE_SETS = [
    computational_set("00", "01", "10", "11"),
    computational_set("00", "01"),
    computational_set("000", "011"),
    ProductVectorSet.build([2, 2], [[basis_ket(2, 0), basis_ket(2, 0)], [basis_ket(2, 1), PLUS]]),
]


@pytest.mark.parametrize("product_set", COMPLETABLE_SETS)
def test_completable_sets_never_beat_the_classical_bound(product_set):
    search = completability_search(product_set)
    assert search.status == "completed"
    rng = np.random.default_rng(len(product_set))
    for seed in range(25):
        weights = rng.uniform(0.1, 2.0, size=len(product_set))
        witness = sample_normalized_witness(product_set.dims, seed=seed, restarts=8)
        chain = fact4_chain(product_set, search.completion, weights, witness)
        assert chain.trace_BW <= chain.max_weight_trace_PiW + 1e-9
        assert chain.max_weight_trace_PiW == pytest.approx(chain.max_weight_complement, abs=1e-9)
        assert all(v >= -1e-9 for v in chain.completion_expectations)
        assert chain.trace_BW <= max(weights) + 1e-9


def test_fact4_chain_needs_full_span():
    product_set = computational_set("00", "01")
    with pytest.raises(PreconditionError):
        fact4_chain(product_set, computational_set("10"), [1, 1], np.eye(4) / 4)
