"""Classical value by enumeration, Bell operators and quantum bounds."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import unitary_group

from app.config import thread_count
from app.errors import ArgumentError, CapacityError, PreconditionError
from app.services.inequalities import BellInequality, Scenario
from app.services.linalg import hermitian_eigs, max_eigenvalue, projector, tensor_product
from app.services.nonsignalling import ns_bound
from app.services.product_sets import MeasurementPartition

logger = logging.getLogger(__name__)

MAX_STRATEGIES = 10**8
PROJECTOR_TOL = 1e-9
SEESAW_TOL = 1e-12


# ============================================================
# CLASSICAL BOUND
# ============================================================

@dataclass(frozen=True)
class DeterministicStrategy:
    """``maps[i][x]`` is the output party ``i`` gives on input ``x``."""

    maps: tuple[tuple[int, ...], ...]

    def value(self, inequality: BellInequality) -> Fraction:
        return sum(
            (t.q for t in inequality.terms if all(self.maps[i][xi] == ai for i, (xi, ai) in enumerate(zip(t.x, t.a)))),
            Fraction(0),
        )


def classical_bound(inequality: BellInequality) -> tuple[Fraction, DeterministicStrategy]:
    """Exact maximum over deterministic strategies.

    Parties 1..n-1 are enumerated; the last party plays a best response per
    input, which is exact because the objective is separable in its map.
    Ties keep the lexicographically first strategy.
    """
    scenario = inequality.scenario
    count = scenario.strategy_count()
    if count > MAX_STRATEGIES:
        raise CapacityError("deterministic strategies", count, MAX_STRATEGIES)
    n = scenario.n

    def best_response(terms) -> tuple[Fraction, tuple[int, ...]]:
        outputs = scenario.outputs[n - 1]
        gains = [[Fraction(0)] * r for r in outputs]
        for t in terms:
            gains[t.x[n - 1]][t.a[n - 1]] += t.q
        choice = tuple(max(range(len(g)), key=lambda a, g=g: (g[a], -a)) for g in gains)
        return sum((g[a] for g, a in zip(gains, choice)), Fraction(0)), choice

    def search(party: int, terms) -> tuple[Fraction, tuple]:
        if not terms:
            return Fraction(0), tuple((0,) * len(outs) for outs in scenario.outputs[party:])
        if party == n - 1:
            value, choice = best_response(terms)
            return value, (choice,)
        best_value, best_maps = None, None
        for local in product(*(range(r) for r in scenario.outputs[party])):
            alive = [t for t in terms if local[t.x[party]] == t.a[party]]
            value, rest = search(party + 1, alive)
            if best_value is None or value > best_value:
                best_value, best_maps = value, (local,) + rest
        return best_value, best_maps

    value, maps = search(0, list(inequality.terms))
    return value, DeterministicStrategy(tuple(tuple(m) for m in maps))


# ============================================================
# BELL OPERATOR
# ============================================================

def _check_measurements(scenario: Scenario, projectors) -> list[int]:
    if len(projectors) != scenario.n:
        raise ArgumentError(f"expected projectors for {scenario.n} parties, got {len(projectors)}")
    dims = []
    for i, party in enumerate(projectors):
        if len(party) != scenario.inputs[i]:
            raise ArgumentError(f"party {i}: expected {scenario.inputs[i]} inputs, got {len(party)}")
        dim = None
        for x, outcomes in enumerate(party):
            if len(outcomes) != scenario.outputs[i][x]:
                raise ArgumentError(f"party {i} input {x}: expected {scenario.outputs[i][x]} projectors")
            for a, proj in enumerate(outcomes):
                proj = np.asarray(proj)
                dim = proj.shape[0] if dim is None else dim
                if proj.shape != (dim, dim):
                    raise ArgumentError(f"party {i}: projectors must share one local dimension")
                if np.max(np.abs(proj @ proj - proj)) > PROJECTOR_TOL or np.max(np.abs(proj - proj.conj().T)) > PROJECTOR_TOL:
                    raise PreconditionError(f"party {i} input {x} output {a}: not an orthogonal projector")
                for b in range(a):
                    if np.max(np.abs(np.asarray(outcomes[b]) @ proj)) > PROJECTOR_TOL:
                        raise PreconditionError(f"party {i} input {x}: outputs {b} and {a} overlap")
        dims.append(dim)
    return dims


def bell_operator(inequality: BellInequality, projectors) -> np.ndarray:
    """B = sum_j q_j (x)_i P^(i)[x_i][a_i]."""
    _check_measurements(inequality.scenario, projectors)
    total = None
    for t in inequality.terms:
        term = float(t.q) * tensor_product(
            [np.asarray(projectors[i][xi][ai], dtype=complex) for i, (xi, ai) in enumerate(zip(t.x, t.a))]
        )
        total = term if total is None else total + term
    return total


def projectors_from_partition(partition: MeasurementPartition) -> list[list[list[np.ndarray]]]:
    """Rank-1 projectors onto the set's own local rays, per party, input and output."""
    return [
        [[projector(vec) for vec in subset] for subset in partition.subset_kets(party)]
        for party in range(len(partition.subsets))
    ]


def projectors_from_dictionaries(dictionaries) -> list[list[list[np.ndarray]]]:
    return [[[projector(np.asarray(v, dtype=complex)) for v in outs] for outs in party] for party in dictionaries]


def random_projective_assignment(
    scenario: Scenario, local_dims: Sequence[int], rng: np.random.Generator, complete: bool = False
) -> list[list[list[np.ndarray]]]:
    """Random projective measurements with random (possibly degenerate) ranks.

    Every output gets rank >= 1, so ``local_dims[i]`` must be at least the
    largest output count at party ``i``. With ``complete`` the ranks add up
    to the local dimension.
    """
    assignment = []
    for i, outputs in enumerate(scenario.outputs):
        dim = int(local_dims[i])
        if dim < max(outputs):
            raise ArgumentError(f"party {i}: dimension {dim} is below {max(outputs)} outputs")
        party = []
        for r in outputs:
            basis = unitary_group.rvs(dim, random_state=rng) if dim > 1 else np.ones((1, 1), dtype=complex)
            used = dim if complete else int(rng.integers(r, dim + 1))
            cuts = np.sort(rng.choice(np.arange(1, used), size=r - 1, replace=False)) if r > 1 else np.array([], dtype=int)
            bounds = [0, *cuts.tolist(), used]
            party.append([basis[:, lo:hi] @ basis[:, lo:hi].conj().T for lo, hi in zip(bounds, bounds[1:])])
        assignment.append(party)
    return assignment


def quantum_spectral_bound(inequality: BellInequality, projectors) -> float:
    return max_eigenvalue(bell_operator(inequality, projectors))


# ============================================================
# SEE-SAW
# ============================================================

def _local_operators(inequality: BellInequality, projectors, dims, state, party):
    """G[x][a] with <state|B|state> = sum_{x,a} Tr(P[party][x][a] G[x][a])."""
    scenario = inequality.scenario
    dim = dims[party]
    before = int(np.prod(dims[:party]))
    after = int(np.prod(dims[party + 1:]))
    reduced = [[np.zeros((dim, dim), dtype=complex) for _ in range(r)] for r in scenario.outputs[party]]
    for t in inequality.terms:
        factors = [
            np.eye(dim, dtype=complex) if i == party else projectors[i][xi][ai]
            for i, (xi, ai) in enumerate(zip(t.x, t.a))
        ]
        vec = (tensor_product(factors) @ state).reshape(before, dim, after)
        reduced[t.x[party]][t.a[party]] += float(t.q) * np.einsum("aib,ajb->ij", vec, vec.conj())
    return reduced


def _best_measurement(operators: list[np.ndarray], current: list[np.ndarray]) -> list[np.ndarray]:
    """Projective measurement maximizing sum_a Tr(P_a G_a) by eigenvector assignment.

    Candidate bases are the eigenbases of each G_a and of the current
    measurement; every basis vector goes to the output with the largest
    <v|G_a|v>, lowest output on ties. The best candidate wins, so the value
    never decreases.
    """
    dim = operators[0].shape[0]
    if len(operators) == 2:
        candidates = [hermitian_eigs(operators[0] - operators[1])[1]]
    else:
        candidates = [hermitian_eigs(g)[1] for g in operators]
    current_basis = hermitian_eigs(sum(k * p for k, p in enumerate(current, start=1)))[1]
    candidates.append(current_basis)
    best, best_value = None, None
    for basis in candidates:
        scores = np.array([[np.vdot(basis[:, c], g @ basis[:, c]).real for g in operators] for c in range(dim)])
        choice = np.argmax(scores, axis=1)
        value = float(scores[np.arange(dim), choice].sum())
        if best_value is None or value > best_value + 1e-15:
            best_value = value
            best = [np.zeros((dim, dim), dtype=complex) for _ in operators]
            for c, a in enumerate(choice):
                best[a] += projector(basis[:, c])
    return best


def _seesaw_run(inequality: BellInequality, dims, max_iters: int, seed_seq: np.random.SeedSequence) -> float:
    rng = np.random.default_rng(seed_seq)
    scenario = inequality.scenario
    measurements = random_projective_assignment(scenario, dims, rng, complete=True)
    values, vectors = hermitian_eigs(bell_operator(inequality, measurements))
    value = float(values[0])
    for _ in range(max_iters):
        state = vectors[:, 0]
        for party in range(scenario.n):
            reduced = _local_operators(inequality, measurements, dims, state, party)
            for x, operators in enumerate(reduced):
                measurements[party][x] = _best_measurement(operators, measurements[party][x])
        values, vectors = hermitian_eigs(bell_operator(inequality, measurements))
        improvement = float(values[0]) - value
        value = max(value, float(values[0]))
        if improvement <= SEESAW_TOL:
            break
    return value


def seesaw_quantum_bound(
    inequality: BellInequality,
    local_dims: Optional[Sequence[int]] = None,
    restarts: int = 8,
    max_iters: int = 500,
    seed: int = 0,
) -> float:
    """Heuristic lower bound on the quantum value by alternating ascent.

    Each restart fixes all measurements but one party's, re-optimizes that
    party against the reduced operators of the current top eigenvector of
    B, and repeats until the value stops improving.
    """
    scenario = inequality.scenario
    dims = list(local_dims) if local_dims is not None else [max(outs) for outs in scenario.outputs]
    if len(dims) != scenario.n or any(d < 1 for d in dims):
        raise ArgumentError(f"invalid local dimensions {dims}")
    for i, outs in enumerate(scenario.outputs):
        if dims[i] < max(outs):
            raise ArgumentError(f"party {i}: dimension {dims[i]} is below {max(outs)} outputs")
    if restarts < 1:
        raise ArgumentError("restarts must be >= 1")
    children = np.random.SeedSequence(seed).spawn(restarts)
    values = Parallel(n_jobs=thread_count(), prefer="threads")(
        delayed(_seesaw_run)(inequality, dims, max_iters, child) for child in children
    )
    best = int(np.argmax(values))
    logger.info("see-saw best %.12f from restart %d of %d", values[best], best, restarts)
    return float(values[best])


# ============================================================
# REPORT
# ============================================================

@dataclass(frozen=True)
class BoundsReport:
    beta_c: Fraction
    strategy: DeterministicStrategy
    beta_q_spectral: Optional[float]
    beta_q_seesaw: Optional[float]
    beta_n: Optional[Fraction]
    ns_method: Optional[str] = None
    ns_behavior: Optional[list] = None
    seed: int = 0
    restarts: int = 0

    @property
    def nontrivial(self) -> Optional[bool]:
        """beta_N > beta_C: the inequality is not a no-signalling constraint."""
        return None if self.beta_n is None else self.beta_n > self.beta_c

    @property
    def quantum_violation(self) -> Optional[bool]:
        return None if self.beta_q_spectral is None else self.beta_q_spectral > float(self.beta_c) + 1e-9


def bounds_report(
    inequality: BellInequality,
    projectors=None,
    local_dims: Optional[Sequence[int]] = None,
    seed: int = 0,
    restarts: int = 8,
    include_seesaw: bool = True,
    include_ns: bool = True,
) -> BoundsReport:
    """All bounds of one inequality; the spectral value needs explicit projectors."""
    beta_c, strategy = classical_bound(inequality)
    spectral = quantum_spectral_bound(inequality, projectors) if projectors is not None else None
    seesaw = (
        seesaw_quantum_bound(inequality, local_dims, restarts=restarts, seed=seed) if include_seesaw else None
    )
    beta_n = method = behavior = None
    if include_ns:
        result = ns_bound(inequality)
        beta_n, method, behavior = result.value, result.method, result.table(inequality.scenario)
    report = BoundsReport(
        beta_c=beta_c,
        strategy=strategy,
        beta_q_spectral=spectral,
        beta_q_seesaw=seesaw,
        beta_n=beta_n,
        ns_method=method,
        ns_behavior=behavior,
        seed=seed,
        restarts=restarts,
    )
    if spectral is not None and float(beta_c) > spectral + 1e-9:
        logger.warning("classical value %s exceeds the spectral value %.12g", beta_c, spectral)
    if seesaw is not None and spectral is not None and seesaw > spectral + 1e-6:
        logger.warning("see-saw value %.12g exceeds the spectral value %.12g", seesaw, spectral)
    if beta_n is not None and beta_c > beta_n:
        logger.warning("classical value %s exceeds the nonsignalling value %s", beta_c, beta_n)
    return report
