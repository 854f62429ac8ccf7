"""Generators for the Shifts UPB, the GYNI-type qubit family and its recursion."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from app.errors import ArgumentError, PreconditionError
from app.services.inequalities import gyni_flip_patterns
from app.services.linalg import basis_ket, ket
from app.services.product_sets import ProductVectorSet, SubsetAnnotation, same_ray

logger = logging.getLogger(__name__)

KET_0 = basis_ket(2, 0)
KET_1 = basis_ket(2, 1)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
DEFAULT_E = np.array([1, 1], dtype=complex) / np.sqrt(2)


def perp(vec: np.ndarray) -> np.ndarray:
    """The qubit ray orthogonal to ``vec``."""
    return np.array([-np.conj(vec[1]), np.conj(vec[0])], dtype=complex)


@dataclass(frozen=True, eq=False)
class LocalPairChoice:
    """Per-party ray |e_i> defining the second local subset {|e_i>, |e_i^perp>}."""

    rays: tuple[np.ndarray, ...]

    def __post_init__(self):
        for i, e in enumerate(self.rays):
            if e.shape != (2,) or abs(np.linalg.norm(e) - 1) > 1e-12:
                raise PreconditionError(f"party {i}: e must be a normalized qubit ket")
            if same_ray(e, KET_0) or same_ray(e, KET_1):
                raise PreconditionError(f"party {i}: e must differ from |0> and |1>")

    @classmethod
    def uniform(cls, n: int, e: Optional[Sequence] = None) -> "LocalPairChoice":
        vec = DEFAULT_E if e is None else _normalized(e)
        return cls(tuple(vec.copy() for _ in range(n)))

    @classmethod
    def from_angles(cls, angles: Sequence[float]) -> "LocalPairChoice":
        return cls(tuple(np.array([np.cos(t), np.sin(t)], dtype=complex) for t in angles))

    @property
    def n(self) -> int:
        return len(self.rays)

    def e(self, party: int) -> np.ndarray:
        return self.rays[party]

    def e_perp(self, party: int) -> np.ndarray:
        return perp(self.rays[party])

    def v(self, party: int) -> np.ndarray:
        """Unitary with V|0> = |e>, V|1> = |e^perp>."""
        return np.column_stack([self.e(party), self.e_perp(party)])

    def subsets(self, party: int) -> tuple[tuple[np.ndarray, ...], ...]:
        return (KET_0.copy(), KET_1.copy()), (self.e(party), self.e_perp(party))


def _normalized(amplitudes) -> np.ndarray:
    vec = ket(amplitudes)
    if vec.shape != (2,):
        raise ArgumentError("e must have two amplitudes")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ArgumentError("e must be nonzero")
    return vec / norm


def _choice_for(n: int, choice: Optional[LocalPairChoice]) -> LocalPairChoice:
    if choice is None:
        return LocalPairChoice.uniform(n)
    if choice.n != n:
        raise ArgumentError(f"pair choice covers {choice.n} parties, expected {n}")
    return choice


def _annotated(choice: LocalPairChoice, labels) -> ProductVectorSet:
    n = choice.n
    subsets = tuple(choice.subsets(i) for i in range(n))
    members = tuple(tuple(subsets[i][k][a] for i, (k, a) in enumerate(member)) for member in labels)
    annotation = SubsetAnnotation(kets=subsets, labels=tuple(tuple(m) for m in labels))
    return ProductVectorSet((2,) * n, members, annotation)


# ============================================================
# FAMILIES
# ============================================================

def shifts_upb(choice: Optional[LocalPairChoice] = None) -> ProductVectorSet:
    """{|000>, |1 e2 e3>, |e1 1 e3^perp>, |e1^perp e2^perp 1>}."""
    choice = _choice_for(3, choice)
    labels = [
        ((0, 0), (0, 0), (0, 0)),
        ((0, 1), (1, 0), (1, 0)),
        ((1, 0), (0, 1), (1, 1)),
        ((1, 1), (1, 1), (0, 1)),
    ]
    return _annotated(choice, labels)


def gyni_upb(n: int, choice: Optional[LocalPairChoice] = None) -> ProductVectorSet:
    """The 2^(n-1) vectors V_{I} sigma_{I-1} |0...0> (plus the sigma_n companions for even n)."""
    choice = _choice_for(n, choice)
    members = []
    labels = []
    for v_slots, sigma_slots in gyni_flip_patterns(n):
        member = []
        label = []
        for i in range(n):
            vec = KET_0.copy()
            if i + 1 in sigma_slots:
                vec = SIGMA_X @ vec
            if i + 1 in v_slots:
                vec = choice.v(i) @ vec
            member.append(vec)
            label.append((int(i + 1 in v_slots), int(i + 1 in sigma_slots)))
        members.append(tuple(member))
        labels.append(tuple(label))
    subsets = tuple(choice.subsets(i) for i in range(n))
    return ProductVectorSet((2,) * n, tuple(members), SubsetAnnotation(subsets, tuple(labels)))


# ============================================================
# RECURSION n -> n + 1
# ============================================================

def _checked_labels(product_set: ProductVectorSet):
    annotation = product_set.annotation
    if annotation is None:
        raise ArgumentError("recursive_extend needs a set with subset annotation")
    if any(d != 2 for d in product_set.dims):
        raise ArgumentError("recursive_extend works on qubit sets")
    for i, party_subsets in enumerate(annotation.kets):
        if len(party_subsets) != 2 or any(len(s) != 2 for s in party_subsets):
            raise ArgumentError(f"party {i}: expected two 2-element subsets")
    for j, (member, labels) in enumerate(zip(product_set.members, annotation.labels)):
        for i, (vec, (k, a)) in enumerate(zip(member, labels)):
            if k not in (0, 1) or a not in (0, 1) or not same_ray(vec, annotation.kets[i][k][a]):
                raise ArgumentError(f"member {j} party {i}: ket is not in its declared subset")
    return annotation


def recursive_extend(product_set: ProductVectorSet, e: Optional[Sequence] = None) -> ProductVectorSet:
    """Grow an n-qubit family member to n + 1 qubits; the new qubit is prepended.

    U1 is the input set and U2 its transformed copy: last qubit orthogonalized
    for odd n; for even n the penultimate qubit is orthogonalized and the last
    one mapped |0> <-> |e^perp>, |1> <-> |e>. Blocks are assembled as
    |0> U1^(1), |1> U2^(2), |e> U2^(1), |e^perp> U1^(2), where the superscript
    is the subset of the first qubit.
    """
    annotation = _checked_labels(product_set)
    n = product_set.n
    new_pair = LocalPairChoice((_normalized(e),) if e is not None else (DEFAULT_E.copy(),))

    def transformed(labels):
        labels = list(labels)
        if n % 2 == 1:
            k, a = labels[-1]
            labels[-1] = (k, 1 - a)
        else:
            k, a = labels[-2]
            labels[-2] = (k, 1 - a)
            k, a = labels[-1]
            labels[-1] = (1 - k, 1 - a)
        return tuple(labels)

    u1 = list(annotation.labels)
    u2 = [transformed(labels) for labels in u1]
    blocks = [
        ((0, 0), [m for m in u1 if m[0][0] == 0]),
        ((0, 1), [m for m in u2 if m[0][0] == 1]),
        ((1, 0), [m for m in u2 if m[0][0] == 0]),
        ((1, 1), [m for m in u1 if m[0][0] == 1]),
    ]
    labels = [(head,) + tail for head, block in blocks for tail in block]
    subsets = (new_pair.subsets(0),) + tuple(annotation.kets)
    members = tuple(tuple(subsets[i][k][a] for i, (k, a) in enumerate(m)) for m in labels)
    extended = ProductVectorSet((2,) * (n + 1), members, SubsetAnnotation(subsets, tuple(labels)))
    logger.debug("extended %d-qubit set of %d members to %d members", n, len(product_set), len(extended))
    return extended


# ============================================================
# RANDOM (P)-SETS
# ============================================================

def random_pair_choice(n: int, rng: np.random.Generator, low: float = 0.1, high: float = 0.99) -> LocalPairChoice:
    """Random e rays whose overlap with |0> lies in [low, high]."""
    rays = []
    for _ in range(n):
        modulus = rng.uniform(low, high)
        phase = rng.uniform(0, 2 * np.pi)
        rays.append(np.array([modulus, np.sqrt(1 - modulus**2) * np.exp(1j * phase)], dtype=complex))
    return LocalPairChoice(tuple(rays))


def random_property_p_set(n: int, rng: np.random.Generator) -> ProductVectorSet:
    """GYNI-pattern set in two random local qubit bases per party."""
    base = gyni_upb(n, random_pair_choice(n, rng))
    unitaries = [unitary_group.rvs(2, random_state=rng) for _ in range(n)]
    members = tuple(tuple(u @ vec for u, vec in zip(unitaries, member)) for member in base.members)
    kets = tuple(
        tuple(tuple(u @ vec for vec in subset) for subset in party)
        for u, party in zip(unitaries, base.annotation.kets)
    )
    return ProductVectorSet(base.dims, members, SubsetAnnotation(kets, base.annotation.labels))
