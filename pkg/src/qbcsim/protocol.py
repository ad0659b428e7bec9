"""Three-qudit bit-commitment scheme built on absolutely maximally
entangled states.

The verifier prepares a five-qudit resource: an ancilla entangled with a
uniform family of maximally entangled branches shared between a 3-qudit
committer register and a single verifier qudit. The committer commits a bit
by measuring the ancilla either in the computational basis (bit 1) or in
its Fourier conjugate (bit 0), each relabeled by a secret permutation, and
publicly announces the outcome. Opening reveals the bit and the permutation;
the verifier projects the shared state onto the unique post-measurement
state consistent with the announcement.

Register layout: the shared state after commitment lives on four factors
(committer qudits 0..2, verifier qudit 3); the pre-measurement resource has
the ancilla prepended as factor 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qudits import (
    STRUCTURAL_TOL,
    Bipartition,
    RegisterShape,
    SchmidtData,
    StateVector,
    basis_vector,
    check_permutation,
)

__all__ = [
    "ProtocolParams",
    "CommitmentRecord",
    "ALICE_FACTORS",
    "BOB_FACTOR",
    "resource_branch",
    "resource_state",
    "commit",
    "post_commit_state",
    "post_commit_schmidt",
    "open_verify",
    "open_sample",
    "alice_cuts",
]

ALICE_FACTORS = (0, 1, 2)
BOB_FACTOR = 3


@dataclass(frozen=True)
class ProtocolParams:
    """Protocol configuration: the local qudit dimension."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"qudit dimension must be >= 2, got {self.d}")

    @property
    def shared_shape(self) -> RegisterShape:
        return RegisterShape((self.d,) * 4)

    @property
    def full_shape(self) -> RegisterShape:
        return RegisterShape((self.d,) * 5)

    @property
    def alice_shape(self) -> RegisterShape:
        return RegisterShape((self.d,) * 3)


def _phase(d: int, exponent: int) -> complex:
    return np.exp(2j * np.pi * (exponent % d) / d)


def resource_branch(l: int, d: int) -> StateVector:
    """Maximally entangled branch with phase/shift label l.

    Amplitude omega^(j*l)/sqrt(d) on |jjj> for the committer times |j+l mod d>
    for the verifier.
    """
    if not 0 <= l < d:
        raise ValueError(f"branch label {l} out of range for dimension {d}")
    amps = np.zeros((d, d, d, d), dtype=complex)
    for j in range(d):
        amps[j, j, j, (j + l) % d] = _phase(d, j * l)
    return StateVector(RegisterShape((d,) * 4), amps.reshape(-1) / np.sqrt(d))


def resource_state(d: int) -> StateVector:
    """Initial five-qudit resource: ancilla uniformly entangled with the branches."""
    if d < 2:
        raise ValueError(f"qudit dimension must be >= 2, got {d}")
    amps = np.zeros((d,) * 5, dtype=complex)
    for l in range(d):
        for j in range(d):
            amps[l, j, j, j, (j + l) % d] = _phase(d, j * l) / d
    return StateVector(RegisterShape((d,) * 5), amps.reshape(-1))


def post_commit_state(params: ProtocolParams, bit: int, perm: Sequence[int],
                      outcome: int) -> StateVector:
    """Shared state after committing ``bit`` with announced ``outcome``.

    Bit 1 leaves the branch labeled perm[outcome]; bit 0 leaves the uniform
    phase-weighted superposition of all branches with phases
    omega^(perm[outcome]*l).
    """
    d = params.d
    perm = check_permutation(perm, d)
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    if not 0 <= outcome < d:
        raise ValueError(f"outcome {outcome} out of range for dimension {d}")
    p = perm[outcome]
    if bit == 1:
        return resource_branch(p, d)
    amps = np.zeros(d**4, dtype=complex)
    for l in range(d):
        amps += _phase(d, p * l) * resource_branch(l, d).amplitudes
    return StateVector(params.shared_shape, amps / np.sqrt(d))


@dataclass(frozen=True, eq=False)
class CommitmentRecord:
    """Outcome of an honest commit: bit, permutation, announced outcome, state."""

    bit: int
    permutation: tuple[int, ...]
    outcome: int
    shared_state: StateVector

    def __post_init__(self):
        d = len(self.permutation)
        perm = check_permutation(self.permutation, d)
        object.__setattr__(self, "permutation", perm)
        if self.bit not in (0, 1):
            raise ValueError(f"bit must be 0 or 1, got {self.bit}")
        if not 0 <= self.outcome < d:
            raise ValueError(f"outcome {self.outcome} out of range for dimension {d}")
        expected = post_commit_state(ProtocolParams(d), self.bit, perm, self.outcome)
        dev = float(np.max(np.abs(self.shared_state.amplitudes - expected.amplitudes)))
        if dev > STRUCTURAL_TOL:
            raise ValueError(
                f"shared state deviates from the post-commitment state by {dev}"
            )

    @property
    def d(self) -> int:
        return len(self.permutation)


def commit(params: ProtocolParams, bit: int, perm: Sequence[int],
           rng: np.random.Generator) -> CommitmentRecord:
    """Run the honest commit phase.

    Measures the ancilla of the resource state in the basis selected by
    ``bit`` and ``perm``; the outcome is sampled from the Born probabilities
    and the ancilla is discarded afterwards (its content is classical).
    """
    d = params.d
    perm = check_permutation(perm, d)
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    blocks = resource_state(d).amplitudes.reshape(d, d**4)
    kind = "X" if bit == 0 else "Z"
    branches = [basis_vector(kind, m, d, perm).amplitudes.conj() @ blocks
                for m in range(d)]
    probs = np.array([float(np.vdot(b, b).real) for b in branches])
    probs = probs / probs.sum()
    outcome = int(rng.choice(d, p=probs))
    picked = branches[outcome] / np.linalg.norm(branches[outcome])
    state = StateVector(params.shared_shape, picked)
    return CommitmentRecord(bit, perm, outcome, state)


def post_commit_schmidt(params: ProtocolParams, bit: int, perm: Sequence[int],
                        outcome: int) -> SchmidtData:
    """Schmidt data of the post-commitment state across the committer|verifier cut.

    Labels follow the verifier's computational basis: the state expands as
    (1/sqrt(d)) sum_j |left_j>|j> where each left vector lives on the three
    committer qudits. For bit 1 the left vectors are phase-tagged product
    states |rrr>; for bit 0 they are uniform phase superpositions over all
    |rrr>, absolutely maximally entangled across every committer cut.
    """
    d = params.d
    perm = check_permutation(perm, d)
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    if not 0 <= outcome < d:
        raise ValueError(f"outcome {outcome} out of range for dimension {d}")
    p = perm[outcome]
    alice_shape = params.alice_shape
    lefts = []
    for j in range(d):
        vec = np.zeros((d, d, d), dtype=complex)
        if bit == 1:
            r = (j - p) % d
            vec[r, r, r] = _phase(d, r * p)
        else:
            for l in range(d):
                r = (j - l) % d
                vec[r, r, r] += _phase(d, p * l + r * l) / np.sqrt(d)
        lefts.append(StateVector(alice_shape, vec.reshape(-1)))
    rights = tuple(basis_vector("Z", j, d) for j in range(d))
    return SchmidtData(np.full(d, 1.0 / d), tuple(lefts), rights)


def open_verify(record: CommitmentRecord, claimed_bit: int,
                claimed_perm: Sequence[int], state) -> float:
    """Probability that the verifier accepts an opening of ``state``.

    The verifier projects onto the post-commitment state determined by the
    claimed bit, claimed permutation and the outcome announced at commit
    time.
    """
    d = record.d
    expected = post_commit_state(ProtocolParams(d), claimed_bit,
                                 claimed_perm, record.outcome)
    if state.shape != expected.shape:
        raise ValueError("opened state lives on the wrong register")
    e = expected.amplitudes
    value = float(np.real(e.conj() @ state.entries @ e))
    return float(np.clip(value, 0.0, 1.0))


def open_sample(record: CommitmentRecord, claimed_bit: int,
                claimed_perm: Sequence[int], state,
                rng: np.random.Generator) -> bool:
    """Sampled accept/reject for end-to-end runs."""
    return bool(rng.random() < open_verify(record, claimed_bit, claimed_perm, state))


def alice_cuts(params: ProtocolParams) -> tuple[Bipartition, ...]:
    """The three bipartitions of the committer register (one qudit vs two)."""
    shape = params.alice_shape
    return tuple(Bipartition.of(shape, {i}) for i in range(3))
