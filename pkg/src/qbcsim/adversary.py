"""Commitment-switching attacks and their analytic bounds.

Quantifies the probability that a committer who honestly committed to one
bit opens the other one. The probability of a switch under a channel with
Kraus operators {K_j} is

    sum_j | sum_i w_i <target_i| K_j |source_i> |^2

where w are the Schmidt weights of the shared states and the source/target
families are the committer-side Schmidt vectors of the committed and the
claimed state. An unrestricted committer rotates one family onto the other
and always succeeds; a committer limited to separable channels across a cut
with smaller side N2 is capped by max-weight^2 * N2 (entangled to product)
and 1/N2 (product to entangled).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .channels import (
    KrausChannel,
    SeparableChannel,
    cut_index_map,
    lift,
)
from .qudits import (
    STRUCTURAL_TOL,
    Bipartition,
    RegisterShape,
    haar_isometry,
    haar_unitary,
)
from .protocol import ProtocolParams, alice_cuts, post_commit_schmidt

__all__ = [
    "Direction",
    "AttackInstance",
    "AttackResult",
    "OptimizerConfig",
    "switch_probability",
    "switch_bounds",
    "analytic_bounds",
    "separable_cheat_bound",
    "unrestricted_attack",
    "optimize_separable_attack",
    "random_instance",
    "protocol_instance",
]

Direction = Literal["0to1", "1to0"]
BOUND_SLACK = 1e-6


def _orthonormal(matrix: np.ndarray) -> bool:
    gram = matrix.conj() @ matrix.T
    return float(np.max(np.abs(gram - np.eye(matrix.shape[0])))) <= STRUCTURAL_TOL


@dataclass(frozen=True, eq=False)
class AttackInstance:
    """Shared-state data seen from the committer's side.

    ``entangled_family`` rows are the committer-side vectors of the
    commitment whose members are maximally entangled across the cut;
    ``product_family`` rows belong to the product-structured commitment.
    Both are indexed against the same verifier basis and weighted by
    ``coefficients``. ``direction`` states which commitment is switched:
    "0to1" turns the entangled one into the product one, "1to0" the reverse.
    """

    coefficients: np.ndarray
    entangled_family: np.ndarray
    product_family: np.ndarray
    cut: Bipartition
    direction: Direction

    def __post_init__(self):
        w = np.asarray(self.coefficients, dtype=float).copy()
        ent = np.asarray(self.entangled_family, dtype=complex).copy()
        prod = np.asarray(self.product_family, dtype=complex).copy()
        object.__setattr__(self, "coefficients", w)
        object.__setattr__(self, "entangled_family", ent)
        object.__setattr__(self, "product_family", prod)
        if self.direction not in ("0to1", "1to0"):
            raise ValueError(f"direction must be '0to1' or '1to0', got {self.direction!r}")
        dim = self.cut.shape.total_dim
        if ent.ndim != 2 or prod.ndim != 2 or ent.shape != prod.shape or ent.shape[1] != dim:
            raise ValueError("families must be equal (terms, register dim) stacks")
        if w.shape != (ent.shape[0],):
            raise ValueError("one weight per Schmidt term required")
        if np.any(w < -STRUCTURAL_TOL):
            raise ValueError("negative Schmidt weight")
        if abs(float(w.sum()) - 1.0) > STRUCTURAL_TOL:
            raise ValueError(f"weights sum to {w.sum()}, expected 1")
        for name, fam in (("entangled", ent), ("product", prod)):
            if not _orthonormal(fam):
                raise ValueError(f"{name} family is not orthonormal")

    @property
    def num_terms(self) -> int:
        return self.coefficients.size

    @property
    def max_coefficient(self) -> float:
        return float(np.max(self.coefficients))

    def source_target(self) -> tuple[np.ndarray, np.ndarray]:
        if self.direction == "0to1":
            return self.entangled_family, self.product_family
        return self.product_family, self.entangled_family

    def reversed(self) -> "AttackInstance":
        other: Direction = "1to0" if self.direction == "0to1" else "0to1"
        return replace(self, direction=other)


def switch_probability(instance: AttackInstance,
                       channel: KrausChannel | SeparableChannel) -> float:
    """Probability that the switched commitment passes verification.

    Accepts a dense channel on the committer register or a separable channel
    on the instance's register (lifted internally).
    """
    if isinstance(channel, SeparableChannel):
        channel = lift(channel)
    if channel.in_shape != instance.cut.shape or channel.out_shape != instance.cut.shape:
        raise ValueError("channel must act on the committer register of the instance")
    source, target = instance.source_target()
    w = instance.coefficients
    total = 0.0
    for k in channel.kraus_ops:
        amp = complex(np.einsum("i,in,nm,im->", w, target.conj(), k, source))
        total += abs(amp) ** 2
    return float(total)


def switch_bounds(max_coefficient: float, small_dim: int) -> tuple[float, float]:
    """Raw analytic caps (entangled-to-product, product-to-entangled).

    The first value can exceed 1; callers clamp for pass/fail comparisons.
    """
    if small_dim < 1:
        raise ValueError("small side dimension must be >= 1")
    return max_coefficient**2 * small_dim, 1.0 / small_dim


def analytic_bounds(instance: AttackInstance) -> tuple[float, float]:
    return switch_bounds(instance.max_coefficient, instance.cut.dims[1])


def bound_for(instance: AttackInstance) -> float:
    """Cap matching the instance's switch direction."""
    ent_to_prod, prod_to_ent = analytic_bounds(instance)
    return ent_to_prod if instance.direction == "0to1" else prod_to_ent


def separable_cheat_bound(n: int, d: int) -> float:
    """Best switching probability of a separable committer on n qudits.

    The committer picks the cut size (a power of d up to the balanced
    split); the verifier then flattens the Schmidt spectrum on that cut, so
    each cut size is scored by the larger of the two switch caps at the
    verifier's optimum. The maximum lands on the single-qudit cut: 1/d.
    Scores are evaluated in exact rational arithmetic so the result is the
    float closest to the true value.
    """
    if n < 2:
        raise ValueError("committer register needs at least 2 qudits")
    if d < 2:
        raise ValueError(f"qudit dimension must be >= 2, got {d}")
    best = Fraction(0)
    for k in range(1, n // 2 + 1):
        small = d**k
        flattest = Fraction(1, small)
        best = max(best, max(Fraction(1, small), flattest**2 * small))
    return float(best)


def unrestricted_attack(instance: AttackInstance) -> tuple[np.ndarray, float]:
    """Unitary rotating the source family onto the target family.

    Completes both families to full orthonormal bases and maps one onto the
    other; the resulting single-Kraus channel switches the commitment with
    certainty. This is the attack a committer without operational
    restrictions always has.
    """
    source, target = instance.source_target()
    basis_s = _complete_basis(source)
    basis_t = _complete_basis(target)
    unitary = basis_t.T @ basis_s.conj()
    channel = KrausChannel.square(instance.cut.shape, (unitary,))
    return unitary, switch_probability(instance, channel)


def _complete_basis(family: np.ndarray) -> np.ndarray:
    """Rows of ``family`` extended to a full orthonormal basis."""
    if not _orthonormal(family):
        raise ValueError("family is not orthonormal")
    terms, dim = family.shape
    if terms == dim:
        return family
    # Left singular vectors beyond the family rank span the complement.
    u, _, _ = np.linalg.svd(family.T, full_matrices=True)
    return np.vstack([family, u[:, terms:].T])


# ---------------------------------------------------------------------------
# instance generators


def protocol_instance(params: ProtocolParams, perm: Sequence[int], outcome: int,
                      cut: Bipartition, direction: Direction) -> AttackInstance:
    """Attack data for a post-commitment pair of the three-qudit protocol."""
    ent = post_commit_schmidt(params, 0, perm, outcome)
    prod = post_commit_schmidt(params, 1, perm, outcome)
    return AttackInstance(
        coefficients=ent.coefficients,
        entangled_family=np.stack([v.amplitudes for v in ent.left_vectors]),
        product_family=np.stack([v.amplitudes for v in prod.left_vectors]),
        cut=cut,
        direction=direction,
    )


def protocol_cuts(params: ProtocolParams) -> tuple[Bipartition, ...]:
    return alice_cuts(params)


def random_instance(num_terms: int, cut: Bipartition, rng: np.random.Generator,
                    direction: Direction = "1to0") -> AttackInstance:
    """Random instance with the exact structure the analytic caps assume.

    The entangled family applies local Haar unitaries to shifted/phased
    copies of an embedded maximally entangled pair state, the product family
    tensors columns of two Haar bases, and the weights are uniform on the
    simplex.
    """
    n1, n2 = cut.dims
    if not 1 <= num_terms <= n2:
        raise ValueError(
            f"term count must lie in 1..{n2} for an orthonormal product family"
        )
    labels = rng.choice(n2 * n2, size=num_terms, replace=False)
    base = np.zeros((n1, n2), dtype=complex)
    base[:n2, :] = np.eye(n2) / np.sqrt(n2)
    u_big = haar_unitary(n1, rng)
    u_small = haar_unitary(n2, rng)
    omega = np.exp(2j * np.pi / n2)
    cut_of_nat = cut_index_map(cut)
    nat_of_cut = np.argsort(cut_of_nat)
    entangled = []
    for label in labels:
        p, q = divmod(int(label), n2)
        weyl = np.diag(omega ** (p * np.arange(n2))) @ np.roll(np.eye(n2), q, axis=0)
        vec = (u_big @ base @ (u_small @ weyl).T).reshape(-1)
        entangled.append(vec[nat_of_cut])
    left = haar_unitary(n1, rng)[:, :num_terms]
    right = haar_unitary(n2, rng)[:, :num_terms]
    product = []
    for i in range(num_terms):
        vec = np.kron(left[:, i], right[:, i])
        product.append(vec[nat_of_cut])
    weights = np.sort(rng.dirichlet(np.ones(num_terms)))[::-1]
    return AttackInstance(
        coefficients=weights,
        entangled_family=np.stack(entangled),
        product_family=np.stack(product),
        cut=cut,
        direction=direction,
    )


# ---------------------------------------------------------------------------
# separable-attack optimizer


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs of the multi-restart local search over separable channels."""

    restarts: int = 32
    iterations: int = 2000
    kraus_rank: int = 4
    step_size: float = 0.3
    step_decay: float = 0.95
    decay_interval: int = 50

    def __post_init__(self):
        if self.restarts < 1 or self.iterations < 0 or self.kraus_rank < 1:
            raise ValueError("restarts >= 1, iterations >= 0, kraus_rank >= 1 required")


@dataclass(frozen=True, eq=False)
class AttackResult:
    """Best separable attack found, with its cap and search trace."""

    achieved_p: float
    bound: float
    channel: SeparableChannel
    trace: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.achieved_p > self.bound + BOUND_SLACK:
            raise ValueError(
                f"achieved probability {self.achieved_p} exceeds the cap {self.bound}"
            )


class _CutEvaluator:
    """Batched switch-probability evaluation for factorized Kraus stacks."""

    def __init__(self, instance: AttackInstance, cut: Bipartition):
        n1, n2 = cut.dims
        source, target = instance.source_target()
        cut_of_nat = cut_index_map(cut)
        nat_of_cut = np.argsort(cut_of_nat)
        self.source = source[:, nat_of_cut].reshape(-1, n1, n2)
        self.target = target[:, nat_of_cut].reshape(-1, n1, n2)
        self.weights = instance.coefficients
        self.dims = (n1, n2)

    def probability(self, ops_one: np.ndarray, ops_two: np.ndarray) -> float:
        # <t|K1 (x) K2|s> = sum conj(T) * (K1 S K2^T) entrywise, per term.
        half = np.einsum("jab,ibc,kdc->jkiad", ops_one, self.source, ops_two)
        amps = np.einsum("i,iad,jkiad->jk", self.weights, self.target.conj(), half)
        return float(np.sum(np.abs(amps) ** 2))


def _slices(iso: np.ndarray, dim: int, env: int) -> np.ndarray:
    return np.ascontiguousarray(iso.reshape(dim, env, dim).transpose(1, 0, 2))


def _identity_isometry(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def _givens_perturb(iso: np.ndarray, step: float, rng: np.random.Generator) -> np.ndarray:
    """Small unitary rotation of the isometry's output space.

    One complex Givens rotation on a random coordinate pair plus a random
    small phase twist; repeated composition reaches the whole unitary group.
    """
    rows = iso.shape[0]
    out = iso.copy()
    if rows >= 2:
        i, j = rng.choice(rows, size=2, replace=False)
        theta = step * rng.standard_normal()
        phi = 2 * np.pi * rng.random()
        c, s = np.cos(theta), np.sin(theta)
        row_i = out[i].copy()
        row_j = out[j].copy()
        out[i] = c * row_i - np.exp(1j * phi) * s * row_j
        out[j] = np.exp(-1j * phi) * s * row_i + c * row_j
    k = int(rng.integers(rows))
    out[k] *= np.exp(1j * step * rng.standard_normal())
    return out


def optimize_separable_attack(instance: AttackInstance,
                              cut: Bipartition | None = None,
                              config: OptimizerConfig = OptimizerConfig(),
                              rng: np.random.Generator | None = None) -> AttackResult:
    """Maximize the switch probability over sampled separable channels.

    Multi-restart accept-if-improve local search: each restart draws local
    isometries for both cut sides (restart 0 starts from the identity
    channel, Kraus ranks cycle through 1..kraus_rank on the others) and
    perturbs them with Givens-style rotations whose step decays
    geometrically. The trace records (restart, iteration, best-so-far) at
    every improvement. The reported probability is re-evaluated through
    :func:`switch_probability` on the final channel.
    """
    if rng is None:
        raise ValueError("the optimizer needs a seeded generator")
    cut = cut if cut is not None else instance.cut
    ev = _CutEvaluator(instance, cut)
    n1, n2 = cut.dims
    cap = bound_for(instance)

    best_p = -1.0
    best_pair: tuple[np.ndarray, np.ndarray, int] | None = None
    trace: list[tuple[int, int, float]] = []
    streams = rng.spawn(config.restarts)
    for restart, stream in enumerate(streams):
        if restart == 0:
            rank = 1
            iso_one = _identity_isometry(n1)
            iso_two = _identity_isometry(n2)
        else:
            rank = (restart - 1) % config.kraus_rank + 1
            iso_one = haar_isometry(n1, rank, stream)
            iso_two = haar_isometry(n2, rank, stream)
        current = ev.probability(_slices(iso_one, n1, rank), _slices(iso_two, n2, rank))
        if current > best_p:
            best_p = current
            best_pair = (iso_one, iso_two, rank)
            trace.append((restart, 0, best_p))
        step = config.step_size
        for it in range(1, config.iterations + 1):
            if it % config.decay_interval == 0:
                step *= config.step_decay
            cand_one = _givens_perturb(iso_one, step, stream)
            cand_two = _givens_perturb(iso_two, step, stream)
            p = ev.probability(_slices(cand_one, n1, rank), _slices(cand_two, n2, rank))
            if p > current:
                current = p
                iso_one, iso_two = cand_one, cand_two
                if p > best_p:
                    best_p = p
                    best_pair = (iso_one, iso_two, rank)
                    trace.append((restart, it, best_p))

    iso_one, iso_two, rank = best_pair
    pairs = tuple(
        (a, b)
        for a in _slices(iso_one, n1, rank)
        for b in _slices(iso_two, n2, rank)
    )
    channel = SeparableChannel(cut, pairs)
    achieved = switch_probability(instance, channel)
    return AttackResult(achieved_p=achieved, bound=cap, channel=channel,
                        trace=tuple(trace))
