"""Kraus-operator channel engine.

Three channel flavors cover everything the simulator needs:

* :class:`KrausChannel` - a dense list of Kraus operators on a register.
* :class:`FirstFactorChannel` - Kraus operators that act on factor 0 only
  (implicitly tensored with identity on the rest). Measurement channels on
  the ancilla and their permutation averages are of this form; keeping the
  small factors avoids materializing dim^2-sized operators and scales to
  the d=5 permutation average unchanged.
* :class:`SeparableChannel` - product Kraus pairs with respect to a
  bipartition of the committer register, liftable to a dense channel on a
  larger register (identity on the remaining factors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Literal, Sequence

import numpy as np

from .qudits import (
    STRUCTURAL_TOL,
    Bipartition,
    DensityMatrix,
    RegisterShape,
    basis_vector,
    haar_isometry,
    permute_factors,
)

__all__ = [
    "KrausChannel",
    "FirstFactorChannel",
    "SeparableChannel",
    "identity_channel",
    "lift",
    "random_separable_channel",
    "measurement_channel",
    "averaged_measurement_channel",
    "cut_index_map",
]

AverageMode = Literal["exact", "closed_form", "sampled"]


def _check_trace_preserving(ops: Sequence[np.ndarray], dim: int, what: str) -> None:
    acc = np.zeros((dim, dim), dtype=complex)
    for k in ops:
        acc += k.conj().T @ k
    dev = float(np.max(np.abs(acc - np.eye(dim))))
    if dev > STRUCTURAL_TOL:
        raise ValueError(f"{what} is not trace preserving (deviation {dev})")


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Completely positive trace-preserving map given by dense Kraus operators."""

    in_shape: RegisterShape
    out_shape: RegisterShape
    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        object.__setattr__(self, "kraus_ops", ops)
        din, dout = self.in_shape.total_dim, self.out_shape.total_dim
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (dout, din):
                raise ValueError(f"Kraus operator shape {k.shape}, expected {(dout, din)}")
        _check_trace_preserving(ops, din, "Kraus set")

    @classmethod
    def square(cls, shape: RegisterShape, ops: Sequence[np.ndarray]) -> "KrausChannel":
        return cls(shape, shape, tuple(ops))

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.shape != self.in_shape:
            raise ValueError("state lives on the wrong register for this channel")
        out = np.zeros((self.out_shape.total_dim,) * 2, dtype=complex)
        for k in self.kraus_ops:
            out += k @ rho.entries @ k.conj().T
        return DensityMatrix(self.out_shape, out)


@dataclass(frozen=True, eq=False)
class FirstFactorChannel:
    """Channel whose Kraus operators act on factor 0 and leave the rest alone."""

    shape: RegisterShape
    local_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.local_ops)
        object.__setattr__(self, "local_ops", ops)
        d = self.shape.factor_dims[0]
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (d, d):
                raise ValueError(f"local operator shape {k.shape}, expected {(d, d)}")
        _check_trace_preserving(ops, d, "local Kraus set")

    @property
    def rest_dim(self) -> int:
        return self.shape.total_dim // self.shape.factor_dims[0]

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.shape != self.shape:
            raise ValueError("state lives on the wrong register for this channel")
        d, rest = self.shape.factor_dims[0], self.rest_dim
        blocks = rho.entries.reshape(d, rest, d, rest)
        out = np.zeros_like(blocks)
        for s in self.local_ops:
            half = np.einsum("mk,kalb->malb", s, blocks)
            out += np.einsum("malb,nl->manb", half, s.conj())
        dim = self.shape.total_dim
        return DensityMatrix(self.shape, out.reshape(dim, dim))

    def to_kraus_channel(self) -> KrausChannel:
        """Materialize the dense Kraus list; memory grows as dim^2 per operator."""
        eye = np.eye(self.rest_dim)
        return KrausChannel.square(
            self.shape, tuple(np.kron(s, eye) for s in self.local_ops)
        )


def identity_channel(shape: RegisterShape) -> KrausChannel:
    return KrausChannel.square(shape, (np.eye(shape.total_dim, dtype=complex),))


def cut_index_map(cut: Bipartition) -> np.ndarray:
    """Index array mapping a natural-order flat index to its cut-order index."""
    dim = cut.shape.total_dim
    nat_of_cut = permute_factors(np.arange(dim), cut.shape, cut.cut_order)
    cut_of_nat = np.empty(dim, dtype=int)
    cut_of_nat[nat_of_cut] = np.arange(dim)
    return cut_of_nat


@dataclass(frozen=True, eq=False)
class SeparableChannel:
    """Product Kraus pairs (one factor per side) for a bipartition."""

    cut: Bipartition
    factor_pairs: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        n1, n2 = self.cut.dims
        pairs = []
        for a, b in self.factor_pairs:
            a = np.asarray(a, dtype=complex)
            b = np.asarray(b, dtype=complex)
            if a.shape != (n1, n1) or b.shape != (n2, n2):
                raise ValueError(
                    f"factor pair shapes {a.shape}, {b.shape} do not match cut dims {(n1, n2)}"
                )
            pairs.append((a, b))
        object.__setattr__(self, "factor_pairs", tuple(pairs))
        if not pairs:
            raise ValueError("a channel needs at least one Kraus pair")
        _check_trace_preserving([np.kron(a, b) for a, b in pairs], n1 * n2,
                                "lifted separable Kraus set")

    def kraus_on_cut_order(self) -> tuple[np.ndarray, ...]:
        return tuple(np.kron(a, b) for a, b in self.factor_pairs)


def lift(channel: SeparableChannel,
         full_shape: RegisterShape | None = None) -> KrausChannel:
    """Dense channel acting on the cut's register in natural factor order.

    With ``full_shape`` the Kraus operators are extended by identity on the
    trailing factors; the cut's register must be a strict prefix of
    ``full_shape`` (a cut that touches the non-committer factors is an error).
    """
    cut = channel.cut
    cut_of_nat = cut_index_map(cut)
    grid = np.ix_(cut_of_nat, cut_of_nat)
    ops = [k[grid] for k in channel.kraus_on_cut_order()]
    shape = cut.shape
    if full_shape is not None:
        prefix = full_shape.factor_dims[: shape.num_factors]
        if prefix != shape.factor_dims or full_shape.num_factors <= shape.num_factors:
            raise ValueError(
                "cut register must be a strict prefix of the full register; "
                "the cut may not touch the remaining factors"
            )
        rest = int(np.prod(full_shape.factor_dims[shape.num_factors:]))
        ops = [np.kron(k, np.eye(rest)) for k in ops]
        shape = full_shape
    return KrausChannel.square(shape, tuple(ops))


def _isometry_slices(iso: np.ndarray, dim: int, env: int) -> list[np.ndarray]:
    # Row index of the isometry is (system, environment) with system major.
    return [iso.reshape(dim, env, dim)[:, e, :] for e in range(env)]


def random_separable_channel(cut: Bipartition, kraus_rank: int,
                             rng: np.random.Generator) -> SeparableChannel:
    """Random separable channel from independent local Haar isometries.

    Each side dilates into an environment of dimension ``kraus_rank``; the
    Kraus pairs are the environment slices, so every operator is a product
    and the set is trace preserving by the isometry property.
    """
    if kraus_rank < 1:
        raise ValueError("kraus_rank must be >= 1")
    n1, n2 = cut.dims
    slices_one = _isometry_slices(haar_isometry(n1, kraus_rank, rng), n1, kraus_rank)
    slices_two = _isometry_slices(haar_isometry(n2, kraus_rank, rng), n2, kraus_rank)
    pairs = tuple((a, b) for a in slices_one for b in slices_two)
    return SeparableChannel(cut, pairs)


def measurement_channel(bit: int, perm: Sequence[int], d: int) -> FirstFactorChannel:
    """Ancilla measurement channel for one bit value and permutation.

    The d Kraus operators map the measured basis state onto the outcome
    label: |m><chi_perm[m]| on the ancilla, identity elsewhere, where chi is
    the computational basis for bit 1 and its Fourier conjugate for bit 0.
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    kind = "X" if bit == 0 else "Z"
    ops = []
    for m in range(d):
        chi = basis_vector(kind, m, d, perm).amplitudes
        ket = np.zeros(d, dtype=complex)
        ket[m] = 1.0
        ops.append(np.outer(ket, chi.conj()))
    return FirstFactorChannel(RegisterShape((d,) * 5), tuple(ops))


def averaged_measurement_channel(bit: int, d: int, mode: AverageMode = "exact",
                                 rng: np.random.Generator | None = None,
                                 samples: int = 64) -> FirstFactorChannel:
    """Measurement channel averaged over the committer's secret permutation.

    ``exact`` enumerates all d! permutations (d <= 5), ``closed_form`` is the
    permutation-free expression (1/d) sum_{m,k} (|m><k| (x) 1) rho (|k><m| (x) 1),
    and ``sampled`` averages over ``samples`` seeded permutation draws.
    """
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    shape = RegisterShape((d,) * 5)
    if mode == "exact":
        if d > 5:
            raise ValueError(
                "exact averaging enumerates d! permutations and is limited to "
                "d <= 5; use mode='sampled'"
            )
        weight = 1.0 / math.sqrt(math.factorial(d))
        ops = []
        for perm in permutations(range(d)):
            ops.extend(weight * s for s in measurement_channel(bit, perm, d).local_ops)
        return FirstFactorChannel(shape, tuple(ops))
    if mode == "closed_form":
        ops = []
        for m in range(d):
            for k in range(d):
                s = np.zeros((d, d), dtype=complex)
                s[m, k] = 1.0 / np.sqrt(d)
                ops.append(s)
        return FirstFactorChannel(shape, tuple(ops))
    if mode == "sampled":
        if rng is None:
            raise ValueError("sampled averaging needs a seeded generator")
        if samples < 1:
            raise ValueError("samples must be >= 1")
        weight = 1.0 / np.sqrt(samples)
        ops = []
        for _ in range(samples):
            perm = tuple(int(i) for i in rng.permutation(d))
            ops.extend(weight * s for s in measurement_channel(bit, perm, d).local_ops)
        return FirstFactorChannel(shape, tuple(ops))
    raise ValueError(f"unknown averaging mode {mode!r}")
