"""Dense complex linear algebra over labeled qudit registers.

A register is an ordered list of qudit factors; states are dense complex
vectors over the product space and operators are dense matrices. All
operations (tensor products, partial traces, Schmidt decompositions,
structured gates, factor permutations) address factors by index and are
dimension-generic.

Index convention: row-major with the leftmost factor most significant.
The basis index of |i_1, ..., i_n> is sum_k i_k * prod(dims right of k),
so ``amplitudes.reshape(factor_dims)`` exposes one axis per factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

# Structural equalities (norms, Gram matrices, traces) are asserted to
# STRUCTURAL_TOL; exact algebraic round-trips to ROUNDTRIP_TOL.
STRUCTURAL_TOL = 1e-9
ROUNDTRIP_TOL = 1e-12

BasisKind = Literal["Z", "X"]

__all__ = [
    "STRUCTURAL_TOL",
    "ROUNDTRIP_TOL",
    "RegisterShape",
    "StateVector",
    "DensityMatrix",
    "Bipartition",
    "SchmidtData",
    "tensor",
    "partial_trace",
    "reduced_state",
    "schmidt_decompose",
    "fidelity",
    "fourier_gate",
    "basis_vector",
    "factor_permutation_operator",
    "permute_factors",
    "invert_order",
    "computational_state",
    "maximally_mixed",
    "haar_unitary",
    "haar_isometry",
    "random_state",
    "random_density",
    "random_permutation",
    "check_permutation",
]


@dataclass(frozen=True)
class RegisterShape:
    """Ordered local dimensions of a multi-qudit register."""

    factor_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        object.__setattr__(self, "factor_dims", dims)
        if not dims:
            raise ValueError("register needs at least one factor")
        if any(d < 2 for d in dims):
            raise ValueError(f"every factor dimension must be >= 2, got {dims}")

    @property
    def total_dim(self) -> int:
        out = 1
        for d in self.factor_dims:
            out *= d
        return out

    @property
    def num_factors(self) -> int:
        return len(self.factor_dims)

    def subshape(self, factors: Sequence[int]) -> "RegisterShape":
        return RegisterShape(tuple(self.factor_dims[i] for i in factors))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state over a register; normalized to STRUCTURAL_TOL."""

    shape: RegisterShape
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1).copy()
        object.__setattr__(self, "amplitudes", amps)
        if amps.size != self.shape.total_dim:
            raise ValueError(
                f"amplitude vector has length {amps.size}, register needs "
                f"{self.shape.total_dim}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > STRUCTURAL_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm_sq}")

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.shape, np.outer(self.amplitudes, self.amplitudes.conj()))

    def overlap(self, other: "StateVector") -> complex:
        if self.shape != other.shape:
            raise ValueError("overlap requires equal register shapes")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state: Hermitian, unit trace, positive within STRUCTURAL_TOL."""

    shape: RegisterShape
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex).copy()
        object.__setattr__(self, "entries", m)
        dim = self.shape.total_dim
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} does not match register dim {dim}")
        if float(np.max(np.abs(m - m.conj().T))) > STRUCTURAL_TOL:
            raise ValueError("matrix is not Hermitian")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > STRUCTURAL_TOL:
            raise ValueError(f"trace is {trace}, expected 1")
        lowest = float(np.linalg.eigvalsh(m)[0])
        if lowest < -STRUCTURAL_TOL:
            raise ValueError(f"matrix has negative eigenvalue {lowest}")


@dataclass(frozen=True)
class Bipartition:
    """Two-sided split of a register's factors, ordered so side two is smaller.

    ``dims`` returns (N1, N2) with N2 <= N1; side one carries dimension N1.
    """

    shape: RegisterShape
    side_one: tuple[int, ...]
    side_two: tuple[int, ...]

    def __post_init__(self):
        one = tuple(sorted(int(i) for i in self.side_one))
        two = tuple(sorted(int(i) for i in self.side_two))
        n = self.shape.num_factors
        if not one or not two:
            raise ValueError("both sides of a bipartition must be nonempty")
        if sorted(one + two) != list(range(n)):
            raise ValueError("sides must disjointly cover all register factors")
        if self._dim_of(one) < self._dim_of(two):
            one, two = two, one
        object.__setattr__(self, "side_one", one)
        object.__setattr__(self, "side_two", two)

    @classmethod
    def of(cls, shape: RegisterShape, part: Iterable[int]) -> "Bipartition":
        """Bipartition separating ``part`` from the remaining factors."""
        part = tuple(sorted(set(int(i) for i in part)))
        rest = tuple(i for i in range(shape.num_factors) if i not in part)
        return cls(shape, rest, part)

    def _dim_of(self, factors: tuple[int, ...]) -> int:
        out = 1
        for i in factors:
            out *= self.shape.factor_dims[i]
        return out

    @property
    def dims(self) -> tuple[int, int]:
        return self._dim_of(self.side_one), self._dim_of(self.side_two)

    @property
    def cut_order(self) -> tuple[int, ...]:
        """Factor order placing side one first; used for reshapes."""
        return self.side_one + self.side_two

    def label(self) -> str:
        one = ",".join(str(i) for i in self.side_one)
        two = ",".join(str(i) for i in self.side_two)
        return f"{{{one}}}|{{{two}}}"


@dataclass(frozen=True, eq=False)
class SchmidtData:
    """Schmidt weights and the two orthonormal vector families of a cut.

    Weights are nonincreasing and sum to one; the state reconstructs as
    sum_i sqrt(w_i) |left_i>|right_i> on the cut-ordered register.
    """

    coefficients: np.ndarray
    left_vectors: tuple[StateVector, ...]
    right_vectors: tuple[StateVector, ...]

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float).copy()
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "left_vectors", tuple(self.left_vectors))
        object.__setattr__(self, "right_vectors", tuple(self.right_vectors))
        k = coeffs.size
        if k == 0 or len(self.left_vectors) != k or len(self.right_vectors) != k:
            raise ValueError("coefficient and vector family lengths must agree")
        if np.any(coeffs < -STRUCTURAL_TOL):
            raise ValueError("negative Schmidt coefficient")
        if np.any(np.diff(coeffs) > STRUCTURAL_TOL):
            raise ValueError("coefficients must be nonincreasing")
        if abs(float(coeffs.sum()) - 1.0) > STRUCTURAL_TOL:
            raise ValueError(f"coefficients sum to {coeffs.sum()}, expected 1")
        for family in (self.left_vectors, self.right_vectors):
            stacked = np.stack([v.amplitudes for v in family])
            gram = stacked.conj() @ stacked.T
            if float(np.max(np.abs(gram - np.eye(k)))) > STRUCTURAL_TOL:
                raise ValueError("vector family is not orthonormal")

    @property
    def max_coefficient(self) -> float:
        return float(self.coefficients[0])

    def reconstruct(self) -> StateVector:
        """State on the cut-ordered register (left factors then right factors)."""
        left_shape = self.left_vectors[0].shape
        right_shape = self.right_vectors[0].shape
        amps = np.zeros(left_shape.total_dim * right_shape.total_dim, dtype=complex)
        for w, left, right in zip(self.coefficients, self.left_vectors, self.right_vectors):
            amps += np.sqrt(w) * np.kron(left.amplitudes, right.amplitudes)
        shape = RegisterShape(left_shape.factor_dims + right_shape.factor_dims)
        return StateVector(shape, amps)


# ---------------------------------------------------------------------------
# permutations of register factors


def check_permutation(perm: Sequence[int], d: int) -> tuple[int, ...]:
    """Validate that ``perm`` is a bijection on {0..d-1} and return it as a tuple."""
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(d)):
        raise ValueError(f"{perm} is not a permutation of 0..{d - 1}")
    return perm


def invert_order(order: Sequence[int]) -> tuple[int, ...]:
    inv = np.argsort(np.asarray(order, dtype=int))
    return tuple(int(i) for i in inv)


def permute_factors(amplitudes: np.ndarray, shape: RegisterShape,
                    new_order: Sequence[int]) -> np.ndarray:
    """Reorder register factors of a state vector.

    ``new_order[j]`` names the old factor placed at slot j, so the result's
    j-th axis carries the content of old factor ``new_order[j]``.
    """
    order = check_permutation(new_order, shape.num_factors)
    return np.ascontiguousarray(
        amplitudes.reshape(shape.factor_dims).transpose(order)
    ).reshape(-1)


def factor_permutation_operator(shape: RegisterShape,
                                new_order: Sequence[int]) -> np.ndarray:
    """Unitary realizing :func:`permute_factors` as a dense matrix."""
    order = check_permutation(new_order, shape.num_factors)
    dim = shape.total_dim
    source = permute_factors(np.arange(dim), shape, order)
    op = np.zeros((dim, dim), dtype=complex)
    op[np.arange(dim), source] = 1.0
    return op


# ---------------------------------------------------------------------------
# core operations


def tensor(a, b):
    """Kronecker product of two states, two density matrices, or two operators."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        shape = RegisterShape(a.shape.factor_dims + b.shape.factor_dims)
        return StateVector(shape, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        shape = RegisterShape(a.shape.factor_dims + b.shape.factor_dims)
        return DensityMatrix(shape, np.kron(a.entries, b.entries))
    if isinstance(a, np.ndarray) and isinstance(b, np.ndarray):
        return np.kron(a, b)
    raise TypeError(f"tensor requires two values of the same kind, got "
                    f"{type(a).__name__} and {type(b).__name__}")


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on the ``keep`` factors."""
    keep = tuple(sorted(set(int(i) for i in keep)))
    n = rho.shape.num_factors
    if not keep:
        raise ValueError("keep set must be nonempty")
    if any(i < 0 or i >= n for i in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} factors")
    dims = rho.shape.factor_dims
    tens = rho.entries.reshape(dims + dims)
    # Traced factors share a row/column einsum label; kept ones stay free.
    row = list(range(n))
    col = [i if i not in keep else n + i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    reduced = np.einsum(tens, row + col, out)
    kept_dim = int(np.prod([dims[i] for i in keep]))
    return DensityMatrix(rho.shape.subshape(keep), reduced.reshape(kept_dim, kept_dim))


def reduced_state(psi: StateVector, keep: Iterable[int]) -> DensityMatrix:
    """Partial trace of a pure state without forming the full density matrix."""
    keep = tuple(sorted(set(int(i) for i in keep)))
    n = psi.shape.num_factors
    if not keep:
        raise ValueError("keep set must be nonempty")
    if any(i < 0 or i >= n for i in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} factors")
    dims = psi.shape.factor_dims
    tens = psi.amplitudes.reshape(dims)
    # Traced axes share a ket/bra einsum label; kept ones stay free on each side.
    ket = [i if i in keep else n + i for i in range(n)]
    bra = [2 * n + i if i in keep else n + i for i in range(n)]
    out = [i for i in keep] + [2 * n + i for i in keep]
    reduced = np.einsum(tens, ket, tens.conj(), bra, out)
    kept_dim = int(np.prod([dims[i] for i in keep]))
    return DensityMatrix(psi.shape.subshape(keep), reduced.reshape(kept_dim, kept_dim))


def schmidt_decompose(psi: StateVector, cut: Bipartition) -> SchmidtData:
    """Schmidt decomposition of a pure state across a bipartition.

    The amplitude tensor is permuted to the cut order, reshaped to an
    (N1, N2) matrix and decomposed by SVD. Coefficients are the squared
    singular values in nonincreasing order; numerically zero ones
    (singular value <= 1e-12) are dropped. Phase convention: the first
    significant entry of each left vector is made real nonnegative, with
    the compensating phase pushed onto the right vector.
    """
    if psi.shape != cut.shape:
        raise ValueError("state and bipartition live on different registers")
    n1, n2 = cut.dims
    matrix = permute_factors(psi.amplitudes, psi.shape, cut.cut_order).reshape(n1, n2)
    u, s, vh = np.linalg.svd(matrix, full_matrices=False)
    kept = s > 1e-12
    u, s, vh = u[:, kept], s[kept], vh[kept, :]
    for i in range(s.size):
        col = u[:, i]
        j = int(np.argmax(np.abs(col) > STRUCTURAL_TOL))
        phase = col[j] / abs(col[j])
        u[:, i] = col * np.conj(phase)
        vh[i, :] = vh[i, :] * phase
    left_shape = cut.shape.subshape(cut.side_one)
    right_shape = cut.shape.subshape(cut.side_two)
    left = tuple(StateVector(left_shape, u[:, i]) for i in range(s.size))
    right = tuple(StateVector(right_shape, vh[i, :]) for i in range(s.size))
    return SchmidtData(s**2, left, right)


def _clipped_eigvals(vals: np.ndarray) -> np.ndarray:
    # Numerically-zero eigenvalues would otherwise leak O(sqrt(eps)) into sqrt.
    cutoff = float(np.max(vals, initial=0.0)) * vals.size * np.finfo(float).eps
    return np.where(vals > cutoff, vals, 0.0)


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    return (vecs * np.sqrt(_clipped_eigvals(vals))) @ vecs.conj().T


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Squared trace-norm overlap of two density matrices, in [0, 1].

    Computed as the squared sum of singular values of sqrt(rho) sqrt(sigma);
    singular values enter linearly, so the noise floor stays at machine scale
    instead of its square root.
    """
    if rho.shape != sigma.shape:
        raise ValueError("fidelity requires equal register shapes")
    product = _psd_sqrt(rho.entries) @ _psd_sqrt(sigma.entries)
    value = float(np.sum(np.linalg.svd(product, compute_uv=False)) ** 2)
    return float(np.clip(value, 0.0, 1.0))


def fourier_gate(d: int) -> np.ndarray:
    """Qudit Fourier unitary with entries omega^(kl)/sqrt(d), omega = exp(2*pi*i/d)."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)


def basis_vector(kind: BasisKind, k: int, d: int,
                 perm: Sequence[int] | None = None) -> StateVector:
    """Computational ("Z") or Fourier-conjugate ("X") basis state.

    With a permutation the returned state is indexed by perm[k]; the X-kind
    state with index p has amplitudes omega^(-p*l)/sqrt(d) over l.
    """
    if not 0 <= k < d:
        raise ValueError(f"basis index {k} out of range for dimension {d}")
    p = k if perm is None else check_permutation(perm, d)[k]
    shape = RegisterShape((d,))
    if kind == "Z":
        amps = np.zeros(d, dtype=complex)
        amps[p] = 1.0
        return StateVector(shape, amps)
    if kind == "X":
        amps = np.exp(-2j * np.pi * p * np.arange(d) / d) / np.sqrt(d)
        return StateVector(shape, amps)
    raise ValueError(f"unknown basis kind {kind!r}")


def computational_state(shape: RegisterShape, digits: Sequence[int]) -> StateVector:
    """Product basis state |digits[0], digits[1], ...>."""
    digits = tuple(int(i) for i in digits)
    if len(digits) != shape.num_factors:
        raise ValueError("one digit per register factor required")
    for i, dim in zip(digits, shape.factor_dims):
        if not 0 <= i < dim:
            raise ValueError(f"digit {i} out of range for factor of dimension {dim}")
    amps = np.zeros(shape.total_dim, dtype=complex)
    amps[int(np.ravel_multi_index(digits, shape.factor_dims))] = 1.0
    return StateVector(shape, amps)


def maximally_mixed(shape: RegisterShape) -> DensityMatrix:
    dim = shape.total_dim
    return DensityMatrix(shape, np.eye(dim, dtype=complex) / dim)


# ---------------------------------------------------------------------------
# random sampling


def _ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a Ginibre matrix with phase fix."""
    q, r = np.linalg.qr(_ginibre(dim, dim, rng))
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def haar_isometry(dim: int, env_dim: int, rng: np.random.Generator) -> np.ndarray:
    """Isometry C^dim -> C^(dim*env_dim); output index is (system, environment)."""
    if env_dim < 1:
        raise ValueError("environment dimension must be >= 1")
    return haar_unitary(dim * env_dim, rng)[:, :dim]


def random_state(shape: RegisterShape, rng: np.random.Generator) -> StateVector:
    amps = _ginibre(shape.total_dim, 1, rng).ravel()
    return StateVector(shape, amps / np.linalg.norm(amps))


def random_density(shape: RegisterShape, rng: np.random.Generator,
                   rank: int | None = None) -> DensityMatrix:
    dim = shape.total_dim
    g = _ginibre(dim, rank or dim, rng)
    m = g @ g.conj().T
    return DensityMatrix(shape, m / np.trace(m))


def random_permutation(d: int, rng: np.random.Generator) -> tuple[int, ...]:
    return tuple(int(i) for i in rng.permutation(d))
