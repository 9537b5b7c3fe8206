# translation_lre/statevector.py

"""
Dense exact-diagonalization substrate for q-ary rings.

Site ordering: site 0 is the most significant q-ary digit of an amplitude index,
so a state reshaped to (q,) * n has axis j equal to site j. The translation T
moves the content of site x to site x+1 (mod n).
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from .combinatorics import necklace_count
from .errors import DomainError, ResourceLimitError, StructuralError

logger = logging.getLogger(__name__)

DEFAULT_MAX_AMPLITUDES = 2 ** 20
DEFAULT_MAX_OPERATOR_DIM = 2 ** 12
HERMITIAN_ATOL = 1e-12
PSD_ATOL = 1e-10
PROJECTOR_ATOL = 1e-10
RANK_TOLERANCE = 1e-8


@dataclass(frozen=True)
class RingSpec:
    n: int
    q: int
    max_amplitudes: int = DEFAULT_MAX_AMPLITUDES
    max_operator_dim: int = DEFAULT_MAX_OPERATOR_DIM

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"ring length n must be >= 1, got {self.n}")
        if self.q < 2:
            raise DomainError(f"local dimension q must be >= 2, got {self.q}")

    @property
    def dim(self) -> int:
        return self.q ** self.n

    @property
    def shape(self):
        return (self.q,) * self.n

    def check_state_cap(self):
        if self.dim > self.max_amplitudes:
            raise ResourceLimitError(
                f"state on (n={self.n}, q={self.q}) needs {self.dim} amplitudes",
                "max_amplitudes", self.max_amplitudes,
            )

    def check_operator_cap(self):
        if self.dim > self.max_operator_dim:
            raise ResourceLimitError(
                f"dense operator on (n={self.n}, q={self.q}) has dimension {self.dim}",
                "max_operator_dim", self.max_operator_dim,
            )

    def compatible(self, other: "RingSpec") -> bool:
        return self.n == other.n and self.q == other.q


@dataclass(frozen=True)
class StateVector:
    """Amplitudes of a (possibly unnormalized) ring state."""
    spec: RingSpec
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape[0] != self.spec.dim:
            raise DomainError(f"expected {self.spec.dim} amplitudes, got {amplitudes.shape[0]}")
        if not np.all(np.isfinite(amplitudes)):
            raise DomainError("state has non-finite amplitudes")
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        norm = self.norm
        if norm == 0:
            raise DomainError("cannot normalize the zero vector")
        return StateVector(self.spec, self.amplitudes / norm)

    def as_tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.spec.shape)

    def overlap(self, other: "StateVector") -> complex:
        if not self.spec.compatible(other.spec):
            raise DomainError("overlap between states on different rings")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityOperator:
    """Positive semidefinite Hermitian operator on the ring; projectors are stored unnormalized."""
    spec: RingSpec
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.spec.check_operator_cap()
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.shape != (self.spec.dim, self.spec.dim):
            raise DomainError(f"expected a {self.spec.dim}x{self.spec.dim} matrix, got {matrix.shape}")
        scale = max(1.0, float(np.max(np.abs(matrix))) if matrix.size else 1.0)
        if np.max(np.abs(matrix - matrix.conj().T)) > HERMITIAN_ATOL * scale:
            raise DomainError("operator is not Hermitian")
        object.__setattr__(self, "matrix", matrix)
        self.check_positive()

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return linalg.eigvalsh(self.matrix)

    def rank(self, tolerance: float = RANK_TOLERANCE) -> int:
        eigenvalues = self.eigenvalues
        top = float(np.max(np.abs(eigenvalues)))
        if top == 0:
            return 0
        return int(np.count_nonzero(eigenvalues >= tolerance * top))

    def check_positive(self):
        if self.eigenvalues.min() < -PSD_ATOL:
            raise DomainError(f"operator has negative eigenvalue {self.eigenvalues.min():.3e}")

    def projector_deviation(self) -> float:
        return float(np.max(np.abs(self.matrix @ self.matrix - self.matrix)))

    def expectation(self, operator: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ operator))


@dataclass(frozen=True)
class TailsCheck:
    lhs: float
    rhs: float
    holds: bool

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def _shift_axes(n: int, x: int):
    return [(j - x) % n for j in range(n)]


def translation_indices(spec: RingSpec, x: int) -> np.ndarray:
    """Index map idx with (T^x psi)[j] = psi[idx[j]]."""
    indices = np.arange(spec.dim).reshape(spec.shape)
    return np.transpose(indices, _shift_axes(spec.n, x % spec.n)).reshape(-1)


def translate(state: StateVector, x: int) -> StateVector:
    spec = state.spec
    shift = x % spec.n
    if shift == 0:
        return state
    tensor = np.transpose(state.as_tensor(), _shift_axes(spec.n, shift))
    return StateVector(spec, tensor.reshape(-1))


def translation_matrix(spec: RingSpec, x: int) -> np.ndarray:
    spec.check_operator_cap()
    matrix = np.zeros((spec.dim, spec.dim), dtype=complex)
    matrix[np.arange(spec.dim), translation_indices(spec, x)] = 1.0
    return matrix


def basis_state(spec: RingSpec, digits: Sequence[int]) -> StateVector:
    if len(digits) != spec.n or any(not 0 <= digit < spec.q for digit in digits):
        raise DomainError(f"digits {list(digits)} do not label a basis state of (n={spec.n}, q={spec.q})")
    spec.check_state_cap()
    index = 0
    for digit in digits:
        index = index * spec.q + digit
    amplitudes = np.zeros(spec.dim, dtype=complex)
    amplitudes[index] = 1.0
    return StateVector(spec, amplitudes)


def product_state(spec: RingSpec, local: np.ndarray) -> StateVector:
    """v^{(x)n} for a single-site vector v."""
    local = np.asarray(local, dtype=complex).reshape(-1)
    if local.shape[0] != spec.q:
        raise DomainError(f"local vector must have length q={spec.q}")
    spec.check_state_cap()
    amplitudes = np.ones(1, dtype=complex)
    for _ in range(spec.n):
        amplitudes = np.kron(amplitudes, local)
    return StateVector(spec, amplitudes)


def momentum_projector(spec: RingSpec, k_index: int) -> DensityOperator:
    """
    P_k = (1/n) sum_x omega^{-kx} T^x with omega = exp(2 pi i / n).

    T P_k = exp(2 pi i k / n) P_k, so P_k projects onto the eigenspace T psi = e^{ik} psi.
    """
    spec.check_operator_cap()
    n = spec.n
    k = k_index % n
    rows = np.arange(spec.dim)
    matrix = np.zeros((spec.dim, spec.dim), dtype=complex)
    for x in range(n):
        matrix[rows, translation_indices(spec, x)] += np.exp(-2j * np.pi * k * x / n) / n
    return DensityOperator(spec, matrix)


def sector_projectors(spec: RingSpec):
    return [momentum_projector(spec, k) for k in range(spec.n)]


def rho_ti(spec: RingSpec) -> DensityOperator:
    """Maximally mixed state on the zero-momentum sector, P_0 / Tr P_0."""
    projector = momentum_projector(spec, 0)
    rho = DensityOperator(spec, projector.matrix / projector.trace)
    logger.debug(f"rho_TI on (n={spec.n}, q={spec.q}): Tr P_0 = {projector.trace:.1f}, "
                 f"necklaces = {necklace_count(spec.n, spec.q)}")
    return rho


def trace_distance(a: DensityOperator, b: DensityOperator) -> float:
    """D(A, B) = (1/2) ||A - B||_1 from the spectrum of the Hermitian difference."""
    if not a.spec.compatible(b.spec):
        raise DomainError(
            f"trace distance between (n={a.spec.n}, q={a.spec.q}) and (n={b.spec.n}, q={b.spec.q})"
        )
    eigenvalues = linalg.eigvalsh(a.matrix - b.matrix)
    return float(np.clip(0.5 * np.sum(np.abs(eigenvalues)), 0.0, 1.0))


def tails_inequality_check(rho: DensityOperator, sigma: DensityOperator,
                           projector: DensityOperator) -> TailsCheck:
    """Evaluate D(rho, sigma) >= Tr(P sigma) - Tr(P rho)."""
    deviation = projector.projector_deviation()
    if deviation > PROJECTOR_ATOL:
        raise DomainError(f"P is not a projector: max |P^2 - P| = {deviation:.3e}")
    lhs = trace_distance(rho, sigma)
    rhs = float(np.real(sigma.expectation(projector.matrix) - rho.expectation(projector.matrix)))
    return TailsCheck(lhs=lhs, rhs=rhs, holds=lhs >= rhs - PROJECTOR_ATOL)


def tails_lemma_bound(epsilon: float, delta: float) -> float:
    """Trace-distance lower bound 1 - eps^2 - delta when Tr(P rho) <= eps^2 and Tr(P sigma) >= 1 - delta."""
    return 1.0 - epsilon ** 2 - delta


def random_density_operator(spec: RingSpec, rng: np.random.Generator,
                            rank: Optional[int] = None) -> DensityOperator:
    """Wishart-style G G^dagger / Tr with standard complex Gaussian G."""
    rank = spec.dim if rank is None else rank
    gaussian = rng.standard_normal((spec.dim, rank)) + 1j * rng.standard_normal((spec.dim, rank))
    matrix = gaussian @ gaussian.conj().T
    matrix = 0.5 * (matrix + matrix.conj().T)
    return DensityOperator(spec, matrix / np.real(np.trace(matrix)))


def random_projector(spec: RingSpec, rank: int, rng: np.random.Generator) -> DensityOperator:
    if not 0 <= rank <= spec.dim:
        raise DomainError(f"projector rank must lie in [0, {spec.dim}], got {rank}")
    if rank == 0:
        return DensityOperator(spec, np.zeros((spec.dim, spec.dim), dtype=complex))
    gaussian = rng.standard_normal((spec.dim, rank)) + 1j * rng.standard_normal((spec.dim, rank))
    basis, _ = linalg.qr(gaussian, mode="economic")
    matrix = basis @ basis.conj().T
    return DensityOperator(spec, 0.5 * (matrix + matrix.conj().T))


def reduced_density_matrix(state: StateVector, sites: Sequence[int]) -> np.ndarray:
    """Normalized reduced density matrix on `sites`, with the subsystem axes in the given order."""
    spec = state.spec
    sites = [site % spec.n for site in sites]
    if len(set(sites)) != len(sites):
        raise DomainError(f"repeated sites in {sites}")
    rest = [site for site in range(spec.n) if site not in sites]
    psi = np.transpose(state.as_tensor(), sites + rest).reshape(spec.q ** len(sites), -1)
    rho = psi @ psi.conj().T
    return rho / np.real(np.trace(rho))


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho, rho)))


def gram_spectrum(vectors: np.ndarray) -> np.ndarray:
    """
    Spectrum of the Gram matrix of a stack of vectors (one per row).

    Rows are normalized first; the smaller of S S^dagger and S^dagger S is
    diagonalized since both share their nonzero eigenvalues.
    """
    stack = np.asarray(vectors, dtype=complex)
    if stack.ndim != 2:
        raise StructuralError(f"expected a 2-d stack of vectors, got shape {stack.shape}")
    norms = np.linalg.norm(stack, axis=1)
    stack = stack[norms > 0] / norms[norms > 0, None]
    if stack.shape[0] == 0:
        return np.zeros(0)
    if stack.shape[0] <= stack.shape[1]:
        gram = stack.conj() @ stack.T
    else:
        gram = stack.T @ stack.conj()
    return linalg.eigvalsh(0.5 * (gram + gram.conj().T))


def rank_from_spectrum(eigenvalues: np.ndarray, tolerance: float = RANK_TOLERANCE) -> int:
    if eigenvalues.size == 0 or eigenvalues.max() <= 0:
        return 0
    return int(np.count_nonzero(eigenvalues > tolerance * eigenvalues.max()))


def gram_rank(vectors: np.ndarray, tolerance: float = RANK_TOLERANCE) -> int:
    """Numerical rank: Gram eigenvalues above tolerance times the largest one."""
    return rank_from_spectrum(gram_spectrum(vectors), tolerance)
