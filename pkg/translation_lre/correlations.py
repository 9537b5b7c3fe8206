# translation_lre/correlations.py

"""
Exact shifted traces Tr(O T^r) of local operators and the cycle bound that
makes correlators on momentum-sector states exponentially close to their
infinite-temperature values.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .combinatorics import momentum_sector_dim
from .errors import DomainError
from .statevector import RingSpec, translation_indices

logger = logging.getLogger(__name__)

DEFAULT_LOCALITY_CAP = 3


@dataclass(frozen=True)
class LocalOperator:
    """
    Operator on the sorted site list `support`; the first support site is the most
    significant digit of the matrix index. locality_cap=None lifts the size limit.
    """
    support: Tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    locality_cap: Optional[int] = DEFAULT_LOCALITY_CAP

    def __post_init__(self):
        support = tuple(int(site) for site in self.support)
        if list(support) != sorted(set(support)):
            raise DomainError(f"support must be sorted and distinct, got {support}")
        if self.locality_cap is not None and len(support) > self.locality_cap:
            raise DomainError(f"support of size {len(support)} exceeds locality cap {self.locality_cap}")
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DomainError(f"operator matrix must be square, got {matrix.shape}")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "matrix", matrix)

    @property
    def operator_norm(self) -> float:
        return float(linalg.norm(self.matrix, 2))

    def local_dim(self, q: int) -> int:
        return q ** len(self.support)


def _check_operator(op: LocalOperator, spec: RingSpec):
    if op.support and (op.support[0] < 0 or op.support[-1] >= spec.n):
        raise DomainError(f"support {op.support} leaves the ring of {spec.n} sites")
    if op.matrix.shape[0] != op.local_dim(spec.q):
        raise DomainError(f"operator on {len(op.support)} sites must have dimension {op.local_dim(spec.q)}")


def _shift_order(r: int, n: int) -> int:
    r %= n
    return math.gcd(n, r) if r else n


def _digit_table(q: int, k: int) -> np.ndarray:
    """Row z lists the q-ary digits of z, most significant first."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.stack(np.unravel_index(np.arange(q ** k), (q,) * k), axis=1)


def shifted_trace(op: LocalOperator, r: int, spec: RingSpec) -> complex:
    """
    Tr(O T^r) / q^n by constraint propagation around the cycles of the shift by r.

    Off the support the constraint z_j = z_{j-r} ties every site to the nearest
    support site reached walking backward by r. A cycle missing the support is a
    free constant worth a factor q. What remains is
    sum_{z_A} O_A[z_A, z_A o pi] with pi(a) = src(a - r).
    """
    _check_operator(op, spec)
    n, q = spec.n, spec.q
    shift = r % n
    on_support = set(op.support)

    def source(site: int) -> int:
        site %= n
        while site not in on_support:
            site = (site - shift) % n
        return site

    cycles = _shift_order(shift, n)
    touched = {site % cycles for site in op.support}
    empty_cycles = cycles - len(touched)
    position = {site: index for index, site in enumerate(op.support)}
    pullback = [position[source(site - shift)] for site in op.support]

    k = len(op.support)
    digits = _digit_table(q, k)
    weights = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
    rows = digits @ weights
    columns = digits[:, pullback] @ weights if k else rows
    total = complex(np.sum(op.matrix[rows, columns]))
    return total * float(q) ** (empty_cycles - n)


def embed_operator(op: LocalOperator, spec: RingSpec) -> np.ndarray:
    """Dense O (x) I on the full ring."""
    _check_operator(op, spec)
    spec.check_operator_cap()
    n, q = spec.n, spec.q
    rest = [site for site in range(n) if site not in op.support]
    full = np.kron(op.matrix, np.eye(q ** len(rest), dtype=complex))
    order = list(op.support) + rest
    axes = np.argsort(order)
    tensor = full.reshape((q,) * (2 * n))
    tensor = np.transpose(tensor, list(axes) + [n + axis for axis in axes])
    return tensor.reshape(spec.dim, spec.dim)


def dense_shifted_trace(op: LocalOperator, r: int, spec: RingSpec,
                        embedded: Optional[np.ndarray] = None) -> complex:
    """Tr(O T^r) / q^n from the dense embedding; T^r has a single 1 per row at column idx[j]."""
    if embedded is None:
        embedded = embed_operator(op, spec)
    indices = translation_indices(spec, r)
    return complex(np.sum(embedded[indices, np.arange(spec.dim)])) / spec.dim


def log_cycle_bound(support: Sequence[int], r: int, spec: RingSpec) -> float:
    cycles = _shift_order(r, spec.n)
    counts: Dict[int, int] = {}
    for site in support:
        counts[site % cycles] = counts.get(site % cycles, 0) + 1
    exponent = sum(max(1, counts.get(c, 0)) for c in range(cycles))
    return (exponent - spec.n) * math.log(spec.q)


def cycle_bound(support: Sequence[int], r: int, spec: RingSpec) -> float:
    """q^{sum_c max(1, a_c) - n}, a_c = |A cap c| over the gcd(n, r) cycles of the shift."""
    return math.exp(log_cycle_bound(support, r, spec))


def _sector_prefactor(spec: RingSpec, k_index: int) -> float:
    sector = momentum_sector_dim(spec.n, spec.q, k_index)
    if sector == 0:
        raise DomainError(f"momentum sector k={k_index} of (n={spec.n}, q={spec.q}) is empty")
    return float(Fraction(spec.q ** spec.n, spec.n * sector))


def sector_expectation(k_index: int, op: LocalOperator, spec: RingSpec) -> complex:
    """
    <O> on rho_k = P_k / Tr P_k, expanded as
    (q^n / (n Tr P_k)) sum_r omega^{-kr} Tr(O T^r) / q^n.
    """
    n = spec.n
    total = sum(
        np.exp(-2j * np.pi * k_index * r / n) * shifted_trace(op, r, spec)
        for r in range(n)
    )
    return complex(_sector_prefactor(spec, k_index) * total)


def tensor_product(first: LocalOperator, second: LocalOperator, q: int) -> LocalOperator:
    """O_i O_j on the union of two disjoint supports."""
    overlap = set(first.support) & set(second.support)
    if overlap:
        raise DomainError(f"operators overlap on sites {sorted(overlap)}")
    order = list(first.support) + list(second.support)
    k = len(order)
    axes = list(np.argsort(order))
    tensor = np.kron(first.matrix, second.matrix).reshape((q,) * (2 * k))
    tensor = np.transpose(tensor, axes + [k + axis for axis in axes])
    return LocalOperator(tuple(sorted(order)), tensor.reshape(q ** k, q ** k), locality_cap=None)


def connected_correlation(k_index: int, op_i: LocalOperator, op_j: LocalOperator, spec: RingSpec) -> complex:
    joint = tensor_product(op_i, op_j, spec.q)
    value = (sector_expectation(k_index, joint, spec)
             - sector_expectation(k_index, op_i, spec) * sector_expectation(k_index, op_j, spec))
    logger.debug(f"connected correlation k={k_index} on {op_i.support}, {op_j.support}: {value:.3e}")
    return value


def correlation_envelope(k_index: int, support: Sequence[int], spec: RingSpec) -> float:
    """Bound on |<O>_k| for traceless O with ||O|| <= 1: the r != 0 cycle bounds, summed."""
    summed = sum(cycle_bound(support, r, spec) for r in range(1, spec.n))
    return _sector_prefactor(spec, k_index) * summed


def connected_envelope(k_index: int, support_i: Sequence[int], support_j: Sequence[int],
                       spec: RingSpec) -> float:
    joint = sorted(set(support_i) | set(support_j))
    return (correlation_envelope(k_index, joint, spec)
            + correlation_envelope(k_index, support_i, spec) * correlation_envelope(k_index, support_j, spec))


def backward_shift_fixture(spec: RingSpec) -> LocalOperator:
    """
    The near-global operator on sites 1..n-1 that cyclically shifts their digits
    backward by one; (1/q^n) Tr(O T) = 1/q, saturating the cycle bound.
    """
    if spec.n < 2:
        raise DomainError("the backward-shift fixture needs n >= 2")
    q, k = spec.q, spec.n - 1
    digits = _digit_table(q, k)
    weights = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
    columns = digits @ weights
    rows = np.roll(digits, -1, axis=1) @ weights
    matrix = np.zeros((q ** k, q ** k), dtype=complex)
    matrix[rows, columns] = 1.0
    return LocalOperator(tuple(range(1, spec.n)), matrix, locality_cap=None)


def random_local_operator(spec: RingSpec, support: Sequence[int], rng: np.random.Generator,
                          traceless: bool = False,
                          locality_cap: Optional[int] = DEFAULT_LOCALITY_CAP) -> LocalOperator:
    """Complex Gaussian operator scaled to operator norm 1."""
    dim = spec.q ** len(support)
    matrix = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    if traceless:
        matrix -= np.trace(matrix) / dim * np.eye(dim)
    matrix /= linalg.norm(matrix, 2)
    return LocalOperator(tuple(sorted(support)), matrix, locality_cap=locality_cap)
