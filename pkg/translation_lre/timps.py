# translation_lre/timps.py

"""
Translation-invariant matrix product states and a sampled span-rank oracle.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .combinatorics import BigCount, mps_dim_bound, necklace_count
from .errors import DomainError
from .statevector import RANK_TOLERANCE, RingSpec, StateVector, gram_spectrum, rank_from_spectrum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimpsTensor:
    """A site-independent tensor A = {A^i}, stored as an array of shape (q, d_bond, d_bond)."""
    matrices: np.ndarray = field(repr=False)

    def __post_init__(self):
        matrices = np.asarray(self.matrices, dtype=complex)
        if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2]:
            raise DomainError(f"TIMPS tensor must have shape (q, d, d), got {matrices.shape}")
        if matrices.shape[0] < 2:
            raise DomainError("TIMPS tensor needs physical dimension q >= 2")
        if not np.all(np.isfinite(matrices)):
            raise DomainError("TIMPS tensor has non-finite entries")
        object.__setattr__(self, "matrices", matrices)

    @property
    def q(self) -> int:
        return self.matrices.shape[0]

    @property
    def d_bond(self) -> int:
        return self.matrices.shape[1]

    @classmethod
    def random(cls, q: int, d_bond: int, rng: np.random.Generator) -> "TimpsTensor":
        shape = (q, d_bond, d_bond)
        return cls(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class SpanEstimate:
    """Gram rank of sampled states, with the bounds it is checked against."""
    samples: int
    gram_rank: int
    tolerance: float
    bound: BigCount
    sector_dim: BigCount
    neighbor_ranks: Tuple[int, ...] = ()

    @property
    def passed(self) -> bool:
        return self.gram_rank <= self.bound and self.gram_rank <= self.sector_dim

    @property
    def stable(self) -> bool:
        """Rank unchanged at tolerance / 10 and tolerance * 10."""
        return all(rank == self.gram_rank for rank in self.neighbor_ranks)

    @property
    def margin(self) -> BigCount:
        return self.bound - self.gram_rank


def contract_timps(tensor: TimpsTensor, n: int, spec: Optional[RingSpec] = None) -> StateVector:
    """
    Amplitude of |i_1 ... i_n> is Tr(A^{i_1} ... A^{i_n}).

    The running product is kept as an array of shape (q^k, d, d) over the first k sites.
    """
    spec = RingSpec(n, tensor.q) if spec is None else spec
    if spec.n != n or spec.q != tensor.q:
        raise DomainError(f"ring (n={spec.n}, q={spec.q}) does not match n={n}, q={tensor.q}")
    spec.check_state_cap()
    d = tensor.d_bond
    running = tensor.matrices
    for _ in range(n - 1):
        running = np.einsum("aij,bjk->abik", running, tensor.matrices).reshape(-1, d, d)
    return StateVector(spec, np.trace(running, axis1=1, axis2=2))


def required_samples(rank_ceiling: int) -> int:
    return 2 * rank_ceiling


def default_samples(rank_ceiling: int) -> int:
    return 3 * rank_ceiling + 10


def sampled_gram_spectrum(spec: RingSpec, sampler: Callable[[np.random.Generator], StateVector],
                          samples: int, seed: int) -> np.ndarray:
    """Gram spectrum of `samples` states, one independent RNG stream per sample index."""
    children = np.random.SeedSequence(seed).spawn(samples)
    stack = np.empty((samples, spec.dim), dtype=complex)
    for index, child in enumerate(children):
        stack[index] = sampler(np.random.default_rng(child)).amplitudes
    return gram_spectrum(stack)


def span_estimate(eigenvalues: np.ndarray, samples: int, tolerance: float,
                  bound: BigCount, sector_dim: BigCount) -> SpanEstimate:
    return SpanEstimate(
        samples=samples,
        gram_rank=rank_from_spectrum(eigenvalues, tolerance),
        tolerance=tolerance,
        bound=bound,
        sector_dim=sector_dim,
        neighbor_ranks=(rank_from_spectrum(eigenvalues, tolerance / 10),
                        rank_from_spectrum(eigenvalues, tolerance * 10)),
    )


def timps_span_rank(spec: RingSpec, d_bond: int, samples: Optional[int] = None, seed: int = 0,
                    tolerance: float = RANK_TOLERANCE) -> SpanEstimate:
    """
    Sampled lower estimate of dim span{TIMPS of bond dimension d_bond} on the ring.

    Args:
        spec (RingSpec): ring and dense caps.
        d_bond (int): bond dimension.
        samples (Optional[int]): number of random tensors; defaults to 3 min(bound, q^n) + 10.
        seed (int): root seed.
        tolerance (float): relative Gram-spectrum threshold.

    Returns:
        SpanEstimate: rank with the mps_dim_bound and necklace ceilings.
    """
    if d_bond < 1:
        raise DomainError(f"d_bond must be >= 1, got {d_bond}")
    spec.check_state_cap()
    bound = mps_dim_bound(spec.n, spec.q, d_bond)
    ceiling = min(bound, spec.dim)
    samples = default_samples(ceiling) if samples is None else samples
    if samples < required_samples(ceiling):
        raise DomainError(
            f"timps_span_rank on (n={spec.n}, q={spec.q}, d_bond={d_bond}) needs at least "
            f"{required_samples(ceiling)} samples, got {samples}"
        )

    def sampler(rng):
        return contract_timps(TimpsTensor.random(spec.q, d_bond, rng), spec.n, spec)

    eigenvalues = sampled_gram_spectrum(spec, sampler, samples, seed)
    estimate = span_estimate(eigenvalues, samples, tolerance, bound, necklace_count(spec.n, spec.q))
    logger.info(f"TIMPS span (n={spec.n}, q={spec.q}, d_bond={d_bond}): "
                f"rank {estimate.gram_rank}, bound {bound}")
    return estimate
