# translation_lre/combinatorics.py

"""
Exact dimension formulas and the bound chain that turns them into depth and
time lower bounds.

All integer paths use Python integers and are exact. Quantities that overflow
floating point for large rings are carried in the log domain as LogBound.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, StructuralError

logger = logging.getLogger(__name__)

# Arbitrary-precision nonnegative integer.
BigCount = int

EXACT_TWIN_MAX_N = 512
GAMMA_TOLERANCE = 1e-9
LOG_TWIN_RTOL = 1e-12


@dataclass(frozen=True)
class LogBound:
    """Natural log of a positive bound, optionally paired with its exact value."""
    log_value: float
    exact: Optional[Fraction] = None

    def __post_init__(self):
        if not math.isfinite(self.log_value):
            raise DomainError(f"LogBound must be finite, got {self.log_value}")
        if self.exact is not None:
            twin = _log_fraction(self.exact)
            if abs(twin - self.log_value) > LOG_TWIN_RTOL * max(1.0, abs(twin)):
                raise StructuralError(
                    f"LogBound {self.log_value!r} disagrees with its exact twin (log {twin!r})"
                )

    @property
    def exact_flag(self) -> bool:
        return self.exact is not None


@dataclass(frozen=True)
class OverlapRatio:
    """Exact rational upper bound D_SRE / D_TI on Tr P_d rho_TI."""
    numerator: BigCount
    denominator: BigCount

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def vacuous(self) -> bool:
        return self.numerator >= self.denominator

    def clamped(self) -> float:
        """Probability-valued report: the ratio capped at 1."""
        if self.vacuous:
            return 1.0
        return float(self.fraction)


@dataclass(frozen=True)
class DepthModel:
    """
    Parametric circuit depth d(tau, n, eps, r) = ceil(c * tau * log(n tau / eps)^p).

    The constants are configuration: only the asymptotic form is known.
    When epsilon is None it resolves to sqrt(eta) at the call site.
    """
    c: float = 1.0
    p: float = 2.0
    epsilon: Optional[float] = None
    r: int = 2

    def __post_init__(self):
        if not self.c > 0:
            raise DomainError(f"DepthModel.c must be > 0, got {self.c}")
        if not self.p >= 1:
            raise DomainError(f"DepthModel.p must be >= 1, got {self.p}")
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise DomainError(f"DepthModel.epsilon must lie in (0, 1), got {self.epsilon}")
        if self.r < 1:
            raise DomainError(f"DepthModel.r must be >= 1, got {self.r}")

    def resolve_epsilon(self, eta: float) -> float:
        return self.epsilon if self.epsilon is not None else math.sqrt(eta)

    def raw_depth(self, tau: float, n: int, epsilon: float) -> float:
        # log clamped at 0 keeps the model monotone for n*tau/eps < 1
        log_term = math.log(max(n * tau / epsilon, 1.0))
        return self.c * tau * log_term ** self.p

    def depth(self, tau: float, n: int, epsilon: float) -> int:
        return math.ceil(self.raw_depth(tau, n, epsilon))

    def invert(self, target_depth: float, n: int, epsilon: float) -> float:
        """Smallest tau (to bisection precision) with raw_depth(tau) >= target_depth."""
        if target_depth <= 0:
            return 0.0
        hi = 1.0
        while self.raw_depth(hi, n, epsilon) < target_depth:
            hi *= 2.0
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.raw_depth(mid, n, epsilon) >= target_depth:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-13 * hi:
                break
        return hi


@dataclass(frozen=True)
class MinTimeRow:
    n: int
    min_depth: int
    tau: float


def _log_fraction(value: Fraction) -> float:
    value = Fraction(value)
    if value <= 0:
        raise DomainError(f"log of a non-positive value {value}")
    return math.log(value.numerator) - math.log(value.denominator)


def _require_positive(name: str, value: int, minimum: int = 1):
    if int(value) != value or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value}")


@lru_cache(maxsize=4096)
def prime_factorization(k: int) -> Dict[int, int]:
    """Trial-division factorization {prime: exponent}; factorization of 1 is empty."""
    _require_positive("k", k)
    factors: Dict[int, int] = {}
    remaining = k
    p = 2
    while p * p <= remaining:
        while remaining % p == 0:
            factors[p] = factors.get(p, 0) + 1
            remaining //= p
        p += 1 if p == 2 else 2
    if remaining > 1:
        factors[remaining] = factors.get(remaining, 0) + 1
    return factors


def divisors(n: int) -> List[int]:
    _require_positive("n", n)
    result = [1]
    for p, e in prime_factorization(n).items():
        result = [d * p ** j for d in result for j in range(e + 1)]
    return sorted(result)


def totient(k: int) -> BigCount:
    """
    Euler's totient via prime factorization.

    Args:
        k (int): positive integer.

    Returns:
        BigCount: number of integers in [1, k] coprime to k; totient(1) = 1.
    """
    if k == 0:
        raise DomainError("totient is undefined at k = 0")
    _require_positive("k", k)
    result = k
    for p in prime_factorization(k):
        result = result // p * (p - 1)
    return result


def mobius(k: int) -> int:
    _require_positive("k", k)
    factors = prime_factorization(k)
    if any(e > 1 for e in factors.values()):
        return 0
    return -1 if len(factors) % 2 else 1


def ramanujan_sum(m: int, k: int) -> int:
    """c_m(k): sum of exp(2 pi i k y / m) over y in [0, m) coprime to m (always an integer)."""
    _require_positive("m", m)
    g = math.gcd(m, k) if k else m
    return sum(mobius(m // e) * e for e in divisors(g))


def necklace_count(n: int, q: int) -> BigCount:
    """Number of q-ary necklaces of length n, i.e. the zero-momentum sector dimension."""
    _require_positive("n", n)
    _require_positive("q", q, minimum=2)
    total = sum(totient(k) * q ** (n // k) for k in divisors(n))
    if total % n:
        raise StructuralError(f"necklace sum {total} not divisible by n={n}")
    return total // n


def momentum_sector_dim(n: int, q: int, k_index: int) -> BigCount:
    """Exact Tr P_k = (1/n) sum_{g|n} q^g c_{n/g}(k)."""
    _require_positive("n", n)
    _require_positive("q", q, minimum=2)
    k = k_index % n
    total = sum(q ** g * ramanujan_sum(n // g, k) for g in divisors(n))
    if total % n:
        raise StructuralError(f"sector sum {total} not divisible by n={n} at k={k}")
    return total // n


def hpoly_dim(n: int, v: int) -> BigCount:
    """Dimension of degree-n homogeneous polynomials in v variables: C(v-1+n, n)."""
    _require_positive("n", n, minimum=0)
    _require_positive("v", v)
    return math.comb(v - 1 + n, n)


def log_hpoly_dim(n: int, v: int) -> LogBound:
    _require_positive("n", n, minimum=0)
    _require_positive("v", v)
    if n <= EXACT_TWIN_MAX_N:
        exact = hpoly_dim(n, v)
        return LogBound(math.log(exact), Fraction(exact))
    return LogBound(float(gammaln(v + n) - gammaln(n + 1) - gammaln(v)))


def mps_dim_bound(n: int, q: int, d_bond: int) -> BigCount:
    """Upper bound D_hpoly(n, q d^2) on the span of translation-invariant MPS."""
    _require_positive("n", n)
    _require_positive("q", q, minimum=2)
    _require_positive("d_bond", d_bond)
    return hpoly_dim(n, q * d_bond ** 2)


def block_split(n: int, d: int) -> Tuple[int, int]:
    """
    Write n = m (2d+1) + r with 1 <= r <= 2d+1.

    When 2d+1 divides n the remainder is a full block: r = 2d+1, m = n/(2d+1) - 1.
    """
    _require_positive("n", n)
    _require_positive("d", d, minimum=0)
    width = 2 * d + 1
    r = n % width
    if r == 0:
        return n // width - 1, width
    return n // width, r


def _validate_sre_args(n: int, d: int, q: int):
    _require_positive("d", d)
    _require_positive("q", q, minimum=2)
    _require_positive("n", n)
    minimum = 2 * d + 2
    if n < minimum:
        raise DomainError(f"n={n} too small for one full block at depth d={d}: need n >= {minimum}")


def _sre_variables(d: int, q: int) -> int:
    return 2 * d * (2 * d + 1) * q ** 4


def sre_dim_bound(n: int, d: int, q: int) -> BigCount:
    """Circuit-counting bound 2d(2d+1) q^4 D_hpoly(m, 2d(2d+1) q^4)."""
    _validate_sre_args(n, d, q)
    m, _ = block_split(n, d)
    v = _sre_variables(d, q)
    return v * hpoly_dim(m, v)


def sre_dim_bound_refined(n: int, d: int, q: int) -> BigCount:
    """Remainder-dependent form r 2d q^4 D_hpoly(m, 2d(2d+1) q^4), before relaxing r to 2d+1."""
    _validate_sre_args(n, d, q)
    m, r = block_split(n, d)
    return r * 2 * d * q ** 4 * hpoly_dim(m, _sre_variables(d, q))


def log_sre_dim_bound(n: int, d: int, q: int) -> LogBound:
    _validate_sre_args(n, d, q)
    if n <= EXACT_TWIN_MAX_N:
        exact = sre_dim_bound(n, d, q)
        return LogBound(math.log(exact), Fraction(exact))
    m, _ = block_split(n, d)
    v = _sre_variables(d, q)
    return LogBound(math.log(v) + log_hpoly_dim(m, v).log_value)


def overlap_bound_exact(n: int, d: int, q: int) -> OverlapRatio:
    """Tr P_d rho_TI <= D_SRE(n,d,q) / D_TI(n,q), as an exact ratio (may exceed 1)."""
    return OverlapRatio(sre_dim_bound(n, d, q), necklace_count(n, q))


def overlap_bound_relaxed(n: int, d: int, q: int) -> Fraction:
    """n D_SRE / q^n, using D_TI >= q^n / n."""
    return Fraction(n * sre_dim_bound(n, d, q), q ** n)


def _log_displayed_bound(n: int, d: int, q: int, gamma: float) -> float:
    a = _sre_variables(d, q) - 1
    return (
        math.log(2 * d * (2 * d + 1))
        + math.log(n)
        + (3 - n) * math.log(q)
        + a
        + a * math.log1p(n / a ** gamma)
    )


def overlap_bound_log(n: int, d: int, q: int, gamma: float) -> LogBound:
    """
    Log of 2d(2d+1) n q^{3-n} e^a (1 + n / a^gamma)^a with a = 2d(2d+1) q^4 - 1.

    Stays finite for n up to 10^6 and beyond.
    """
    if not 1 < gamma < 2:
        raise DomainError(f"gamma must lie in (1, 2), got {gamma}")
    _validate_sre_args(n, d, q)
    return LogBound(_log_displayed_bound(n, d, q, gamma))


@lru_cache(maxsize=256)
def gamma_exponent(q: int, d_max: int) -> float:
    """
    Largest gamma in (1, 2), to 1e-9, with (2d+1) a_d >= a_d^gamma for every 1 <= d <= d_max,
    where a_d = 2d(2d+1) q^4 - 1.
    """
    _require_positive("q", q, minimum=2)
    _require_positive("d_max", d_max)
    a_values = [_sre_variables(d, q) - 1 for d in range(1, d_max + 1)]
    left_logs = np.array([math.log((2 * d + 1) * a) for d, a in enumerate(a_values, start=1)])
    a_logs = np.array([math.log(a) for a in a_values])

    def holds(gamma: float) -> bool:
        return bool(np.all(left_logs >= gamma * a_logs))

    lo, hi = 1.0, 2.0
    while hi - lo > GAMMA_TOLERANCE:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            lo = mid
        else:
            hi = mid
    logger.debug(f"gamma_exponent(q={q}, d_max={d_max}) = {lo:.10f}")
    return lo


def default_depth_ceiling(n: int) -> int:
    return max(1, math.floor(10 * math.sqrt(n)))


def min_depth_for_overlap(n: int, q: int, eta: float, ceiling: Optional[int] = None) -> int:
    """
    Smallest depth d at which the bound chain stops forcing Tr P_d rho_TI < eta / 2.

    Args:
        n (int): ring length.
        q (int): local dimension.
        eta (float): accuracy parameter in (0, 1].
        ceiling (Optional[int]): largest depth scanned; defaults to floor(10 sqrt(n)).

    Returns:
        int: the first feasible depth.
    """
    _require_positive("n", n)
    _require_positive("q", q, minimum=2)
    if not 0 < eta <= 1:
        raise DomainError(f"eta must lie in (0, 1], got {eta}")
    ceiling = default_depth_ceiling(n) if ceiling is None else ceiling
    _require_positive("ceiling", ceiling)
    gamma = gamma_exponent(q, ceiling)
    threshold = math.log(eta / 2)
    # the displayed bound needs n >= 2d + 2
    last = min(ceiling, (n - 2) // 2)
    for d in range(1, last + 1):
        if _log_displayed_bound(n, d, q, gamma) > threshold:
            return d
    raise DomainError(f"ceiling reached: no feasible depth d <= {last} for n={n}, q={q}, eta={eta}")


def asymptotic_depth_estimate(n: int, q: int) -> float:
    """Leading-order lower bound sqrt(log q / 4q^4) sqrt(n / log n)."""
    _require_positive("n", n, minimum=2)
    return math.sqrt(math.log(q) / (4 * q ** 4)) * math.sqrt(n / math.log(n))


def min_time_estimate(n: int, q: int, eta: float, model: DepthModel) -> float:
    """Smallest tau whose model depth reaches min_depth_for_overlap(n, q, eta)."""
    target = min_depth_for_overlap(n, q, eta)
    return model.invert(target, n, model.resolve_epsilon(eta))


def min_time_sweep(ns: Sequence[int], q: int, eta: float, model: DepthModel) -> List[MinTimeRow]:
    epsilon = model.resolve_epsilon(eta)
    rows = []
    for n in ns:
        target = min_depth_for_overlap(n, q, eta)
        tau = model.invert(target, n, epsilon)
        logger.debug(f"min_time_sweep: n={n} depth={target} tau={tau:.6g}")
        rows.append(MinTimeRow(n, target, tau))
    return rows


def fit_scaling_exponent(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log(ys) against log(xs)."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise DomainError("need at least two matching points to fit an exponent")
    slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope)


def count_rotation_orbits(n: int, q: int) -> int:
    """Brute-force necklace oracle: count strings that are the minimal rotation of their orbit."""
    _require_positive("n", n)
    _require_positive("q", q, minimum=2)
    codes = np.arange(q ** n, dtype=np.int64)
    digits = np.stack(np.unravel_index(codes, (q,) * n), axis=1)
    weights = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    smallest = codes.copy()
    for shift in range(1, n):
        smallest = np.minimum(smallest, np.roll(digits, shift, axis=1) @ weights)
    return int(np.count_nonzero(smallest == codes))
