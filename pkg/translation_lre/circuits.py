# translation_lre/circuits.py

"""
Brickwork circuits on a ring, the light-cone cutting construction and a span
estimate for translation-invariant depth-d states.

A gate with left_site l acts on sites (l, l+1 mod n); its matrix index is
i_left * q + i_right. Sampled circuits put layer l on bonds with left_site of
the same parity as l.
"""

import base64
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy import linalg

from .combinatorics import BigCount, block_split, hpoly_dim, necklace_count, sre_dim_bound
from .errors import DomainError, PreconditionError, StructuralError
from .statevector import (
    RANK_TOLERANCE,
    RingSpec,
    StateVector,
    product_state,
    purity,
    reduced_density_matrix,
    translate,
)
from .timps import SpanEstimate, default_samples, required_samples, sampled_gram_spectrum, span_estimate

logger = logging.getLogger(__name__)

UNITARY_ATOL = 1e-12
TI_ATOL = 1e-8
PURITY_ATOL = 1e-9
OVERLAP_ATOL = 1e-8
SCHMIDT_RTOL = 1e-12
MATRIX_DTYPE = "<c16"


@dataclass(frozen=True)
class TwoSiteGate:
    left_site: int
    layer: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise StructuralError(f"gate matrix must be square, got {matrix.shape}")
        deviation = np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0])))
        if deviation > UNITARY_ATOL:
            raise StructuralError(f"gate on bond {self.left_site} in layer {self.layer} "
                                  f"is not unitary (deviation {deviation:.3e})")
        object.__setattr__(self, "matrix", matrix)

    def sites(self, n: int) -> Tuple[int, int]:
        return self.left_site % n, (self.left_site + 1) % n

    def shifted(self, x: int, n: int) -> "TwoSiteGate":
        return TwoSiteGate((self.left_site + x) % n, self.layer, self.matrix)

    def inverse(self, depth: int) -> "TwoSiteGate":
        return TwoSiteGate(self.left_site, depth - 1 - self.layer, self.matrix.conj().T)


@dataclass(frozen=True)
class BrickworkCircuit:
    """Depth-`depth` circuit of two-site gates; layers apply in increasing order."""
    spec: RingSpec
    depth: int
    gates: Tuple[TwoSiteGate, ...] = ()

    def __post_init__(self):
        gates = tuple(sorted(self.gates, key=lambda gate: (gate.layer, gate.left_site % self.spec.n)))
        object.__setattr__(self, "gates", gates)
        if self.depth < 0:
            raise StructuralError(f"depth must be >= 0, got {self.depth}")
        if gates and self.spec.n < 2:
            raise StructuralError("two-site gates need a ring of at least two sites")
        local_dim = self.spec.q ** 2
        occupied: Dict[int, Set[int]] = {}
        for gate in gates:
            if not 0 <= gate.layer < self.depth:
                raise StructuralError(f"gate layer {gate.layer} outside [0, {self.depth})")
            if gate.matrix.shape != (local_dim, local_dim):
                raise StructuralError(f"gate matrix must be {local_dim}x{local_dim}, got {gate.matrix.shape}")
            sites = set(gate.sites(self.spec.n))
            taken = occupied.setdefault(gate.layer, set())
            if taken & sites:
                raise StructuralError(f"overlapping gates at sites {sorted(taken & sites)} in layer {gate.layer}")
            taken |= sites

    def layer(self, index: int) -> List[TwoSiteGate]:
        return [gate for gate in self.gates if gate.layer == index]

    def support(self) -> Set[int]:
        sites: Set[int] = set()
        for gate in self.gates:
            sites.update(gate.sites(self.spec.n))
        return sites

    def inverse(self) -> "BrickworkCircuit":
        return BrickworkCircuit(self.spec, self.depth, tuple(gate.inverse(self.depth) for gate in self.gates))

    def shifted(self, x: int) -> "BrickworkCircuit":
        """T^x C T^{-x}: every gate moved x sites along the ring."""
        return BrickworkCircuit(self.spec, self.depth, tuple(gate.shifted(x, self.spec.n) for gate in self.gates))


@dataclass(frozen=True)
class GateMpoPair:
    """
    Two-body MPO of a gate: left_tensor[o1, i1, b] and right_tensor[b, o2, i2].
    """
    left_tensor: np.ndarray = field(repr=False)
    right_tensor: np.ndarray = field(repr=False)
    singular_values: np.ndarray = field(repr=False)

    @property
    def bond_dim(self) -> int:
        return self.left_tensor.shape[2]

    @property
    def schmidt_rank(self) -> int:
        top = self.singular_values.max()
        return int(np.count_nonzero(self.singular_values > SCHMIDT_RTOL * top))

    def contract(self) -> np.ndarray:
        q = self.left_tensor.shape[0]
        tensor = np.einsum("abk,kcd->acbd", self.left_tensor, self.right_tensor)
        return tensor.reshape(q * q, q * q)


@dataclass(frozen=True)
class CutState:
    state: StateVector
    cuts: Tuple[int, ...]
    closing_cut: bool


@dataclass(frozen=True)
class BlockFactorization:
    pieces: Tuple[Tuple[Tuple[int, ...], StateVector], ...]
    block: Optional[StateVector]
    remainder: StateVector
    cuts: Tuple[int, ...]
    min_purity: float
    max_block_deviation: float
    max_overlap_error: float

    @property
    def passed(self) -> bool:
        return (self.min_purity >= 1 - PURITY_ATOL
                and self.max_block_deviation <= OVERLAP_ATOL
                and self.max_overlap_error <= OVERLAP_ATOL)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR of a complex Gaussian with a phase-fixed diagonal."""
    gaussian = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    unitary, upper = linalg.qr(gaussian)
    diagonal = np.diagonal(upper)
    return unitary * (diagonal / np.abs(diagonal))


def random_phase_gate(dim: int, rng: np.random.Generator) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * rng.random(dim)))


def _require_even_ring(spec: RingSpec):
    if spec.n < 2 or spec.n % 2:
        raise DomainError(f"brickwork sampling needs an even ring length, got n={spec.n}")


def _bonds(n: int, parity: int) -> range:
    return range(parity, n, 2)


def random_brickwork(spec: RingSpec, depth: int, rng: np.random.Generator) -> BrickworkCircuit:
    """Brickwork with an independent Haar gate on every bond."""
    _require_even_ring(spec)
    gates = [
        TwoSiteGate(left, layer, haar_unitary(spec.q ** 2, rng))
        for layer in range(depth)
        for left in _bonds(spec.n, layer % 2)
    ]
    return BrickworkCircuit(spec, depth, tuple(gates))


def ti_brickwork(spec: RingSpec, depth: int,
                 rng: np.random.Generator) -> Tuple[BrickworkCircuit, StateVector]:
    """
    Sample a circuit and an input product state whose output is exactly translation invariant.

    Layer 2k carries D_k (V_k x V_k) on even bonds and layer 2k+1 carries D_k on odd
    bonds, with D_k a random diagonal phase gate and V_k Haar on one site. A lone
    last layer carries V x V. Each layer pair equals (prod over all bonds of D_k) V_k^{x n},
    which commutes with T. The input is v^{x n} for a Haar-random unit vector v.
    """
    _require_even_ring(spec)
    q = spec.q
    gates = []
    for layer in range(0, depth, 2):
        local = haar_unitary(q, rng)
        pair = np.kron(local, local)
        if layer + 1 == depth:
            gates.extend(TwoSiteGate(left, layer, pair) for left in _bonds(spec.n, 0))
            break
        phases = random_phase_gate(q * q, rng)
        gates.extend(TwoSiteGate(left, layer, phases @ pair) for left in _bonds(spec.n, 0))
        gates.extend(TwoSiteGate(left, layer + 1, phases) for left in _bonds(spec.n, 1))
    local_state = haar_unitary(q, rng)[:, 0]
    return BrickworkCircuit(spec, depth, tuple(gates)), product_state(spec, local_state)


def _apply_gate(tensor: np.ndarray, gate: TwoSiteGate, n: int, q: int) -> np.ndarray:
    left, right = gate.sites(n)
    operator = gate.matrix.reshape(q, q, q, q)
    result = np.tensordot(operator, tensor, axes=([2, 3], [left, right]))
    return np.moveaxis(result, [0, 1], [left, right])


def apply_circuit(circuit: BrickworkCircuit, state: StateVector) -> StateVector:
    spec = state.spec
    if not spec.compatible(circuit.spec):
        raise DomainError("circuit and state live on different rings")
    spec.check_state_cap()
    tensor = state.as_tensor()
    for gate in circuit.gates:
        tensor = _apply_gate(tensor, gate, spec.n, spec.q)
    return StateVector(spec, tensor.reshape(-1))


def is_translation_invariant(state: StateVector, tol: float = 1e-10) -> Tuple[bool, float]:
    """Returns (deviation <= tol, ||state - T state||)."""
    deviation = float(np.linalg.norm(state.amplitudes - translate(state, 1).amplitudes))
    return deviation <= tol, deviation


def _check_cut_geometry(n: int, depth: int):
    if n < 2 * depth + 2:
        raise DomainError(f"ring n={n} too small for disjoint light cones at depth {depth}: need n >= {2 * depth + 2}")


def lightcone_subcircuit(circuit: BrickworkCircuit, x: int) -> BrickworkCircuit:
    """
    C_x = T^x C_0 T^{-x}, where C_0 holds every gate causally after the earliest gate
    on bond (0, 1): the future closure of that gate inside the circuit.
    """
    spec = circuit.spec
    _check_cut_geometry(spec.n, circuit.depth)
    seeds = [gate for gate in circuit.gates if gate.left_site % spec.n == 0]
    if not seeds:
        return BrickworkCircuit(spec, circuit.depth)
    first_layer = min(gate.layer for gate in seeds)
    selected = [gate for gate in seeds if gate.layer == first_layer]
    covered = set(selected[0].sites(spec.n))
    for layer in range(first_layer + 1, circuit.depth):
        hits = [gate for gate in circuit.layer(layer) if covered & set(gate.sites(spec.n))]
        if len(hits) > layer - first_layer + 1:
            raise StructuralError(f"light cone has {len(hits)} gates in layer {layer}, "
                                  f"expected at most {layer - first_layer + 1}")
        for gate in hits:
            covered.update(gate.sites(spec.n))
        selected.extend(hits)
    return BrickworkCircuit(spec, circuit.depth, tuple(selected)).shifted(x)


def cut_positions(n: int, depth: int) -> Tuple[Tuple[int, ...], bool]:
    """
    Cut bonds x_j = (2d+1) j for j < m, plus a closing cut at m (2d+1) when r >= 2d.
    Returns (positions, closing_cut).
    """
    m, r = block_split(n, depth)
    width = 2 * depth + 1
    positions = [width * j for j in range(m)]
    closing = r >= 2 * depth
    if closing:
        positions.append(width * m)
    return tuple(positions), closing


def cut_state(circuit: BrickworkCircuit, ti_state: StateVector, ti_tol: float = TI_ATOL) -> CutState:
    """Apply the inverses of the disjoint light-cone sub-circuits at every cut bond."""
    spec = circuit.spec
    invariant, deviation = is_translation_invariant(ti_state, ti_tol)
    if not invariant:
        raise PreconditionError("cut_state needs a translation-invariant input", deviation)
    _check_cut_geometry(spec.n, circuit.depth)
    base = lightcone_subcircuit(circuit, 0)
    cuts, closing = cut_positions(spec.n, circuit.depth)
    claimed: Set[int] = set()
    state = ti_state
    for x in cuts:
        cone = base.shifted(x)
        overlap = claimed & cone.support()
        if overlap:
            raise StructuralError(f"light cone at bond {x} overlaps earlier cones at sites {sorted(overlap)}")
        claimed |= cone.support()
        state = apply_circuit(cone.inverse(), state)
    logger.debug(f"cut_state (n={spec.n}, depth={circuit.depth}): cuts {cuts}, closing={closing}")
    return CutState(state, cuts, closing)


def _piece_sites(n: int, cuts: Sequence[int]) -> List[Tuple[int, ...]]:
    pieces = []
    for index, start in enumerate(cuts):
        stop = cuts[index + 1] if index + 1 < len(cuts) else cuts[0] + n
        pieces.append(tuple(site % n for site in range(start + 1, stop + 1)))
    return pieces


def _phase_free_distance(a: StateVector, b: StateVector) -> float:
    return 1.0 - abs(a.normalized().overlap(b.normalized()))


def block_factorization(circuit: BrickworkCircuit, ti_state: StateVector,
                        purity_tol: float = PURITY_ATOL) -> BlockFactorization:
    """
    Split the cut state into the pure pieces between consecutive cuts.

    Every piece bounded by two cuts 2d+1 apart is a block; all blocks must agree up to
    a phase. The first piece is reported as the block (None with a single cut) and the
    last piece as the remainder.
    """
    spec = circuit.spec
    cut = cut_state(circuit, ti_state)
    normalized = cut.state.normalized()
    pieces = []
    purities = []
    for sites in _piece_sites(spec.n, cut.cuts):
        rho = reduced_density_matrix(normalized, sites)
        piece_purity = purity(rho)
        purities.append(piece_purity)
        if piece_purity < 1 - purity_tol:
            raise StructuralError(f"piece on sites {sites} is mixed (purity {piece_purity:.12f})")
        _, vectors = linalg.eigh(rho)
        pieces.append((sites, StateVector(RingSpec(len(sites), spec.q), vectors[:, -1])))

    order = [site for sites, _ in pieces for site in sites]
    product = np.ones(1, dtype=complex)
    for _, piece in pieces:
        product = np.kron(product, piece.amplitudes)
    product = np.transpose(product.reshape((spec.q,) * spec.n), np.argsort(order)).reshape(-1)
    reconstructed = StateVector(spec, product)
    overlap_error = _phase_free_distance(reconstructed, normalized)

    width = 2 * circuit.depth + 1
    blocks = [piece for sites, piece in pieces if len(sites) == width] if len(pieces) > 1 else []
    block_deviation = max((_phase_free_distance(blocks[0], other) for other in blocks[1:]), default=0.0)
    result = BlockFactorization(
        pieces=tuple(pieces),
        block=blocks[0] if blocks else None,
        remainder=pieces[-1][1],
        cuts=cut.cuts,
        min_purity=min(purities),
        max_block_deviation=block_deviation,
        max_overlap_error=overlap_error,
    )
    logger.debug(f"block_factorization (n={spec.n}, depth={circuit.depth}): {len(pieces)} pieces, "
                 f"overlap error {overlap_error:.3e}, block deviation {block_deviation:.3e}")
    return result


def default_split_window(n: int, depth: int) -> int:
    return min(depth + 1, (n - 2 * depth) // 2)


def cut_split_error(state: StateVector, cut: int, window: int) -> float:
    """max |rho_LR - rho_L (x) rho_R| for the `window` sites on each side of bond (cut, cut+1)."""
    n = state.spec.n
    if window < 1 or 2 * window > n:
        raise DomainError(f"split window {window} does not fit a ring of {n} sites")
    left = [(cut - window + 1 + offset) % n for offset in range(window)]
    right = [(cut + 1 + offset) % n for offset in range(window)]
    normalized = state.normalized()
    joint = reduced_density_matrix(normalized, left + right)
    split = np.kron(reduced_density_matrix(normalized, left), reduced_density_matrix(normalized, right))
    return float(np.max(np.abs(joint - split)))


def gate_mpo_decompose(gate) -> GateMpoPair:
    """
    Operator-Schmidt decomposition of a two-site gate into a bond-q^2 MPO pair.

    Args:
        gate (TwoSiteGate | np.ndarray): gate or its q^2 x q^2 matrix.

    Returns:
        GateMpoPair: tensors with U sqrt(S) on the left and sqrt(S) Vh on the right.
    """
    matrix = gate.matrix if isinstance(gate, TwoSiteGate) else np.asarray(gate, dtype=complex)
    q = int(round(np.sqrt(matrix.shape[0])))
    if q * q != matrix.shape[0] or matrix.shape[0] != matrix.shape[1]:
        raise DomainError(f"gate matrix of shape {matrix.shape} is not q^2 x q^2")
    regrouped = matrix.reshape(q, q, q, q).transpose(0, 2, 1, 3).reshape(q * q, q * q)
    u, s, vh = linalg.svd(regrouped)
    root = np.sqrt(s)
    left = (u * root).reshape(q, q, q * q)
    right = (root[:, None] * vh).reshape(q * q, q, q)
    return GateMpoPair(left, right, s)


def ti_state_dim_bound(n: int, depth: int, q: int) -> BigCount:
    """Ceiling on the span of TI depth-`depth` states used by the circuit span estimate."""
    if depth == 0:
        return hpoly_dim(n, q)
    if n >= 2 * depth + 2:
        return sre_dim_bound(n, depth, q)
    return necklace_count(n, q)


def ti_circuit_span_rank(spec: RingSpec, depth: int, samples: Optional[int] = None, seed: int = 0,
                         tolerance: float = RANK_TOLERANCE) -> SpanEstimate:
    """Gram rank of outputs of sampled TI circuits: a lower estimate of the TI depth-d span."""
    _require_even_ring(spec)
    spec.check_state_cap()
    bound = ti_state_dim_bound(spec.n, depth, spec.q)
    sector = necklace_count(spec.n, spec.q)
    ceiling = min(bound, sector)
    samples = default_samples(ceiling) if samples is None else samples
    if samples < required_samples(ceiling):
        raise DomainError(
            f"ti_circuit_span_rank on (n={spec.n}, q={spec.q}, depth={depth}) needs at least "
            f"{required_samples(ceiling)} samples, got {samples}"
        )

    def sampler(rng):
        circuit, initial = ti_brickwork(spec, depth, rng)
        return apply_circuit(circuit, initial)

    estimate = span_estimate(sampled_gram_spectrum(spec, sampler, samples, seed), samples, tolerance, bound, sector)
    logger.info(f"TI circuit span (n={spec.n}, q={spec.q}, depth={depth}): "
                f"rank {estimate.gram_rank}, bound {bound}")
    return estimate


def circuit_to_json(circuit: BrickworkCircuit) -> str:
    document = {
        "n": circuit.spec.n,
        "q": circuit.spec.q,
        "depth": circuit.depth,
        "gates": [
            {
                "layer": gate.layer,
                "left_site": gate.left_site,
                "matrix": base64.b64encode(np.ascontiguousarray(gate.matrix, dtype=MATRIX_DTYPE).tobytes()).decode("ascii"),
            }
            for gate in circuit.gates
        ],
    }
    return json.dumps(document, indent=2)


def circuit_from_json(text: str) -> BrickworkCircuit:
    try:
        document = json.loads(text)
        spec = RingSpec(int(document["n"]), int(document["q"]))
        local_dim = spec.q ** 2
        gates = tuple(
            TwoSiteGate(
                int(entry["left_site"]),
                int(entry["layer"]),
                np.frombuffer(base64.b64decode(entry["matrix"]), dtype=MATRIX_DTYPE).reshape(local_dim, local_dim),
            )
            for entry in document["gates"]
        )
        return BrickworkCircuit(spec, int(document["depth"]), gates)
    except DomainError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise StructuralError(f"malformed circuit document: {exc}") from exc
