import json

import numpy as np
import pytest

from translation_lre.circuits import (
    BrickworkCircuit,
    TwoSiteGate,
    apply_circuit,
    block_factorization,
    circuit_from_json,
    circuit_to_json,
    cut_positions,
    cut_split_error,
    cut_state,
    default_split_window,
    gate_mpo_decompose,
    haar_unitary,
    is_translation_invariant,
    lightcone_subcircuit,
    random_brickwork,
    ti_brickwork,
    ti_circuit_span_rank,
    ti_state_dim_bound,
)
from translation_lre.combinatorics import hpoly_dim, necklace_count, sre_dim_bound
from translation_lre.errors import DomainError, PreconditionError, StructuralError
from translation_lre.statevector import RingSpec, StateVector, translate

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def _random_state(spec, rng):
    return StateVector(spec, rng.standard_normal(spec.dim) + 1j * rng.standard_normal(spec.dim)).normalized()


def test_haar_unitary_is_unitary(rng):
    u = haar_unitary(4, rng)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(4), atol=1e-12)


def test_gate_and_circuit_validation(rng):
    spec = RingSpec(4, 2)
    with pytest.raises(StructuralError):
        TwoSiteGate(0, 0, np.ones((4, 4)))
    u = haar_unitary(4, rng)
    with pytest.raises(StructuralError, match="overlapping"):
        BrickworkCircuit(spec, 1, (TwoSiteGate(0, 0, u), TwoSiteGate(1, 0, u)))
    with pytest.raises(StructuralError):
        BrickworkCircuit(spec, 1, (TwoSiteGate(0, 1, u),))
    with pytest.raises(StructuralError):
        BrickworkCircuit(spec, 1, (TwoSiteGate(0, 0, haar_unitary(9, rng)),))


def test_apply_circuit_matches_dense_kronecker(rng):
    spec = RingSpec(4, 2)
    u = haar_unitary(4, rng)
    circuit = BrickworkCircuit(spec, 1, (TwoSiteGate(1, 0, u),))
    state = _random_state(spec, rng)
    dense = np.kron(np.kron(np.eye(2), u), np.eye(2))
    np.testing.assert_allclose(apply_circuit(circuit, state).amplitudes, dense @ state.amplitudes, atol=1e-12)


def test_shifted_circuit_commutes_with_translation(rng):
    spec = RingSpec(6, 2)
    circuit = random_brickwork(spec, 3, rng)
    state = _random_state(spec, rng)
    for x in (1, 2, 5):
        left = apply_circuit(circuit.shifted(x), translate(state, x))
        right = translate(apply_circuit(circuit, state), x)
        np.testing.assert_allclose(left.amplitudes, right.amplitudes, atol=1e-12)


def test_inverse_circuit_undoes_the_circuit(rng):
    spec = RingSpec(6, 2)
    circuit = random_brickwork(spec, 4, rng)
    state = _random_state(spec, rng)
    restored = apply_circuit(circuit.inverse(), apply_circuit(circuit, state))
    np.testing.assert_allclose(restored.amplitudes, state.amplitudes, atol=1e-12)


@pytest.mark.parametrize("n, depth", [(6, 0), (6, 1), (6, 2), (8, 3), (8, 4), (10, 2)])
def test_ti_brickwork_outputs_are_translation_invariant(n, depth, rng):
    circuit, initial = ti_brickwork(RingSpec(n, 2), depth, rng)
    output = apply_circuit(circuit, initial)
    invariant, deviation = is_translation_invariant(output)
    assert invariant, deviation
    assert output.norm == pytest.approx(1.0)


def test_ti_brickwork_needs_an_even_ring(rng):
    with pytest.raises(DomainError):
        ti_brickwork(RingSpec(5, 2), 1, rng)


def test_lightcone_subcircuit_geometry(rng):
    spec = RingSpec(8, 2)
    cone = lightcone_subcircuit(random_brickwork(spec, 2, rng), 0)
    assert len(cone.gates) == 3
    assert cone.support() == {7, 0, 1, 2}
    deeper = lightcone_subcircuit(random_brickwork(spec, 3, rng), 0)
    assert [len(deeper.layer(layer)) for layer in range(3)] == [1, 2, 3]
    assert deeper.support() == {6, 7, 0, 1, 2, 3}
    shifted = lightcone_subcircuit(random_brickwork(spec, 2, rng), 3)
    assert shifted.support() == {2, 3, 4, 5}


def test_lightcone_subcircuit_needs_room_for_disjoint_cones(rng):
    spec = RingSpec(6, 2)
    with pytest.raises(DomainError):
        lightcone_subcircuit(random_brickwork(spec, 3, rng), 0)
    assert lightcone_subcircuit(BrickworkCircuit(spec, 1), 0).gates == ()


@pytest.mark.parametrize("n, depth, expected", [
    (8, 1, ((0, 3, 6), True)),
    (6, 1, ((0, 3), True)),
    (10, 2, ((0, 5), True)),
    (12, 2, ((0, 5), False)),
    (6, 2, ((0,), False)),
    (4, 0, ((0, 1, 2, 3), True)),
])
def test_cut_positions(n, depth, expected):
    assert cut_positions(n, depth) == expected


def test_cut_state_needs_a_translation_invariant_input(rng):
    spec = RingSpec(6, 2)
    circuit, _ = ti_brickwork(spec, 1, rng)
    with pytest.raises(PreconditionError) as info:
        cut_state(circuit, _random_state(spec, rng))
    assert info.value.deviation > 1e-8


@pytest.mark.parametrize("n, depth", [(6, 1), (8, 1), (8, 2), (10, 1), (10, 2), (12, 2)])
def test_block_factorization_of_ti_circuit_outputs(n, depth, rng):
    spec = RingSpec(n, 2)
    circuit, initial = ti_brickwork(spec, depth, rng)
    factorization = block_factorization(circuit, apply_circuit(circuit, initial))
    assert factorization.passed
    assert len(factorization.pieces) == len(factorization.cuts)
    assert sorted(site for sites, _ in factorization.pieces for site in sites) == list(range(n))
    assert factorization.min_purity == pytest.approx(1.0, abs=1e-9)
    if factorization.block is not None:
        assert factorization.block.spec.n == 2 * depth + 1


def test_block_factorization_at_depth_zero_splits_every_site(rng):
    spec = RingSpec(6, 2)
    circuit, initial = ti_brickwork(spec, 0, rng)
    factorization = block_factorization(circuit, apply_circuit(circuit, initial))
    assert factorization.passed
    assert [sites for sites, _ in factorization.pieces] == [(1,), (2,), (3,), (4,), (5,), (0,)]


@pytest.mark.parametrize("n, depth", [(8, 1), (10, 2), (12, 2)])
def test_cut_state_is_a_product_across_every_cut(n, depth, rng):
    spec = RingSpec(n, 2)
    circuit, initial = ti_brickwork(spec, depth, rng)
    cut = cut_state(circuit, apply_circuit(circuit, initial))
    window = default_split_window(n, depth)
    for x in cut.cuts:
        assert cut_split_error(cut.state, x, window) < 1e-10


def test_cut_split_error_detects_entanglement():
    spec = RingSpec(4, 2)
    bell = np.zeros(16, dtype=complex)
    bell[0] = bell[6] = 1 / np.sqrt(2)     # sites 1 and 2 entangled
    state = StateVector(spec, bell)
    assert cut_split_error(state, 1, 1) > 0.1
    assert cut_split_error(state, 2, 1) < 1e-12
    with pytest.raises(DomainError):
        cut_split_error(state, 0, 3)


@pytest.mark.parametrize("matrix, rank", [(SWAP, 4), (np.eye(4), 1), (CNOT, 2)])
def test_gate_mpo_schmidt_ranks(matrix, rank):
    pair = gate_mpo_decompose(matrix)
    assert pair.schmidt_rank == rank
    assert pair.bond_dim == 4
    np.testing.assert_allclose(pair.contract(), matrix, atol=1e-12)


def test_gate_mpo_of_haar_gate_reconstructs(rng):
    gate = TwoSiteGate(0, 0, haar_unitary(9, rng))
    pair = gate_mpo_decompose(gate)
    assert pair.left_tensor.shape == (3, 3, 9)
    assert pair.right_tensor.shape == (9, 3, 3)
    np.testing.assert_allclose(pair.contract(), gate.matrix, atol=1e-12)
    with pytest.raises(DomainError):
        gate_mpo_decompose(np.eye(3))


def test_circuit_json_preserves_gates_bit_for_bit(rng):
    circuit = random_brickwork(RingSpec(6, 2), 3, rng)
    restored = circuit_from_json(circuit_to_json(circuit))
    assert restored.depth == circuit.depth and restored.spec.n == 6
    for original, copy in zip(circuit.gates, restored.gates):
        assert (original.layer, original.left_site) == (copy.layer, copy.left_site)
        np.testing.assert_array_equal(original.matrix, copy.matrix)


def test_circuit_json_rejects_malformed_documents():
    with pytest.raises(StructuralError):
        circuit_from_json("not json")
    with pytest.raises(StructuralError):
        circuit_from_json(json.dumps({"n": 4, "q": 2}))
    with pytest.raises(DomainError):
        circuit_from_json(json.dumps({"n": 4, "q": 1, "depth": 0, "gates": []}))


def test_ti_state_dim_bound():
    assert ti_state_dim_bound(6, 0, 2) == hpoly_dim(6, 2)
    assert ti_state_dim_bound(8, 1, 2) == sre_dim_bound(8, 1, 2)
    assert ti_state_dim_bound(6, 3, 2) == necklace_count(6, 2)


def test_ti_circuit_span_rank_at_depth_zero():
    estimate = ti_circuit_span_rank(RingSpec(6, 2), 0, seed=5)
    assert estimate.gram_rank == hpoly_dim(6, 2)
    assert estimate.passed


@pytest.mark.parametrize("n, depth", [(6, 1), (6, 2), (8, 1)])
def test_ti_circuit_span_rank_stays_below_ceilings(n, depth):
    estimate = ti_circuit_span_rank(RingSpec(n, 2), depth, seed=5)
    assert estimate.passed
    assert estimate.gram_rank <= necklace_count(n, 2)


def test_ti_circuit_span_rank_is_nondecreasing_in_depth():
    spec = RingSpec(8, 2)
    ranks = [ti_circuit_span_rank(spec, depth, seed=0).gram_rank for depth in range(4)]
    assert ranks[0] == hpoly_dim(8, 2)
    assert all(later >= earlier for earlier, later in zip(ranks, ranks[1:]))
    assert ranks[-1] <= necklace_count(8, 2)

