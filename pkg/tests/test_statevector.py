import numpy as np
import pytest

from translation_lre.combinatorics import momentum_sector_dim, necklace_count
from translation_lre.errors import DomainError, ResourceLimitError
from translation_lre.statevector import (
    DensityOperator,
    RingSpec,
    StateVector,
    basis_state,
    gram_rank,
    gram_spectrum,
    momentum_projector,
    product_state,
    purity,
    random_density_operator,
    random_projector,
    rank_from_spectrum,
    reduced_density_matrix,
    rho_ti,
    sector_projectors,
    tails_inequality_check,
    tails_lemma_bound,
    trace_distance,
    translate,
    translation_indices,
    translation_matrix,
)


def _random_state(spec, rng):
    return StateVector(spec, rng.standard_normal(spec.dim) + 1j * rng.standard_normal(spec.dim)).normalized()


def test_ring_spec_rejects_degenerate_rings():
    with pytest.raises(DomainError):
        RingSpec(0, 2)
    with pytest.raises(DomainError):
        RingSpec(3, 1)


def test_caps_raise_before_allocating():
    with pytest.raises(ResourceLimitError) as info:
        RingSpec(20, 2, max_amplitudes=2 ** 10).check_state_cap()
    assert info.value.cap_name == "max_amplitudes"
    with pytest.raises(ResourceLimitError):
        momentum_projector(RingSpec(3, 2, max_operator_dim=4), 0)


def test_state_vector_validation():
    spec = RingSpec(2, 2)
    with pytest.raises(DomainError):
        StateVector(spec, np.ones(3))
    with pytest.raises(DomainError):
        StateVector(spec, np.array([1, np.nan, 0, 0]))
    with pytest.raises(DomainError):
        StateVector(spec, np.zeros(4)).normalized()


def test_translate_moves_digits_to_the_next_site():
    spec = RingSpec(3, 2)
    shifted = translate(basis_state(spec, [1, 0, 0]), 1)
    np.testing.assert_allclose(shifted.amplitudes, basis_state(spec, [0, 1, 0]).amplitudes)
    shifted = translate(basis_state(spec, [0, 0, 1]), 1)
    np.testing.assert_allclose(shifted.amplitudes, basis_state(spec, [1, 0, 0]).amplitudes)


@pytest.mark.parametrize("n, q, x", [(4, 2, 1), (4, 2, 3), (3, 3, 2), (5, 2, 7)])
def test_translation_matrix_and_index_map_agree(n, q, x, rng):
    spec = RingSpec(n, q)
    state = _random_state(spec, rng)
    expected = translate(state, x).amplitudes
    np.testing.assert_allclose(translation_matrix(spec, x) @ state.amplitudes, expected)
    np.testing.assert_allclose(state.amplitudes[translation_indices(spec, x)], expected)


def test_translation_group_structure(rng):
    spec = RingSpec(5, 2)
    state = _random_state(spec, rng)
    np.testing.assert_allclose(translate(state, 5).amplitudes, state.amplitudes)
    np.testing.assert_allclose(translate(translate(state, 2), -2).amplitudes, state.amplitudes)
    np.testing.assert_allclose(translate(translate(state, 2), 1).amplitudes, translate(state, 3).amplitudes)


@pytest.mark.parametrize("n, q", [(1, 2), (2, 2), (4, 2), (6, 2), (3, 3), (4, 3)])
def test_momentum_projectors(n, q):
    spec = RingSpec(n, q)
    projectors = sector_projectors(spec)
    total = np.zeros((spec.dim, spec.dim), dtype=complex)
    shift = translation_matrix(spec, 1)
    for k, projector in enumerate(projectors):
        assert projector.projector_deviation() < 1e-10
        assert projector.trace == pytest.approx(momentum_sector_dim(n, q, k), abs=1e-9)
        np.testing.assert_allclose(shift @ projector.matrix,
                                   np.exp(2j * np.pi * k / n) * projector.matrix, atol=1e-12)
        total += projector.matrix
    np.testing.assert_allclose(total, np.eye(spec.dim), atol=1e-12)
    assert projectors[0].rank() == necklace_count(n, q)


def test_rank_of_zero_momentum_projector_on_four_qubits():
    assert momentum_projector(RingSpec(4, 2), 0).rank() == 6


def test_rho_ti_is_normalized():
    rho = rho_ti(RingSpec(5, 2))
    assert rho.trace == pytest.approx(1.0)
    rho.check_positive()


def test_trace_distance_rho_ti_against_maximally_mixed():
    spec = RingSpec(2, 2)
    mixed = DensityOperator(spec, np.eye(4) / 4)
    assert trace_distance(rho_ti(spec), mixed) == pytest.approx(0.25)
    assert trace_distance(mixed, mixed) == pytest.approx(0.0, abs=1e-15)


def test_trace_distance_of_orthogonal_pure_states():
    spec = RingSpec(2, 2)
    a = DensityOperator(spec, np.diag([1, 0, 0, 0]).astype(complex))
    b = DensityOperator(spec, np.diag([0, 0, 0, 1]).astype(complex))
    assert trace_distance(a, b) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        trace_distance(a, rho_ti(RingSpec(3, 2)))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_trace_distance_is_a_bounded_metric(n, rng):
    spec = RingSpec(n, 2)
    for _ in range(10):
        a, b, c = (random_density_operator(spec, rng, rank=int(rng.integers(1, spec.dim + 1))) for _ in range(3))
        ab = trace_distance(a, b)
        assert 0.0 <= ab <= 1.0
        assert ab == pytest.approx(trace_distance(b, a), abs=1e-12)
        assert ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12
        assert trace_distance(a, a) == pytest.approx(0.0, abs=1e-12)


def test_opposite_momentum_projectors_conjugate_real_observables(rng):
    spec = RingSpec(5, 2)
    observable = rng.standard_normal((spec.dim, spec.dim))
    for k_index in range(1, 5):
        value = momentum_projector(spec, k_index).expectation(observable)
        mirrored = momentum_projector(spec, 5 - k_index).expectation(observable)
        assert mirrored == pytest.approx(np.conj(value), abs=1e-10)
        assert abs(value.imag) > 1e-6


def test_density_operator_validation():
    spec = RingSpec(1, 2)
    with pytest.raises(DomainError):
        DensityOperator(spec, np.array([[1, 1], [0, 1]], dtype=complex))
    with pytest.raises(DomainError):
        DensityOperator(spec, np.eye(3))
    with pytest.raises(DomainError, match="negative eigenvalue"):
        DensityOperator(spec, np.diag([1.5, -0.5]))
    with pytest.raises(DomainError, match="negative eigenvalue"):
        DensityOperator(spec, np.diag([1.0, -1e-9]))
    assert DensityOperator(spec, np.diag([1.0, -1e-12])).trace == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_tails_inequality_on_random_instances(n, rng):
    spec = RingSpec(n, 2)
    for _ in range(10):
        rho = random_density_operator(spec, rng)
        sigma = random_density_operator(spec, rng, rank=1)
        projector = random_projector(spec, int(rng.integers(0, spec.dim + 1)), rng)
        check = tails_inequality_check(rho, sigma, projector)
        assert check.holds
        assert check.margin == pytest.approx(check.lhs - check.rhs)


def test_tails_check_rejects_non_projector():
    spec = RingSpec(1, 2)
    rho = DensityOperator(spec, np.eye(2) / 2)
    with pytest.raises(DomainError):
        tails_inequality_check(rho, rho, DensityOperator(spec, np.eye(2) / 2))


def test_tails_inequality_saturates_on_orthogonal_support():
    spec = RingSpec(1, 2)
    rho = DensityOperator(spec, np.diag([1, 0]).astype(complex))
    sigma = DensityOperator(spec, np.diag([0, 1]).astype(complex))
    projector = DensityOperator(spec, np.diag([0, 1]).astype(complex))
    check = tails_inequality_check(rho, sigma, projector)
    assert check.lhs == pytest.approx(1.0)
    assert check.rhs == pytest.approx(1.0)
    assert check.holds


def test_tails_lemma_bound():
    assert tails_lemma_bound(0.1, 0.2) == pytest.approx(0.79)


def test_random_projector_rank(rng):
    spec = RingSpec(3, 2)
    for rank in (0, 1, 5, 8):
        projector = random_projector(spec, rank, rng)
        assert projector.trace == pytest.approx(rank)
        assert projector.projector_deviation() < 1e-10
    with pytest.raises(DomainError):
        random_projector(spec, 9, rng)


def test_reduced_density_matrix_purity():
    spec = RingSpec(3, 2)
    plus = np.array([1, 1]) / np.sqrt(2)
    product = product_state(spec, plus)
    assert purity(reduced_density_matrix(product, [0, 2])) == pytest.approx(1.0)

    bell = np.zeros(8, dtype=complex)
    bell[0] = bell[5] = 1 / np.sqrt(2)      # (|0.0> + |1.1>) on sites 0 and 2, site 1 in |0>
    state = StateVector(spec, bell)
    assert purity(reduced_density_matrix(state, [0])) == pytest.approx(0.5)
    assert purity(reduced_density_matrix(state, [1])) == pytest.approx(1.0)
    assert purity(reduced_density_matrix(state, [0, 2])) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        reduced_density_matrix(state, [0, 3])


def test_gram_rank_of_low_rank_stack(rng):
    basis = rng.standard_normal((2, 16)) + 1j * rng.standard_normal((2, 16))
    stack = rng.standard_normal((10, 2)) @ basis
    assert gram_rank(stack) == 2
    assert gram_rank(stack.T) == 2
    assert gram_rank(np.zeros((3, 4))) == 0


def test_rank_from_spectrum_threshold():
    eigenvalues = np.array([1e-12, 1e-7, 1.0])
    assert rank_from_spectrum(eigenvalues, 1e-8) == 2
    assert rank_from_spectrum(eigenvalues, 1e-6) == 1
    spectrum = gram_spectrum(np.eye(3))
    np.testing.assert_allclose(spectrum, np.ones(3))
