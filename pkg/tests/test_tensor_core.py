"""
Unit tests for the tensor core: states, operators, leg permutations, Schmidt data.
"""
import numpy as np
import pytest

from prodtest.errors import CapacityError, DimensionMismatchError, InvalidArgumentError, InvalidStateError
from prodtest.services.tensor_core import (
    Bipartition,
    ComplexOperator,
    DensityOperator,
    PureState,
    apply_local,
    basis_state,
    check_dimension,
    identity,
    mixture,
    overlap,
    permute_legs,
    permute_vector_legs,
    pure_trace_distance,
    purity,
    reduced_density,
    regroup,
    schmidt_coefficients,
    tensor,
    trace_distance,
    unregroup,
)

BELL = PureState.from_vector([1, 0, 0, 1], 2, 2)


def _random_state(n, d, rng):
    return PureState.from_vector(rng.standard_normal(d ** n) + 1j * rng.standard_normal(d ** n), n, d)


class TestPureState:
    def test_rejects_unnormalized(self):
        with pytest.raises(InvalidStateError):
            PureState(n=1, d=2, amplitudes=np.array([1.0, 1.0]))

    def test_rejects_wrong_length(self):
        with pytest.raises(DimensionMismatchError):
            PureState(n=2, d=2, amplitudes=np.array([1.0, 0.0]))

    def test_from_vector_normalizes(self):
        psi = PureState.from_vector([3, 4], 1, 2)
        assert np.allclose(psi.amplitudes, [0.6, 0.8])

    def test_zero_vector(self):
        with pytest.raises(InvalidStateError):
            PureState.from_vector([0, 0], 1, 2)

    def test_amplitudes_are_read_only(self):
        with pytest.raises(ValueError):
            BELL.amplitudes[0] = 0.0

    def test_capacity(self):
        with pytest.raises(CapacityError):
            check_dimension(2 ** 30)


def test_basis_state_party_zero_is_most_significant():
    psi = basis_state(2, 2, 2)  # |10>
    m = regroup(psi, Bipartition(2, frozenset({0})))
    assert np.allclose(m, [[0, 0], [1, 0]])


def test_bipartition():
    s = Bipartition(3, frozenset({0, 2}))
    assert s.nontrivial
    assert s.parties == (0, 2)
    assert s.complement().parties == (1,)
    assert not Bipartition(3, frozenset()).nontrivial
    with pytest.raises(InvalidArgumentError):
        Bipartition(2, frozenset({2}))


def test_permute_vector_legs_swaps_digits():
    vec = basis_state(2, 2, 1).amplitudes  # |01>
    assert np.allclose(permute_vector_legs(vec, 2, [1, 0]), basis_state(2, 2, 2).amplitudes)


def test_permute_legs_reorders_kron_factors(rng):
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal((2, 2))
    assert np.allclose(permute_legs(np.kron(a, b), 2, [1, 0]), np.kron(b, a))


def test_permute_legs_mixed_dimensions(rng):
    a = rng.standard_normal((2, 2))
    b = rng.standard_normal((3, 3))
    assert np.allclose(permute_legs(np.kron(a, b), [2, 3], [1, 0]), np.kron(b, a))


def test_permute_legs_rejects_bad_order():
    with pytest.raises(InvalidArgumentError):
        permute_legs(np.eye(4), 2, [0, 0])


def test_schmidt_coefficients_of_bell():
    assert np.allclose(schmidt_coefficients(BELL, Bipartition(2, frozenset({0}))), [2 ** -0.5, 2 ** -0.5])


def test_reduced_density_and_purity():
    rho = reduced_density(BELL, Bipartition(2, frozenset({1})))
    assert np.allclose(rho.entries, np.eye(2) / 2)
    assert purity(rho) == pytest.approx(0.5)


def test_unregroup_inverts_regroup(rng):
    psi = _random_state(3, 2, rng)
    s = Bipartition(3, frozenset({1}))
    assert np.allclose(unregroup(regroup(psi, s), s, 2).amplitudes, psi.amplitudes)


class TestDensityOperator:
    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidStateError):
            DensityOperator(np.array([[0.5, 1.0], [0.0, 0.5]]))

    def test_rejects_bad_trace(self):
        with pytest.raises(InvalidStateError):
            DensityOperator(np.eye(2))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(InvalidStateError):
            DensityOperator(np.diag([1.5, -0.5]))

    def test_unnormalized_operator_allowed(self):
        op = DensityOperator(np.eye(2), is_state=False)
        assert op.dim == 2


def test_trace_distance_orthogonal_states():
    assert trace_distance(basis_state(1, 2, 0).density(), basis_state(1, 2, 1).density()) == pytest.approx(1.0)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_pure_trace_distance_matches_eigensolve(d, rng):
    for _ in range(100):
        psi, phi = _random_state(2, d, rng), _random_state(2, d, rng)
        assert pure_trace_distance(psi, phi) == pytest.approx(trace_distance(psi.density(), phi.density()), abs=1e-9)


def _random_density(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return DensityOperator((m + m.conj().T) / (2 * np.trace(m).real))


def test_trace_distance_triangle_inequality(rng):
    for _ in range(50):
        a, b, c = (_random_density(6, rng) for _ in range(3))
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12
        assert 0.0 <= trace_distance(a, b) <= 1.0 + 1e-12


def test_tensor_kinds():
    psi = tensor(basis_state(1, 2, 1), basis_state(1, 2, 0))
    assert psi.n == 2 and np.allclose(psi.amplitudes, basis_state(2, 2, 2).amplitudes)
    op = tensor(ComplexOperator(np.eye(2)), DensityOperator(np.eye(2) / 2))
    assert isinstance(op, ComplexOperator) and op.dim == 4
    with pytest.raises(DimensionMismatchError):
        tensor(basis_state(1, 2, 0), ComplexOperator(np.eye(2)))


def test_apply_local_flips_first_party():
    x = np.array([[0, 1], [1, 0]])
    moved = apply_local(basis_state(2, 2, 0), [x, np.eye(2)])
    assert np.allclose(moved.amplitudes, basis_state(2, 2, 2).amplitudes)


def test_apply_local_keeps_schmidt_coefficients(rng):
    psi = _random_state(3, 2, rng)
    q, _ = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    moved = apply_local(psi, [q, np.eye(2), q.conj().T])
    s = Bipartition(3, frozenset({0}))
    assert np.allclose(schmidt_coefficients(moved, s), schmidt_coefficients(psi, s))


def test_identity_tensor_identity():
    op = tensor(identity(2), identity(3))
    assert np.allclose(op.entries, np.eye(6))


def test_overlap_and_mixture(rng):
    psi = _random_state(2, 2, rng)
    assert overlap(psi, psi) == pytest.approx(1.0)
    assert overlap(basis_state(1, 2, 0), basis_state(1, 2, 1)) == 0
    mixed = mixture([basis_state(1, 2, 0).amplitudes, basis_state(1, 2, 1).amplitudes], [0.5, 0.5])
    assert np.allclose(mixed, np.eye(2) / 2)
    with pytest.raises(InvalidArgumentError):
        mixture([], [])


def test_trace_distance_to_maximally_mixed():
    maximally_mixed = DensityOperator(np.eye(2) / 2)
    assert trace_distance(maximally_mixed, basis_state(1, 2, 0).density()) == pytest.approx(0.5)
