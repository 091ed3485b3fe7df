"""
Tests for symmetric-group enumeration, copy-permutation unitaries and symmetric projectors.
"""
import math

import numpy as np
import pytest

from prodtest.errors import CapacityError, InvalidArgumentError
from prodtest.services.permutations import (
    Permutation,
    compose,
    copy_permutation_matrix,
    copy_permutation_unitary,
    cycle_histogram,
    cycle_number,
    enumerate_group,
    from_cycles,
    identity_permutation,
    inverse,
    permutation_matrix,
    permutation_unitary,
    sym_dimension,
    sym_projector,
    sym_projector_haar_mc,
    unitary_trace,
)
from prodtest.services.tensor_core import basis_state


class TestPermutation:
    def test_from_cycles_is_one_based(self):
        alpha = from_cycles(3, [(1, 2, 3)])
        assert alpha.image == (1, 2, 0)
        assert alpha.cycle_notation() == "(1 2 3)"

    def test_fixed_points_count_as_cycles(self):
        alpha = from_cycles(4, [(1, 3)])
        assert cycle_number(alpha) == 3
        assert alpha.cycle_decomposition() == [(0, 2), (1,), (3,)]

    def test_not_a_bijection(self):
        with pytest.raises(InvalidArgumentError):
            Permutation((0, 0, 1))

    def test_overlapping_cycles(self):
        with pytest.raises(InvalidArgumentError):
            from_cycles(3, [(1, 2), (2, 3)])

    def test_inverse_and_identity(self):
        for alpha in enumerate_group(4):
            assert compose(alpha, inverse(alpha)) == identity_permutation(4)


def test_group_size_and_order():
    group = enumerate_group(4)
    assert len(group) == 24
    assert group[0] == identity_permutation(4)
    assert list(group) == sorted(group, key=lambda p: p.image)


def test_enumeration_cap():
    with pytest.raises(CapacityError):
        enumerate_group(9)


@pytest.mark.parametrize("k, expected", [(3, {1: 2, 2: 3, 3: 1}), (4, {1: 6, 2: 11, 3: 6, 4: 1})])
def test_cycle_histogram_is_stirling(k, expected):
    assert cycle_histogram(k) == expected


@pytest.mark.parametrize("d", [2, 3])
def test_trace_is_d_to_cycle_number(d):
    for k in range(1, 5):
        for alpha in enumerate_group(k):
            assert unitary_trace(alpha, d) == d ** cycle_number(alpha)
            assert permutation_matrix(alpha, d).diagonal().sum() == d ** cycle_number(alpha)


def test_swap_moves_tensor_factors():
    swap = permutation_unitary(from_cycles(2, [(1, 2)]), 2).entries
    assert np.allclose(swap @ basis_state(2, 2, 1).amplitudes, basis_state(2, 2, 2).amplitudes)


def test_unitaries_form_a_representation():
    group = enumerate_group(3)
    for alpha in group:
        for beta in group:
            product = permutation_matrix(alpha, 2) @ permutation_matrix(beta, 2)
            assert (product != permutation_matrix(compose(alpha, beta), 2)).nnz == 0


def test_three_cycle_action():
    # U_alpha |x_1 x_2 x_3> = |x_{alpha^-1(1)} x_{alpha^-1(2)} x_{alpha^-1(3)}>
    alpha = from_cycles(3, [(1, 2, 3)])
    u = permutation_unitary(alpha, 2).entries
    assert np.allclose(u @ basis_state(3, 2, 0b100).amplitudes, basis_state(3, 2, 0b010).amplitudes)


def test_copy_permutation_with_equal_parties_is_global():
    for alpha in enumerate_group(2):
        local = copy_permutation_matrix([alpha, alpha], 2)
        assert (local != permutation_matrix(alpha, 4)).nnz == 0


def test_copy_permutation_rejects_mixed_degrees():
    with pytest.raises(InvalidArgumentError):
        copy_permutation_matrix([identity_permutation(2), identity_permutation(3)], 2)


@pytest.mark.parametrize("k, d", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_sym_projector(k, d):
    p = sym_projector(k, d).entries
    assert np.allclose(p @ p, p)
    assert np.allclose(p, p.T)
    assert np.trace(p).real == pytest.approx(sym_dimension(k, d))
    assert sym_dimension(k, d) == math.comb(d + k - 1, k)


def test_sym_projector_of_one_dimensional_space():
    assert np.allclose(sym_projector(3, 1).entries, [[1.0]])


def test_haar_moment_converges_to_projector():
    estimate = sym_projector_haar_mc(2, 2, 100_000, seed=5).entries
    assert np.linalg.norm(estimate - sym_projector(2, 2).entries) <= 0.05


def test_haar_moment_needs_samples():
    with pytest.raises(InvalidArgumentError):
        sym_projector_haar_mc(2, 2, 0)


def test_copy_permutation_unitary_swaps_one_party():
    # two parties, two copies: swap the copies of party 0 only
    swap, keep = from_cycles(2, [(1, 2)]), identity_permutation(2)
    u = copy_permutation_unitary([swap, keep], 2).entries
    assert np.allclose(u @ u.conj().T, np.eye(16))
    assert np.trace(u).real == pytest.approx(2 ** (cycle_number(swap) + cycle_number(keep)))
