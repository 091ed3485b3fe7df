"""
Tests for the swap test, product test and the MP / naive BP testers.
"""
import numpy as np
import pytest

from prodtest.errors import CapacityError, DimensionMismatchError, InvalidArgumentError, OracleExhaustedError
from prodtest.services.haar_sampling import random_pure_state, wilson_interval
from prodtest.services.measures import bell_state, bp_state, ghz_state, product_state, random_local_unitaries
from prodtest.services.tensor_core import apply_local, basis_state
from prodtest.services.testers import (
    StateOracle,
    bp_tester_naive,
    mp_tester,
    product_test,
    purity_expansion,
    swap_test,
    tester_trials,
    validate_partition,
)

SINGLETONS_3 = [[0], [1], [2]]


class TestSwapTest:
    """Testing that the swap test matches (1 + |<psi|phi>|^2)/2"""

    def test_identical_states(self, rng):
        psi = random_pure_state(2, 2, rng)
        assert swap_test(psi, psi) == pytest.approx(1.0)

    def test_orthogonal_states(self):
        assert swap_test(basis_state(1, 2, 0), basis_state(1, 2, 1)) == pytest.approx(0.5)

    def test_random_pairs(self, rng):
        for _ in range(10):
            psi, phi = random_pure_state(2, 3, rng), random_pure_state(2, 3, rng)
            expected = 0.5 * (1 + abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2)
            assert swap_test(psi, phi) == pytest.approx(expected, abs=1e-12)

    def test_sample_mode(self, rng):
        psi = random_pure_state(1, 2, rng)
        assert swap_test(psi, psi, mode="sample", rng=rng) is True

    def test_sample_mode_needs_rng(self, rng):
        psi = random_pure_state(1, 2, rng)
        with pytest.raises(InvalidArgumentError):
            swap_test(psi, psi, mode="sample")

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatchError):
            swap_test(random_pure_state(1, 2, rng), random_pure_state(2, 2, rng))


class TestProductTest:
    def test_bell(self):
        assert product_test(bell_state(), [[0], [1]]) == pytest.approx(0.75, abs=1e-9)

    def test_ghz_singletons(self):
        assert product_test(ghz_state(3), SINGLETONS_3) == pytest.approx(5 / 8)

    def test_ghz_two_blocks(self):
        assert product_test(ghz_state(3), [[0], [1, 2]]) == pytest.approx(3 / 4)

    def test_product_state_always_passes(self, rng):
        psi = product_state([rng.standard_normal(2) + 1j * rng.standard_normal(2) for _ in range(4)])
        assert product_test(psi, [[0], [1], [2], [3]]) == pytest.approx(1.0, abs=1e-12)

    def test_single_block_always_passes(self, rng):
        assert product_test(random_pure_state(3, 2, rng), [[0, 1, 2]]) == pytest.approx(1.0)

    @pytest.mark.parametrize("parts", [[[0], [1], [2], [3]], [[0, 1], [2, 3]], [[0, 3], [1], [2]]])
    def test_purity_expansion(self, parts, rng):
        psi = random_pure_state(4, 2, rng)
        assert product_test(psi, parts) == pytest.approx(purity_expansion(psi, parts), abs=1e-12)

    def test_sampled_product_state_accepts(self, rng):
        psi = product_state([[1, 0], [1, 1], [1, 1j]])
        assert all(product_test(psi, SINGLETONS_3, mode="sample", rng=rng) for _ in range(20))

    @pytest.mark.parametrize("parts", [[[0], [1], [2], [3]], [[0, 2], [1, 3]], [[0], [1, 2, 3]]])
    def test_same_local_unitary_on_every_party(self, parts, rng):
        psi = random_pure_state(4, 2, rng)
        (u,) = random_local_unitaries(1, 2, rng)
        rotated = apply_local(psi, [u] * 4)
        assert product_test(rotated, parts) == pytest.approx(product_test(psi, parts), abs=1e-12)

    def test_independent_local_unitaries(self, rng):
        psi = random_pure_state(3, 3, rng)
        rotated = apply_local(psi, random_local_unitaries(3, 3, rng))
        assert product_test(rotated, SINGLETONS_3) == pytest.approx(product_test(psi, SINGLETONS_3), abs=1e-12)

    def test_sample_frequency_within_wilson_interval(self, rng):
        trials = 10_000
        accepted = sum(product_test(ghz_state(3), SINGLETONS_3, mode="sample", rng=rng) for _ in range(trials))
        low, high = wilson_interval(accepted, trials, confidence=0.999)
        assert low <= 5 / 8 <= high

    @pytest.mark.parametrize("parts", [[[0], [0, 1, 2]], [[0], [1]], [[0], [], [1, 2]], []])
    def test_invalid_partition(self, parts):
        with pytest.raises(InvalidArgumentError):
            validate_partition(parts, 3)


class TestOracle:
    def test_counts_copies(self):
        oracle = StateOracle(bell_state())
        oracle.draw(2)
        oracle.draw(3)
        assert oracle.copies_used == 5

    def test_budget(self):
        oracle = StateOracle(bell_state(), budget=3)
        oracle.draw(2)
        with pytest.raises(OracleExhaustedError):
            oracle.draw(2)


class TestMpTester:
    def test_accepts_product_states(self, rng):
        psi = product_state([[1, 0], [1, 1], [0, 1]])
        outcome = mp_tester(StateOracle(psi), 20, rng)
        assert outcome.accepted
        assert outcome.copies_used == 40
        assert len(outcome.transcript) == 20
        assert outcome.accept_probability == pytest.approx(1.0)

    def test_rejects_ghz(self, rng):
        outcome = mp_tester(StateOracle(ghz_state(3)), 50, rng)
        assert not outcome.accepted
        assert any(not r.accepted for r in outcome.transcript)
        assert outcome.accept_probability == pytest.approx(0.625 ** 50)
        assert outcome.cut_accept_probabilities == {"singletons": pytest.approx(0.625)}

    def test_reps_must_be_positive(self, rng):
        with pytest.raises(InvalidArgumentError):
            mp_tester(StateOracle(ghz_state(3)), 0, rng)


class TestBpTester:
    def test_accepts_zero_ghz(self, rng):
        psi = bp_state([0], basis_state(1, 2, 0), ghz_state(3))
        outcome = bp_tester_naive(StateOracle(psi), 5, rng)
        assert outcome.accepted
        assert outcome.accept_probability == pytest.approx(1.0)
        assert outcome.union_bound == 1.0
        assert outcome.cut_accept_probabilities["0"] == pytest.approx(1.0)
        assert len(outcome.cut_accept_probabilities) == 7
        assert outcome.copies_used == 7 * 5 * 2

    def test_ghz_cut_probabilities(self, rng):
        outcome = bp_tester_naive(StateOracle(ghz_state(3)), 30, rng)
        assert set(outcome.cut_accept_probabilities) == {"0", "0,1", "0,2"}
        assert all(p == pytest.approx(0.75) for p in outcome.cut_accept_probabilities.values())
        assert outcome.union_bound == pytest.approx(3 * 0.75 ** 30)
        assert not outcome.accepted

    def test_needs_two_parties(self, rng):
        with pytest.raises(InvalidArgumentError):
            bp_tester_naive(StateOracle(basis_state(1, 2, 0)), 1, rng)

    def test_party_cap(self, rng):
        with pytest.raises(CapacityError):
            bp_tester_naive(StateOracle(ghz_state(11)), 1, rng)


def test_trials_are_reproducible():
    first = tester_trials(ghz_state(3), "mp", reps=2, trials=30, seed=9)
    assert first == tester_trials(ghz_state(3), "mp", reps=2, trials=30, seed=9)
    assert 0 < sum(first) < 30


def test_trials_mode():
    with pytest.raises(InvalidArgumentError):
        tester_trials(ghz_state(3), "other", reps=1, trials=1)


@pytest.mark.slow
def test_ghz_rejected_in_almost_all_trials():
    accepted = tester_trials(ghz_state(3), "mp", reps=50, trials=200, seed=2024)
    assert sum(accepted) <= 2


@pytest.mark.slow
def test_bp_rejects_ghz_with_sixty_runs_per_cut():
    accepted = tester_trials(ghz_state(3), "bp", reps=60, trials=100, seed=4242)
    assert sum(accepted) <= 5
