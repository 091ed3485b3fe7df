"""
Tests for E_G, product-overlap maximization, graph states and the named states.
"""
import math

import numpy as np
import pytest

from prodtest.errors import CapacityError, InvalidArgumentError
from prodtest.services.haar_sampling import capital_gamma_max, gamma_max_per_cut, random_pure_state
from prodtest.services.measures import (
    Graph,
    all_graphs,
    bp_distance_lower_bound,
    bp_state,
    distance_to_bp,
    generalized_geometric_measure,
    ghz_state,
    graph_state,
    is_connected,
    max_product_overlap,
    measure_report,
    product_state,
    random_local_unitaries,
    schmidt_state,
    w_state,
)
from prodtest.services.tensor_core import Bipartition, apply_local, basis_state

PATH4 = Graph(4, frozenset({(0, 1), (1, 2), (2, 3)}))


class TestGeometricMeasure:
    def test_ghz(self):
        assert generalized_geometric_measure(ghz_state(3)) == pytest.approx(0.5)

    def test_w(self):
        assert generalized_geometric_measure(w_state(3)) == pytest.approx(1 / 3)

    def test_product(self):
        assert generalized_geometric_measure(product_state([[1, 1], [1, 0], [1, -1j]])) == pytest.approx(0.0, abs=1e-12)

    def test_distance(self):
        assert distance_to_bp(ghz_state(3)) == pytest.approx(math.sqrt(0.5))

    def test_single_party(self):
        with pytest.raises(InvalidArgumentError):
            generalized_geometric_measure(basis_state(1, 2, 0))

    def test_qutrit_ghz(self):
        assert generalized_geometric_measure(ghz_state(2, d=3)) == pytest.approx(2 / 3)

    def test_schmidt_state(self):
        assert capital_gamma_max(schmidt_state([0.8, 0.6])) == pytest.approx(0.8)

    def test_local_unitaries_leave_measure_unchanged(self, rng):
        psi = random_pure_state(3, 2, rng)
        moved = apply_local(psi, random_local_unitaries(3, 2, rng))
        assert generalized_geometric_measure(moved) == pytest.approx(generalized_geometric_measure(psi), abs=1e-10)


def test_random_local_unitaries_are_unitary(rng):
    for u in random_local_unitaries(3, 3, rng):
        assert np.allclose(u @ u.conj().T, np.eye(3))


class TestProductOverlap:
    def test_matches_schmidt_maximum(self, rng):
        psi = random_pure_state(4, 2, rng)
        for parties, gamma in gamma_max_per_cut(psi).items():
            s = Bipartition(4, frozenset(parties))
            assert max_product_overlap(psi, s, restarts=5, rng=rng) == pytest.approx(gamma, abs=1e-6)

    def test_needs_nontrivial_cut(self, rng):
        with pytest.raises(InvalidArgumentError):
            max_product_overlap(ghz_state(3), Bipartition(3, frozenset()), rng=rng)

    def test_needs_restarts(self, rng):
        with pytest.raises(InvalidArgumentError):
            max_product_overlap(ghz_state(3), Bipartition(3, frozenset({0})), restarts=0, rng=rng)


def test_distance_to_given_bp_state_respects_floor(rng):
    psi = random_pure_state(3, 2, rng)
    for _ in range(10):
        phi = bp_state([0], random_pure_state(1, 2, rng), random_pure_state(2, 2, rng))
        check = bp_distance_lower_bound(psi, phi)
        assert check.distance >= check.lower_bound - 1e-9


def test_bp_state_places_factors():
    psi = bp_state([1], basis_state(1, 2, 1), basis_state(2, 2, 0))
    assert np.allclose(psi.amplitudes, basis_state(3, 2, 2).amplitudes)


def test_bp_state_rejects_wrong_member_count():
    with pytest.raises(InvalidArgumentError):
        bp_state([0, 1], basis_state(1, 2, 0), basis_state(2, 2, 0))


class TestGraphs:
    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            Graph(3, frozenset({(1, 1)}))
        with pytest.raises(InvalidArgumentError):
            Graph(3, frozenset({(0, 3)}))
        with pytest.raises(InvalidArgumentError):
            Graph(0, frozenset())

    def test_edges_are_undirected(self):
        assert Graph(2, frozenset({(1, 0)})) == Graph(2, frozenset({(0, 1)}))

    def test_connected_graph_state(self):
        assert is_connected(PATH4)
        assert generalized_geometric_measure(graph_state(PATH4)) == pytest.approx(0.5)

    def test_disconnected_graph_state_is_bp(self):
        g = Graph(4, frozenset({(0, 1), (2, 3)}))
        assert not is_connected(g)
        assert generalized_geometric_measure(graph_state(g)) == pytest.approx(0.0, abs=1e-12)

    def test_enumeration(self):
        graphs = list(all_graphs(3))
        assert len(graphs) == 8
        assert sum(is_connected(g) for g in graphs) == 4

    def test_connectivity_decides_genuine_entanglement(self):
        for g in all_graphs(4):
            e_g = generalized_geometric_measure(graph_state(g))
            assert (e_g > 1e-9) == is_connected(g)

    def test_cap(self):
        with pytest.raises(CapacityError):
            graph_state(Graph(13, frozenset()))


class TestMeasureReport:
    def test_ghz(self):
        report = measure_report(ghz_state(3))
        assert set(report.gamma_max_per_cut) == {"0", "0,1", "0,2"}
        assert report.E_G == pytest.approx(0.5)
        assert report.distance_to_bp == pytest.approx(math.sqrt(0.5))
        assert report.overlap_per_cut is None
        assert report.connected is None

    def test_overlaps_with_restarts(self, rng):
        report = measure_report(w_state(3), restarts=3, rng=rng, connected=None)
        for key, value in report.overlap_per_cut.items():
            assert value == pytest.approx(report.gamma_max_per_cut[key], abs=1e-6)
