"""
Tests for the rho/sigma ensembles, the two routes to F(k,n,d) and the bound chain.
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from prodtest.config.settings import settings
from prodtest.errors import CapacityError, InvalidArgumentError, InvalidStateError
from prodtest.models.schemas import GridPoint
from prodtest.services import ensembles as ens
from prodtest.services import tensor_core as tc
from prodtest.services.haar_sampling import GAMMA_MIN


def G(n, k, d):
    return GridPoint(n=n, k=k, d=d)


class TestFRoutes:
    """F(k,n,d) from explicit matrices against the cycle-number route"""

    def test_single_party(self):
        assert ens.f_trace(G(1, 2, 2)) == pytest.approx(3.0)
        assert ens.f_cycle_exact(G(1, 2, 2)) == 3

    def test_two_parties(self):
        assert ens.f_cycle_exact(G(2, 2, 2)) == Fraction(37, 4)
        assert ens.f_trace(G(2, 2, 2)) == pytest.approx(9.25, rel=1e-12)

    @pytest.mark.parametrize("n, k, d", [(1, 1, 2), (3, 1, 3), (2, 3, 2), (3, 2, 2), (1, 3, 3), (2, 2, 3), (4, 2, 2)])
    def test_routes_agree(self, n, k, d):
        g = G(n, k, d)
        assert ens.f_trace(g) == pytest.approx(ens.f_cycle(g), rel=1e-9)

    def test_k1_is_party_dimension(self):
        assert ens.f_cycle_exact(G(5, 1, 3)) == 3 ** 5

    def test_f_trace_cap(self):
        with pytest.raises(CapacityError):
            ens.f_trace(G(3, 3, 2))

    def test_f_cycle_limits(self):
        with pytest.raises(CapacityError):
            ens.f_cycle(G(21, 2, 2))
        with pytest.raises(CapacityError):
            ens.f_cycle(G(2, 7, 2))

    def test_f_below_upper_bound(self):
        for n in range(1, 8):
            for k in (1, 2, 3):
                g = G(n, k, 2)
                assert ens.f_cycle(g) <= ens.f_upper(g)


def test_triple_histogram_totals():
    for k in range(1, 5):
        hist = ens.triple_cycle_histogram(k)
        assert sum(hist.values()) == math.factorial(k) ** 3
    # alpha = delta = gamma = identity is the only triple with every cycle count maximal
    assert ens.triple_cycle_histogram(3)[(3, 3, 3, 3)] == 1


@pytest.mark.parametrize("n", [1, 3, 5])
def test_subset_pair_counts_enumeration_matches_multinomial(n):
    enumerated = ens.subset_pair_counts(n, enumerate_pairs=True)
    assert enumerated == ens.subset_pair_counts(n, enumerate_pairs=False)
    assert sum(enumerated.values()) == 4 ** n


@pytest.mark.parametrize("variant", ["intersect", "diagonal"])
@pytest.mark.parametrize("d", [2, 3])
def test_closed_form_matches_enumeration(variant, d):
    for n in range(1, 8):
        assert ens.st_enumeration(n, d, variant) == pytest.approx(ens.st_closed_form(n, d, variant), rel=1e-12)


def test_closed_form_rejects_unknown_variant():
    with pytest.raises(InvalidArgumentError):
        ens.st_closed_form(3, 2, "other")


class TestBinomialBounds:
    def test_small_case(self):
        binomial, lower, upper = ens.binom_and_bounds(4, 2)
        assert binomial == 10
        assert lower == pytest.approx(8.0)
        assert upper == pytest.approx(8.0 * math.e)

    def test_zero_base(self):
        assert ens.binom_and_bounds(0, 3) == (0, None, None)

    def test_chain_holds(self):
        for a in (1, 2, 7, 100, 12345, 10 ** 6):
            for b in range(1, 21):
                assert ens.binbounds_hold(a, b)

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            ens.binom_and_bounds(3, 0)


class TestEnsembles:
    def test_rho_purity(self):
        assert ens.purity_lower_bound(G(2, 2, 2)) <= 0.1
        traces = ens.ensemble_traces(G(2, 2, 2))
        assert traces.tr_rho_sq == pytest.approx(0.1)

    def test_rho_sigma_overlap_equals_rho_purity(self):
        for g in (G(2, 2, 2), G(3, 2, 2), G(2, 3, 2), G(2, 2, 3)):
            traces = ens.ensemble_traces(g)
            assert traces.tr_rho_sigma == pytest.approx(traces.tr_rho_sq, abs=1e-9)

    def test_distance_vanishes_for_one_copy(self):
        assert ens.exact_rho_sigma_distance(G(3, 1, 2)) == 0.0

    def test_single_party_sigma_is_rho(self):
        assert ens.exact_rho_sigma_distance(G(1, 3, 2)) == pytest.approx(0.0, abs=1e-12)

    def test_distance_positive_with_copies(self):
        assert ens.exact_rho_sigma_distance(G(2, 2, 2)) > 0.0

    def test_tau_is_a_state(self):
        tau = ens.tau_state(G(3, 2, 2), [0, 2])
        assert np.trace(tau.entries) == pytest.approx(1.0)

    def test_dense_cap(self):
        with pytest.raises(CapacityError):
            ens.rho_state(G(7, 2, 2))

    def test_sigma_prime_needs_two_parties(self):
        with pytest.raises(InvalidArgumentError):
            ens.sigma_state(G(1, 2, 2), include_trivial=False)

    @pytest.mark.parametrize("n", [2, 3])
    def test_sigma_prime_gap(self, n):
        assert ens.sigma_prime_gap(G(n, 2, 2)) <= 2.0 ** (-(n - 2)) + 1e-9

    @pytest.mark.parametrize("k, d1, d2", [(2, 2, 2), (2, 2, 3), (3, 2, 2)])
    def test_nesting(self, k, d1, d2):
        assert ens.nesting_residual(k, d1, d2) <= 1e-12


class TestBounds:
    def test_lemma3_value(self):
        # (2!/4)(1 - e^{-1} + 8 (3/4)^2)
        assert ens.lemma3_bound(G(2, 2, 2)) == pytest.approx(2.5660603, rel=1e-7)

    def test_log_bound_matches(self):
        for g in (G(2, 2, 2), G(5, 3, 2), G(10, 4, 3), G(40, 8, 2)):
            assert ens.lemma3_log_bound(g) == pytest.approx(math.log(ens.lemma3_bound(g)), rel=1e-10)

    def test_log_route_for_many_copies(self):
        g = G(200, 12, 2)
        assert ens.lemma3_bound(g) == pytest.approx(math.exp(ens.lemma3_log_bound(g)))

    def test_decay_exponent(self):
        assert ens.theorem_decay(100, 2) == pytest.approx(4.0 - 100 * 0.5 * math.log2(4.0 / 3.0))
        assert ens.theorem_decay(16, 1) < 0

    def test_decay_curve(self):
        points = ens.decay_curve([16, 1024, 2 ** 20])
        assert [p.k for p in points] == [1, 6, 2622]
        assert all(p.exponent < 0 for p in points)
        assert points[-1].log_bound < math.log(1e-6)

    def test_bound_decreases_in_n(self):
        values = [ens.lemma3_bound(G(n, 2, 2)) for n in range(10, 61, 10)]
        assert all(a > b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("n, k, d", [(1, 2, 2), (2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 3), (4, 1, 2)])
    def test_chain(self, n, k, d):
        g = G(n, k, d)
        traces = ens.ensemble_traces(g)
        d_sq = traces.trace_distance ** 2
        two_norm = ens.two_norm_bound(g, traces)
        fb = ens.f_bound(g, ens.f_cycle(g))
        assert d_sq <= two_norm + 1e-9
        assert two_norm <= fb + 1e-9
        assert fb <= ens.lemma3_bound(g) + 1e-9
        assert traces.tr_sigma_sq <= math.factorial(k) ** 4 * ens.f_cycle(g) / g.total_dim ** 2 * (1 + 1e-9)

    def test_f_upper_value(self):
        # 16/8 + 16 (3/4)^2
        assert ens.f_upper(G(2, 2, 2)) == pytest.approx(11.0, rel=1e-12)

    def test_f_upper_past_float_factorials(self):
        # (72!)^3 is far beyond the largest double; the first term vanishes
        assert ens.f_upper(G(1, 72, 2)) == pytest.approx(0.75 * 2.0 ** 72, rel=1e-9)
        assert ens.f_upper(G(400, 300, 2)) == math.inf

    def test_f_bound_log_route(self):
        g = G(1, 11, 2)
        kfact = math.factorial(11)
        expected = kfact / 4.0 * (1e3 * kfact ** 3 / 2 ** 11 - math.exp(-121 / 2))
        assert ens.f_bound(g, 1e3) == pytest.approx(expected, rel=1e-9)


class TestBoundReport:
    def test_exact_row(self):
        report = ens.bound_report(G(2, 2, 2))
        assert report.satisfied
        assert report.f_trace == pytest.approx(9.25)
        assert report.f_cycle == pytest.approx(9.25)
        assert report.D_squared == pytest.approx(report.exact_D ** 2)
        assert report.small_ratio_regime is False
        assert report.note == ""

    def test_one_copy_row(self):
        report = ens.bound_report(G(3, 1, 2))
        assert report.exact_D == 0.0
        assert report.satisfied

    def test_capacity_is_noted_not_raised(self):
        report = ens.bound_report(G(60, 2, 2), bound_only=True)
        assert report.exact_D is None and report.f_cycle is None
        assert "f_cycle" in report.note
        assert report.satisfied
        assert report.small_ratio_regime

    def test_row_order(self):
        row = ens.bound_report(G(1, 2, 2)).to_row()
        assert list(row)[:10] == ["n", "k", "d", "exact_D", "D_squared", "lemma3_bound", "f_trace", "f_cycle",
                                  "satisfied", "chain_satisfied"]

    def test_many_copies_bound_only(self):
        report = ens.bound_report(G(1, 72, 2), bound_only=True)
        assert report.f_cycle is None and report.f_bound is None
        assert report.f_upper == pytest.approx(0.75 * 2.0 ** 72, rel=1e-9)
        assert report.satisfied and report.chain_satisfied

    def test_satisfied_is_only_the_closed_form_check(self, monkeypatch):
        monkeypatch.setattr(ens, "f_upper", lambda g: 0.0)
        report = ens.bound_report(G(2, 2, 2))
        assert report.D_squared <= report.lemma3_bound
        assert report.satisfied
        assert not report.chain_satisfied

    def test_large_sigma_gets_eigenvalue_check(self, monkeypatch):
        small = settings.model_copy(update={"psd_check_max_dim": 4})
        monkeypatch.setattr(tc, "settings", small)
        monkeypatch.setattr(ens, "settings", small)
        bad = np.diag([-0.1] + [1.1 / 15] * 15)
        monkeypatch.setattr(ens, "sigma_state", lambda g, *args: tc.DensityOperator(bad))
        with pytest.raises(InvalidStateError, match="sigma has negative eigenvalue"):
            ens.ensemble_traces(G(2, 2, 2))

    def test_large_sigma_passes_eigenvalue_check(self, monkeypatch):
        small = settings.model_copy(update={"psd_check_max_dim": 4})
        monkeypatch.setattr(ens, "settings", small)
        assert ens.ensemble_traces(G(2, 2, 2)).tr_rho_sq == pytest.approx(0.1)


class TestExistence:
    def test_slack_terms(self):
        slack = ens.existence_slack(20, 2, GAMMA_MIN)
        assert slack.sigma_gap == 2.0 ** -19
        assert slack.tail_bound == 0.0
        assert slack.required_distance == pytest.approx(1 / 3 - 2.0 ** -19)

    def test_copies_lower_bound(self):
        assert ens.copies_lower_bound(20, 2, GAMMA_MIN) == 3

    def test_no_certificate_when_slack_is_large(self):
        assert ens.copies_lower_bound(2, 2, GAMMA_MIN) is None
