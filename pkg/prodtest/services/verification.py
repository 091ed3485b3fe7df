"""
Verification suites - executable checks of the identities and inequalities the
numerics rest on. Three suites: facts (permutation, binomial, Haar and Schmidt
identities), ensembles (F routes, closed forms, the bound chain) and testers.

Every check function is a generator of Check tuples, so one function can emit a
row per grid point.
"""
import logging
import math
import time
import zlib
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from prodtest.config.settings import settings
from prodtest.errors import CapacityError, InvalidArgumentError, ProdTestError
from prodtest.models.schemas import CheckResult, GridPoint, VerificationReport
from prodtest.services.ensembles import (
    binbounds_hold,
    bound_report,
    copies_lower_bound,
    decay_curve,
    embedded_projector,
    ensemble_traces,
    existence_slack,
    f_cycle,
    f_trace,
    lemma3_log_bound,
    nesting_residual,
    purity_lower_bound,
    sigma_prime_gap,
    st_closed_form,
    st_enumeration,
)
from prodtest.services.haar_sampling import (
    GAMMA_MIN,
    WeightedEnsemble,
    capital_gamma_max,
    cuts_with_first_party,
    derived_rng,
    gamma_max,
    lemma4_constants,
    lemma_bound,
    mixture_condition_distance,
    random_pure_state,
)
from prodtest.services.measures import (
    Graph,
    all_graphs,
    bp_distance_lower_bound,
    bp_state,
    ghz_state,
    graph_state,
    is_connected,
    max_product_overlap,
    measure_report,
    product_state,
    random_local_unitaries,
    w_state,
)
from prodtest.services.permutations import (
    copy_permutation_matrix,
    cycle_number,
    enumerate_group,
    from_cycles,
    permutation_unitary,
    sym_dimension,
    sym_projector,
    sym_projector_haar_mc,
    unitary_trace,
)
from prodtest.services.tensor_core import ALGEBRAIC_TOL, PureState, apply_local, basis_state
from prodtest.services.testers import (
    StateOracle,
    bp_tester_naive,
    mp_tester,
    product_test,
    purity_expansion,
    swap_test,
    tester_trials,
)

logger = logging.getLogger(__name__)

SUITES = ("facts", "ensembles", "testers")
DEFAULT_MAX_DIM = settings.exact_dim_cap


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str = ""
    value: Optional[float] = None
    bound: Optional[float] = None


@dataclass(frozen=True)
class VerifyContext:
    seed: int
    max_dim: int = DEFAULT_MAX_DIM
    inject_fault: float = 0.0
    workers: int = 1

    def rng(self, name: str) -> np.random.Generator:
        """Stream keyed by check name, stable across runs and suite selections."""
        return derived_rng(self.seed, zlib.crc32(name.encode("utf-8")))


CheckFn = Callable[[VerifyContext], Iterator[Check]]


def _random_product(n: int, d: int, rng: np.random.Generator) -> PureState:
    return product_state([rng.standard_normal(d) + 1j * rng.standard_normal(d) for _ in range(n)])


def _grid_label(g: GridPoint) -> str:
    return f"n={g.n} k={g.k} d={g.d}"


# ---------------------------------------------------------------------------
# facts
# ---------------------------------------------------------------------------

def check_cycle_identity(ctx: VerifyContext) -> Iterator[Check]:
    """Tr(U_alpha) = d^{c(alpha)} as integers, every alpha in S_k for k <= 5, d in {2, 3}."""
    failures = []
    count = 0
    for k in range(1, 6):
        for alpha in enumerate_group(k):
            for d in (2, 3):
                count += 1
                if unitary_trace(alpha, d) != d ** cycle_number(alpha):
                    failures.append(f"{alpha.cycle_notation()} at d={d}")
    detail = f"{count} (alpha, d) pairs" if not failures else "mismatch: " + ", ".join(failures[:5])
    yield Check("cycle_identity", not failures, detail, float(len(failures)), 0.0)


def check_binomial_bounds(ctx: VerifyContext) -> Iterator[Check]:
    """a^b/b! <= C(a+b-1, b) <= (a^b/b!) e^{b^2/a} for b <= 20 and a up to 10^6."""
    a_values = np.unique(np.concatenate([np.arange(1, 11), np.logspace(1, 6, 31).astype(np.int64)]))
    failures = [(int(a), b) for a in a_values for b in range(1, 21) if not binbounds_hold(int(a), b)]
    detail = f"{len(a_values) * 20} (a, b) pairs" if not failures else f"violated at {failures[:5]}"
    yield Check("binomial_bounds", not failures, detail, float(len(failures)), 0.0)


def check_swap_projector(ctx: VerifyContext) -> Iterator[Check]:
    """Pi^2_2 is the projector (I + SWAP)/2 of rank 3."""
    p = sym_projector(2, 2).entries.copy()
    if ctx.inject_fault:
        logger.warning(f"Injecting fault {ctx.inject_fault:g} into Pi^2_2")
        p[0, 1] += ctx.inject_fault
        p[1, 0] += ctx.inject_fault
    swap = permutation_unitary(from_cycles(2, [(1, 2)]), 2).entries
    residual = max(
        float(np.max(np.abs(p @ p - p))),
        abs(float(np.trace(p).real) - sym_dimension(2, 2)),
        float(np.max(np.abs(p - 0.5 * (np.eye(4) + swap)))),
    )
    yield Check("swap_projector", residual <= ALGEBRAIC_TOL, f"max residual {residual:.3e}", residual, ALGEBRAIC_TOL)


def check_sym_projectors(ctx: VerifyContext) -> Iterator[Check]:
    """Pi^k_d is idempotent, has trace C(d+k-1, k) and absorbs every U_alpha."""
    worst = 0.0
    for k, d in ((2, 3), (3, 2), (3, 3), (4, 2)):
        p = sym_projector(k, d).entries
        worst = max(worst, float(np.max(np.abs(p @ p - p))),
                    abs(float(np.trace(p).real) - sym_dimension(k, d)))
        for alpha in enumerate_group(k):
            u = permutation_unitary(alpha, d).entries
            worst = max(worst, float(np.max(np.abs(u @ p - p))))
    yield Check("sym_projectors", worst <= ALGEBRAIC_TOL, f"max residual {worst:.3e}", worst, ALGEBRAIC_TOL)


def check_haar_moment(ctx: VerifyContext) -> Iterator[Check]:
    """C(d+k-1, k) E|psi><psi|^{⊗k} -> Pi^k_d, here k = 2, d = 2 with 10^5 samples."""
    estimate = sym_projector_haar_mc(2, 2, 100_000, seed=ctx.seed).entries
    error = float(np.linalg.norm(estimate - sym_projector(2, 2).entries))
    yield Check("haar_moment", error <= 0.05, f"Frobenius error {error:.4f}", error, 0.05)


def check_tail_constants(ctx: VerifyContext) -> Iterator[Check]:
    """Tail constants at gamma = sqrt(3)/2, d = 2 and the bound at n = 11."""
    c1, c2, n_threshold = lemma4_constants(GAMMA_MIN, 2)
    bound = lemma_bound(11, 2, GAMMA_MIN)
    passed = (math.isclose(c1, 1.28e6, rel_tol=1e-9) and abs(c2 - 0.012881) < 5e-7
              and abs(n_threshold - 10.16) < 5e-3 and 8e-3 < bound < 1e-2)
    yield Check("tail_constants", passed, f"c1={c1:.6g} c2={c2:.6g} N={n_threshold:.4f} bound(n=11)={bound:.4g}", bound)


def check_mixture_condition(ctx: VerifyContext) -> Iterator[Check]:
    """D(rho, rho') <= p for 1000 random ensembles conditioned on a random subset of their states."""
    rng = ctx.rng("mixture_condition")
    shapes = [(1, 2), (1, 3), (2, 2), (1, 4), (3, 2), (1, 8)]
    worst = -math.inf
    done = 0
    while done < 1000:
        n, d = shapes[int(rng.integers(len(shapes)))]
        k = int(rng.integers(1, 3))
        size = int(rng.integers(2, 7))
        states = tuple(random_pure_state(n, d, rng) for _ in range(size))
        ensemble = WeightedEnsemble(states, rng.dirichlet(np.ones(size)), k)
        kept = {i for i in range(size) if rng.random() < 0.6}
        if not kept:
            continue
        kept_ids = {id(states[i]) for i in kept}
        distance, excluded = mixture_condition_distance(ensemble, lambda s: id(s) in kept_ids)
        worst = max(worst, distance - excluded)
        done += 1
    yield Check("mixture_condition", worst <= 1e-9, f"1000 ensembles, max D - p = {worst:.3e}", worst, 0.0)


def check_product_overlap(ctx: VerifyContext) -> Iterator[Check]:
    """Alternating maximization reaches the SVD gamma_max on every (state, cut) pair."""
    rng = ctx.rng("product_overlap")
    pairs = 0
    worst = 0.0
    for n, d, count in ((4, 2, 10), (3, 2, 5), (2, 3, 5)):
        for _ in range(count):
            psi = random_pure_state(n, d, rng)
            for cut in cuts_with_first_party(n):
                error = abs(max_product_overlap(psi, cut, restarts=5, rng=rng) - gamma_max(psi, cut))
                worst = max(worst, error)
                pairs += 1
    yield Check("product_overlap", pairs >= 60 and worst <= 1e-6, f"{pairs} pairs, max error {worst:.3e}", worst, 1e-6)


def check_bp_distance_floor(ctx: VerifyContext) -> Iterator[Check]:
    """Every bipartite-product state is at least sqrt(1 - Gamma_max^2) away."""
    rng = ctx.rng("bp_distance_floor")
    worst = math.inf
    for _ in range(20):
        psi = random_pure_state(3, 2, rng)
        members = [int(rng.integers(3))]
        phi = bp_state(members, random_pure_state(1, 2, rng), random_pure_state(2, 2, rng))
        check = bp_distance_lower_bound(psi, phi)
        worst = min(worst, check.distance - check.lower_bound)
    yield Check("bp_distance_floor", worst >= -1e-12, f"min slack {worst:.3e}", worst, 0.0)


def check_local_invariance(ctx: VerifyContext) -> Iterator[Check]:
    """Gamma_max is unchanged by local unitaries."""
    rng = ctx.rng("local_invariance")
    worst = 0.0
    for n, d in ((3, 2), (2, 3), (4, 2)):
        for _ in range(5):
            psi = random_pure_state(n, d, rng)
            moved = apply_local(psi, random_local_unitaries(n, d, rng))
            worst = max(worst, abs(capital_gamma_max(psi) - capital_gamma_max(moved)))
    yield Check("local_invariance", worst <= ALGEBRAIC_TOL, f"max change {worst:.3e}", worst, ALGEBRAIC_TOL)


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

def _grid(max_dim: int, k_values, d_values=(2, 3)) -> List[GridPoint]:
    points = []
    for d in d_values:
        for k in k_values:
            n = 1
            while d ** (n * k) <= max_dim:
                points.append(GridPoint(n=n, k=k, d=d))
                n += 1
    return points


def check_f_routes(ctx: VerifyContext) -> Iterator[Check]:
    """f_trace = f_cycle wherever the matrix route fits, k <= 3."""
    for g in _grid(settings.f_trace_dim_cap, range(1, 4)):
        tr, cyc = f_trace(g), f_cycle(g)
        rel = abs(tr - cyc) / abs(cyc)
        yield Check(f"f_routes {_grid_label(g)}", rel <= 1e-9, f"f_trace={tr:.12g} f_cycle={cyc:.12g}", tr, cyc)


def check_closed_forms(ctx: VerifyContext) -> Iterator[Check]:
    """E_{S,T} d^{...} = ((1+d)/2)^n against enumeration, both variants, n <= 12."""
    worst = 0.0
    for d in (2, 3):
        for n in range(1, settings.subset_enum_cap + 1):
            for variant in ("intersect", "diagonal"):
                closed = st_closed_form(n, d, variant)
                worst = max(worst, abs(st_enumeration(n, d, variant) - closed) / closed)
    yield Check("closed_forms", worst <= 1e-9, f"max relative error {worst:.3e}", worst, 1e-9)


def check_bound_chain(ctx: VerifyContext) -> Iterator[Check]:
    """Exact D(rho, sigma)^2 against the full bound chain at every point with d^{nk} <= max_dim."""
    for g in _grid(ctx.max_dim, range(1, settings.enumeration_cap + 1)):
        traces = ensemble_traces(g, ctx.max_dim)
        report = bound_report(g, exact_cap=ctx.max_dim, traces=traces)
        problems = [] if report.satisfied else ["D^2 above the closed-form bound"]
        if not report.chain_satisfied:
            problems.append("chain")
        if g.k == 1 and report.exact_D != 0.0:
            problems.append("D != 0 at k = 1")
        if abs(traces.tr_rho_sigma - traces.tr_rho_sq) > 1e-9:
            problems.append(f"Tr(rho sigma) - Tr(rho^2) = {traces.tr_rho_sigma - traces.tr_rho_sq:.3e}")
        if traces.tr_rho_sq < purity_lower_bound(g) * (1 - 1e-9):
            problems.append("Tr(rho^2) below k! e^{-k^2/d^n} / d^{nk}")
        f_value = report.f_cycle if report.f_cycle is not None else report.f_trace
        if f_value is not None:
            sigma_cap = math.factorial(g.k) ** 4 * f_value / g.total_dim ** 2
            if traces.tr_sigma_sq > sigma_cap * (1 + 1e-9):
                problems.append("Tr(sigma^2) above (k!)^4 F / d^{2nk}")
        detail = f"D^2={report.D_squared:.6g} bound={report.lemma3_bound:.6g}"
        if problems:
            detail += "; failed: " + ", ".join(problems)
        yield Check(f"bound_chain {_grid_label(g)}", not problems, detail, report.D_squared, report.lemma3_bound)


def check_sigma_prime(ctx: VerifyContext) -> Iterator[Check]:
    """||sigma - sigma'||_1 <= 2^{-(n-2)} at k = 2, d = 2."""
    for n in (2, 3):
        g = GridPoint(n=n, k=2, d=2)
        gap = sigma_prime_gap(g)
        bound = 2.0 ** (-(n - 2))
        yield Check(f"sigma_prime {_grid_label(g)}", gap <= bound + 1e-9, f"gap {gap:.6g}", gap, bound)


def check_nesting(ctx: VerifyContext) -> Iterator[Check]:
    """Pi^k_{d1 d2} (Pi^k_{d1} ⊗ Pi^k_{d2}) = Pi^k_{d1} ⊗ Pi^k_{d2}."""
    worst = max(nesting_residual(k, d1, d2) for k, d1, d2 in ((2, 2, 2), (2, 2, 3), (3, 2, 2), (2, 3, 3)))
    yield Check("nesting", worst <= 1e-12, f"max residual {worst:.3e}", worst, 1e-12)


def check_tau_average(ctx: VerifyContext) -> Iterator[Check]:
    """Pi ⊗_S Pi equals the average of U_alpha ⊗_S U_beta over alpha, beta."""
    worst = 0.0
    for n, k, d, members in ((2, 2, 2, (0,)), (3, 2, 2, (0, 2)), (2, 3, 2, (1,))):
        group = enumerate_group(k)
        acc = np.zeros((d ** (n * k),) * 2)
        for alpha in group:
            for beta in group:
                acc += copy_permutation_matrix([alpha if p in members else beta for p in range(n)], d).toarray()
        acc /= len(group) ** 2
        worst = max(worst, float(np.max(np.abs(acc - embedded_projector(GridPoint(n=n, k=k, d=d), members)))))
    yield Check("tau_average", worst <= ALGEBRAIC_TOL, f"max residual {worst:.3e}", worst, ALGEBRAIC_TOL)


def check_decay(ctx: VerifyContext) -> Iterator[Check]:
    """Along k(n) = ceil(0.05 n / log2 n) the exponent stays negative and the bound drops below 1e-6."""
    ns = np.unique(np.round(np.logspace(4, 20, 33, base=2.0)).astype(np.int64))
    curve = decay_curve(int(n) for n in ns)
    worst = max(p.exponent for p in curve)
    final = curve[-1].log_bound
    passed = worst < 0 and final < math.log(1e-6)
    yield Check("decay", passed, f"{len(curve)} points, max exponent {worst:.4g}, final ln bound {final:.4g}",
                worst, 0.0)


def check_existence(ctx: VerifyContext) -> Iterator[Check]:
    """The copy lower bound is the first k whose bound reaches the required distance."""
    n, d = 20, 2
    slack = existence_slack(n, d, GAMMA_MIN)
    k = copies_lower_bound(n, d, GAMMA_MIN)
    target = 2.0 * math.log(slack.required_distance)
    passed = k is not None and lemma3_log_bound(GridPoint(n=n, k=k, d=d)) >= target and (
        k == 1 or lemma3_log_bound(GridPoint(n=n, k=k - 1, d=d)) < target)
    yield Check("existence", passed, f"n={n}: required D {slack.required_distance:.6g}, k >= {k}",
                float(k) if k is not None else None)


# ---------------------------------------------------------------------------
# testers
# ---------------------------------------------------------------------------

def check_mp_accepts_product(ctx: VerifyContext) -> Iterator[Check]:
    """Product inputs pass the singleton product test with certainty."""
    rng = ctx.rng("mp_accepts_product")
    problems = []
    for n, d in ((2, 2), (3, 2), (4, 2), (2, 3)):
        psi = _random_product(n, d, rng)
        outcome = mp_tester(StateOracle(psi), 20, rng)
        if not (outcome.accepted and outcome.copies_used == 40 and abs(outcome.accept_probability - 1.0) <= 1e-12):
            problems.append(f"n={n} d={d}")
    yield Check("mp_accepts_product", not problems, "failed: " + ", ".join(problems) if problems else "4 product states")


def check_bell_product_test(ctx: VerifyContext) -> Iterator[Check]:
    bell = PureState.from_vector([1, 0, 0, 1], 2, 2)
    exact = product_test(bell, [[0], [1]])
    expansion = purity_expansion(bell, [[0], [1]])
    passed = abs(exact - 0.75) <= 1e-9 and abs(expansion - 0.75) <= 1e-9
    yield Check("bell_product_test", passed, f"exact {exact:.12g}, purity expansion {expansion:.12g}", exact, 0.75)


def check_swap_law(ctx: VerifyContext) -> Iterator[Check]:
    """Swap test accepts with (1 + |<psi|phi>|^2)/2."""
    rng = ctx.rng("swap_law")
    worst = 0.0
    for n, d in ((1, 2), (2, 2), (1, 3), (2, 3)):
        for _ in range(5):
            psi, phi = random_pure_state(n, d, rng), random_pure_state(n, d, rng)
            expected = 0.5 * (1 + abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2)
            worst = max(worst, abs(swap_test(psi, phi) - expected))
    yield Check("swap_law", worst <= 1e-12, f"max error {worst:.3e}", worst, 1e-12)


def check_purity_expansion(ctx: VerifyContext) -> Iterator[Check]:
    """Exact product-test acceptance equals the average subset purity."""
    rng = ctx.rng("purity_expansion")
    worst = 0.0
    for parts in ([[0], [1], [2], [3]], [[0, 1], [2, 3]], [[0, 2], [1], [3]], [[0, 1, 2, 3]]):
        for _ in range(3):
            psi = random_pure_state(4, 2, rng)
            worst = max(worst, abs(product_test(psi, parts) - purity_expansion(psi, parts)))
    yield Check("purity_expansion", worst <= 1e-12, f"max error {worst:.3e}", worst, 1e-12)


def check_sampled_frequency(ctx: VerifyContext) -> Iterator[Check]:
    """Sampled product tests on GHZ_3 accept at the exact rate 5/8 within five standard errors."""
    rng = ctx.rng("sampled_frequency")
    ghz = ghz_state(3)
    runs = 4000
    hits = sum(product_test(ghz, [[0], [1], [2]], mode="sample", rng=rng) for _ in range(runs))
    frequency = hits / runs
    tolerance = 5 * math.sqrt(0.625 * 0.375 / runs)
    yield Check("sampled_frequency", abs(frequency - 0.625) <= tolerance,
                f"{hits}/{runs} accepted, exact 0.625", frequency, 0.625)


def check_ghz_rejection(ctx: VerifyContext) -> Iterator[Check]:
    """GHZ_3 is rejected by the MP tester (50 runs) in at least 99% of 200 trials."""
    accepted = tester_trials(ghz_state(3), "mp", reps=50, trials=200, seed=ctx.seed, workers=ctx.workers)
    rejection = 1.0 - sum(accepted) / len(accepted)
    yield Check("ghz_rejection", rejection >= 0.99, f"rejected {rejection:.1%} of 200 trials", rejection, 0.99)


def check_bp_accepts_cut(ctx: VerifyContext) -> Iterator[Check]:
    """|0> ⊗ GHZ_3 is accepted by the naive BP tester with certainty."""
    psi = bp_state([0], basis_state(1, 2, 0), ghz_state(3))
    outcome = bp_tester_naive(StateOracle(psi), 5, ctx.rng("bp_accepts_cut"))
    passed = outcome.accepted and abs(outcome.accept_probability - 1.0) <= 1e-12
    yield Check("bp_accepts_cut", passed, f"accepted={outcome.accepted}, exact probability "
                f"{outcome.accept_probability:.12g}", outcome.accept_probability, 1.0)


def check_graph_states(ctx: VerifyContext) -> Iterator[Check]:
    """A graph state is bipartite product iff the graph is disconnected, all graphs on 2..4 vertices."""
    mismatches = []
    count = 0
    for n in range(2, 5):
        for g in all_graphs(n):
            count += 1
            entangled = capital_gamma_max(graph_state(g)) < 1 - 1e-9
            if entangled != is_connected(g):
                mismatches.append(sorted(g.edges))
    detail = f"{count} graphs" if not mismatches else f"mismatch on {mismatches[:3]}"
    yield Check("graph_states", not mismatches, detail, float(len(mismatches)), 0.0)


def check_measures(ctx: VerifyContext) -> Iterator[Check]:
    """E_G = 1/2 for GHZ_3, 1/3 for W_3, 1/2 for the 4-vertex path graph, and distance^2 = E_G."""
    cases = (
        ("ghz3", ghz_state(3), 0.5),
        ("w3", w_state(3), 1.0 / 3.0),
        ("path4", graph_state(Graph(4, frozenset({(0, 1), (1, 2), (2, 3)}))), 0.5),
    )
    worst = 0.0
    for _, psi, expected in cases:
        report = measure_report(psi)
        worst = max(worst, abs(report.E_G - expected), abs(report.distance_to_bp ** 2 - report.E_G))
    yield Check("measures", worst <= 1e-9, f"max deviation {worst:.3e}", worst, 1e-9)


SUITE_CHECKS: Dict[str, Tuple[CheckFn, ...]] = {
    "facts": (
        check_cycle_identity,
        check_binomial_bounds,
        check_swap_projector,
        check_sym_projectors,
        check_haar_moment,
        check_tail_constants,
        check_mixture_condition,
        check_product_overlap,
        check_bp_distance_floor,
        check_local_invariance,
    ),
    "ensembles": (
        check_f_routes,
        check_closed_forms,
        check_bound_chain,
        check_sigma_prime,
        check_nesting,
        check_tau_average,
        check_decay,
        check_existence,
    ),
    "testers": (
        check_mp_accepts_product,
        check_bell_product_test,
        check_swap_law,
        check_purity_expansion,
        check_sampled_frequency,
        check_ghz_rejection,
        check_bp_accepts_cut,
        check_graph_states,
        check_measures,
    ),
}


def _run_checks(suite: str, checks: Tuple[CheckFn, ...], ctx: VerifyContext) -> List[CheckResult]:
    results = []
    for fn in checks:
        fallback_name = fn.__name__[len("check_"):]
        produced = fn(ctx)
        while True:
            start = time.perf_counter()
            try:
                check = next(produced)
            except StopIteration:
                break
            except ProdTestError as e:
                check = Check(fallback_name, False, f"error: {e.detail}")
                produced = iter(())
            seconds = time.perf_counter() - start
            status = "PASS" if check.passed else "FAIL"
            log = logger.info if check.passed else logger.error
            log(f"[{status}] {suite}/{check.name} ({seconds:.2f}s) {check.detail}")
            results.append(CheckResult(suite=suite, name=check.name, passed=check.passed,
                                       detail=check.detail, value=check.value, bound=check.bound))
    return results


def run_suite(suite: str, seed: Optional[int] = None, max_dim: int = DEFAULT_MAX_DIM,
              inject_fault: float = 0.0, workers: Optional[int] = None) -> VerificationReport:
    """Run one suite (or "all") and collect a report; failed checks do not raise."""
    if suite != "all" and suite not in SUITES:
        raise InvalidArgumentError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    if inject_fault and suite not in ("facts", "all"):
        raise InvalidArgumentError("--inject-fault perturbs Pi^2_2 and only applies to the facts suite")
    if max_dim < 1:
        raise InvalidArgumentError(f"max_dim must be >= 1, got {max_dim}")
    if max_dim > settings.exact_dim_cap:
        raise CapacityError(f"max_dim {max_dim} exceeds the dense cap {settings.exact_dim_cap}")

    ctx = VerifyContext(
        seed=settings.default_seed if seed is None else seed,
        max_dim=max_dim,
        inject_fault=inject_fault,
        workers=settings.workers if workers is None else workers,
    )
    names = SUITES if suite == "all" else (suite,)
    checks: List[CheckResult] = []
    for name in names:
        checks.extend(_run_checks(name, SUITE_CHECKS[name], ctx))

    report = VerificationReport(suite=suite, passed=all(c.passed for c in checks), seed=ctx.seed, checks=checks)
    failed = sum(not c.passed for c in checks)
    logger.info(f"Suite {suite}: {len(checks) - failed}/{len(checks)} checks passed")
    return report
