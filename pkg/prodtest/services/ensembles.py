"""
Ensemble bounds - the symmetric-subspace states rho, sigma, sigma', exact trace
distances between them, the quantity F(k,n,d) by two independent routes, and
the inequality chain that bounds D(rho, sigma)^2.

rho     = Pi^k_{d^n} / C(d^n+k-1, k)
tau_S   = (Pi^k_{d^|S|} ⊗_S Pi^k_{d^|S^c|}) / (C(d^|S|+k-1, k) C(d^|S^c|+k-1, k))
sigma   = E_{S ⊆ [n]} tau_S          (sigma' averages nontrivial S only)
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from prodtest.config.settings import settings
from prodtest.errors import CapacityError, InvalidArgumentError
from prodtest.models.schemas import BoundReport, GridPoint
from prodtest.services.haar_sampling import lemma_bound
from prodtest.services.permutations import cycle_numbers, enumerate_group, sym_projector_sparse
from prodtest.services.tensor_core import DensityOperator, permute_legs, purity, require_psd, trace_distance, trace_norm

logger = logging.getLogger(__name__)

# a = log2(4/3) / 2
DECAY_RATE = 0.5 * math.log2(4.0 / 3.0)
# subset pairs are reduced to cell counts beyond the explicit enumeration cap
F_CYCLE_MAX_N = 20
CHAIN_TOL = 1e-9


def _rel_le(x: float, y: float, tol: float = CHAIN_TOL) -> bool:
    return x <= y + tol * max(1.0, abs(y))


# ---------------------------------------------------------------------------
# Binomial bounds
# ---------------------------------------------------------------------------

class BinomialBounds(NamedTuple):
    binomial: int
    lower: Optional[float]
    upper: Optional[float]


def binom_and_bounds(a: int, b: int) -> BinomialBounds:
    """C(a+b-1, b) exactly, with a^b/b! <= C(a+b-1, b) <= (a^b/b!) e^{b^2/a}."""
    if b < 1 or a < 0:
        raise InvalidArgumentError(f"need a >= 0 and b >= 1, got a={a}, b={b}")
    binomial = math.comb(a + b - 1, b)
    if a == 0:
        return BinomialBounds(binomial, None, None)
    log_lower, log_upper = _log_bounds(a, b)
    return BinomialBounds(binomial, _safe_exp(log_lower), _safe_exp(log_upper))


def _log_bounds(a: int, b: int) -> Tuple[float, float]:
    log_lower = b * math.log(a) - float(gammaln(b + 1))
    return log_lower, log_lower + b * b / a


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def binbounds_hold(a: int, b: int) -> bool:
    """Check the binomial sandwich in log space against the exact big-integer binomial."""
    binomial, _, _ = binom_and_bounds(a, b)
    log_binom = math.log(binomial)
    log_lower, log_upper = _log_bounds(a, b)
    slack = 1e-12 * max(1.0, abs(log_binom))
    return log_lower <= log_binom + slack and log_binom <= log_upper + slack


# ---------------------------------------------------------------------------
# Dense states
# ---------------------------------------------------------------------------

def _require_dense(g: GridPoint, cap: Optional[int]) -> None:
    cap = settings.exact_dim_cap if cap is None else cap
    if g.total_dim > cap:
        raise CapacityError(f"d^(nk) = {g.total_dim} exceeds the dense cap {cap} at (n={g.n}, k={g.k}, d={g.d})")


@lru_cache(maxsize=32)
def _sym_dense(k: int, local_dim: int) -> np.ndarray:
    arr = sym_projector_sparse(k, local_dim).toarray()
    arr.setflags(write=False)
    return arr


def subsets(n: int, include_trivial: bool = True) -> List[Tuple[int, ...]]:
    """All S ⊆ [n] by bitmask order; complements are kept (no dedup)."""
    out = []
    for mask in range(2 ** n):
        members = tuple(p for p in range(n) if mask >> p & 1)
        if include_trivial or 0 < len(members) < n:
            out.append(members)
    return out


def embedded_projector(g: GridPoint, members: Sequence[int]) -> np.ndarray:
    """Unnormalized Pi^k_{d^|S|} ⊗_S Pi^k_{d^|S^c|} in the global copy-major leg order."""
    n, k, d = g.n, g.k, g.d
    inside = sorted(members)
    outside = [p for p in range(n) if p not in set(inside)]
    block = np.kron(_sym_dense(k, d ** len(inside)), _sym_dense(k, d ** len(outside)))
    order = [j * n + p for j in range(k) for p in inside] + [j * n + p for j in range(k) for p in outside]
    return permute_legs(block, d, order)


def rho_state(g: GridPoint, cap: Optional[int] = None) -> DensityOperator:
    """Normalized projector onto Sym^k(C^{d^n})."""
    _require_dense(g, cap)
    if g.k == 1:
        return DensityOperator(np.eye(g.party_dim) / g.party_dim)
    return DensityOperator(_sym_dense(g.k, g.party_dim) / math.comb(g.party_dim + g.k - 1, g.k))


def tau_state(g: GridPoint, members: Sequence[int], cap: Optional[int] = None) -> DensityOperator:
    _require_dense(g, cap)
    return DensityOperator(embedded_projector(g, members) / _tau_norm(g, len(members)))


def _tau_norm(g: GridPoint, size: int) -> int:
    k, d = g.k, g.d
    return math.comb(d ** size + k - 1, k) * math.comb(d ** (g.n - size) + k - 1, k)


def sigma_state(g: GridPoint, include_trivial: bool = True, cap: Optional[int] = None) -> DensityOperator:
    """sigma (include_trivial) or sigma' (nontrivial cuts only)."""
    if not include_trivial and g.n < 2:
        raise InvalidArgumentError("sigma' needs n >= 2: a single party has no nontrivial subset")
    _require_dense(g, cap)
    if g.k == 1:
        return DensityOperator(np.eye(g.party_dim) / g.party_dim)
    chosen = subsets(g.n, include_trivial)
    acc = np.zeros((g.total_dim, g.total_dim))
    for members in chosen:
        acc += embedded_projector(g, members) / _tau_norm(g, len(members))
    logger.debug(f"sigma built from {len(chosen)} subsets at (n={g.n}, k={g.k}, d={g.d})")
    return DensityOperator(acc / len(chosen))


@dataclass(frozen=True)
class EnsembleTraces:
    """Exact scalars of the dense rho/sigma pair."""
    trace_distance: float
    tr_rho_sq: float
    tr_sigma_sq: float
    tr_rho_sigma: float


def ensemble_traces(g: GridPoint, cap: Optional[int] = None) -> EnsembleTraces:
    rho = rho_state(g, cap)
    sigma = sigma_state(g, True, cap)
    if g.k == 1:
        p = 1.0 / g.party_dim
        return EnsembleTraces(0.0, p, p, p)
    if sigma.dim > settings.psd_check_max_dim:
        # DensityOperator skips the eigenvalue check at this size
        require_psd(sigma.entries, "sigma")
    return EnsembleTraces(
        trace_distance=trace_distance(rho, sigma),
        tr_rho_sq=purity(rho),
        tr_sigma_sq=purity(sigma),
        tr_rho_sigma=float(np.sum(rho.entries * sigma.entries)),
    )


def exact_rho_sigma_distance(g: GridPoint, cap: Optional[int] = None) -> float:
    """D(rho, sigma) by dense eigensolve; exactly 0 at k = 1."""
    if g.k == 1:
        _require_dense(g, cap)
        return 0.0
    return trace_distance(rho_state(g, cap), sigma_state(g, True, cap))


def sigma_prime_gap(g: GridPoint, cap: Optional[int] = None) -> float:
    """||sigma - sigma'||_1, bounded above by 2^{-(n-2)}."""
    sigma = sigma_state(g, True, cap)
    sigma_p = sigma_state(g, False, cap)
    return trace_norm(sigma.entries - sigma_p.entries)


def nesting_residual(k: int, d1: int, d2: int) -> float:
    """max |Pi^k_{d1 d2}(Pi^k_{d1} ⊗ Pi^k_{d2}) - Pi^k_{d1} ⊗ Pi^k_{d2}|, with the pair interleaved per copy."""
    block = np.kron(_sym_dense(k, d1), _sym_dense(k, d2))
    # input legs A_0..A_{k-1}, B_0..B_{k-1}; copy j of the joint system is (A_j, B_j)
    order = [2 * j for j in range(k)] + [2 * j + 1 for j in range(k)]
    product = permute_legs(block, [d1] * k + [d2] * k, order)
    joint = _sym_dense(k, d1 * d2)
    return float(np.max(np.abs(joint @ product - product)))


# ---------------------------------------------------------------------------
# F(k, n, d)
# ---------------------------------------------------------------------------

def f_trace(g: GridPoint, cap: Optional[int] = None) -> float:
    """F = E_{S,T} Tr[(Pi ⊗_S Pi)(Pi ⊗_T Pi)] from explicit matrices, all 4^n pairs via a Gram matrix."""
    cap = settings.f_trace_dim_cap if cap is None else cap
    _require_dense(g, cap)
    stacked = np.stack([embedded_projector(g, s).reshape(-1) for s in subsets(g.n)])
    # the embedded projectors are real symmetric, so Tr(A_S A_T) = <A_S, A_T>
    gram = stacked @ stacked.T
    return float(np.mean(gram))


@lru_cache(maxsize=None)
def _composition_table(k: int) -> np.ndarray:
    """comp[a, b] = index of group[a]∘group[b] in enumerate_group(k)."""
    group = enumerate_group(k)
    images = np.array([p.image for p in group], dtype=np.int64)
    weights = k ** np.arange(k - 1, -1, -1, dtype=np.int64)
    codes = images @ weights
    size = len(group)
    composed = images[np.arange(size)[:, None, None], images[None, :, :]]
    table = np.searchsorted(codes, composed @ weights)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def _triple_histogram(k: int) -> Tuple[Tuple[Tuple[int, int, int, int], int], ...]:
    cyc = cycle_numbers(k)
    comp = _composition_table(k)
    base = k + 1
    counts = np.zeros(base ** 4, dtype=np.int64)
    # key = ((c(a d g) * base + c(a)) * base + c(g)) * base + c(d), rows indexed by d, columns by g
    gamma_part = cyc[None, :]
    delta_part = cyc[:, None]
    for a in range(len(cyc)):
        c_adg = cyc[comp[comp[a]]]
        key = ((c_adg * base + cyc[a]) * base + gamma_part) * base + delta_part
        counts += np.bincount(key.ravel(), minlength=base ** 4)
    out = []
    for key in np.nonzero(counts)[0]:
        c4 = key % base
        c3 = key // base % base
        c2 = key // base ** 2 % base
        c1 = key // base ** 3
        out.append(((int(c1), int(c2), int(c3), int(c4)), int(counts[key])))
    return tuple(out)


def triple_cycle_histogram(k: int, cap: Optional[int] = None) -> Dict[Tuple[int, int, int, int], int]:
    """{(c(alpha delta gamma), c(alpha), c(gamma), c(delta)): count} over S_k^3."""
    cap = settings.triple_cap if cap is None else cap
    if k > cap:
        raise CapacityError(f"(k!)^3 histogram for k={k} exceeds the triple cap k <= {cap}")
    return dict(_triple_histogram(k))


def _popcounts(n: int) -> np.ndarray:
    masks = np.arange(2 ** n, dtype=np.int64)
    counts = np.zeros_like(masks)
    for bit in range(n):
        counts += (masks >> bit) & 1
    return counts


def subset_pair_counts(n: int, enumerate_pairs: Optional[bool] = None) -> Dict[Tuple[int, int, int, int], int]:
    """Multiplicity of (|S∩T|, |S∩T^c|, |S^c∩T|, |S^c∩T^c|) over all 4^n pairs.

    Enumerates the pairs explicitly for n <= the subset cap unless told otherwise,
    and uses multinomial coefficients n!/(a! b! c! e!) beyond it.
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if enumerate_pairs is None:
        enumerate_pairs = n <= settings.subset_enum_cap
    if not enumerate_pairs:
        out = {}
        for a in range(n + 1):
            for b in range(n - a + 1):
                for c in range(n - a - b + 1):
                    e = n - a - b - c
                    out[(a, b, c, e)] = math.factorial(n) // (
                        math.factorial(a) * math.factorial(b) * math.factorial(c) * math.factorial(e))
        return out
    if n > settings.subset_enum_cap:
        raise CapacityError(f"enumerating 4^{n} subset pairs exceeds the cap n <= {settings.subset_enum_cap}")
    pc = _popcounts(n)
    masks = np.arange(2 ** n, dtype=np.int64)
    full = 2 ** n - 1
    base = n + 1
    hist = np.zeros(base ** 3, dtype=np.int64)
    for s in range(2 ** n):
        a = pc[s & masks]
        b = pc[s & (full ^ masks)]
        c = pc[(full ^ s) & masks]
        hist += np.bincount((a * base + b) * base + c, minlength=base ** 3)
    out = {}
    for key in np.nonzero(hist)[0]:
        a, b, c = int(key // base ** 2), int(key // base % base), int(key % base)
        out[(a, b, c, n - a - b - c)] = int(hist[key])
    return out


def f_cycle_exact(g: GridPoint) -> Fraction:
    """F as the exact rational E_{S,T,alpha,gamma,delta} d^{|S∩T|c(αδγ)+|S∩T^c|c(α)+|S^c∩T|c(γ)+|S^c∩T^c|c(δ)}."""
    if g.n > F_CYCLE_MAX_N:
        raise CapacityError(f"f_cycle supports n <= {F_CYCLE_MAX_N}, got n={g.n}")
    histogram = triple_cycle_histogram(g.k)
    cells = subset_pair_counts(g.n)
    d = g.d
    total = 0
    for (a, b, c, e), mult in cells.items():
        inner = 0
        for (c1, c2, c3, c4), count in histogram.items():
            inner += count * d ** (a * c1 + b * c2 + c * c3 + e * c4)
        total += mult * inner
    return Fraction(total, 4 ** g.n * math.factorial(g.k) ** 3)


def f_cycle(g: GridPoint) -> float:
    return float(f_cycle_exact(g))


def st_closed_form(n: int, d: int, variant: str = "intersect") -> float:
    """((1+d)/2)^n, the common value of E_{S,T}[d^{|S∩T|+|S∩T^c|}] and E_{S,T}[d^{|S∩T|+|S^c∩T^c|}]."""
    if variant not in ("intersect", "diagonal"):
        raise InvalidArgumentError(f"unknown variant {variant!r}; use 'intersect' or 'diagonal'")
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    return ((1 + d) / 2) ** n


def st_enumeration(n: int, d: int, variant: str = "intersect") -> float:
    """The same expectation by explicit enumeration of all subset pairs."""
    st_closed_form(n, d, variant)
    if n > settings.subset_enum_cap:
        raise CapacityError(f"enumerating 4^{n} subset pairs exceeds the cap n <= {settings.subset_enum_cap}")
    pc = _popcounts(n)
    masks = np.arange(2 ** n, dtype=np.int64)
    full = 2 ** n - 1
    powers = np.array([d ** x for x in range(n + 1)], dtype=np.int64)
    total = 0
    for s in range(2 ** n):
        if variant == "intersect":
            exponent = pc[s & masks] + pc[s & (full ^ masks)]
        else:
            exponent = pc[s & masks] + pc[(full ^ s) & (full ^ masks)]
        total += int(powers[exponent].sum())
    return float(Fraction(total, 4 ** n))


# ---------------------------------------------------------------------------
# Closed-form bounds
# ---------------------------------------------------------------------------

def lemma3_log_bound(g: GridPoint) -> float:
    """ln of (k!/4)(1 + (k!)^3((1+d)/2d)^n - e^{-k^2/d^n})."""
    n, k, d = g.n, g.k, g.d
    log_kfact = float(gammaln(k + 1))
    log_f = 2.0 * math.log(k) - n * math.log(d)
    if log_f < -30.0:
        # 1 - e^{-f} = f to double precision
        log_one_minus = log_f
    else:
        log_one_minus = math.log(-math.expm1(-math.exp(log_f)))
    log_tail = 3.0 * log_kfact + n * math.log((1 + d) / (2 * d))
    return log_kfact - math.log(4.0) + float(np.logaddexp(log_one_minus, log_tail))


def lemma3_bound(g: GridPoint) -> float:
    n, k, d = g.n, g.k, g.d
    if k > 10:
        return _safe_exp(lemma3_log_bound(g))
    kfact = math.factorial(k)
    ratio = k * k / d ** n
    return kfact / 4.0 * (-math.expm1(-ratio) + kfact ** 3 * ((1 + d) / (2 * d)) ** n)


def theorem_decay(n: int, k: int) -> float:
    """Exponent 2k log2 k - a n; negative means the bound on D decays at (n, k)."""
    if n < 1 or k < 1:
        raise InvalidArgumentError(f"need n, k >= 1, got n={n}, k={k}")
    return 2.0 * k * math.log2(k) - DECAY_RATE * n


class DecayPoint(NamedTuple):
    n: int
    k: int
    exponent: float
    log_bound: float


def decay_curve(ns: Iterable[int], c: float = 0.05, d: int = 2) -> List[DecayPoint]:
    """Follow k(n) = ceil(c n / log2 n) and report the exponent and ln of the closed-form bound."""
    points = []
    for n in ns:
        if n < 2:
            raise InvalidArgumentError(f"decay curve needs n >= 2, got {n}")
        k = max(1, math.ceil(c * n / math.log2(n)))
        g = GridPoint(n=n, k=k, d=d)
        points.append(DecayPoint(n, k, theorem_decay(n, k), lemma3_log_bound(g)))
    return points


def f_upper(g: GridPoint) -> float:
    """d^{nk}/(k!)^3 + d^{nk}((1+d)/2d)^n, the bound on F used to reach the closed form."""
    log_total = g.n * g.k * math.log(g.d)
    log_first = log_total - 3.0 * float(gammaln(g.k + 1))
    log_second = log_total + g.n * math.log((1 + g.d) / (2 * g.d))
    return _safe_exp(float(np.logaddexp(log_first, log_second)))


def f_bound(g: GridPoint, f_value: float) -> float:
    """(k!/4)(F (k!)^3 / d^{nk} - e^{-k^2/d^n})."""
    if g.k <= 10:
        kfact = math.factorial(g.k)
        return kfact / 4.0 * (f_value * kfact ** 3 / g.total_dim - math.exp(-g.k ** 2 / g.party_dim))
    if f_value <= 0:
        raise InvalidArgumentError(f"F must be positive, got {f_value}")
    log_quarter_kfact = float(gammaln(g.k + 1)) - math.log(4.0)
    log_scaled = log_quarter_kfact + math.log(f_value) + 3.0 * float(gammaln(g.k + 1)) - g.n * g.k * math.log(g.d)
    return _safe_exp(log_scaled) - _safe_exp(log_quarter_kfact - g.k ** 2 / g.party_dim)


def two_norm_bound(g: GridPoint, traces: Optional[EnsembleTraces] = None) -> float:
    """(d^{nk}/4)(Tr sigma^2 - Tr rho^2), the Hilbert-Schmidt relaxation of D^2."""
    traces = traces or ensemble_traces(g)
    return g.total_dim / 4.0 * (traces.tr_sigma_sq - traces.tr_rho_sq)


def purity_lower_bound(g: GridPoint) -> float:
    """k! / (e^{k^2/d^n} d^{nk}) <= Tr(rho^2)."""
    return math.factorial(g.k) * math.exp(-g.k ** 2 / g.party_dim) / g.total_dim


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def bound_report(g: GridPoint, bound_only: bool = False, exact_cap: Optional[int] = None,
                 traces: Optional[EnsembleTraces] = None) -> BoundReport:
    """Evaluate every route available at g; routes blocked by a cap are left absent and noted.

    Precomputed `traces` skip the dense rho/sigma construction.
    """
    notes = []
    lemma3 = lemma3_bound(g)
    chain_ok = True

    f_cyc = None
    try:
        f_cyc = f_cycle(g)
    except CapacityError as e:
        notes.append(f"f_cycle: {e.detail}")

    f_tr = None
    exact_d = d_sq = two_norm = None
    if not bound_only:
        try:
            f_tr = f_trace(g)
        except CapacityError as e:
            notes.append(f"f_trace: {e.detail}")
        try:
            traces = traces or ensemble_traces(g, exact_cap)
            exact_d = traces.trace_distance
            d_sq = exact_d ** 2
            two_norm = two_norm_bound(g, traces)
        except CapacityError as e:
            notes.append(f"exact: {e.detail}")

    upper = f_upper(g)
    f_value = f_cyc if f_cyc is not None else f_tr
    fb = f_bound(g, f_value) if f_value is not None else None

    satisfied = d_sq is None or d_sq <= lemma3 + CHAIN_TOL
    if d_sq is not None:
        chain_ok &= _rel_le(d_sq, two_norm)
    if two_norm is not None and fb is not None:
        chain_ok &= _rel_le(two_norm, fb)
    if fb is not None:
        chain_ok &= _rel_le(fb, lemma3)
    if f_value is not None:
        chain_ok &= _rel_le(f_value, upper)
    if f_tr is not None and f_cyc is not None:
        chain_ok &= abs(f_tr - f_cyc) <= CHAIN_TOL * abs(f_cyc)

    report = BoundReport(
        grid=g,
        exact_D=exact_d,
        D_squared=d_sq,
        lemma3_bound=lemma3,
        f_trace=f_tr,
        f_cycle=f_cyc,
        satisfied=bool(satisfied),
        chain_satisfied=bool(chain_ok),
        two_norm_bound=two_norm,
        f_bound=fb,
        f_upper=upper,
        decay_exponent=theorem_decay(g.n, g.k),
        small_ratio_regime=g.k ** 2 < g.party_dim,
        note="; ".join(notes),
    )
    if not report.satisfied:
        logger.error(f"D^2 exceeds the closed-form bound at (n={g.n}, k={g.k}, d={g.d})")
    if not report.chain_satisfied:
        logger.error(f"Bound chain violated at (n={g.n}, k={g.k}, d={g.d})")
    return report


@dataclass(frozen=True)
class ExistenceSlack:
    """Additive terms between a hypothetical k-copy tester and D(rho, sigma)."""
    sigma_gap: float
    tail_bound: float
    required_distance: float


def existence_slack(n: int, d: int, gamma: float) -> ExistenceSlack:
    """1/3 <= D(sigma, sigma') + D(rho, rho') + D(rho, sigma), with D(sigma, sigma') <= 2^{-(n-1)}.

    required_distance is the smallest D(rho, sigma) a tester with gamma = sqrt(1 - eps^2) would force.
    """
    if n < 2:
        raise InvalidArgumentError(f"need n >= 2, got {n}")
    gap = 2.0 ** (-(n - 1))
    tail = lemma_bound(n, d, gamma)
    return ExistenceSlack(gap, tail, 1.0 / 3.0 - gap - tail)


def copies_lower_bound(n: int, d: int, gamma: float, k_max: int = 10_000) -> Optional[int]:
    """Smallest k whose closed-form bound still allows D(rho, sigma) >= required_distance.

    None when the slack terms already exceed 1/3 and no bound is certified.
    """
    slack = existence_slack(n, d, gamma)
    if slack.required_distance <= 0:
        return None
    target = 2.0 * math.log(slack.required_distance)
    for k in range(1, k_max + 1):
        if lemma3_log_bound(GridPoint(n=n, k=k, d=d)) >= target:
            return k
    raise CapacityError(f"no k <= {k_max} reaches the required distance at n={n}")
