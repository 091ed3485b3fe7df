"""
Haar sampling - random pure states, Schmidt-coefficient sweeps over bipartitions,
Monte Carlo estimates of the maximum-Schmidt-coefficient tail, conditioned
sampling, and finite mixtures of k-fold copies.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from prodtest.config.settings import settings
from prodtest.errors import InvalidArgumentError, RejectionBudgetError
from prodtest.models.schemas import TailEstimate
from prodtest.services.tensor_core import (
    Bipartition,
    DensityOperator,
    PureState,
    check_dimension,
    regroup,
    tensor_power_vector,
    trace_distance,
)
from prodtest.services.workers import chunk_ranges, parallel_map

logger = logging.getLogger(__name__)

GAMMA_MIN = math.sqrt(3.0) / 2.0


def derived_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent stream for work item `index`, identical whichever worker draws it."""
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=(index,)))


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Normalized standard complex Gaussian vector: a Haar-random unit vector in C^dim."""
    if dim < 2:
        raise InvalidArgumentError(f"dimension must be >= 2, got {dim}")
    check_dimension(dim)
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def random_pure_state(n: int, d: int, rng: np.random.Generator) -> PureState:
    return PureState(n=n, d=d, amplitudes=haar_state(d ** n, rng))


def gamma_max(psi: PureState, s: Bipartition) -> float:
    """Largest Schmidt coefficient across S:S^c; 1 for a trivial cut."""
    if not s.nontrivial:
        return 1.0
    return float(np.linalg.svd(regroup(psi, s), compute_uv=False)[0])


def cuts_with_first_party(n: int) -> Tuple[Bipartition, ...]:
    """The 2^(n-1) - 1 nontrivial cuts, one per complement pair, each containing party 0."""
    cuts = []
    for mask in range(2 ** (n - 1)):
        members = frozenset([0] + [p + 1 for p in range(n - 1) if mask >> p & 1])
        if len(members) < n:
            cuts.append(Bipartition(n, members))
    return tuple(cuts)


def gamma_max_per_cut(psi: PureState) -> Dict[Tuple[int, ...], float]:
    if psi.n < 2:
        raise InvalidArgumentError("a single party has no nontrivial bipartition")
    return {cut.parties: gamma_max(psi, cut) for cut in cuts_with_first_party(psi.n)}


def capital_gamma_max(psi: PureState) -> float:
    """Gamma_max: the largest Schmidt coefficient over all nontrivial bipartitions."""
    return max(gamma_max_per_cut(psi).values())


class TailConstants(NamedTuple):
    c1: float
    c2: float
    n_threshold: float


def lemma4_constants(gamma: float, d: int) -> TailConstants:
    """c1 = (30/gamma^2)^{2d}/2, c2 = d gamma^4/(126 ln 2), N = ln(252 ln2 ln(30/gamma^2)/gamma^4)/ln d."""
    if not (GAMMA_MIN - 1e-12 <= gamma < 1.0):
        raise InvalidArgumentError(f"gamma must lie in [sqrt(3)/2, 1), got {gamma}")
    if d < 2:
        raise InvalidArgumentError(f"local dimension must be >= 2, got {d}")
    c1 = 0.5 * (30.0 / gamma ** 2) ** (2 * d)
    c2 = d * gamma ** 4 / (126.0 * math.log(2.0))
    n_threshold = math.log(252.0 * math.log(2.0) * math.log(30.0 / gamma ** 2) / gamma ** 4) / math.log(d)
    return TailConstants(c1, c2, n_threshold)


def lemma_bound(n: int, d: int, gamma: float) -> float:
    """c1 2^n exp(-c2 d^n), evaluated in log space."""
    c1, c2, _ = lemma4_constants(gamma, d)
    if n * math.log(d) > 700:
        return 0.0
    return math.exp(math.log(c1) + n * math.log(2.0) - c2 * d ** n)


def cut_tail_bound(d_a: int, d_b: int, gamma: float) -> float:
    """Per-cut concentration bound on P(gamma_max > gamma) for a d_a x d_b split, valid when d_a gamma^2 > 1."""
    delta = d_a * gamma ** 2 - 1.0
    if delta <= 0:
        return 1.0
    log_value = 2 * d_a * math.log(10.0 * d_a / delta) - d_b * delta ** 2 / (14.0 * math.log(2.0))
    return 1.0 if log_value >= 0 else math.exp(log_value)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise InvalidArgumentError("Wilson interval needs at least one trial")
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def wilson_upper(successes: int, trials: int, confidence: float = 0.95) -> float:
    return wilson_interval(successes, trials, confidence)[1]


def _count_exceed(block: range, n: int, d: int, gamma: float, seed: int) -> int:
    count = 0
    for index in block:
        psi = random_pure_state(n, d, derived_rng(seed, index))
        if capital_gamma_max(psi) > gamma:
            count += 1
    return count


def tail_mc(n: int, d: int, gamma: float, samples: int, seed: Optional[int] = None,
            workers: Optional[int] = None) -> TailEstimate:
    """Estimate P(Gamma_max > gamma) for Haar-random states with per-sample derived streams."""
    if n < 2:
        raise InvalidArgumentError(f"tail estimate needs n >= 2, got {n}")
    if samples < 1:
        raise InvalidArgumentError(f"samples must be >= 1, got {samples}")
    seed = settings.default_seed if seed is None else seed
    workers = settings.workers if workers is None else workers
    blocks = chunk_ranges(samples, workers)
    counts = parallel_map(partial(_count_exceed, n=n, d=d, gamma=gamma, seed=seed), blocks, workers)
    exceed = int(sum(counts))

    try:
        _, _, n_threshold = lemma4_constants(gamma, d)
        bound = lemma_bound(n, d, gamma)
    except InvalidArgumentError:
        logger.warning(f"gamma={gamma} outside [sqrt(3)/2, 1); tail bound not evaluated")
        bound = n_threshold = math.nan

    estimate = TailEstimate(
        n=n, d=d, gamma=gamma, samples=samples, exceed_count=exceed,
        frequency=exceed / samples, wilson_upper=wilson_upper(exceed, samples),
        lemma_bound=bound, n_threshold=n_threshold, seed=seed,
    )
    logger.info(f"Tail n={n} d={d} gamma={gamma:.6g}: {exceed}/{samples} exceed, Wilson upper {estimate.wilson_upper:.3e}")
    return estimate


def conditioned_sample(n: int, d: int, gamma: float, rng: np.random.Generator,
                       max_tries: Optional[int] = None, return_tries: bool = False):
    """Rejection-sample a Haar state with Gamma_max <= gamma."""
    if not (0.0 < gamma <= 1.0):
        raise InvalidArgumentError(f"gamma must lie in (0, 1], got {gamma}")
    max_tries = settings.rejection_budget if max_tries is None else max_tries
    if max_tries < 1:
        raise InvalidArgumentError(f"max_tries must be >= 1, got {max_tries}")
    for tries in range(1, max_tries + 1):
        psi = random_pure_state(n, d, rng)
        if gamma >= 1.0 or capital_gamma_max(psi) <= gamma:
            return (psi, tries) if return_tries else psi
    raise RejectionBudgetError(f"no state with Gamma_max <= {gamma} in {max_tries} draws at n={n}, d={d}")


@dataclass(frozen=True)
class WeightedEnsemble:
    """Finite distribution over pure states, used through the k-fold moment sum w_i |psi_i><psi_i|^{⊗k}."""
    states: Tuple[PureState, ...]
    weights: np.ndarray = field(repr=False)
    k: int = 1

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise InvalidArgumentError("ensemble needs at least one state")
        if any((s.n, s.d) != (states[0].n, states[0].d) for s in states):
            raise InvalidArgumentError("all ensemble states must share (n, d)")
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if weights.shape[0] != len(states):
            raise InvalidArgumentError(f"{weights.shape[0]} weights for {len(states)} states")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError("weights must be nonnegative and sum to 1")
        if self.k < 1:
            raise InvalidArgumentError(f"k must be >= 1, got {self.k}")
        check_dimension(states[0].dim ** self.k)
        weights = weights.copy()
        weights.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", weights)

    def moment(self, keep: Optional[Sequence[bool]] = None) -> np.ndarray:
        """sum over kept i of w_i |psi_i><psi_i|^{⊗k}, unnormalized."""
        keep = [True] * len(self.states) if keep is None else list(keep)
        powers = np.stack([tensor_power_vector(s.amplitudes, self.k)
                           for s, kept in zip(self.states, keep) if kept])
        w = self.weights[np.asarray(keep, dtype=bool)]
        return (powers.T * w) @ powers.conj()


def random_ensemble(size: int, n: int, d: int, k: int, rng: np.random.Generator) -> WeightedEnsemble:
    states = tuple(random_pure_state(n, d, rng) for _ in range(size))
    weights = rng.dirichlet(np.ones(size))
    weights = weights / weights.sum()
    return WeightedEnsemble(states, weights, k)


def mixture_condition_distance(e: WeightedEnsemble, predicate: Callable[[PureState], bool]) -> Tuple[float, float]:
    """(D(rho, rho'), p) where rho' conditions the ensemble on `predicate` and p is the excluded mass."""
    keep = [bool(predicate(s)) for s in e.states]
    if not any(keep):
        raise InvalidArgumentError("predicate excludes every state; the conditioned mixture is undefined")
    excluded = float(e.weights[~np.asarray(keep)].sum())
    if excluded == 0.0:
        return 0.0, 0.0
    rho = e.moment()
    rho_cond = e.moment(keep) / (1.0 - excluded)
    distance = trace_distance(DensityOperator(rho), DensityOperator(rho_cond))
    return distance, excluded
