"""
Property testers - swap test, product test, the multipartite-product tester and a
naive per-bipartition tester, with exact acceptance laws and copy accounting.
"""
import logging
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np

from prodtest.config.settings import settings
from prodtest.errors import CapacityError, DimensionMismatchError, InvalidArgumentError, OracleExhaustedError
from prodtest.models.schemas import RepetitionRecord, TestOutcome
from prodtest.services.haar_sampling import cuts_with_first_party, derived_rng
from prodtest.services.tensor_core import Bipartition, PureState, permute_vector_legs, purity, reduced_density
from prodtest.services.workers import parallel_map

logger = logging.getLogger(__name__)

MODES = ("exact", "sample")


def _check_mode(mode: str, rng) -> None:
    if mode not in MODES:
        raise InvalidArgumentError(f"unknown mode {mode!r}; use 'exact' or 'sample'")
    if mode == "sample" and rng is None:
        raise InvalidArgumentError("sample mode needs a random generator")


def swap_test(psi: PureState, phi: PureState, mode: str = "exact", rng: Optional[np.random.Generator] = None):
    """Exact: <psi phi| Pi^2 |psi phi> = (1 + |<psi|phi>|^2)/2. Sample: one Bernoulli outcome."""
    _check_mode(mode, rng)
    if psi.dim != phi.dim:
        raise DimensionMismatchError(f"swap test on dimensions {psi.dim} and {phi.dim}")
    pair = np.kron(psi.amplitudes, phi.amplitudes)
    symmetrized = 0.5 * (pair + permute_vector_legs(pair, psi.dim, [1, 0]))
    p = float(np.real(np.vdot(pair, symmetrized)))
    if mode == "exact":
        return p
    return bool(rng.random() < p)


def validate_partition(parts: Sequence[Sequence[int]], n: int) -> List[List[int]]:
    """Blocks must be nonempty, disjoint and cover [n]."""
    blocks = [sorted(int(p) for p in block) for block in parts]
    flat = [p for block in blocks for p in block]
    if not blocks or any(not block for block in blocks) or sorted(flat) != list(range(n)):
        raise InvalidArgumentError(f"{[list(b) for b in parts]} is not a partition of range({n})")
    return blocks


def _swap_block(t: np.ndarray, n: int, block: Sequence[int]) -> np.ndarray:
    """Exchange the two copies of every party in `block`; t has axes (copy 0 parties, copy 1 parties)."""
    axes = list(range(2 * n))
    for i in block:
        axes[i], axes[n + i] = n + i, i
    return t.transpose(axes)


def product_test(psi: PureState, parts: Sequence[Sequence[int]], mode: str = "exact",
                 rng: Optional[np.random.Generator] = None):
    """Swap tests on corresponding blocks of two copies.

    Exact mode returns <psi psi| ⊗_B Pi^2_B |psi psi>; sample mode returns whether every block accepted.
    """
    _check_mode(mode, rng)
    blocks = validate_partition(parts, psi.n)
    if mode == "exact":
        start = _pair_tensor(psi)
        t = start
        for block in blocks:
            t = 0.5 * (t + _swap_block(t, psi.n, block))
        return float(np.real(np.vdot(start.reshape(-1), t.reshape(-1))))
    accepted, _ = _sample_product_test(psi, blocks, rng)
    return accepted


def _pair_tensor(psi: PureState) -> np.ndarray:
    return np.kron(psi.amplitudes, psi.amplitudes).reshape([psi.d] * (2 * psi.n))


def _sample_product_test(psi: PureState, blocks: List[List[int]], rng: np.random.Generator) -> Tuple[bool, List[bool]]:
    """Measure the block swap tests one after another on the collapsing two-copy state."""
    t = _pair_tensor(psi)
    outcomes = []
    for block in blocks:
        projected = 0.5 * (t + _swap_block(t, psi.n, block))
        norm_sq = float(np.real(np.vdot(t.reshape(-1), t.reshape(-1))))
        p = float(np.real(np.vdot(projected.reshape(-1), projected.reshape(-1)))) / norm_sq
        accept = bool(rng.random() < p)
        outcomes.append(accept)
        t = projected if accept else t - projected
    return all(outcomes), outcomes


def purity_expansion(psi: PureState, parts: Sequence[Sequence[int]]) -> float:
    """E over unions R of blocks of Tr(rho_R^2); equals the exact product-test acceptance."""
    blocks = validate_partition(parts, psi.n)
    m = len(blocks)
    total = 0.0
    for mask in range(2 ** m):
        members = [p for b, block in enumerate(blocks) if mask >> b & 1 for p in block]
        if 0 < len(members) < psi.n:
            total += purity(reduced_density(psi, Bipartition(psi.n, frozenset(members))))
        else:
            total += 1.0
    return total / 2 ** m


class StateOracle:
    """Dispenses identical copies of a fixed state and counts them"""

    def __init__(self, state: PureState, budget: Optional[int] = None):
        self.state = state
        self.budget = budget
        self._copies_used = 0

    @property
    def copies_used(self) -> int:
        return self._copies_used

    def draw(self, count: int = 1) -> List[PureState]:
        if count < 1:
            raise InvalidArgumentError(f"must draw at least one copy, got {count}")
        if self.budget is not None and self._copies_used + count > self.budget:
            raise OracleExhaustedError(
                f"oracle budget of {self.budget} copies exceeded ({self._copies_used} used, {count} requested)")
        self._copies_used += count
        return [self.state] * count


def _singletons(n: int) -> List[List[int]]:
    return [[i] for i in range(n)]


def mp_tester(oracle: StateOracle, reps: int, rng: np.random.Generator) -> TestOutcome:
    """Product test with singleton blocks on `reps` fresh copy pairs; accept iff every run accepts."""
    if reps < 1:
        raise InvalidArgumentError(f"reps must be >= 1, got {reps}")
    start = oracle.copies_used
    n = oracle.state.n
    blocks = _singletons(n)
    transcript = []
    for index in range(reps):
        first, _ = oracle.draw(2)
        accepted, outcomes = _sample_product_test(first, blocks, rng)
        transcript.append(RepetitionRecord(index=index, accepted=accepted, block_outcomes=outcomes))
    per_run = product_test(oracle.state, blocks)
    outcome = TestOutcome(
        mode="mp",
        accepted=all(r.accepted for r in transcript),
        copies_used=oracle.copies_used - start,
        accept_probability=per_run ** reps,
        cut_accept_probabilities={"singletons": per_run},
        transcript=transcript,
    )
    logger.debug(f"MP tester: accepted={outcome.accepted}, per-run acceptance {per_run:.6f}")
    return outcome


def _cut_key(parties: Sequence[int]) -> str:
    return ",".join(str(p) for p in parties)


def bp_tester_naive(oracle: StateOracle, reps_per_cut: int, rng: np.random.Generator) -> TestOutcome:
    """Two-block product test on every cut containing party 0; accept iff some cut passes all its runs."""
    n = oracle.state.n
    if n < 2:
        raise InvalidArgumentError("bipartite tester needs n >= 2")
    if n > settings.bp_sweep_cap:
        raise CapacityError(f"naive bipartite tester supports n <= {settings.bp_sweep_cap}, got n={n}")
    if reps_per_cut < 1:
        raise InvalidArgumentError(f"reps_per_cut must be >= 1, got {reps_per_cut}")
    start = oracle.copies_used
    transcript = []
    declared = []
    cut_probabilities = {}
    index = 0
    for cut in cuts_with_first_party(n):
        blocks = [list(cut.parties), list(cut.complement().parties)]
        cut_pass = True
        for _ in range(reps_per_cut):
            first, _ = oracle.draw(2)
            accepted, outcomes = _sample_product_test(first, blocks, rng)
            transcript.append(RepetitionRecord(index=index, cut=list(cut.parties), accepted=accepted,
                                               block_outcomes=outcomes))
            cut_pass &= accepted
            index += 1
        declared.append(cut_pass)
        cut_probabilities[_cut_key(cut.parties)] = product_test(oracle.state, blocks)

    # runs are independent, so a cut is declared product with probability p^r
    declare_probs = np.array([p ** reps_per_cut for p in cut_probabilities.values()])
    outcome = TestOutcome(
        mode="bp",
        accepted=any(declared),
        copies_used=oracle.copies_used - start,
        accept_probability=float(1.0 - np.prod(1.0 - declare_probs)),
        cut_accept_probabilities=cut_probabilities,
        union_bound=float(min(1.0, declare_probs.sum())),
        transcript=transcript,
    )
    logger.debug(f"BP tester: accepted={outcome.accepted} over {len(declared)} cuts")
    return outcome


def _one_trial(index: int, state: PureState, mode: str, reps: int, seed: int) -> bool:
    rng = derived_rng(seed, index)
    oracle = StateOracle(state)
    if mode == "mp":
        return mp_tester(oracle, reps, rng).accepted
    return bp_tester_naive(oracle, reps, rng).accepted


def tester_trials(state: PureState, mode: str, reps: int, trials: int, seed: Optional[int] = None,
                  workers: Optional[int] = None) -> List[bool]:
    """Acceptance of `trials` independent tester runs, each on its own derived stream."""
    if mode not in ("mp", "bp"):
        raise InvalidArgumentError(f"unknown tester mode {mode!r}")
    seed = settings.default_seed if seed is None else seed
    run = partial(_one_trial, state=state, mode=mode, reps=reps, seed=seed)
    return parallel_map(run, range(trials), workers)
