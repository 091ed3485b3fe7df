"""
Entanglement measures - the generalised geometric measure E_G, distance to the
nearest bipartite-product state, product-overlap maximization, graph states,
and a handful of named states.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.stats import unitary_group

from prodtest.config.settings import settings
from prodtest.errors import CapacityError, InvalidArgumentError
from prodtest.models.schemas import MeasureReport
from prodtest.services.haar_sampling import capital_gamma_max, gamma_max_per_cut, haar_state
from prodtest.services.tensor_core import (
    Bipartition,
    PureState,
    permute_vector_legs,
    pure_trace_distance,
    regroup,
)

logger = logging.getLogger(__name__)

# convergence of the alternating maximization
OVERLAP_TOL = 1e-10
OVERLAP_MAX_ITER = 500


def _require_multipartite(psi: PureState) -> None:
    if psi.n < 2:
        raise InvalidArgumentError("a single party has no nontrivial bipartition")


def generalized_geometric_measure(psi: PureState) -> float:
    """E_G = 1 - Gamma_max^2: one minus the best squared overlap with a bipartite-product state."""
    _require_multipartite(psi)
    return max(0.0, 1.0 - capital_gamma_max(psi) ** 2)


def distance_to_bp(psi: PureState) -> float:
    """Pure-state trace distance to the nearest bipartite-product state, sqrt(1 - Gamma_max^2)."""
    _require_multipartite(psi)
    return math.sqrt(generalized_geometric_measure(psi))


def max_product_overlap(psi: PureState, s: Bipartition, restarts: int = 10,
                        rng: Optional[np.random.Generator] = None) -> float:
    """max |<psi| alpha beta>| over product states across S:S^c by alternating maximization.

    With beta fixed the best alpha is M beta / ||M beta||, and symmetrically for beta,
    where M is the coefficient matrix of psi across the cut.
    """
    if not s.nontrivial:
        raise InvalidArgumentError("product overlap needs a nontrivial bipartition")
    if restarts < 1:
        raise InvalidArgumentError(f"restarts must be >= 1, got {restarts}")
    rng = rng if rng is not None else np.random.default_rng(settings.default_seed)
    m = regroup(psi, s)
    best = 0.0
    for _ in range(restarts):
        beta = haar_state(m.shape[1], rng)
        value = 0.0
        for _ in range(OVERLAP_MAX_ITER):
            alpha = m @ beta
            alpha /= np.linalg.norm(alpha)
            beta = m.conj().T @ alpha
            new_value = float(np.linalg.norm(beta))
            beta /= new_value
            if abs(new_value - value) < OVERLAP_TOL:
                value = new_value
                break
            value = new_value
        best = max(best, value)
    return best


class BpDistanceCheck(NamedTuple):
    distance: float
    lower_bound: float


def bp_distance_lower_bound(psi: PureState, phi_bp: PureState) -> BpDistanceCheck:
    """Distance from psi to a given bipartite-product state next to the universal floor sqrt(1 - Gamma_max^2)."""
    return BpDistanceCheck(pure_trace_distance(psi, phi_bp), distance_to_bp(psi))


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1."""
    n: int
    edges: FrozenSet[Tuple[int, int]]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError(f"graph needs at least one vertex, got {self.n}")
        normalized = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise InvalidArgumentError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidArgumentError(f"edge ({u}, {v}) outside vertices 0..{self.n - 1}")
            normalized.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(normalized))


def graph_state(g: Graph) -> PureState:
    """CZ on every edge applied to |+>^n; amplitude of |x> is (-1)^{sum_{uv} x_u x_v} / 2^{n/2}."""
    if g.n > settings.graph_cap:
        raise CapacityError(f"graph states are built densely for n <= {settings.graph_cap}, got n={g.n}")
    index = np.arange(2 ** g.n)
    bits = [(index >> (g.n - 1 - u)) & 1 for u in range(g.n)]
    parity = np.zeros(2 ** g.n, dtype=np.int64)
    for u, v in g.edges:
        parity ^= bits[u] & bits[v]
    amplitudes = (1 - 2 * parity) / math.sqrt(2 ** g.n)
    return PureState(n=g.n, d=2, amplitudes=amplitudes)


def is_connected(g: Graph) -> bool:
    if g.n == 1:
        return True
    rows = [u for u, _ in g.edges]
    cols = [v for _, v in g.edges]
    adjacency = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(g.n, g.n))
    count, _ = connected_components(adjacency, directed=False)
    return count == 1


def all_graphs(n: int) -> Iterator[Graph]:
    """Every labelled simple graph on n vertices."""
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(2 ** len(pairs)):
        yield Graph(n, frozenset(p for i, p in enumerate(pairs) if mask >> i & 1))


# ---------------------------------------------------------------------------
# Named states
# ---------------------------------------------------------------------------

def ghz_state(n: int, d: int = 2) -> PureState:
    vec = np.zeros(d ** n, dtype=np.complex128)
    step = sum(d ** p for p in range(n))
    for j in range(d):
        vec[j * step] = 1.0
    return PureState.from_vector(vec, n, d)


def w_state(n: int) -> PureState:
    vec = np.zeros(2 ** n, dtype=np.complex128)
    for p in range(n):
        vec[2 ** p] = 1.0
    return PureState.from_vector(vec, n, 2)


def bell_state() -> PureState:
    return PureState.from_vector([1, 0, 0, 1], 2, 2)


def product_state(locals_: Sequence[Sequence[complex]]) -> PureState:
    """|a_0> ⊗ |a_1> ⊗ ..., each local vector normalized on its own."""
    if not locals_:
        raise InvalidArgumentError("need at least one local vector")
    d = len(locals_[0])
    vec = np.ones(1, dtype=np.complex128)
    for local in locals_:
        local = np.asarray(local, dtype=np.complex128)
        if local.shape != (d,):
            raise InvalidArgumentError("all local vectors must have the same dimension")
        vec = np.kron(vec, local / np.linalg.norm(local))
    return PureState(n=len(locals_), d=d, amplitudes=vec)


def schmidt_state(coefficients: Sequence[float]) -> PureState:
    """sum_i c_i |i i> on two parties of dimension len(coefficients)."""
    d = len(coefficients)
    vec = np.zeros(d * d, dtype=np.complex128)
    for i, c in enumerate(coefficients):
        vec[i * d + i] = c
    return PureState.from_vector(vec, 2, d)


def bp_state(members: Sequence[int], inside: PureState, outside: PureState) -> PureState:
    """|inside> on the parties of S ⊗ |outside> on S^c, placed in the global index order."""
    if inside.d != outside.d:
        raise InvalidArgumentError("both factors need the same local dimension")
    n = inside.n + outside.n
    parties = sorted(members)
    if len(parties) != inside.n:
        raise InvalidArgumentError(f"{len(parties)} parties listed for a {inside.n}-party factor")
    rest = [p for p in range(n) if p not in set(parties)]
    vec = np.kron(inside.amplitudes, outside.amplitudes)
    return PureState(n=n, d=inside.d, amplitudes=permute_vector_legs(vec, inside.d, parties + rest))


def random_local_unitaries(n: int, d: int, rng: np.random.Generator) -> List[np.ndarray]:
    return [unitary_group.rvs(d, random_state=rng) for _ in range(n)]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def measure_report(psi: PureState, restarts: int = 0, rng: Optional[np.random.Generator] = None,
                   connected: Optional[bool] = None) -> MeasureReport:
    """Per-cut Schmidt maxima, Gamma_max, E_G and distance to BP; overlaps too when restarts > 0."""
    per_cut = gamma_max_per_cut(psi)
    overlaps: Optional[Dict[str, float]] = None
    if restarts > 0:
        rng = rng if rng is not None else np.random.default_rng(settings.default_seed)
        overlaps = {
            _key(parties): max_product_overlap(psi, Bipartition(psi.n, frozenset(parties)), restarts, rng)
            for parties in per_cut
        }
    big_gamma = max(per_cut.values())
    e_g = max(0.0, 1.0 - big_gamma ** 2)
    return MeasureReport(
        n=psi.n,
        d=psi.d,
        gamma_max_per_cut={_key(parties): value for parties, value in per_cut.items()},
        Gamma_max=big_gamma,
        E_G=e_g,
        distance_to_bp=math.sqrt(e_g),
        overlap_per_cut=overlaps,
        connected=connected,
    )


def _key(parties: Sequence[int]) -> str:
    return ",".join(str(p) for p in parties)
