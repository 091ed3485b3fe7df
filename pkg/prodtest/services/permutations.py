"""
Permutation engine - symmetric-group enumeration, cycle counting, copy-permutation
unitaries U_alpha on (C^d)^{⊗k}, and symmetric-subspace projectors
"""
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from prodtest.config.settings import settings
from prodtest.errors import CapacityError, InvalidArgumentError
from prodtest.services.tensor_core import ComplexOperator, check_dimension

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Permutation:
    """alpha in S_k stored as a 0-based image table, image[i] = alpha(i)."""
    image: Tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(i) for i in self.image)
        if sorted(image) != list(range(len(image))):
            raise InvalidArgumentError(f"{list(image)} is not a bijection on range({len(image)})")
        object.__setattr__(self, "image", image)

    @property
    def k(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def cycle_decomposition(self) -> List[Tuple[int, ...]]:
        """Disjoint cycles (0-based), fixed points included."""
        seen = [False] * self.k
        cycles = []
        for start in range(self.k):
            if seen[start]:
                continue
            cycle = []
            j = start
            while not seen[j]:
                seen[j] = True
                cycle.append(j)
                j = self.image[j]
            cycles.append(tuple(cycle))
        return cycles

    def cycle_notation(self) -> str:
        """1-based cycle notation, e.g. (1 2 3)(4)."""
        return "".join("(" + " ".join(str(i + 1) for i in c) + ")" for c in self.cycle_decomposition())


def identity_permutation(k: int) -> Permutation:
    return Permutation(tuple(range(k)))


def compose(alpha: Permutation, beta: Permutation) -> Permutation:
    """alpha∘beta (beta applied first), so that U_alpha U_beta = U_{alpha∘beta}."""
    if alpha.k != beta.k:
        raise InvalidArgumentError(f"cannot compose permutations of degree {alpha.k} and {beta.k}")
    return Permutation(tuple(alpha.image[b] for b in beta.image))


def inverse(alpha: Permutation) -> Permutation:
    inv = [0] * alpha.k
    for i, a in enumerate(alpha.image):
        inv[a] = i
    return Permutation(tuple(inv))


def from_cycles(k: int, cycles: Iterable[Sequence[int]]) -> Permutation:
    """Build a permutation from 1-based cycles; omitted points are fixed. from_cycles(3, [(1, 2, 3)])."""
    image = list(range(k))
    touched = set()
    for cycle in cycles:
        points = [int(p) - 1 for p in cycle]
        for p in points:
            if p < 0 or p >= k:
                raise InvalidArgumentError(f"cycle entry {p + 1} outside 1..{k}")
            if p in touched:
                raise InvalidArgumentError(f"point {p + 1} appears in two cycles")
            touched.add(p)
        for a, b in zip(points, points[1:] + points[:1]):
            image[a] = b
    return Permutation(tuple(image))


def cycle_number(alpha: Permutation) -> int:
    """c(alpha): number of disjoint cycles, fixed points included."""
    return len(alpha.cycle_decomposition())


def _check_degree(k: int, cap: Optional[int]) -> None:
    cap = settings.enumeration_cap if cap is None else cap
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if k > cap:
        raise CapacityError(f"enumerating S_{k} exceeds the enumeration cap k <= {cap}")


@lru_cache(maxsize=None)
def _group(k: int) -> Tuple[Permutation, ...]:
    return tuple(Permutation(p) for p in itertools.permutations(range(k)))


def enumerate_group(k: int, cap: Optional[int] = None) -> Tuple[Permutation, ...]:
    """All k! elements of S_k in lexicographic image order."""
    _check_degree(k, cap)
    return _group(k)


@lru_cache(maxsize=None)
def _cycle_numbers(k: int) -> np.ndarray:
    arr = np.array([cycle_number(p) for p in _group(k)], dtype=np.int64)
    arr.setflags(write=False)
    return arr


def cycle_numbers(k: int, cap: Optional[int] = None) -> np.ndarray:
    """c(alpha) for every alpha of enumerate_group(k), same order."""
    _check_degree(k, cap)
    return _cycle_numbers(k)


def cycle_histogram(k: int, cap: Optional[int] = None) -> Dict[int, int]:
    """{c: #alpha in S_k with c(alpha) = c}; these are the unsigned Stirling numbers of the first kind."""
    return dict(sorted(Counter(cycle_numbers(k, cap).tolist()).items()))


def _leg_image_indices(leg_image: Sequence[int], d: int) -> np.ndarray:
    """Index map of the unitary sending leg q to leg leg_image[q]."""
    m = len(leg_image)
    digits = np.indices((d,) * m).reshape(m, -1)
    moved = np.empty_like(digits)
    moved[list(leg_image)] = digits
    return np.ravel_multi_index(tuple(moved), (d,) * m)


def permutation_matrix(alpha: Permutation, d: int) -> sparse.csr_matrix:
    """Sparse 0/1 matrix of U_alpha, one nonzero per column."""
    if d < 2:
        raise InvalidArgumentError(f"local dimension must be >= 2, got {d}")
    dim = check_dimension(d ** alpha.k)
    rows = _leg_image_indices(alpha.image, d)
    return sparse.csr_matrix((np.ones(dim), (rows, np.arange(dim))), shape=(dim, dim))


def permutation_unitary(alpha: Permutation, d: int) -> ComplexOperator:
    """U_alpha |x_1..x_k> = |x_{alpha^-1(1)}..x_{alpha^-1(k)}>."""
    return ComplexOperator(permutation_matrix(alpha, d).toarray())


def unitary_trace(alpha: Permutation, d: int) -> int:
    """Tr(U_alpha) as an exact integer: the number of basis strings U_alpha fixes."""
    dim = check_dimension(d ** alpha.k)
    return int(np.count_nonzero(_leg_image_indices(alpha.image, d) == np.arange(dim)))


def copy_permutation_matrix(perms_per_party: Sequence[Permutation], d: int) -> sparse.csr_matrix:
    """Sparse unitary on k copies of an n-party system permuting the copies of party i by perms_per_party[i].

    Legs are copy-major (leg j*n + i), so equal permutations on every party give U_alpha on (C^{d^n})^{⊗k}.
    """
    n = len(perms_per_party)
    if n == 0:
        raise InvalidArgumentError("need at least one party")
    k = perms_per_party[0].k
    if any(p.k != k for p in perms_per_party):
        raise InvalidArgumentError("all per-party permutations must have the same degree")
    dim = check_dimension(d ** (n * k))
    leg_image = [0] * (n * k)
    for i, perm in enumerate(perms_per_party):
        for j in range(k):
            leg_image[j * n + i] = perm(j) * n + i
    rows = _leg_image_indices(leg_image, d)
    return sparse.csr_matrix((np.ones(dim), (rows, np.arange(dim))), shape=(dim, dim))


def copy_permutation_unitary(perms_per_party: Sequence[Permutation], d: int) -> ComplexOperator:
    return ComplexOperator(copy_permutation_matrix(perms_per_party, d).toarray())


def sym_projector_sparse(k: int, d: int) -> sparse.csr_matrix:
    """Pi^k_d = E_alpha[U_alpha], accumulated sparsely."""
    group = enumerate_group(k)
    dim = check_dimension(d ** k)
    cols = np.tile(np.arange(dim), len(group))
    rows = np.concatenate([_leg_image_indices(alpha.image, d) for alpha in group])
    data = np.full(rows.shape[0], 1.0 / len(group))
    # coo -> csr sums duplicate entries
    return sparse.coo_matrix((data, (rows, cols)), shape=(dim, dim)).tocsr()


def sym_projector(k: int, d: int) -> ComplexOperator:
    """Projector onto Sym^k(C^d); real entries, rank C(d+k-1, k)."""
    if d < 1:
        raise InvalidArgumentError(f"local dimension must be >= 1, got {d}")
    return ComplexOperator(sym_projector_sparse(k, d).toarray())


def sym_dimension(k: int, d: int) -> int:
    return math.comb(d + k - 1, k)


def sym_projector_haar_mc(k: int, d: int, samples: int, seed: Optional[int] = None, batch: int = 10_000) -> ComplexOperator:
    """C(d+k-1, k) times the empirical mean of |psi><psi|^{⊗k} over Haar-random |psi> in C^d."""
    if samples < 1:
        raise InvalidArgumentError(f"samples must be >= 1, got {samples}")
    if d < 1 or k < 1:
        raise InvalidArgumentError(f"need k >= 1 and d >= 1, got k={k}, d={d}")
    dim = check_dimension(d ** k)
    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    acc = np.zeros((dim, dim), dtype=np.complex128)
    remaining = samples
    while remaining > 0:
        m = min(batch, remaining)
        g = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        powers = g
        for _ in range(k - 1):
            powers = np.einsum("si,sj->sij", powers, g).reshape(m, -1)
        acc += powers.T @ powers.conj()
        remaining -= m
    logger.debug(f"Haar moment estimate for k={k}, d={d} from {samples} samples")
    return ComplexOperator(sym_dimension(k, d) * acc / samples)
