"""
Tensor core - exact dense linear algebra over multipartite states and operators

Index convention used everywhere in prodtest: party 0 is the most significant
digit of the base-d index. For k copies of an n-party state the legs are ordered
copy-major, i.e. leg (copy j, party i) sits at position j*n + i.
"""
import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from prodtest.config.settings import settings
from prodtest.errors import CapacityError, DimensionMismatchError, InvalidArgumentError, InvalidStateError

logger = logging.getLogger(__name__)

# exactly representable constructions
ALGEBRAIC_TOL = 1e-9
# identities that go through an eigensolver or SVD
SPECTRAL_TOL = 1e-8


def check_dimension(dim: int, cap: Optional[int] = None, what: str = "dimension") -> int:
    """Raise CapacityError when `dim` exceeds the configured cap."""
    cap = settings.dimension_cap if cap is None else cap
    if dim > cap:
        raise CapacityError(f"{what} {dim} exceeds the configured maximum {cap}")
    return dim


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Unit vector in (C^d)^{⊗n}."""
    n: int
    d: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError(f"party count must be >= 1, got {self.n}")
        if self.d < 2:
            raise InvalidArgumentError(f"local dimension must be >= 2, got {self.d}")
        dim = check_dimension(self.d ** self.n)
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != dim:
            raise DimensionMismatchError(f"expected {dim} amplitudes for n={self.n}, d={self.d}, got {amps.shape[0]}")
        if not np.all(np.isfinite(amps)):
            raise InvalidStateError("amplitudes contain NaN or Inf")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > ALGEBRAIC_TOL:
            raise InvalidStateError(f"state norm {norm!r} deviates from 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_vector(cls, vector, n: int, d: int) -> "PureState":
        """Normalize an arbitrary nonzero vector and wrap it."""
        vec = np.asarray(vector, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise InvalidStateError("cannot normalize the zero vector")
        return cls(n=n, d=d, amplitudes=vec / norm)

    @property
    def dim(self) -> int:
        return self.d ** self.n

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class ComplexOperator:
    """Square complex matrix with no positivity or trace constraint (U_alpha, unnormalized projectors)."""
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"operator must be square, got shape {m.shape}")
        check_dimension(m.shape[0])
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("operator entries contain NaN or Inf")
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian matrix; when `is_state` it must also be PSD with unit trace.

    Real-valued constructions (symmetric-subspace projectors) stay float64 to halve memory.
    """
    entries: np.ndarray = field(repr=False)
    is_state: bool = True

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"density operator must be square, got shape {m.shape}")
        check_dimension(m.shape[0])
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("density operator contains NaN or Inf")
        deviation = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if deviation > ALGEBRAIC_TOL:
            raise InvalidStateError(f"operator is not Hermitian (max deviation {deviation:.3e})")
        if self.is_state:
            tr = complex(np.trace(m))
            if abs(tr - 1.0) > ALGEBRAIC_TOL:
                raise InvalidStateError(f"state trace {tr.real:.12g} deviates from 1")
            if m.shape[0] <= settings.psd_check_max_dim:
                require_psd(m)
        object.__setattr__(self, "entries", _frozen(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class Bipartition:
    """Subset S of the parties [n]; the cut is S : S^c."""
    n: int
    members: FrozenSet[int]

    def __post_init__(self):
        members = frozenset(int(i) for i in self.members)
        bad = [i for i in members if i < 0 or i >= self.n]
        if bad:
            raise InvalidArgumentError(f"bipartition members {sorted(bad)} outside [0, {self.n})")
        object.__setattr__(self, "members", members)

    @property
    def nontrivial(self) -> bool:
        return 0 < len(self.members) < self.n

    @property
    def parties(self) -> Tuple[int, ...]:
        return tuple(sorted(self.members))

    def complement(self) -> "Bipartition":
        return Bipartition(self.n, frozenset(range(self.n)) - self.members)


Operand = Union[ComplexOperator, DensityOperator, PureState]


def tensor(a: Operand, b: Operand, cap: Optional[int] = None) -> Operand:
    """Kronecker product, first factor most significant."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        if a.d != b.d:
            raise DimensionMismatchError(f"cannot tensor states of local dimension {a.d} and {b.d}")
        check_dimension(a.dim * b.dim, cap)
        return PureState(n=a.n + b.n, d=a.d, amplitudes=np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        check_dimension(a.dim * b.dim, cap)
        return DensityOperator(np.kron(a.entries, b.entries), is_state=a.is_state and b.is_state)
    if isinstance(a, (ComplexOperator, DensityOperator)) and isinstance(b, (ComplexOperator, DensityOperator)):
        check_dimension(a.dim * b.dim, cap)
        return ComplexOperator(np.kron(a.entries, b.entries))
    raise DimensionMismatchError(f"incompatible kinds for tensor: {type(a).__name__} and {type(b).__name__}")


def identity(dim: int) -> ComplexOperator:
    check_dimension(dim)
    return ComplexOperator(np.eye(dim))


def basis_state(n: int, d: int, index: int) -> PureState:
    """|index> in the global convention (party 0 most significant)."""
    vec = np.zeros(d ** n, dtype=np.complex128)
    vec[index] = 1.0
    return PureState(n=n, d=d, amplitudes=vec)


def tensor_power_vector(vec: np.ndarray, k: int) -> np.ndarray:
    out = np.ones(1, dtype=np.result_type(vec, np.float64))
    for _ in range(k):
        out = np.kron(out, vec)
    return out


def permute_vector_legs(vec: np.ndarray, d: int, order: Sequence[int]) -> np.ndarray:
    """Vector whose legs are listed in `order` (order[q] = canonical position of leg q), re-expressed canonically."""
    m = len(order)
    inv = np.argsort(order)
    return np.asarray(vec).reshape([d] * m).transpose(inv).reshape(-1)


def permute_legs(matrix: np.ndarray, d: Union[int, Sequence[int]], order: Sequence[int]) -> np.ndarray:
    """Operator acting on legs listed in `order`, re-expressed in canonical leg order.

    `d` is the common leg dimension or the dimension of each input leg.
    This is the single reshuffle primitive behind the ⊗_S embedding.
    """
    m = len(order)
    if sorted(order) != list(range(m)):
        raise InvalidArgumentError(f"leg order {list(order)} is not a permutation of range({m})")
    dims = [d] * m if isinstance(d, (int, np.integer)) else [int(x) for x in d]
    if len(dims) != m:
        raise DimensionMismatchError(f"{len(dims)} leg dimensions given for {m} legs")
    total = int(np.prod(dims))
    inv = [int(q) for q in np.argsort(order)]
    axes = inv + [m + q for q in inv]
    return np.asarray(matrix).reshape(dims + dims).transpose(axes).reshape(total, total)


def regroup(psi: PureState, s: Bipartition) -> np.ndarray:
    """Coefficient matrix d^|S| x d^(n-|S|) whose singular values are the Schmidt coefficients across S:S^c."""
    if s.n != psi.n:
        raise DimensionMismatchError(f"bipartition over {s.n} parties applied to a {psi.n}-party state")
    rows = s.parties
    cols = s.complement().parties
    tensor_view = psi.amplitudes.reshape([psi.d] * psi.n).transpose(rows + cols)
    return tensor_view.reshape(psi.d ** len(rows), psi.d ** len(cols))


def unregroup(matrix: np.ndarray, s: Bipartition, d: int) -> PureState:
    """Inverse of regroup."""
    rows = s.parties
    cols = s.complement().parties
    order = list(rows + cols)
    amps = np.asarray(matrix).reshape([d] * s.n).transpose(np.argsort(order)).reshape(-1)
    return PureState(n=s.n, d=d, amplitudes=amps)


def schmidt_coefficients(psi: PureState, s: Bipartition) -> np.ndarray:
    return np.linalg.svd(regroup(psi, s), compute_uv=False)


def reduced_density(psi: PureState, s: Bipartition) -> DensityOperator:
    """Reduced state on the parties in S (partial trace over S^c)."""
    m = regroup(psi, s)
    return DensityOperator(m @ m.conj().T)


def purity(rho: DensityOperator) -> float:
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho.entries) ** 2))


def require_psd(matrix: np.ndarray, what: str = "state") -> float:
    """Lowest eigenvalue of a Hermitian matrix; InvalidStateError below -ALGEBRAIC_TOL."""
    lowest = float(np.linalg.eigvalsh(matrix)[0])
    if lowest < -ALGEBRAIC_TOL:
        raise InvalidStateError(f"{what} has negative eigenvalue {lowest:.3e}")
    return lowest


def _require_same_dim(a_dim: int, b_dim: int) -> None:
    if a_dim != b_dim:
        raise DimensionMismatchError(f"dimension mismatch: {a_dim} vs {b_dim}")


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """D = 1/2 ||rho - sigma||_1 from the eigenvalues of the Hermitian difference."""
    _require_same_dim(rho.dim, sigma.dim)
    value = 0.5 * trace_norm(rho.entries - sigma.entries)
    return min(max(value, 0.0), 1.0) if rho.is_state and sigma.is_state else value


def trace_norm(matrix: np.ndarray) -> float:
    """||A||_1 of a Hermitian matrix."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(matrix))))


def overlap(psi: PureState, phi: PureState) -> complex:
    """<psi|phi>."""
    _require_same_dim(psi.dim, phi.dim)
    return complex(np.vdot(psi.amplitudes, phi.amplitudes))


def pure_trace_distance(psi: PureState, phi: PureState) -> float:
    """sqrt(1 - |<psi|phi>|^2), the closed form for pure states."""
    return float(np.sqrt(max(0.0, 1.0 - abs(overlap(psi, phi)) ** 2)))


def mixture(states: Iterable[np.ndarray], weights: Iterable[float]) -> np.ndarray:
    """sum_i w_i |v_i><v_i| as a dense matrix."""
    acc = None
    for vec, w in zip(states, weights):
        term = w * np.outer(vec, np.conj(vec))
        acc = term if acc is None else acc + term
    if acc is None:
        raise InvalidArgumentError("empty mixture")
    return acc


def apply_local(psi: PureState, unitaries: Sequence[np.ndarray]) -> PureState:
    """(U_0 ⊗ U_1 ⊗ ... ⊗ U_{n-1}) |psi>, one d x d matrix per party."""
    if len(unitaries) != psi.n:
        raise DimensionMismatchError(f"{len(unitaries)} local operators for {psi.n} parties")
    t = psi.amplitudes.reshape([psi.d] * psi.n)
    for party, u in enumerate(unitaries):
        t = np.moveaxis(np.tensordot(np.asarray(u), t, axes=([1], [party])), 0, party)
    return PureState(n=psi.n, d=psi.d, amplitudes=t.reshape(-1))
