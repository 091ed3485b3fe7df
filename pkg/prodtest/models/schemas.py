"""
Pydantic models for CLI input files and emitted reports
"""

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class GridPoint(BaseModel):
    """(n, k, d): parties, copies, local dimension"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Number of parties")
    k: int = Field(..., ge=1, description="Number of copies")
    d: int = Field(..., ge=2, description="Local dimension of every party")

    @property
    def party_dim(self) -> int:
        return self.d ** self.n

    @property
    def total_dim(self) -> int:
        return self.d ** (self.n * self.k)


# Column order of sweep CSVs; the first nine are the fixed contract
BOUND_COLUMNS = [
    "n", "k", "d", "exact_D", "D_squared", "lemma3_bound", "f_trace", "f_cycle", "satisfied",
    "chain_satisfied", "two_norm_bound", "f_bound", "f_upper", "decay_exponent", "small_ratio_regime", "note",
]


class BoundReport(BaseModel):
    """One sweep row: the exact D(rho, sigma) check against the closed-form bound"""
    grid: GridPoint
    exact_D: Optional[float] = Field(None, description="Exact trace distance D(rho, sigma); absent above the dense cap")
    D_squared: Optional[float] = Field(None, description="exact_D squared")
    lemma3_bound: float = Field(..., description="(k!/4)(1 + (k!)^3((1+d)/2d)^n - e^{-k^2/d^n})")
    f_trace: Optional[float] = Field(None, description="F(k,n,d) from explicit matrix products")
    f_cycle: Optional[float] = Field(None, description="F(k,n,d) from cycle-number statistics")
    satisfied: bool = Field(..., description="D_squared <= lemma3_bound + 1e-9; true when exact_D is absent")
    chain_satisfied: bool = Field(True, description="Every other computed link of the chain holds and the two F routes agree")
    two_norm_bound: Optional[float] = Field(None, description="(d^{nk}/4)(Tr sigma^2 - Tr rho^2)")
    f_bound: Optional[float] = Field(None, description="(k!/4)(F (k!)^3/d^{nk} - e^{-k^2/d^n})")
    f_upper: Optional[float] = Field(None, description="d^{nk}/(k!)^3 + d^{nk}((1+d)/2d)^n")
    decay_exponent: float = Field(..., description="2k log2 k - a n with a = log2(4/3)/2")
    small_ratio_regime: bool = Field(..., description="True when k^2 < d^n")
    note: str = Field("", description="Capacity messages for skipped routes")

    def to_row(self) -> Dict[str, object]:
        row = self.model_dump(exclude={"grid"})
        row.update(n=self.grid.n, k=self.grid.k, d=self.grid.d)
        return {col: row[col] for col in BOUND_COLUMNS}


TAIL_COLUMNS = ["n", "d", "gamma", "samples", "exceed_count", "frequency", "wilson_upper", "lemma_bound", "N", "seed"]


class TailEstimate(BaseModel):
    """Monte Carlo estimate of P(Gamma_max > gamma) next to the closed-form tail bound"""
    n: int = Field(..., ge=2)
    d: int = Field(..., ge=2)
    gamma: float
    samples: int = Field(..., ge=1)
    exceed_count: int = Field(..., ge=0)
    frequency: float = Field(..., ge=0.0, le=1.0)
    wilson_upper: float = Field(..., description="Upper end of the 95% Wilson score interval")
    lemma_bound: float = Field(..., description="c1 2^n exp(-c2 d^n)")
    n_threshold: float = Field(..., description="Party-count threshold N above which the bound applies")
    seed: int

    @model_validator(mode="after")
    def _check_frequency(self):
        if self.exceed_count > self.samples:
            raise ValueError("exceed_count cannot exceed samples")
        return self

    def to_row(self) -> Dict[str, object]:
        row = self.model_dump()
        row["N"] = row.pop("n_threshold")
        return {col: row[col] for col in TAIL_COLUMNS}


class RepetitionRecord(BaseModel):
    """One product-test run inside a tester transcript"""
    index: int
    cut: Optional[List[int]] = Field(None, description="Parties of S for bipartite runs; None for singleton runs")
    accepted: bool
    block_outcomes: List[bool] = Field(default_factory=list, description="Swap-test outcome per block, in measurement order")


class TestOutcome(BaseModel):
    """Result of an MP or naive BP tester run"""
    __test__ = False  # not a pytest class

    mode: Literal["mp", "bp"]
    accepted: bool
    copies_used: int = Field(..., ge=0)
    accept_probability: Optional[float] = Field(None, description="Exact overall acceptance probability of the schedule")
    cut_accept_probabilities: Optional[Dict[str, float]] = Field(None, description="Exact per-run accept probability for each cut")
    union_bound: Optional[float] = Field(None, description="Sum over cuts of the per-cut false-accept probability")
    transcript: List[RepetitionRecord] = Field(default_factory=list)


class CheckResult(BaseModel):
    """Single named check of a verification suite"""
    suite: str
    name: str
    passed: bool
    detail: str = ""
    value: Optional[float] = None
    bound: Optional[float] = None


class VerificationReport(BaseModel):
    """Machine-readable summary of `verify`"""
    suite: str
    passed: bool
    seed: int
    checks: List[CheckResult]


class MeasureReport(BaseModel):
    """Entanglement summary of one state"""
    n: int
    d: int
    gamma_max_per_cut: Dict[str, float] = Field(..., description="Largest Schmidt coefficient keyed by the parties of S")
    Gamma_max: float
    E_G: float
    distance_to_bp: float
    overlap_per_cut: Optional[Dict[str, float]] = Field(None, description="Alternating-maximization estimate per cut")
    connected: Optional[bool] = Field(None, description="Graph connectivity when the input was an edge list")


class StateFile(BaseModel):
    """On-disk pure state: amplitudes as [re, im] pairs in the global index convention"""
    n: int = Field(..., ge=1)
    d: int = Field(..., ge=2)
    amplitudes: List[Tuple[float, float]]

    @model_validator(mode="after")
    def _check_length(self):
        expected = self.d ** self.n
        if len(self.amplitudes) != expected:
            raise ValueError(f"expected {expected} amplitudes for n={self.n}, d={self.d}, got {len(self.amplitudes)}")
        return self


class ExperimentConfig(BaseModel):
    """Unit of work built from the command line"""
    subcommand: Literal["verify", "sweep", "tail", "test", "measure"]
    n_values: List[int] = Field(default_factory=list)
    k_values: List[int] = Field(default_factory=list)
    d_values: List[int] = Field(default_factory=list)
    gamma: Optional[float] = None
    epsilon: Optional[float] = None
    samples: Optional[int] = None
    reps: Optional[int] = None
    reps_per_cut: Optional[int] = None
    seed: int = Field(..., ge=0, lt=2 ** 64)
    out: Optional[str] = None
    format: Literal["csv", "json"] = "csv"
    workers: int = Field(1, ge=1)

    @field_validator("n_values", "k_values", "d_values")
    @classmethod
    def _positive(cls, values: List[int]) -> List[int]:
        if any(v < 1 for v in values):
            raise ValueError("range values must be positive integers")
        return values

    @model_validator(mode="after")
    def _ranges_present(self):
        if self.subcommand == "sweep" and not (self.n_values and self.k_values and self.d_values):
            raise ValueError("sweep needs nonempty --n, --k and --d ranges")
        if self.subcommand == "tail" and not (self.n_values and self.d_values):
            raise ValueError("tail needs nonempty --n and --d")
        return self
