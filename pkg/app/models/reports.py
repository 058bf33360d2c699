from pydantic import BaseModel, ConfigDict, Field
from pydantic.alias_generators import to_camel
from typing import Optional, List, Dict

from .params import Params, RegimeDiagnostics


class ReportModel(BaseModel):
    """Report fragments serialize with camelCase keys."""

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True, ser_json_inf_nan="constants")


class DeletionReport(ReportModel):
    bad_broken_cycles_found: int = Field(default=0, alias="badBrokenCycles")
    vertices_deleted: int = 0
    cycles_ell_found: int = Field(default=0, alias="cyclesFound")
    edges_deleted: int = 0
    # "t,a" -> number of bad broken cycles of length t with a actual edges
    histogram: Dict[str, int] = Field(default_factory=dict)


class VerifierReport(ReportModel):
    degree_dev_red: float
    degree_dev_blue: float
    degree_tol: float
    degrees_passed: bool
    spectral_dev_red: float
    spectral_dev_blue: float
    spectral_bound: float
    spectral_passed: bool
    projection_trials: int
    projection_failures: int
    projection_exhaustive: bool = False
    double_degree_max: int
    double_degree_bound: float
    double_degree_passed: bool
    expansion_trials: int
    expansion_failures: int
    passed: bool


class SpectralSummary(ReportModel):
    mu: float
    v_inf: float
    m_norm: float
    residual: float
    mu_ratio: float
    v_inf_bound: float
    m_norm_bound: float


class WalkComparison(ReportModel):
    j_size: int
    union_count: int
    operator_count: int
    intermediate_bound: Optional[float] = None
    closed_form_bound: float


class WalkSummary(ReportModel):
    counted: str = "walks (vertex repetition allowed); walks upper-bound paths"
    comparisons: List[WalkComparison] = Field(default_factory=list)
    dominance_holds: bool = True
    intermediate_holds: bool = True


class IndependenceBoundReport(ReportModel):
    log_set_probability: float
    log_expected_count: float
    log_expected_count_bound: float


class ClaimVerdict(ReportModel):
    premise: bool
    open_pairs: int
    open_red_edges: int
    counterexample: Optional[List[int]] = None
    passed: bool


class IndependenceReport(ReportModel):
    best_found_set: List[int] = Field(default_factory=list)
    best_found_size: int = 0
    alpha_exact: Optional[int] = None
    representatives: Optional[int] = None
    representatives_color: Optional[str] = None
    closed_pairs: Optional[int] = None
    open_pairs: Optional[int] = None
    closed_pair_bound: Optional[float] = None
    claim: Optional[ClaimVerdict] = None
    bound_log: Optional[IndependenceBoundReport] = None


class BaselineReport(ReportModel):
    p: float
    edges_before: int
    cycles_found: int
    edges_removed: int
    cycles_after: int
    best_indep_size: int


class StageError(ReportModel):
    stage: str
    error: str


class RunReport(ReportModel):
    seed: int
    params: Params
    regime: Optional[RegimeDiagnostics] = None
    deletion: Optional[DeletionReport] = None
    vertices_surviving: Optional[int] = None
    cycles_in_final_graph: Optional[int] = None
    event_a: Optional[VerifierReport] = Field(default=None, alias="eventA")
    spectral: Optional[SpectralSummary] = None
    walks: Optional[WalkSummary] = None
    independence: Optional[IndependenceReport] = None
    baseline: Optional[BaselineReport] = None
    # field name -> why it is null
    missing: Dict[str, str] = Field(default_factory=dict)
    errors: List[StageError] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


class InstanceAlphaReport(ReportModel):
    vertices_surviving: int
    edges_deleted: int
    cycles_in_final_graph: int
    independence: IndependenceReport
