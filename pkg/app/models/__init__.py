from .params import (
    Mode,
    Params,
    RegimeDiagnostics,
    ParamsRequest
)
from .reports import (
    DeletionReport,
    VerifierReport,
    SpectralSummary,
    WalkComparison,
    WalkSummary,
    IndependenceBoundReport,
    ClaimVerdict,
    IndependenceReport,
    BaselineReport,
    StageError,
    RunReport,
    InstanceAlphaReport
)
from .experiment import ExperimentConfig
