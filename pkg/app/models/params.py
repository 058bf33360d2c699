from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Optional, Dict
from enum import Enum


class Mode(str, Enum):
    ASYMPTOTIC = "asymptotic"
    OPERATIONAL = "operational"


class Params(BaseModel):
    ell: int = Field(ge=5)
    n: int = Field(ge=1)
    p_c: float
    eps: float
    eps_intro: float
    p: float = Field(gt=0, lt=1)
    r: int = Field(ge=1)
    k: int = Field(ge=1)
    delta: float = Field(gt=0, le=1)
    eta: float = Field(gt=0)
    mode: Mode
    # unrounded formula values, present in asymptotic mode
    k_formula: Optional[float] = None
    r_formula: Optional[float] = None

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_invariants(self):
        if self.ell % 2 == 0:
            raise ValueError("ell must be odd")
        if self.r > self.n:
            raise ValueError("r must not exceed n")
        if self.n % self.r:
            raise ValueError("r must divide n")
        return self

    @property
    def m(self) -> int:
        """Number of blocks per partition."""
        return self.n // self.r

    def to_flat(self) -> Dict[str, str]:
        """Flat key-value document consumed by the harness config."""
        keys = ("ell", "n", "p_c", "eps", "p", "r", "k", "delta", "eta", "mode")
        return {key: str(getattr(self, key).value if key == "mode" else getattr(self, key)) for key in keys}


class RegimeDiagnostics(BaseModel):
    ratio_ineq1: float
    ineq2_ok: bool
    r_vs_pn_ok: bool
    union_bound_margin: float
    formula_margin: Optional[float] = None
    exponent_identity_err: float

    model_config = ConfigDict(frozen=True)


class ParamsRequest(BaseModel):
    ell: int
    n: int
    mode: Mode = Mode.ASYMPTOTIC
    p: Optional[float] = None
    r: Optional[int] = None
    k: Optional[int] = None
    delta: Optional[float] = None
    eta: Optional[float] = None

    def overrides(self) -> Dict[str, float]:
        keys = ("p", "r", "k", "delta", "eta")
        return {key: getattr(self, key) for key in keys if getattr(self, key) is not None}
