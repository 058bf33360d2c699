from pydantic import BaseModel, Field, field_validator, model_validator
from typing import Optional, List, Dict, Any
from dotenv import dotenv_values

from .params import Mode, Params


class ExperimentConfig(BaseModel):
    ell: int = 5
    n: int
    mode: Mode = Mode.OPERATIONAL
    seeds: List[int] = Field(default_factory=lambda: [0])

    # operational overrides
    p: Optional[float] = None
    r: Optional[int] = None
    k: Optional[int] = None
    delta: Optional[float] = None
    eta: Optional[float] = None

    # trial budgets
    trials: int = Field(default=1000, ge=1)
    walk_samples: int = Field(default=20, ge=0)
    j_size: Optional[int] = Field(default=None, ge=1)
    search_budget: int = Field(default=20, ge=1)
    baseline: bool = True

    cap: Optional[int] = Field(default=None, ge=1)
    out: Optional[str] = None

    @field_validator("seeds", mode="before")
    @classmethod
    def _split_seeds(cls, value):
        if isinstance(value, str):
            return [int(part) for part in value.replace(",", " ").split()]
        if isinstance(value, int):
            return [value]
        return value

    @model_validator(mode="after")
    def _check_params(self):
        if not self.seeds:
            raise ValueError("at least one seed is required")
        self.params()
        return self

    def overrides(self) -> Dict[str, Any]:
        keys = ("p", "r", "k", "delta", "eta")
        return {key: getattr(self, key) for key in keys if getattr(self, key) is not None}

    def params(self) -> Params:
        """Derived parameters; raises ParameterError on invalid input."""
        from ..construction.params import derive_params

        return derive_params(self.ell, self.n, self.mode, self.overrides())

    @classmethod
    def from_file(cls, path: str, **overrides) -> "ExperimentConfig":
        """Read a flat key = value file; non-None overrides win."""
        values: Dict[str, Any] = {
            key.strip().lower(): value
            for key, value in dotenv_values(path).items()
            if value is not None and value != ""
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)
