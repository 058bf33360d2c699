from fastapi import APIRouter, HTTPException

from ..core import ConstructionError
from ..construction.params import derive_params, check_regime
from ..models import Params, ParamsRequest, RegimeDiagnostics

router = APIRouter(prefix="/params", tags=["Params"])


def _derive(request: ParamsRequest) -> Params:
    try:
        return derive_params(request.ell, request.n, request.mode, request.overrides())
    except ConstructionError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@router.post("/derive", response_model=Params)
async def derive(request: ParamsRequest):
    """Derive construction parameters for (ell, n)."""
    return _derive(request)


@router.post("/regime", response_model=RegimeDiagnostics)
async def regime(request: ParamsRequest):
    """Report which finite-n inequalities hold for the derived parameters."""
    return check_regime(_derive(request))
