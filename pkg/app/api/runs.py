from fastapi import APIRouter, HTTPException, Query
from fastapi.responses import Response
from typing import Optional

from ..core import ConstructionError
from ..construction.pipeline import run_pipeline
from ..models import ExperimentConfig

router = APIRouter(prefix="/runs", tags=["Runs"])


@router.post("")
def create_run(config: ExperimentConfig, seed: Optional[int] = Query(None)):
    """Run the full pipeline for one seed (defaults to the first configured seed)."""
    seed = config.seeds[0] if seed is None else seed
    try:
        report = run_pipeline(config, seed)
    except ConstructionError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return Response(content=report.model_dump_json(by_alias=True), media_type="application/json")
