from fastapi import APIRouter, HTTPException, UploadFile, File, Form
from fastapi.responses import Response
from typing import Optional

from ..core import ConstructionError, settings
from ..construction.cleanup import build_orderings, edge_delete, vertex_delete
from ..construction.cycles import count_cycles
from ..construction.indep import alpha_exact, ind_set_probability_bound, independent_set_search
from ..construction.params import derive_params
from ..construction.pseudo import verify_A
from ..construction.storage import StoredInstance, loads_instance
from ..models import InstanceAlphaReport, IndependenceReport, Mode

router = APIRouter(prefix="/instances", tags=["Instances"])


async def _read(graph: UploadFile, partition: UploadFile) -> StoredInstance:
    try:
        graph_text = (await graph.read()).decode("utf-8")
        partition_text = (await partition.read()).decode("utf-8")
    except UnicodeDecodeError:
        raise HTTPException(status_code=400, detail="Instance files must be UTF-8 text")
    try:
        return loads_instance(graph_text, partition_text)
    except ConstructionError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def _respond(model) -> Response:
    return Response(content=model.model_dump_json(by_alias=True), media_type="application/json")


@router.post("/verify")
async def verify(
    graph: UploadFile = File(...),
    partition: UploadFile = File(...),
    p: float = Form(...),
    k: int = Form(...),
    delta: float = Form(...),
    eta: Optional[float] = Form(None),
    trials: int = Form(200, ge=1)
):
    """Check the pseudo-randomness event on an uploaded G'."""
    stored = await _read(graph, partition)
    header = stored.header
    overrides = {"p": p, "r": header.r, "k": k, "delta": delta}
    if eta is not None:
        overrides["eta"] = eta
    try:
        params = derive_params(header.ell, header.n, Mode.OPERATIONAL, overrides)
        report = verify_A(stored.instance(), params, trials, trials, header.seed)
    except ConstructionError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return _respond(report)


@router.post("/alpha")
async def alpha(
    graph: UploadFile = File(...),
    partition: UploadFile = File(...),
    p: float = Form(...),
    k: int = Form(...),
    delta: float = Form(...),
    budget: int = Form(20, ge=1)
):
    """Run both deletion steps on an uploaded G' and search for a large independent set."""
    stored = await _read(graph, partition)
    header = stored.header
    try:
        params = derive_params(header.ell, header.n, Mode.OPERATIONAL, {"p": p, "r": header.r, "k": k, "delta": delta})
        prime = stored.graph
        if prime.alive != prime.full_mask:
            raise HTTPException(status_code=400, detail="Uploaded graph must be G' with every vertex alive")
        hat, _ = vertex_delete(prime, stored.partitions, header.ell)
        final, deletion = edge_delete(hat, build_orderings(stored.partitions, header.seed), header.ell)
        best = independent_set_search(final, k, budget, header.seed)
        independence = IndependenceReport(
            best_found_set=best,
            best_found_size=len(best),
            bound_log=ind_set_probability_bound(params),
        )
        if final.alive_count <= settings.ALPHA_EXACT_CAP:
            independence.alpha_exact = alpha_exact(final)
        report = InstanceAlphaReport(
            vertices_surviving=hat.alive_count,
            edges_deleted=deletion.edges_deleted,
            cycles_in_final_graph=count_cycles(final, header.ell),
            independence=independence,
        )
    except ConstructionError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return _respond(report)
