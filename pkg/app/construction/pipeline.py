"""
End-to-end runs: sample, delete, verify, measure, report.

A stage that raises a ConstructionError is recorded in the report and
every field depending on it is left null with a reason; independent
stages still run.
"""
import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, TypeVar

from ..core.config import settings
from ..core.errors import ConstructionError
from ..core.seeding import stage_rng
from ..models.experiment import ExperimentConfig
from ..models.params import Params
from ..models.reports import (
    BaselineReport,
    DeletionReport,
    IndependenceReport,
    RunReport,
    StageError,
    WalkComparison,
    WalkSummary,
)
from .cleanup import build_orderings, edge_delete, vertex_delete
from .cycles import count_cycles
from .indep import (
    alpha_exact,
    baseline_construction,
    check_claim,
    closed_pair_bound,
    closed_pairs,
    ind_set_probability_bound,
    independent_set_search,
    pick_representatives,
)
from .model import ColoredGraph, Instance, sample_instance
from .params import check_regime
from .pseudo import verify_A
from .spectral import SpectralDecomposition, count_walks_exact, decompose, operator_for, summarize, walk_bound

logger = logging.getLogger(__name__)

T = TypeVar("T")

CSV_COLUMNS = (
    "seed",
    "verticesSurviving",
    "edgesDeleted",
    "eventAPassed",
    "mu",
    "MNorm",
    "walkExact",
    "walkBound",
    "bestIndepFound",
    "baselineBestIndep",
)


@dataclass
class PipelineRun:
    report: RunReport
    instance: Optional[Instance] = None
    hat: Optional[ColoredGraph] = None
    final: Optional[ColoredGraph] = None
    orderings: Optional[tuple] = None


class _Stages:
    """Runs named stages, recording timings and captured errors."""

    def __init__(self, report: RunReport):
        self.report = report

    def run(self, name: str, fn: Callable[..., T], *args, **kwargs) -> Optional[T]:
        started = time.perf_counter()
        logger.debug("stage %s started", name)
        try:
            return fn(*args, **kwargs)
        except ConstructionError as exc:
            logger.error("stage %s failed: %s", name, exc)
            self.report.errors.append(StageError(stage=name, error=f"{type(exc).__name__}: {exc}"))
            return None
        finally:
            self.report.timings[name] = round(time.perf_counter() - started, 6)

    def missing(self, field: str, reason: str) -> None:
        self.report.missing.setdefault(field, reason)


def _j_size(config: ExperimentConfig, params: Params) -> int:
    size = config.j_size or max(1, math.ceil(params.delta * params.k))
    return min(size, params.n)


def walk_summary(
    config: ExperimentConfig, params: Params, instance: Instance, decomposition: Optional[SpectralDecomposition], seed: int
) -> WalkSummary:
    rng = stage_rng(seed, "walks")
    op = operator_for(instance)
    size = _j_size(config, params)
    length = params.ell - 1
    summary = WalkSummary()
    for _ in range(config.walk_samples):
        J = sorted(int(v) for v in rng.choice(params.n, size=size, replace=False))
        union_count = count_walks_exact(instance.prime, J, length)
        operator_count = count_walks_exact(op, J, length)
        closed, intermediate = walk_bound(params, size, decomposition, J)
        summary.comparisons.append(
            WalkComparison(
                j_size=size,
                union_count=union_count,
                operator_count=operator_count,
                intermediate_bound=intermediate,
                closed_form_bound=closed,
            )
        )
    summary.dominance_holds = all(c.union_count <= c.operator_count for c in summary.comparisons)
    summary.intermediate_holds = all(
        c.intermediate_bound is None or c.operator_count <= c.intermediate_bound * (1 + 1e-9)
        for c in summary.comparisons
    )
    return summary


def independence_stage(
    config: ExperimentConfig, params: Params, instance: Instance, final: ColoredGraph, seed: int, missing: Dict[str, str]
) -> IndependenceReport:
    best = independent_set_search(final, params.k, config.search_budget, stage_rng(seed, "search"))
    report = IndependenceReport(
        best_found_set=best,
        best_found_size=len(best),
        bound_log=ind_set_probability_bound(params),
    )
    if final.alive_count <= settings.ALPHA_EXACT_CAP:
        report.alpha_exact = alpha_exact(final)
    else:
        missing.setdefault("independence.alphaExact", f"more than {settings.ALPHA_EXACT_CAP} surviving vertices")
    if not best:
        missing.setdefault("independence.claim", "no independent set found")
        return report
    J, color = pick_representatives(best, instance.partitions, params.delta, len(best))
    if J is None:
        missing.setdefault("independence.claim", "both projections of the found set are too small")
        return report
    report.representatives = len(J)
    report.representatives_color = color.value
    closed = closed_pairs(instance.prime, instance.partitions, J, params.ell)
    report.closed_pairs = len(closed)
    report.closed_pair_bound = closed_pair_bound(params, len(J))
    report.claim = check_claim(instance, J, final, params.ell, color)
    report.open_pairs = report.claim.open_pairs
    return report


def baseline_stage(config: ExperimentConfig, params: Params, seed: int) -> BaselineReport:
    result = baseline_construction(params.n, params.ell, stage_rng(seed, "baseline"), cap=config.cap)
    best = independent_set_search(result.graph, params.n, config.search_budget, stage_rng(seed, "baseline.search"))
    return BaselineReport(
        p=result.p,
        edges_before=result.edges_before,
        cycles_found=result.cycles_found,
        edges_removed=result.edges_removed,
        cycles_after=count_cycles(result.graph, params.ell, cap=config.cap),
        best_indep_size=len(best),
    )


def execute(config: ExperimentConfig, seed: int) -> PipelineRun:
    """Run every stage for one seed and keep the intermediate graphs."""
    params = config.params()
    report = RunReport(seed=seed, params=params)
    run = PipelineRun(report=report)
    stages = _Stages(report)
    ell, cap = params.ell, config.cap

    report.regime = stages.run("regime", check_regime, params)
    instance = run.instance = stages.run("sample", sample_instance, params, seed)
    if instance is None:
        for name in ("deletion", "verticesSurviving", "cyclesInFinalGraph", "eventA", "spectral", "walks", "independence"):
            stages.missing(name, "sampling failed")
    else:
        deleted = stages.run("vertex_delete", vertex_delete, instance.prime, instance.partitions, ell, cap)
        if deleted is not None:
            run.hat, vertex_report = deleted
            report.vertices_surviving = run.hat.alive_count
            run.orderings = stages.run("orderings", build_orderings, instance.partitions, seed)
            trimmed = stages.run("edge_delete", edge_delete, run.hat, run.orderings, ell, cap)
            if trimmed is not None:
                run.final, edge_report = trimmed
                report.deletion = DeletionReport(
                    bad_broken_cycles_found=vertex_report.bad_broken_cycles_found,
                    vertices_deleted=vertex_report.vertices_deleted,
                    cycles_ell_found=edge_report.cycles_ell_found,
                    edges_deleted=edge_report.edges_deleted,
                    histogram=vertex_report.histogram,
                )
                report.cycles_in_final_graph = stages.run("final_cycles", count_cycles, run.final, ell, cap)
        if run.final is None:
            for name in ("deletion", "cyclesInFinalGraph", "independence"):
                stages.missing(name, "a deletion stage failed")
            if report.vertices_surviving is None:
                stages.missing("verticesSurviving", "vertex deletion failed")

        report.event_a = stages.run(
            "verify", verify_A, instance, params, config.trials, config.trials, seed
        )
        decomposition = stages.run("spectral", decompose, operator_for(instance), None, stage_rng(seed, "spectral"))
        if decomposition is not None:
            report.spectral = summarize(decomposition, params)
        report.walks = stages.run("walks", walk_summary, config, params, instance, decomposition, seed)
        if decomposition is None and report.walks is not None:
            stages.missing("walks.intermediateBound", "spectral decomposition failed")
        if run.final is not None:
            report.independence = stages.run("independence", independence_stage, config, params, instance, run.final, seed, report.missing)

    if config.baseline:
        report.baseline = stages.run("baseline", baseline_stage, config, params, seed)
    else:
        stages.missing("baseline", "disabled by configuration")

    for name, value in (
        ("regime", report.regime),
        ("deletion", report.deletion),
        ("verticesSurviving", report.vertices_surviving),
        ("cyclesInFinalGraph", report.cycles_in_final_graph),
        ("eventA", report.event_a),
        ("spectral", report.spectral),
        ("walks", report.walks),
        ("independence", report.independence),
        ("baseline", report.baseline),
    ):
        if value is None:
            stages.missing(name, "stage failed, see errors")
    logger.info("seed %d finished with %d stage errors", seed, len(report.errors))
    return run


def run_pipeline(config: ExperimentConfig, seed: int) -> RunReport:
    return execute(config, seed).report


def _run_seed(payload: str, seed: int) -> str:
    config = ExperimentConfig.model_validate_json(payload)
    try:
        report = run_pipeline(config, seed)
    except Exception as exc:
        logger.exception("seed %d crashed", seed)
        report = RunReport(seed=seed, params=config.params())
        report.errors.append(StageError(stage="run", error=f"{type(exc).__name__}: {exc}"))
    return report.model_dump_json(by_alias=True)


def _csv_row(report: RunReport) -> List:
    first = report.walks.comparisons[0] if report.walks and report.walks.comparisons else None
    values = [
        report.seed,
        report.vertices_surviving,
        report.deletion.edges_deleted if report.deletion else None,
        report.event_a.passed if report.event_a else None,
        report.spectral.mu if report.spectral else None,
        report.spectral.m_norm if report.spectral else None,
        first.union_count if first else None,
        first.closed_form_bound if first else None,
        report.independence.best_found_size if report.independence else None,
        report.baseline.best_indep_size if report.baseline else None,
    ]
    return ["" if value is None else value for value in values]


def write_report(report: RunReport, directory: Path) -> Path:
    path = directory / f"report_{report.seed}.json"
    path.write_text(report.model_dump_json(by_alias=True, indent=2) + "\n", encoding="utf-8")
    return path


def write_summary(reports: List[RunReport], directory: Path) -> Path:
    path = directory / "summary.csv"
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for report in reports:
            writer.writerow(_csv_row(report))
    return path


def run_experiment(config: ExperimentConfig) -> List[RunReport]:
    """One report per seed, written as JSON next to an aggregate CSV."""
    directory = Path(config.out or settings.OUTPUT_DIR)
    directory.mkdir(parents=True, exist_ok=True)
    payload = config.model_dump_json()
    workers = min(settings.RF_THREADS, len(config.seeds))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            dumps = list(pool.map(_run_seed, [payload] * len(config.seeds), config.seeds))
    else:
        dumps = [_run_seed(payload, seed) for seed in config.seeds]
    reports = [RunReport.model_validate_json(dump) for dump in dumps]
    for report in reports:
        write_report(report, directory)
    write_summary(reports, directory)
    logger.info("experiment wrote %d reports to %s", len(reports), directory)
    return reports
