"""
Command-line surface: python -m app <command> [flags].

Every flag may also be given in a flat `key = value` file passed with
--config; flags win over the file.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError

from .core import ConstructionError, ParameterError, configure_logging, settings, stage_rng
from .construction.cleanup import build_orderings, edge_delete, vertex_delete
from .construction.cycles import count_cycles
from .construction.model import sample_instance
from .construction.params import derive_params
from .construction.pipeline import baseline_stage, independence_stage, run_experiment, walk_summary
from .construction.pseudo import verify_A
from .construction.spectral import decompose, operator_for, summarize
from .construction.storage import InstanceHeader, load_instance, serialize_instance
from .models import ExperimentConfig, Mode

logger = logging.getLogger(__name__)

COMMANDS = ("build", "verify", "walks", "alpha", "baseline", "experiment", "serve")
CONFIG_KEYS = ("ell", "n", "mode", "p", "r", "k", "delta", "trials", "cap", "out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="app", description="Randomized C_ell-free graph construction.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="Flat key = value experiment file.")
    parser.add_argument("--ell", type=int)
    parser.add_argument("--n", type=int)
    parser.add_argument("--mode", choices=[mode.value for mode in Mode])
    parser.add_argument("--seed", type=int, nargs="+", help="One or more master seeds.")
    parser.add_argument("--p", type=float)
    parser.add_argument("--r", type=int)
    parser.add_argument("--k", type=int)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--cap", type=int, help="DFS visit cap for cycle searches.")
    parser.add_argument("--out", help="Output directory.")
    parser.add_argument("--instance", help="Graph file written by build (verify only).")
    parser.add_argument("--host", default="0.0.0.0")
    parser.add_argument("--port", type=int, default=8000)
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides: Dict = {key: getattr(args, key) for key in CONFIG_KEYS}
    if args.seed:
        overrides["seeds"] = args.seed
    if args.config:
        return ExperimentConfig.from_file(args.config, **overrides)
    return ExperimentConfig(**{key: value for key, value in overrides.items() if value is not None})


def _emit(payload) -> None:
    print(json.dumps(payload, indent=2, allow_nan=True))


def _dump(model) -> Dict:
    return json.loads(model.model_dump_json(by_alias=True))


def cmd_build(config: ExperimentConfig) -> int:
    params = config.params()
    out = Path(config.out or settings.OUTPUT_DIR)
    summary: List[Dict] = []
    for seed in config.seeds:
        instance = sample_instance(params, seed)
        hat, vertex_report = vertex_delete(instance.prime, instance.partitions, params.ell, config.cap)
        final, edge_report = edge_delete(hat, build_orderings(instance.partitions, seed), params.ell, config.cap)
        header = InstanceHeader(n=params.n, r=params.r, ell=params.ell, seed=seed, mode=params.mode)
        prime_path, _ = serialize_instance(out / f"instance_{seed}", instance.partitions, instance.prime, header)
        final_path, _ = serialize_instance(out / f"final_{seed}", instance.partitions, final, header)
        summary.append({
            "seed": seed,
            "instance": str(prime_path),
            "final": str(final_path),
            "verticesSurviving": hat.alive_count,
            "badBrokenCycles": vertex_report.bad_broken_cycles_found,
            "cyclesFound": edge_report.cycles_ell_found,
            "edgesDeleted": edge_report.edges_deleted,
        })
    _emit(summary)
    return 0


def cmd_verify(config: ExperimentConfig) -> int:
    params = config.params()
    _emit([_dump(verify_A(sample_instance(params, seed), params, config.trials, config.trials, seed))
           for seed in config.seeds])
    return 0


def cmd_verify_file(args: argparse.Namespace) -> int:
    """Check a stored G'; n, r, ell and the seed come from its header."""
    stored = load_instance(args.instance)
    header = stored.header
    overrides = {"p": args.p, "r": header.r, "k": args.k, "delta": args.delta}
    params = derive_params(header.ell, header.n, Mode.OPERATIONAL, overrides)
    trials = args.trials or 1000
    _emit(_dump(verify_A(stored.instance(), params, trials, trials, header.seed)))
    return 0


def cmd_walks(config: ExperimentConfig) -> int:
    params = config.params()
    results = []
    for seed in config.seeds:
        instance = sample_instance(params, seed)
        decomposition = decompose(operator_for(instance), seed=stage_rng(seed, "spectral"))
        results.append({
            "seed": seed,
            "spectral": _dump(summarize(decomposition, params)),
            "walks": _dump(walk_summary(config, params, instance, decomposition, seed)),
        })
    _emit(results)
    return 0


def cmd_alpha(config: ExperimentConfig) -> int:
    params = config.params()
    results = []
    for seed in config.seeds:
        instance = sample_instance(params, seed)
        hat, _ = vertex_delete(instance.prime, instance.partitions, params.ell, config.cap)
        final, _ = edge_delete(hat, build_orderings(instance.partitions, seed), params.ell, config.cap)
        missing: Dict[str, str] = {}
        report = independence_stage(config, params, instance, final, seed, missing)
        results.append({
            "seed": seed,
            "cyclesInFinalGraph": count_cycles(final, params.ell, cap=config.cap),
            "independence": _dump(report),
            "missing": missing,
        })
    _emit(results)
    return 0


def cmd_baseline(config: ExperimentConfig) -> int:
    params = config.params()
    _emit([{"seed": seed, "baseline": _dump(baseline_stage(config, params, seed))} for seed in config.seeds])
    return 0


def cmd_experiment(config: ExperimentConfig) -> int:
    reports = run_experiment(config)
    failed = [report.seed for report in reports if report.errors]
    print(f"{len(reports)} runs written to {config.out or settings.OUTPUT_DIR}; {len(failed)} with stage errors")
    return 1 if failed else 0


def cmd_serve(host: str, port: int) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=host, port=port)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    if args.command == "serve":
        return cmd_serve(args.host, args.port)
    try:
        if args.command == "verify" and args.instance:
            return cmd_verify_file(args)
        config = load_config(args)
    except (ValidationError, ParameterError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 2
    except ConstructionError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return 1
    try:
        if args.command == "build":
            return cmd_build(config)
        if args.command == "verify":
            return cmd_verify(config)
        if args.command == "walks":
            return cmd_walks(config)
        if args.command == "alpha":
            return cmd_alpha(config)
        if args.command == "baseline":
            return cmd_baseline(config)
        return cmd_experiment(config)
    except ConstructionError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return 1
