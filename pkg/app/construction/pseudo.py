"""
Finite-n checks of the pseudo-randomness event on a sampled instance.

Degree and spectral checks are exact. Projection and expansion properties
quantify over all small sets, so they are sampled with adversarial
samplers; small instances are checked exhaustively instead.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from ..core.config import settings
from ..core.errors import PreconditionError
from ..core.seeding import as_rng, stage_rng
from ..models.params import Params
from ..models.reports import VerifierReport
from .model import BaseGraph, ColoredGraph, Instance, Partition, PartitionPair, iter_bits, mask_of
from .spectral import spectral_deviation

logger = logging.getLogger(__name__)

EXHAUSTIVE_MAX_N = 24
EXHAUSTIVE_SUBSET_LIMIT = 200_000


class DegreeCheck(NamedTuple):
    deviation: float
    tol: float
    passed: bool


class SampledCheck(NamedTuple):
    trials: int
    failures: int
    exhaustive: bool = False


class DoubleDegreeCheck(NamedTuple):
    maximum: int
    bound: float
    passed: bool


def default_degree_tol(p: float, m: int) -> float:
    """Four binomial standard deviations, relative to the mean degree."""
    return 4.0 * math.sqrt((1.0 - p) / (p * m))


def check_degrees(base: BaseGraph, p: float, tol: Optional[float] = None) -> DegreeCheck:
    m = base.m
    if p * m < 1:
        raise PreconditionError(f"degree check needs p*m >= 1, got {p * m:.3g}")
    tol = default_degree_tol(p, m) if tol is None else tol
    expected = p * (m - 1)
    deviation = float(np.max(np.abs(base.degrees / expected - 1.0)))
    return DegreeCheck(deviation=deviation, tol=tol, passed=deviation <= tol)


def projection_sizes(partitions: PartitionPair, vertices) -> tuple:
    vertices = list(vertices)
    return len(partitions.red.projection(vertices)), len(partitions.blue.projection(vertices))


def _violates_projection(partitions: PartitionPair, vertices, delta: float) -> bool:
    red, blue = projection_sizes(partitions, vertices)
    return max(red, blue) < delta * len(vertices)


def _concentrated(rng: np.random.Generator, primary: Partition, secondary: Partition, t: int) -> List[int]:
    """t vertices inside few primary blocks, chosen to repeat secondary blocks."""
    blocks = rng.choice(primary.m, size=min(primary.m, math.ceil(t / primary.r)), replace=False)
    pool = [v for b in blocks for v in primary.blocks[b]]
    counts = np.bincount(secondary.block_of[pool], minlength=secondary.m)
    pool.sort(key=lambda v: (-counts[secondary.block_of[v]], v))
    return pool[:t]


def _max_overlap(partitions: PartitionPair, a: int) -> int:
    """Largest |S| with |pi_R(S)| <= a and |pi_B(S)| <= a."""
    red, blue = partitions.red, partitions.blue
    if a <= 0:
        return 0
    if red.r == 1:
        return a
    overlap = np.zeros((red.m, blue.m), dtype=np.int64)
    np.add.at(overlap, (red.block_of, blue.block_of), 1)
    best = 0
    for chosen in itertools.combinations(range(red.m), min(a, red.m)):
        column = np.sort(overlap[list(chosen)].sum(axis=0))[::-1]
        best = max(best, int(column[:a].sum()))
    return best


def check_projections(
    partitions: PartitionPair,
    delta: float,
    k: int,
    trials: int,
    seed=None,
    exhaustive: Optional[bool] = None,
) -> SampledCheck:
    """Count sets S, |S| <= k, whose red and blue projections both fall below delta*|S|.

    In exhaustive mode every size t <= k is one trial and a failure means
    some t-set violates the property.
    """
    if trials < 1:
        raise PreconditionError("projection check needs at least one trial")
    n = partitions.n
    top = min(k, n)
    if exhaustive is None:
        exhaustive = n <= EXHAUSTIVE_MAX_N
    if exhaustive:
        failures = sum(
            1 for t in range(1, top + 1) if _max_overlap(partitions, math.ceil(delta * t) - 1) >= t
        )
        return SampledCheck(trials=top, failures=failures, exhaustive=True)

    rng = as_rng(seed)
    samplers: List[Callable[[int], List[int]]] = [
        lambda t: rng.choice(n, size=t, replace=False).tolist(),
        lambda t: _concentrated(rng, partitions.red, partitions.blue, t),
        lambda t: _concentrated(rng, partitions.blue, partitions.red, t),
    ]
    failures = 0
    for trial in range(trials):
        t = int(rng.integers(1, top + 1))
        if _violates_projection(partitions, samplers[trial % len(samplers)](t), delta):
            failures += 1
    return SampledCheck(trials=trials, failures=failures)


def check_double_degree(graph: ColoredGraph, eta: float, p: float) -> DoubleDegreeCheck:
    """Largest common red/blue neighbourhood against n^(1-eta) p."""
    maximum = max((red & blue).bit_count() for red, blue in zip(graph.red, graph.blue))
    bound = graph.n ** (1.0 - eta) * p
    return DoubleDegreeCheck(maximum=maximum, bound=bound, passed=maximum <= bound)


def vertex_boundary(graph: ColoredGraph, vertices) -> int:
    """Bitset of vertices outside S with a neighbour in S."""
    inside = mask_of(vertices)
    reach = 0
    for v in vertices:
        reach |= graph.union[v]
    return reach & ~inside


def expansion_limit(p: float) -> int:
    return max(1, math.floor(1.0 / (2.0 * p)))


def _violates_expansion(graph: ColoredGraph, vertices, threshold: float) -> bool:
    return vertex_boundary(graph, vertices).bit_count() < threshold * len(vertices)


def check_expansion(
    graph: ColoredGraph,
    partitions: PartitionPair,
    p: float,
    delta: float,
    trials: int,
    seed=None,
    exhaustive: Optional[bool] = None,
) -> SampledCheck:
    """Count sets S, |S| <= 1/(2p), with |boundary(S)| < delta p n |S| / 8."""
    if trials < 1:
        raise PreconditionError("expansion check needs at least one trial")
    n = graph.n
    top = min(expansion_limit(p), n)
    threshold = delta * p * n / 8.0
    if exhaustive is None:
        exhaustive = (
            n <= EXHAUSTIVE_MAX_N
            and sum(math.comb(n, s) for s in range(1, top + 1)) <= EXHAUSTIVE_SUBSET_LIMIT
        )
    if exhaustive:
        checked = failures = 0
        for s in range(1, top + 1):
            for subset in itertools.combinations(range(n), s):
                checked += 1
                failures += _violates_expansion(graph, subset, threshold)
        return SampledCheck(trials=checked, failures=failures, exhaustive=True)

    rng = as_rng(seed)

    def neighbourhood(s: int) -> List[int]:
        start = int(rng.integers(n))
        chosen, frontier = [start], graph.union[start]
        taken = 1 << start
        while len(chosen) < s:
            frontier &= ~taken
            if not frontier:
                rest = [v for v in range(n) if not (taken >> v) & 1]
                v = int(rng.choice(rest))
            else:
                options = list(iter_bits(frontier))
                v = int(options[rng.integers(len(options))])
            chosen.append(v)
            taken |= 1 << v
            frontier |= graph.union[v]
        return chosen

    samplers: List[Callable[[int], List[int]]] = [
        lambda s: rng.choice(n, size=s, replace=False).tolist(),
        lambda s: _concentrated(rng, partitions.red, partitions.blue, s),
        lambda s: _concentrated(rng, partitions.blue, partitions.red, s),
        neighbourhood,
    ]
    failures = 0
    for trial in range(trials):
        s = int(rng.integers(1, top + 1))
        failures += _violates_expansion(graph, samplers[trial % len(samplers)](s), threshold)
    return SampledCheck(trials=trials, failures=failures)


def _log_comb(a: float, b: float) -> float:
    if b < 0 or b > a:
        return -math.inf
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def projection_failure_bound(n: int, r: int, delta: float, t: int) -> float:
    """Log of [t C(n/r, dt) C(r dt, t) / C(n, t)]^2 with dt = ceil(delta t)."""
    s = math.ceil(delta * t)
    inner = math.log(t) + _log_comb(n / r, s) + _log_comb(r * s, t) - _log_comb(n, t)
    return 2.0 * inner


def double_degree_tail(r: int, size: int, t: float) -> float:
    """Azuma-Hoeffding tail exp(-2 t^2 / (r size))."""
    return math.exp(-2.0 * t * t / (r * size))


def verify_A(
    instance: Instance,
    params: Params,
    projection_trials: int = 1000,
    expansion_trials: int = 1000,
    seed: Optional[int] = None,
    degree_tol: Optional[float] = None,
) -> VerifierReport:
    """Run the five checks concurrently and aggregate them."""
    seed = instance.seed if seed is None else seed
    p, m = params.p, params.m
    partitions, graph = instance.partitions, instance.prime
    tol = default_degree_tol(p, m) if degree_tol is None else degree_tol

    with ThreadPoolExecutor(max_workers=settings.RF_THREADS) as pool:
        degrees_red = pool.submit(check_degrees, instance.red_base, p, tol)
        degrees_blue = pool.submit(check_degrees, instance.blue_base, p, tol)
        spectral_red = pool.submit(spectral_deviation, instance.red_base, p, None, stage_rng(seed, "verify.spectral.red"))
        spectral_blue = pool.submit(spectral_deviation, instance.blue_base, p, None, stage_rng(seed, "verify.spectral.blue"))
        projections = pool.submit(
            check_projections, partitions, params.delta, params.k, projection_trials,
            stage_rng(seed, "verify.projections"),
        )
        double = pool.submit(check_double_degree, graph, params.eta, p)
        expansion = pool.submit(
            check_expansion, graph, partitions, p, params.delta, expansion_trials,
            stage_rng(seed, "verify.expansion"),
        )
        degrees_red, degrees_blue = degrees_red.result(), degrees_blue.result()
        spectral_red, spectral_blue = spectral_red.result(), spectral_blue.result()
        projections, double, expansion = projections.result(), double.result(), expansion.result()

    bound = 3.0 * math.sqrt(p * m)
    report = VerifierReport(
        degree_dev_red=degrees_red.deviation,
        degree_dev_blue=degrees_blue.deviation,
        degree_tol=tol,
        degrees_passed=degrees_red.passed and degrees_blue.passed,
        spectral_dev_red=spectral_red,
        spectral_dev_blue=spectral_blue,
        spectral_bound=bound,
        spectral_passed=spectral_red <= bound and spectral_blue <= bound,
        projection_trials=projections.trials,
        projection_failures=projections.failures,
        projection_exhaustive=projections.exhaustive,
        double_degree_max=double.maximum,
        double_degree_bound=double.bound,
        double_degree_passed=double.passed,
        expansion_trials=expansion.trials,
        expansion_failures=expansion.failures,
        passed=False,
    )
    passed = (
        report.degrees_passed
        and report.spectral_passed
        and report.projection_failures == 0
        and report.double_degree_passed
        and report.expansion_failures == 0
    )
    logger.info("event check seed=%s passed=%s", seed, passed)
    return report.model_copy(update={"passed": passed})
