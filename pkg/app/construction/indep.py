"""
Independence side of the construction.

Closed pairs and the two-round exposure (G0, O) follow the argument that
an independent set must meet few pairs at risk during edge deletion.
Search and exact solvers bound the independence number directly.
"""
import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

from ..core.config import settings
from ..core.errors import PreconditionError, SizeCapExceeded
from ..core.seeding import as_rng
from ..models.params import Params
from ..models.reports import ClaimVerdict, IndependenceBoundReport
from .cleanup import EdgeOrdering
from .cycles import cycle_edges, enumerate_cycles
from .model import (
    Color,
    ColoredGraph,
    Edge,
    Instance,
    PartitionPair,
    edge_key,
    iter_bits,
    mask_of,
    sample_base_graph,
)

logger = logging.getLogger(__name__)

# (last edge color, seen two consecutive equal colors)
ColorState = FrozenSet[Tuple[Color, bool]]


def _step_states(states: Optional[ColorState], colors: Iterable[Color]) -> ColorState:
    if states is None:
        return frozenset((c, False) for c in colors)
    return frozenset((c, seen or c is last) for last, seen in states for c in colors)


def _closes(states: ColorState) -> bool:
    return any(seen for _, seen in states)


def is_non_alternating(path: Sequence[int], graph: ColoredGraph) -> bool:
    """True iff path is a path of G' admitting a coloring with two consecutive equal colors."""
    if len(set(path)) != len(path) or len(path) < 3:
        return False
    states: Optional[ColorState] = None
    for u, v in zip(path, path[1:]):
        colors = graph.colors(u, v)
        if not colors:
            return False
        states = _step_states(states, colors)
    return _closes(states)


@dataclass
class ClosedPairSet:
    # pair -> one non-alternating path of length ell - 1 joining it
    witnesses: Dict[Edge, Tuple[int, ...]] = field(default_factory=dict)

    @property
    def pairs(self) -> Set[Edge]:
        return set(self.witnesses)

    def __len__(self) -> int:
        return len(self.witnesses)

    def __contains__(self, pair) -> bool:
        return edge_key(*pair) in self.witnesses


def closed_pairs(
    graph: ColoredGraph, partitions: PartitionPair, J: Iterable[int], ell: int
) -> ClosedPairSet:
    """Pairs of J joined by a non-alternating path with ell - 1 edges."""
    J = sorted(set(J))
    if any(not (graph.alive >> v) & 1 for v in J):
        raise PreconditionError("J must consist of alive vertices")
    rows = graph.live_union
    result = ClosedPairSet()
    length = ell - 1
    j_mask = mask_of(J)

    for x in J:
        targets = j_mask & ~((2 << x) - 1)
        if not targets:
            continue
        found = 0
        path = [x]

        def walk(used: int, states: Optional[ColorState]) -> None:
            nonlocal found
            u = path[-1]
            depth = len(path) - 1
            candidates = rows[u] & ~used
            if depth == length - 1:
                candidates &= targets & ~found
            for v in iter_bits(candidates):
                nxt = _step_states(states, graph.colors(u, v))
                if depth == length - 1:
                    if _closes(nxt) and not (found >> v) & 1:
                        found |= 1 << v
                        result.witnesses[(x, v)] = tuple(path) + (v,)
                    continue
                path.append(v)
                walk(used | (1 << v), nxt)
                path.pop()

        walk(1 << x, None)
    return result


def closed_pair_bound(params: Params, J_size: int) -> float:
    """delta^-2 2^l p^(l-1) n^(l-2) |J|^2 / r."""
    ell = params.ell
    return (
        params.delta ** -2 * 2.0 ** ell * params.p ** (ell - 1)
        * float(params.n) ** (ell - 2) * J_size ** 2 / params.r
    )


def pick_representatives(
    I: Iterable[int], partitions: PartitionPair, delta: float, k: int
) -> Tuple[Optional[List[int]], Optional[Color]]:
    """One vertex per block of ceil(delta k) blocks hit by I, red first, else blue.

    Returns (None, None) when neither projection is large enough.
    """
    I = sorted(set(I))
    if len(I) != k:
        raise PreconditionError(f"representatives need |I| = k = {k}, got {len(I)}")
    need = max(1, math.ceil(delta * k - 1e-9))
    for color in (Color.RED, Color.BLUE):
        part = partitions.of(color)
        smallest: Dict[int, int] = {}
        for v in I:
            smallest.setdefault(part.block(v), v)
        if len(smallest) >= need:
            blocks = sorted(smallest)[:need]
            return sorted(smallest[b] for b in blocks), color
    return None, None


class ExposureSplit(NamedTuple):
    g0: ColoredGraph
    open_pairs: Set[Edge]
    color: Color


def _coupled_keys(partitions: PartitionPair, J: Sequence[int]) -> Tuple[Set[Edge], Set[Edge]]:
    red_keys, blue_keys = set(), set()
    for x, y in combinations(J, 2):
        key = partitions.red.pair_key(x, y)
        if key is not None:
            red_keys.add(key)
        key = partitions.blue.pair_key(x, y)
        if key is not None:
            blue_keys.add(key)
    return red_keys, blue_keys


def _path_endpoints(rows, start: int, length: int, targets: int) -> int:
    """Bitset of targets reachable from start by a simple path with `length` edges."""
    reached = 0
    stack = [(start, 1 << start, 0)]
    while stack:
        u, used, depth = stack.pop()
        candidates = rows[u] & ~used
        if depth == length - 1:
            reached |= candidates & targets
            continue
        for v in iter_bits(candidates):
            stack.append((v, used | (1 << v), depth + 1))
    return reached


def exposure_split(
    graph: ColoredGraph,
    partitions: PartitionPair,
    J: Iterable[int],
    ell: int,
    color: Color = Color.RED,
) -> ExposureSplit:
    """G0 keeps the other color and the uncoupled edges of `color`; O lists J-pairs closing no C_ell in G0."""
    J = sorted(set(J))
    red_keys, blue_keys = _coupled_keys(partitions, J)
    exposed = list(graph.rows(color))
    for u, v in graph.edges(color):
        red_key = partitions.red.pair_key(u, v)
        blue_key = partitions.blue.pair_key(u, v)
        if red_key in red_keys or blue_key in blue_keys:
            exposed[u] &= ~(1 << v)
            exposed[v] &= ~(1 << u)
    if color is Color.RED:
        g0 = ColoredGraph(n=graph.n, red=tuple(exposed), blue=graph.blue, alive=graph.alive)
    else:
        g0 = ColoredGraph(n=graph.n, red=graph.red, blue=tuple(exposed), alive=graph.alive)

    rows = g0.live_union
    j_mask = mask_of(J)
    open_pairs: Set[Edge] = set()
    for x in J:
        above = j_mask & ~((2 << x) - 1)
        if not above:
            continue
        closing = _path_endpoints(rows, x, ell - 1, above) if (g0.alive >> x) & 1 else 0
        open_pairs.update((x, y) for y in iter_bits(above & ~closing))
    return ExposureSplit(g0=g0, open_pairs=open_pairs, color=color)


def check_claim(
    instance: Instance,
    J: Iterable[int],
    final: ColoredGraph,
    ell: int,
    color: Color = Color.RED,
) -> ClaimVerdict:
    """Evaluate "J independent in the final color graph implies O meets no G' edge of that color"."""
    J = sorted(set(J))
    prime = instance.prime
    final_rows = final.rows(color)
    premise = all((final.alive >> v) & 1 for v in J) and not any(
        (final_rows[x] >> y) & 1 for x, y in combinations(J, 2)
    )
    split = exposure_split(prime, instance.partitions, J, ell, color)
    prime_rows = prime.rows(color)
    open_colored = sorted(e for e in split.open_pairs if (prime_rows[e[0]] >> e[1]) & 1)
    counterexample = None
    if premise and open_colored:
        order = EdgeOrdering(instance.partitions.of(color))
        counterexample = list(min(open_colored, key=lambda e: order.rank(*e)))
        logger.warning("claim counterexample %s for J=%s", counterexample, J)
    return ClaimVerdict(
        premise=premise,
        open_pairs=len(split.open_pairs),
        open_red_edges=len(open_colored),
        counterexample=counterexample,
        passed=counterexample is None,
    )


def _is_independent(rows, vertices: Iterable[int]) -> bool:
    mask = mask_of(vertices)
    return all(not rows[v] & mask for v in vertices)


def _greedy(rows, alive: int, rng) -> int:
    vertices = list(iter_bits(alive))
    jitter = rng.random(len(vertices))
    order = sorted(range(len(vertices)), key=lambda i: ((rows[vertices[i]] & alive).bit_count(), jitter[i]))
    chosen = 0
    blocked = 0
    for i in order:
        v = vertices[i]
        if not (blocked >> v) & 1:
            chosen |= 1 << v
            blocked |= rows[v] | (1 << v)
    return chosen


def _improve(rows, alive: int, chosen: int) -> int:
    """(1,2)-swaps until none applies."""
    improved = True
    while improved:
        improved = False
        free = alive & ~chosen
        for u in iter_bits(free):
            if not rows[u] & chosen:
                chosen |= 1 << u
        for v in iter_bits(chosen):
            tight = 0
            for u in iter_bits(rows[v] & alive & ~chosen):
                if (rows[u] & chosen).bit_count() == 1:
                    tight |= 1 << u
            for u in iter_bits(tight):
                partners = tight & ~rows[u] & ~(1 << u)
                if partners:
                    w = (partners & -partners).bit_length() - 1
                    chosen = (chosen & ~(1 << v)) | (1 << u) | (1 << w)
                    improved = True
                    break
            if improved:
                break
    return chosen


def independent_set_search(graph: ColoredGraph, k: int, budget: int = 20, seed=None) -> List[int]:
    """Randomized greedy with (1,2)-swap local search; at most k vertices, verified independent."""
    rng = as_rng(seed)
    rows = graph.live_union
    alive = graph.alive
    best = 0
    for _ in range(max(1, budget)):
        candidate = _improve(rows, alive, _greedy(rows, alive, rng))
        if candidate.bit_count() > best.bit_count():
            best = candidate
        if best.bit_count() >= k:
            break
    found = list(iter_bits(best))[:k]
    if not _is_independent(rows, found):
        raise AssertionError("search returned a dependent set")
    return found


def _clique_cover_bound(rows, candidates: int) -> int:
    cliques = 0
    remaining = candidates
    while remaining:
        low = remaining & -remaining
        u = low.bit_length() - 1
        clique = low
        pool = remaining & rows[u]
        while pool:
            w_bit = pool & -pool
            clique |= w_bit
            pool &= rows[w_bit.bit_length() - 1]
        remaining &= ~clique
        cliques += 1
    return cliques


def alpha_exact(graph: ColoredGraph, cap: Optional[int] = None) -> int:
    """Independence number of the alive union graph by branch and bound."""
    cap = settings.ALPHA_EXACT_CAP if cap is None else cap
    if graph.alive_count > cap:
        raise SizeCapExceeded(f"exact alpha limited to {cap} vertices, got {graph.alive_count}")
    rows = graph.live_union
    best = 0

    def solve(candidates: int, size: int) -> None:
        nonlocal best
        reduced = True
        while reduced and candidates:
            reduced = False
            for v in iter_bits(candidates):
                if (rows[v] & candidates).bit_count() <= 1:
                    candidates &= ~(rows[v] | (1 << v))
                    size += 1
                    reduced = True
                    break
        if not candidates:
            best = max(best, size)
            return
        if size + _clique_cover_bound(rows, candidates) <= best:
            return
        v = max(iter_bits(candidates), key=lambda u: (rows[u] & candidates).bit_count())
        solve(candidates & ~(rows[v] | (1 << v)), size + 1)
        solve(candidates & ~(1 << v), size)

    solve(graph.alive, 0)
    return best


class BaselineResult(NamedTuple):
    graph: ColoredGraph
    p: float
    edges_before: int
    cycles_found: int
    edges_removed: int


def baseline_density(n: int, ell: int) -> float:
    return 0.5 * n ** (-1.0 + 1.0 / (ell - 1))


def baseline_construction(n: int, ell: int, seed=None, cap: Optional[int] = None) -> BaselineResult:
    """G(n, p') with one edge removed from every C_ell, single pass."""
    p = baseline_density(n, ell)
    base = sample_base_graph(n, p, seed)
    graph = ColoredGraph(n=n, red=base.rows, blue=(0,) * n, alive=(1 << n) - 1)
    removed: Set[Edge] = set()
    found = 0
    for cycle in enumerate_cycles(graph, ell, cap=cap):
        found += 1
        removed.add(cycle_edges(cycle)[0])
    logger.info("baseline n=%d p=%.4g: %d cycles, %d edges removed", n, p, found, len(removed))
    return BaselineResult(
        graph=graph.without_edges(removed),
        p=p,
        edges_before=base.edge_count,
        cycles_found=found,
        edges_removed=len(removed),
    )


def ind_set_probability_bound(params: Params) -> IndependenceBoundReport:
    """Per-set bound (1-p)^((delta k)^2/4) and the union-bound expectation, all as logarithms."""
    n, k, p, delta = params.n, params.k, params.p, params.delta
    log_set = (delta * k) ** 2 / 4.0 * math.log1p(-p)
    log_choose = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) if k <= n else -math.inf
    return IndependenceBoundReport(
        log_set_probability=log_set,
        log_expected_count=log_choose + log_set,
        log_expected_count_bound=k * (math.log(n) - p * delta ** 2 * k / 4.0),
    )
