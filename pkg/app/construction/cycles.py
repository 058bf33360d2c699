"""
Enumeration of C_ell copies in the union graph.

Each copy is emitted once as (x0, x1, ..., x_{l-1}) with x0 its minimum
vertex and x1 < x_{l-1}. The search is an anchored DFS over bitset rows:
from anchor a only vertices above a are visited, and the last vertex is
drawn from the anchor's neighbourhood so closure needs no extra test.
"""
import logging
from typing import Iterator, List, Optional, Sequence, Tuple

from ..core.config import settings
from ..core.errors import EnumerationCapExceeded, PreconditionError
from .model import ColoredGraph, Edge, edge_key, iter_bits

logger = logging.getLogger(__name__)

Cycle = Tuple[int, ...]


def canonical_cycle(cycle: Sequence[int]) -> Cycle:
    """Rotate to the minimum vertex and orient so the second vertex is smaller than the last."""
    t = len(cycle)
    start = min(range(t), key=cycle.__getitem__)
    rotated = tuple(cycle[(start + i) % t] for i in range(t))
    if t > 2 and rotated[1] > rotated[-1]:
        rotated = (rotated[0],) + tuple(reversed(rotated[1:]))
    return rotated


def cycle_edges(cycle: Sequence[int]) -> List[Edge]:
    """Edges (c_i, c_{i+1}) of a closed vertex sequence, as sorted keys."""
    t = len(cycle)
    return [edge_key(cycle[i], cycle[(i + 1) % t]) for i in range(t)]


def enumerate_cycles(
    graph: ColoredGraph,
    ell: int,
    cap: Optional[int] = None,
    alive_only: bool = True,
) -> Iterator[Cycle]:
    """Yield every C_ell of the union graph exactly once in canonical form.

    Raises EnumerationCapExceeded once more than `cap` DFS vertices have
    been visited.
    """
    if ell < 3:
        raise PreconditionError(f"cycle length must be at least 3, got {ell}")
    cap = settings.ENUMERATION_CAP if cap is None else cap
    rows = graph.live_union if alive_only else graph.union
    mask = graph.alive if alive_only else graph.full_mask
    visits = 0

    for anchor in iter_bits(mask):
        allowed = mask & ~((2 << anchor) - 1)
        closers = rows[anchor] & allowed
        if closers.bit_count() < 2:
            continue
        path = [anchor]
        used = 1 << anchor
        # stack[i] holds the untried candidates for position i + 1
        stack = [closers]
        while stack:
            candidates = stack[-1]
            if not candidates:
                stack.pop()
                used ^= 1 << path.pop()
                continue
            low = candidates & -candidates
            stack[-1] = candidates ^ low
            v = low.bit_length() - 1
            visits += 1
            if visits > cap:
                logger.warning("cycle enumeration hit cap %d at anchor %d", cap, anchor)
                raise EnumerationCapExceeded(cap, "cycle DFS visits")
            depth = len(path) + 1
            if depth == ell:
                if path[1] < v:
                    yield tuple(path) + (v,)
                continue
            path.append(v)
            used |= low
            nxt = rows[v] & allowed & ~used
            if depth == ell - 1:
                nxt &= closers
            stack.append(nxt)


def count_cycles(graph: ColoredGraph, ell: int, cap: Optional[int] = None, alive_only: bool = True) -> int:
    return sum(1 for _ in enumerate_cycles(graph, ell, cap=cap, alive_only=alive_only))


def is_cycle_of(graph: ColoredGraph, cycle: Sequence[int], alive_only: bool = False) -> bool:
    """True iff the sequence has distinct vertices and every consecutive pair is an edge."""
    if len(set(cycle)) != len(cycle) or len(cycle) < 3:
        return False
    return all(graph.has_edge(u, v, alive_only=alive_only) for u, v in cycle_edges(cycle))
