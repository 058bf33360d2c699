"""
The two deletion steps applied to G'.

Vertex deletion removes every vertex on a simple broken cycle of length at
most ell - 1 with an odd number of actual edges. Edge deletion then takes
each remaining C_ell, finds its apex and removes one edge chosen through
the block-consecutive red and blue orderings. Both steps work from a
frozen snapshot in a single pass.
"""
import itertools
import logging
import math
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict

from ..core.config import settings
from ..core.errors import EnumerationCapExceeded, PreconditionError
from ..models.params import Params
from ..models.reports import DeletionReport
from .cycles import cycle_edges, enumerate_cycles
from .model import (
    Color,
    ColoredGraph,
    Edge,
    Partition,
    PartitionPair,
    edge_key,
    is_simple,
    iter_bits,
)

logger = logging.getLogger(__name__)


class EdgeKind(str, Enum):
    ACTUAL = "actual"
    BROKEN = "broken"


@dataclass(frozen=True)
class BrokenCycle:
    """Cyclic vertex sequence; kinds[i] describes the step vertices[i] -> vertices[i + 1]."""

    vertices: Tuple[int, ...]
    kinds: Tuple[EdgeKind, ...]

    def __post_init__(self):
        if len(self.vertices) != len(self.kinds):
            raise PreconditionError("a broken cycle needs one kind per position")
        if len(self.vertices) < 2 or len(set(self.vertices)) != len(self.vertices):
            raise PreconditionError(f"broken cycle vertices must be distinct, got {self.vertices}")

    @property
    def t(self) -> int:
        return len(self.vertices)

    @property
    def actual_count(self) -> int:
        return sum(1 for kind in self.kinds if kind is EdgeKind.ACTUAL)

    def steps(self) -> Iterator[Tuple[int, int, EdgeKind]]:
        t = self.t
        for i in range(t):
            yield self.vertices[i], self.vertices[(i + 1) % t], self.kinds[i]

    def actual_edges(self) -> List[Edge]:
        return [edge_key(u, v) for u, v, kind in self.steps() if kind is EdgeKind.ACTUAL]

    def vertex_mask(self) -> int:
        mask = 0
        for v in self.vertices:
            mask |= 1 << v
        return mask

    def canonical(self) -> "BrokenCycle":
        """Least (vertices, kinds) over all rotations and both orientations."""
        t = self.t
        forms = []
        for verts, kinds in (
            (self.vertices, self.kinds),
            (
                (self.vertices[0],) + tuple(reversed(self.vertices[1:])),
                tuple(reversed(self.kinds)),
            ),
        ):
            for s in range(t):
                forms.append(
                    (verts[s:] + verts[:s], tuple(k.value for k in kinds[s:] + kinds[:s]))
                )
        verts, kinds = min(forms)
        return BrokenCycle(verts, tuple(EdgeKind(k) for k in kinds))

    def is_valid(self, graph: ColoredGraph, partitions: PartitionPair) -> bool:
        """Every actual step is an edge of G' and every broken step stays inside a block."""
        for u, v, kind in self.steps():
            if kind is EdgeKind.ACTUAL:
                if not graph.has_edge(u, v):
                    return False
            elif not (partitions.mates(u) >> v) & 1:
                return False
        return self.actual_count >= 1

    def is_bad(self, graph: ColoredGraph, partitions: PartitionPair, ell: int) -> bool:
        return (
            2 <= self.t <= ell - 1
            and self.actual_count % 2 == 1
            and self.is_valid(graph, partitions)
            and is_simple(self.actual_edges(), partitions)
        )


def enumerate_bad_broken_cycles(
    graph: ColoredGraph,
    partitions: PartitionPair,
    ell: int,
    mask: Optional[int] = None,
    cap: Optional[int] = None,
) -> Iterator[BrokenCycle]:
    """Yield each simple broken cycle with 2 <= t <= ell - 1 and odd actual count once.

    Steps are actual edges of G' or jumps inside a red or blue block. With
    `mask` the search only visits those vertices.
    """
    if partitions.n != graph.n:
        raise PreconditionError("partitions and graph disagree on n")
    cap = settings.ENUMERATION_CAP if cap is None else cap
    max_t = ell - 1
    rows = graph.union
    red, blue = partitions.red, partitions.blue
    mates = [partitions.mates(v) for v in range(graph.n)]
    mask = graph.full_mask if mask is None else mask & graph.full_mask
    visits = 0

    for anchor in iter_bits(mask):
        allowed = mask & ~((2 << anchor) - 1)
        close_actual = rows[anchor] & allowed
        close_broken = mates[anchor] & allowed
        if not (close_actual | close_broken):
            continue
        path = [anchor]
        kinds: List[EdgeKind] = []
        used_red: Set[Edge] = set()
        used_blue: Set[Edge] = set()

        def take(u: int, v: int) -> Optional[Tuple[Optional[Edge], Optional[Edge]]]:
            red_key, blue_key = red.pair_key(u, v), blue.pair_key(u, v)
            if red_key in used_red or blue_key in used_blue:
                return None
            if red_key is not None:
                used_red.add(red_key)
            if blue_key is not None:
                used_blue.add(blue_key)
            return red_key, blue_key

        def give_back(keys: Tuple[Optional[Edge], Optional[Edge]]) -> None:
            if keys[0] is not None:
                used_red.discard(keys[0])
            if keys[1] is not None:
                used_blue.discard(keys[1])

        def extend(used: int, actual: int) -> Iterator[BrokenCycle]:
            nonlocal visits
            u = path[-1]
            t = len(path)
            if t >= 2:
                # close back to the anchor
                for kind in (EdgeKind.ACTUAL, EdgeKind.BROKEN):
                    pool = rows[u] if kind is EdgeKind.ACTUAL else mates[u]
                    if not (pool >> anchor) & 1:
                        continue
                    a = actual + (kind is EdgeKind.ACTUAL)
                    if a % 2 == 0:
                        continue
                    closing = kinds + [kind]
                    if t == 2:
                        if closing != [EdgeKind.ACTUAL, EdgeKind.BROKEN]:
                            continue
                    elif path[1] > u:
                        continue
                    keys = take(u, anchor) if kind is EdgeKind.ACTUAL else (None, None)
                    if keys is None:
                        continue
                    yield BrokenCycle(tuple(path), tuple(closing))
                    give_back(keys)
            if t == max_t:
                return
            free = allowed & ~used
            for kind in (EdgeKind.ACTUAL, EdgeKind.BROKEN):
                pool = (rows[u] if kind is EdgeKind.ACTUAL else mates[u]) & free
                for v in iter_bits(pool):
                    visits += 1
                    if visits > cap:
                        logger.warning("broken-cycle search hit cap %d at anchor %d", cap, anchor)
                        raise EnumerationCapExceeded(cap, "broken-cycle DFS visits")
                    keys = take(u, v) if kind is EdgeKind.ACTUAL else (None, None)
                    if keys is None:
                        continue
                    path.append(v)
                    kinds.append(kind)
                    yield from extend(used | (1 << v), actual + (kind is EdgeKind.ACTUAL))
                    kinds.pop()
                    path.pop()
                    give_back(keys)

        yield from extend(1 << anchor, 0)


def broken_cycle_expectation(params: Params, t: int, a: int) -> float:
    """Counting bound 2^l (2r)^(t-a) n^a (2p)^a on bad broken cycles of shape (t, a)."""
    return (
        2.0 ** params.ell
        * (2.0 * params.r) ** (t - a)
        * float(params.n) ** a
        * (2.0 * params.p) ** a
    )


def vertex_delete(
    graph: ColoredGraph,
    partitions: PartitionPair,
    ell: int,
    cap: Optional[int] = None,
) -> Tuple[ColoredGraph, DeletionReport]:
    """Remove all vertices of all bad broken cycles of G' in one pass."""
    if graph.alive != graph.full_mask:
        raise PreconditionError("vertex deletion expects every vertex alive")
    doomed = 0
    found = 0
    histogram: Counter = Counter()
    for cycle in enumerate_bad_broken_cycles(graph, partitions, ell, cap=cap):
        found += 1
        histogram[f"{cycle.t},{cycle.actual_count}"] += 1
        doomed |= cycle.vertex_mask()
    report = DeletionReport(
        bad_broken_cycles_found=found,
        vertices_deleted=doomed.bit_count(),
        histogram=dict(sorted(histogram.items())),
    )
    logger.info("vertex deletion: %d bad broken cycles, %d vertices removed", found, report.vertices_deleted)
    return graph.with_alive(graph.full_mask & ~doomed), report


def _coupled(partitions: PartitionPair, e: Edge, f: Edge) -> Optional[Partition]:
    """Partition in which e and f share a block pair, if any."""
    for part in (partitions.red, partitions.blue):
        key = part.pair_key(*e)
        if key is not None and key == part.pair_key(*f):
            return part
    return None


def _splice_kinks(
    verts: List[int], kinds: List[EdgeKind], partitions: PartitionPair
) -> Tuple[List[int], List[EdgeKind]]:
    """Replace each kink x-y, y-x' (both actual, one block pair) by a broken step x-x'."""
    changed = True
    while changed and len(verts) >= 3:
        changed = False
        t = len(verts)
        for i in range(t):
            prev, here = (i - 1) % t, i
            if kinds[prev] is not EdgeKind.ACTUAL or kinds[here] is not EdgeKind.ACTUAL:
                continue
            e = edge_key(verts[prev], verts[i])
            f = edge_key(verts[i], verts[(i + 1) % t])
            if _coupled(partitions, e, f) is None:
                continue
            # vertex i leaves; step prev becomes the broken jump
            kinds[prev] = EdgeKind.BROKEN
            del verts[i]
            del kinds[i]
            changed = True
            break
    return verts, kinds


def _arc(verts: List[int], kinds: List[EdgeKind], start: int, stop: int) -> Tuple[List[int], List[EdgeKind]]:
    """Forward arc of positions start..stop (inclusive) with its step kinds."""
    t = len(verts)
    arc_verts, arc_kinds = [verts[start]], []
    i = start
    while i != stop:
        arc_kinds.append(kinds[i])
        i = (i + 1) % t
        arc_verts.append(verts[i])
    return arc_verts, arc_kinds


def _closed_arcs(
    verts: List[int], kinds: List[EdgeKind], a: int, b: int
) -> Iterator[Tuple[List[int], List[EdgeKind]]]:
    """Both arcs between positions a and b, each closed by a broken step."""
    for start, stop in ((a, b), (b, a)):
        arc_verts, arc_kinds = _arc(verts, kinds, start, stop)
        yield arc_verts, arc_kinds + [EdgeKind.BROKEN]


def kink_reduce(
    cycle: Sequence[int], graph: ColoredGraph, partitions: PartitionPair
) -> BrokenCycle:
    """Reduce a non-simple C_ell of G' to a simple broken cycle with odd actual count inside V(C)."""
    verts = list(cycle)
    edges = cycle_edges(verts)
    if len(set(verts)) != len(verts) or not all(graph.has_edge(u, v) for u, v in edges):
        raise PreconditionError("kink reduction needs a cycle of G'")
    if len(verts) % 2 == 0:
        raise PreconditionError("kink reduction needs an odd cycle")
    if is_simple(edges, partitions):
        raise PreconditionError("cycle is already simple")
    kinds = [EdgeKind.ACTUAL] * len(verts)
    verts, kinds = _splice_kinks(verts, kinds, partitions)

    while True:
        t = len(verts)
        actual = [i for i in range(t) if kinds[i] is EdgeKind.ACTUAL]
        pair = None
        for i, j in itertools.combinations(actual, 2):
            e = (verts[i], verts[(i + 1) % t])
            f = (verts[j], verts[(j + 1) % t])
            if set(e) & set(f):
                continue
            part = _coupled(partitions, edge_key(*e), edge_key(*f))
            if part is not None:
                pair = (i, j, part)
                break
        if pair is None:
            break
        i, j, part = pair
        # positions of e's and f's endpoints, matched by block
        e_pos, f_pos = (i, (i + 1) % t), (j, (j + 1) % t)
        if part.block(verts[e_pos[0]]) == part.block(verts[f_pos[0]]):
            x1, x2, y1, y2 = e_pos[0], f_pos[0], e_pos[1], f_pos[1]
        else:
            x1, x2, y1, y2 = e_pos[0], f_pos[1], e_pos[1], f_pos[0]
        current = len(actual)
        chosen = None
        for a, b in ((x1, x2), (y1, y2)):
            for arc_verts, arc_kinds in _closed_arcs(verts, kinds, a, b):
                count = sum(1 for k in arc_kinds if k is EdgeKind.ACTUAL)
                if count % 2 == 1 and count < current:
                    chosen = (arc_verts, arc_kinds)
                    break
            if chosen is not None:
                break
        if chosen is None:
            raise PreconditionError(f"no odd sub-cycle found while reducing {tuple(cycle)}")
        verts, kinds = _splice_kinks(list(chosen[0]), list(chosen[1]), partitions)

    result = BrokenCycle(tuple(verts), tuple(kinds)).canonical()
    assert result.actual_count % 2 == 1
    assert is_simple(result.actual_edges(), partitions)
    return result


class EdgeOrdering:
    """Block-consecutive total order on all vertex pairs of [n].

    Cross-block pairs come first, grouped by block pair (i < j) in
    lexicographic order and sorted by (min, max) inside a group. Pairs
    inside one block form a trailing segment. Ranks are 1-based and
    computed on demand.
    """

    def __init__(self, partition: Partition):
        self.partition = partition
        self._groups: Dict[Edge, List[Edge]] = {}
        self._positions = [0] * partition.n
        for block in partition.blocks:
            for pos, v in enumerate(block):
                self._positions[v] = pos

    @property
    def size(self) -> int:
        return math.comb(self.partition.n, 2)

    def _group(self, i: int, j: int) -> List[Edge]:
        group = self._groups.get((i, j))
        if group is None:
            blocks = self.partition.blocks
            group = sorted(edge_key(u, v) for u in blocks[i] for v in blocks[j])
            self._groups[(i, j)] = group
        return group

    def rank(self, u: int, v: int) -> int:
        if u == v:
            raise PreconditionError("a pair needs two distinct vertices")
        part = self.partition
        r, m = part.r, part.m
        key = edge_key(u, v)
        pair = part.pair_key(u, v)
        if pair is None:
            b = part.block(u)
            pu, pv = sorted((self._positions[u], self._positions[v]))
            inner = pu * (2 * r - pu - 1) // 2 + (pv - pu - 1)
            return r * r * math.comb(m, 2) + b * math.comb(r, 2) + inner + 1
        i, j = pair
        offset = r * r * (i * m - i * (i + 1) // 2 + (j - i - 1))
        return offset + bisect_left(self._group(i, j), key) + 1


def build_orderings(partitions: PartitionPair, seed=None) -> Tuple[EdgeOrdering, EdgeOrdering]:
    """Red and blue orderings; a deterministic function of the partitions."""
    return EdgeOrdering(partitions.red), EdgeOrdering(partitions.blue)


class ApexKind(str, Enum):
    MONO_RED = "mono-red"
    MONO_BLUE = "mono-blue"
    RED_APEX = "red-apex"
    BLUE_APEX = "blue-apex"


class ApexInfo(BaseModel):
    apex: int
    kind: ApexKind
    # coloring[i] is the color used for edge (c_i, c_{i+1})
    coloring: Tuple[Color, ...]

    model_config = ConfigDict(frozen=True)


def find_apex(cycle: Sequence[int], graph: ColoredGraph) -> List[ApexInfo]:
    """Apex and classification for each single-color assignment of the cycle's edges."""
    t = len(cycle)
    if t % 2 == 0:
        raise PreconditionError("apex is defined for odd cycles")
    options: List[List[Color]] = []
    for i in range(t):
        colors = graph.colors(cycle[i], cycle[(i + 1) % t])
        if not colors:
            raise PreconditionError(f"{cycle[i]}-{cycle[(i + 1) % t]} is not an edge of G'")
        options.append(sorted(colors))
    infos = []
    for coloring in itertools.product(*options):
        apex, apex_color = -1, None
        for i in range(t):
            if coloring[i - 1] is coloring[i] and cycle[i] > apex:
                apex, apex_color = cycle[i], coloring[i]
        if all(c is coloring[0] for c in coloring):
            kind = ApexKind.MONO_RED if coloring[0] is Color.RED else ApexKind.MONO_BLUE
        else:
            kind = ApexKind.RED_APEX if apex_color is Color.RED else ApexKind.BLUE_APEX
        infos.append(ApexInfo(apex=apex, kind=kind, coloring=tuple(coloring)))
    return infos


def select_deletion_edge(
    cycle: Sequence[int], info: ApexInfo, red: EdgeOrdering, blue: EdgeOrdering
) -> Edge:
    """Edge the apex rule removes from the cycle under info's coloring."""
    edges = cycle_edges(cycle)
    if info.kind is ApexKind.MONO_RED:
        pool, order = edges, red
    elif info.kind is ApexKind.MONO_BLUE:
        pool, order = edges, blue
    elif info.kind is ApexKind.RED_APEX:
        pool = [e for e, c in zip(edges, info.coloring) if c is Color.BLUE]
        order = blue
    else:
        pool = [e for e, c in zip(edges, info.coloring) if c is Color.RED]
        order = red
    return max(pool, key=lambda e: order.rank(*e))


def edge_delete(
    graph: ColoredGraph,
    orderings: Tuple[EdgeOrdering, EdgeOrdering],
    ell: int,
    cap: Optional[int] = None,
) -> Tuple[ColoredGraph, DeletionReport]:
    """Remove the selected edge of every (C_ell, coloring) of the alive graph."""
    red, blue = orderings
    selected: Set[Edge] = set()
    found = 0
    for cycle in enumerate_cycles(graph, ell, cap=cap):
        found += 1
        for info in find_apex(cycle, graph):
            selected.add(select_deletion_edge(cycle, info, red, blue))
    report = DeletionReport(cycles_ell_found=found, edges_deleted=len(selected))
    logger.info("edge deletion: %d cycles, %d edges removed", found, len(selected))
    return graph.without_edges(selected), report
