"""
Graphs, partitions, sampling, blow-up and superimposition.

Adjacency rows are Python integers used as bitsets: bit v of row u is set
iff uv is an edge. Row intersection is a single `&` and popcount is
`int.bit_count`. Vertices are 0-based throughout.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy import sparse

from ..core.errors import DimensionError, ParameterError, PartitionError
from ..core.seeding import as_rng, stage_rng
from ..models.params import Params

logger = logging.getLogger(__name__)

Rows = Tuple[int, ...]
Edge = Tuple[int, int]


class Color(str, Enum):
    RED = "R"
    BLUE = "B"

    @property
    def other(self) -> "Color":
        return Color.BLUE if self is Color.RED else Color.RED


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of mask in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bit(v: int) -> int:
    return 1 << v


def mask_of(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class Partition:
    """A partition of [n] into blocks of equal size r."""

    r: int
    blocks: Tuple[Tuple[int, ...], ...]
    block_of: np.ndarray = field(repr=False)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Iterable[int]]) -> "Partition":
        blocks = tuple(tuple(sorted(block)) for block in blocks)
        if not blocks or not blocks[0]:
            raise PartitionError("a partition needs at least one non-empty block")
        r = len(blocks[0])
        n = r * len(blocks)
        block_of = np.full(n, -1, dtype=np.int64)
        for index, block in enumerate(blocks):
            if len(block) != r:
                raise PartitionError(f"block {index} has {len(block)} vertices, expected {r}")
            for v in block:
                if not 0 <= v < n:
                    raise PartitionError(f"vertex {v} outside [0, {n})")
                if block_of[v] != -1:
                    raise PartitionError(f"vertex {v} appears in more than one block")
                block_of[v] = index
        block_of.setflags(write=False)
        return cls(r=r, blocks=blocks, block_of=block_of)

    @property
    def n(self) -> int:
        return len(self.block_of)

    @property
    def m(self) -> int:
        return len(self.blocks)

    @cached_property
    def block_masks(self) -> Rows:
        return tuple(mask_of(block) for block in self.blocks)

    @cached_property
    def membership(self) -> sparse.csr_matrix:
        """n x m 0/1 matrix with a single 1 per row, at the vertex's block."""
        n = self.n
        return sparse.csr_matrix(
            (np.ones(n, dtype=np.int64), (np.arange(n), self.block_of)), shape=(n, self.m)
        )

    def block(self, v: int) -> int:
        return int(self.block_of[v])

    def mates(self, v: int) -> int:
        """Bitset of the other vertices in v's block."""
        return self.block_masks[self.block_of[v]] & ~(1 << v)

    def pair_key(self, u: int, v: int) -> Optional[Edge]:
        """Block pair (i, j), i < j, holding uv; None when u, v share a block."""
        i, j = int(self.block_of[u]), int(self.block_of[v])
        if i == j:
            return None
        return (i, j) if i < j else (j, i)

    def projection(self, vertices: Iterable[int]) -> FrozenSet[int]:
        """Indices of blocks met by the vertices."""
        return frozenset(int(self.block_of[v]) for v in vertices)


@dataclass(frozen=True, eq=False)
class PartitionPair:
    red: Partition
    blue: Partition

    def __post_init__(self):
        if self.red.n != self.blue.n or self.red.r != self.blue.r:
            raise PartitionError("red and blue partitions disagree on n or r")

    @property
    def n(self) -> int:
        return self.red.n

    @property
    def r(self) -> int:
        return self.red.r

    def of(self, color: "Color") -> Partition:
        return self.red if color is Color.RED else self.blue

    def mates(self, v: int) -> int:
        """Vertices sharing a red block or a blue block with v."""
        return self.red.mates(v) | self.blue.mates(v)


@dataclass(frozen=True, eq=False)
class BaseGraph:
    """A loopless graph on m vertices, the pre-blow-up graph."""

    m: int
    edges: Tuple[Edge, ...]

    @classmethod
    def from_edges(cls, m: int, edges: Iterable[Tuple[int, int]]) -> "BaseGraph":
        keyed = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ParameterError(f"loop at base vertex {u}")
            if not (0 <= u < m and 0 <= v < m):
                raise DimensionError(f"base edge {u}-{v} outside [0, {m})")
            keyed.add(edge_key(u, v))
        return cls(m=m, edges=tuple(sorted(keyed)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def rows(self) -> Rows:
        rows = [0] * self.m
        for u, v in self.edges:
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return tuple(rows)

    @cached_property
    def matrix(self) -> sparse.csr_matrix:
        """Symmetric integer adjacency matrix."""
        if not self.edges:
            return sparse.csr_matrix((self.m, self.m), dtype=np.int64)
        pairs = np.asarray(self.edges, dtype=np.int64)
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        data = np.ones(len(rows), dtype=np.int64)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.m, self.m))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()


@dataclass(frozen=True, eq=False)
class ColoredGraph:
    """The superimposed graph G' with per-color rows and a surviving-vertex mask."""

    n: int
    red: Rows
    blue: Rows
    alive: int

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def alive_count(self) -> int:
        return self.alive.bit_count()

    def alive_vertices(self) -> List[int]:
        return list(iter_bits(self.alive))

    def rows(self, color: Color) -> Rows:
        return self.red if color is Color.RED else self.blue

    @cached_property
    def union(self) -> Rows:
        """Union adjacency over all vertices, ignoring the alive mask."""
        return tuple(a | b for a, b in zip(self.red, self.blue))

    @cached_property
    def live_union(self) -> Rows:
        """Union adjacency restricted to alive vertices; dead rows are empty."""
        alive = self.alive
        return tuple(
            (row & alive) if (alive >> v) & 1 else 0 for v, row in enumerate(self.union)
        )

    def colors(self, u: int, v: int) -> FrozenSet[Color]:
        found = set()
        if (self.red[u] >> v) & 1:
            found.add(Color.RED)
        if (self.blue[u] >> v) & 1:
            found.add(Color.BLUE)
        return frozenset(found)

    def has_edge(self, u: int, v: int, alive_only: bool = False) -> bool:
        if alive_only and not ((self.alive >> u) & 1 and (self.alive >> v) & 1):
            return False
        return bool((self.union[u] >> v) & 1)

    def edges(self, color: Optional[Color] = None, alive_only: bool = False) -> Iterator[Edge]:
        """Edges u < v of one color, or of the union when color is None."""
        rows = self.union if color is None else self.rows(color)
        alive = self.alive if alive_only else self.full_mask
        for u in iter_bits(alive):
            for v in iter_bits(rows[u] & alive & ~((2 << u) - 1)):
                yield (u, v)

    def edge_count(self, color: Optional[Color] = None, alive_only: bool = False) -> int:
        rows = self.union if color is None else self.rows(color)
        alive = self.alive if alive_only else self.full_mask
        total = sum((rows[v] & alive).bit_count() for v in iter_bits(alive))
        return total // 2

    def with_alive(self, alive: int) -> "ColoredGraph":
        return replace(self, alive=alive & self.full_mask)

    def without_edges(self, edges: Iterable[Edge]) -> "ColoredGraph":
        """Copy with the given pairs removed from both color classes."""
        red, blue = list(self.red), list(self.blue)
        for u, v in edges:
            red[u] &= ~(1 << v)
            red[v] &= ~(1 << u)
            blue[u] &= ~(1 << v)
            blue[v] &= ~(1 << u)
        return ColoredGraph(n=self.n, red=tuple(red), blue=tuple(blue), alive=self.alive)

    def union_matrix(self, alive_only: bool = False) -> sparse.csr_matrix:
        """0/1 adjacency of the union graph as CSR."""
        pairs = list(self.edges(alive_only=alive_only))
        if not pairs:
            return sparse.csr_matrix((self.n, self.n), dtype=np.int64)
        arr = np.asarray(pairs, dtype=np.int64)
        rows = np.concatenate([arr[:, 0], arr[:, 1]])
        cols = np.concatenate([arr[:, 1], arr[:, 0]])
        return sparse.csr_matrix(
            (np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(self.n, self.n)
        )

    def to_networkx(self, alive_only: bool = True) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(iter_bits(self.alive if alive_only else self.full_mask))
        for u, v in self.edges(alive_only=alive_only):
            graph.add_edge(u, v, colors="".join(sorted(c.value for c in self.colors(u, v))))
        return graph


@dataclass(frozen=True, eq=False)
class Instance:
    """One sampled construction: partitions, base graphs and G'."""

    seed: int
    partitions: PartitionPair
    red_base: BaseGraph
    blue_base: BaseGraph
    prime: ColoredGraph

    @property
    def n(self) -> int:
        return self.prime.n


def sample_partition(n: int, r: int, seed=None) -> Partition:
    """Uniform partition of [n] into n/r blocks of size r."""
    if r < 1 or n % r:
        raise PartitionError(f"block size r={r} does not divide n={n}")
    rng = as_rng(seed)
    order = rng.permutation(n).reshape(n // r, r)
    return Partition.from_blocks(order.tolist())


def sample_base_graph(m: int, p: float, seed=None) -> BaseGraph:
    """G(m, p): every pair kept independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability must lie in [0, 1], got {p}")
    rng = as_rng(seed)
    edges: List[Edge] = []
    for u in range(m - 1):
        hits = np.flatnonzero(rng.random(m - u - 1) < p)
        edges.extend((u, u + 1 + int(j)) for j in hits)
    return BaseGraph(m=m, edges=tuple(edges))


def blow_up(base: BaseGraph, blocks: Partition) -> Rows:
    """r-blow-up of base along the given blocks, as adjacency rows on [n]."""
    if base.m != blocks.m:
        raise DimensionError(f"base graph has {base.m} vertices but partition has {blocks.m} blocks")
    rows = [0] * blocks.n
    masks = blocks.block_masks
    for a, b in base.edges:
        for v in blocks.blocks[a]:
            rows[v] |= masks[b]
        for v in blocks.blocks[b]:
            rows[v] |= masks[a]
    return tuple(rows)


def superimpose(red_rows: Rows, blue_rows: Rows, partitions: PartitionPair) -> ColoredGraph:
    """G' = G'_R union G'_B with both color classes kept apart."""
    n = partitions.n
    if len(red_rows) != n or len(blue_rows) != n:
        raise DimensionError("edge relations and partitions disagree on n")
    return ColoredGraph(n=n, red=tuple(red_rows), blue=tuple(blue_rows), alive=(1 << n) - 1)


def is_simple(edges: Iterable[Edge], partitions: PartitionPair) -> bool:
    """At most one edge per red block pair and per blue block pair."""
    seen_red, seen_blue = set(), set()
    for u, v in edges:
        red_key = partitions.red.pair_key(u, v)
        if red_key is not None:
            if red_key in seen_red:
                return False
            seen_red.add(red_key)
        blue_key = partitions.blue.pair_key(u, v)
        if blue_key is not None:
            if blue_key in seen_blue:
                return False
            seen_blue.add(blue_key)
    return True


def recover_base(rows: Rows, blocks: Partition) -> BaseGraph:
    """Base graph whose blow-up along blocks gives rows."""
    edges = set()
    for u, row in enumerate(rows):
        for v in iter_bits(row & ~((2 << u) - 1)):
            key = blocks.pair_key(u, v)
            if key is None:
                raise PartitionError(f"edge {u}-{v} lies inside a block of its own color")
            edges.add(key)
    base = BaseGraph.from_edges(blocks.m, edges)
    if blow_up(base, blocks) != tuple(rows):
        raise PartitionError("edge relation is not a blow-up along the given blocks")
    return base


def build_instance(
    partitions: PartitionPair, red_base: BaseGraph, blue_base: BaseGraph, seed: int = 0
) -> Instance:
    prime = superimpose(blow_up(red_base, partitions.red), blow_up(blue_base, partitions.blue), partitions)
    return Instance(seed=seed, partitions=partitions, red_base=red_base, blue_base=blue_base, prime=prime)


def sample_instance(params: Params, seed: int) -> Instance:
    """Sample partitions and base graphs for params; a pure function of (params, seed)."""
    n, r = params.n, params.r
    partitions = PartitionPair(
        red=sample_partition(n, r, stage_rng(seed, "partition.red")),
        blue=sample_partition(n, r, stage_rng(seed, "partition.blue")),
    )
    red_base = sample_base_graph(params.m, params.p, stage_rng(seed, "base.red"))
    blue_base = sample_base_graph(params.m, params.p, stage_rng(seed, "base.blue"))
    instance = build_instance(partitions, red_base, blue_base, seed)
    logger.info(
        "sampled instance seed=%d n=%d r=%d red=%d blue=%d base edges",
        seed, n, r, red_base.edge_count, blue_base.edge_count,
    )
    return instance


def color_sets(graph: ColoredGraph, cycle: Sequence[int]) -> List[FrozenSet[Color]]:
    """Color set of each edge (c_i, c_{i+1}) of a closed vertex sequence."""
    t = len(cycle)
    return [graph.colors(cycle[i], cycle[(i + 1) % t]) for i in range(t)]


def neighbors_dict(rows: Rows, vertices: int) -> Dict[int, int]:
    """Rows restricted to a vertex mask, keyed by vertex."""
    return {v: rows[v] & vertices for v in iter_bits(vertices)}
