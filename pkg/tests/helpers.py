"""Small graph builders shared by the test modules."""
from typing import Iterable, Optional, Sequence, Tuple

import networkx as nx

from app.construction.model import ColoredGraph, Partition, PartitionPair


def rows_from_edges(n: int, edges: Iterable[Tuple[int, int]]) -> Tuple[int, ...]:
    rows = [0] * n
    for u, v in edges:
        rows[u] |= 1 << v
        rows[v] |= 1 << u
    return tuple(rows)


def colored(
    n: int,
    red: Iterable[Tuple[int, int]] = (),
    blue: Iterable[Tuple[int, int]] = (),
    dead: Sequence[int] = (),
) -> ColoredGraph:
    alive = (1 << n) - 1
    for v in dead:
        alive &= ~(1 << v)
    return ColoredGraph(n=n, red=rows_from_edges(n, red), blue=rows_from_edges(n, blue), alive=alive)


def from_networkx(graph: nx.Graph) -> ColoredGraph:
    """Red-only colored graph on nodes 0..n-1."""
    return colored(graph.number_of_nodes(), red=graph.edges())


def consecutive(n: int, r: int) -> Partition:
    return Partition.from_blocks([range(i, i + r) for i in range(0, n, r)])


def singletons(n: int) -> PartitionPair:
    part = Partition.from_blocks([[v] for v in range(n)])
    return PartitionPair(red=part, blue=part)


def pair(red_blocks, blue_blocks: Optional[Sequence] = None) -> PartitionPair:
    red = Partition.from_blocks(red_blocks)
    blue = red if blue_blocks is None else Partition.from_blocks(blue_blocks)
    return PartitionPair(red=red, blue=blue)
