"""
Text files for instances.

Graph file: a header `n r ell seed mode`, one `u v colors` line per edge
(colors R, B or RB, pairs sorted with u < v), then an optional
`dead v1 v2 ...` line. Partition file: one `R|B index v1 ... vr` line per
block, red blocks first. Writing is canonical so save-load-save is
byte-identical.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ..core.errors import InstanceFormatError, PartitionError
from ..models.params import Mode
from .model import (
    Color,
    ColoredGraph,
    Instance,
    Partition,
    PartitionPair,
    iter_bits,
    recover_base,
)

logger = logging.getLogger(__name__)

GRAPH_SUFFIX = ".graph"
PARTITION_SUFFIX = ".part"
PathLike = Union[str, Path]


@dataclass(frozen=True)
class InstanceHeader:
    n: int
    r: int
    ell: int
    seed: int
    mode: Mode

    def line(self) -> str:
        return f"{self.n} {self.r} {self.ell} {self.seed} {self.mode.value}"


@dataclass(frozen=True, eq=False)
class StoredInstance:
    header: InstanceHeader
    partitions: PartitionPair
    graph: ColoredGraph

    def instance(self) -> Instance:
        """Rebuild base graphs from the stored G'; fails when the edges are not blow-ups."""
        try:
            red_base = recover_base(self.graph.red, self.partitions.red)
            blue_base = recover_base(self.graph.blue, self.partitions.blue)
        except PartitionError as exc:
            raise InstanceFormatError(f"graph is not a superimposed blow-up: {exc}") from exc
        return Instance(
            seed=self.header.seed,
            partitions=self.partitions,
            red_base=red_base,
            blue_base=blue_base,
            prime=self.graph,
        )


def dump_graph(graph: ColoredGraph, header: InstanceHeader) -> str:
    lines = [header.line()]
    for u, v in graph.edges():
        colors = "".join(c.value for c in (Color.RED, Color.BLUE) if c in graph.colors(u, v))
        lines.append(f"{u} {v} {colors}")
    dead = list(iter_bits(graph.full_mask & ~graph.alive))
    if dead:
        lines.append("dead " + " ".join(map(str, dead)))
    return "\n".join(lines) + "\n"


def dump_partitions(partitions: PartitionPair) -> str:
    lines = []
    for color in (Color.RED, Color.BLUE):
        for index, block in enumerate(partitions.of(color).blocks):
            lines.append(f"{color.value} {index} " + " ".join(map(str, block)))
    return "\n".join(lines) + "\n"


def _ints(tokens: List[str], line: int) -> List[int]:
    try:
        return [int(token) for token in tokens]
    except ValueError:
        raise InstanceFormatError(f"expected integers, got {' '.join(tokens)!r}", line)


def parse_graph(text: str) -> Tuple[InstanceHeader, ColoredGraph]:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise InstanceFormatError("missing header", 1)
    head = lines[0].split()
    if len(head) != 5:
        raise InstanceFormatError("header must read 'n r ell seed mode'", 1)
    n, r, ell, seed = _ints(head[:4], 1)
    try:
        mode = Mode(head[4])
    except ValueError:
        raise InstanceFormatError(f"unknown mode {head[4]!r}", 1)
    if n < 1 or r < 1 or n % r:
        raise InstanceFormatError(f"block size r={r} does not divide n={n}", 1)

    red, blue = [0] * n, [0] * n
    seen = set()
    alive = (1 << n) - 1
    dead_seen = False
    for number, raw in enumerate(lines[1:], start=2):
        tokens = raw.split()
        if not tokens:
            continue
        if dead_seen:
            raise InstanceFormatError("nothing may follow the dead line", number)
        if tokens[0] == "dead":
            for v in _ints(tokens[1:], number):
                if not 0 <= v < n:
                    raise InstanceFormatError(f"dead vertex {v} outside [0, {n})", number)
                alive &= ~(1 << v)
            dead_seen = True
            continue
        if len(tokens) != 3:
            raise InstanceFormatError("edge lines read 'u v colors'", number)
        u, v = _ints(tokens[:2], number)
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise InstanceFormatError(f"invalid edge {u} {v}", number)
        if tokens[2] not in ("R", "B", "RB"):
            raise InstanceFormatError(f"unknown colors {tokens[2]!r}", number)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise InstanceFormatError(f"duplicate edge {u} {v}", number)
        seen.add(key)
        for rows, letter in ((red, "R"), (blue, "B")):
            if letter in tokens[2]:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    header = InstanceHeader(n=n, r=r, ell=ell, seed=seed, mode=mode)
    return header, ColoredGraph(n=n, red=tuple(red), blue=tuple(blue), alive=alive)


def parse_partitions(text: str, n: int, r: int) -> PartitionPair:
    blocks: Dict[str, Dict[int, List[int]]] = {"R": {}, "B": {}}
    m = n // r
    last = 1
    for number, raw in enumerate(text.splitlines(), start=1):
        last = number
        tokens = raw.split()
        if not tokens:
            continue
        if tokens[0] not in blocks or len(tokens) < 2:
            raise InstanceFormatError("partition lines read 'R|B index v1 ... vr'", number)
        index, *vertices = _ints(tokens[1:], number)
        if len(vertices) != r:
            raise InstanceFormatError(f"block has {len(vertices)} vertices, expected {r}", number)
        if not 0 <= index < m or index in blocks[tokens[0]]:
            raise InstanceFormatError(f"bad or repeated block index {index}", number)
        blocks[tokens[0]][index] = vertices
    parts = []
    for letter in ("R", "B"):
        found = blocks[letter]
        if len(found) != m:
            raise InstanceFormatError(f"expected {m} {letter} blocks, found {len(found)}", last)
        try:
            part = Partition.from_blocks([found[i] for i in range(m)])
        except PartitionError as exc:
            raise InstanceFormatError(str(exc)) from exc
        if part.n != n:
            raise InstanceFormatError(f"{letter} blocks cover {part.n} vertices, expected {n}")
        parts.append(part)
    return PartitionPair(red=parts[0], blue=parts[1])


def serialize_instance(
    prefix: PathLike,
    partitions: PartitionPair,
    graph: ColoredGraph,
    header: InstanceHeader,
) -> Tuple[Path, Path]:
    """Write `<prefix>.graph` and `<prefix>.part`."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    graph_path = prefix.with_name(prefix.name + GRAPH_SUFFIX)
    partition_path = prefix.with_name(prefix.name + PARTITION_SUFFIX)
    graph_path.write_text(dump_graph(graph, header), encoding="utf-8")
    partition_path.write_text(dump_partitions(partitions), encoding="utf-8")
    logger.info("wrote %s and %s", graph_path, partition_path)
    return graph_path, partition_path


def loads_instance(graph_text: str, partition_text: str) -> StoredInstance:
    header, graph = parse_graph(graph_text)
    partitions = parse_partitions(partition_text, header.n, header.r)
    return StoredInstance(header=header, partitions=partitions, graph=graph)


def load_instance(graph_path: PathLike, partition_path: Optional[PathLike] = None) -> StoredInstance:
    """Read an instance; the partition file defaults to the sibling `.part` file."""
    graph_path = Path(graph_path)
    if partition_path is None:
        partition_path = graph_path.with_suffix(PARTITION_SUFFIX)
    return loads_instance(
        graph_path.read_text(encoding="utf-8"), Path(partition_path).read_text(encoding="utf-8")
    )
