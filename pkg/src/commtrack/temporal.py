"""Snapshot series of undirected, unweighted graphs.

A :class:`TemporalNetwork` holds ``m >= 2`` snapshots indexed ``1..m``.
Node tokens from the input files are interned to integers in order of
first appearance, so re-loading the same directory always yields the same
ids.  Edges are stored as ``(u, v)`` with ``u < v``.
"""
from __future__ import annotations

import json
import logging
import re
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DataError

log = logging.getLogger(__name__)

Edge = tuple[int, int]


@dataclass(frozen=True)
class Snapshot:
    timestamp_index: int
    nodes: frozenset[int]
    edges: frozenset[Edge]

    def __post_init__(self):
        for u, v in self.edges:
            if u >= v:
                raise DataError(f"edge ({u}, {v}) is not stored as (low, high) or is a self-loop")
            if u not in self.nodes or v not in self.nodes:
                raise DataError(f"edge ({u}, {v}) has an endpoint outside the node set")

    @cached_property
    def adjacency(self) -> Mapping[int, frozenset[int]]:
        nbrs: dict[int, set[int]] = {n: set() for n in self.nodes}
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return {n: frozenset(s) for n, s in nbrs.items()}

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def neighbors(self, n: int) -> frozenset[int]:
        return self.adjacency.get(n, frozenset())

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class TemporalNetwork:
    """Ordered snapshots plus the token table used to intern node ids.

    ``tokens[i]`` is the external token of node ``i``.  ``provenance`` holds
    one dict per snapshot describing where it came from and what was dropped
    during loading.
    """

    snapshots: tuple[Snapshot, ...]
    tokens: tuple[str, ...]
    name: str = "network"
    provenance: tuple[dict, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.snapshots) < 2:
            raise DataError("a temporal network needs at least 2 snapshots")
        for i, snap in enumerate(self.snapshots, start=1):
            if snap.timestamp_index != i:
                raise DataError(f"snapshot {i} carries timestamp index {snap.timestamp_index}")

    @property
    def m(self) -> int:
        return len(self.snapshots)

    def __len__(self):
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    def snapshot(self, t: int) -> Snapshot:
        if not 1 <= t <= self.m:
            raise DataError(f"no snapshot at timestamp {t} (have 1..{self.m})")
        return self.snapshots[t - 1]

    @cached_property
    def index(self) -> dict[str, int]:
        return {tok: i for i, tok in enumerate(self.tokens)}

    def node_id(self, token: str) -> int:
        try:
            return self.index[token]
        except KeyError:
            raise DataError(f"unknown node token {token!r}") from None

    def manifest(self) -> dict:
        rows = []
        for snap, prov in zip(self.snapshots, self.provenance or [{}] * self.m):
            rows.append({
                "timestamp": snap.timestamp_index,
                "file": prov.get("file"),
                "ordinal": prov.get("ordinal"),
                "nodes": len(snap.nodes),
                "edges": len(snap.edges),
                "self_loops_dropped": prov.get("self_loops", 0),
                "duplicates_dropped": prov.get("duplicates", 0),
            })
        return {"name": self.name, "snapshots": rows, "total_nodes": len(self.tokens)}

    def write_manifest(self, path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.manifest(), indent=2, sort_keys=True) + "\n")
        return path


class _Interner:
    def __init__(self):
        self.index: dict[str, int] = {}
        self.tokens: list[str] = []

    def __call__(self, token: str) -> int:
        i = self.index.get(token)
        if i is None:
            i = self.index[token] = len(self.tokens)
            self.tokens.append(token)
        return i


def _build_snapshot(t, node_lines, edge_lines, intern):
    nodes: set[int] = set()
    edges: set[Edge] = set()
    loops = dups = 0
    for tok in node_lines:
        nodes.add(intern(tok))
    for a, b in edge_lines:
        u, v = intern(a), intern(b)
        nodes.add(u)
        nodes.add(v)
        if u == v:
            loops += 1
            continue
        e = (u, v) if u < v else (v, u)
        if e in edges:
            dups += 1
            continue
        edges.add(e)
    return Snapshot(t, frozenset(nodes), frozenset(edges)), loops, dups


def from_edge_lists(edge_lists: Sequence[Iterable[tuple]], name="network",
                    isolates: Sequence[Iterable] | None = None) -> TemporalNetwork:
    """Build a network from in-memory edge lists, one per snapshot.

    Tokens may be any hashable; they are stringified before interning.
    Self-loops and duplicate edges are dropped silently.
    """
    intern = _Interner()
    snaps = []
    prov = []
    for t, edges in enumerate(edge_lists, start=1):
        iso = [str(x) for x in (isolates[t - 1] if isolates else ())]
        pairs = [(str(a), str(b)) for a, b in edges]
        snap, loops, dups = _build_snapshot(t, iso, pairs, intern)
        snaps.append(snap)
        prov.append({"file": None, "ordinal": t, "self_loops": loops, "duplicates": dups})
    return TemporalNetwork(tuple(snaps), tuple(intern.tokens), name, tuple(prov))


def _template_regex(pattern: str) -> re.Pattern:
    if "{t}" not in pattern:
        raise DataError(f"filename template {pattern!r} must contain '{{t}}'")
    rx = re.escape(pattern).replace(r"\{t\}", r"(\d+)").replace(r"\*", ".*?")
    return re.compile(rf"^{rx}$")


def _parse_edge_file(path: Path):
    nodes, edges = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) == 1:
                nodes.append(parts[0])
            elif len(parts) == 2:
                edges.append((parts[0], parts[1]))
            else:
                raise DataError(f"{path}:{lineno}: expected 'u v' or a single node token, "
                                f"got {len(parts)} fields")
    return nodes, edges


def load_snapshots(directory, pattern: str = "*{t}.edges", name: str | None = None) -> TemporalNetwork:
    """Load every file in ``directory`` whose name matches ``pattern``.

    ``pattern`` is a filename template where ``{t}`` stands for the integer
    ordinal and ``*`` for any text, e.g. ``"as{t}.edges"``.  Ordinals must be
    contiguous; they are renumbered ``1..m`` in ascending order.

    Each line holds one undirected edge ``u v``; a single token declares a
    node with no edges; ``#`` starts a comment line.
    """
    directory = Path(directory)
    rx = _template_regex(pattern)
    found: dict[int, Path] = {}
    for p in sorted(directory.iterdir()):
        mt = rx.match(p.name)
        if not mt or not p.is_file():
            continue
        ordinal = int(mt.group(1))
        if ordinal in found:
            raise DataError(f"ordinal {ordinal} matched twice: {found[ordinal].name}, {p.name}")
        found[ordinal] = p
    if len(found) < 2:
        raise DataError(f"need at least 2 files matching {pattern!r} in {directory}, found {len(found)}")
    ordinals = sorted(found)
    for prev, cur in zip(ordinals, ordinals[1:]):
        if cur != prev + 1:
            raise DataError(f"gap at ordinal {prev + 1}")

    intern = _Interner()
    snaps, prov = [], []
    for t, ordinal in enumerate(ordinals, start=1):
        path = found[ordinal]
        node_lines, edge_lines = _parse_edge_file(path)
        snap, loops, dups = _build_snapshot(t, node_lines, edge_lines, intern)
        if loops or dups:
            warnings.warn(f"{path.name}: dropped {loops} self-loop(s) and {dups} duplicate edge(s)",
                          stacklevel=2)
        snaps.append(snap)
        prov.append({"file": path.name, "ordinal": ordinal, "self_loops": loops, "duplicates": dups})
    log.info("loaded %d snapshots, %d distinct nodes", len(snaps), len(intern.tokens))
    return TemporalNetwork(tuple(snaps), tuple(intern.tokens), name or directory.name, tuple(prov))


def write_snapshots(network: TemporalNetwork, directory, prefix: str = "t") -> list[Path]:
    """Write ``<prefix><t>.edges`` files that :func:`load_snapshots` reads back."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tok = network.tokens
    paths = []
    for snap in network:
        covered = {n for e in snap.edges for n in e}
        lines = [f"# snapshot {snap.timestamp_index}"]
        # isolates first so interning order survives a round trip as far as possible
        lines += [tok[n] for n in sorted(snap.nodes - covered)]
        lines += [f"{tok[u]} {tok[v]}" for u, v in sorted(snap.edges)]
        path = directory / f"{prefix}{snap.timestamp_index}.edges"
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def degree_within(subgraph_nodes, snapshot: Snapshot, n: int) -> int:
    """Number of neighbours of ``n`` inside ``subgraph_nodes``."""
    if n not in subgraph_nodes:
        raise DataError(f"node {n} is not in the subgraph")
    return sum(1 for x in snapshot.neighbors(n) if x in subgraph_nodes)
