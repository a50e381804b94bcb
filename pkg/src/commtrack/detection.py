"""Per-snapshot community detection.

Two built-in detectors: k-clique percolation (overlapping) and greedy
modularity optimisation with local moves and coarsening (disjoint).  Both
are deterministic: nodes are visited in ascending id and ties keep the
lower community label.  Externally computed assignments can be read with
:func:`load_communities`.
"""
from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError
from .temporal import Snapshot, TemporalNetwork

CommunityId = tuple[int, int]


@dataclass(frozen=True)
class Community:
    """Node set at one timestamp; ``id`` is ``(timestamp, local ordinal)``."""

    id: CommunityId
    members: frozenset[int]

    def __post_init__(self):
        if not self.members:
            raise DataError(f"community {self.id} is empty")

    @property
    def timestamp_index(self) -> int:
        return self.id[0]

    @property
    def q(self) -> int:
        return self.id[1]

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class CommunityLayer:
    timestamp_index: int
    communities: tuple[Community, ...]
    overlapping: bool

    def __post_init__(self):
        for q, c in enumerate(self.communities):
            if c.id != (self.timestamp_index, q):
                raise DataError(f"community {c.id} sits at position {q} of layer {self.timestamp_index}")
        if not self.overlapping:
            seen: set[int] = set()
            for c in self.communities:
                if seen & c.members:
                    raise DataError(f"layer {self.timestamp_index} is flagged disjoint but communities overlap")
                seen |= c.members

    def __len__(self):
        return len(self.communities)

    def __iter__(self):
        return iter(self.communities)

    def __getitem__(self, q):
        return self.communities[q]


def make_layer(t: int, groups: Iterable[Iterable[int]], overlapping: bool | None = None,
               sort: bool = True) -> CommunityLayer:
    """Wrap node groups as a layer; ordinals follow sorted member order.

    With ``overlapping=None`` the flag is inferred from shared members.
    """
    sets = [frozenset(g) for g in groups]
    sets = [s for s in sets if s]
    if sort:
        sets.sort(key=lambda s: (sorted(s), len(s)))
    if overlapping is None:
        overlapping = sum(len(s) for s in sets) != len(frozenset().union(*sets))
    comms = tuple(Community((t, q), s) for q, s in enumerate(sets))
    return CommunityLayer(t, comms, overlapping)


def all_communities(layers: Sequence[CommunityLayer]) -> list[Community]:
    return [c for layer in layers for c in layer]


def layer_stats(layers: Sequence[CommunityLayer]) -> dict:
    """Average community count per layer and average community size."""
    counts = [len(layer) for layer in layers]
    sizes = [len(c) for layer in layers for c in layer]
    return {
        "avg_com": sum(counts) / len(counts) if counts else 0.0,
        "com_size": sum(sizes) / len(sizes) if sizes else 0.0,
    }


# ---------------------------------------------------------------- clique percolation

def _maximal_cliques(adj: dict[int, frozenset[int]]):
    # Bron-Kerbosch with pivoting, iterative; candidates visited in ascending order
    nodes = sorted(adj)
    if not nodes:
        return
    stack = [((), set(nodes), set())]
    while stack:
        r, p, x = stack.pop()
        if not p and not x:
            yield r
            continue
        if not p:
            continue
        pivot = max(p | x, key=lambda u: (len(adj[u] & p), -u))
        for v in sorted(p - adj[pivot], reverse=True):
            stack.append((r + (v,), p & adj[v], x & adj[v]))
            p = p - {v}
            x = x | {v}


def detect_cpm(snapshot: Snapshot, k: int = 4) -> CommunityLayer:
    """k-clique percolation.

    Communities are unions of k-cliques reachable from one another through
    k-cliques sharing ``k - 1`` nodes.  Equivalently, maximal cliques of size
    ``>= k`` that share at least ``k - 1`` nodes belong to the same community,
    which is how it is computed here.
    """
    if k < 3:
        raise ValueError(f"clique size k must be >= 3, got {k}")
    adj = snapshot.adjacency
    cliques = [frozenset(c) for c in _maximal_cliques(adj) if len(c) >= k]
    parent = list(range(len(cliques)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    by_node: dict[int, list[int]] = defaultdict(list)
    for i, c in enumerate(cliques):
        for n in c:
            by_node[n].append(i)
    for i, c in enumerate(cliques):
        shared: dict[int, int] = defaultdict(int)
        for n in c:
            for j in by_node[n]:
                if j > i:
                    shared[j] += 1
        for j, s in shared.items():
            if s >= k - 1:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, set[int]] = defaultdict(set)
    for i, c in enumerate(cliques):
        groups[find(i)] |= c
    return make_layer(snapshot.timestamp_index, groups.values(), overlapping=True)


# ---------------------------------------------------------------- greedy modularity

def modularity(snapshot: Snapshot, groups: Iterable[Iterable[int]]) -> float:
    """Newman modularity of a partition of ``snapshot``; 0 for an edgeless graph."""
    m = len(snapshot.edges)
    if m == 0:
        return 0.0
    label = {}
    for c, g in enumerate(groups):
        for n in g:
            label[n] = c
    inside = defaultdict(int)
    degree = defaultdict(int)
    for u, v in snapshot.edges:
        if label[u] == label[v]:
            inside[label[u]] += 1
    for n, nb in snapshot.adjacency.items():
        degree[label[n]] += len(nb)
    return sum(inside[c] / m - (degree[c] / (2 * m)) ** 2 for c in degree)


def _local_moves(nbr_w: list[dict[int, float]], deg: list[float], m2: float):
    """One level of node moves. Returns (labels, moved?)."""
    n = len(deg)
    label = list(range(n))
    tot = list(deg)
    improved = False
    while True:
        moved = False
        for i in range(n):
            ci = label[i]
            links = defaultdict(float)
            for j, w in nbr_w[i].items():
                links[label[j]] += w
            tot[ci] -= deg[i]
            stay = links.get(ci, 0.0) - tot[ci] * deg[i] / m2
            best_c, best_gain = ci, stay
            for c in sorted(links):
                gain = links[c] - tot[c] * deg[i] / m2
                if gain > best_gain + 1e-12:
                    best_c, best_gain = c, gain
            if best_gain <= stay + 1e-12:
                best_c = ci
            tot[best_c] += deg[i]
            if best_c != ci:
                label[i] = best_c
                moved = improved = True
        if not moved:
            break
    return label, improved


def detect_modularity(snapshot: Snapshot) -> CommunityLayer:
    """Disjoint communities by greedy modularity maximisation.

    Alternates local node moves (each node joins the neighbouring community
    with the largest positive modularity gain) and coarsening of communities
    into super-nodes, until a pass produces no move.
    """
    if not snapshot.nodes:
        raise DataError(f"snapshot {snapshot.timestamp_index} is empty")
    order = sorted(snapshot.nodes)
    pos = {n: i for i, n in enumerate(order)}
    # super-node i -> original nodes
    members: list[list[int]] = [[n] for n in order]
    nbr_w: list[dict[int, float]] = [dict() for _ in order]
    self_w = [0.0] * len(order)
    for u, v in snapshot.edges:
        nbr_w[pos[u]][pos[v]] = 1.0
        nbr_w[pos[v]][pos[u]] = 1.0
    deg = [float(sum(w.values())) for w in nbr_w]
    m2 = float(2 * len(snapshot.edges))
    if m2 == 0:
        return make_layer(snapshot.timestamp_index, members, overlapping=False)

    while True:
        label, improved = _local_moves(nbr_w, deg, m2)
        if not improved:
            break
        relabel = {}
        for c in label:
            relabel.setdefault(c, len(relabel))
        k = len(relabel)
        new_members: list[list[int]] = [[] for _ in range(k)]
        new_nbr: list[dict[int, float]] = [defaultdict(float) for _ in range(k)]
        new_self = [0.0] * k
        new_deg = [0.0] * k
        for i, c in enumerate(label):
            a = relabel[c]
            new_members[a].extend(members[i])
            new_self[a] += self_w[i]
            new_deg[a] += deg[i]
            for j, w in nbr_w[i].items():
                b = relabel[label[j]]
                if a == b:
                    new_self[a] += w
                else:
                    new_nbr[a][b] += w
        members, nbr_w, self_w, deg = new_members, [dict(d) for d in new_nbr], new_self, new_deg
    return make_layer(snapshot.timestamp_index, members, overlapping=False)


def detect_all(network: TemporalNetwork, detector: str = "cpm", k: int = 4) -> list[CommunityLayer]:
    if detector == "cpm":
        return [detect_cpm(s, k) for s in network]
    if detector == "modularity":
        return [detect_modularity(s) for s in network]
    raise ValueError(f"unknown detector {detector!r}")


# ---------------------------------------------------------------- file format

_LINE = re.compile(r"^t=(\d+)$")


def load_communities(path, network: TemporalNetwork) -> list[CommunityLayer]:
    """Read ``t=<ordinal> tok tok ...`` lines, one community per line.

    Returns one layer per snapshot of ``network`` (possibly empty).  The
    overlapping flag of each layer is inferred from shared members.
    """
    path = Path(path)
    groups: dict[int, list[list[int]]] = {t: [] for t in range(1, network.m + 1)}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            mt = _LINE.match(parts[0])
            if not mt:
                raise DataError(f"{path}:{lineno}: expected 't=<ordinal>' first, got {parts[0]!r}")
            t = int(mt.group(1))
            if t not in groups:
                raise DataError(f"{path}:{lineno}: unknown timestamp {t} (network has 1..{network.m})")
            snap = network.snapshot(t)
            ids = []
            for tok in parts[1:]:
                n = network.index.get(tok)
                if n is None or n not in snap.nodes:
                    raise DataError(f"{path}:{lineno}: node {tok!r} is not present at timestamp {t}")
                ids.append(n)
            if not ids:
                raise DataError(f"{path}:{lineno}: empty community")
            groups[t].append(ids)
    return [make_layer(t, g, sort=False) for t, g in groups.items()]


def write_communities(layers: Sequence[CommunityLayer], network: TemporalNetwork, path) -> Path:
    tok = network.tokens
    lines = []
    for layer in layers:
        for c in layer:
            lines.append(f"t={layer.timestamp_index} " + " ".join(tok[n] for n in sorted(c.members)))
    path = Path(path)
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return path
