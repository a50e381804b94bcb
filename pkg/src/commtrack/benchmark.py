"""Planted-evolution scenarios with known ground truth.

Chains of node-disjoint communities evolve over ``m`` snapshots.  Each step
replaces a ``churn`` fraction of every chain's members with fresh nodes,
then applies the scheduled events.  Noise communities are made of fresh
nodes at every step, so they never resemble anything else, unless
``noise_overlap`` is set: that fraction of each noise community is then
drawn from the nodes of the chain communities of the same step, which
yields the low-similarity background real networks show.  Within each
community every node pair is linked with probability ``p_in``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .detection import CommunityId, CommunityLayer, make_layer, write_communities
from .errors import ConfigError
from .temporal import Snapshot, TemporalNetwork, write_snapshots
from .tracking import Event, EvolvingSequence


@dataclass(frozen=True)
class PlantedParams:
    """Generator settings.

    Event schedules use chain labels: initial chains are ``"c0".."c{n-1}"``.
    A merge at ``t`` of chains ``a`` and ``b`` creates chain ``"a+b"``; a
    split at ``t`` of ``a`` creates ``"a/0"`` and ``"a/1"``.  A dissolve at
    ``t`` removes the chain from ``t`` on.  An absence ``(a, t, length)``
    hides chain ``a`` at timestamps ``t .. t + length - 1``.
    """

    m: int = 10
    n_chains: int = 20
    community_size: int = 20
    churn: float = 0.0
    noise_per_step: int = 0
    noise_size: int | None = None
    p_in: float = 0.8
    noise_overlap: float = 0.0
    merges: tuple[tuple[int, str, str], ...] = ()
    splits: tuple[tuple[int, str], ...] = ()
    dissolves: tuple[tuple[int, str], ...] = ()
    absences: tuple[tuple[str, int, int], ...] = ()


@dataclass
class PlantedScenario:
    params: PlantedParams
    seed: int
    network: TemporalNetwork
    layers: list[CommunityLayer]
    chains: dict[str, tuple[CommunityId, ...]]
    stable: list[str]
    events: list[Event] = field(default_factory=list)

    def truth(self) -> dict:
        return {
            "seed": self.seed,
            "params": asdict(self.params),
            "chains": {k: [list(c) for c in v] for k, v in self.chains.items()},
            "stable": self.stable,
            "events": [{"kind": e.kind, "t": e.at, "participants": [list(p) for p in e.participants]}
                       for e in self.events],
        }

    def write(self, directory, prefix: str = "t") -> list[Path]:
        """Edge files, ``communities.txt`` and ``truth.json`` under ``directory``."""
        directory = Path(directory)
        paths = write_snapshots(self.network, directory / "snapshots", prefix)
        paths.append(write_communities(self.layers, self.network, directory / "communities.txt"))
        truth = directory / "truth.json"
        truth.write_text(json.dumps(self.truth(), indent=2, sort_keys=True) + "\n")
        paths.append(truth)
        return paths


def generate_planted(params: PlantedParams, seed: int = 0) -> PlantedScenario:
    p = params
    if p.m < 2 or p.n_chains < 0 or p.community_size < 1:
        raise ConfigError("need m >= 2, n_chains >= 0 and community_size >= 1")
    if not 0.0 <= p.churn < 1.0:
        raise ConfigError(f"churn must lie in [0, 1), got {p.churn}")
    if not 0.0 <= p.noise_overlap < 1.0:
        raise ConfigError(f"noise_overlap must lie in [0, 1), got {p.noise_overlap}")
    rng = np.random.default_rng(seed)
    next_node = 0

    def fresh(k):
        nonlocal next_node
        out = list(range(next_node, next_node + k))
        next_node += k
        return out

    schedule: dict[int, list[tuple]] = {}
    for t, a, b in p.merges:
        schedule.setdefault(t, []).append(("merge", a, b))
    for t, a in p.splits:
        schedule.setdefault(t, []).append(("split", a))
    for t, a in p.dissolves:
        schedule.setdefault(t, []).append(("dissolve", a))
    for t in schedule:
        if not 2 <= t <= p.m:
            raise ConfigError(f"event at t={t} outside 2..{p.m}")
    hidden = {}
    for a, t, length in p.absences:
        if length < 1 or not 2 <= t or t + length - 1 > p.m:
            raise ConfigError(f"absence of {a} at t={t} for {length} step(s) does not fit in 2..{p.m}")
        hidden.setdefault(a, set()).update(range(t, t + length))

    state: dict[str, set[int]] = {f"c{i}": set(fresh(p.community_size)) for i in range(p.n_chains)}
    chains: dict[str, list[CommunityId]] = {k: [] for k in state}
    touched: set[str] = set(hidden)
    events: list[Event] = []
    layers: list[CommunityLayer] = []
    snaps: list[Snapshot] = []
    noise_size = p.noise_size or p.community_size

    for t in range(1, p.m + 1):
        if t > 1:
            for label in state:
                members = state[label]
                r = int(round(p.churn * len(members)))
                if r:
                    drop = rng.choice(sorted(members), size=r, replace=False)
                    members.difference_update(int(x) for x in drop)
                    members.update(fresh(r))
        fronts = {label: chains[label][-1] for label in state
                  if chains[label] and chains[label][-1][0] == t - 1}
        pending: list[tuple] = []
        for ev in schedule.get(t, ()):
            kind, labels = ev[0], ev[1:]
            for a in labels:
                if a not in state:
                    raise ConfigError(f"{kind} at t={t} names chain {a!r}, which is not alive")
                if a not in fronts:
                    raise ConfigError(f"{kind} at t={t}: chain {a!r} has no community at t={t - 1}")
            touched.update(labels)
            if kind == "dissolve":
                del state[labels[0]]
                events.append(Event(t, "dissolve", (fronts[labels[0]],)))
            elif kind == "merge":
                a, b = labels
                new = f"{a}+{b}"
                state[new] = state.pop(a) | state.pop(b)
                chains[new] = []
                touched.add(new)
                pending.append(("merge", (fronts[a], fronts[b]), [new]))
            else:
                (a,) = labels
                nodes = sorted(state.pop(a))
                if len(nodes) < 2:
                    raise ConfigError(f"cannot split chain {a!r} of {len(nodes)} node(s)")
                perm = rng.permutation(len(nodes))
                half = len(nodes) // 2
                kids = [f"{a}/0", f"{a}/1"]
                state[kids[0]] = {nodes[i] for i in perm[:half]}
                state[kids[1]] = {nodes[i] for i in perm[half:]}
                for k in kids:
                    chains[k] = []
                touched.update(kids)
                pending.append(("split", (fronts[a],), kids))

        groups, owners = [], []
        for label, members in state.items():
            if t in hidden.get(label, ()):
                continue
            groups.append(sorted(members))
            owners.append(label)
        pool = sorted(set().union(*groups)) if groups else []
        for _ in range(p.noise_per_step):
            k = min(int(round(p.noise_overlap * noise_size)), len(pool))
            borrowed = [int(x) for x in rng.choice(pool, size=k, replace=False)] if k else []
            groups.append(sorted(borrowed + fresh(noise_size - k)))
            owners.append(None)
        layer = make_layer(t, groups, overlapping=p.noise_overlap > 0 and p.noise_per_step > 0, sort=False)
        layers.append(layer)
        for c, label in zip(layer, owners):
            if label is not None:
                chains[label].append(c.id)
        for kind, before, after in pending:
            ids = tuple(chains[k][-1] for k in after)
            if kind == "merge":
                events.append(Event(t, "merge", before + ids))
            else:
                events.append(Event(t, "split", before + ids))

        nodes: set[int] = set()
        edges: set[tuple[int, int]] = set()
        for g in groups:
            nodes.update(g)
            if len(g) < 2:
                continue
            iu, ju = np.triu_indices(len(g), k=1)
            keep = rng.random(iu.size) < p.p_in
            for i, j in zip(iu[keep], ju[keep]):
                u, v = g[i], g[j]
                edges.add((u, v) if u < v else (v, u))
        snaps.append(Snapshot(t, frozenset(nodes), frozenset(edges)))

    tokens = tuple(f"v{i}" for i in range(next_node))
    network = TemporalNetwork(tuple(snaps), tokens, name=f"planted-{seed}")
    stable = [k for k, v in chains.items() if k not in touched and len(v) == p.m]
    events.sort(key=lambda e: (e.at, e.kind, e.participants))
    return PlantedScenario(params, seed, network, layers,
                           {k: tuple(v) for k, v in chains.items()}, stable, events)


def recovered(chain: Sequence[CommunityId], sequences: Sequence[EvolvingSequence],
              fraction: float = 0.8) -> bool:
    """True when one sequence holds at least ``fraction`` of the chain's communities."""
    target = set(chain)
    need = fraction * len(target)
    return any(len(target.intersection(s.members)) >= need for s in sequences)


def recovery_rate(scenario: PlantedScenario, sequences: Sequence[EvolvingSequence],
                  fraction: float = 0.8) -> float:
    if not scenario.stable:
        return 1.0
    hits = sum(recovered(scenario.chains[k], sequences, fraction) for k in scenario.stable)
    return hits / len(scenario.stable)
