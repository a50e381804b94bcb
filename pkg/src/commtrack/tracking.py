"""Tracking engines and critical-event classification.

Four engines chain communities into linear evolving sequences:

* ``greene``    Jaccard >= threshold against the sequence front; a front may
                wait up to ``d - 1`` unmatched timestamps, and is dissolved
                after ``d`` consecutive misses.
* ``takaffoli`` Modec score >= k against the front, no dissolve horizon.
* ``ged``       both directed inclusions above their thresholds, consecutive
                timestamps only.
* ``tajeuna``   mutual transition similarity > lambda between the ORIGIN's
                vector and each later community, no horizon.

The front-matching engines give every community to at most one sequence:
candidate (front, community) pairs are accepted greedily by descending
score, ties going to the older sequence and then the lower community
ordinal.  Communities left unclaimed open new sequences.  Tajeuna chains are
built independently per origin; a community becomes an origin unless an
earlier chain already collected it.
"""
from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .detection import Community, CommunityId, CommunityLayer, all_communities
from .similarity import SimilarityMatrix, TransitionVectors, modified_jaccard, score_all_pairs

METHODS = ("greene", "takaffoli", "ged", "tajeuna")
METHOD_MEASURE = {"greene": "jaccard", "takaffoli": "modec", "ged": "inclusion", "tajeuna": "mutual"}
# threshold keys each engine reads from TrackerConfig.thresholds
THRESHOLD_KEYS = {
    "greene": ("jaccard",),
    "takaffoli": ("modec",),
    "ged": ("inclusion_fwd", "inclusion_bwd"),
    "tajeuna": ("mutual",),
}


@dataclass(frozen=True)
class EvolvingSequence:
    method: str
    members: tuple[CommunityId, ...]
    status: str = "active"
    dissolved_at: int | None = None

    def __post_init__(self):
        if not self.members:
            raise ValueError("an evolving sequence needs at least one community")
        ts = [m[0] for m in self.members]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError(f"timestamps must increase strictly: {self.members}")

    @property
    def origin(self) -> CommunityId:
        return self.members[0]

    @property
    def front(self) -> CommunityId:
        return self.members[-1]

    def __len__(self):
        return len(self.members)

    def gaps(self) -> list[int]:
        """Number of skipped timestamps between consecutive members."""
        return [b[0] - a[0] - 1 for a, b in zip(self.members, self.members[1:])]

    def to_json(self) -> str:
        return json.dumps({
            "method": self.method,
            "origin": list(self.origin),
            "members": [list(m) for m in self.members],
            "status": self.status,
        })

    @classmethod
    def from_json(cls, line: str) -> "EvolvingSequence":
        d = json.loads(line)
        return cls(d["method"], tuple(tuple(m) for m in d["members"]), d["status"])


@dataclass
class TrackerConfig:
    thresholds: dict[str, float] = field(default_factory=dict)
    d: int = 3
    growth_ratio: float = 1.5

    def __post_init__(self):
        if self.d < 3:
            raise ValueError(f"dissolve patience d must be > 2, got {self.d}")
        for k, v in self.thresholds.items():
            if not 0.0 < v < 1.0:
                raise ValueError(f"threshold {k}={v} outside (0, 1)")

    def threshold(self, key: str) -> float:
        try:
            return self.thresholds[key]
        except KeyError:
            raise ValueError(f"no threshold configured for {key!r}") from None


def _later_neighbors(matrix: SimilarityMatrix) -> dict[CommunityId, dict[int, list[tuple[CommunityId, float]]]]:
    nbrs: dict = defaultdict(lambda: defaultdict(list))
    for (a, b), s in matrix.entries.items():
        if a[0] < b[0]:
            nbrs[a][b[0]].append((b, s))
        elif not matrix.symmetric:
            continue
        else:
            nbrs[b][a[0]].append((a, s))
    return nbrs


def _track_fronts(method: str, layers: Sequence[CommunityLayer],
                  candidates: Callable[[CommunityId, int], Iterable[tuple[CommunityId, float]]],
                  window: int | None, d_for_status: int | None) -> list[EvolvingSequence]:
    seqs: list[list[CommunityId]] = []
    for layer in layers:
        t = layer.timestamp_index
        pairs = []
        for si, seq in enumerate(seqs):
            front = seq[-1]
            if window is not None and t - front[0] > window:
                continue
            for cid, score in candidates(front, t):
                pairs.append((-score, si, cid[1], cid))
        pairs.sort()
        taken_seq: set[int] = set()
        taken: set[CommunityId] = set()
        for _, si, _, cid in pairs:
            if si in taken_seq or cid in taken:
                continue
            seqs[si].append(cid)
            taken_seq.add(si)
            taken.add(cid)
        for c in layer:
            if c.id not in taken:
                seqs.append([c.id])

    m = layers[-1].timestamp_index if layers else 0
    out = []
    for seq in seqs:
        last = seq[-1][0]
        if d_for_status is not None:
            dissolved_at = last + d_for_status if last + d_for_status <= m else None
        else:
            dissolved_at = last + 1 if last < m else None
        status = "dissolved" if dissolved_at is not None else "active"
        out.append(EvolvingSequence(method, tuple(seq), status, dissolved_at))
    out.sort(key=lambda s: s.origin)
    return out


def track_greene(layers: Sequence[CommunityLayer], matrix: SimilarityMatrix,
                 config: TrackerConfig) -> list[EvolvingSequence]:
    theta = config.threshold("jaccard")
    nbrs = _later_neighbors(matrix)

    def candidates(front, t):
        return [(c, s) for c, s in nbrs.get(front, {}).get(t, ()) if s >= theta]

    return _track_fronts("greene", layers, candidates, window=config.d, d_for_status=config.d)


def track_takaffoli(layers: Sequence[CommunityLayer], matrix: SimilarityMatrix,
                    config: TrackerConfig) -> list[EvolvingSequence]:
    k = config.threshold("modec")
    nbrs = _later_neighbors(matrix)

    def candidates(front, t):
        return [(c, s) for c, s in nbrs.get(front, {}).get(t, ()) if s > 0 and s >= k]

    return _track_fronts("takaffoli", layers, candidates, window=None, d_for_status=None)


def track_ged(layers: Sequence[CommunityLayer], matrix: SimilarityMatrix,
              config: TrackerConfig) -> list[EvolvingSequence]:
    """GED matching; ``matrix`` is the two-way inclusion matrix."""
    a_fwd = config.threshold("inclusion_fwd")
    a_bwd = config.threshold("inclusion_bwd")
    nbrs = _later_neighbors(matrix)

    def candidates(front, t):
        out = []
        for c, fwd in nbrs.get(front, {}).get(t, ()):
            bwd = matrix.score(c, front)
            if fwd >= a_fwd and bwd >= a_bwd:
                out.append((c, fwd + bwd))
        return out

    return _track_fronts("ged", layers, candidates, window=1, d_for_status=None)


def track_tajeuna(layers: Sequence[CommunityLayer], vectors: TransitionVectors, lam: float,
                  matrix: SimilarityMatrix | None = None) -> list[EvolvingSequence]:
    """Origin-anchored chains under the mutual transition similarity.

    ``matrix`` (raw mutual scores) is computed from ``vectors`` when absent.
    """
    if matrix is None:
        matrix = score_all_pairs(layers, "mutual", vectors=vectors)
    nbrs = _later_neighbors(matrix)
    m = layers[-1].timestamp_index
    collected: set[CommunityId] = set()
    out = []
    for c in all_communities(layers):
        if c.id in collected:
            continue
        chain = [c.id]
        for t, cands in sorted(nbrs.get(c.id, {}).items()):
            ok = [(-s, cid[1], cid) for cid, s in cands if s > lam]
            if ok:
                chain.append(min(ok)[2])
        collected.update(chain[1:])
        last = chain[-1][0]
        dissolved_at = last + 1 if last < m else None
        out.append(EvolvingSequence("tajeuna", tuple(chain),
                                    "dissolved" if dissolved_at else "active", dissolved_at))
    return out


def run_tracker(method: str, layers: Sequence[CommunityLayer], matrices: Mapping[str, SimilarityMatrix],
                config: TrackerConfig, vectors: TransitionVectors | None = None) -> list[EvolvingSequence]:
    """Dispatch to one engine; ``matrices`` is keyed by measure name."""
    if method == "greene":
        return track_greene(layers, matrices["jaccard"], config)
    if method == "takaffoli":
        return track_takaffoli(layers, matrices["modec"], config)
    if method == "ged":
        return track_ged(layers, matrices["inclusion"], config)
    if method == "tajeuna":
        return track_tajeuna(layers, vectors, config.threshold("mutual"), matrices.get("mutual"))
    raise ValueError(f"unknown tracking method {method!r}; choose from {METHODS}")


def link_holds(method: str, seq: EvolvingSequence, i: int, matrices: Mapping[str, SimilarityMatrix],
               config: TrackerConfig) -> bool:
    """Re-check the matching rule that admitted member ``i`` (i >= 1) of ``seq``."""
    prev, cur = seq.members[i - 1], seq.members[i]
    gap = cur[0] - prev[0] - 1
    if method == "greene":
        return gap <= config.d - 1 and matrices["jaccard"].score(prev, cur) >= config.threshold("jaccard")
    if method == "takaffoli":
        s = matrices["modec"].score(prev, cur)
        return s > 0 and s >= config.threshold("modec")
    if method == "ged":
        inc = matrices["inclusion"]
        return (gap == 0 and inc.score(prev, cur) >= config.threshold("inclusion_fwd")
                and inc.score(cur, prev) >= config.threshold("inclusion_bwd"))
    if method == "tajeuna":
        return matrices["mutual"].score(seq.origin, cur) > config.threshold("mutual")
    raise ValueError(f"unknown tracking method {method!r}")


# ---------------------------------------------------------------- events

EVENT_KINDS = ("form", "continue", "grow", "shrink", "merge", "split", "dissolve")


@dataclass(frozen=True, order=True)
class Event:
    at: int
    kind: str
    participants: tuple[CommunityId, ...]

    def row(self, method: str = "") -> list:
        return [method, self.kind, self.at, ";".join(f"{t}:{q}" for t, q in self.participants)]


def default_event_match(a: Community, b: Community) -> bool:
    """Two communities are related when one keeps at least half of its nodes in the other."""
    return modified_jaccard(a, b) >= 0.5


def classify_events(sequences: Sequence[EvolvingSequence], layers: Sequence[CommunityLayer],
                    growth_ratio: float = 1.5,
                    match: Callable[[Community, Community], bool] = default_event_match) -> list[Event]:
    """Critical events of one method's sequences.

    Size changes along each sequence give continue / grow / shrink.  Merge
    and split are read off the ``match`` relation between consecutive
    layers: a community related to two or more predecessors is a merge, a
    community related to two or more successors is a split.  Sequences
    starting after the first timestamp without any related predecessor
    form; dissolved sequences dissolve at the timestamp their method
    declared, unless their last community merged or split.
    """
    if growth_ratio <= 1:
        raise ValueError("growth_ratio must exceed 1")
    comm = {c.id: c for c in all_communities(layers)}
    by_t = {layer.timestamp_index: layer for layer in layers}
    first_t = layers[0].timestamp_index if layers else 0
    events: list[Event] = []

    for seq in sequences:
        for a, b in zip(seq.members, seq.members[1:]):
            ratio = len(comm[b]) / len(comm[a])
            kind = "grow" if ratio > growth_ratio else "shrink" if ratio < 1 / growth_ratio else "continue"
            events.append(Event(b[0], kind, (a, b)))

    preds: dict[CommunityId, list[CommunityId]] = defaultdict(list)
    succs: dict[CommunityId, list[CommunityId]] = defaultdict(list)
    for t, layer in by_t.items():
        nxt = by_t.get(t + 1)
        if nxt is None:
            continue
        holders: dict[int, list[Community]] = defaultdict(list)
        for b in nxt:
            for n in b.members:
                holders[n].append(b)
        for a in layer:
            seen = {}
            for n in a.members:
                for b in holders.get(n, ()):
                    seen[b.id] = b
            for bid in sorted(seen):
                if match(a, seen[bid]):
                    succs[a.id].append(bid)
                    preds[bid].append(a.id)

    merged_away: set[CommunityId] = set()
    for bid in sorted(preds):
        if len(preds[bid]) >= 2:
            events.append(Event(bid[0], "merge", tuple(preds[bid]) + (bid,)))
            merged_away.update(preds[bid])
    for aid in sorted(succs):
        if len(succs[aid]) >= 2:
            events.append(Event(aid[0] + 1, "split", (aid,) + tuple(succs[aid])))
            merged_away.add(aid)

    for seq in sequences:
        if seq.origin[0] > first_t and not preds.get(seq.origin):
            events.append(Event(seq.origin[0], "form", (seq.origin,)))
        if seq.status == "dissolved" and seq.front not in merged_away:
            at = seq.dissolved_at if seq.dissolved_at is not None else seq.front[0] + 1
            events.append(Event(at, "dissolve", (seq.front,)))
    events.sort(key=lambda e: (e.at, EVENT_KINDS.index(e.kind), e.participants))
    return events


# ---------------------------------------------------------------- export

def write_sequences(sequences: Iterable[EvolvingSequence], path) -> Path:
    path = Path(path)
    path.write_text("".join(s.to_json() + "\n" for s in sequences))
    return path


def read_sequences(path) -> list[EvolvingSequence]:
    return [EvolvingSequence.from_json(line) for line in Path(path).read_text().splitlines() if line.strip()]


def write_events(events_by_method: Mapping[str, Sequence[Event]], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "kind", "t", "participants"])
        for method, events in events_by_method.items():
            for e in events:
                w.writerow(e.row(method))
    return path
