"""Community similarity measures and transition probability vectors.

Pairwise functions take :class:`~commtrack.detection.Community` objects.
:func:`score_all_pairs` evaluates one measure over every pair of
communities at distinct timestamps with sparse incidence products, so only
pairs sharing at least one node (or, for ``mutual``, at least one vector
component) are materialised; absent pairs score 0.

Scores are stored raw.  The cut-offs of Modec (``>= k``) and mutual
(``> lambda``) are applied by the trackers, so one scoring pass serves any
threshold.
"""
from __future__ import annotations

import csv
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .detection import Community, CommunityId, CommunityLayer, all_communities
from .errors import DataError
from .temporal import Snapshot, TemporalNetwork, degree_within

MEASURES = ("jaccard", "modec", "inclusion", "modified_jaccard", "mutual")
SYMMETRIC = {"jaccard", "modec", "modified_jaccard", "mutual"}


# ---------------------------------------------------------------- pairwise measures

def jaccard(a: Community, b: Community) -> float:
    inter = len(a.members & b.members)
    return inter / (len(a) + len(b) - inter)


def overlap_ratio(a: Community, b: Community) -> float:
    """``|a & b| / max(|a|, |b|)``, the unthresholded Modec score."""
    return len(a.members & b.members) / max(len(a), len(b))


def modec(a: Community, b: Community, k: float = 0.0) -> float:
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"threshold k must lie in [0, 1], got {k}")
    r = overlap_ratio(a, b)
    return r if r >= k else 0.0


def modified_jaccard(a: Community, b: Community) -> float:
    inter = len(a.members & b.members)
    return max(inter / len(a), inter / len(b))


def node_importance(c: Community, snapshot: Snapshot) -> dict[int, int]:
    """Within-community degree of each member, floored at 1."""
    return {n: max(1, degree_within(c.members, snapshot, n)) for n in c.members}


def inclusion(a: Community, b: Community, snapshot_a: Snapshot) -> float:
    """Inclusion of ``a`` in ``b``, weighting shared nodes by their importance in ``a``."""
    if not a.members <= snapshot_a.nodes:
        raise DataError(f"community {a.id} has members outside snapshot {snapshot_a.timestamp_index}")
    shared = a.members & b.members
    if not shared:
        return 0.0
    ni = node_importance(a, snapshot_a)
    total = sum(ni.values())
    return (len(shared) / len(a)) * (sum(ni[n] for n in shared) / total)


# ---------------------------------------------------------------- transition vectors

@dataclass(frozen=True)
class TransitionVector:
    owner: CommunityId
    components: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.components)


def _incidence(comms: Sequence[Community], n_nodes: int | None = None) -> sp.csr_matrix:
    rows, cols = [], []
    for i, c in enumerate(comms):
        rows.extend([i] * len(c))
        cols.extend(c.members)
    if n_nodes is None:
        n_nodes = (max(cols) + 1) if cols else 0
    data = np.ones(len(rows), dtype=np.float64)
    return sp.csr_matrix((data, (rows, cols)), shape=(len(comms), n_nodes))


class TransitionVectors(Mapping):
    """Transition probability vector of every community, keyed by community id.

    Row ``i`` of :attr:`matrix` holds the node counts shared by community
    ``i`` with every community at every timestamp (itself included),
    normalised to sum to 1.  :attr:`order` lists community ids in row order.
    """

    def __init__(self, order: Sequence[CommunityId], matrix: sp.csr_matrix):
        self.order = tuple(order)
        self.position = {cid: i for i, cid in enumerate(self.order)}
        self.matrix = matrix

    @property
    def n_components(self) -> int:
        return self.matrix.shape[1]

    def __getitem__(self, cid: CommunityId) -> TransitionVector:
        i = self.position[cid]
        return TransitionVector(cid, self.matrix.getrow(i).toarray().ravel())

    def __iter__(self) -> Iterator[CommunityId]:
        return iter(self.order)

    def __len__(self):
        return len(self.order)


def transition_vectors(layers: Sequence[CommunityLayer]) -> TransitionVectors:
    if len(layers) < 2:
        raise DataError("transition vectors need at least 2 layers")
    comms = all_communities(layers)
    b = _incidence(comms)
    raw = (b @ b.T).tocsr()
    sums = np.asarray(raw.sum(axis=1)).ravel()
    inv = sp.diags(1.0 / sums)
    return TransitionVectors([c.id for c in comms], (inv @ raw).tocsr())


def _harmonic_terms(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    s = p + q
    out = np.zeros_like(s, dtype=np.float64)
    nz = s > 0
    out[nz] = 2.0 * p[nz] * q[nz] / s[nz]
    return out


def mutual_score(vi, vj) -> float:
    p = np.asarray(getattr(vi, "components", vi), dtype=np.float64)
    q = np.asarray(getattr(vj, "components", vj), dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"vector lengths differ: {p.shape[0]} vs {q.shape[0]}")
    return float(_harmonic_terms(p, q).sum())


def mutual(vi, vj, lam: float = 0.0) -> float:
    """Mutual transition similarity; 0 unless the raw score exceeds ``lam``."""
    s = mutual_score(vi, vj)
    return s if s > lam else 0.0


# ---------------------------------------------------------------- all pairs

@dataclass
class SimilarityMatrix:
    """Raw scores for pairs of communities at distinct timestamps.

    Symmetric measures key each pair once as ``(earlier, later)``.  The
    ``inclusion`` matrix keys ordered pairs: ``(x, y)`` holds ``I(x, y)``,
    and both orders are stored.  Pairs missing from :attr:`entries` score 0.
    """

    measure: str
    entries: dict[tuple[CommunityId, CommunityId], float]

    @property
    def symmetric(self) -> bool:
        return self.measure in SYMMETRIC

    def score(self, a: CommunityId, b: CommunityId) -> float:
        if self.symmetric and a > b:
            a, b = b, a
        return self.entries.get((a, b), 0.0)

    def __len__(self):
        return len(self.entries)

    def direction(self, which: str) -> "SimilarityMatrix":
        """Forward (earlier -> later) or backward slice of an inclusion matrix."""
        if self.measure != "inclusion":
            raise ValueError("only inclusion matrices have directions")
        if which not in ("fwd", "bwd"):
            raise ValueError(f"direction must be 'fwd' or 'bwd', got {which!r}")
        fwd = which == "fwd"
        sel = {k: v for k, v in self.entries.items() if (k[0] < k[1]) == fwd}
        return SimilarityMatrix(f"inclusion_{which}", sel)

    def nonzero_scores(self) -> np.ndarray:
        keys = sorted(self.entries)
        v = np.array([self.entries[k] for k in keys], dtype=np.float64)
        return v[v > 0]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_i", "q_i", "t_j", "q_j", "measure", "score"])
            for (a, b) in sorted(self.entries):
                w.writerow([a[0], a[1], b[0], b[1], self.measure, repr(float(self.entries[(a, b)]))])
        return path

    @classmethod
    def from_csv(cls, path) -> "SimilarityMatrix":
        entries = {}
        measure = None
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                measure = measure or row["measure"]
                if row["measure"] != measure:
                    raise DataError(f"{path}: mixed measures {measure!r} and {row['measure']!r}")
                key = ((int(row["t_i"]), int(row["q_i"])), (int(row["t_j"]), int(row["q_j"])))
                entries[key] = float(row["score"])
        if measure is None:
            measure = Path(path).stem.removeprefix("scores_")
        return cls(measure, entries)


def _overlap_pairs(comms: Sequence[Community]):
    """Sparse intersection counts for pairs at distinct timestamps, i < j."""
    b = _incidence(comms)
    inter = sp.triu(b @ b.T, k=1).tocoo()
    ts = np.array([c.timestamp_index for c in comms])
    keep = ts[inter.row] != ts[inter.col]
    return inter.row[keep], inter.col[keep], inter.data[keep], b


def score_all_pairs(layers: Sequence[CommunityLayer], measure: str,
                    network: TemporalNetwork | None = None,
                    vectors: TransitionVectors | None = None) -> SimilarityMatrix:
    """Score every pair of communities at distinct timestamps with ``measure``.

    ``inclusion`` needs ``network`` for within-community degrees; ``mutual``
    uses ``vectors`` (computed from ``layers`` when omitted).
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}; choose from {MEASURES}")
    comms = all_communities(layers)
    ids = [c.id for c in comms]
    if measure == "mutual":
        return _score_mutual(comms, vectors or transition_vectors(layers))

    rows, cols, inter, inc = _overlap_pairs(comms)
    size = np.array([len(c) for c in comms], dtype=np.float64)
    sa, sb = size[rows], size[cols]
    if measure == "jaccard":
        vals = inter / (sa + sb - inter)
    elif measure == "modec":
        vals = inter / np.maximum(sa, sb)
    elif measure == "modified_jaccard":
        vals = np.maximum(inter / sa, inter / sb)
    else:
        if network is None:
            raise ValueError("inclusion scoring needs the temporal network")
        return _score_inclusion(comms, network, rows, cols, inter, inc)
    entries = {}
    for r, c, v in zip(rows, cols, vals):
        a, b = ids[r], ids[c]
        entries[(a, b) if a < b else (b, a)] = float(v)
    return SimilarityMatrix(measure, entries)


def _score_inclusion(comms, network, rows, cols, inter, inc):
    # weighted incidence: entry (i, n) = importance of n in community i
    w_rows, w_cols, w_data, totals = [], [], [], []
    for i, c in enumerate(comms):
        ni = node_importance(c, network.snapshot(c.timestamp_index))
        for n in sorted(ni):
            w_rows.append(i)
            w_cols.append(n)
            w_data.append(float(ni[n]))
        totals.append(float(sum(ni.values())))
    weighted = sp.csr_matrix((w_data, (w_rows, w_cols)), shape=inc.shape)
    shared_w = (weighted @ inc.T).tocsr()
    totals = np.array(totals)
    size = np.array([len(c) for c in comms], dtype=np.float64)
    entries = {}
    for r, c, k in zip(rows, cols, inter):
        for x, y in ((r, c), (c, r)):
            val = (k / size[x]) * (shared_w[x, y] / totals[x])
            entries[(comms[x].id, comms[y].id)] = float(val)
    return SimilarityMatrix("inclusion", entries)


def _score_mutual(comms, vectors: TransitionVectors) -> SimilarityMatrix:
    mat = vectors.matrix
    pos = [vectors.position[c.id] for c in comms]
    sub = mat[pos].tocsr()
    support = sub.copy()
    support.data[:] = 1.0
    co = sp.triu(support @ support.T, k=1).tocoo()
    ts = np.array([c.timestamp_index for c in comms])
    entries = {}
    indptr, indices, data = sub.indptr, sub.indices, sub.data
    for r, c in zip(co.row, co.col):
        if ts[r] == ts[c]:
            continue
        ir, dr = indices[indptr[r]:indptr[r + 1]], data[indptr[r]:indptr[r + 1]]
        ic, dc = indices[indptr[c]:indptr[c + 1]], data[indptr[c]:indptr[c + 1]]
        _, xr, xc = np.intersect1d(ir, ic, assume_unique=True, return_indices=True)
        p, q = dr[xr], dc[xc]
        val = float(np.sum(2.0 * p * q / (p + q)))
        a, b = comms[r].id, comms[c].id
        entries[(a, b) if a < b else (b, a)] = val
    return SimilarityMatrix("mutual", entries)
