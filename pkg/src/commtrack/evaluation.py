"""Tracking-quality scores: APCC, APNP, cross-method alignment, quantities."""
from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .detection import CommunityId, CommunityLayer, all_communities
from .errors import DataError
from .similarity import TransitionVectors
from .tracking import EvolvingSequence

log = logging.getLogger(__name__)


def pearson_normalized(vi, vj) -> float:
    """Pearson correlation of two vectors mapped affinely onto [0, 1]."""
    x = np.asarray(getattr(vi, "components", vi), dtype=np.float64)
    y = np.asarray(getattr(vj, "components", vj), dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"vector lengths differ: {x.shape[0]} vs {y.shape[0]}")
    dx, dy = x - x.mean(), y - y.mean()
    nx, ny = np.linalg.norm(dx), np.linalg.norm(dy)
    if nx == 0 or ny == 0:
        raise DataError("Pearson correlation is undefined for a constant vector")
    rho = float(dx @ dy) / (nx * ny)
    return (min(1.0, max(-1.0, rho)) + 1.0) / 2.0


def apcc(sequence: EvolvingSequence, vectors: TransitionVectors) -> float:
    """Mean normalised Pearson correlation over unordered member pairs."""
    if len(sequence) < 2:
        raise ValueError("APCC needs a sequence of length >= 2")
    vecs = [vectors[m].components for m in sequence.members]
    pairs = [pearson_normalized(a, b) for a, b in itertools.combinations(vecs, 2)]
    return float(np.mean(pairs))


def apnp(sequence: EvolvingSequence, layers: Sequence[CommunityLayer]) -> float:
    """Mean share of the origin's nodes found in each later member."""
    if len(sequence) < 2:
        raise ValueError("APNP needs a sequence of length >= 2")
    comm = {c.id: c for c in all_communities(layers)}
    origin = comm[sequence.origin].members
    kept = [len(origin & comm[m].members) / len(origin) for m in sequence.members[1:]]
    return sum(kept) / len(kept)


@dataclass
class EvaluationReport:
    """Per-sequence scores, per-method quantities and the aligned origins.

    ``scores[(method, origin)] = (apcc, apnp, length)`` covers every
    sequence of length >= 2; ``quantities[method]`` counts them.
    """

    methods: tuple[str, ...]
    scores: dict[tuple[str, CommunityId], tuple[float, float, int]] = field(default_factory=dict)
    quantities: dict[str, int] = field(default_factory=dict)
    aligned: list[CommunityId] = field(default_factory=list)
    dataset: str = "network"

    def matrix(self, metric: str, origins: Sequence[CommunityId] | None = None) -> np.ndarray:
        """Rows follow :attr:`methods`, columns follow ``origins`` (default: aligned)."""
        col = {"apcc": 0, "apnp": 1}[metric]
        origins = self.aligned if origins is None else origins
        out = np.empty((len(self.methods), len(origins)))
        for i, m in enumerate(self.methods):
            for j, o in enumerate(origins):
                out[i, j] = self.scores[(m, o)][col]
        return out


def evaluate(sequences_by_method: Mapping[str, Sequence[EvolvingSequence]],
             layers: Sequence[CommunityLayer], vectors: TransitionVectors,
             dataset: str = "network") -> EvaluationReport:
    methods = tuple(sequences_by_method)
    report = EvaluationReport(methods, dataset=dataset)
    for method, seqs in sequences_by_method.items():
        n = 0
        for s in seqs:
            if len(s) < 2:
                continue
            report.scores[(method, s.origin)] = (apcc(s, vectors), apnp(s, layers), len(s))
            n += 1
        report.quantities[method] = n
    report.aligned = align_origins(sequences_by_method)
    return report


def align_origins(sequences_by_method: Mapping[str, Sequence[EvolvingSequence]]) -> list[CommunityId]:
    """Origins for which every method produced a sequence of length >= 2."""
    if len(sequences_by_method) < 2:
        raise ValueError("alignment needs sequences from at least 2 methods")
    sets = [{s.origin for s in seqs if len(s) >= 2} for seqs in sequences_by_method.values()]
    common = sorted(set.intersection(*sets))
    if not common:
        log.warning("no origin is tracked by every method; aligned matrices are empty")
    return common


def filter_well_tracked(report: EvaluationReport, cutoff: float,
                        origins: Sequence[CommunityId] | None = None) -> list[CommunityId]:
    """Drop origins where every method's APCC and APNP exceed ``cutoff``."""
    origins = report.aligned if origins is None else origins
    keep = []
    for o in origins:
        cells = [v for m in report.methods for v in report.scores[(m, o)][:2]]
        if not all(v > cutoff for v in cells):
            keep.append(o)
    return keep


def write_matrix_csv(report: EvaluationReport, metric: str, path,
                     origins: Sequence[CommunityId] | None = None) -> Path:
    origins = report.aligned if origins is None else list(origins)
    mat = report.matrix(metric, origins)
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method"] + [f"{t}:{q}" for t, q in origins])
        for m, row in zip(report.methods, mat):
            w.writerow([m] + [f"{v:.12g}" for v in row])
    return path


def write_quantity_csv(reports: Sequence[EvaluationReport], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "method", "count"])
        for r in reports:
            for m in r.methods:
                w.writerow([r.dataset, m, r.quantities[m]])
    return path


def write_scores_csv(report: EvaluationReport, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "t", "q", "length", "apcc", "apnp"])
        for (m, o), (c, p, n) in sorted(report.scores.items(), key=lambda kv: (report.methods.index(kv[0][0]), kv[0][1])):
            w.writerow([m, o[0], o[1], n, f"{c:.12g}", f"{p:.12g}"])
    return path
