"""End-to-end comparison run.

Steps: (1) detect communities per snapshot, (2) score all pairs at distinct
timestamps per measure, (3) fit a threshold per score population, (4) track
with each method, (5) evaluate, align and report.  Every file written goes
into ``out`` and is listed in ``manifest.json`` together with a hash of the
configuration.  All outputs are a pure function of inputs and config.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import detection, evaluation, render, similarity, thresholding, tracking
from .detection import CommunityLayer
from .errors import CommtrackError, ConfigError
from .temporal import Snapshot, TemporalNetwork, load_snapshots

log = logging.getLogger(__name__)

MEASURE_METHOD = {v: k for k, v in tracking.METHOD_MEASURE.items()}
STEPS = {1: "detect", 2: "score", 3: "threshold", 4: "track", 5: "evaluate"}


@dataclass
class PipelineConfig:
    input: str | None = None
    pattern: str = "*{t}.edges"
    name: str | None = None
    detector: str = "cpm"
    cpm_k: int = 4
    communities: str | None = None
    measures: tuple[str, ...] = ("jaccard", "modec", "inclusion", "mutual")
    family: str = "gaussian"
    thresholds: dict[str, float] = field(default_factory=dict)
    d: int = 3
    growth_ratio: float = 1.5
    first: int | None = None
    last: int | None = None
    filter_cutoff: float | None = None
    out: str = "out"
    seed: int = 0

    def validate(self):
        if self.communities:
            self.detector = "external"
        if self.detector not in ("cpm", "modularity", "external"):
            raise ConfigError(f"unknown detector {self.detector!r}")
        if self.detector == "external" and not self.communities:
            raise ConfigError("detector 'external' needs a communities file")
        if self.cpm_k < 3:
            raise ConfigError(f"cpm-k must be >= 3, got {self.cpm_k}")
        self.measures = tuple(self.measures)
        if not self.measures:
            raise ConfigError("select at least one measure")
        for m in self.measures:
            if m not in MEASURE_METHOD:
                raise ConfigError(f"unknown measure {m!r}; choose from {sorted(MEASURE_METHOD)}")
        if self.family not in thresholding.FAMILIES:
            raise ConfigError(f"unknown mixture family {self.family!r}")
        if self.d < 3:
            raise ConfigError(f"d must be > 2, got {self.d}")
        if self.growth_ratio <= 1:
            raise ConfigError(f"growth-ratio must exceed 1, got {self.growth_ratio}")
        keys = {"jaccard", "modec", "inclusion", "inclusion_fwd", "inclusion_bwd", "mutual"}
        for k, v in self.thresholds.items():
            if k not in keys:
                raise ConfigError(f"unknown threshold key {k!r}")
            if not 0 < float(v) < 1:
                raise ConfigError(f"threshold {k}={v} outside (0, 1)")
        return self

    def to_json(self) -> str:
        d = {k.replace("_", "-"): v for k, v in dataclasses.asdict(self).items()}
        d["measures"] = list(d["measures"])
        return json.dumps(d, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "PipelineConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for k, v in raw.items():
            key = k.replace("-", "_")
            if key not in names:
                raise ConfigError(f"unknown config key {k!r}")
            kwargs[key] = v
        if isinstance(kwargs.get("measures"), str):
            kwargs["measures"] = tuple(s for s in kwargs["measures"].split(",") if s)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a flat JSON object")
        return cls.from_dict(raw)


class PipelineError(CommtrackError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step} ({STEPS[step]}) failed: {cause}")
        self.step = step
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)


@dataclass
class PipelineResult:
    out: Path
    files: list[str]
    network: TemporalNetwork | None = None
    layers: list[CommunityLayer] | None = None
    matrices: dict = field(default_factory=dict)
    vectors: similarity.TransitionVectors | None = None
    thresholds: list = field(default_factory=list)
    sequences: dict = field(default_factory=dict)
    events: dict = field(default_factory=dict)
    report: evaluation.EvaluationReport | None = None
    status: int = 0


def _restrict(network: TemporalNetwork, first: int | None, last: int | None) -> TemporalNetwork:
    if first is None and last is None:
        return network
    lo, hi = first or 1, last or network.m
    if not 1 <= lo < hi <= network.m:
        raise ConfigError(f"snapshot range {lo}..{hi} invalid for {network.m} snapshots")
    snaps = []
    for new_t, s in enumerate(network.snapshots[lo - 1:hi], start=1):
        snaps.append(Snapshot(new_t, s.nodes, s.edges))
    prov = network.provenance[lo - 1:hi] if network.provenance else ()
    return TemporalNetwork(tuple(snaps), network.tokens, network.name, tuple(prov))


def threshold_populations(matrices: dict) -> dict[tuple[str, str], similarity.SimilarityMatrix]:
    """Score populations that each get their own threshold."""
    pops = {}
    for measure, mat in matrices.items():
        if measure == "inclusion":
            pops[("inclusion", "fwd")] = mat.direction("fwd")
            pops[("inclusion", "bwd")] = mat.direction("bwd")
        else:
            pops[(measure, "")] = mat
    return pops


def fit_thresholds(matrices: dict, family: str = "gaussian",
                   overrides: dict[str, float] | None = None) -> list[thresholding.Threshold]:
    overrides = dict(overrides or {})
    if "inclusion" in overrides:
        v = overrides.pop("inclusion")
        overrides.setdefault("inclusion_fwd", v)
        overrides.setdefault("inclusion_bwd", v)
    out = []
    for (measure, direction), mat in threshold_populations(matrices).items():
        key = f"{measure}_{direction}" if direction else measure
        if key in overrides:
            out.append(thresholding.override(float(overrides[key]), measure, direction))
            continue
        fit = thresholding.fit_mixture(mat.nonzero_scores(), family)
        out.append(thresholding.junction_point(fit, measure, direction))
    return out


def tracker_config(thresholds, d: int = 3, growth_ratio: float = 1.5) -> tracking.TrackerConfig:
    values = {}
    for th in thresholds:
        key = f"{th.measure}_{th.direction}" if th.direction else th.measure
        values[key] = th.value
    return tracking.TrackerConfig(values, d=d, growth_ratio=growth_ratio)


def run_pipeline(config: PipelineConfig, until: int = 5, figures: bool = True,
                 network: TemporalNetwork | None = None,
                 layers: list[CommunityLayer] | None = None) -> PipelineResult:
    """Run steps ``1..until``; ``network``/``layers`` skip loading/detection.

    Raises :class:`PipelineError` naming the failing step.  Files written
    before a failure are kept, and the manifest records the failure.
    """
    config.validate()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    res = PipelineResult(out, [])

    def emit(path):
        if path is not None:
            res.files.append(Path(path).name)
        return path

    step = 1
    try:
        # step 1
        if network is None:
            if not config.input:
                raise ConfigError("no input directory given")
            network = load_snapshots(config.input, config.pattern, config.name)
        network = _restrict(network, config.first, config.last)
        res.network = network
        emit(network.write_manifest(out / "network.json"))
        if layers is None:
            if config.detector == "external":
                layers = detection.load_communities(config.communities, network)
            else:
                layers = detection.detect_all(network, config.detector, config.cpm_k)
        elif config.first or config.last:
            raise ConfigError("snapshot range cannot be combined with precomputed layers")
        res.layers = layers
        emit(detection.write_communities(layers, network, out / "communities.txt"))
        stats = detection.layer_stats(layers)
        (out / "layer_stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
        emit(out / "layer_stats.json")
        if until < 2:
            return _finish(res, config, None)

        step = 2
        res.vectors = similarity.transition_vectors(layers)
        for measure in config.measures:
            mat = similarity.score_all_pairs(layers, measure, network, res.vectors)
            res.matrices[measure] = mat
            emit(mat.to_csv(out / f"scores_{measure}.csv"))
        if until < 3:
            return _finish(res, config, None)

        step = 3
        res.thresholds = fit_thresholds(res.matrices, config.family, config.thresholds)
        emit(thresholding.write_thresholds(res.thresholds, out / "thresholds.csv"))
        if until < 4:
            return _finish(res, config, None)

        step = 4
        tcfg = tracker_config(res.thresholds, config.d, config.growth_ratio)
        for measure in config.measures:
            method = MEASURE_METHOD[measure]
            seqs = tracking.run_tracker(method, layers, res.matrices, tcfg, res.vectors)
            res.sequences[method] = seqs
            res.events[method] = tracking.classify_events(seqs, layers, config.growth_ratio)
        all_seqs = [s for m in res.sequences for s in res.sequences[m]]
        emit(tracking.write_sequences(all_seqs, out / "sequences.jsonl"))
        emit(tracking.write_events(res.events, out / "events.csv"))
        if until < 5:
            return _finish(res, config, None)

        step = 5
        report = evaluation.evaluate(res.sequences, layers, res.vectors, dataset=network.name)
        res.report = report
        emit(evaluation.write_scores_csv(report, out / "sequence_scores.csv"))
        emit(evaluation.write_quantity_csv([report], out / "quantity.csv"))
        if len(res.sequences) >= 2:
            emit(evaluation.write_matrix_csv(report, "apcc", out / "apcc.csv"))
            emit(evaluation.write_matrix_csv(report, "apnp", out / "apnp.csv"))
            kept = None
            if config.filter_cutoff is not None:
                kept = evaluation.filter_well_tracked(report, config.filter_cutoff)
                emit(evaluation.write_matrix_csv(report, "apcc", out / "apcc_filtered.csv", kept))
                emit(evaluation.write_matrix_csv(report, "apnp", out / "apnp_filtered.csv", kept))
            if figures:
                emit(render.render_heatmap(report, "apcc", out / "heatmap_apcc.svg", kept))
                emit(render.render_heatmap(report, "apnp", out / "heatmap_apnp.svg", kept))
        if figures:
            emit(render.render_quantity_chart(report, out / "quantity.svg"))
        return _finish(res, config, None)
    except Exception as exc:
        _finish(res, config, (step, exc))
        if isinstance(exc, (CommtrackError, ValueError, OSError)):
            raise PipelineError(step, exc) from exc
        raise


def _finish(res: PipelineResult, config: PipelineConfig, failure) -> PipelineResult:
    manifest = {
        "config": json.loads(config.to_json()),
        "config_hash": config.digest(),
        "files": sorted(set(res.files) | {"manifest.json"}),
        "status": "ok" if failure is None else "failed",
    }
    if failure is not None:
        step, exc = failure
        manifest["failed_step"] = step
        manifest["error"] = str(exc)
    if res.thresholds:
        manifest["thresholds"] = {
            (f"{t.measure}_{t.direction}" if t.direction else t.measure): t.value for t in res.thresholds}
    if res.report is not None:
        manifest["quantities"] = res.report.quantities
        manifest["aligned_origins"] = len(res.report.aligned)
    (res.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return res
