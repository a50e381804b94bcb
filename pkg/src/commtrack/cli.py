"""Command line entry point.

Each step subcommand runs the pipeline up to and including that step, so
``commtrack score ...`` leaves detection and score artifacts in ``--out``.
``run`` runs everything and renders figures; ``bench`` writes a planted
scenario and can run the pipeline on it.

Exit codes: 0 success, 2 config error, 3 data error, 4 degenerate fit.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import benchmark
from .errors import CommtrackError, ConfigError
from .pipeline import PipelineConfig, run_pipeline

STEP_OF = {"detect": 1, "score": 2, "threshold": 3, "track": 4, "evaluate": 5, "run": 5}


def _threshold_arg(text: str) -> dict[str, float]:
    out = {}
    for part in text.split(","):
        if not part:
            continue
        key, _, value = part.partition("=")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad threshold {part!r}; expected measure=value") from None
    return out


def _add_pipeline_options(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat JSON config with kebab-case keys")
    p.add_argument("--input", help="directory of snapshot edge files")
    p.add_argument("--pattern", help="filename template with {t} for the ordinal, e.g. 'as{t}.edges'")
    p.add_argument("--name", help="dataset label used in reports")
    p.add_argument("--detector", choices=["cpm", "modularity", "external"])
    p.add_argument("--cpm-k", type=int)
    p.add_argument("--communities", help="precomputed communities file (implies --detector external)")
    p.add_argument("--measures", help="comma list of jaccard,modec,inclusion,mutual")
    p.add_argument("--family", choices=["gaussian", "gamma"])
    p.add_argument("--thresholds", type=_threshold_arg,
                   help="overrides, e.g. 'jaccard=0.5,inclusion_fwd=0.4'")
    p.add_argument("--d", type=int, help="dissolve patience for greene (> 2)")
    p.add_argument("--growth-ratio", type=float)
    p.add_argument("--first", type=int, help="first snapshot to use (1-based)")
    p.add_argument("--last", type=int, help="last snapshot to use (inclusive)")
    p.add_argument("--filter-cutoff", type=float,
                   help="also write matrices without origins every method scores above this")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")


def _config_from_args(args) -> PipelineConfig:
    raw = {}
    if args.config:
        raw = json.loads(PipelineConfig.from_file(args.config).to_json())
    for key in ("input", "pattern", "name", "detector", "cpm_k", "communities", "measures", "family",
                "thresholds", "d", "growth_ratio", "first", "last", "filter_cutoff", "seed", "out"):
        value = getattr(args, key, None)
        if value is None:
            continue
        if key == "thresholds":
            value = {**raw.get("thresholds", {}), **value}
        raw[key.replace("_", "-")] = value
    return PipelineConfig.from_dict(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="commtrack", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [("detect", "step 1: detect communities"),
                            ("score", "steps 1-2: pairwise similarity scores"),
                            ("threshold", "steps 1-3: fit thresholds"),
                            ("track", "steps 1-4: track communities and classify events"),
                            ("evaluate", "steps 1-5: APCC/APNP and quantities"),
                            ("run", "all steps plus SVG figures")]:
        _add_pipeline_options(sub.add_parser(name, help=help_text))
    b = sub.add_parser("bench", help="write a planted scenario (and optionally run it)")
    b.add_argument("--out", required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--m", type=int, default=10)
    b.add_argument("--chains", type=int, default=20)
    b.add_argument("--size", type=int, default=20)
    b.add_argument("--churn", type=float, default=0.1)
    b.add_argument("--noise", type=int, default=5, help="noise communities per step")
    b.add_argument("--noise-overlap", type=float, default=0.5)
    b.add_argument("--p-in", type=float, default=0.8)
    b.add_argument("--run", action="store_true", help="run the full pipeline on the planted layers")
    b.add_argument("--thresholds", type=_threshold_arg)
    return parser


def _bench(args) -> int:
    params = benchmark.PlantedParams(m=args.m, n_chains=args.chains, community_size=args.size,
                                     churn=args.churn, noise_per_step=args.noise,
                                     noise_overlap=args.noise_overlap, p_in=args.p_in)
    scenario = benchmark.generate_planted(params, args.seed)
    scenario.write(args.out)
    print(f"planted scenario written to {args.out} ({len(scenario.stable)} stable chains)")
    if args.run:
        cfg = PipelineConfig(input=f"{args.out}/snapshots", pattern="t{t}.edges", name=scenario.network.name,
                             communities=f"{args.out}/communities.txt", thresholds=args.thresholds or {},
                             out=f"{args.out}/results", seed=args.seed)
        res = run_pipeline(cfg)
        for method, seqs in res.sequences.items():
            print(f"{method:10s} recovery={benchmark.recovery_rate(scenario, seqs):.3f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "bench":
            return _bench(args)
        config = _config_from_args(args)
        res = run_pipeline(config, until=STEP_OF[args.command], figures=args.command == "run")
    except CommtrackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    print(f"wrote {len(res.files)} artifacts to {res.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
