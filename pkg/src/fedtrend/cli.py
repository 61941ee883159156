"""Command-line front end.

Subcommands:
  run        full experiment: corpus -> likelihoods -> secure round -> rankings
  aggregate  secure aggregation only, over a JSONL file of vectors
  rank       Bayes ranking only, over a JSONL file of likelihood vectors
  check      assert the federated ranking equals the centralized oracle

Exit codes: 0 success, 1 check mismatch, 2 configuration error,
3 protocol violation, 4 range-validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import baselines, bayes, corpus, data, netsim, secagg
from .experiment import (
    ConfigError,
    ExperimentConfig,
    run_experiment,
    write_outputs,
)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_PROTOCOL = 3
EXIT_RANGE = 4


def _experiment_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--corpus", default=str(data.msmarco_corpus_path()),
        help="corpus file (default: bundled evaluation passages)",
    )
    sub.add_argument("--format", choices=("lines", "jsonl"), default="lines")
    sub.add_argument(
        "--idf", default=str(data.idf_table_path()),
        help="IDF table TSV (default: bundled table)",
    )
    sub.add_argument(
        "--stopwords", default=str(data.stopwords_path()),
        help="stopword list (default: bundled list)",
    )
    sub.add_argument("--users", type=int, default=10, help="number of virtual users")
    sub.add_argument("--k", type=int, default=5, help="primary keyword set size")
    sub.add_argument(
        "--share-range", type=float, default=100.0,
        help="half-width D of the random share interval",
    )
    sub.add_argument("--seed", type=int, required=True, help="experiment seed")
    sub.add_argument("--rounds", type=int, default=1, help="belief-update rounds")
    sub.add_argument("--agg", choices=("sum", "mean"), default="sum")
    sub.add_argument("--oov", choices=("drop", "max"), default="drop")
    sub.add_argument(
        "--delivery", choices=("round_robin", "seeded_shuffle"), default="round_robin"
    )


def _config_from(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        corpus_path=args.corpus,
        corpus_format=args.format,
        idf_path=args.idf,
        stopword_path=args.stopwords,
        n_users=args.users,
        k=args.k,
        share_range=args.share_range,
        seed=args.seed,
        rounds=args.rounds,
        aggregation=args.agg,
        oov=args.oov,
        delivery=args.delivery,
    )


def _load_vectors(path: str) -> list[tuple[str, np.ndarray]]:
    """JSONL vector file: one {"id": ..., "values": [...]} object per line."""
    vectors = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                values = np.asarray(rec["values"], dtype=np.float64)
                vectors.append((str(rec.get("id", lineno - 1)), values))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"{path}: line {lineno}: bad vector record ({exc})")
    if not vectors:
        raise ConfigError(f"{path}: no vectors found")
    dims = {v.shape for _, v in vectors}
    if len(dims) != 1:
        raise ConfigError(f"{path}: vectors disagree on dimension")
    return vectors


def _cmd_run(args: argparse.Namespace) -> int:
    result = run_experiment(_config_from(args))
    paths = write_outputs(result, args.out)
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    top = result.posterior.ranked_keywords()[:5]
    print("top keywords:", ", ".join(top))
    if not result.validation.ok:
        print("range validation FAILED:", result.validation.flagged, file=sys.stderr)
        return EXIT_RANGE
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    result = run_experiment(cfg)
    oracle = baselines.centralized_oracle(
        result.user_docs,
        result.vocab,
        k=cfg.k,
        prior=result.initial_prior,
        alpha0=cfg.alpha0,
        resolution=cfg.score_resolution,
    )
    if cfg.rounds > 1:
        oracle = result.oracle  # multi-round oracle mirrors the belief updates
    if result.posterior.order == oracle.order:
        print(f"oracle check passed: {len(result.vocab)} keywords, seed {cfg.seed}")
        return EXIT_OK
    print("oracle check FAILED: federated and centralized rankings differ", file=sys.stderr)
    return EXIT_MISMATCH


def _cmd_aggregate(args: argparse.Namespace) -> int:
    vectors = _load_vectors(args.vectors)
    a, b = args.bounds
    if not a <= b:
        raise ConfigError(f"invalid bounds: {args.bounds}")
    # Vectors outside the declared bounds are exactly what range validation
    # exists to catch, so run the round under the widest envelope and
    # validate the aggregate against the declared per-user range.
    lo = min(a, min(float(v.min()) for _, v in vectors))
    hi = max(b, max(float(v.max()) for _, v in vectors))
    secrets = [secagg.FeatureVector(values=v, bounds=(lo, hi)) for _, v in vectors]
    cfg = netsim.RoundConfig(
        seed=args.seed, share_range=args.share_range, delivery=args.delivery
    )
    aggregate, transcript = netsim.run_round(secrets, cfg)
    report = secagg.validate_aggregate(aggregate, len(secrets), (a, b))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["coordinate,value"]
    lines += [f"{j},{format(x, '.17g')}" for j, x in enumerate(aggregate.values)]
    (out / "aggregate.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    netsim.write_transcript(transcript, out / "transcript.jsonl")
    print(f"aggregated {len(secrets)} vectors of dimension {len(aggregate)}")
    if not report.ok:
        print("range validation FAILED:", report.flagged, file=sys.stderr)
        return EXIT_RANGE
    return EXIT_OK


def _cmd_rank(args: argparse.Namespace) -> int:
    vectors = _load_vectors(args.likelihoods)
    try:
        vocab = corpus.load_idf_table(args.idf)
    except corpus.CorpusFormatError as exc:
        raise ConfigError(str(exc))
    if any(v.shape[0] != len(vocab) for _, v in vectors):
        raise ConfigError("likelihood vectors do not match the vocabulary size")
    total = secagg.ordered_sum([v for _, v in vectors])
    if args.agg == "mean":
        total = total / len(vectors)
    prior = bayes.compute_prior(vocab)
    ranking = bayes.posterior_scores(
        secagg.FeatureVector(values=total, bounds=(0.0, float(len(vectors)))), prior
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["keyword,score,rank"]
    for rank, j in enumerate(ranking.order, start=1):
        lines.append(f"{vocab.keywords[j]},{format(ranking.scores[j], '.17g')},{rank}")
    (out / "rankings.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("top keywords:", ", ".join(ranking.ranked_keywords()[:5]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedtrend",
        description="Privacy-preserving Bayesian trend detection experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the full federated experiment")
    _experiment_args(p_run)
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_agg = sub.add_parser("aggregate", help="secure aggregation over a vector file")
    p_agg.add_argument("--vectors", required=True, help="JSONL vector file")
    p_agg.add_argument("--share-range", type=float, default=100.0)
    p_agg.add_argument("--seed", type=int, required=True)
    p_agg.add_argument(
        "--bounds", type=float, nargs=2, default=(0.0, 1.0), metavar=("A", "B")
    )
    p_agg.add_argument(
        "--delivery", choices=("round_robin", "seeded_shuffle"), default="round_robin"
    )
    p_agg.add_argument("--out", default="out")
    p_agg.set_defaults(func=_cmd_aggregate)

    p_rank = sub.add_parser("rank", help="Bayes ranking over likelihood vectors")
    p_rank.add_argument("--likelihoods", required=True, help="JSONL vector file")
    p_rank.add_argument("--idf", default=str(data.idf_table_path()))
    p_rank.add_argument("--agg", choices=("sum", "mean"), default="sum")
    p_rank.add_argument("--out", default="out")
    p_rank.set_defaults(func=_cmd_rank)

    p_check = sub.add_parser("check", help="federated vs centralized oracle equality")
    _experiment_args(p_check)
    p_check.set_defaults(func=_cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, corpus.CorpusFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except netsim.ProtocolViolation as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
