"""Command line front end for the rating-sparsity pipeline.

Subcommands mirror the pipeline stages:

  prepare   reviews table -> full/train/validation/sparse snapshots
  score     snapshot -> predicted ratings for its dropped cells
  impute    sparse snapshot + predicted ratings -> filled snapshot
  train     snapshot -> factor model directory
  evaluate  model + train/validation snapshots -> scores row
  report    scores rows -> comparison table

Every subcommand accepts --config pointing at a JSON object whose keys
are the subcommand's option names (underscored); explicit flags win
over config values, config values win over defaults. Exit status is 0
on success, 2 for bad input or configuration, 1 for anything else.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import als, dataset, ingest, lexsent, metrics

log = logging.getLogger(__name__)

REPORT_COLUMNS = ("dataset", "k", "num_users", "map", "ndcg", "precision",
                  "avg_improvement_pct")
_SCORE_FMT = "{:.17g}"


def _read_snapshot_file(path: str | Path, name: str | None = None) -> dataset.RatingsDataset:
    if name is None:
        name = Path(path).stem.upper()
    with open(path, encoding="utf-8") as stream:
        return dataset.read_snapshot(stream, name)


def _write_snapshot_file(data: dataset.RatingsDataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as stream:
        dataset.write_snapshot(data, stream)


def _dataset_digest(data: dataset.RatingsDataset) -> str:
    """Fingerprint of the rated content a model was trained on.

    Covers the usable (user, item, rating) triples under their external
    ids, so two snapshots that differ only in imputed values hash apart.
    """
    digest = hashlib.sha256()
    for (u, i), cell in data.sorted_cells():
        if cell.usable:
            line = f"{data.users.lookup(u)}\t{data.items.lookup(i)}\t{cell.rating:.17g}\n"
            digest.update(line.encode("utf-8"))
    return digest.hexdigest()


def evaluate_model(model: als.AlsModel, train_data: dataset.RatingsDataset,
                   validation: dataset.RatingsDataset, k: int,
                   threshold: float = 4.0) -> metrics.RankingScores:
    """Score the model's top-k lists against held-out relevant items.

    Relevant means a validation rating at or above `threshold`. The two
    datasets carry independent id tables, so everything is joined on
    external ids here.
    """
    ranked = als.recommend_all(model, train_data, k)
    recommended = {train_data.users.lookup(u): [train_data.items.lookup(i) for i in items]
                   for u, items in ranked.items()}
    relevant: dict[str, set[str]] = {}
    for (u, i), cell in validation.cells.items():
        if cell.usable and cell.rating >= threshold:
            relevant.setdefault(validation.users.lookup(u), set()).add(
                validation.items.lookup(i))
    return metrics.score_rankings(recommended, relevant, k)


def _cmd_prepare(args: argparse.Namespace) -> int:
    with open(args.input, encoding="utf-8") as stream:
        parsed = ingest.parse_reviews(stream, strict=args.strict)
    if parsed.rejects:
        ingest.report_rejects(parsed.rejects, sys.stderr)
    full = ingest.intern(parsed.records, name=args.name)
    spec = dataset.SplitSpec(args.drop_fraction, args.validation_fraction, args.seed)
    train_data, validation = dataset.split(full, spec)
    sparse = dataset.sparsify(train_data, spec.drop_fraction, spec.seed)

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for filename, data in (("full.tsv", full), ("train.tsv", train_data),
                           ("validation.tsv", validation), ("sparse.tsv", sparse)):
        _write_snapshot_file(data, out / filename)
    dropped = sparse.provenance_counts()[dataset.Provenance.DROPPED]
    print(f"prepared {out}: {len(full.cells)} cells, {full.num_users} users, "
          f"{full.num_items} items, {len(validation.cells)} held out, {dropped} dropped")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    data = _read_snapshot_file(args.input)
    if bool(args.positive_terms) != bool(args.negative_terms):
        raise ValueError("--positive-terms and --negative-terms go together")
    if args.positive_terms:
        lexicon = lexsent.Lexicon.from_files(args.positive_terms, args.negative_terms)
    else:
        lexicon = lexsent.DEFAULT_LEXICON
    rows = lexsent.score_dataset(data, lexicon, scorer=args.scorer)
    with open(args.output, "w", encoding="utf-8") as stream:
        lexsent.write_sentiment_file(rows, stream)
    print(f"scored {len(rows)} dropped cells from {data.name} -> {args.output}")
    return 0


def _cmd_impute(args: argparse.Namespace) -> int:
    sparse = _read_snapshot_file(args.input)
    with open(args.sentiments, encoding="utf-8") as stream:
        rows = lexsent.read_sentiment_file(stream)
    policy = dataset.ImputePolicy[args.policy.upper()]
    filled = dataset.impute(sparse, rows, policy)
    _write_snapshot_file(filled, args.output)
    print(f"imputed {len(rows)} ratings -> {args.output} ({filled.name})")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    data = _read_snapshot_file(args.input)
    config = als.AlsConfig(rank=args.rank, regularization=args.regularization,
                           iterations=args.iterations, init_scale=args.init_scale,
                           seed=args.seed)
    model = als.train(data, config)
    out = Path(args.model_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.save(out / "user_factors.npy", model.user_factors)
    np.save(out / "item_factors.npy", model.item_factors)
    (out / "user_ids.txt").write_text("\n".join(data.users.ids) + "\n", encoding="utf-8")
    (out / "item_ids.txt").write_text("\n".join(data.items.ids) + "\n", encoding="utf-8")
    (out / "trace.txt").write_text(
        "\n".join(_SCORE_FMT.format(v) for v in model.objective_trace) + "\n",
        encoding="utf-8")
    (out / "data_digest.txt").write_text(_dataset_digest(data) + "\n", encoding="utf-8")
    print(f"trained rank-{config.rank} model on {data.name} -> {out} "
          f"(objective {model.objective_trace[-1]:.6g})")
    return 0


def _load_model(model_dir: str | Path) -> tuple[als.AlsModel, list[str], list[str], str]:
    path = Path(model_dir)
    try:
        user_factors = np.load(path / "user_factors.npy")
        item_factors = np.load(path / "item_factors.npy")
        user_ids = (path / "user_ids.txt").read_text(encoding="utf-8").splitlines()
        item_ids = (path / "item_ids.txt").read_text(encoding="utf-8").splitlines()
        trace = tuple(float(v) for v in
                      (path / "trace.txt").read_text(encoding="utf-8").split())
        digest = (path / "data_digest.txt").read_text(encoding="utf-8").strip()
    except FileNotFoundError as exc:
        raise ValueError(f"{path} is not a model directory: {exc}") from None
    return als.AlsModel(user_factors, item_factors, trace), user_ids, item_ids, digest


def _cmd_evaluate(args: argparse.Namespace) -> int:
    train_data = _read_snapshot_file(args.train, name=args.name)
    validation = _read_snapshot_file(args.validation)
    model, user_ids, item_ids, digest = _load_model(args.model_dir)
    if (user_ids != train_data.users.ids or item_ids != train_data.items.ids
            or digest != _dataset_digest(train_data)):
        raise ValueError(f"model {args.model_dir} was not trained on {args.train}")
    scores = evaluate_model(model, train_data, validation, args.k, args.threshold)
    with open(args.output, "w", encoding="utf-8") as stream:
        metrics.write_scores([(train_data.name, args.k, scores)], stream)
    print(f"{train_data.name}: MAP {scores.map_score:.4f}, NDCG@{args.k} {scores.ndcg:.4f}, "
          f"P@{args.k} {scores.precision:.4f} over {scores.num_users} users")
    return 0


def _render_report(ordered: list[tuple[str, int, metrics.RankingScores]],
                   improvements: dict[str, float], k: int) -> str:
    headers = ["Dataset", "MAP", f"NDCG@{k}", f"P@{k}", "Avg.Imp%"]
    best = {
        1: max(r[2].map_score for r in ordered),
        2: max(r[2].ndcg for r in ordered),
        3: max(r[2].precision for r in ordered),
    }
    best_imp = max(improvements.values()) if improvements else None

    table = [headers]
    for name, _, scores in ordered:
        cells = [name]
        for col, value in ((1, scores.map_score), (2, scores.ndcg), (3, scores.precision)):
            mark = "*" if value == best[col] else ""
            cells.append(f"{value:.4f}{mark}")
        if name in improvements:
            imp = improvements[name]
            mark = "*" if imp == best_imp else ""
            cells.append(f"{imp:+.2f}%{mark}")
        else:
            cells.append("-")
        table.append(cells)

    widths = [max(len(row[col]) for row in table) for col in range(len(headers))]
    lines = []
    for row_number, row in enumerate(table):
        cells = [row[0].ljust(widths[0])]
        cells += [row[col].rjust(widths[col]) for col in range(1, len(headers))]
        lines.append("  ".join(cells).rstrip())
        if row_number == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _cmd_report(args: argparse.Namespace) -> int:
    rows: list[tuple[str, int, metrics.RankingScores]] = []
    for path in args.scores:
        with open(path, encoding="utf-8") as stream:
            rows.extend(metrics.read_scores(stream))
    names = [name for name, _, _ in rows]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate dataset names across inputs: {sorted(names)}")
    ks = {k for _, k, _ in rows}
    if len(ks) > 1:
        raise ValueError(f"inputs evaluated at different k values: {sorted(ks)}")
    if args.baseline not in names:
        raise ValueError(f"baseline {args.baseline!r} not among inputs {sorted(names)}")

    k = next(iter(ks))
    by_name = {name: (name, row_k, scores) for name, row_k, scores in rows}
    base_scores = by_name[args.baseline][2]
    improvements = {name: metrics.avg_improvement(base_scores, scores)
                    for name, _, scores in rows if name != args.baseline}
    ordered = sorted((row for row in rows if row[0] != args.baseline),
                     key=lambda row: (-improvements[row[0]], row[0]))
    ordered.append(by_name[args.baseline])

    sys.stdout.write(_render_report(ordered, improvements, k))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as stream:
            writer = csv.writer(stream, delimiter="\t", lineterminator="\n")
            writer.writerow(REPORT_COLUMNS)
            for name, row_k, scores in ordered:
                imp = (_SCORE_FMT.format(improvements[name])
                       if name in improvements else "")
                writer.writerow([name, row_k, scores.num_users,
                                 _SCORE_FMT.format(scores.map_score),
                                 _SCORE_FMT.format(scores.ndcg),
                                 _SCORE_FMT.format(scores.precision), imp])
    return 0


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults for this subcommand")
    common.add_argument("--verbose", action="store_true", help="log progress at INFO level")

    parser = argparse.ArgumentParser(
        prog="sentrec",
        description="Rating-sparsity experiments: drop ratings, refill them from "
                    "review sentiment, factorize, and compare ranking quality.")
    subcommands = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    sub = subcommands.add_parser("prepare", parents=[common],
                                 help="split a reviews table and blank out ratings")
    sub.add_argument("--input", required=True, help="delimited reviews table")
    sub.add_argument("--output-dir", required=True)
    sub.add_argument("--name", default="FULL", help="dataset label for the full table")
    sub.add_argument("--drop-fraction", type=float, default=0.4)
    sub.add_argument("--validation-fraction", type=float, default=0.2)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--strict", action="store_true",
                     help="fail on the first malformed row instead of skipping")
    sub.set_defaults(func=_cmd_prepare)
    registry["prepare"] = sub

    sub = subcommands.add_parser("score", parents=[common],
                                 help="predict ratings for dropped cells from review text")
    sub.add_argument("--input", required=True, help="snapshot with DROPPED cells")
    sub.add_argument("--output", required=True, help="predicted ratings file")
    sub.add_argument("--scorer", default="LEX", help="tag recorded on every row")
    sub.add_argument("--positive-terms", help="one positive term per line")
    sub.add_argument("--negative-terms", help="one negative term per line")
    sub.set_defaults(func=_cmd_score)
    registry["score"] = sub

    sub = subcommands.add_parser("impute", parents=[common],
                                 help="fill dropped cells from a predicted ratings file")
    sub.add_argument("--input", required=True, help="sparse snapshot")
    sub.add_argument("--sentiments", required=True, help="predicted ratings file")
    sub.add_argument("--output", required=True, help="filled snapshot")
    sub.add_argument("--policy", choices=("strict", "lenient"), default="strict")
    sub.set_defaults(func=_cmd_impute)
    registry["impute"] = sub

    sub = subcommands.add_parser("train", parents=[common],
                                 help="factorize a snapshot's rated cells")
    sub.add_argument("--input", required=True, help="training snapshot")
    sub.add_argument("--model-dir", required=True)
    sub.add_argument("--rank", type=int, default=10)
    sub.add_argument("--regularization", type=float, default=0.1)
    sub.add_argument("--iterations", type=int, default=15)
    sub.add_argument("--init-scale", type=float, default=0.1)
    sub.add_argument("--seed", type=int, default=0)
    sub.set_defaults(func=_cmd_train)
    registry["train"] = sub

    sub = subcommands.add_parser("evaluate", parents=[common],
                                 help="score a model's rankings against held-out ratings")
    sub.add_argument("--model-dir", required=True)
    sub.add_argument("--train", required=True, help="snapshot the model was trained on")
    sub.add_argument("--validation", required=True, help="held-out snapshot")
    sub.add_argument("--output", required=True, help="scores row file")
    sub.add_argument("--name", help="row label, default train snapshot stem uppercased")
    sub.add_argument("--k", type=int, default=30)
    sub.add_argument("--threshold", type=float, default=4.0,
                     help="validation rating at or above this counts as relevant")
    sub.set_defaults(func=_cmd_evaluate)
    registry["evaluate"] = sub

    sub = subcommands.add_parser("report", parents=[common],
                                 help="merge scores rows into a comparison table")
    sub.add_argument("scores", nargs="+", help="scores row files")
    sub.add_argument("--baseline", default="SPARSE",
                     help="row improvements are computed against")
    sub.add_argument("--output", help="also write the table as delimited text")
    sub.set_defaults(func=_cmd_report)
    registry["report"] = sub

    return parser, registry


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as stream:
                overrides = json.load(stream)
            if not isinstance(overrides, dict):
                raise ValueError(f"{args.config} must hold a JSON object")
            reserved = {"config", "func", "command"}
            unknown = sorted((set(overrides) - set(vars(args))) | (set(overrides) & reserved))
            if unknown:
                raise ValueError(f"unknown config keys for {args.command}: {unknown}")
            registry[args.command].set_defaults(**overrides)
            args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        log.exception("internal error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
