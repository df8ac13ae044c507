"""Command line front end for the language-model rating scorers.

Subcommands cover the scorer lifecycle:

  train  snapshot -> trained scorer directory, with a held-out check
  eval   scorer directory + snapshot -> accuracy and macro-F1
  score  scorer directory + snapshot -> predicted ratings for DROPPED cells

Every subcommand accepts --config pointing at a JSON object whose keys
are the subcommand's option names (underscored); explicit flags win
over config values, config values win over defaults. Exit status is 0
on success, 2 for bad input or configuration, 1 for anything else.

A scorer directory holds scorer.json (hyperparameters and, for prompt
scorers, the carrier sentence and label words), the tuned weights under
backbone/, and for fine-tune scorers the classification head in head.pt.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import torch
import transformers

from .files import read_snapshot_file, write_sentiment_file
from .prompting import Template, Verbalizer
from .scorer import (Paradigm, ScorerConfig, SentimentClassifier,
                     build_finetune_classifier, build_prompt_pipeline,
                     classification_scores, examples_from_snapshot,
                     score_dropped, train_and_eval)

log = logging.getLogger(__name__)

_SCORE_FMT = "{:.17g}"


def _save_model(model: SentimentClassifier, model_dir: Path) -> None:
    model_dir.mkdir(parents=True, exist_ok=True)
    backbone_dir = model_dir / "backbone"
    model.tokenizer.save_pretrained(backbone_dir)
    config = model.config
    meta = {
        "backbone": config.backbone,
        "paradigm": config.paradigm.value,
        "epochs": config.epochs,
        "learning_rate": config.learning_rate,
        "batch_size": config.batch_size,
        "seed": config.seed,
        "max_seq_len": config.max_seq_len,
        "scorer": config.scorer_tag,
    }
    if config.paradigm is Paradigm.PROMPT:
        model.masked_lm.save_pretrained(backbone_dir)
        meta["template"] = model.template.text
        meta["slot"] = model.template.slot
        meta["label_words"] = list(model.verbalizer.words)
    else:
        model.encoder.save_pretrained(backbone_dir)
        torch.save(model.head.state_dict(), model_dir / "head.pt")
    with open(model_dir / "scorer.json", "w", encoding="utf-8") as stream:
        json.dump(meta, stream, indent=2, sort_keys=True)
        stream.write("\n")


def _load_model(model_dir: Path) -> SentimentClassifier:
    try:
        with open(model_dir / "scorer.json", encoding="utf-8") as stream:
            meta = json.load(stream)
    except FileNotFoundError:
        raise ValueError(f"{model_dir} is not a scorer directory: no scorer.json") from None
    try:
        config = ScorerConfig(backbone=meta["backbone"], paradigm=meta["paradigm"],
                              epochs=meta["epochs"], learning_rate=meta["learning_rate"],
                              batch_size=meta["batch_size"], seed=meta["seed"],
                              max_seq_len=meta["max_seq_len"],
                              backbone_path=str(model_dir / "backbone"))
        if config.paradigm is Paradigm.PROMPT:
            template = Template(meta["template"], meta["slot"])
            verbalizer = Verbalizer(tuple(meta["label_words"]))
            return build_prompt_pipeline(config, template, verbalizer)
        model = build_finetune_classifier(config)
        state = torch.load(model_dir / "head.pt", weights_only=True)
        model.head.load_state_dict(state)
        return model
    except KeyError as exc:
        raise ValueError(f"{model_dir}/scorer.json is missing key {exc}") from None


def _build_model(args: argparse.Namespace) -> SentimentClassifier:
    config = ScorerConfig(backbone=args.backbone, paradigm=args.paradigm,
                          epochs=args.epochs, learning_rate=args.learning_rate,
                          batch_size=args.batch_size, seed=args.seed,
                          max_seq_len=args.max_seq_len, backbone_path=args.backbone_path)
    if config.paradigm is Paradigm.PROMPT:
        template = Template(args.template) if args.template else Template()
        return build_prompt_pipeline(config, template, Verbalizer())
    return build_finetune_classifier(config)


def _cmd_train(args: argparse.Namespace) -> int:
    rows = read_snapshot_file(args.snapshot)
    train_set = examples_from_snapshot(rows)
    if args.eval_snapshot:
        eval_set = examples_from_snapshot(read_snapshot_file(args.eval_snapshot))
    else:
        eval_set = train_set
    model = _build_model(args)
    accuracy, macro_f1 = train_and_eval(model, train_set, eval_set)
    _save_model(model, Path(args.model_dir))
    print(f"{model.scorer_tag}: trained on {len(train_set)} examples, "
          f"accuracy {accuracy:.4f}, macro-F1 {macro_f1:.4f}")
    print(f"scorer written to {args.model_dir}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    eval_set = examples_from_snapshot(read_snapshot_file(args.snapshot))
    model = _load_model(Path(args.model_dir))
    predicted = model.predict([example.text for example in eval_set])
    accuracy, macro_f1 = classification_scores(
        [example.label for example in eval_set], predicted)
    print(f"{model.scorer_tag}: {len(eval_set)} examples, "
          f"accuracy {accuracy:.4f}, macro-F1 {macro_f1:.4f}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as stream:
            stream.write("accuracy\tmacro_f1\n")
            stream.write(_SCORE_FMT.format(accuracy) + "\t"
                         + _SCORE_FMT.format(macro_f1) + "\n")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    rows = read_snapshot_file(args.snapshot)
    model = _load_model(Path(args.model_dir))
    predicted = score_dropped(model, rows)
    with open(args.output, "w", encoding="utf-8") as stream:
        write_sentiment_file(predicted, stream)
    print(f"{len(predicted)} predicted ratings ({model.scorer_tag}) -> {args.output}")
    return 0


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults for this subcommand")
    common.add_argument("--verbose", action="store_true", help="log progress at INFO level")

    parser = argparse.ArgumentParser(
        prog="plm-scorer",
        description="Predict whole-star ratings for blanked review cells with a "
                    "fine-tuned or prompt-based language model.")
    subcommands = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    sub = subcommands.add_parser("train", parents=[common],
                                 help="train a scorer on a snapshot's rated cells")
    sub.add_argument("--snapshot", required=True, help="training snapshot")
    sub.add_argument("--model-dir", required=True, help="output scorer directory")
    sub.add_argument("--eval-snapshot",
                     help="snapshot for the post-training check; defaults to the training one")
    sub.add_argument("--backbone", choices=("BERT-base", "RoBERTa-base"), default="BERT-base")
    sub.add_argument("--paradigm", choices=("finetune", "prompt"), default="finetune")
    sub.add_argument("--epochs", type=int, default=3)
    sub.add_argument("--learning-rate", type=float, default=2e-5)
    sub.add_argument("--batch-size", type=int, default=32)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--max-seq-len", type=int, default=128)
    sub.add_argument("--backbone-path",
                     help="local weights directory overriding the published checkpoint")
    sub.add_argument("--template", default=None,
                     help="carrier sentence with one [x] slot, prompt paradigm only")
    sub.set_defaults(func=_cmd_train)
    registry["train"] = sub

    sub = subcommands.add_parser("eval", parents=[common],
                                 help="score a saved scorer against a snapshot's rated cells")
    sub.add_argument("--snapshot", required=True)
    sub.add_argument("--model-dir", required=True, help="saved scorer directory")
    sub.add_argument("--output", help="optional tab-delimited metrics row")
    sub.set_defaults(func=_cmd_eval)
    registry["eval"] = sub

    sub = subcommands.add_parser("score", parents=[common],
                                 help="predict ratings for a snapshot's DROPPED cells")
    sub.add_argument("--snapshot", required=True, help="snapshot with DROPPED cells")
    sub.add_argument("--model-dir", required=True, help="saved scorer directory")
    sub.add_argument("--output", required=True, help="predicted ratings file")
    sub.set_defaults(func=_cmd_score)
    registry["score"] = sub

    return parser, registry


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = _build_parser()
    args = parser.parse_args(argv)
    transformers.logging.set_verbosity_error()
    transformers.logging.disable_progress_bar()
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
