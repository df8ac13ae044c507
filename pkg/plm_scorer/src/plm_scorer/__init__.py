"""Whole-star rating prediction for blanked review cells.

Two classifier paradigms over pretrained language models, sharing one
training and scoring surface: a fine-tuned encoder with an MLP head,
and a prompt pipeline that reads label-word scores off a masked slot
in a carrier sentence. Input and output are the recommender pipeline's
snapshot and predicted-ratings file formats.
"""

from .files import (
    PROVENANCES,
    SENTIMENT_COLUMNS,
    SNAPSHOT_COLUMNS,
    SentimentRow,
    SnapshotRow,
    read_snapshot,
    read_snapshot_file,
    write_sentiment_file,
)
from .prompting import (
    DEFAULT_TEMPLATE_TEXT,
    LABEL_WORDS,
    LABELS,
    SLOT,
    Template,
    Verbalizer,
    training_string,
)
from .scorer import (
    BACKBONES,
    NUM_LABELS,
    BackboneUnavailableError,
    FinetuneClassifier,
    LabeledExample,
    Paradigm,
    PromptPipeline,
    ScorerConfig,
    SentimentClassifier,
    build_finetune_classifier,
    build_prompt_pipeline,
    classification_scores,
    examples_from_snapshot,
    label_from_rating,
    score_dropped,
    train_and_eval,
)

__version__ = "0.1.0"

__all__ = [
    "BACKBONES",
    "BackboneUnavailableError",
    "DEFAULT_TEMPLATE_TEXT",
    "FinetuneClassifier",
    "LABELS",
    "LABEL_WORDS",
    "LabeledExample",
    "NUM_LABELS",
    "PROVENANCES",
    "Paradigm",
    "PromptPipeline",
    "SENTIMENT_COLUMNS",
    "SLOT",
    "SNAPSHOT_COLUMNS",
    "ScorerConfig",
    "SentimentClassifier",
    "SentimentRow",
    "SnapshotRow",
    "Template",
    "Verbalizer",
    "build_finetune_classifier",
    "build_prompt_pipeline",
    "classification_scores",
    "examples_from_snapshot",
    "label_from_rating",
    "read_snapshot",
    "read_snapshot_file",
    "score_dropped",
    "train_and_eval",
    "training_string",
    "write_sentiment_file",
]
