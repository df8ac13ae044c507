"""Rating classifiers over review text built on pretrained language models.

Two paradigms share one surface: a batch of texts in, five label logits
out. The fine-tune classifier adds a small MLP head over the encoder's
pooled final hidden state and learns everything end to end. The prompt
pipeline keeps the pretrained masked-language-model head instead: each
review is paired with the carrier sentence rendered at the mask token,
and label k's logit is the masked position's logit for label word k.
Training, evaluation, and dropped-cell scoring then work on either.

How review text meets the carrier sentence is an interpretation choice:
the two are encoded as a sentence pair, review first, carrier second,
which concatenates them around the tokenizer's separator. Long reviews
truncate from their own side only, so the mask always survives.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import torch
from sklearn.metrics import accuracy_score, f1_score
from torch import nn
from transformers import AutoModel, AutoModelForMaskedLM, AutoTokenizer

from .files import SentimentRow, SnapshotRow
from .prompting import LABELS, Template, Verbalizer

log = logging.getLogger(__name__)

BACKBONES = {
    "BERT-base": "bert-base-uncased",
    "RoBERTa-base": "roberta-base",
}
_TAG_STEMS = {"BERT-base": "BERT", "RoBERTa-base": "ROBERTA"}
NUM_LABELS = len(LABELS)


class Paradigm(enum.Enum):
    FINETUNE = "FINETUNE"
    PROMPT = "PROMPT"


class BackboneUnavailableError(OSError):
    """Pretrained weights could not be loaded: no cache, no network, bad path."""


class LabeledExample(NamedTuple):
    text: str
    label: int


@dataclass(frozen=True)
class ScorerConfig:
    """Hyperparameters of one scorer; backbone and paradigm fix its tag.

    ``backbone_path`` points weight loading at a local directory instead
    of the published checkpoint, for offline runs and tests; the tag
    still reflects the named backbone.
    """

    backbone: str = "BERT-base"
    paradigm: Paradigm = Paradigm.FINETUNE
    epochs: int = 3
    learning_rate: float = 2e-5
    batch_size: int = 32
    seed: int = 0
    max_seq_len: int = 128
    backbone_path: str | None = None

    def __post_init__(self) -> None:
        if self.backbone not in BACKBONES:
            raise ValueError(f"unknown backbone {self.backbone!r}, "
                             f"expected one of {sorted(BACKBONES)}")
        if isinstance(self.paradigm, str):
            try:
                object.__setattr__(self, "paradigm", Paradigm[self.paradigm.upper()])
            except KeyError:
                raise ValueError(f"unknown paradigm {self.paradigm!r}") from None
        if self.epochs < 1:
            raise ValueError(f"epochs {self.epochs} must be at least 1")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate {self.learning_rate} must be positive")
        if self.batch_size < 1:
            raise ValueError(f"batch_size {self.batch_size} must be at least 1")
        if self.max_seq_len < 1:
            raise ValueError(f"max_seq_len {self.max_seq_len} must be at least 1")

    @property
    def weights_source(self) -> str:
        return self.backbone_path or BACKBONES[self.backbone]

    @property
    def scorer_tag(self) -> str:
        stem = _TAG_STEMS[self.backbone]
        if self.paradigm is Paradigm.PROMPT:
            return f"SENT-PROMPT-{stem}"
        return f"SENT-{stem}"


def _load_backbone(config: ScorerConfig, auto_cls):
    source = config.weights_source
    try:
        tokenizer = AutoTokenizer.from_pretrained(source)
        model = auto_cls.from_pretrained(source)
    except (OSError, ValueError) as exc:
        raise BackboneUnavailableError(
            f"weights for backbone {config.backbone} not available "
            f"from {source!r}: {exc}") from exc
    return tokenizer, model


class SentimentClassifier(nn.Module):
    """Common surface of both paradigms; forward maps texts to logits."""

    def __init__(self, config: ScorerConfig, tokenizer) -> None:
        super().__init__()
        self.config = config
        self.tokenizer = tokenizer

    @property
    def scorer_tag(self) -> str:
        return self.config.scorer_tag

    def forward(self, texts: Sequence[str]) -> torch.Tensor:
        raise NotImplementedError

    def predict_proba(self, texts: Sequence[str]) -> np.ndarray:
        """Label distribution per text, shape (len(texts), 5), rows sum to 1."""
        self.eval()
        chunks = []
        with torch.no_grad():
            for start in range(0, len(texts), self.config.batch_size):
                logits = self(list(texts[start:start + self.config.batch_size]))
                chunks.append(torch.softmax(logits, dim=1).numpy())
        if not chunks:
            return np.zeros((0, NUM_LABELS))
        return np.concatenate(chunks, axis=0)

    def predict(self, texts: Sequence[str]) -> list[int]:
        """Most probable star rating per text, each in 1..5."""
        return [int(k) + 1 for k in self.predict_proba(texts).argmax(axis=1)]


class FinetuneClassifier(SentimentClassifier):
    """Encoder plus an MLP head over the pooled final hidden state.

    Pooling takes the first-position vector of the final hidden layer.
    The head is Linear -> Tanh -> Linear down to the five labels.
    """

    def __init__(self, config: ScorerConfig, tokenizer, encoder) -> None:
        super().__init__(config, tokenizer)
        self.encoder = encoder
        width = encoder.config.hidden_size
        self.head = nn.Sequential(
            nn.Linear(width, width),
            nn.Tanh(),
            nn.Linear(width, NUM_LABELS),
        )

    def forward(self, texts: Sequence[str]) -> torch.Tensor:
        encoded = self.tokenizer(list(texts), padding=True, truncation=True,
                                 max_length=self.config.max_seq_len, return_tensors="pt")
        pooled = self.encoder(**encoded).last_hidden_state[:, 0]
        return self.head(pooled)


class PromptPipeline(SentimentClassifier):
    """Masked-language-model readout through the carrier sentence."""

    def __init__(self, config: ScorerConfig, tokenizer, masked_lm,
                 template: Template, verbalizer: Verbalizer,
                 label_token_ids: torch.Tensor) -> None:
        super().__init__(config, tokenizer)
        self.masked_lm = masked_lm
        self.template = template
        self.verbalizer = verbalizer
        self.register_buffer("label_token_ids", label_token_ids)

    def forward(self, texts: Sequence[str]) -> torch.Tensor:
        carrier = self.template.render(self.tokenizer.mask_token)
        encoded = self.tokenizer(list(texts), [carrier] * len(texts), padding=True,
                                 truncation="only_first", max_length=self.config.max_seq_len,
                                 return_tensors="pt")
        rows, columns = (encoded["input_ids"] == self.tokenizer.mask_token_id).nonzero(as_tuple=True)
        if len(rows) != len(texts) or not torch.equal(rows, torch.arange(len(texts))):
            raise ValueError("each input must encode to exactly one mask position; "
                             "check max_seq_len and review text for literal mask tokens")
        logits = self.masked_lm(**encoded).logits
        at_mask = logits[torch.arange(len(texts)), columns]
        return at_mask[:, self.label_token_ids]


def build_finetune_classifier(config: ScorerConfig) -> FinetuneClassifier:
    """Load the backbone and attach a freshly initialized, seeded head."""
    if config.paradigm is not Paradigm.FINETUNE:
        raise ValueError(f"config paradigm is {config.paradigm.value}, expected FINETUNE")
    tokenizer, encoder = _load_backbone(config, AutoModel)
    # Seed after loading so head initialization is reproducible.
    torch.manual_seed(config.seed)
    return FinetuneClassifier(config, tokenizer, encoder)


def build_prompt_pipeline(config: ScorerConfig, template: Template,
                          verbalizer: Verbalizer) -> PromptPipeline:
    """Load the masked LM and bind it to the carrier sentence and label words.

    Every label word must be a single real token of the backbone's
    vocabulary, otherwise no one masked position can score it.
    """
    if config.paradigm is not Paradigm.PROMPT:
        raise ValueError(f"config paradigm is {config.paradigm.value}, expected PROMPT")
    tokenizer, masked_lm = _load_backbone(config, AutoModelForMaskedLM)
    if tokenizer.mask_token_id is None:
        raise ValueError(f"backbone {config.backbone} tokenizer has no mask token")
    token_ids = []
    for word in verbalizer.words:
        ids = tokenizer.encode(word, add_special_tokens=False)
        if len(ids) != 1 or ids[0] == tokenizer.unk_token_id:
            raise ValueError(f"verbalizer word {word!r} is not a single token "
                             f"in the {config.backbone} vocabulary")
        token_ids.append(ids[0])
    torch.manual_seed(config.seed)
    return PromptPipeline(config, tokenizer, masked_lm, template, verbalizer,
                          torch.tensor(token_ids))


def classification_scores(truth: Sequence[int], predicted: Sequence[int]) -> tuple[float, float]:
    """Accuracy and macro-F1 over the five-label space.

    Macro-F1 averages per-class F1 across all five labels whether or not
    a label occurs, absent labels contributing zero.
    """
    if len(truth) != len(predicted):
        raise ValueError(f"{len(truth)} labels against {len(predicted)} predictions")
    if not truth:
        raise ValueError("nothing to score")
    for label in (*truth, *predicted):
        if label not in LABELS:
            raise ValueError(f"label {label} outside 1-5")
    accuracy = accuracy_score(truth, predicted)
    macro_f1 = f1_score(truth, predicted, labels=list(LABELS), average="macro", zero_division=0)
    return float(accuracy), float(macro_f1)


def train_and_eval(model: SentimentClassifier, train_set: Sequence[LabeledExample],
                   eval_set: Sequence[LabeledExample]) -> tuple[float, float]:
    """Fit the model on labeled texts, then score it on others.

    All weights train; optimization is seeded AdamW on cross-entropy
    over shuffled minibatches for config.epochs passes. Returns
    (accuracy, macro-F1) on the eval set.
    """
    train_set = list(train_set)
    eval_set = list(eval_set)
    for name, examples in (("train", train_set), ("eval", eval_set)):
        if not examples:
            raise ValueError(f"{name} set is empty")
        for example in examples:
            if example.label not in LABELS:
                raise ValueError(f"{name} example label {example.label} outside 1-5")
    config = model.config
    torch.manual_seed(config.seed)
    rng = np.random.default_rng(config.seed)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    order = np.arange(len(train_set))
    model.train()
    for epoch in range(config.epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [train_set[i] for i in order[start:start + config.batch_size]]
            logits = model([example.text for example in batch])
            target = torch.tensor([example.label - 1 for example in batch], dtype=torch.long)
            loss = loss_fn(logits, target)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(batch)
        log.info("epoch %d/%d mean loss %.4f", epoch + 1, config.epochs,
                 epoch_loss / len(order))
    predicted = model.predict([example.text for example in eval_set])
    return classification_scores([example.label for example in eval_set], predicted)


def label_from_rating(rating: float) -> int:
    """Nearest whole star for a snapshot rating; halves round up."""
    if not 1.0 <= rating <= 5.0:
        raise ValueError(f"rating {rating} outside [1, 5]")
    return int(math.floor(rating + 0.5))


def examples_from_snapshot(rows: Sequence[SnapshotRow]) -> list[LabeledExample]:
    """Labeled examples from the cells that still carry a rating."""
    examples = [LabeledExample(row.review_headline, label_from_rating(row.rating))
                for row in rows if row.rating is not None]
    if not examples:
        raise ValueError("snapshot has no rated cells")
    return examples


def score_dropped(model: SentimentClassifier,
                  rows: Sequence[SnapshotRow]) -> list[SentimentRow]:
    """Predict one whole-star rating for every DROPPED cell.

    Rows come back sorted by (customer, product) under the model's
    scorer tag, ready to write as a predicted-ratings file.
    """
    dropped = sorted((row for row in rows if row.rating is None),
                     key=lambda row: (row.customer_id, row.product_id))
    if not dropped:
        log.warning("snapshot has no DROPPED cells, nothing to score")
        return []
    labels = model.predict([row.review_headline for row in dropped])
    return [SentimentRow(row.customer_id, row.product_id, float(label), model.scorer_tag)
            for row, label in zip(dropped, labels)]
