"""Occurrence-counting sentiment scorer and the predicted-ratings file format.

This is the zero-dependency scorer: it counts positive and negative term
occurrences in a review and maps the hit ratio linearly onto the 1-5
rating scale, neutral midpoint 3. It exists so the whole pipeline runs
without any trained model, and it defines the tab-delimited exchange
format that heavier scorers must also emit.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO

from .dataset import Provenance, RatingsDataset

log = logging.getLogger(__name__)

SENTIMENT_COLUMNS = ("customer_id", "product_id", "rating", "scorer")
_RATING_FMT = "{:.4f}"

# Alphanumeric runs, unicode-aware, underscore excluded.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_DEFAULT_POSITIVE = (
    "amazing", "awesome", "beautiful", "best", "brilliant", "captivating",
    "charming", "classic", "compelling", "delightful", "enjoyable", "engaging",
    "entertaining", "excellent", "exceptional", "fantastic", "favorite", "fun",
    "funny", "good", "gorgeous", "great", "gripping", "hilarious", "impressive",
    "incredible", "inspiring", "love", "loved", "lovely", "magnificent",
    "marvelous", "masterpiece", "memorable", "moving", "outstanding", "perfect",
    "phenomenal", "powerful", "recommend", "refreshing", "remarkable",
    "satisfying", "stunning", "superb", "terrific", "thrilling", "touching",
    "wonderful", "worthwhile",
)

_DEFAULT_NEGATIVE = (
    "annoying", "atrocious", "awful", "bad", "bland", "boring", "cheap",
    "confusing", "crap", "disappointing", "disappointment", "disaster", "dreadful",
    "dull", "flat", "forgettable", "garbage", "horrendous", "horrible", "hate",
    "hated", "lame", "laughable", "lousy", "mediocre", "mess", "miserable",
    "overrated", "painful", "pathetic", "pointless", "poor", "predictable",
    "ridiculous", "sloppy", "slow", "stupid", "tedious", "terrible", "trash",
    "unbearable", "unconvincing", "unfunny", "uninspired", "unwatchable",
    "waste", "weak", "worst", "worthless",
)


@dataclass(frozen=True)
class Lexicon:
    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self) -> None:
        overlap = self.positive & self.negative
        if overlap:
            raise ValueError(f"terms in both polarities: {sorted(overlap)}")

    @classmethod
    def from_files(cls, positive_path: str | Path, negative_path: str | Path) -> "Lexicon":
        """Load from plain-text files, one lowercase term per line."""
        def load(path):
            terms = Path(path).read_text(encoding="utf-8").split("\n")
            return frozenset(t.strip().lower() for t in terms if t.strip())
        return cls(load(positive_path), load(negative_path))


DEFAULT_LEXICON = Lexicon(frozenset(_DEFAULT_POSITIVE), frozenset(_DEFAULT_NEGATIVE))


@dataclass(frozen=True)
class SentimentRow:
    """One predicted rating for a (customer, product) pair."""

    customer_id: str
    product_id: str
    rating: float
    scorer: str


def score_text(text: str, lexicon: Lexicon = DEFAULT_LEXICON) -> float:
    """Rating in [1, 5] from term occurrences.

    With p positive and q negative hits the score is 3 + 2(p - q)/(p + q);
    no hits at all gives the neutral 3. Tokenization lowercases and splits
    on non-alphanumeric boundaries.
    """
    p = q = 0
    for token in _TOKEN_RE.findall(text.lower()):
        if token in lexicon.positive:
            p += 1
        elif token in lexicon.negative:
            q += 1
    if p + q == 0:
        return 3.0
    return 3.0 + 2.0 * (p - q) / (p + q)


def score_dataset(data: RatingsDataset, lexicon: Lexicon = DEFAULT_LEXICON,
                  scorer: str = "LEX") -> list[SentimentRow]:
    """Score every DROPPED cell's review text, one row per cell.

    Cells that still have a rating are never scored. Rows come out in
    canonical (user index, item index) order.
    """
    rows = []
    for (u, i), cell in data.sorted_cells():
        if cell.provenance is Provenance.DROPPED:
            rows.append(SentimentRow(data.users.lookup(u), data.items.lookup(i),
                                     score_text(cell.review_text, lexicon), scorer))
    if not rows:
        log.warning("dataset %s has no DROPPED cells, emitting empty sentiment output",
                    data.name)
    return rows


def write_sentiment_file(rows: list[SentimentRow], stream: IO[str]) -> None:
    """Write rows tab-delimited with fixed-precision ratings.

    This file is the only boundary between scorers and the recommender
    pipeline, so writing the same rows always produces identical bytes.
    """
    writer = csv.writer(stream, delimiter="\t", lineterminator="\n")
    writer.writerow(SENTIMENT_COLUMNS)
    for row in rows:
        writer.writerow([row.customer_id, row.product_id,
                         _RATING_FMT.format(row.rating), row.scorer])


def read_sentiment_file(stream: IO[str]) -> list[SentimentRow]:
    reader = csv.reader(stream, delimiter="\t")
    header = next(reader, None)
    if header is None or tuple(header) != SENTIMENT_COLUMNS:
        raise ValueError(f"not a sentiment ratings file, header {header!r}")
    rows = []
    seen: set[tuple[str, str]] = set()
    for line_number, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(SENTIMENT_COLUMNS):
            raise ValueError(f"line {line_number}: expected {len(SENTIMENT_COLUMNS)} fields")
        customer, product, raw_rating, scorer = fields
        rating = float(raw_rating)
        if not 1.0 <= rating <= 5.0:
            raise ValueError(f"line {line_number}: rating {rating} outside [1, 5]")
        if (customer, product) in seen:
            raise ValueError(f"line {line_number}: duplicate pair ({customer}, {product})")
        seen.add((customer, product))
        rows.append(SentimentRow(customer, product, rating, scorer))
    return rows
