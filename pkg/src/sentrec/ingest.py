"""Review-table parsing, ID interning, and synthetic dataset generation.

Real datasets arrive as delimited text (tab-separated by default) with a
header row naming four columns: customer id, product id, star rating, and
review headline. Everything downstream works on dense integer indices, so
parsing is followed by interning the opaque string IDs.

``synth_lowrank`` generates small deterministic datasets with known
low-rank structure for experiments and verification.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

from .dataset import Cell, Provenance, RatingsDataset

log = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("customer_id", "product_id", "star_rating", "review_headline")


class SchemaError(ValueError):
    """The input table is missing a configured column."""


class StrictParseError(ValueError):
    """A row failed validation while strict parsing was requested."""


@dataclass(frozen=True)
class ReviewRecord:
    customer_id: str
    product_id: str
    star_rating: int
    review_headline: str


@dataclass(frozen=True)
class TableSchema:
    """Column names and delimiter of the input table."""

    customer_id: str = "customer_id"
    product_id: str = "product_id"
    star_rating: str = "star_rating"
    review_headline: str = "review_headline"
    delimiter: str = "\t"

    def columns(self) -> tuple[str, str, str, str]:
        return (self.customer_id, self.product_id, self.star_rating, self.review_headline)


@dataclass(frozen=True)
class RejectedRow:
    line_number: int
    reason: str


@dataclass
class ParseResult:
    records: list[ReviewRecord]
    rejects: list[RejectedRow] = field(default_factory=list)


class IdInterner:
    """Bijective map between opaque string IDs and dense indices.

    Indices are assigned contiguously from 0 in first-seen order.
    """

    def __init__(self, ids: Iterable[str] = ()) -> None:
        self._forward: dict[str, int] = {}
        self._reverse: list[str] = []
        for external in ids:
            self.intern(external)

    def intern(self, external: str) -> int:
        idx = self._forward.get(external)
        if idx is None:
            idx = len(self._reverse)
            self._forward[external] = idx
            self._reverse.append(external)
        return idx

    def index(self, external: str) -> int:
        """Look up an already-interned ID without creating a new index."""
        return self._forward[external]

    def lookup(self, idx: int) -> str:
        return self._reverse[idx]

    def __contains__(self, external: str) -> bool:
        return external in self._forward

    def __len__(self) -> int:
        return len(self._reverse)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IdInterner):
            return NotImplemented
        return self._reverse == other._reverse

    @property
    def ids(self) -> list[str]:
        return list(self._reverse)


def parse_reviews(source: IO[str], schema: TableSchema | None = None,
                  strict: bool = False) -> ParseResult:
    """Parse a delimited review table into validated records.

    Rows with an unparseable rating or a rating outside 1-5, or with an
    empty customer/product ID, are rejected and counted; with ``strict``
    the first such row raises instead. A header missing any configured
    column is always fatal.
    """
    schema = schema or TableSchema()
    reader = csv.reader(source, delimiter=schema.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("input is empty, expected a header row") from None

    positions = {}
    for name in schema.columns():
        try:
            positions[name] = header.index(name)
        except ValueError:
            raise SchemaError(f"missing required column {name!r} in header {header!r}") from None

    records: list[ReviewRecord] = []
    rejects: list[RejectedRow] = []

    def reject(line_number: int, reason: str) -> None:
        if strict:
            raise StrictParseError(f"line {line_number}: {reason}")
        rejects.append(RejectedRow(line_number, reason))

    width = max(positions.values()) + 1
    for line_number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) < width:
            reject(line_number, f"expected at least {width} fields, got {len(row)}")
            continue
        customer = row[positions[schema.customer_id]]
        product = row[positions[schema.product_id]]
        raw_rating = row[positions[schema.star_rating]]
        headline = row[positions[schema.review_headline]]
        if not customer or not product:
            reject(line_number, "empty customer or product id")
            continue
        try:
            rating = int(raw_rating)
        except ValueError:
            reject(line_number, f"unparseable rating {raw_rating!r}")
            continue
        if not 1 <= rating <= 5:
            reject(line_number, f"rating {rating} outside 1-5")
            continue
        records.append(ReviewRecord(customer, product, rating, headline))

    if rejects:
        log.info("parsed %d records, rejected %d rows", len(records), len(rejects))
    return ParseResult(records, rejects)


def report_rejects(rejects: list[RejectedRow], stream: IO[str]) -> None:
    """Write one line per rejected row, prefixed with its line number."""
    for r in rejects:
        stream.write(f"line {r.line_number}: {r.reason}\n")


def intern(records: list[ReviewRecord], name: str = "FULL") -> RatingsDataset:
    """Intern records into a dataset with dense user/item indices.

    Duplicate (customer, product) pairs keep the last occurrence. All
    cells start with provenance TRUE.
    """
    if not records:
        raise ValueError("empty dataset")
    users = IdInterner()
    items = IdInterner()
    cells: dict[tuple[int, int], Cell] = {}
    for rec in records:
        u = users.intern(rec.customer_id)
        i = items.intern(rec.product_id)
        cells[(u, i)] = Cell(float(rec.star_rating), rec.review_headline, Provenance.TRUE)
    log.info("interned %d users, %d items, %d interactions (%d duplicate pairs collapsed)",
             len(users), len(items), len(cells), len(records) - len(cells))
    return RatingsDataset(len(users), len(items), cells, name, users, items)


# Review text for synthetic cells is drawn from these band vocabularies so
# that occurrence-based sentiment scoring sees a real signal. The positive
# and negative words are part of the default lexicon in the lexsent module.
_POSITIVE_WORDS = ("great", "excellent", "wonderful", "superb", "amazing", "loved")
_NEGATIVE_WORDS = ("awful", "terrible", "boring", "horrible", "waste", "disappointing")
_NEUTRAL_WORDS = ("watched", "movie", "average", "middling", "typical", "plain")


def _band_text(rating: float, rng: np.random.Generator) -> str:
    if rating >= 4.0:
        vocab = _POSITIVE_WORDS
    elif rating <= 2.0:
        vocab = _NEGATIVE_WORDS
    else:
        vocab = _NEUTRAL_WORDS
    n = int(rng.integers(2, 5))
    words = [vocab[int(rng.integers(0, len(vocab)))] for _ in range(n)]
    return " ".join(words)


def lowrank_scores(num_users: int, num_items: int, rank: int, noise_sd: float,
                   seed: int) -> np.ndarray:
    """Dense score matrix of exact rank ``rank`` (plus optional noise).

    Factor entries are drawn uniformly from [sqrt(1/rank), sqrt(5/rank)],
    which places every inner product inside [1, 5] without any clipping
    or shifting that would raise the matrix rank.
    """
    if rank < 1 or rank > min(num_users, num_items):
        raise ValueError(f"rank {rank} must be in [1, min({num_users}, {num_items})]")
    rng = np.random.default_rng(seed)
    lo, hi = np.sqrt(1.0 / rank), np.sqrt(5.0 / rank)
    user_factors = rng.uniform(lo, hi, size=(num_users, rank))
    item_factors = rng.uniform(lo, hi, size=(num_items, rank))
    scores = user_factors @ item_factors.T
    if noise_sd > 0.0:
        scores = scores + noise_sd * rng.standard_normal(scores.shape)
    return scores


def synth_lowrank(num_users: int, num_items: int, rank: int, noise_sd: float,
                  density: float, seed: int, name: str = "SYNTH") -> RatingsDataset:
    """Generate a deterministic dataset from a low-rank score matrix.

    Scores are rounded to three decimals (the precision the snapshot
    format preserves) and clipped to [1, 5]; with ``noise_sd`` 0 the clip
    never fires. ``density`` selects that fraction of the num_users x
    num_items grid uniformly at random. Same arguments, same dataset.
    """
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density {density} must be in (0, 1]")
    if num_users < 1 or num_items < 1:
        raise ValueError("num_users and num_items must be positive")
    scores = lowrank_scores(num_users, num_items, rank, noise_sd, seed)
    ratings = np.clip(np.round(scores, 3), 1.0, 5.0)

    # Continue the same stream the factors came from so the cell choice and
    # review text are part of the one seeded draw.
    rng = np.random.default_rng(seed)
    rng.uniform(size=(num_users + num_items) * rank)  # advance past factors
    if noise_sd > 0.0:
        rng.standard_normal((num_users, num_items))

    total = num_users * num_items
    n_cells = int(np.floor(density * total + 0.5))
    chosen = rng.choice(total, size=n_cells, replace=False)
    chosen.sort()

    users = IdInterner(f"u{u}" for u in range(num_users))
    items = IdInterner(f"p{i}" for i in range(num_items))
    cells: dict[tuple[int, int], Cell] = {}
    for flat in chosen:
        u, i = divmod(int(flat), num_items)
        rating = float(ratings[u, i])
        cells[(u, i)] = Cell(rating, _band_text(rating, rng), Provenance.TRUE)
    return RatingsDataset(num_users, num_items, cells, name, users, items)
