"""Dataset snapshots in, predicted-ratings files out.

Files are the only channel between this package and the recommender
pipeline. A snapshot arrives as a tab-delimited table of user-item
cells whose DROPPED rows kept their review text but lost the rating;
predictions leave as a tab-delimited table of (customer, product,
rating, scorer) rows. Both formats mirror the recommender's own
serialization byte for byte, so either side consumes the other's
output unchanged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import IO

SNAPSHOT_COLUMNS = ("customer_id", "product_id", "star_rating", "review_headline", "provenance")
SENTIMENT_COLUMNS = ("customer_id", "product_id", "rating", "scorer")
PROVENANCES = ("TRUE", "IMPUTED", "DROPPED")
_RATING_FMT = "{:.4f}"


@dataclass(frozen=True)
class SnapshotRow:
    """One user-item cell. Rating is absent exactly when DROPPED."""

    customer_id: str
    product_id: str
    rating: float | None
    review_headline: str
    provenance: str

    @property
    def usable(self) -> bool:
        return self.rating is not None


@dataclass(frozen=True)
class SentimentRow:
    customer_id: str
    product_id: str
    rating: float
    scorer: str


def read_snapshot(stream: IO[str]) -> list[SnapshotRow]:
    """Parse a snapshot table, rejecting anything malformed.

    Every row needs all five columns, a known provenance, a rating in
    [1, 5] that is empty exactly on DROPPED rows, and a cell coordinate
    no earlier row used.
    """
    reader = csv.reader(stream, delimiter="\t")
    header = next(reader, None)
    if header is None or tuple(header) != SNAPSHOT_COLUMNS:
        raise ValueError(f"not a dataset snapshot, header {header!r}")
    rows: list[SnapshotRow] = []
    seen: set[tuple[str, str]] = set()
    for line_number, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(SNAPSHOT_COLUMNS):
            raise ValueError(f"line {line_number}: expected {len(SNAPSHOT_COLUMNS)} fields")
        customer, product, raw_rating, text, provenance = fields
        if provenance not in PROVENANCES:
            raise ValueError(f"line {line_number}: unknown provenance {provenance!r}")
        if (provenance == "DROPPED") != (raw_rating == ""):
            raise ValueError(
                f"line {line_number}: rating must be empty exactly on DROPPED rows")
        rating = None
        if raw_rating:
            try:
                rating = float(raw_rating)
            except ValueError:
                raise ValueError(f"line {line_number}: unreadable rating {raw_rating!r}") from None
            if not 1.0 <= rating <= 5.0:
                raise ValueError(f"line {line_number}: rating {rating} outside [1, 5]")
        if (customer, product) in seen:
            raise ValueError(f"line {line_number}: duplicate cell ({customer}, {product})")
        seen.add((customer, product))
        rows.append(SnapshotRow(customer, product, rating, text, provenance))
    return rows


def read_snapshot_file(path: str | Path) -> list[SnapshotRow]:
    with open(path, encoding="utf-8") as stream:
        return read_snapshot(stream)


def write_sentiment_file(rows: list[SentimentRow], stream: IO[str]) -> None:
    """Write predictions tab-delimited with fixed-precision ratings.

    Matches the recommender's predicted-ratings format exactly: same
    header, same column order, ratings at four decimals, newline rows.
    """
    writer = csv.writer(stream, delimiter="\t", lineterminator="\n")
    writer.writerow(SENTIMENT_COLUMNS)
    for row in rows:
        writer.writerow([row.customer_id, row.product_id,
                         _RATING_FMT.format(row.rating), row.scorer])
