"""Sparse user-item rating structure and the transforms applied to it.

A dataset is an immutable snapshot: a set of (user, item) cells, each
carrying a rating (or none), review text, and a provenance tag. The three
transforms here model a rating-scarcity experiment:

* ``split``      - hold out a per-user validation slice first,
* ``sparsify``   - blank out a fraction of the remaining training ratings,
* ``impute``     - fill blanked cells back in from an external predicted
                   ratings file.

Holding validation out before sparsification means every variant built
from one source is scored against identical ground truth.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, replace
from typing import IO, TYPE_CHECKING, Iterable, Iterator

import numpy as np

if TYPE_CHECKING:
    from .ingest import IdInterner
    from .lexsent import SentimentRow

log = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ("customer_id", "product_id", "star_rating", "review_headline", "provenance")
_RATING_FMT = "{:.4f}"


class Provenance(enum.Enum):
    TRUE = "TRUE"
    IMPUTED = "IMPUTED"
    DROPPED = "DROPPED"


class ImputePolicy(enum.Enum):
    STRICT = "STRICT"
    LENIENT = "LENIENT"


@dataclass(frozen=True)
class Cell:
    """One user-item interaction. Rating is absent exactly when DROPPED."""

    rating: float | None
    review_text: str
    provenance: Provenance

    def __post_init__(self) -> None:
        if (self.rating is None) != (self.provenance is Provenance.DROPPED):
            raise ValueError("rating must be absent if and only if provenance is DROPPED")
        if self.rating is not None and not 1.0 <= self.rating <= 5.0:
            raise ValueError(f"rating {self.rating} outside [1, 5]")

    @property
    def usable(self) -> bool:
        return self.provenance is not Provenance.DROPPED


@dataclass(frozen=True)
class SplitSpec:
    drop_fraction: float = 0.4
    validation_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.drop_fraction < 1.0:
            raise ValueError(f"drop_fraction {self.drop_fraction} outside [0, 1)")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError(f"validation_fraction {self.validation_fraction} outside (0, 1)")


@dataclass(frozen=True)
class RatingsDataset:
    """Immutable sparse rating structure with interned IDs."""

    num_users: int
    num_items: int
    cells: dict[tuple[int, int], Cell]
    name: str
    users: "IdInterner"
    items: "IdInterner"

    def sorted_cells(self) -> Iterator[tuple[tuple[int, int], Cell]]:
        """Cells in canonical (user index, item index) order."""
        for key in sorted(self.cells):
            yield key, self.cells[key]

    def provenance_counts(self) -> dict[Provenance, int]:
        counts = {p: 0 for p in Provenance}
        for cell in self.cells.values():
            counts[cell.provenance] += 1
        return counts

    def usable_count(self) -> int:
        return sum(1 for c in self.cells.values() if c.usable)

    def renamed(self, name: str) -> "RatingsDataset":
        return replace(self, name=name)


def split(full: RatingsDataset, spec: SplitSpec) -> tuple[RatingsDataset, RatingsDataset]:
    """Hold out a per-user validation slice.

    Each user with n ratings contributes floor(validation_fraction * n)
    of them to validation, at least one when n >= 2 and none when n == 1.
    Selection is seeded and users are visited in ascending index order,
    so the partition is identical for identical inputs.
    """
    by_user: dict[int, list[int]] = {}
    for (u, i) in full.cells:
        by_user.setdefault(u, []).append(i)

    rng = np.random.default_rng(spec.seed)
    train_cells: dict[tuple[int, int], Cell] = {}
    val_cells: dict[tuple[int, int], Cell] = {}
    for u in sorted(by_user):
        items = sorted(by_user[u])
        n = len(items)
        n_val = int(math.floor(spec.validation_fraction * n))
        if n >= 2 and n_val == 0:
            n_val = 1
        held = set()
        if n_val > 0:
            held = {int(x) for x in rng.choice(items, size=n_val, replace=False)}
        for i in items:
            cell = full.cells[(u, i)]
            (val_cells if i in held else train_cells)[(u, i)] = cell

    train = replace(full, cells=train_cells)
    validation = replace(full, cells=val_cells, name=f"{full.name}-VALIDATION")
    return train, validation


def sparsify(train: RatingsDataset, drop_fraction: float, seed: int,
             name: str = "SPARSE") -> RatingsDataset:
    """Blank out a seeded uniform selection of ratings.

    Exactly round(drop_fraction * cell count) cells, rounded half up,
    become DROPPED: the rating is removed, the review text kept. The
    rest stay untouched.
    """
    if not 0.0 <= drop_fraction < 1.0:
        raise ValueError(f"drop_fraction {drop_fraction} outside [0, 1)")
    keys = sorted(train.cells)
    n_drop = int(math.floor(drop_fraction * len(keys) + 0.5))
    rng = np.random.default_rng(seed)
    dropped = {keys[int(j)] for j in rng.choice(len(keys), size=n_drop, replace=False)}

    cells = {}
    for key, cell in train.cells.items():
        if key in dropped:
            cells[key] = Cell(None, cell.review_text, Provenance.DROPPED)
        else:
            cells[key] = cell
    return replace(train, cells=cells, name=name)


def impute(sparse: RatingsDataset, sentiments: Iterable["SentimentRow"],
           policy: ImputePolicy = ImputePolicy.STRICT) -> RatingsDataset:
    """Fill DROPPED cells from predicted ratings, never touching the rest.

    STRICT demands an exact one-to-one match between the sentiment rows
    and the DROPPED cells; LENIENT logs and skips mismatches on either
    side. The result is renamed after the rows' scorer tag.
    """
    rows = list(sentiments)
    scorers = {row.scorer for row in rows}
    if len(scorers) > 1:
        raise ValueError(f"mixed scorer tags in one sentiment input: {sorted(scorers)}")
    scorer = next(iter(scorers)) if scorers else "EMPTY"

    strict = policy is ImputePolicy.STRICT
    cells = dict(sparse.cells)
    warnings = 0
    filled: set[tuple[int, int]] = set()
    for row in rows:
        if row.customer_id not in sparse.users or row.product_id not in sparse.items:
            if strict:
                raise ValueError(f"sentiment row ({row.customer_id}, {row.product_id}) "
                                 "references unknown user or item")
            warnings += 1
            log.warning("skipping sentiment row for unknown ids (%s, %s)",
                        row.customer_id, row.product_id)
            continue
        key = (sparse.users.index(row.customer_id), sparse.items.index(row.product_id))
        cell = cells.get(key)
        if cell is None or cell.provenance is not Provenance.DROPPED:
            if strict:
                raise ValueError(f"sentiment row ({row.customer_id}, {row.product_id}) "
                                 "does not target a DROPPED cell")
            warnings += 1
            log.warning("skipping sentiment row (%s, %s): cell is not DROPPED",
                        row.customer_id, row.product_id)
            continue
        cells[key] = Cell(float(row.rating), cell.review_text, Provenance.IMPUTED)
        filled.add(key)

    if strict:
        missing = [key for key, cell in cells.items()
                   if cell.provenance is Provenance.DROPPED]
        if missing:
            u, i = min(missing)
            raise ValueError(f"{len(missing)} DROPPED cells have no sentiment entry, "
                             f"first ({sparse.users.lookup(u)}, {sparse.items.lookup(i)})")
    if warnings:
        log.warning("impute skipped %d sentiment rows", warnings)

    name = scorer if scorer.startswith("SENT-") else f"SENT-{scorer}"
    return replace(sparse, cells=cells, name=name)


def true_sentiment_rows(full: RatingsDataset, sparse: RatingsDataset,
                        scorer: str = "ORACLE") -> list["SentimentRow"]:
    """Predicted-rating rows carrying the true values of the DROPPED cells.

    Imputing with these reconstructs the pre-sparsify ratings exactly,
    which is the reference point for any real scorer.
    """
    from .lexsent import SentimentRow

    rows = []
    for (u, i), cell in sparse.sorted_cells():
        if cell.provenance is Provenance.DROPPED:
            original = full.cells[(u, i)]
            rows.append(SentimentRow(sparse.users.lookup(u), sparse.items.lookup(i),
                                     original.rating, scorer))
    return rows


def write_snapshot(data: RatingsDataset, stream: IO[str]) -> None:
    """Write the dataset as delimited text: the ingest table plus provenance.

    Rows are emitted in canonical cell order and ratings with fixed
    precision, so equal datasets serialize to identical bytes. DROPPED
    cells leave the rating field empty.
    """
    writer = csv.writer(stream, delimiter="\t", lineterminator="\n")
    writer.writerow(SNAPSHOT_COLUMNS)
    for (u, i), cell in data.sorted_cells():
        rating = "" if cell.rating is None else _RATING_FMT.format(cell.rating)
        writer.writerow([data.users.lookup(u), data.items.lookup(i), rating,
                         cell.review_text, cell.provenance.value])


def read_snapshot(stream: IO[str], name: str) -> RatingsDataset:
    """Read a snapshot written by ``write_snapshot``.

    IDs are re-interned in file order; snapshots written from one source
    share cell coordinates and therefore reproduce the same index maps.
    """
    from .ingest import IdInterner

    reader = csv.reader(stream, delimiter="\t")
    header = next(reader, None)
    if header is None or tuple(header) != SNAPSHOT_COLUMNS:
        raise ValueError(f"not a dataset snapshot, header {header!r}")
    users = IdInterner()
    items = IdInterner()
    cells: dict[tuple[int, int], Cell] = {}
    for line_number, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(SNAPSHOT_COLUMNS):
            raise ValueError(f"line {line_number}: expected {len(SNAPSHOT_COLUMNS)} fields")
        customer, product, raw_rating, text, raw_prov = row
        try:
            provenance = Provenance(raw_prov)
        except ValueError:
            raise ValueError(f"line {line_number}: unknown provenance {raw_prov!r}") from None
        rating = None if raw_rating == "" else float(raw_rating)
        cells[(users.intern(customer), items.intern(product))] = Cell(rating, text, provenance)
    return RatingsDataset(len(users), len(items), cells, name, users, items)
