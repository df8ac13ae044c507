"""Ranking quality measures over recommendation lists.

Everything here is pure: ranked item sequences and relevant-item sets
in, numbers out. Items only need to be hashable, so callers can pass
internal indices or external ids interchangeably.

Per-user definitions, with R the ranked list (length Q), D the relevant
set (size N), and rel(x) = 1 iff x is in D:

  precision@K = (1/K) * sum_{j=1..min(Q,K)} rel(R(j))
  AP          = (1/N) * sum_{j=1..Q} rel(R(j)) / j
  DCG@K       = sum_{j=1..min(n,Q)} rel(R(j)) / log2(j+1),  n = min(max(Q,N),K)
  NDCG@K      = DCG@K / IDCG(N,K)
  IDCG(N,K)   = sum_{j=1..min(N,K)} 1 / log2(j+1)

AP divides each hit by its rank position alone. The conventional
variant that divides the running hit count by the position is available
behind the `cumulative` flag.

Averages run over users with at least one relevant item; the rest are
excluded from the user count M.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Mapping, Sequence, Set
from dataclasses import dataclass
from typing import IO, Hashable

EVAL_COLUMNS = ("dataset", "k", "num_users", "map", "ndcg", "precision")
_SCORE_FMT = "{:.17g}"

Item = Hashable


def precision_at_k(recommended: Sequence[Item], relevant: Set[Item], k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    hits = sum(1 for item in recommended[:k] if item in relevant)
    return hits / k


def average_precision(recommended: Sequence[Item], relevant: Set[Item],
                      cumulative: bool = False) -> float:
    if not relevant:
        raise ValueError("no relevant items")
    total = 0.0
    hits = 0
    for position, item in enumerate(recommended, start=1):
        if item in relevant:
            hits += 1
            total += hits / position if cumulative else 1.0 / position
    return total / len(relevant)


def idcg(num_relevant: int, k: int) -> float:
    """Discounted gain of a perfect length-min(num_relevant, k) ranking."""
    return sum(1.0 / math.log2(j + 1) for j in range(1, min(num_relevant, k) + 1))


def ndcg_at_k(recommended: Sequence[Item], relevant: Set[Item], k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if not relevant:
        raise ValueError("no relevant items")
    depth = min(max(len(recommended), len(relevant)), k)
    gain = sum(1.0 / math.log2(j + 1)
               for j, item in enumerate(recommended[:depth], start=1)
               if item in relevant)
    return gain / idcg(len(relevant), k)


@dataclass(frozen=True)
class RankingScores:
    """Mean precision@K, MAP, and NDCG@K over the M counted users."""

    map_score: float
    ndcg: float
    precision: float
    num_users: int


def score_rankings(recommended: Mapping[Hashable, Sequence[Item]],
                   relevant: Mapping[Hashable, Set[Item]],
                   k: int) -> RankingScores:
    """Aggregate over users keyed consistently in both mappings.

    Users whose relevant set is empty are skipped entirely. A user with
    relevant items but no recommendation entry contributes zeros.
    """
    total_ap = total_ndcg = total_precision = 0.0
    counted = 0
    for user in sorted(relevant, key=repr):
        targets = relevant[user]
        if not targets:
            continue
        ranked = recommended.get(user, ())
        total_ap += average_precision(ranked, targets)
        total_ndcg += ndcg_at_k(ranked, targets, k)
        total_precision += precision_at_k(ranked, targets, k)
        counted += 1
    if counted == 0:
        raise ValueError("no users with relevant items")
    return RankingScores(total_ap / counted, total_ndcg / counted,
                         total_precision / counted, counted)


def avg_improvement(baseline: RankingScores, enhanced: RankingScores) -> float:
    """Mean percent change over MAP, NDCG@K, and precision@K."""
    pairs = ((baseline.map_score, enhanced.map_score),
             (baseline.ndcg, enhanced.ndcg),
             (baseline.precision, enhanced.precision))
    changes = []
    for base, new in pairs:
        if base == 0:
            raise ValueError("baseline metric is zero, relative change undefined")
        changes.append(100.0 * (new - base) / base)
    return sum(changes) / len(changes)


def write_scores(rows: list[tuple[str, int, RankingScores]], stream: IO[str]) -> None:
    """Tab-delimited scores, full float precision, one row per dataset."""
    writer = csv.writer(stream, delimiter="\t", lineterminator="\n")
    writer.writerow(EVAL_COLUMNS)
    for name, k, scores in rows:
        writer.writerow([name, k, scores.num_users,
                         _SCORE_FMT.format(scores.map_score),
                         _SCORE_FMT.format(scores.ndcg),
                         _SCORE_FMT.format(scores.precision)])


def read_scores(stream: IO[str]) -> list[tuple[str, int, RankingScores]]:
    reader = csv.reader(stream, delimiter="\t")
    header = next(reader, None)
    if header is None or tuple(header) != EVAL_COLUMNS:
        raise ValueError(f"not a scores file, header {header!r}")
    rows = []
    for fields in reader:
        if not fields:
            continue
        if len(fields) != len(EVAL_COLUMNS):
            raise ValueError(f"expected {len(EVAL_COLUMNS)} fields, got {fields!r}")
        name, k, num_users, map_score, ndcg, precision = fields
        rows.append((name, int(k),
                     RankingScores(float(map_score), float(ndcg),
                                   float(precision), int(num_users))))
    return rows
