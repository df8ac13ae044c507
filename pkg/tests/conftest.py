"""Shared fixtures for the test suite."""

import csv

import numpy as np
import pytest

_POSITIVE = ("great", "excellent", "wonderful", "superb", "amazing", "loved")
_NEGATIVE = ("awful", "terrible", "boring", "horrible", "waste", "disappointing")
_NEUTRAL = ("watched", "movie", "okay", "fine")


def _write_reviews(path, num_users=25, num_items=18, per_user=7, seed=7):
    """Deterministic reviews table whose headlines track the star rating."""
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8", newline="") as stream:
        writer = csv.writer(stream, delimiter="\t", lineterminator="\n")
        writer.writerow(["customer_id", "product_id", "star_rating", "review_headline"])
        for u in range(num_users):
            for i in sorted(rng.choice(num_items, size=per_user, replace=False)):
                rating = int(rng.integers(1, 6))
                vocab = _POSITIVE if rating >= 4 else _NEGATIVE if rating <= 2 else _NEUTRAL
                words = " ".join(rng.choice(vocab, size=3))
                writer.writerow([f"c{u}", f"p{i}", rating, words])
    return path


@pytest.fixture
def write_reviews():
    return _write_reviews
