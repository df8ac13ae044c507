"""Alternating least squares factorization of an explicit ratings matrix.

Users and items get rank-r factor rows; each half-sweep solves the
regularized normal equations exactly for one side while the other is
held fixed, so the training objective never increases. Nothing here is
implicit-feedback style: observed ratings are the only data term and
the penalty is a plain ridge on every factor row.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .dataset import RatingsDataset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlsConfig:
    rank: int = 10
    regularization: float = 0.1
    iterations: int = 15
    init_scale: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError(f"rank must be positive, got {self.rank}")
        if self.regularization <= 0:
            # The per-row system is only guaranteed positive definite with
            # a strictly positive ridge term.
            raise ValueError(f"regularization must be > 0, got {self.regularization}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be positive, got {self.iterations}")
        if self.init_scale <= 0:
            raise ValueError(f"init_scale must be > 0, got {self.init_scale}")


@dataclass(frozen=True, eq=False)
class AlsModel:
    """Trained factors plus the objective value after every half-sweep.

    objective_trace[0] is the objective at initialization, followed by
    two entries per iteration (user sweep, then item sweep).
    """

    user_factors: np.ndarray
    item_factors: np.ndarray
    objective_trace: tuple[float, ...]

    def predict(self, user: int, item: int) -> float:
        return float(self.user_factors[user] @ self.item_factors[item])

    def predict_all(self) -> np.ndarray:
        """Dense (num_users, num_items) matrix of raw predictions, unclipped."""
        return self.user_factors @ self.item_factors.T


def _objective(u_factors, v_factors, users, items, ratings, lam):
    pred = np.einsum("ij,ij->i", u_factors[users], v_factors[items])
    penalty = np.sum(u_factors * u_factors) + np.sum(v_factors * v_factors)
    return float(np.sum((ratings - pred) ** 2) + lam * penalty)


def _sweep(target, fixed, by_row, lam):
    """Solve the ridge normal equations for every row of `target` in place."""
    rank = target.shape[1]
    eye = lam * np.eye(rank)
    for row, (cols, vals) in by_row.items():
        block = fixed[cols]
        gram = block.T @ block + eye
        target[row] = cho_solve(cho_factor(gram), block.T @ vals)


def train(data: RatingsDataset, config: AlsConfig = AlsConfig()) -> AlsModel:
    """Factorize the usable cells of `data` (cells that still carry a rating).

    Rows with no observations are driven to zero, which is the exact
    ridge minimizer for them. Same data, same config, same factors.
    """
    triples = [(u, i, cell.rating) for (u, i), cell in data.sorted_cells() if cell.usable]
    if not triples:
        raise ValueError(f"dataset {data.name} has no rated cells to train on")
    users = np.array([t[0] for t in triples], dtype=np.intp)
    items = np.array([t[1] for t in triples], dtype=np.intp)
    ratings = np.array([t[2] for t in triples], dtype=np.float64)

    by_user: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    by_item: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for axis, table in ((users, by_user), (items, by_item)):
        order = np.argsort(axis, kind="stable")
        keys, starts = np.unique(axis[order], return_index=True)
        for key, chunk in zip(keys, np.split(order, starts[1:])):
            other = items if axis is users else users
            table[int(key)] = (other[chunk], ratings[chunk])

    rng = np.random.default_rng(config.seed)
    scale = config.init_scale
    u_factors = rng.uniform(-scale, scale, (data.num_users, config.rank))
    v_factors = rng.uniform(-scale, scale, (data.num_items, config.rank))
    # Unobserved rows start at their exact minimizer so the first sweep
    # cannot be blamed for them.
    for row in range(data.num_users):
        if row not in by_user:
            u_factors[row] = 0.0
    for row in range(data.num_items):
        if row not in by_item:
            v_factors[row] = 0.0

    lam = config.regularization
    trace = [_objective(u_factors, v_factors, users, items, ratings, lam)]
    for _ in range(config.iterations):
        _sweep(u_factors, v_factors, by_user, lam)
        trace.append(_objective(u_factors, v_factors, users, items, ratings, lam))
        _sweep(v_factors, u_factors, by_item, lam)
        trace.append(_objective(u_factors, v_factors, users, items, ratings, lam))
    log.info("trained rank-%d model on %s: objective %.6g -> %.6g",
             config.rank, data.name, trace[0], trace[-1])
    return AlsModel(u_factors, v_factors, tuple(trace))


def recommend_all(model: AlsModel, train_data: RatingsDataset,
                  k: int | None = None) -> dict[int, list[int]]:
    """Ranked item indices per user, best predicted rating first.

    Items the user already has a rating for in the training data are
    excluded; cells whose rating was dropped stay eligible. Score ties
    break on ascending item index so rankings are reproducible.
    """
    seen: dict[int, set[int]] = {}
    for (u, i), cell in train_data.cells.items():
        if cell.usable:
            seen.setdefault(u, set()).add(i)
    item_index = np.arange(train_data.num_items)
    scores = model.predict_all()
    result: dict[int, list[int]] = {}
    for user in range(train_data.num_users):
        order = np.lexsort((item_index, -scores[user]))
        banned = seen.get(user, ())
        ranked = [int(i) for i in order if i not in banned]
        result[user] = ranked if k is None else ranked[:k]
    return result
