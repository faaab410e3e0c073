"""Planted-community synthetic interaction generator for desk-scale benchmarks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .graph import Dataset


@dataclass
class SyntheticSpec:
    n_users: int = 2000
    n_items: int = 1000
    n_communities: int = 10
    within_rate: float = 0.03
    cross_rate: float = 0.002
    negatives_per_positive: float = 4.0
    context_noise_dim: int = 0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.cross_rate <= 1.0 and 0.0 <= self.within_rate <= 1.0):
            raise ContractError("interaction rates must lie in [0, 1]")
        if self.within_rate <= self.cross_rate:
            raise ContractError("planted structure needs within_rate > cross_rate")
        if self.n_users < 1 or self.n_items < 1 or self.n_communities < 1:
            raise ContractError("sizes must be positive")
        if self.negatives_per_positive < 0:
            raise ContractError("negatives_per_positive must be non-negative")


def generate_synthetic(spec: SyntheticSpec):
    """Generate a planted-community dataset.

    Positive pairs appear within communities at the high rate and across
    communities at the low rate; negatives are uniform random non-positive
    pairs. Returns (dataset, user_communities, item_communities).
    """
    rng = np.random.default_rng(spec.seed)
    user_comm = rng.integers(spec.n_communities, size=spec.n_users)
    item_comm = rng.integers(spec.n_communities, size=spec.n_items)

    same = user_comm[:, None] == item_comm[None, :]
    p = np.where(same, spec.within_rate, spec.cross_rate)
    pos_mask = rng.random((spec.n_users, spec.n_items)) < p
    pos_u, pos_v = np.nonzero(pos_mask)
    n_pos = len(pos_u)
    if n_pos == 0:
        raise ContractError("spec produced no positive interactions")

    n_neg = int(round(spec.negatives_per_positive * n_pos))
    neg_u = np.empty(n_neg, dtype=np.int64)
    neg_v = np.empty(n_neg, dtype=np.int64)
    filled = 0
    while filled < n_neg:
        want = n_neg - filled
        cu = rng.integers(spec.n_users, size=2 * want + 16)
        cv = rng.integers(spec.n_items, size=2 * want + 16)
        ok = ~pos_mask[cu, cv]
        cu, cv = cu[ok][:want], cv[ok][:want]
        neg_u[filled:filled + len(cu)] = cu
        neg_v[filled:filled + len(cv)] = cv
        filled += len(cu)

    users = np.concatenate([pos_u, neg_u])
    items = np.concatenate([pos_v, neg_v])
    labels = np.concatenate([np.ones(n_pos, dtype=np.int8),
                             np.zeros(n_neg, dtype=np.int8)])
    order = rng.permutation(len(users))
    users, items, labels = users[order], items[order], labels[order]
    context = None
    if spec.context_noise_dim > 0:
        context = rng.normal(size=(len(users), spec.context_noise_dim))
    dataset = Dataset([f"u{i}" for i in users], [f"v{j}" for j in items],
                      labels, context)
    return dataset, user_comm, item_comm
