"""Offline evaluation metrics: AUC, NDCG@k, adaptive calibration error."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .errors import ContractError


def auc(scores, labels) -> float:
    """Rank-sum AUC: P(random positive outranks random negative), ties half."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ContractError("AUC needs at least one positive and one negative")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def ndcg_at_k(user_ids, scores, labels, k: int):
    """Mean NDCG@k over users with binary gain and log2 discount.

    Users without a positive are excluded from the mean; returns
    (mean ndcg, number of excluded users).
    """
    if k < 1:
        raise ContractError("k must be >= 1")
    user_ids = np.asarray(user_ids, dtype=object)
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    order = np.argsort(user_ids.astype(str), kind="stable")
    sorted_users = user_ids[order]
    boundaries = np.nonzero(sorted_users[1:] != sorted_users[:-1])[0] + 1
    groups = np.split(order, boundaries)
    values = []
    excluded = 0
    discounts = None
    for idx in groups:
        y = labels[idx]
        n_pos = int((y == 1).sum())
        if n_pos == 0:
            excluded += 1
            continue
        top = idx[np.argsort(-scores[idx], kind="stable")][:k]
        kk = len(top)
        if discounts is None or len(discounts) < kk:
            discounts = 1.0 / np.log2(np.arange(2, k + 2))
        dcg = float((labels[top] * discounts[:kk]).sum())
        idcg = float(discounts[:min(n_pos, kk)].sum())
        values.append(dcg / idcg)
    if not values:
        raise ContractError("no user with a positive record")
    return float(np.mean(values)), excluded


def ace(scores, labels, n_bins: int = 15) -> float:
    """Adaptive calibration error over equal-mass score bins.

    Records are sorted by score and split into n_bins bins of (nearly)
    equal count, remainders going to the lowest bins; ACE is the mean
    absolute gap between mean label and mean score per bin.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if n_bins < 1:
        raise ContractError("n_bins must be >= 1")
    if len(scores) < n_bins:
        raise ContractError(f"need at least {n_bins} records for {n_bins} bins")
    order = np.argsort(scores, kind="stable")
    base, rem = divmod(len(scores), n_bins)
    sizes = np.full(n_bins, base)
    sizes[:rem] += 1
    gaps = []
    start = 0
    for size in sizes:
        idx = order[start:start + size]
        gaps.append(abs(labels[idx].mean() - scores[idx].mean()))
        start += size
    return float(np.mean(gaps))
