"""Subsampling rates from hardness scores, ensembling, and Bernoulli draws.

Rates follow pi = min(max(rho * h, floor), 1) with the scalar rho tuned by
bisection so the mean rate over negative records hits the target alpha.
Positives get counterfactual rates from the same formula and are never
dropped.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, InfeasibleRateError
from .graph import BipartiteGraph, Dataset

MEAN_TOL = 1e-6
RHO_TOL = 1e-9


@dataclass
class RateConfig:
    alpha: float = 0.2
    rho_min: float = 0.1
    rho_prod_min: float = 0.005
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ContractError("alpha must lie in (0, 1]")
        if not 0.0 < self.rho_min <= 1.0:
            raise ContractError("rho_min must lie in (0, 1]")


@dataclass
class SamplingPlan:
    """Per-record rate, log-rate and inclusion indicator."""

    pi: np.ndarray
    log_pi: np.ndarray
    delta: np.ndarray

    @property
    def retained(self) -> np.ndarray:
        return np.nonzero(self.delta == 1)[0]

    def __len__(self):
        return len(self.pi)


def _clipped(base: np.ndarray, rho: float, floor: float) -> np.ndarray:
    return np.minimum(np.maximum(rho * base, floor), 1.0)


def tune_rates(base: np.ndarray, negative_mask: np.ndarray, alpha: float,
               floor: float = 0.0) -> np.ndarray:
    """Scale-and-clip base scores so the mean over negatives equals alpha.

    The negative-mean of min(max(rho*base, floor), 1) is monotone in rho,
    so bisection converges; raises when alpha is outside the reachable
    range.
    """
    base = np.asarray(base, dtype=float)
    negative_mask = np.asarray(negative_mask, dtype=bool)
    if base.shape != negative_mask.shape:
        raise ContractError("hardness and negative mask must align")
    if not negative_mask.any():
        raise ContractError("need at least one negative record to tune rates")
    if np.any(base < 0):
        raise ContractError("hardness scores must be non-negative")

    neg = base[negative_mask]
    low_mean = max(floor, 0.0) if floor > 0 else 0.0
    high_mean = float(np.where(neg > 0, 1.0, max(floor, 0.0)).mean())
    if alpha < low_mean - MEAN_TOL or alpha > high_mean + MEAN_TOL:
        raise InfeasibleRateError(
            f"target mean {alpha} unreachable; feasible negative-mean range is "
            f"[{low_mean:.6g}, {high_mean:.6g}]",
            feasible_low=low_mean, feasible_high=high_mean)

    def neg_mean(rho):
        return float(_clipped(neg, rho, floor).mean())

    lo = 0.0
    pos_base = neg[neg > 0]
    hi = 1.0 if pos_base.size == 0 else 1.0 / pos_base.min()
    while neg_mean(hi) < alpha and hi < 1e18:
        hi *= 2.0
    for _ in range(200):
        if hi - lo <= RHO_TOL * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if neg_mean(mid) < alpha:
            lo = mid
        else:
            hi = mid
    rho = 0.5 * (lo + hi)
    rates = _clipped(base, rho, floor)
    if abs(float(rates[negative_mask].mean()) - alpha) > MEAN_TOL:
        raise InfeasibleRateError(
            f"could not meet target mean {alpha}; reached "
            f"{float(rates[negative_mask].mean()):.8f}",
            feasible_low=low_mean, feasible_high=high_mean)
    return rates


def rates_from_hardness(h: np.ndarray, negative_mask: np.ndarray,
                        config: RateConfig) -> np.ndarray:
    """Normalized, clipped subsampling rates from hardness scores."""
    return tune_rates(h, negative_mask, config.alpha, floor=config.rho_min)


def expand_to_records(graph: BipartiteGraph, edge_values: np.ndarray) -> np.ndarray:
    """Broadcast per-edge values to records (duplicates share their edge's value)."""
    if graph.edge_of_record is None:
        raise ContractError("graph carries no record mapping")
    return np.asarray(edge_values, dtype=float)[graph.edge_of_record]


def subsample(dataset: Dataset, rates: np.ndarray, seed: int) -> SamplingPlan:
    """Bernoulli subsampling: keep every positive, keep negatives w.p. pi."""
    rates = np.asarray(rates, dtype=float)
    if len(rates) != len(dataset):
        raise ContractError("rates must align to records")
    if np.any(rates <= 0) or np.any(rates > 1):
        raise ContractError("rates must lie in (0, 1]")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    lam = rng.uniform(size=len(dataset))
    delta = ((dataset.labels == 1) | (lam <= rates)).astype(np.int8)
    return SamplingPlan(pi=rates, log_pi=np.log(rates), delta=delta)


def ensemble_max(pi_d: np.ndarray, pi_phi: np.ndarray, negative_mask: np.ndarray,
                 config: RateConfig) -> np.ndarray:
    """Elementwise maximum of two rate vectors, rescaled to mean alpha."""
    _check_rates(pi_d, pi_phi)
    return tune_rates(np.maximum(pi_d, pi_phi), negative_mask, config.alpha)


def ensemble_mean(pi_d: np.ndarray, pi_phi: np.ndarray, negative_mask=None,
                  config: RateConfig | None = None) -> np.ndarray:
    """Elementwise mean of two rate vectors.

    Retuned only if the result drifts from alpha by more than the mean
    tolerance (it cannot when both inputs already satisfy it).
    """
    _check_rates(pi_d, pi_phi)
    out = 0.5 * (np.asarray(pi_d, dtype=float) + np.asarray(pi_phi, dtype=float))
    if negative_mask is not None and config is not None:
        if abs(float(out[np.asarray(negative_mask, dtype=bool)].mean()) - config.alpha) > MEAN_TOL:
            out = tune_rates(out, negative_mask, config.alpha)
    return out


def ensemble_prod(pi_d: np.ndarray, pi_phi: np.ndarray, negative_mask: np.ndarray,
                  config: RateConfig) -> np.ndarray:
    """Elementwise product, floored at rho_prod_min and rescaled to mean alpha."""
    _check_rates(pi_d, pi_phi)
    base = np.asarray(pi_d, dtype=float) * np.asarray(pi_phi, dtype=float)
    return tune_rates(base, negative_mask, config.alpha, floor=config.rho_prod_min)


def flip_rates(pi_major: np.ndarray, pi_other: np.ndarray,
               low_thresh: float, high_thresh: float,
               negative_mask: np.ndarray, alpha: float) -> np.ndarray:
    """Control experiment: adopt the other method's rate where the two disagree.

    A record flips when pi_major < low_thresh and pi_other > high_thresh;
    the result is renormalized to mean alpha over negatives when it drifts.
    """
    if not (0.0 <= low_thresh <= 1.0 and 0.0 <= high_thresh <= 1.0):
        raise ContractError("thresholds must lie in [0, 1]")
    if low_thresh >= high_thresh:
        raise ContractError("low threshold must be below high threshold")
    _check_rates(pi_major, pi_other)
    pi_major = np.asarray(pi_major, dtype=float)
    pi_other = np.asarray(pi_other, dtype=float)
    cond = (pi_major < low_thresh) & (pi_other > high_thresh)
    out = np.where(cond, pi_other, pi_major)
    neg = np.asarray(negative_mask, dtype=bool)
    if abs(float(out[neg].mean()) - alpha) > MEAN_TOL:
        out = tune_rates(out, neg, alpha)
    return out


def _check_rates(*vectors):
    shapes = {np.asarray(v).shape for v in vectors}
    if len(shapes) != 1:
        raise ContractError("rate vectors must align")
    for v in vectors:
        v = np.asarray(v, dtype=float)
        if np.any(v <= 0) or np.any(v > 1):
            raise ContractError("rates must lie in (0, 1]")


def ingest_pilot_scores(path, graph: BipartiteGraph, delimiter: str = "\t") -> np.ndarray:
    """Read model-based hardness scores from a (user, item, score) TSV.

    Every edge of the graph must be covered; conflicting duplicate scores
    are rejected.
    """
    lookup = graph.edge_lookup()
    values = np.full(graph.n_edges, np.nan)
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader, None)
        if header is None or len(header) < 3:
            raise ContractError(f"{path}: expected header row (user, item, score)")
        for row_no, row in enumerate(reader, start=2):
            if len(row) < 3:
                raise ContractError(f"{path}: row {row_no}: expected 3 columns")
            e = lookup.get((row[0], row[1]))
            if e is None:
                continue
            try:
                score = float(row[2])
            except ValueError:
                raise ContractError(f"{path}: row {row_no}: malformed score {row[2]!r}")
            if not np.isnan(values[e]) and values[e] != score:
                raise ContractError(
                    f"{path}: row {row_no}: conflicting duplicate score for "
                    f"pair ({row[0]}, {row[1]})")
            values[e] = score
    missing = np.nonzero(np.isnan(values))[0]
    if missing.size:
        pairs = [(graph.user_tokens[graph.edge_user[e]], graph.item_tokens[graph.edge_item[e]])
                 for e in missing[:5]]
        raise ContractError(
            f"{path}: missing scores for {missing.size} pairs; first offenders: {pairs}")
    return values
