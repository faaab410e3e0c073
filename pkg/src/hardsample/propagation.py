"""Smoothing of per-edge scores by propagation on the line graph.

Two equivalent routes: a matrix iteration over the explicit line graph,
and a memory-light kernel that aggregates per original node and never
materializes the line graph. With row normalization and self-exclusion
term B_n^t the two coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, ConvergenceError
from .graph import BipartiteGraph


@dataclass
class PropagationConfig:
    gamma: float
    tolerance: float = 1e-8
    max_iters: int = 1000
    normalization: str = "symmetric"   # "symmetric" | "row"
    variant: str = "self_excl_bt"      # edge kernel: "self_excl_bt" | "self_excl_z"

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ContractError("gamma must lie in [0, 1)")
        if self.normalization not in ("symmetric", "row"):
            raise ContractError(f"unknown normalization {self.normalization!r}")
        if self.variant not in ("self_excl_bt", "self_excl_z"):
            raise ContractError(f"unknown variant {self.variant!r}")


class LineGraph:
    """Line graph of a bipartite graph: one node per original edge."""

    def __init__(self, adjacency: sp.csr_matrix):
        self.adjacency = adjacency
        self.n_nodes = adjacency.shape[0]
        self.degrees = np.asarray(adjacency.sum(axis=1)).ravel().astype(np.int64)

    @property
    def n_edges(self):
        return int(self.adjacency.nnz // 2)


def build_line_graph(graph: BipartiteGraph) -> LineGraph:
    """Line-graph adjacency: original edges adjacent iff they share a node."""
    n_e = graph.n_edges
    u, v = graph.edge_nodes()
    rows = np.concatenate([np.arange(n_e), np.arange(n_e)])
    cols = np.concatenate([u, v])
    inc = sp.coo_matrix((np.ones(2 * n_e), (rows, cols)),
                        shape=(n_e, graph.n_nodes)).tocsr()
    adj = (inc @ inc.T).tolil()
    adj.setdiag(0)
    adj = adj.tocsr()
    adj.eliminate_zeros()
    return LineGraph(adj)


def expected_line_edge_count(graph: BipartiteGraph) -> int:
    """Closed-form |E_L| from original node degrees."""
    deg = graph.node_degrees()
    return int((deg.astype(np.int64) ** 2).sum() // 2 - graph.n_edges)


def smoothing_matrix(line_graph: LineGraph, normalization: str = "symmetric") -> sp.csr_matrix:
    """Normalized propagation matrix S; rows of isolated nodes stay zero."""
    deg = line_graph.degrees.astype(float)
    safe = np.where(deg > 0, deg, 1.0)
    if normalization == "symmetric":
        d = sp.diags(1.0 / np.sqrt(safe))
        s = d @ line_graph.adjacency @ d
    elif normalization == "row":
        s = sp.diags(1.0 / safe) @ line_graph.adjacency
    else:
        raise ContractError(f"unknown normalization {normalization!r}")
    return s.tocsr()


def normalize_and_uncertainty(geff: np.ndarray, y: np.ndarray):
    """Min-max normalize scores to Z and compute residual uncertainty B = |Y - Z|.

    All-equal scores degenerate to Z = 0 (no evidence of hardness).
    """
    geff = np.asarray(geff, dtype=float)
    y = np.asarray(y, dtype=float)
    if geff.size == 0:
        raise ContractError("need at least one edge")
    lo, hi = geff.min(), geff.max()
    if hi > lo:
        z = (geff - lo) / (hi - lo)
    else:
        z = np.zeros_like(geff)
    return z, np.abs(y - z)


def _iterate(base: np.ndarray, apply_s, gamma: float, tolerance: float,
             max_iters: int, hold_mask=None):
    """Fixpoint of x_{t+1} = (1-gamma) * base + gamma * S x_t."""
    x = base.astype(float).copy()
    for it in range(max_iters):
        nxt = (1.0 - gamma) * base + gamma * apply_s(x)
        if hold_mask is not None:
            nxt[hold_mask] = base[hold_mask]
        residual = float(np.max(np.abs(nxt - x))) if len(x) else 0.0
        x = nxt
        if residual < tolerance:
            return x, it + 1
    raise ConvergenceError(
        f"propagation did not converge in {max_iters} iterations (residual {residual:.3e})",
        residual=residual, iterations=max_iters)


def propagate_uncertainty_linegraph(b: np.ndarray, line_graph: LineGraph,
                                    config: PropagationConfig) -> np.ndarray:
    """Smooth uncertainty over the explicit line graph."""
    b = np.asarray(b, dtype=float)
    if len(b) != line_graph.n_nodes:
        raise ContractError("uncertainty vector length must match line-graph size")
    s = smoothing_matrix(line_graph, config.normalization)
    out, _ = _iterate(b, lambda x: s @ x, config.gamma, config.tolerance, config.max_iters)
    return out


def _edge_kernel(graph: BipartiteGraph, config: PropagationConfig, z=None):
    """Matrix-free line-graph operator over the original edges."""
    eu, ev = graph.edge_user, graph.edge_item
    deg_u = np.bincount(eu, minlength=graph.n_users)
    deg_v = np.bincount(ev, minlength=graph.n_items)
    denom = (deg_u[eu] + deg_v[ev] - 2).astype(float)
    iso = denom <= 0
    safe = np.where(iso, 1.0, denom)
    if config.variant == "self_excl_z":
        if z is None:
            raise ContractError("variant self_excl_z needs the normalized scores z")
        z = np.asarray(z, dtype=float)

    def apply(x):
        m_u = np.bincount(eu, weights=x, minlength=graph.n_users)
        m_v = np.bincount(ev, weights=x, minlength=graph.n_items)
        excl = x if config.variant == "self_excl_bt" else z
        return (m_u[eu] + m_v[ev] - 2.0 * excl) / safe

    return apply, iso


def propagate_uncertainty_edges(graph: BipartiteGraph, b: np.ndarray,
                                config: PropagationConfig, z=None) -> np.ndarray:
    """Smooth uncertainty with the scalable edge kernel.

    Equals line-graph propagation with row normalization when the
    self-exclusion term is B_n^t. Edges without line-graph neighbors are
    held fixed at their input value.
    """
    b = np.asarray(b, dtype=float)
    if len(b) != graph.n_edges:
        raise ContractError("uncertainty vector length must match edge count")
    apply_s, iso = _edge_kernel(graph, config, z=z)
    out, _ = _iterate(b, apply_s, config.gamma, config.tolerance,
                      config.max_iters, hold_mask=iso)
    return out


def correct_scores(y: np.ndarray, bhat: np.ndarray) -> np.ndarray:
    """Reconstruct smoothed scores: Z_hat = Y + (-1)^Y * B_hat."""
    y = np.asarray(y, dtype=float)
    bhat = np.asarray(bhat, dtype=float)
    return y + np.where(y > 0.5, -1.0, 1.0) * bhat


def propagate_scores(zhat: np.ndarray, carrier, config: PropagationConfig) -> np.ndarray:
    """Propagate corrected scores; carrier is a LineGraph or BipartiteGraph."""
    zhat = np.asarray(zhat, dtype=float)
    if isinstance(carrier, LineGraph):
        s = smoothing_matrix(carrier, config.normalization)
        out, _ = _iterate(zhat, lambda x: s @ x, config.gamma,
                          config.tolerance, config.max_iters)
        return out
    if isinstance(carrier, BipartiteGraph):
        apply_s, iso = _edge_kernel(carrier, config, z=zhat)
        out, _ = _iterate(zhat, apply_s, config.gamma, config.tolerance,
                          config.max_iters, hold_mask=iso)
        return out
    raise ContractError("carrier must be a LineGraph or BipartiteGraph")
