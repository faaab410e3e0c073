"""Effective resistance / conductance and graph-based hardness scores.

Exact values come from the dense Laplacian pseudoinverse; the Monte-Carlo
path estimates commute times with simple random walks and converts them
via G_eff(u, v) = 2|E| / comm(u, v), where |E| counts the edges of the
walk's component (the identity only holds component-wise on disconnected
graphs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .graph import BipartiteGraph, connected_components, positive_subgraph
from .walks import commute_walks

INFINITE = math.inf

DENSE_NODE_LIMIT = 2000


@dataclass
class WalkConfig:
    tolerance: float = 0.1       # stop when the running-mean update drops below this
    max_walks: int = 100_000
    min_walks: int = 16
    seed: int = 0


@dataclass
class CommuteEstimate:
    value: float
    stderr: float
    n_walks: int


def laplacian(graph: BipartiteGraph) -> np.ndarray:
    """Dense unit-conductance Laplacian over the combined node space."""
    n = graph.n_nodes
    lap = np.zeros((n, n))
    u, v = graph.edge_nodes()
    for a, b in zip(u, v):
        lap[a, a] += 1.0
        lap[b, b] += 1.0
        lap[a, b] -= 1.0
        lap[b, a] -= 1.0
    return lap


class ExactResistance:
    """Effective resistance queries backed by one pseudoinverse solve."""

    def __init__(self, graph: BipartiteGraph):
        if graph.n_nodes > DENSE_NODE_LIMIT:
            raise ContractError(
                f"dense solver limited to {DENSE_NODE_LIMIT} nodes; graph has {graph.n_nodes}")
        self.graph = graph
        self.components = connected_components(graph)
        self._lpinv = np.linalg.pinv(laplacian(graph), hermitian=True)

    def resistance(self, u: int, v: int) -> float:
        n = self.graph.n_nodes
        if not (0 <= u < n and 0 <= v < n):
            raise ContractError(f"node out of range: ({u}, {v}) with {n} nodes")
        if self.components[u] != self.components[v]:
            return INFINITE
        if u == v:
            return 0.0
        lp = self._lpinv
        return float(lp[u, u] + lp[v, v] - 2.0 * lp[u, v])

    def resistance_many(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        lp = self._lpinv
        r = lp[us, us] + lp[vs, vs] - 2.0 * lp[us, vs]
        r = np.where(self.components[us] == self.components[vs], r, INFINITE)
        return np.where(us == vs, 0.0, r)


def exact_resistance(pos_graph: BipartiteGraph, u: int, v: int) -> float:
    """Effective resistance between nodes u, v; INFINITE across components."""
    return ExactResistance(pos_graph).resistance(u, v)


def _edge_seed(seed: int, edge: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(edge)]).generate_state(1)[0])


def commute_time_mc(pos_graph: BipartiteGraph, u: int, v: int,
                    config: WalkConfig | None = None) -> CommuteEstimate:
    """Monte-Carlo commute time between two connected nodes.

    Runs simple-random-walk round trips u -> v -> u and stops when the
    update of the running mean falls below the tolerance (after a small
    minimum number of walks) or the walk budget is exhausted.
    """
    config = config or WalkConfig()
    if u == v:
        raise ContractError("commute time requires distinct endpoints")
    comp = connected_components(pos_graph)
    deg = pos_graph.node_degrees()
    if deg[u] == 0 or deg[v] == 0 or comp[u] != comp[v]:
        raise ContractError(f"nodes {u} and {v} are not connected; commute time is infinite")
    adj = pos_graph.adjacency()
    pair_seed = int(np.random.SeedSequence([int(config.seed), int(u), int(v)]).generate_state(1)[0])
    mean, stderr, n = commute_walks(
        adj.indptr.astype(np.int64), adj.indices.astype(np.int64),
        int(u), int(v), float(config.tolerance),
        int(config.max_walks), int(config.min_walks), pair_seed)
    return CommuteEstimate(mean, stderr, n)


def _component_edge_counts(pos_graph: BipartiteGraph, comp: np.ndarray) -> np.ndarray:
    """Number of positive edges per component label."""
    u, v = pos_graph.edge_nodes()
    counts = np.zeros(comp.max() + 1 if comp.size else 1, dtype=np.int64)
    np.add.at(counts, comp[u], 1)
    return counts


def effective_conductance(pos_graph: BipartiteGraph, graph: BipartiteGraph,
                          mode: str = "exact", config: WalkConfig | None = None,
                          return_stderr: bool = False):
    """Effective conductance for every edge of the full graph.

    Conductance is measured on the unit-conductance positive subgraph;
    endpoints disconnected there get 0. mode is "exact" (pseudoinverse)
    or "mc" (random-walk commute times).
    """
    if mode not in ("exact", "mc"):
        raise ContractError(f"unknown conductance mode {mode!r}")
    config = config or WalkConfig()
    us, vs = graph.edge_nodes()
    comp = connected_components(pos_graph)
    connected = comp[us] == comp[vs]
    deg = pos_graph.node_degrees()
    connected &= (deg[us] > 0) & (deg[vs] > 0)
    geff = np.zeros(graph.n_edges)
    stderr = np.zeros(graph.n_edges)
    if mode == "exact":
        solver = ExactResistance(pos_graph)
        r = solver.resistance_many(us, vs)
        with np.errstate(divide="ignore"):
            geff = np.where(connected, 1.0 / r, 0.0)
    else:
        adj = pos_graph.adjacency()
        indptr = adj.indptr.astype(np.int64)
        indices = adj.indices.astype(np.int64)
        e_comp = _component_edge_counts(pos_graph, comp)
        for e in np.nonzero(connected)[0]:
            mean, se, _ = commute_walks(
                indptr, indices, int(us[e]), int(vs[e]),
                float(config.tolerance), int(config.max_walks),
                int(config.min_walks), _edge_seed(config.seed, e))
            two_e = 2.0 * e_comp[comp[us[e]]]
            geff[e] = two_e / mean
            # delta method: sd(2E/comm) ~= 2E * sd(comm) / comm^2
            stderr[e] = two_e * se / mean ** 2
    if return_stderr:
        return geff, stderr
    return geff


def hardness_ec(graph: BipartiteGraph, mode: str = "exact",
                config: WalkConfig | None = None) -> np.ndarray:
    """Effective-conductance hardness h = G_eff - G per edge (clipped at 0)."""
    pos = positive_subgraph(graph)
    geff = effective_conductance(pos, graph, mode=mode, config=config)
    return np.maximum(geff - graph.edge_label, 0.0)


def hardness_er(graph: BipartiteGraph) -> np.ndarray:
    """Effective-resistance baseline hardness on the full unit-resistance graph."""
    solver = ExactResistance(graph)
    us, vs = graph.edge_nodes()
    return np.asarray(solver.resistance_many(us, vs), dtype=float)
