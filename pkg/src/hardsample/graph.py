"""Bipartite user-item interaction graph.

Builds a deduplicated bipartite graph from interaction records. Duplicate
(user, item) pairs collapse into a single edge whose label is 1 if any of
the duplicates is positive; every record keeps a pointer to its edge so
duplicates share one subsampling rate downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _cc

from .errors import ContractError


@dataclass(frozen=True)
class InteractionRecord:
    user: str
    item: str
    label: int
    context: Optional[tuple] = None


class Dataset:
    """Columnar store of interaction records."""

    def __init__(self, users, items, labels, context=None):
        self.users = np.asarray(users, dtype=object)
        self.items = np.asarray(items, dtype=object)
        self.labels = np.asarray(labels, dtype=np.int8)
        if self.users.shape != self.items.shape or self.users.shape != self.labels.shape:
            raise ContractError("users, items and labels must have equal length")
        bad = np.nonzero((self.labels != 0) & (self.labels != 1))[0]
        if bad.size:
            raise ContractError(f"label must be 0 or 1; first bad row: {bad[0]}")
        if context is not None:
            context = np.asarray(context, dtype=float)
            if context.ndim != 2 or context.shape[0] != len(self.users):
                raise ContractError("context must be a (n_records, dim) array")
        self.context = context

    def __len__(self):
        return len(self.users)

    @property
    def n_records(self):
        return len(self.users)

    @property
    def n_pos(self):
        return int(self.labels.sum())

    @property
    def n_neg(self):
        return int(len(self.labels) - self.labels.sum())

    @property
    def context_dim(self):
        return 0 if self.context is None else self.context.shape[1]

    def record(self, n) -> InteractionRecord:
        ctx = None if self.context is None else tuple(self.context[n])
        return InteractionRecord(self.users[n], self.items[n], int(self.labels[n]), ctx)

    @classmethod
    def from_records(cls, records: Iterable[InteractionRecord]) -> "Dataset":
        records = list(records)
        users = [r.user for r in records]
        items = [r.item for r in records]
        labels = [r.label for r in records]
        ctxs = [r.context for r in records]
        context = None
        if records and ctxs[0] is not None:
            context = np.array(ctxs, dtype=float)
        return cls(users, items, labels, context)

    @classmethod
    def from_tuples(cls, tuples: Sequence[tuple]) -> "Dataset":
        """Convenience for tests: tuples of (user, item, label)."""
        return cls([t[0] for t in tuples], [t[1] for t in tuples], [t[2] for t in tuples])


class BipartiteGraph:
    """Deduplicated bipartite graph with dense node ids and CSR adjacency.

    Node ids follow first-appearance order in the input stream. In the
    combined node space users occupy [0, M) and items [M, M+Q).
    """

    def __init__(self, user_tokens, item_tokens, edge_user, edge_item,
                 edge_label, edge_mult, edge_of_record=None):
        self.user_tokens = list(user_tokens)
        self.item_tokens = list(item_tokens)
        self.user_index = {t: i for i, t in enumerate(self.user_tokens)}
        self.item_index = {t: j for j, t in enumerate(self.item_tokens)}
        self.edge_user = np.asarray(edge_user, dtype=np.int64)
        self.edge_item = np.asarray(edge_item, dtype=np.int64)
        self.edge_label = np.asarray(edge_label, dtype=np.int8)
        self.edge_mult = np.asarray(edge_mult, dtype=np.int64)
        self.edge_of_record = (None if edge_of_record is None
                               else np.asarray(edge_of_record, dtype=np.int64))
        self._edge_lookup = None
        self._adj = None

    # -- sizes ---------------------------------------------------------
    @property
    def n_users(self):
        return len(self.user_tokens)

    @property
    def n_items(self):
        return len(self.item_tokens)

    @property
    def n_nodes(self):
        return self.n_users + self.n_items

    @property
    def n_edges(self):
        return len(self.edge_user)

    # -- node id helpers -----------------------------------------------
    def user_node(self, i):
        return int(i)

    def item_node(self, j):
        return self.n_users + int(j)

    def edge_nodes(self):
        """(u_node, v_node) arrays per edge in combined node space."""
        return self.edge_user, self.n_users + self.edge_item

    # -- adjacency -----------------------------------------------------
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency over the combined node space."""
        if self._adj is None:
            u, v = self.edge_nodes()
            n = self.n_nodes
            data = np.ones(len(u))
            a = sp.coo_matrix((data, (u, v)), shape=(n, n))
            self._adj = (a + a.T).tocsr()
        return self._adj

    def node_degrees(self) -> np.ndarray:
        u, v = self.edge_nodes()
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        np.add.at(deg, u, 1)
        np.add.at(deg, v, 1)
        return deg

    def edge_lookup(self):
        """Map (user_token, item_token) -> edge index."""
        if self._edge_lookup is None:
            self._edge_lookup = {
                (self.user_tokens[ui], self.item_tokens[vi]): e
                for e, (ui, vi) in enumerate(zip(self.edge_user, self.edge_item))
            }
        return self._edge_lookup

    def map_records(self, dataset: Dataset) -> np.ndarray:
        """Record index -> edge index for a dataset over the same pairs."""
        lookup = self.edge_lookup()
        out = np.empty(len(dataset), dtype=np.int64)
        for n, (u, v) in enumerate(zip(dataset.users, dataset.items)):
            try:
                out[n] = lookup[(u, v)]
            except KeyError:
                raise ContractError(f"record {n}: pair ({u}, {v}) not in graph")
        return out


def build_graph(dataset: Dataset) -> BipartiteGraph:
    """Build the deduplicated bipartite graph from a dataset.

    One edge per distinct (user, item) pair; the edge label is 1 iff any
    duplicate record for that pair is positive.
    """
    if len(dataset) == 0:
        raise ContractError("cannot build a graph from an empty dataset")
    user_index, item_index = {}, {}
    user_tokens, item_tokens = [], []
    pair_index = {}
    edge_user, edge_item, edge_label, edge_mult = [], [], [], []
    edge_of_record = np.empty(len(dataset), dtype=np.int64)
    for n in range(len(dataset)):
        u, v, y = dataset.users[n], dataset.items[n], int(dataset.labels[n])
        ui = user_index.get(u)
        if ui is None:
            ui = user_index[u] = len(user_tokens)
            user_tokens.append(u)
        vi = item_index.get(v)
        if vi is None:
            vi = item_index[v] = len(item_tokens)
            item_tokens.append(v)
        e = pair_index.get((ui, vi))
        if e is None:
            e = pair_index[(ui, vi)] = len(edge_user)
            edge_user.append(ui)
            edge_item.append(vi)
            edge_label.append(y)
            edge_mult.append(1)
        else:
            edge_label[e] = max(edge_label[e], y)
            edge_mult[e] += 1
        edge_of_record[n] = e
    return BipartiteGraph(user_tokens, item_tokens, edge_user, edge_item,
                          edge_label, edge_mult, edge_of_record)


def positive_subgraph(graph: BipartiteGraph) -> BipartiteGraph:
    """Subgraph of label-1 edges (unit conductance); node index preserved."""
    keep = graph.edge_label == 1
    return BipartiteGraph(graph.user_tokens, graph.item_tokens,
                          graph.edge_user[keep], graph.edge_item[keep],
                          graph.edge_label[keep], graph.edge_mult[keep])


def connected_components(graph: BipartiteGraph) -> np.ndarray:
    """Component label per node in the combined node space."""
    if graph.n_edges == 0:
        return np.arange(graph.n_nodes)
    _, labels = _cc(graph.adjacency(), directed=False)
    return labels
