import numpy as np
import pytest

from hardsample import (Dataset, build_graph, connected_components,
                        positive_subgraph)
from hardsample.errors import ContractError

from conftest import REFERENCE_RECORDS, random_bipartite_dataset


def test_duplicate_pairs_collapse_with_any_positive_rule():
    graph = build_graph(Dataset.from_tuples([("u1", "v1", 1), ("u1", "v1", 0)]))
    assert graph.n_edges == 1
    assert graph.edge_label[0] == 1
    assert graph.edge_mult[0] == 2


def test_single_negative_pair():
    graph = build_graph(Dataset.from_tuples([("u1", "v1", 0)]))
    assert graph.n_edges == 1
    assert graph.edge_label[0] == 0


def test_reference_topology(reference_graph):
    assert reference_graph.n_users == 2
    assert reference_graph.n_items == 3
    assert reference_graph.n_edges == 5


def test_empty_dataset_rejected():
    with pytest.raises(ContractError):
        build_graph(Dataset([], [], []))


def test_malformed_label_rejected_with_row():
    with pytest.raises(ContractError, match="row: 1"):
        Dataset(["u1", "u2"], ["v1", "v2"], [0, 2])


def test_positive_subgraph_reference(reference_graph):
    pos = positive_subgraph(reference_graph)
    assert pos.n_edges == 3
    kept = {(pos.user_tokens[u], pos.item_tokens[v])
            for u, v in zip(pos.edge_user, pos.edge_item)}
    assert kept == {("u1", "v1"), ("u1", "v2"), ("u2", "v2")}
    assert pos.n_users == reference_graph.n_users
    assert pos.n_items == reference_graph.n_items


def test_positive_subgraph_all_negative():
    graph = build_graph(Dataset.from_tuples([("u1", "v1", 0), ("u2", "v2", 0)]))
    assert positive_subgraph(graph).n_edges == 0


def test_positive_subgraph_all_positive_identity():
    graph = build_graph(Dataset.from_tuples([("u1", "v1", 1), ("u2", "v2", 1)]))
    pos = positive_subgraph(graph)
    assert pos.n_edges == graph.n_edges
    assert np.array_equal(pos.edge_user, graph.edge_user)


def test_components_reference(reference_graph):
    pos = positive_subgraph(reference_graph)
    labels = connected_components(pos)
    u1, u2 = 0, 1
    v1, v2, v3 = pos.item_node(0), pos.item_node(1), pos.item_node(2)
    assert labels[u1] == labels[u2] == labels[v1] == labels[v2]
    assert labels[v3] != labels[u2]


def test_components_edgeless_graph():
    graph = build_graph(Dataset.from_tuples([("u1", "v1", 0)]))
    pos = positive_subgraph(graph)
    labels = connected_components(pos)
    assert len(set(labels)) == pos.n_nodes


def test_components_complete_bipartite():
    records = [(f"u{i}", f"v{j}", 1) for i in range(3) for j in range(3)]
    graph = build_graph(Dataset.from_tuples(records))
    assert len(set(connected_components(graph))) == 1


def test_handshake_invariant():
    rng = np.random.default_rng(7)
    for _ in range(20):
        graph = build_graph(random_bipartite_dataset(rng))
        deg = graph.node_degrees()
        assert deg[:graph.n_users].sum() == graph.n_edges
        assert deg[graph.n_users:].sum() == graph.n_edges


def test_build_graph_idempotent():
    rng = np.random.default_rng(11)
    dataset = random_bipartite_dataset(rng, n_records=50)
    g1, g2 = build_graph(dataset), build_graph(dataset)
    assert g1.user_tokens == g2.user_tokens
    assert g1.item_tokens == g2.item_tokens
    assert np.array_equal(g1.edge_user, g2.edge_user)
    assert np.array_equal(g1.edge_item, g2.edge_item)
    assert np.array_equal(g1.edge_of_record, g2.edge_of_record)


def test_edge_of_record_resolves_to_matching_endpoints():
    rng = np.random.default_rng(13)
    dataset = random_bipartite_dataset(rng, n_records=60)
    graph = build_graph(dataset)
    for n in range(len(dataset)):
        e = graph.edge_of_record[n]
        assert graph.user_tokens[graph.edge_user[e]] == dataset.users[n]
        assert graph.item_tokens[graph.edge_item[e]] == dataset.items[n]


def test_first_appearance_node_order(reference_graph):
    assert reference_graph.user_tokens == ["u1", "u2"]
    assert reference_graph.item_tokens == ["v1", "v2", "v3"]
