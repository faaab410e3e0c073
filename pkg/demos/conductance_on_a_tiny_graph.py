"""Effective conductance on a five-interaction toy graph.

Two users share item v2, user u1 also clicked v1, and user u2 has two
unclicked impressions: v1 (reachable through the positive graph) and v3
(an item nobody clicked). The only path from u2 to v1 runs through three
positive edges in series, so the effective resistance is 3 and the
conductance 1/3; v3 is disconnected and gets conductance 0.
"""

import numpy as np

from hardsample import (Dataset, WalkConfig, build_graph,
                        effective_conductance, hardness_ec,
                        positive_subgraph)

records = [
    ("u1", "v1", 1),
    ("u1", "v2", 1),
    ("u2", "v2", 1),
    ("u2", "v1", 0),
    ("u2", "v3", 0),
]

dataset = Dataset.from_tuples(records)
graph = build_graph(dataset)
pos = positive_subgraph(graph)

print(f"{graph.n_users} users, {graph.n_items} items, {graph.n_edges} edges "
      f"({pos.n_edges} positive)")

exact = effective_conductance(pos, graph, mode="exact")
mc, stderr = effective_conductance(pos, graph, mode="mc",
                                   config=WalkConfig(tolerance=0.01, seed=0),
                                   return_stderr=True)
hardness = hardness_ec(graph)

print(f"\n{'user':<5}{'item':<5}{'label':>6}{'exact':>9}{'mc':>9}"
      f"{'stderr':>9}{'hardness':>10}")
for e in range(graph.n_edges):
    u = graph.user_tokens[graph.edge_user[e]]
    v = graph.item_tokens[graph.edge_item[e]]
    y = graph.edge_label[e]
    print(f"{u:<5}{v:<5}{y:>6}{exact[e]:>9.4f}{mc[e]:>9.4f}"
          f"{stderr[e]:>9.4f}{hardness[e]:>10.4f}")

e_hard = graph.edge_lookup()[("u2", "v1")]
assert np.isclose(exact[e_hard], 1.0 / 3.0)
print("\nThe negative (u2, v1) sits close to the positive structure, so it "
      "is the hard one;\n(u2, v3) is unreachable and scores zero.")
