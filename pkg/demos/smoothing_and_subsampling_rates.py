"""From raw conductance to smoothed scores to subsampling rates.

Generates a planted-community interaction log, scores every edge by
effective conductance, smooths the scores by propagation on the line
graph, and turns the resulting hardness into Bernoulli keep-rates whose
mean over negative records is exactly the target budget.
"""

import numpy as np

from hardsample import (PropagationConfig, RateConfig, SyntheticSpec,
                        build_graph, correct_scores, generate_synthetic,
                        hardness_ec, normalize_and_uncertainty,
                        positive_subgraph, propagate_uncertainty_edges,
                        rates_from_hardness, subsample)
from hardsample.conductance import effective_conductance
from hardsample.sampling import expand_to_records

spec = SyntheticSpec(n_users=120, n_items=60, n_communities=3,
                     within_rate=0.15, cross_rate=0.002,
                     negatives_per_positive=4.0, seed=7)
dataset, user_comm, item_comm = generate_synthetic(spec)
graph = build_graph(dataset)
print(f"{len(dataset)} records -> {graph.n_edges} distinct edges "
      f"({int(graph.edge_label.sum())} positive)")

# raw conductance, min-max normalized, and its label disagreement
geff = effective_conductance(positive_subgraph(graph), graph)
z, b = normalize_and_uncertainty(geff, graph.edge_label)

# smooth the disagreement over edges that share a user or an item
config = PropagationConfig(gamma=0.2, tolerance=1e-10)
b_hat = propagate_uncertainty_edges(graph, b, config)
z_hat = correct_scores(graph.edge_label, b_hat)
print(f"uncertainty before/after smoothing: "
      f"{b.mean():.4f} -> {b_hat.mean():.4f} (mean), "
      f"{b.std():.4f} -> {b_hat.std():.4f} (std)")

# rates from the unsmoothed hardness, tuned to keep 25% of negatives
h = expand_to_records(graph, hardness_ec(graph))
neg = dataset.labels == 0
rate_config = RateConfig(alpha=0.25, rho_min=0.05)
rates = rates_from_hardness(h, neg, rate_config)
print(f"negative-mean rate {rates[neg].mean():.6f} "
      f"(target {rate_config.alpha}), range "
      f"[{rates.min():.3f}, {rates.max():.3f}]")

plan = subsample(dataset, rates, seed=11)
kept = plan.retained
print(f"kept {kept.size} of {len(dataset)} records "
      f"({int(dataset.labels[kept].sum())} positives, all of them)")

# hard negatives (same community, no interaction) should be kept more often;
# synthetic tokens are "u{i}"/"v{j}" with i, j indexing the community arrays
u_ids = [int(u[1:]) for u in dataset.users[neg]]
v_ids = [int(v[1:]) for v in dataset.items[neg]]
within = user_comm[u_ids] == item_comm[v_ids]
print(f"mean rate within-community negatives {rates[neg][within].mean():.3f} "
      f"vs cross-community {rates[neg][~within].mean():.3f}")
