"""Model-agnostic hard-negative subsampling via effective conductance."""

from .graph import (BipartiteGraph, Dataset, InteractionRecord, build_graph,
                    connected_components, positive_subgraph)
from .conductance import (CommuteEstimate, ExactResistance, INFINITE, WalkConfig,
                          commute_time_mc, effective_conductance, exact_resistance,
                          hardness_ec, hardness_er)
from .propagation import (LineGraph, PropagationConfig, build_line_graph,
                          correct_scores, expected_line_edge_count,
                          normalize_and_uncertainty, propagate_scores,
                          propagate_uncertainty_edges,
                          propagate_uncertainty_linegraph, smoothing_matrix)
from .sampling import (RateConfig, SamplingPlan, ensemble_max, ensemble_mean,
                       ensemble_prod, expand_to_records, flip_rates,
                       ingest_pilot_scores, rates_from_hardness, subsample,
                       tune_rates)
from .glm import GlmModel, TrainConfig, corrected_loss, fit, pilot_scores
from .metrics import ace, auc, ndcg_at_k
from .synth import SyntheticSpec, generate_synthetic
from .scores import ScoreVector

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
