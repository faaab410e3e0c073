"""Factorized generalized logistic model with log-odds correction.

g(x) = <user_emb, item_emb> + <w, context> + bias; the corrected training
objective shifts the logit by -log(pi) per record, which removes the bias
introduced by non-uniform negative subsampling. The reported loss is the
exact negative log-likelihood under the shifted logits.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DivergenceError
from .graph import BipartiteGraph, Dataset
from .sampling import SamplingPlan


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 15
    batch_size: int = 1024
    l2: float = 1e-6
    dim: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs <= 0:
            raise ContractError("learning rate and epochs must be positive")


def _sigmoid(z):
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z):
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


class GlmModel:
    """Embedding-factorized logistic model over graph id spaces.

    The last embedding row of each table is a shared cold-start slot for
    ids unseen at training time.
    """

    def __init__(self, user_emb, item_emb, context_w, bias,
                 user_index, item_index):
        self.user_emb = np.asarray(user_emb, dtype=float)
        self.item_emb = np.asarray(item_emb, dtype=float)
        self.context_w = np.asarray(context_w, dtype=float)
        self.bias = float(bias)
        self.user_index = dict(user_index)
        self.item_index = dict(item_index)
        if self.user_emb.shape[1] != self.item_emb.shape[1]:
            raise ContractError("embedding dimensions must agree")

    @property
    def dim(self):
        return self.user_emb.shape[1]

    @classmethod
    def init(cls, graph: BipartiteGraph, dim: int, context_dim: int = 0,
             seed: int = 0, scale: float = 0.1) -> "GlmModel":
        if dim < 1:
            raise ContractError("embedding dimension must be >= 1")
        rng = np.random.default_rng(seed)
        u = rng.normal(0.0, scale, size=(graph.n_users + 1, dim))
        v = rng.normal(0.0, scale, size=(graph.n_items + 1, dim))
        return cls(u, v, np.zeros(context_dim), 0.0,
                   graph.user_index, graph.item_index)

    @classmethod
    def zeros(cls, graph: BipartiteGraph, dim: int, context_dim: int = 0) -> "GlmModel":
        return cls(np.zeros((graph.n_users + 1, dim)),
                   np.zeros((graph.n_items + 1, dim)),
                   np.zeros(context_dim), 0.0,
                   graph.user_index, graph.item_index)

    # -- id mapping ------------------------------------------------------
    def user_rows(self, users) -> np.ndarray:
        cold = self.user_emb.shape[0] - 1
        return np.fromiter((self.user_index.get(u, cold) for u in users),
                           dtype=np.int64, count=len(users))

    def item_rows(self, items) -> np.ndarray:
        cold = self.item_emb.shape[0] - 1
        return np.fromiter((self.item_index.get(v, cold) for v in items),
                           dtype=np.int64, count=len(items))

    # -- forward ---------------------------------------------------------
    def logits_rows(self, u_rows, v_rows, context=None) -> np.ndarray:
        g = np.einsum("nd,nd->n", self.user_emb[u_rows], self.item_emb[v_rows])
        if context is not None and self.context_w.size:
            g = g + context @ self.context_w
        return g + self.bias

    def predict(self, dataset: Dataset) -> np.ndarray:
        """Predicted click probability per record."""
        u = self.user_rows(dataset.users)
        v = self.item_rows(dataset.items)
        return _sigmoid(self.logits_rows(u, v, dataset.context))

    # -- persistence -------------------------------------------------------
    def save(self, path):
        users = list(self.user_index.keys())
        items = list(self.item_index.keys())
        np.savez(path,
                 user_emb=self.user_emb, item_emb=self.item_emb,
                 context_w=self.context_w, bias=np.array(self.bias),
                 users=np.array(users, dtype=object),
                 items=np.array(items, dtype=object))
        manifest = {
            "dim": int(self.dim),
            "n_users": len(users),
            "n_items": len(items),
            "context_dim": int(self.context_w.size),
            "user_ids_sha256": hashlib.sha256("\n".join(map(str, users)).encode()).hexdigest(),
            "item_ids_sha256": hashlib.sha256("\n".join(map(str, items)).encode()).hexdigest(),
        }
        with open(str(path) + ".manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2)

    @classmethod
    def load(cls, path) -> "GlmModel":
        data = np.load(path, allow_pickle=True)
        users = list(data["users"])
        items = list(data["items"])
        return cls(data["user_emb"], data["item_emb"], data["context_w"],
                   float(data["bias"]),
                   {u: i for i, u in enumerate(users)},
                   {v: j for j, v in enumerate(items)})


def corrected_loss_rows(model: GlmModel, u_rows, v_rows, context, y, ell,
                        with_grads: bool = False):
    """Exact negative log-likelihood with logits shifted by -ell.

    Reduces to plain logistic loss when pi = 1 (ell = 0). Returns the
    summed loss; with_grads also returns gradients keyed by parameter.
    """
    y = np.asarray(y, dtype=float)
    ell = np.asarray(ell, dtype=float)
    if not np.all(np.isfinite(ell)):
        raise ContractError("log-rate is undefined (a retained record has pi = 0)")
    z = model.logits_rows(u_rows, v_rows, context) - ell
    loss = float(np.sum(_softplus(z) - y * z))
    if not with_grads:
        return loss
    r = _sigmoid(z) - y
    g_user = np.zeros_like(model.user_emb)
    g_item = np.zeros_like(model.item_emb)
    np.add.at(g_user, u_rows, r[:, None] * model.item_emb[v_rows])
    np.add.at(g_item, v_rows, r[:, None] * model.user_emb[u_rows])
    g_ctx = context.T @ r if (context is not None and model.context_w.size) \
        else np.zeros_like(model.context_w)
    grads = {"user_emb": g_user, "item_emb": g_item,
             "context_w": g_ctx, "bias": float(r.sum())}
    return loss, grads


def corrected_loss(model: GlmModel, dataset: Dataset, plan: SamplingPlan) -> float:
    """Corrected loss summed over the plan's retained records."""
    keep = plan.retained
    u = model.user_rows(dataset.users[keep])
    v = model.item_rows(dataset.items[keep])
    ctx = None if dataset.context is None else dataset.context[keep]
    return corrected_loss_rows(model, u, v, ctx, dataset.labels[keep],
                               plan.log_pi[keep])


def fit(dataset: Dataset, plan: SamplingPlan, graph: BipartiteGraph,
        config: TrainConfig, correction: bool = True) -> GlmModel:
    """Train with Adam on the retained records.

    correction=False forces ell = 0 (plain logistic training on the
    subsampled data), which is the biased baseline.
    """
    keep = plan.retained
    if keep.size == 0:
        raise ContractError("sampling plan retained no records")
    ctx_dim = dataset.context_dim
    model = GlmModel.init(graph, config.dim, ctx_dim, seed=config.seed)
    u_all = model.user_rows(dataset.users[keep])
    v_all = model.item_rows(dataset.items[keep])
    y_all = dataset.labels[keep].astype(float)
    ctx_all = None if dataset.context is None else dataset.context[keep]
    ell_all = plan.log_pi[keep] if correction else np.zeros(keep.size)

    params = {"user_emb": model.user_emb, "item_emb": model.item_emb,
              "context_w": model.context_w}
    m_state = {k: np.zeros_like(p) for k, p in params.items()}
    v_state = {k: np.zeros_like(p) for k, p in params.items()}
    m_bias = v_bias = 0.0
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    rng = np.random.default_rng(config.seed)
    n = keep.size
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, config.batch_size):
            batch = order[lo:lo + config.batch_size]
            ctx_b = None if ctx_all is None else ctx_all[batch]
            loss, grads = corrected_loss_rows(
                model, u_all[batch], v_all[batch], ctx_b,
                y_all[batch], ell_all[batch], with_grads=True)
            if not np.isfinite(loss):
                raise DivergenceError(
                    "training loss is not finite; try a smaller learning rate")
            step += 1
            scale = 1.0 / len(batch)
            for key, p in params.items():
                g = grads[key] * scale + config.l2 * p
                m_state[key] = beta1 * m_state[key] + (1 - beta1) * g
                v_state[key] = beta2 * v_state[key] + (1 - beta2) * g * g
                mhat = m_state[key] / (1 - beta1 ** step)
                vhat = v_state[key] / (1 - beta2 ** step)
                p -= config.learning_rate * mhat / (np.sqrt(vhat) + eps)
            gb = grads["bias"] * scale
            m_bias = beta1 * m_bias + (1 - beta1) * gb
            v_bias = beta2 * v_bias + (1 - beta2) * gb * gb
            model.bias -= config.learning_rate * (m_bias / (1 - beta1 ** step)) / \
                (np.sqrt(v_bias / (1 - beta2 ** step)) + eps)
    return model


def pilot_scores(model: GlmModel, dataset: Dataset, graph: BipartiteGraph) -> np.ndarray:
    """Model-based hardness per edge: predicted probability, duplicates averaged."""
    preds = model.predict(dataset)
    edge_of_record = (graph.edge_of_record if graph.edge_of_record is not None
                      else graph.map_records(dataset))
    sums = np.bincount(edge_of_record, weights=preds, minlength=graph.n_edges)
    counts = np.bincount(edge_of_record, minlength=graph.n_edges)
    if np.any(counts == 0):
        raise ContractError("dataset does not cover every edge of the graph")
    return sums / counts
