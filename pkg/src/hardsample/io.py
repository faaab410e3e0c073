"""File formats: datasets, graphs, score vectors, plans, manifests, configs.

Everything is delimited text (TSV by default) with a header row, plus JSON
sidecars for index data and run manifests.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from pathlib import Path

import numpy as np

from .errors import ContractError
from .graph import BipartiteGraph, Dataset
from .sampling import SamplingPlan
from .scores import ScoreVector

GRAPH_FORMAT_VERSION = 1


# -- datasets -------------------------------------------------------------

def read_dataset_tsv(path, delimiter: str = "\t") -> Dataset:
    """Read records from delimited text: user_id item_id label [context...]."""
    users, items, labels, context = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader, None)
        if header is None or len(header) < 3:
            raise ContractError(
                f"{path}: expected header row with columns user_id, item_id, label")
        n_ctx = len(header) - 3
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ContractError(f"{path}: row {row_no}: expected {len(header)} columns")
            if row[2] not in ("0", "1"):
                raise ContractError(f"{path}: row {row_no}: malformed label {row[2]!r}")
            users.append(row[0])
            items.append(row[1])
            labels.append(int(row[2]))
            if n_ctx:
                try:
                    context.append([float(x) for x in row[3:]])
                except ValueError:
                    raise ContractError(f"{path}: row {row_no}: malformed context value")
    if not users:
        raise ContractError(f"{path}: no records")
    return Dataset(users, items, labels, context if context else None)


def write_dataset_tsv(dataset: Dataset, path, delimiter: str = "\t"):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        ctx_cols = [f"c{i}" for i in range(dataset.context_dim)]
        writer.writerow(["user_id", "item_id", "label"] + ctx_cols)
        for n in range(len(dataset)):
            row = [dataset.users[n], dataset.items[n], int(dataset.labels[n])]
            if dataset.context is not None:
                row += [repr(float(x)) for x in dataset.context[n]]
            writer.writerow(row)


# -- graphs ---------------------------------------------------------------

def save_graph(graph: BipartiteGraph, path):
    """Edge list TSV plus a JSON index sidecar (node tokens in id order)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(["user_id", "item_id", "label", "multiplicity"])
        for e in range(graph.n_edges):
            writer.writerow([graph.user_tokens[graph.edge_user[e]],
                             graph.item_tokens[graph.edge_item[e]],
                             int(graph.edge_label[e]), int(graph.edge_mult[e])])
    sidecar = {"version": GRAPH_FORMAT_VERSION,
               "users": list(map(str, graph.user_tokens)),
               "items": list(map(str, graph.item_tokens))}
    with open(str(path) + ".index.json", "w") as fh:
        json.dump(sidecar, fh)


def load_graph(path) -> BipartiteGraph:
    with open(str(path) + ".index.json") as fh:
        sidecar = json.load(fh)
    if sidecar.get("version") != GRAPH_FORMAT_VERSION:
        raise ContractError(f"{path}: unsupported graph format version")
    user_index = {t: i for i, t in enumerate(sidecar["users"])}
    item_index = {t: j for j, t in enumerate(sidecar["items"])}
    eu, ev, lab, mult = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader)
        for row in reader:
            eu.append(user_index[row[0]])
            ev.append(item_index[row[1]])
            lab.append(int(row[2]))
            mult.append(int(row[3]))
    return BipartiteGraph(sidecar["users"], sidecar["items"], eu, ev, lab, mult)


# -- score vectors ----------------------------------------------------------

def write_scores(score: ScoreVector, graph: BipartiteGraph, path,
                 manifest: dict | None = None):
    """Scores as TSV (user, item, label, score, tag) plus a manifest sidecar."""
    if len(score) != graph.n_edges:
        raise ContractError("score vector length must match edge count")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(["user_id", "item_id", "label", "score", "tag"])
        for e in range(graph.n_edges):
            writer.writerow([graph.user_tokens[graph.edge_user[e]],
                             graph.item_tokens[graph.edge_item[e]],
                             int(graph.edge_label[e]),
                             repr(float(score.values[e])), score.tag])
    if manifest is not None:
        write_manifest(path, **manifest)


def read_scores(path, graph: BipartiteGraph) -> ScoreVector:
    lookup = graph.edge_lookup()
    values = np.full(graph.n_edges, np.nan)
    tag = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader)
        for row_no, row in enumerate(reader, start=2):
            e = lookup.get((row[0], row[1]))
            if e is None:
                raise ContractError(
                    f"{path}: row {row_no}: pair ({row[0]}, {row[1]}) not in graph")
            values[e] = float(row[3])
            if tag is None:
                tag = row[4]
            elif tag != row[4]:
                raise ContractError(f"{path}: mixed score tags")
    if np.isnan(values).any():
        raise ContractError(f"{path}: scores missing for some graph edges")
    return ScoreVector(values, tag)


# -- sampling plans ---------------------------------------------------------

def write_plan(dataset: Dataset, plan: SamplingPlan, path,
               retained_only: bool = False):
    """Per-record plan TSV: user, item, label, pi, log_pi, delta."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(["user_id", "item_id", "label", "pi", "log_pi", "delta"])
        for n in range(len(dataset)):
            if retained_only and plan.delta[n] == 0:
                continue
            writer.writerow([dataset.users[n], dataset.items[n],
                             int(dataset.labels[n]),
                             repr(float(plan.pi[n])), repr(float(plan.log_pi[n])),
                             int(plan.delta[n])])


def read_plan(path):
    """Returns (dataset, plan) from a plan TSV."""
    users, items, labels = [], [], []
    pi, log_pi, delta = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader)
        for row in reader:
            users.append(row[0])
            items.append(row[1])
            labels.append(int(row[2]))
            pi.append(float(row[3]))
            log_pi.append(float(row[4]))
            delta.append(int(row[5]))
    dataset = Dataset(users, items, labels)
    plan = SamplingPlan(np.array(pi), np.array(log_pi), np.array(delta, dtype=np.int8))
    return dataset, plan


# -- predictions and metrics -------------------------------------------------

def write_predictions(users, scores, labels, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(["user_id", "score", "label"])
        for u, s, y in zip(users, scores, labels):
            writer.writerow([u, repr(float(s)), int(y)])


def read_predictions(path):
    users, scores, labels = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        next(reader)
        for row in reader:
            users.append(row[0])
            scores.append(float(row[1]))
            labels.append(int(row[2]))
    return np.array(users, dtype=object), np.array(scores), np.array(labels, dtype=np.int8)


def write_metrics(metrics: dict, path):
    """Machine-readable key=value file; returns a text report string."""
    lines = [f"{k} = {v}" for k, v in metrics.items()]
    Path(path).write_text("\n".join(f"{k}={v}" for k, v in metrics.items()) + "\n")
    return "\n".join(lines)


# -- manifests and configs ----------------------------------------------------

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(artifact_path, stage, inputs=(), config=None, seed=None,
                   duration=None):
    manifest = {
        "stage": stage,
        "artifact": str(artifact_path),
        "inputs": [{"path": str(p), "sha256": sha256_file(p)} for p in inputs],
        "config": config or {},
        "seed": seed,
        "duration_seconds": duration,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    with open(str(artifact_path) + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def read_manifest(artifact_path) -> dict:
    with open(str(artifact_path) + ".manifest.json") as fh:
        return json.load(fh)


def parse_config(path) -> dict:
    """Flat key-value config: 'stage.key = value' per line, '#' comments."""
    config = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ContractError(f"{path}: line {line_no}: expected 'key = value'")
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip()
    return config
