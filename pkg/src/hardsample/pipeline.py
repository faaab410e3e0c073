"""Composable pipeline stages over persisted file artifacts.

Each stage reads and writes plain files and records a JSON run manifest
next to every artifact, so stages can be run separately or in one
invocation with identical results.
"""

from __future__ import annotations

import time
from pathlib import Path

import numpy as np

from . import glm, io, sampling
from .conductance import WalkConfig, effective_conductance, hardness_er
from .errors import ContractError
from .graph import BipartiteGraph, Dataset, build_graph, positive_subgraph
from .propagation import (PropagationConfig, build_line_graph, correct_scores,
                          normalize_and_uncertainty, propagate_scores,
                          propagate_uncertainty_edges,
                          propagate_uncertainty_linegraph)
from .scores import ScoreVector
from .synth import SyntheticSpec, generate_synthetic


def _manifest(path, stage, inputs, config, seed, started):
    io.write_manifest(path, stage=stage, inputs=inputs, config=config,
                      seed=seed, duration=round(time.time() - started, 3))


def stage_synth(spec: SyntheticSpec, out_path, communities_path=None):
    started = time.time()
    dataset, user_comm, item_comm = generate_synthetic(spec)
    io.write_dataset_tsv(dataset, out_path)
    if communities_path:
        with open(communities_path, "w") as fh:
            fh.write("node_id\tcommunity\n")
            for i, c in enumerate(user_comm):
                fh.write(f"u{i}\t{int(c)}\n")
            for j, c in enumerate(item_comm):
                fh.write(f"v{j}\t{int(c)}\n")
    _manifest(out_path, "synth", [], vars(spec).copy(), spec.seed, started)
    return dataset


def stage_build_graph(dataset_path, out_path, delimiter: str = "\t"):
    started = time.time()
    dataset = io.read_dataset_tsv(dataset_path, delimiter=delimiter)
    graph = build_graph(dataset)
    io.save_graph(graph, out_path)
    _manifest(out_path, "build-graph", [dataset_path],
              {"delimiter": delimiter}, None, started)
    return graph


def stage_score(graph_path, out_path, method: str = "ec", mode: str = "exact",
                seed: int = 0, tolerance: float = 0.1, max_walks: int = 100_000,
                pilot_scores_path=None, model_path=None, dataset_path=None):
    """Per-edge scores: ec (tag G_eff), er or pilot (tag hardness)."""
    started = time.time()
    graph = io.load_graph(graph_path)
    inputs = [graph_path]
    if method == "ec":
        config = WalkConfig(tolerance=tolerance, max_walks=max_walks, seed=seed)
        geff = effective_conductance(positive_subgraph(graph), graph,
                                     mode=mode, config=config)
        score = ScoreVector(geff, "G_eff")
    elif method == "er":
        score = ScoreVector(hardness_er(graph), "hardness")
    elif method == "pilot":
        if pilot_scores_path is not None:
            values = sampling.ingest_pilot_scores(pilot_scores_path, graph)
            inputs.append(pilot_scores_path)
        elif model_path is not None and dataset_path is not None:
            model = glm.GlmModel.load(model_path)
            dataset = io.read_dataset_tsv(dataset_path)
            g2 = build_graph(dataset)
            if g2.n_edges != graph.n_edges:
                raise ContractError("dataset does not match the graph's edges")
            values = glm.pilot_scores(model, dataset, g2)
            inputs += [model_path, dataset_path]
        else:
            raise ContractError(
                "pilot scoring needs --pilot-scores or --model with --dataset")
        score = ScoreVector(values, "hardness")
    else:
        raise ContractError(f"unknown score method {method!r}")
    io.write_scores(score, graph, out_path)
    _manifest(out_path, "score", inputs,
              {"method": method, "mode": mode, "tolerance": tolerance,
               "max_walks": max_walks}, seed, started)
    return score


def stage_propagate(graph_path, scores_path, out_path, gamma: float,
                    tolerance: float = 1e-8, max_iters: int = 1000,
                    kernel: str = "edge", variant: str = "self_excl_bt",
                    score_propagation: bool = False):
    """Normalize, smooth uncertainty, reconstruct; optional score propagation."""
    started = time.time()
    graph = io.load_graph(graph_path)
    score = io.read_scores(scores_path, graph)
    y = graph.edge_label.astype(float)
    z, b = normalize_and_uncertainty(score.values, y)
    if kernel == "edge":
        config = PropagationConfig(gamma=gamma, tolerance=tolerance,
                                   max_iters=max_iters, normalization="row",
                                   variant=variant)
        bhat = propagate_uncertainty_edges(graph, b, config, z=z)
        zhat = correct_scores(y, bhat)
        if score_propagation:
            zhat = propagate_scores(zhat, graph, config)
    elif kernel == "linegraph":
        config = PropagationConfig(gamma=gamma, tolerance=tolerance,
                                   max_iters=max_iters, normalization="symmetric")
        lg = build_line_graph(graph)
        bhat = propagate_uncertainty_linegraph(b, lg, config)
        zhat = correct_scores(y, bhat)
        if score_propagation:
            zhat = propagate_scores(zhat, lg, config)
    else:
        raise ContractError(f"unknown kernel {kernel!r}")
    zhat = np.clip(zhat, 0.0, None)
    io.write_scores(ScoreVector(zhat, "Z_hat"), graph, out_path)
    _manifest(out_path, "propagate", [graph_path, scores_path],
              {"gamma": gamma, "tolerance": tolerance, "max_iters": max_iters,
               "kernel": kernel, "variant": variant,
               "score_propagation": score_propagation}, None, started)
    return zhat


def _hardness_from_score(score: ScoreVector, labels: np.ndarray) -> np.ndarray:
    if score.tag == "G_eff":
        return np.maximum(score.values - labels, 0.0)
    return score.values


def stage_rates(graph_path, scores_path, dataset_path, out_path,
                alpha: float = 0.2, rho_min: float = 0.1, seed: int = 0):
    """Per-edge subsampling rates; the mean is tuned over negative records."""
    started = time.time()
    graph = io.load_graph(graph_path)
    dataset = io.read_dataset_tsv(dataset_path)
    score = io.read_scores(scores_path, graph)
    h_edge = _hardness_from_score(score, graph.edge_label.astype(float))
    edge_of_record = graph.map_records(dataset)
    h_rec = h_edge[edge_of_record]
    config = sampling.RateConfig(alpha=alpha, rho_min=rho_min, seed=seed)
    rates_rec = sampling.rates_from_hardness(h_rec, dataset.labels == 0, config)
    rates_edge = np.empty(graph.n_edges)
    rates_edge[edge_of_record] = rates_rec
    io.write_scores(ScoreVector(rates_edge, "rate"), graph, out_path)
    _manifest(out_path, "rates", [graph_path, scores_path, dataset_path],
              {"alpha": alpha, "rho_min": rho_min}, seed, started)
    return rates_edge


def stage_ensemble(graph_path, rates_a_path, rates_b_path, dataset_path, out_path,
                   strategy: str = "max", alpha: float = 0.2,
                   rho_prod_min: float = 0.005):
    started = time.time()
    graph = io.load_graph(graph_path)
    dataset = io.read_dataset_tsv(dataset_path)
    pa = io.read_scores(rates_a_path, graph)
    pb = io.read_scores(rates_b_path, graph)
    edge_of_record = graph.map_records(dataset)
    a_rec, b_rec = pa.values[edge_of_record], pb.values[edge_of_record]
    neg = dataset.labels == 0
    config = sampling.RateConfig(alpha=alpha, rho_prod_min=rho_prod_min)
    if strategy == "max":
        out_rec = sampling.ensemble_max(a_rec, b_rec, neg, config)
    elif strategy == "mean":
        out_rec = sampling.ensemble_mean(a_rec, b_rec, neg, config)
    elif strategy == "prod":
        out_rec = sampling.ensemble_prod(a_rec, b_rec, neg, config)
    else:
        raise ContractError(f"unknown ensemble strategy {strategy!r}")
    rates_edge = np.empty(graph.n_edges)
    rates_edge[edge_of_record] = out_rec
    io.write_scores(ScoreVector(rates_edge, "rate"), graph, out_path)
    _manifest(out_path, "ensemble",
              [graph_path, rates_a_path, rates_b_path, dataset_path],
              {"strategy": strategy, "alpha": alpha,
               "rho_prod_min": rho_prod_min}, None, started)
    return rates_edge


def stage_flip(graph_path, major_path, other_path, dataset_path, out_path,
               low_thresh: float = 0.2, high_thresh: float = 0.8,
               alpha: float = 0.2):
    started = time.time()
    graph = io.load_graph(graph_path)
    dataset = io.read_dataset_tsv(dataset_path)
    major = io.read_scores(major_path, graph)
    other = io.read_scores(other_path, graph)
    edge_of_record = graph.map_records(dataset)
    out_rec = sampling.flip_rates(major.values[edge_of_record],
                                  other.values[edge_of_record],
                                  low_thresh, high_thresh,
                                  dataset.labels == 0, alpha)
    rates_edge = np.empty(graph.n_edges)
    rates_edge[edge_of_record] = out_rec
    io.write_scores(ScoreVector(rates_edge, "rate"), graph, out_path)
    _manifest(out_path, "flip", [graph_path, major_path, other_path, dataset_path],
              {"low_thresh": low_thresh, "high_thresh": high_thresh,
               "alpha": alpha}, None, started)
    return rates_edge


def stage_sample(graph_path, rates_path, dataset_path, out_path, seed: int):
    started = time.time()
    graph = io.load_graph(graph_path)
    dataset = io.read_dataset_tsv(dataset_path)
    rates = io.read_scores(rates_path, graph)
    if rates.tag != "rate":
        raise ContractError(f"{rates_path}: expected rate-tagged scores")
    edge_of_record = graph.map_records(dataset)
    plan = sampling.subsample(dataset, rates.values[edge_of_record], seed)
    io.write_plan(dataset, plan, out_path)
    _manifest(out_path, "sample", [graph_path, rates_path, dataset_path],
              {}, seed, started)
    return plan


def stage_train(dataset_path, plan_path, graph_path, model_out,
                config: glm.TrainConfig, correction: bool = True):
    started = time.time()
    dataset = io.read_dataset_tsv(dataset_path)
    plan_dataset, plan = io.read_plan(plan_path)
    if len(plan_dataset) != len(dataset):
        raise ContractError("plan and dataset record counts differ")
    graph = io.load_graph(graph_path)
    model = glm.fit(dataset, plan, graph, config, correction=correction)
    model.save(model_out)
    _manifest(model_out, "train", [dataset_path, plan_path, graph_path],
              {**vars(config), "correction": correction}, config.seed, started)
    return model


def stage_eval(out_path, predictions_path=None, model_path=None,
               dataset_path=None, ndcg_ks=(5, 10, 30), ace_bins: int = 15):
    from .metrics import ace, auc, ndcg_at_k
    started = time.time()
    inputs = []
    if predictions_path is not None:
        users, scores, labels = io.read_predictions(predictions_path)
        inputs.append(predictions_path)
    elif model_path is not None and dataset_path is not None:
        model = glm.GlmModel.load(model_path)
        dataset = io.read_dataset_tsv(dataset_path)
        users, labels = dataset.users, dataset.labels
        scores = model.predict(dataset)
        inputs += [model_path, dataset_path]
    else:
        raise ContractError("eval needs --predictions or --model with --dataset")
    metrics = {"auc": auc(scores, labels)}
    for k in ndcg_ks:
        value, excluded = ndcg_at_k(users, scores, labels, k)
        metrics[f"ndcg@{k}"] = value
        metrics[f"ndcg@{k}_excluded_users"] = excluded
    metrics["ace"] = ace(scores, labels, n_bins=ace_bins)
    metrics["ace_bins"] = ace_bins
    report = io.write_metrics(metrics, out_path)
    _manifest(out_path, "eval", inputs, {"ndcg_ks": list(ndcg_ks),
                                         "ace_bins": ace_bins}, None, started)
    return metrics, report


_SYNTH_KEYS = {f.name for f in __import__("dataclasses").fields(SyntheticSpec)}


def run_pipeline(config: dict, workdir) -> dict:
    """Run the staged workflow end to end from a flat key-value config.

    Produces graph, score, (optional) propagated-score, rate, (optional)
    ensemble/flip, sample, model and metrics artifacts inside workdir.
    Stage list is controlled by 'pipeline.stages' (comma separated);
    defaults to 'build-graph,score,rates,sample'.
    """
    work = Path(workdir)
    work.mkdir(parents=True, exist_ok=True)
    artifacts = {}

    def get(key, default=None, cast=str):
        if key in config:
            return cast(config[key])
        return default

    stages = [s.strip() for s in
              get("pipeline.stages", "build-graph,score,rates,sample").split(",")]

    data_path = get("data.path")
    if get("data.synth", "false").lower() == "true":
        spec_kwargs = {}
        for key in _SYNTH_KEYS:
            if f"synth.{key}" in config:
                raw = config[f"synth.{key}"]
                field_type = type(getattr(SyntheticSpec, key))
                spec_kwargs[key] = field_type(raw) if field_type in (int, float) else raw
        data_path = str(work / "dataset.tsv")
        stage_synth(SyntheticSpec(**spec_kwargs), data_path,
                    communities_path=str(work / "communities.tsv"))
        artifacts["dataset"] = data_path
    if data_path is None:
        raise ContractError("config must set data.path or data.synth = true")

    graph_path = str(work / "graph.tsv")
    if "build-graph" in stages:
        stage_build_graph(data_path, graph_path,
                          delimiter=get("data.delimiter", "\t"))
        artifacts["graph"] = graph_path

    scores_path = str(work / "scores.tsv")
    if "score" in stages:
        stage_score(graph_path, scores_path,
                    method=get("score.method", "ec"),
                    mode=get("score.mode", "exact"),
                    seed=get("score.seed", 0, int),
                    tolerance=get("score.tolerance", 0.1, float),
                    max_walks=get("score.max_walks", 100_000, int),
                    pilot_scores_path=get("score.pilot_scores"))
        artifacts["scores"] = scores_path

    rates_input = scores_path
    if "propagate" in stages:
        propagated = str(work / "propagated.tsv")
        stage_propagate(graph_path, scores_path, propagated,
                        gamma=get("propagate.gamma", 0.2, float),
                        tolerance=get("propagate.tolerance", 1e-8, float),
                        max_iters=get("propagate.max_iters", 1000, int),
                        kernel=get("propagate.kernel", "edge"),
                        variant=get("propagate.variant", "self_excl_bt"),
                        score_propagation=get("propagate.scores", "false") == "true")
        artifacts["propagated"] = propagated
        rates_input = propagated

    rates_path = str(work / "rates.tsv")
    if "rates" in stages:
        stage_rates(graph_path, rates_input, data_path, rates_path,
                    alpha=get("rates.alpha", 0.2, float),
                    rho_min=get("rates.rho_min", 0.1, float),
                    seed=get("rates.seed", 0, int))
        artifacts["rates"] = rates_path

    final_rates = rates_path
    if "ensemble" in stages:
        other = get("ensemble.other_rates")
        if other is None:
            raise ContractError("ensemble stage needs ensemble.other_rates")
        ens_path = str(work / "ensemble.tsv")
        stage_ensemble(graph_path, rates_path, other, data_path, ens_path,
                       strategy=get("ensemble.strategy", "max"),
                       alpha=get("rates.alpha", 0.2, float),
                       rho_prod_min=get("ensemble.rho_prod_min", 0.005, float))
        artifacts["ensemble"] = ens_path
        final_rates = ens_path
    if "flip" in stages:
        other = get("flip.other_rates")
        if other is None:
            raise ContractError("flip stage needs flip.other_rates")
        flip_path = str(work / "flipped.tsv")
        stage_flip(graph_path, final_rates, other, data_path, flip_path,
                   low_thresh=get("flip.low", 0.2, float),
                   high_thresh=get("flip.high", 0.8, float),
                   alpha=get("rates.alpha", 0.2, float))
        artifacts["flip"] = flip_path
        final_rates = flip_path

    sample_path = str(work / "sample.tsv")
    if "sample" in stages:
        stage_sample(graph_path, final_rates, data_path, sample_path,
                     seed=get("sample.seed", 0, int))
        artifacts["sample"] = sample_path

    if "train" in stages:
        model_path = str(work / "model.npz")
        train_config = glm.TrainConfig(
            learning_rate=get("train.learning_rate", 0.01, float),
            epochs=get("train.epochs", 15, int),
            batch_size=get("train.batch_size", 1024, int),
            l2=get("train.l2", 1e-6, float),
            dim=get("train.dim", 8, int),
            seed=get("train.seed", 0, int))
        stage_train(data_path, sample_path, graph_path, model_path, train_config,
                    correction=get("train.correction", "true") == "true")
        artifacts["model"] = model_path

    if "eval" in stages:
        metrics_path = str(work / "metrics.txt")
        eval_data = get("eval.dataset", data_path)
        stage_eval(metrics_path, model_path=str(work / "model.npz"),
                   dataset_path=eval_data,
                   ace_bins=get("eval.ace_bins", 15, int))
        artifacts["metrics"] = metrics_path

    return artifacts
