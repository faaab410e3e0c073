import json

import numpy as np
import pytest

from hardsample import Dataset, ScoreVector, SamplingPlan, build_graph
from hardsample.errors import ContractError
from hardsample import io as hio

from conftest import REFERENCE_RECORDS


@pytest.fixture
def dataset():
    return Dataset.from_tuples(REFERENCE_RECORDS)


class TestDatasetTsv:
    def test_roundtrip(self, dataset, tmp_path):
        path = tmp_path / "data.tsv"
        hio.write_dataset_tsv(dataset, path)
        back = hio.read_dataset_tsv(path)
        assert np.array_equal(back.users, dataset.users)
        assert np.array_equal(back.items, dataset.items)
        assert np.array_equal(back.labels, dataset.labels)

    def test_roundtrip_with_context(self, tmp_path):
        rng = np.random.default_rng(0)
        ds = Dataset(["a", "b"], ["x", "y"], [1, 0], rng.normal(size=(2, 3)))
        path = tmp_path / "data.tsv"
        hio.write_dataset_tsv(ds, path)
        back = hio.read_dataset_tsv(path)
        np.testing.assert_array_equal(back.context, ds.context)

    def test_custom_delimiter(self, dataset, tmp_path):
        path = tmp_path / "data.csv"
        hio.write_dataset_tsv(dataset, path, delimiter=",")
        back = hio.read_dataset_tsv(path, delimiter=",")
        assert np.array_equal(back.labels, dataset.labels)

    def test_malformed_label_reports_row(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("user_id\titem_id\tlabel\nu1\tv1\t1\nu2\tv2\t7\n")
        with pytest.raises(ContractError, match="row 3"):
            hio.read_dataset_tsv(path)

    def test_ragged_row_reports_row(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("user_id\titem_id\tlabel\nu1\tv1\n")
        with pytest.raises(ContractError, match="row 2"):
            hio.read_dataset_tsv(path)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("u1\n")
        with pytest.raises(ContractError):
            hio.read_dataset_tsv(path)

    def test_empty_body_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("user_id\titem_id\tlabel\n")
        with pytest.raises(ContractError, match="no records"):
            hio.read_dataset_tsv(path)


class TestGraphPersistence:
    def test_roundtrip(self, dataset, tmp_path):
        graph = build_graph(dataset)
        path = tmp_path / "graph.tsv"
        hio.save_graph(graph, path)
        back = hio.load_graph(path)
        assert back.user_tokens == [str(t) for t in graph.user_tokens]
        assert np.array_equal(back.edge_user, graph.edge_user)
        assert np.array_equal(back.edge_item, graph.edge_item)
        assert np.array_equal(back.edge_label, graph.edge_label)
        assert np.array_equal(back.edge_mult, graph.edge_mult)

    def test_version_mismatch_rejected(self, dataset, tmp_path):
        graph = build_graph(dataset)
        path = tmp_path / "graph.tsv"
        hio.save_graph(graph, path)
        sidecar_path = tmp_path / "graph.tsv.index.json"
        sidecar = json.loads(sidecar_path.read_text())
        sidecar["version"] = 999
        sidecar_path.write_text(json.dumps(sidecar))
        with pytest.raises(ContractError, match="version"):
            hio.load_graph(path)

    def test_missing_sidecar_is_io_error(self, dataset, tmp_path):
        graph = build_graph(dataset)
        path = tmp_path / "graph.tsv"
        hio.save_graph(graph, path)
        (tmp_path / "graph.tsv.index.json").unlink()
        with pytest.raises(FileNotFoundError):
            hio.load_graph(path)


class TestScores:
    def test_roundtrip_exact_floats(self, dataset, tmp_path):
        graph = build_graph(dataset)
        rng = np.random.default_rng(1)
        score = ScoreVector(rng.random(graph.n_edges), "G_eff")
        path = tmp_path / "scores.tsv"
        hio.write_scores(score, graph, path)
        back = hio.read_scores(path, graph)
        assert back.tag == "G_eff"
        np.testing.assert_array_equal(back.values, score.values)

    def test_length_mismatch_rejected(self, dataset, tmp_path):
        graph = build_graph(dataset)
        with pytest.raises(ContractError):
            hio.write_scores(ScoreVector(np.zeros(2), "Z"), graph,
                             tmp_path / "s.tsv")

    def test_unknown_pair_rejected(self, dataset, tmp_path):
        graph = build_graph(dataset)
        path = tmp_path / "scores.tsv"
        path.write_text("user_id\titem_id\tlabel\tscore\ttag\n"
                        "ghost\tv1\t0\t0.5\tZ\n")
        with pytest.raises(ContractError, match="ghost"):
            hio.read_scores(path, graph)

    def test_missing_edge_rejected(self, dataset, tmp_path):
        graph = build_graph(dataset)
        path = tmp_path / "scores.tsv"
        path.write_text("user_id\titem_id\tlabel\tscore\ttag\n"
                        "u1\tv1\t1\t0.5\tZ\n")
        with pytest.raises(ContractError, match="missing"):
            hio.read_scores(path, graph)


class TestPlans:
    def test_roundtrip(self, dataset, tmp_path):
        n = len(dataset)
        rng = np.random.default_rng(2)
        pi = rng.uniform(0.1, 1.0, size=n)
        plan = SamplingPlan(pi, np.log(pi), rng.integers(2, size=n).astype(np.int8))
        path = tmp_path / "plan.tsv"
        hio.write_plan(dataset, plan, path)
        ds_back, plan_back = hio.read_plan(path)
        assert np.array_equal(ds_back.users, dataset.users)
        np.testing.assert_array_equal(plan_back.pi, plan.pi)
        np.testing.assert_array_equal(plan_back.log_pi, plan.log_pi)
        np.testing.assert_array_equal(plan_back.delta, plan.delta)

    def test_retained_only_filters(self, dataset, tmp_path):
        n = len(dataset)
        delta = np.array([1, 0, 1, 0, 1][:n], dtype=np.int8)
        plan = SamplingPlan(np.ones(n), np.zeros(n), delta)
        path = tmp_path / "plan.tsv"
        hio.write_plan(dataset, plan, path, retained_only=True)
        ds_back, plan_back = hio.read_plan(path)
        assert len(ds_back) == int(delta.sum())
        assert np.all(plan_back.delta == 1)


class TestPredictionsAndMetrics:
    def test_predictions_roundtrip(self, tmp_path):
        path = tmp_path / "preds.tsv"
        hio.write_predictions(["a", "b"], [0.25, 0.75], [0, 1], path)
        users, scores, labels = hio.read_predictions(path)
        assert list(users) == ["a", "b"]
        np.testing.assert_array_equal(scores, [0.25, 0.75])
        np.testing.assert_array_equal(labels, [0, 1])

    def test_metrics_file_and_report(self, tmp_path):
        path = tmp_path / "metrics.txt"
        report = hio.write_metrics({"auc": 0.9, "ace": 0.01}, path)
        assert "auc = 0.9" in report
        assert "auc=0.9" in path.read_text()


class TestManifests:
    def test_manifest_records_input_hashes(self, tmp_path):
        src = tmp_path / "in.txt"
        src.write_text("hello")
        art = tmp_path / "out.txt"
        art.write_text("result")
        hio.write_manifest(art, stage="demo", inputs=[src], config={"k": 1},
                           seed=7)
        manifest = hio.read_manifest(art)
        assert manifest["stage"] == "demo"
        assert manifest["seed"] == 7
        assert manifest["inputs"][0]["sha256"] == hio.sha256_file(src)

    def test_sha256_matches_known_value(self, tmp_path):
        src = tmp_path / "x"
        src.write_bytes(b"abc")
        assert hio.sha256_file(src) == (
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad")


class TestConfig:
    def test_parse_flat_config(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# a comment\n"
                        "rates.alpha = 0.3\n"
                        "score.method = ec  # trailing comment\n"
                        "\n"
                        "pipeline.stages = build-graph,score\n")
        config = hio.parse_config(path)
        assert config == {"rates.alpha": "0.3", "score.method": "ec",
                          "pipeline.stages": "build-graph,score"}

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("rates.alpha = 0.3\nnot a pair\n")
        with pytest.raises(ContractError, match="line 2"):
            hio.parse_config(path)
