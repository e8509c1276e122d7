import csv
import json

import pytest
from click.testing import CliRunner

from speechscreen.cli import main
from speechscreen.toydata import MockTextGenerator, materialize

from conftest import json_server


@pytest.fixture(scope="module")
def quality_setup(tmp_path_factory):
    """Toy corpus + a generated synthetic corpus, ready for quality runs."""
    tmp = tmp_path_factory.mktemp("quality")
    materialize(tmp / "data", shape="toy")
    out = tmp / "out"
    cfg = tmp / "cfg.yaml"
    gen = MockTextGenerator()

    def behavior(payload):
        return 200, {"text": gen.complete(payload["messages"])}

    with json_server(behavior) as url:
        cfg.write_text(
            "paths:\n"
            f"  manifest: {tmp / 'data' / 'manifest.csv'}\n"
            f"  output_dir: {out}\n"
            f"  synthetic: {out / 'synthetic_medalpaca-7b.jsonl'}\n"
            "augment:\n"
            f"  endpoint: {url}\n"
            "  generator: medalpaca-7b\n")
        res = CliRunner().invoke(main, ["augment-generate", "--config",
                                        str(cfg), "--n", "12"])
        assert res.exit_code == 0, res.output
    return tmp, cfg, out


class TestQualityCli:
    def test_bleu(self, quality_setup):
        tmp, cfg, out = quality_setup
        res = CliRunner().invoke(main, ["quality", "--config", str(cfg),
                                        "--metric", "bleu"])
        assert res.exit_code == 0, res.output
        doc = json.loads((out / "quality_bleu.json").read_text())
        scores = doc["medalpaca-7b"]["scores"]
        assert set(scores) == {"1", "2", "3", "4"}
        assert all(0.0 <= v <= 1.0 for v in scores.values())
        # toy synthetic speech shares unigrams with toy references
        assert scores["1"] > 0.3

    def test_bertscore(self, quality_setup):
        tmp, cfg, out = quality_setup
        res = CliRunner().invoke(main, ["quality", "--config", str(cfg),
                                        "--metric", "bertscore"])
        assert res.exit_code == 0, res.output
        doc = json.loads((out / "quality_bertscore.json").read_text())
        rep = doc["medalpaca-7b"]
        assert -1.0 <= rep["f1"] <= 1.0
        assert rep["n"] == 12

    def test_tsne_coordinates_and_overlap(self, quality_setup):
        tmp, cfg, out = quality_setup
        res = CliRunner().invoke(main, ["quality", "--config", str(cfg),
                                        "--metric", "tsne"])
        assert res.exit_code == 0, res.output
        with (out / "tsne_coordinates.csv").open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        groups = {r["group"] for r in rows}
        assert groups == {"train", "validation", "test", "synthetic"}
        assert len(rows) == 120 + 12
        overlap = json.loads((out / "tsne_overlap.json").read_text())
        assert 0.0 <= overlap["mixing_overall"] <= 1.0

    def test_report_renders_quality_figures(self, quality_setup):
        tmp, cfg, out = quality_setup
        # needs at least one training report for the metrics table
        res = CliRunner().invoke(main, [
            "train", "--config", str(cfg), "--model", "linguistic",
            "--seed-list", "0"])
        assert res.exit_code == 0, res.output
        res = CliRunner().invoke(main, ["report", "--config", str(cfg)])
        assert res.exit_code == 0, res.output
        for fig in ("bleu_bars.svg", "bertscore_bars.svg",
                    "tsne_scatter.svg"):
            assert (out / fig).exists(), fig


class TestEmbedFetchCli:
    def test_fetch_then_train_from_store(self, tmp_path):
        materialize(tmp_path / "data", shape="toy")
        out = tmp_path / "out"

        def behavior(payload):
            # deterministic separable embeddings keyed off filler density
            vecs = []
            for text in payload["inputs"]:
                disfluent = text.count(" um ") + text.count(" uh ")
                vecs.append([1.0 if disfluent else -1.0, 0.5, -0.25])
            return 200, {"dim": 3, "vectors": vecs}

        cfg = tmp_path / "cfg.yaml"
        with json_server(behavior) as url:
            cfg.write_text(
                "paths:\n"
                f"  manifest: {tmp_path / 'data' / 'manifest.csv'}\n"
                f"  output_dir: {out}\n"
                "embedding:\n"
                "  provider: mock-encoder\n"
                f"  endpoint: {url}\n"
                "  model: mock-encoder-v1\n")
            res = CliRunner().invoke(main, ["embed-fetch", "--config",
                                            str(cfg)])
            assert res.exit_code == 0, res.output

        store_path = out / "embeddings.jsonl"
        assert store_path.exists()
        lines = store_path.read_text().splitlines()
        assert len(lines) == 120

        # point training at the fetched store
        cfg.write_text(
            "paths:\n"
            f"  manifest: {tmp_path / 'data' / 'manifest.csv'}\n"
            f"  output_dir: {out}\n"
            f"  embedding_store: {store_path}\n"
            "embedding:\n"
            "  provider: mock-encoder\n"
            "train:\n"
            "  seeds: [0]\n"
            "  epochs: 20\n"
            "  embedding: {lr: 5.0e-3, dropout: 0.0}\n")
        res = CliRunner().invoke(main, ["train", "--config", str(cfg),
                                        "--model", "embedding"])
        assert res.exit_code == 0, res.output
        rep = json.loads((out / "embedding_report.json").read_text())
        assert rep["per_seed"][0]["f1"] == 1.0  # embeddings are separable


class TestBleuReferencePolicy:
    def test_nearest_policy_differs_from_same_label(self, quality_setup,
                                                    tmp_path):
        tmp, cfg, out = quality_setup
        nearest_cfg = tmp_path / "nearest.yaml"
        nearest_cfg.write_text(cfg.read_text() +
                               "quality:\n"
                               "  bleu_reference_policy: nearest\n")
        res = CliRunner().invoke(main, ["quality", "--config",
                                        str(nearest_cfg), "--metric", "bleu",
                                        "--out", str(tmp_path / "o")])
        assert res.exit_code == 0, res.output
        doc = json.loads((tmp_path / "o" / "quality_bleu.json").read_text())
        scores = doc["medalpaca-7b"]["scores"]
        assert all(0.0 <= v <= 1.0 for v in scores.values())
