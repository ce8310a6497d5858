import json

import numpy as np
import pytest

from chfnet.config import ExperimentConfig
from chfnet.dataset import Dataset, fit_standardizer, split, transform
from chfnet.errors import ValidationError
from chfnet.experiment import (MODEL_NAMES, PipelineError, Predictor, RunReport, VariantResult, compare_variants,
                               derive_seed, export_predictions, load_dataset, read_predictions, run_pipeline)
from chfnet.lut import flatten
from chfnet.metrics import MetricsReport, evaluate
from chfnet.nn import Dense, Flatten, NetworkModel

# published testing-phase values: nrmse, mae, r2, nse
TABLE = {
    "base": (0.1478, 420.7925, 0.9791, 0.9781),
    "A1": (0.1389, 344.7399, 0.9807, 0.9807),
    "A2": (0.1356, 354.3443, 0.9826, 0.9816),
    "A3": (0.1870, 542.8060, 0.9653, 0.9650),
}


def fake_report(values):
    res = {}
    for v, (nrmse, mae, r2, nse) in values.items():
        rep = MetricsReport(nrmse=nrmse, mae=mae, r2=r2, nse=nse, n=10)
        res[v] = VariantResult(rep, rep, 3)
    return RunReport(res)


@pytest.fixture(scope="module")
def small_ds(sample_grid):
    ds = flatten(sample_grid)
    return ds.subset(np.arange(0, len(ds), 5))


@pytest.fixture(scope="module")
def quick_cfg():
    return ExperimentConfig(epochs=2, batch_size=64, seed=7)


@pytest.fixture(scope="module")
def quick_report(small_ds, quick_cfg, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    return run_pipeline(small_ds, quick_cfg, out), out


class TestCompare:
    def test_published_order(self):
        ranking = compare_variants(fake_report(TABLE))
        assert ranking.order == ["A2", "A1", "base", "A3"]
        a2 = ranking.rows[0]["delta_vs_base"]
        assert a2["r2"] == pytest.approx(0.0035) and a2["nrmse"] == pytest.approx(-0.0122)
        assert not ranking.ties

    def test_tie_keeps_input_order(self):
        ranking = compare_variants(fake_report({"A3": TABLE["A1"], "A1": TABLE["A1"], "base": TABLE["base"]}))
        assert ranking.order == ["A3", "A1", "base"]
        assert ranking.ties == [("A3", "A1")]
        assert "tie: A3 and A1" in ranking.format()

    def test_nrmse_breaks_r2_tie(self):
        vals = {"base": (0.2, 1, 0.98, 0.9), "A1": (0.1, 1, 0.98, 0.9)}
        assert compare_variants(fake_report(vals)).order == ["A1", "base"]

    def test_single_variant(self):
        with pytest.raises(ValidationError):
            compare_variants(fake_report({"base": TABLE["base"]}))

    def test_no_base_means_no_deltas(self):
        ranking = compare_variants(fake_report({"A1": TABLE["A1"], "A2": TABLE["A2"]}))
        assert all(r["delta_vs_base"] is None for r in ranking.rows)
        assert "n/a" in ranking.format()


class TestSeeds:
    def test_stable_and_distinct(self):
        assert derive_seed(0, "split") == derive_seed(0, "split", "base")
        seeds = {derive_seed(s, st, v) for s in (0, 1) for st in ("split", "ae_init", "dcnn_init")
                 for v in ("base", "A1", "A2", "A3")}
        assert len(seeds) == 24

    def test_value_is_seed_sequence_word(self):
        want = int(np.random.SeedSequence([5, 3, 2]).generate_state(1)[0])
        assert derive_seed(5, "dcnn_init", "A2") == want


class TestConfig:
    def test_file(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("# demo\nseed = 3\nvariants = A2, base  # unordered\nlut_path = lut.csv\n"
                        "standardize_codes = yes\nlearning_rate = 5e-4\n")
        cfg = ExperimentConfig.from_file(path)
        assert cfg.seed == 3 and cfg.variants == ("base", "A2") and cfg.standardize_codes
        assert cfg.learning_rate == 5e-4
        assert cfg.lut_path == str(tmp_path / "lut.csv")
        assert cfg.output_dir == str(tmp_path / "runs/default")

    def test_text_roundtrip(self, tmp_path):
        cfg = ExperimentConfig(seed=9, variants=("A1",), epochs=3, lut_path="/x.csv", output_dir="/o")
        path = tmp_path / "c.cfg"
        path.write_text(cfg.to_text())
        assert ExperimentConfig.from_file(path) == cfg

    @pytest.mark.parametrize("text,match", [
        ("colour = red\n", "unknown"), ("seed = 1\nseed = 2\n", "duplicate"), ("seed\n", "key = value"),
        ("seed = x\n", "seed"), ("variants = A9\n", "A9"), ("train_fraction = 1.5\n", "train_fraction"),
        ("standardize_codes = maybe\n", "boolean")])
    def test_rejects(self, tmp_path, text, match):
        path = tmp_path / "bad.cfg"
        path.write_text(text)
        with pytest.raises(ValidationError, match=match):
            ExperimentConfig.from_file(path)

    def test_override_skips_none(self):
        cfg = ExperimentConfig().override(seed=4, epochs=None)
        assert cfg.seed == 4 and cfg.epochs == 200


class TestPipeline:
    def test_report_contents(self, quick_report, small_ds):
        report, out = quick_report
        assert list(report.variants) == ["base", "A1", "A2", "A3"]
        assert {v: r.n_features for v, r in report.variants.items()} == {"base": 3, "A1": 4, "A2": 5, "A3": 6}
        assert report.stamp["n_train"] + report.stamp["n_test"] == len(small_ds)
        for name in ("manifest.json", "reports/metrics.json", "reports/table.txt", "reports/ranking.txt",
                     "reports/history.json", "reports/split.json", "models/A2.bin", "models/ae_A2.json"):
            assert (out / name).is_file(), name
        table = (out / "reports/table.txt").read_text()
        assert all(MODEL_NAMES[v] in table for v in report.variants)

    def test_shared_split(self, quick_report, small_ds, quick_cfg):
        report, _ = quick_report
        sp = split(small_ds, 0.8, derive_seed(quick_cfg.seed, "split"))
        assert report.split_manifest["test_indices"] == sp.test_indices.tolist()
        n_test = {r.test.n for r in report.variants.values()}
        assert n_test == {len(sp.test)}

    def test_metrics_recomputed_from_predictions(self, quick_report):
        report, out = quick_report
        for v, res in report.variants.items():
            measured, predicted, tags = read_predictions(out / "predictions" / f"{v}.csv")
            tags = np.array(tags)
            for tag, rep in (("train", res.train), ("test", res.test)):
                sel = tags == tag
                again = evaluate(measured[sel], predicted[sel])
                for k in ("nrmse", "mae", "r2", "nse"):
                    assert getattr(again, k) == pytest.approx(getattr(rep, k), rel=1e-9, abs=1e-9)

    def test_saved_predictor_reloads(self, quick_report, small_ds):
        report, out = quick_report
        pred, meta = Predictor.load(out / "models" / "A3.json")
        assert meta["model_name"] == "DCNN_3F-A3"
        np.testing.assert_array_equal(pred.predict_features(small_ds),
                                      report.predictors["A3"].predict_features(small_ds))

    def test_export_predictions(self, quick_report, small_ds, tmp_path):
        report, _ = quick_report
        sp = split(small_ds, 0.8, report.split_manifest["seed"])
        path = tmp_path / "p.csv"
        export_predictions(report.predictors["base"], sp.test, path, split_tag="test")
        measured, predicted, tags = read_predictions(path)
        assert len(measured) == len(sp.test) and set(tags) == {"test"}
        again = evaluate(measured, predicted)
        assert again.r2 == pytest.approx(report.variants["base"].test.r2, rel=1e-9)

    def test_export_needs_base_features(self, quick_report, tmp_path):
        report, _ = quick_report
        ds = Dataset(np.zeros((2, 4)), np.zeros(2), ("a", "b", "c", "d"))
        with pytest.raises(ValidationError):
            export_predictions(report.predictors["base"], ds, tmp_path / "p.csv")

    def test_perfect_toy_model(self, small_ds, tmp_path):
        # a linear target is fitted exactly by a flatten+dense head on the standardized inputs
        scaler = fit_standardizer(small_ds)
        z = transform(scaler, small_ds).features
        y = 1000.0 + z @ np.array([300.0, -200.0, 50.0])
        ds = Dataset(small_ds.features, y, small_ds.feature_names)
        model = NetworkModel([Flatten(), Dense(3, 1)], (3, 1), params=[300.0, -200.0, 50.0, 1000.0])
        path = tmp_path / "toy.csv"
        export_predictions(Predictor("base", scaler, model), ds, path)
        measured, predicted, _ = read_predictions(path)
        np.testing.assert_allclose(predicted, measured, rtol=1e-12)

    def test_leakage_sentinel(self, small_ds, quick_cfg):
        cfg = quick_cfg.override(variants=["base", "A2"])
        sp = split(small_ds, cfg.train_fraction, derive_seed(cfg.seed, "split"))
        feats = small_ds.features.copy()
        targets = small_ds.targets.copy()
        rng = np.random.default_rng(0)
        feats[sp.test_indices] = rng.uniform(-50, 50, (len(sp.test), 3))
        targets[sp.test_indices] = rng.uniform(0, 1e6, len(sp.test))
        poisoned = Dataset(feats, targets, small_ds.feature_names)
        a = run_pipeline(small_ds, cfg)
        b = run_pipeline(poisoned, cfg)
        assert a.standardizer.to_dict() == b.standardizer.to_dict()
        for v in cfg.variants:
            pa, pb = a.predictors[v], b.predictors[v]
            assert pa.dcnn.params.tobytes() == pb.dcnn.params.tobytes()
            if v != "base":
                assert pa.autoencoder.model.params.tobytes() == pb.autoencoder.model.params.tobytes()
        assert a.variants["base"].train == b.variants["base"].train

    def test_metrics_json_deterministic(self, small_ds, quick_cfg):
        cfg = quick_cfg.override(variants=["A1"])
        first = run_pipeline(small_ds, cfg).metrics_json()
        assert first == run_pipeline(small_ds, cfg).metrics_json()
        assert json.loads(first)["stamp"]["feature_counts"] == {"A1": 4}


class TestPipelineErrors:
    def test_ingest_stage(self, tmp_path):
        cfg = ExperimentConfig(lut_path=str(tmp_path / "missing.csv"))
        with pytest.raises(PipelineError) as exc:
            load_dataset(cfg)
        assert exc.value.stage == "ingest"

    def test_split_stage(self):
        ds = Dataset(np.column_stack([np.arange(20.0), np.ones(20), np.arange(20.0) ** 2]), np.arange(20.0),
                     ("pressure_mpa", "mass_flux_kg_m2s", "quality"))
        with pytest.raises(PipelineError, match=r"\[split\].*mass_flux"):
            run_pipeline(ds, ExperimentConfig(epochs=1))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_dcnn_stage(self, small_ds):
        ds = Dataset(small_ds.features, small_ds.targets * 1e300, small_ds.feature_names)
        with pytest.raises(PipelineError) as exc:
            run_pipeline(ds, ExperimentConfig(epochs=1, variants=("base",), learning_rate=1e300))
        assert exc.value.stage == "dcnn base"
