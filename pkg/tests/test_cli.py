import json

import pytest

from chfnet.cli import LUT2006_REFERENCE_STATS, main
from chfnet.dataset import read_csv
from chfnet.experiment import Predictor
from chfnet.lut import correct_diameter, interpolate
from chfnet.metrics import evaluate


@pytest.fixture(scope="module")
def trained(tmp_path_factory, sample_grid):
    out = tmp_path_factory.mktemp("cli")
    cfg = out / "exp.cfg"
    cfg.write_text("seed = 1\nepochs = 2\nbatch_size = 128\nvariants = base, A2\noutput_dir = run\n")
    assert main(["run", str(cfg)]) == 0
    data = out / "data.csv"
    assert main(["ingest", "sample", "--csv", str(data)]) == 0
    return out / "run", data


def test_ingest_sample(capsys):
    assert main(["ingest", "sample"]) == 0
    text = capsys.readouterr().out
    assert "1056 nodes" in text and "differs from the 2006 table" in text
    assert all(name in text for name in LUT2006_REFERENCE_STATS)


def test_ingest_full_span_required(tiny_csv, capsys):
    assert main(["ingest", str(tiny_csv)]) == 2
    assert "error:" in capsys.readouterr().err
    assert main(["ingest", str(tiny_csv), "--partial"]) == 0


def test_ingest_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("pressure_mpa,mass_flux_kg_m2s,quality,chf_kw_m2\n1,2,oops,4\n")
    assert main(["ingest", str(bad), "--partial"]) == 2


def test_run_artifacts(trained, capsys):
    run, _ = trained
    metrics = json.loads((run / "reports" / "metrics.json").read_text())
    assert sorted(metrics["variants"]) == ["A2", "base"]
    assert metrics["stamp"]["feature_counts"] == {"A2": 5, "base": 3}
    manifest = json.loads((run / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 1 and manifest["config"]["epochs"] == 2


def test_flag_overrides_config(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("epochs = 50\nvariants = A1\n")
    assert main(["train", str(cfg), "--variant", "base", "--epochs", "1", "--output-dir", str(tmp_path / "o")]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["config"]["epochs"] == 1 and manifest["config"]["variants"] == ["base"]
    assert "DCNN_3F" in capsys.readouterr().out


def test_evaluate_matches_report(trained, capsys):
    run, data = trained
    assert main(["evaluate", str(run / "models" / "A2.json"), str(data)]) == 0
    got = json.loads(capsys.readouterr().out)
    pred, _ = Predictor.load(run / "models" / "A2.json")
    ds = read_csv(data)
    assert got == evaluate(ds.targets, pred.predict_features(ds)).to_dict()
    assert got["n"] == 1056


def test_predict(trained, capsys, sample_grid):
    run, _ = trained
    assert main(["predict", str(run / "models" / "base.json"), "--p", "10", "--g", "3000", "--x", "0.1",
                 "--d", "4"]) == 0
    out = json.loads(capsys.readouterr().out)
    lut = interpolate(sample_grid, 10, 3000, 0.1)
    assert out["lut_chf_8mm"] == lut
    assert out["lut_chf"] == pytest.approx(correct_diameter(lut, 4))
    assert out["model_chf"] == pytest.approx(correct_diameter(max(out["model_chf_8mm"], 0.0), 4))


def test_predict_out_of_range(trained, capsys):
    run, _ = trained
    assert main(["predict", str(run / "models" / "base.json"), "--p", "50", "--g", "3000", "--x", "0.1"]) == 2


def test_export_predictions(trained, tmp_path, capsys):
    run, data = trained
    out = tmp_path / "pred.csv"
    assert main(["export-predictions", str(run / "models" / "A2.json"), str(data), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + len(read_csv(data))
    assert lines[0] == "measured_chf,predicted_chf,split_tag" and lines[1].endswith(",all")


def test_evaluate_wrong_columns(trained, tmp_path):
    run, _ = trained
    bad = tmp_path / "d.csv"
    bad.write_text("a,b,c,chf_kw_m2\n1,2,3,4\n")
    assert main(["evaluate", str(run / "models" / "base.json"), str(bad)]) == 2


def test_not_a_model(tmp_path):
    assert main(["evaluate", str(tmp_path / "nope.json"), str(tmp_path / "d.csv")]) == 2


def test_bad_config_value(tmp_path):
    assert main(["run", "--seed", "abc", "--output-dir", str(tmp_path)]) == 2


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_exit_code(tmp_path, capsys):
    code = main(["train", "--variant", "base", "--epochs", "1", "--learning-rate", "1e300",
                 "--output-dir", str(tmp_path)])
    assert code == 3
    assert "diverged" in capsys.readouterr().err
