import json

import pytest
from click.testing import CliRunner

from sevdx import corpusio
from sevdx.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, small_corpus):
    root = tmp_path_factory.mktemp("cli")
    corpusio.write_corpus(small_corpus[:400], root / "train.csv")
    corpusio.write_corpus(small_corpus[400:], root / "test.csv")
    (root / "config.yaml").write_text("forest:\n  n_trees: 3\n  max_depth: 8\n")
    return root


@pytest.fixture(scope="module")
def bundles(workdir):
    runner = CliRunner()
    for name, extra in (("hier", []), ("flat", ["--flat"])):
        result = runner.invoke(main, [
            "train", str(workdir / "train.csv"),
            "--config", str(workdir / "config.yaml"),
            "--out", str(workdir / name), "--seed", "0", *extra,
        ], catch_exceptions=False)
        assert result.exit_code == 0, result.output
        assert "bundle written" in result.output
    return workdir / "hier", workdir / "flat"


def test_predict_text(bundles):
    hier, _ = bundles
    result = CliRunner().invoke(main, [
        "predict", "cyst fluid benign", "--bundle", str(hier)
    ], catch_exceptions=False)
    assert result.exit_code == 0
    rec = json.loads(result.output.strip().splitlines()[-1])
    assert {"severities", "diagnoses", "no_prediction"} <= set(rec)


def test_predict_batch_input(bundles, workdir):
    hier, _ = bundles
    result = CliRunner().invoke(main, [
        "predict", "--bundle", str(hier), "--input", str(workdir / "test.csv")
    ], catch_exceptions=False)
    assert result.exit_code == 0
    lines = [json.loads(l) for l in result.output.strip().splitlines()]
    assert len(lines) == 200


def test_eval_writes_json_csv_and_figure(bundles, workdir):
    hier, _ = bundles
    out = workdir / "eval_out"
    result = CliRunner().invoke(main, [
        "eval", str(workdir / "test.csv"), "--bundle", str(hier), "--out", str(out)
    ], catch_exceptions=False)
    assert result.exit_code == 0
    assert "subset accuracy" in result.output  # convention echoed
    assert (out / "eval.json").exists()
    assert (out / "eval.csv").exists()
    assert (out / "eval.png").exists()  # figure rendered next to delimited output
    report = json.loads((out / "eval.json").read_text())
    assert 0.0 <= report["micro"]["f1"] <= 1.0


def test_compare_writes_mcnemar_and_figure(bundles, workdir):
    hier, flat = bundles
    out = workdir / "compare_out"
    result = CliRunner().invoke(main, [
        "compare", str(workdir / "test.csv"),
        "--bundle-a", str(hier), "--bundle-b", str(flat),
        "--per-label", "--out", str(out),
    ], catch_exceptions=False)
    assert result.exit_code == 0, result.output
    summary = json.loads((out / "compare.json").read_text())
    assert {"b", "c", "statistic", "p_value"} <= set(summary["mcnemar"])
    assert "per_label" in summary
    assert (out / "compare.png").exists()
    assert (out / "model_a.csv").exists() and (out / "model_b.csv").exists()


def test_synth_and_split_commands(workdir, ont):
    runner = CliRunner()
    corpus = workdir / "synth.csv"
    result = runner.invoke(main, [
        "synth", "--n", "120", "--seed", "3", "--labels", "6", "--out", str(corpus)
    ], catch_exceptions=False)
    assert result.exit_code == 0
    parts = corpusio.read_corpus(corpus, ont)
    assert len(parts) == 120

    result = runner.invoke(main, [
        "split", str(corpus), "--out-prefix", str(workdir / "sp"), "--seed", "1"
    ], catch_exceptions=False)
    assert result.exit_code == 0
    sizes = [len(corpusio.read_corpus(workdir / f"sp.{n}.csv", ont)) for n in ("train", "val", "test")]
    assert sizes == [72, 24, 24]
    assert sum(sizes) == 120
