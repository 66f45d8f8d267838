import json
from pathlib import Path

import pytest

from spikeconv.cli import main

DATA = Path(__file__).resolve().parents[1] / "demos" / "data"
MODEL = str(DATA / "toy_model.json")
INPUT = str(DATA / "toy_input.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_compare_toy_lossless(capsys):
    code, doc, _ = run(capsys, "compare", "--model", MODEL, "--T", "5", "--neuron", "if", "--t-delay", "5",
                       "--input", INPUT)
    assert code == 0
    assert doc["passed"] and doc["max_abs_err"] <= 1e-5


def test_compare_adversarial_order_without_delay(capsys):
    code, doc, _ = run(capsys, "compare", "--model", MODEL, "--T", "5", "--t-delay", "0",
                       "--input", str(DATA / "toy_spikes_overflow.json"))
    assert code == 1
    assert doc["max_abs_err"] > 0.05


def test_pipeline_latency(capsys):
    code, doc, err = run(capsys, "pipeline", "--layers", "3", "--T", "8", "--t-delay", "8")
    assert code == 0
    assert doc["latency_first_sample"] == 32
    assert doc["conflicts"] == 0
    assert "L3 fire" in err


def test_demo_anchor_T1(capsys):
    code, doc, _ = run(capsys, "demo", "anchor", "--T", "1")
    assert code == 0 and doc["attainable"] == 2


def test_demo_order(capsys):
    code, doc, _ = run(capsys, "demo", "fig1")
    assert code == 0
    assert doc["plain_if"]["zero_residual"]["rate"] == 0.4
    assert doc["plain_if"]["overflow"]["residual"] >= 1
    assert doc["plain_if"]["negative"]["residual"] < 0
    assert doc["delay_spike"]["outcomes"] == [{"rate": 0.4, "residual": 0.0}]


def test_convert_run_snn_energy(tmp_path, capsys):
    snn = tmp_path / "toy_snn.json"
    code, doc, _ = run(capsys, "convert", "--model", MODEL, "--T", "5", "--neuron", "IF", "--out", str(snn))
    assert code == 0 and snn.exists() and doc["T_delay"] == 5

    code, doc, _ = run(capsys, "run-snn", "--snn", str(snn), "--input", INPUT)
    assert code == 0 and doc["rates"] == [[0.4]]

    code, doc, _ = run(capsys, "energy", "--snn", str(snn), "--input", INPUT)
    assert code == 0
    assert doc["average_spiking_rate"] == 0.4 and doc["energy_ratio"] == 1.0
    assert doc["architecture"] == "toy"


def test_run_ann(capsys):
    code, doc, _ = run(capsys, "run-ann", "--model", MODEL, "--input", INPUT)
    assert code == 0
    assert doc["activations"][0] == pytest.approx([0.4])


def test_deterministic_output(capsys):
    first = run(capsys, "demo", "suite", "--count", "5")
    second = run(capsys, "demo", "suite", "--count", "5")
    assert first == second and first[1]["residual_violations"] == 0


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["pipeline", "--layers", "3", "--bogus"])
    assert info.value.code == 2


def test_runtime_error_exits_1_with_structured_message(tmp_path, capsys):
    code, doc, err = run(capsys, "run-ann", "--model", str(tmp_path / "missing.json"), "--input", INPUT)
    assert code == 1 and doc is None
    assert json.loads(err)["error"] == "ModelFileError"
