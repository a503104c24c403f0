import csv
import json

import pytest
from click.testing import CliRunner

from reflexloop.cli import main

from conftest import FIELD_LONG


@pytest.fixture
def runner():
    return CliRunner()


def test_noise_gen_from_seed(runner):
    res = runner.invoke(main, ["noise", "gen", "--seed", "12345",
                               "--length", "600"])
    assert res.exit_code == 0
    payload = json.loads(res.output)
    assert payload["seed"] == 12345
    assert payload["length"] == 600
    assert len(payload["chars"]) == 600
    assert 4.2 <= payload["entropy_bits"] <= 4.9


def test_noise_gen_from_signals_matches_derivation(runner):
    signals = ",".join(["1.0"] * 9 + ["0"])
    res = runner.invoke(main, ["noise", "gen", "--signals", signals,
                               "--length", "500"])
    assert res.exit_code == 0
    assert json.loads(res.output)["seed"] == 2835935289


def test_noise_gen_requires_seed_or_signals(runner):
    res = runner.invoke(main, ["noise", "gen"])
    assert res.exit_code != 0
    assert "--seed or --signals" in res.output


def test_seed_extract_both_variants(runner, tmp_path):
    field_file = tmp_path / "field.txt"
    field_file.write_text(FIELD_LONG)
    for variant in ("sigmoid", "acf"):
        res = runner.invoke(main, ["seed", "extract", "--in", str(field_file),
                                   "--variant", variant])
        assert res.exit_code == 0, res.output
        payload = json.loads(res.output)
        assert "phi_noise" in payload["phases"]
        total = sum(
            payload["seed"][k]
            for k in ("symbol_density", "digit_density",
                      "upper_density", "lower_density")
        )
        assert total == pytest.approx(1.0, abs=1e-5)


def test_analyze_text_file(runner, tmp_path):
    text_file = tmp_path / "t.txt"
    text_file.write_text(
        "The morning light crosses the narrow street, and the quiet room "
        "waits. Memory weaves a thin thread through the old glass. "
        "The window opens and the day begins again."
    )
    res = runner.invoke(main, ["analyze", "--in", str(text_file)])
    assert res.exit_code == 0, res.output
    payload = json.loads(res.output)
    assert payload["kappa_p"] > 0
    assert 0.0 <= payload["H_norm"] <= 1.0


def test_emospace_project_with_config(runner, tmp_path):
    feats = tmp_path / "features.json"
    feats.write_text(json.dumps({
        "H_lex": 4.2, "H_syn": 1.5,
        "f_emotion": 0.40, "f_logic": 0.031,
        "tau_dialogue": 0.40, "rho_rhythm": 0.74, "echo_rate": 0.40,
    }))
    axes = tmp_path / "axes.json"
    axes.write_text(json.dumps({
        "sc": "entropy-mean", "le": "marker-diff", "lr": "dialogic",
    }))
    res = runner.invoke(main, ["emospace", "project", "--bundle", str(feats),
                               "--config", str(axes)])
    assert res.exit_code == 0, res.output
    payload = json.loads(res.output)
    assert payload["SC"] == pytest.approx(0.4385, abs=1e-3)
    assert payload["LE"] == pytest.approx(0.5707, abs=1e-3)
    assert payload["LR"] == pytest.approx(0.502, abs=1e-3)
    assert payload["persona"] in ("Observer", "Resonator", "Constructor")


def test_session_run_then_detect_and_export(runner, tmp_path):
    log = tmp_path / "run.jsonl"
    res = runner.invoke(main, ["session", "run", "--cycles", "15",
                               "--log", str(log)])
    assert res.exit_code == 0, res.output
    assert "ran 15 cycles" in res.output
    assert log.exists()

    phases_csv = tmp_path / "phases.csv"
    res2 = runner.invoke(main, ["cycles", "detect", "--log", str(log),
                                "--out", str(phases_csv)])
    assert res2.exit_code == 0, res2.output
    with open(phases_csv, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "cycle"
    assert len(rows) == 16  # header + 15 cycles

    out_csv = tmp_path / "log.csv"
    res3 = runner.invoke(main, ["session", "export", "--log", str(log),
                                "--fmt", "csv", "--out", str(out_csv)])
    assert res3.exit_code == 0, res3.output
    with open(out_csv, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 16

    seeds_json = tmp_path / "seeds.json"
    res4 = runner.invoke(main, ["session", "export", "--log", str(log),
                                "--fmt", "seedfile", "--out", str(seeds_json)])
    assert res4.exit_code == 0, res4.output
    assert len(json.loads(seeds_json.read_text())["noise_seeds"]) == 15


def test_session_run_with_config_file(runner, tmp_path):
    cfg = tmp_path / "cfg.json"
    from reflexloop.session import SessionConfig
    cfg.write_text(json.dumps(SessionConfig(phi_noise=0.30, seed=9).to_dict()))
    log = tmp_path / "c.jsonl"
    res = runner.invoke(main, ["session", "run", "--config", str(cfg),
                               "--cycles", "12", "--log", str(log)])
    assert res.exit_code == 0, res.output
    first = json.loads(log.read_text().splitlines()[0])
    assert first["cycle"] == 1


def test_session_run_live_refused(runner):
    res = runner.invoke(main, ["session", "run", "--generator", "live"])
    assert res.exit_code != 0
    assert "adapter" in res.output


def test_session_sweep_reports_periods(runner):
    res = runner.invoke(main, ["session", "sweep", "--phi", "0.30",
                               "--cycles", "60", "--seed", "3"])
    assert res.exit_code == 0, res.output
    assert "phi_noise=0.3" in res.output
    assert "2*pi/phi = 20.9" in res.output
