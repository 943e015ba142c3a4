import json
import math

import numpy as np
import pytest

from vsturm.cli import main, run
from vsturm.config import ConfigError, parse_config
from vsturm.report import parse_json, report_to_dict, serialize_csv, serialize_json

MINIMAL = {
    "dimension": 1,
    "potential": {"kind": "zero"},
    "h_left": [[0.0]],
    "h_right": [[0.0]],
    "command": "spectrum",
    "lambda_max": 5,
}


def config_text(**overrides):
    cfg = dict(MINIMAL)
    cfg.update(overrides)
    return json.dumps(cfg)


def test_parse_minimal_config():
    cfg = parse_config(config_text())
    assert cfg.command == "spectrum"
    assert cfg.lambda_max == 5.0
    assert cfg.problem.dimension == 1
    assert cfg.delta == 1.0 and cfg.order == 1 and cfg.format == "json"


def test_parse_rejects_asymmetric_matrix():
    text = config_text(dimension=2, h_left=[[0.0, 1.0], [0.0, 0.0]],
                       h_right=[[0.0, 0.0], [0.0, 0.0]],
                       potential={"kind": "zero"})
    with pytest.raises(ConfigError, match="h_left"):
        parse_config(text)


def test_parse_rejects_unknown_key_by_name():
    cfg = dict(MINIMAL)
    cfg["hL"] = [[0.0]]
    with pytest.raises(ConfigError, match="hL"):
        parse_config(json.dumps(cfg))


def test_parse_rejects_unknown_nested_key():
    with pytest.raises(ConfigError, match=r"\$\.potential\.matrices"):
        parse_config(config_text(potential={"kind": "zero", "matrices": []}))


def test_parse_requires_command_parameters():
    cfg = dict(MINIMAL)
    del cfg["lambda_max"]
    with pytest.raises(ConfigError, match="lambda_max"):
        parse_config(json.dumps(cfg))
    with pytest.raises(ConfigError, match="n_range"):
        parse_config(config_text(command="verify"))
    with pytest.raises(ConfigError, match="alpha"):
        parse_config(config_text(command="transroot", n_range=[5, 10]))


def test_parse_full_potential_kinds():
    dense = {
        "kind": "dense",
        "upper": [{"sin": [[1.0, 1.0]]}, {"poly": [0.0, 0.3183]}, {"poly": [1.0]}],
    }
    cfg = parse_config(config_text(dimension=2, potential=dense,
                                   h_left=[[0.0, 0.0], [0.0, 0.0]],
                                   h_right=[[1.0, 0.0], [0.0, 1.0]]))
    assert cfg.problem.potential.kind == "dense"
    pw = {
        "kind": "piecewise",
        "breakpoints": [1.5],
        "pieces": [{"upper": [{"poly": [1.0]}]},
                   {"upper": [{"poly": [2.0]}]}],
    }
    cfg = parse_config(config_text(potential=pw))
    assert cfg.problem.potential.n_pieces == 2


def test_run_spectrum_free(tmp_path):
    out = tmp_path / "report.json"
    cfg = parse_config(config_text(dimension=2,
                                   h_left=[[0, 0], [0, 0]],
                                   h_right=[[0, 0], [0, 0]],
                                   output_path=str(out), canonical=True))
    rep = run(cfg)
    lams = [r.lam for r in rep.eigenvalues]
    assert lams == pytest.approx([0.0, 1.0, 4.0], abs=1e-8)
    assert [r.multiplicity for r in rep.eigenvalues] == [2, 2, 2]
    assert out.exists()
    assert parse_json(out.read_text()) == rep


def test_report_round_trip_and_determinism(tmp_path):
    cfg = parse_config(config_text(command="transroot", alpha=1.0,
                                   n_range=[10, 14], canonical=True))
    rep1 = run(cfg)
    rep2 = run(cfg)
    assert serialize_json(rep1) == serialize_json(rep2)
    assert parse_json(serialize_json(rep1)) == rep1


def test_csv_and_json_carry_identical_values():
    cfg = parse_config(config_text(command="transroot", alpha=0.5,
                                   n_range=[8, 12], canonical=True))
    rep = run(cfg)
    csv_text = serialize_csv(rep)
    lines = csv_text.strip().splitlines()
    assert lines[0] == "n,root,series_seed,kappa_estimate"
    data = report_to_dict(rep)["transroots"]
    assert len(lines) - 1 == len(data)
    for line, row in zip(lines[1:], data):
        n, root, seed, kappa = line.split(",")
        assert int(n) == row["n"]
        assert float(root) == row["root"]  # repr round-trips exactly
        assert float(seed) == row["series_seed"]
        assert float(kappa) == row["kappa_estimate"]


def test_cli_main_spectrum(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    out_path = tmp_path / "rep.json"
    cfg_path.write_text(config_text())
    code = main(["--config", str(cfg_path), "--out", str(out_path),
                 "--canonical"])
    assert code == 0
    rep = parse_json(out_path.read_text())
    assert rep.command == "spectrum"
    assert rep.timings is None


def test_cli_main_stdout_when_no_out(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(config_text(command="identities", canonical=True))
    assert main(["--config", str(cfg_path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["identities"]) == 400
    assert max(row["error"] for row in payload["identities"]) <= 1e-12


def test_cli_exit_code_on_config_error(tmp_path, capsys):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text("{not json")
    assert main(["--config", str(cfg_path)]) == 1
    cfg_path.write_text(config_text(command="nonsense"))
    assert main(["--config", str(cfg_path)]) == 1
    assert main(["--config", str(tmp_path / "missing.json")]) == 1


def test_cli_exit_code_on_numerical_failure(tmp_path, monkeypatch, capsys):
    from vsturm import cli as cli_mod
    from vsturm.locator import CountMismatchError

    def boom(*args, **kwargs):
        raise CountMismatchError("forced failure")

    monkeypatch.setattr(cli_mod, "scan_low_spectrum", boom)
    cfg_path = tmp_path / "cfg.json"
    out_path = tmp_path / "rep.json"
    cfg_path.write_text(config_text(output_path=str(out_path)))
    assert main(["--config", str(cfg_path)]) == 2
    assert not out_path.exists()  # no partial report


def test_cli_overrides(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(config_text(command="transroot", alpha=1.0,
                                    n_range=[30, 40]))
    out_path = tmp_path / "rep.json"
    code = main(["--config", str(cfg_path), "--out", str(out_path),
                 "--n-range", "10:12", "--canonical"])
    assert code == 0
    rep = parse_json(out_path.read_text())
    assert [t.n for t in rep.transroots] == [10, 11, 12]
    assert main(["--config", str(cfg_path), "--n-range", "7"]) == 1


def test_run_verify_report_contents(tmp_path):
    cfg = parse_config(json.dumps({
        "dimension": 2,
        "potential": {"kind": "constant", "matrix": [[2, 0], [0, 2]]},
        "h_left": [[0, 0], [0, 0]],
        "h_right": [[0, 0], [0, 0]],
        "command": "verify",
        "n_range": [8, 12],
        "canonical": True,
    }))
    rep = run(cfg)
    assert rep.alphas == pytest.approx((1.0, 1.0))
    assert len(rep.clusters) == 5
    assert all(c.multiplicity_sum == 2 for c in rep.clusters)
    assert all(count == 2 for _n, count in rep.rouche)
    for c in rep.clusters:
        exact = c.n * (math.sqrt(c.n ** 2 + 2.0) - c.n)
        assert c.residuals == pytest.approx((exact, exact), abs=1e-6)
    csv_text = serialize_csv(rep)
    assert csv_text.splitlines()[0].startswith("n,slot,residual")
