import csv
import json
import math

import pytest

from ncspectral.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_PRECONDITION,
    EXIT_TOLERANCE,
    EXIT_UNKNOWN,
    RunConfig,
    build_one_form,
    build_theta,
    main,
)


def run_cli(args):
    return main(list(args))


class TestExitCodes:
    def test_unknown_group(self, capsys):
        assert run_cli(["frobnicate"]) == EXIT_UNKNOWN

    def test_unknown_subcommand(self, capsys):
        assert run_cli(["zeta", "explode"]) == EXIT_UNKNOWN

    def test_empty_invocation(self, capsys):
        assert run_cli([]) == EXIT_CONFIG

    def test_empty_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{}")
        assert run_cli(["zeta", "residue", "--P", "k1^2",
                        "--config", str(cfg)]) == EXIT_CONFIG

    def test_malformed_json(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        assert run_cli(["zeta", "residue", "--P", "k1^2",
                        "--config", str(cfg)]) == EXIT_CONFIG

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"n": 2, "bogus": 1}))
        assert run_cli(["zeta", "residue", "--P", "k1^2",
                        "--config", str(cfg)]) == EXIT_CONFIG

    def test_pole_evaluation_is_precondition_failure(self, tmp_path, capsys):
        assert run_cli(["zeta", "eval", "--P", "1", "--s-re", "2.0", "--n", "2",
                        "--out", str(tmp_path)]) == EXIT_PRECONDITION


class TestRunConfig:
    def test_round_trip(self):
        cfg = RunConfig(n=4, theta_preset="rational", theta_params={"p": 1, "q": 3},
                        one_form=[[1, [0, 1, 0, 0], 0.3, -0.1]], seed=5)
        back = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert back == cfg

    def test_theta_presets(self):
        golden = build_theta(RunConfig(n=2, theta_preset="golden"))
        assert golden.theta[0, 1] == pytest.approx(2 * math.pi * 0.6180339887498949)
        zero = build_theta(RunConfig(n=2, theta_preset="zero"))
        assert not zero.theta.any()
        rational = build_theta(RunConfig(n=2, theta_preset="rational",
                                         theta_params={"p": 1, "q": 2}))
        assert rational.theta[0, 1] == pytest.approx(math.pi)
        explicit = build_theta(RunConfig(n=2, theta_preset="matrix",
                                         theta_params={"matrix": [[0, 1], [-1, 0]]}))
        assert explicit.theta[0, 1] == 1.0

    def test_one_form_symmetrization(self):
        cfg = RunConfig(n=2, one_form=[[1, [1, 0], 0.25, 0.5]])
        A = build_one_form(cfg)
        comp = A.components[0]
        assert comp.coeff((1, 0)) == 0.25 + 0.5j
        assert comp.coeff((-1, 0)) == -(0.25 - 0.5j)


class TestRuns:
    def test_residue_row(self, tmp_path, capsys):
        code = run_cli(["zeta", "residue", "--n", "4", "--P", "k1^2*k2^2",
                        "--shift", "6", "--out", str(tmp_path)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "0.822467" in out  # pi^2 / 12
        rows = list(csv.DictReader(open(tmp_path / "zeta-residue" / "results.csv")))
        assert float(rows[0]["residue_re"]) == pytest.approx(math.pi ** 2 / 12, rel=1e-12)
        summary = json.loads((tmp_path / "zeta-residue" / "summary.json").read_text())
        assert summary["config"]["n"] == 4
        assert "artifact_version" in summary

    def test_eval_at_origin(self, tmp_path, capsys):
        code = run_cli(["zeta", "eval", "--n", "2", "--P", "1", "--s-re", "0",
                        "--out", str(tmp_path)])
        assert code == EXIT_OK
        rows = list(csv.DictReader(open(tmp_path / "zeta-eval" / "results.csv")))
        assert float(rows[0]["value_re"]) == pytest.approx(-1.0, abs=1e-12)

    def test_op_check_passes(self, tmp_path, capsys):
        code = run_cli(["op", "check", "--all", "--n", "2", "--samples", "6",
                        "--out", str(tmp_path)])
        assert code == EXIT_OK
        summary = json.loads((tmp_path / "op-check" / "summary.json").read_text())
        assert summary["all_ok"] is True
        assert summary["worst_deviation"] < 1e-13

    def test_op_check_tolerance_failure(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"tolerance": 1e-20}))
        code = run_cli(["op", "check", "--all", "--n", "2", "--samples", "4",
                        "--config", str(cfg), "--out", str(tmp_path)])
        assert code == EXIT_TOLERANCE

    def test_dio_construct(self, tmp_path, capsys):
        code = run_cli(["dio", "construct", "--f", '{"kind": "power", "alpha": 3}',
                        "--depth", "5", "--out", str(tmp_path)])
        assert code == EXIT_OK
        rows = list(csv.DictReader(open(tmp_path / "dio-construct" / "results.csv")))
        assert all(row["ok"] == "True" for row in rows)

    def test_determinism_byte_identical(self, tmp_path, capsys):
        out = tmp_path / "a"
        args = ["zeta", "eval", "--n", "2", "--P", "k1^2", "--s-re", "1.5",
                "--twist", "[0.2, 0.3]", "--out", str(out)]
        assert run_cli(args) == EXIT_OK
        csv_first = (out / "zeta-eval" / "results.csv").read_bytes()
        summary_first = (out / "zeta-eval" / "summary.json").read_bytes()
        assert run_cli(args) == EXIT_OK
        assert (out / "zeta-eval" / "results.csv").read_bytes() == csv_first
        assert (out / "zeta-eval" / "summary.json").read_bytes() == summary_first

    def test_gamma_dump(self, tmp_path, capsys):
        code = run_cli(["op", "check", "--n", "2", "--samples", "3",
                        "--dump-gammas", "--out", str(tmp_path)])
        assert code == EXIT_OK
        data = json.loads((tmp_path / "op-check" / "gammas.json").read_text())
        assert data["n"] == 2 and len(data["gammas"]) == 2
        assert data["epsilon"] in (1, -1)

    def test_threads_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("NCSPECTRAL_THREADS", "2")
        code = run_cli(["zeta", "residue", "--n", "2", "--P", "k1^2",
                        "--out", str(tmp_path)])
        assert code == EXIT_OK
        summary = json.loads((tmp_path / "zeta-residue" / "summary.json").read_text())
        assert summary["config"]["threads"] == 2
