import csv
import io
import json
import subprocess
import sys

import pytest

from fraclab.cli import (RunConfig, build_parser, exit_status, main, payload, read_config_file,
                         resolve_config, run, to_csv)

FAST = ["--samples", "5000", "--approx-samples", "5000"]


def parse(argv, environ=None):
    return resolve_config(build_parser().parse_args(argv), environ or {})


class TestConfigResolution:
    def test_defaults(self):
        cfg = parse(["params"])
        assert (cfg.N, cfg.s, cfg.p, cfg.a) == (3, 1.25, 1.6, 0.25)
        assert cfg.suite == "params"

    def test_precedence(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("seed = 5\nworkers = 2\nsamples = 7000  # comment\nfunctions = bump, gaussian\n")
        cfg = parse(["verify", "norms", "--config", str(conf)])
        assert (cfg.seed, cfg.workers, cfg.samples) == (5, 2, 7000)
        assert cfg.functions == ("bump", "gaussian")
        cfg = parse(["verify", "norms", "--config", str(conf)],
                    {"FRACLAB_SEED": "11", "FRACLAB_WORKERS": "3"})
        assert (cfg.seed, cfg.workers) == (11, 3)
        cfg = parse(["verify", "norms", "--config", str(conf), "--seed", "13"],
                    {"FRACLAB_SEED": "11"})
        assert cfg.seed == 13

    def test_bad_config_key(self, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("colour = blue\n")
        with pytest.raises(KeyError):
            read_config_file(str(conf))

    def test_subcommand_function_selection(self):
        cfg = parse(["approx", "gaussian", "--ns", "1,3"])
        assert cfg.functions == ("gaussian",) and cfg.approx_ns == (1, 3)
        assert cfg.suite == "mollify-approx"


class TestExitCodes:
    def test_invalid_parameters_exit_2(self, capsys):
        assert main(["params", "--n", "2", "--s", "1.3", "--p", "1.4", "--a", "0.1"]) == 2
        assert "a-window" in capsys.readouterr().err

    def test_unknown_function_exit_2(self):
        assert main(["norm", "sinc", "seminorm"]) == 2

    def test_report_needs_suite(self):
        assert main(["report"]) == 2

    def test_violation_exit_1(self):
        bundle = {"results": [{"verdict": "holds"}, {"verdict": "violated"}]}
        assert exit_status(bundle) == 1
        assert exit_status({"results": [{"verdict": "inconclusive"}]}) == 0


class TestOutputs:
    def test_params_json(self, capsys):
        assert main(["params"]) == 0
        out = json.loads(capsys.readouterr().out)
        vals = out["results"][0]["values"]
        assert vals["p_lorentz"] == pytest.approx(9.6)
        assert vals["ckn_admissible"] is True
        assert "provenance" in out["config"]

    def test_norm_spec(self, capsys):
        assert main(["norm", "gaussian", "lp:2,0"] + FAST) == 0
        res = json.loads(capsys.readouterr().out)["results"][0]
        assert res["value"] == pytest.approx((3.141592653589793 / 2) ** 0.75, rel=1e-8)

    def test_csv_has_row_per_check(self, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["verify", "rearrange", "--format", "csv", "--out", str(out)] + FAST) == 0
        rows = list(csv.DictReader(io.StringIO(out.read_text())))
        assert {r["key"] for r in rows} == {
            "rearrange/bump/hardy_layercake", "rearrange/bump/layer_cake",
            "rearrange/bump/lorentz", "rearrange/bump/sobolev_layercake"}

    def test_errors_are_captured_per_job(self):
        cfg = RunConfig(suite="norms", functions=("ball_indicator",), samples=5000)
        bundle = run(cfg)
        assert all(r["kind"] != "error" for r in bundle["results"])
        assert [r["key"] for r in bundle["results"]] == ["norms/ball_indicator/weighted_lp"]

    def test_payload_is_deterministic_across_workers(self):
        a = run(RunConfig(suite="rearrange", functions=("bump", "gaussian"), samples=5000))
        b = run(RunConfig(suite="rearrange", functions=("bump", "gaussian"), samples=5000,
                          workers=4))
        a["config"].pop("workers")
        b["config"].pop("workers")
        assert payload(a) == payload(b)

    def test_inequalities_on_zero(self):
        bundle = run(RunConfig(suite="inequalities", functions=("zero",), samples=5000))
        checks = [r for r in bundle["results"] if not r["key"].startswith("inequalities/elementary")]
        assert {r["key"].split("/")[-1] for r in checks} == {
            "hardy", "rellich", "ckn_first_order", "grad_equivalence", "lorentz_embedding",
            "weak_young"}
        for r in checks:
            assert r["verdict"] == "holds"
            assert r["lhs"]["value"] == 0.0 and r["rhs"]["value"] == 0.0
        assert exit_status(bundle) == 0

    def test_non_finite_values_sanitised(self):
        from fraclab.cli import _clean
        assert _clean({"x": float("inf"), "y": [float("nan")]}) == {"x": "inf", "y": ["nan"]}
        json.dumps(_clean({"x": float("inf")}), allow_nan=False)

    def test_to_csv_handles_slopes(self):
        bundle = {"results": [{"key": "k", "suite": "s", "kind": "slope", "slope": 1.5,
                               "slope_uncertainty": 0.1, "verdict": "holds"}]}
        row = next(csv.DictReader(io.StringIO(to_csv(bundle))))
        assert row["value"] == "1.5"

    def test_console_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "fraclab.cli", "params"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["config"]["suite"] == "params"
