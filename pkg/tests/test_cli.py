"""Command-line interface: config parsing, dispatch and determinism."""

import json

import pytest

from qcsma import ParseError
from qcsma.cli import build_model, build_rate, load_config, main
from qcsma.params import Frozen, Model, PowerLaw, Tabulated


GOOD_SPEC = {
    "size_u": 2, "size_v": 2, "gamma_u": 1.0, "gamma_v": 1.0,
    "lambda_u": 1.0, "lambda_v": 1.0, "mu": 2.0, "c": 1.5,
    "r": 300.0, "delta": 0.05,
}


def write_config(tmp_path, **extra):
    cfg = {
        "spec": dict(GOOD_SPEC),
        "g_u": {"kind": "power", "G": 1.0, "beta": 1.0},
        "g_v": {"kind": "power", "G": 1.0, "beta": 1.5},
        "model": "internal",
        "replicas": 20,
        "seed": 3,
    }
    cfg.update(extra)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


class TestConfigParsing:
    def test_good_config_loads(self, tmp_path):
        cfg = load_config(write_config(tmp_path))
        assert cfg["spec"].r == 300.0
        assert cfg["model"] is Model.INTERNAL
        assert isinstance(cfg["g_v"], PowerLaw)

    def test_unknown_top_level_key_named(self, tmp_path):
        path = write_config(tmp_path, bogus=1)
        with pytest.raises(ParseError, match="bogus"):
            load_config(path)

    def test_unknown_spec_key_named(self, tmp_path):
        spec = dict(GOOD_SPEC)
        spec["tyop"] = 1
        path = write_config(tmp_path, spec=spec)
        with pytest.raises(ParseError, match="tyop"):
            load_config(path)

    def test_missing_spec_key(self, tmp_path):
        spec = dict(GOOD_SPEC)
        del spec["mu"]
        path = write_config(tmp_path, spec=spec)
        with pytest.raises(ParseError, match="mu"):
            load_config(path)

    def test_unknown_rate_kind(self, tmp_path):
        path = write_config(tmp_path, g_u={"kind": "cubic"})
        with pytest.raises(ParseError, match="cubic"):
            load_config(path)

    def test_unknown_model(self, tmp_path):
        path = write_config(tmp_path, model="sideways")
        with pytest.raises(ParseError, match="sideways"):
            load_config(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ParseError):
            load_config(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_config(str(tmp_path / "absent.json"))

    def test_overrides_applied(self, tmp_path):
        cfg = load_config(
            write_config(tmp_path),
            {"seed": 77, "replicas": 5, "model": "external", "r": 999.0},
        )
        assert cfg["seed"] == 77
        assert cfg["replicas"] == 5
        assert cfg["model"] is Model.EXTERNAL
        assert cfg["spec"].r == 999.0

    def test_build_rate_kinds(self):
        assert isinstance(
            build_rate({"kind": "tabulated", "breakpoints": [[1, 1], [2, 2]]}, "g"),
            Tabulated,
        )
        g = build_rate(
            {"kind": "power_slowly_varying", "beta": 0.5,
             "modulation": {"kind": "log_power", "exponent": 1.0}},
            "g",
        )
        assert g(10.0) > 0

    def test_build_model_frozen(self):
        m = build_model("frozen", 12.5)
        assert isinstance(m, Frozen)
        assert m.s == 12.5


class TestDispatch:
    def test_theory_outputs(self, tmp_path):
        code = main(
            ["theory", "--config", write_config(tmp_path), "--out", str(tmp_path / "o")]
        )
        assert code == 0
        report = json.loads((tmp_path / "o" / "theory_report.json").read_text())
        assert report["regime"] == "critical"
        lines = (tmp_path / "o" / "limit_law.csv").read_text().splitlines()
        assert lines[0] == "x,survival"
        assert lines[1] == "0.00,1.0"

    def test_simulate_outputs(self, tmp_path):
        out = tmp_path / "sim"
        code = main(
            ["simulate", "--config", write_config(tmp_path), "--out", str(out),
             "--replicas", "10", "--trajectories"]
        )
        assert code == 0
        rows = [
            json.loads(line)
            for line in (out / "replicas.jsonl").read_text().splitlines()
        ]
        assert len(rows) == 10
        assert {"tau", "tau_bar", "censored", "seed"} <= set(rows[0])
        summary = json.loads((out / "summary.json").read_text())
        assert summary["n"] == 10
        header = (out / "trajectory_0.csv").read_text().splitlines()[0]
        assert header == "t,node,side,active,queue"

    def test_couple_outputs(self, tmp_path):
        out = tmp_path / "cpl"
        code = main(
            ["couple", "--config", write_config(tmp_path), "--out", str(out),
             "--replicas", "5"]
        )
        assert code == 0
        summary = json.loads((out / "sandwich.json").read_text())
        assert summary["n"] == 5
        assert len((out / "coupled.jsonl").read_text().splitlines()) == 5

    def test_sweep_outputs(self, tmp_path):
        out = tmp_path / "sw"
        code = main(
            ["sweep", "--config",
             write_config(tmp_path, sweep_r=[200, 400, 900, 2100], replicas=30),
             "--out", str(out)]
        )
        assert code == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "r,n,censored,mean_tau,se"
        assert len(lines) == 5
        fit = json.loads((out / "fit.json").read_text())
        assert 0.5 < fit["slope"] < 1.5

    def test_sweep_without_grid_fails(self, tmp_path):
        code = main(
            ["sweep", "--config", write_config(tmp_path), "--out", str(tmp_path / "x")]
        )
        assert code == 2

    def test_bad_config_exit_code(self, tmp_path):
        path = write_config(tmp_path, bogus=1)
        assert main(["theory", "--config", path, "--out", str(tmp_path / "y")]) == 2


class TestValidateSubset:
    def test_byte_identical_outputs(self, tmp_path):
        dirs = [tmp_path / "a", tmp_path / "b"]
        subset = "asymptotic-mean,input-tube"
        for d in dirs:
            code = main(
                ["validate", "--out", str(d), "--seed", "5", "--only", subset]
            )
            assert code == 0
        names = sorted(p.name for p in dirs[0].iterdir())
        assert names == sorted(p.name for p in dirs[1].iterdir())
        for name in names:
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()

    def test_unknown_criterion_rejected(self, tmp_path):
        with pytest.raises(KeyError):
            main(["validate", "--out", str(tmp_path), "--only", "nonsense"])
