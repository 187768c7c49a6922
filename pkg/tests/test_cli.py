"""Command-line surface: schemas, determinism, exit codes, output modes."""

import csv
import io
import json
import math

import pytest

from alphatail import catalog, format_spec, parse_spec
from alphatail.cli import main


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestTn:
    def test_schedule_and_schema(self, run):
        code, out, _ = run("tn", "--dist", "geometric:a=2",
                           "--schedule", "16:1048576:x4", "--eps", "1e-9")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "n,t_n,trunc_error"
        assert len(lines) == 10  # header + 9 schedule points
        ns = [int(r["n"]) for r in rows_of(out)]
        assert ns == [16 * 4 ** j for j in range(9)]

    def test_json_wraps_same_fields(self, run):
        code, out, _ = run("tn", "--dist", "geometric:a=2",
                           "--schedule", "16:256:x4", "--format", "json")
        assert code == 0
        doc = json.loads(out)
        assert set(doc["records"][0]) == {"n", "t_n", "trunc_error"}

    def test_values_are_finite(self, run):
        _, out, _ = run("tn", "--dist", "power:lambda=2", "--schedule", "16:4096:x4")
        for r in rows_of(out):
            assert math.isfinite(float(r["t_n"]))
            assert math.isfinite(float(r["trunc_error"]))

    def test_bad_schedule_exit_2(self, run):
        code, _, err = run("tn", "--dist", "geometric:a=2", "--schedule", "16-32")
        assert code == 2
        assert err.strip()

    def test_bad_dist_exit_2(self, run):
        code, _, _ = run("tn", "--dist", "power:lambda=0.5")
        assert code == 2


class TestClassify:
    def test_analytic_json(self, run):
        code, out, _ = run("classify", "--dist", "power:lambda=2", "--mode", "analytic")
        assert code == 0
        doc = json.loads(out)
        assert doc["domain"] == "Domain2"
        assert doc["method"] == "Analytic"
        assert doc["citation"]

    def test_numeric_small_schedule(self, run):
        code, out, _ = run("classify", "--dist", "finite:p=0.5;0.5",
                           "--mode", "numeric", "--schedule", "16:1048576:x4")
        assert code == 0
        doc = json.loads(out)
        assert doc["domain"] == "Domain0"
        assert doc["evidence"]


class TestEstimate:
    def test_deterministic_rows(self, run):
        args = ("estimate", "--dist", "geometric:a=2", "--n", "200",
                "--v", "1:199", "--seed", "7")
        code1, out1, _ = run(*args)
        code2, out2, _ = run(*args)
        assert code1 == code2 == 0
        assert out1 == out2
        lines = out1.strip().splitlines()
        assert lines[0] == "v,Z_1v,t_hat"
        assert len(lines) == 200

    def test_single_v(self, run):
        code, out, _ = run("estimate", "--dist", "finite:p=0.5;0.5",
                           "--n", "10", "--v", "3", "--seed", "1")
        assert code == 0
        rows = rows_of(out)
        assert len(rows) == 1 and rows[0]["v"] == "3"


class TestDominates:
    def test_schema_and_verdict(self, run):
        code, out, err = run("dominates", "--q", "geometric:a=2",
                             "--p", "congregated:base=(geometric:a=2)")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "k,count_in_interval"
        assert len(lines) == 51
        assert "not_dominated_at_depth" in err

    def test_json_has_verdict(self, run):
        code, out, _ = run("dominates", "--q", "geometric:a=2",
                           "--p", "geometric:a=3", "--format", "json")
        doc = json.loads(out)
        assert doc["verdict"] == "dominated_within"
        assert {"k", "count_in_interval"} == set(doc["records"][0])

    def test_finite_p_exit_3(self, run):
        code, _, err = run("dominates", "--q", "geometric:a=2", "--p", "finite:p=0.5;0.5")
        assert code == 3
        assert err.strip()


class TestOscillate:
    def test_schema(self, run):
        code, out, _ = run("oscillate", "--grid", "17")
        assert code == 0
        rows = rows_of(out)
        assert len(rows) == 17
        assert set(rows[0]) == {"c", "t_of_c"}
        cs = [float(r["c"]) for r in rows]
        assert cs[0] == 1.0 and cs[-1] == pytest.approx(math.e)


class TestZoo:
    def test_round_trip(self, run):
        code, out, _ = run("zoo")
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == len(catalog())
        for line, spec in zip(lines, catalog()):
            assert parse_spec(line) == spec
            assert format_spec(parse_spec(line)) == line


class TestDomainT:
    def test_run_table(self, run):
        code, out, _ = run("domain-t", "--stages", "6")
        assert code == 0
        rows = rows_of(out)
        assert [r["i"] for r in rows] == [str(i) for i in range(1, 7)]
        assert set(rows[0]) == {"i", "d_i", "run_exp", "n_i", "t_n_i", "m_i", "t_m_i"}
        # probe indices are exact integers (n_i = 2^run_exp, m_i = 2^back - 1)
        for r in rows:
            assert int(r["n_i"]) == 1 << int(r["run_exp"])
        # growing vs bounded subsequences visible in the table
        tn_vals = [float(r["t_n_i"]) for r in rows]
        tm_vals = [float(r["t_m_i"]) for r in rows]
        assert all(b > a for a, b in zip(tn_vals, tn_vals[1:]))
        assert max(tm_vals) < 4.0


class TestOutputPlumbing:
    def test_out_file_and_env_dir(self, run, tmp_path, monkeypatch):
        monkeypatch.setenv("ALPHATAIL_OUT_DIR", str(tmp_path))
        code, out, _ = run("tn", "--dist", "geometric:a=2",
                           "--schedule", "16:64:x2", "--out", "result.csv")
        assert code == 0 and out == ""
        text = (tmp_path / "result.csv").read_text()
        assert text.splitlines()[0] == "n,t_n,trunc_error"
        assert text.endswith("\n")

    def test_absolute_out_ignores_env(self, run, tmp_path, monkeypatch):
        monkeypatch.setenv("ALPHATAIL_OUT_DIR", "/nonexistent-dir")
        target = tmp_path / "direct.csv"
        code, _, _ = run("oscillate", "--grid", "3", "--out", str(target))
        assert code == 0
        assert target.exists()

    def test_unknown_command_exit_2(self, run):
        code, _, _ = run("frobnicate")
        assert code == 2

    def test_non_finite_records_rejected(self):
        from alphatail import AlphatailError
        from alphatail.cli import _check_finite
        with pytest.raises(AlphatailError):
            _check_finite([{"x": float("nan")}])
        with pytest.raises(AlphatailError):
            _check_finite([{"x": float("inf")}])
        _check_finite([{"x": 1.0, "s": "ok"}])

    def test_computation_error_exit_3(self, run):
        # sampling past a shallow constructed prefix is a computation error
        code, _, err = run("estimate", "--dist", "pairavg:base=(geometric:a=2),depth=2",
                           "--n", "500", "--v", "1", "--seed", "0")
        assert code == 3
        assert err.strip()
