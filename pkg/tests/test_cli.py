"""End-to-end command line checks through click's test runner."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

import unmasking as um
from unmasking import specio
from unmasking.cli import main

from .conftest import SPECS_DIR


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def run(runner: CliRunner, *args) -> "click.testing.Result":  # noqa: F821
    return runner.invoke(main, [str(a) for a in args])


PAIR = SPECS_DIR / "pair_correlated.json"
RS = SPECS_DIR / "rs_q7_n5_k2.json"
MIXTURE = SPECS_DIR / "mixture_asymmetric.json"
UNIFORM6 = SPECS_DIR / "uniform_q2_n6.json"
REPETITION = SPECS_DIR / "repetition_q2_n3.json"


class TestCurve:
    def test_csv_default_and_determinism(self, runner):
        first = run(runner, "curve", "--dist", PAIR)
        second = run(runner, "curve", "--dist", PAIR)
        assert first.exit_code == 0
        assert first.output == second.output
        lines = first.output.splitlines()
        assert lines[0] == "j,Z_bits,H_bits"
        assert len(lines) == 3
        z_vals = [float(ln.split(",")[1]) for ln in lines[1:]]
        assert z_vals == pytest.approx([0.0, 1.0])

    def test_json_format(self, runner):
        result = run(runner, "curve", "--dist", PAIR, "--format", "json")
        assert result.exit_code == 0
        obj = json.loads(result.output)
        assert obj["j"] == [1, 2]
        assert obj["Z_bits"] == pytest.approx([0.0, 1.0])
        assert obj["H_bits"] == pytest.approx([1.0, 1.0])
        assert "Z_stderr" not in obj

    def test_mc_adds_stderr_and_tracks_seed(self, runner):
        base = run(runner, "curve", "--dist", MIXTURE, "--method", "mc", "--seed", "0")
        again = run(runner, "curve", "--dist", MIXTURE, "--method", "mc", "--seed", "0")
        moved = run(runner, "curve", "--dist", MIXTURE, "--method", "mc", "--seed", "1")
        assert base.exit_code == moved.exit_code == 0
        assert base.output.splitlines()[0] == "j,Z_bits,H_bits,Z_stderr"
        assert base.output == again.output
        assert base.output != moved.output

    def test_missing_file_is_usage_error(self, runner):
        result = run(runner, "curve", "--dist", "/nonexistent/spec.json")
        assert result.exit_code == 2


class TestSummary:
    def test_json(self, runner):
        result = run(runner, "summary", "--dist", REPETITION)
        assert result.exit_code == 0
        obj = json.loads(result.output)
        assert (obj["n"], obj["q"]) == (3, 2)
        assert obj["tc_bits"] == pytest.approx(2.0, abs=1e-12)
        assert obj["dtc_bits"] == pytest.approx(1.0, abs=1e-12)
        assert obj["z_n_bits"] == pytest.approx(1.0, abs=1e-12)
        assert obj["identity_gap_bits"] <= 1e-9

    def test_csv(self, runner):
        result = run(runner, "summary", "--dist", REPETITION, "--format", "csv")
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == "key,value"
        table = dict(ln.split(",", 1) for ln in lines[1:])
        assert float(table["tc_bits"]) == pytest.approx(2.0)
        assert set(table) == {"n", "q", "tc_bits", "dtc_bits", "z_n_bits", "identity_gap_bits"}


class TestPlan:
    def test_dp_route_from_dist(self, runner):
        result = run(runner, "plan", "--dist", RS, "--k", "2")
        assert result.exit_code == 0
        obj = json.loads(result.output)
        assert obj["source"] == "dp"
        assert obj["schedule"]["steps"] == [2, 3]
        assert obj["nodes"] == [1, 3]
        assert obj["k"] == 2
        assert abs(obj["predicted_kl_bits"]) <= 1e-9

    def test_dp_route_from_curve_file(self, runner, tmp_path):
        curve_path = tmp_path / "curve.csv"
        saved = run(runner, "curve", "--dist", RS, "--out", curve_path, "--no-plot")
        assert saved.exit_code == 0
        result = run(runner, "plan", "--curve", curve_path, "--k", "2")
        assert result.exit_code == 0
        assert json.loads(result.output)["schedule"]["steps"] == [2, 3]

    def test_tc_hat_route_without_curve(self, runner):
        result = run(runner, "plan", "--tc-hat", "1", "--eps", "1", "--n", "8")
        assert result.exit_code == 0
        obj = json.loads(result.output)
        assert obj["source"] == "tc"
        assert obj["schedule"]["steps"] == [4, 2, 1, 1]
        assert obj["predicted_kl_bits"] is None
        assert obj["k_bound"] == pytest.approx(2.0 + (1.0 + math.log(8)) * 2.0)

    def test_austin_route_matches_library(self, runner):
        result = run(runner, "plan", "--austin", "--dtc-hat", "2", "--eps", "1", "--n", "16")
        assert result.exit_code == 0
        obj = json.loads(result.output)
        assert obj["source"] == "austin"
        assert tuple(obj["schedule"]["steps"]) == um.austin_schedule(2.0, 1.0, 16).steps
        assert obj["k_bound"] == pytest.approx(3.0 * math.sqrt(2.0 * 16.0))

    def test_usage_errors(self, runner, tmp_path):
        cases = [
            ("plan", "--dist", PAIR, "--k", "1", "--format", "csv"),  # JSON only
            ("plan", "--dist", PAIR, "--k", "1", "--tc-hat", "1", "--eps", "1"),
            ("plan", "--austin", "--tc-hat", "1", "--eps", "1", "--n", "4"),
            ("plan", "--dist", PAIR, "--n", "3", "--k", "1"),  # n disagrees
            ("plan", "--tc-hat", "1", "--n", "8"),  # missing --eps
            ("plan", "--tc-hat", "1", "--eps", "1"),  # missing --n
            ("plan", "--k", "2"),  # DP needs a curve
        ]
        for args in cases:
            assert run(runner, *args).exit_code == 2, args


class TestSimulate:
    def _write_schedule(self, tmp_path, steps):
        path = tmp_path / "sched.json"
        path.write_text(json.dumps({"steps": list(steps)}))
        return path

    def test_exact_one_shot_on_pair(self, runner, tmp_path):
        sched = self._write_schedule(tmp_path, [2])
        result = run(runner, "simulate", "--dist", PAIR, "--schedule", sched)
        assert result.exit_code == 0
        obj = json.loads(result.output)
        assert obj["method"] == "exact"
        assert obj["trials"] is None
        assert obj["formula_kl_bits"] == pytest.approx(1.0, abs=1e-12)
        assert obj["expected_kl_bits"] == pytest.approx(1.0, abs=1e-12)
        assert obj["identity_gap"] <= 1e-9

    def test_auto_falls_back_to_mc(self, runner, tmp_path):
        big = tmp_path / "uniform12.json"
        big.write_text(json.dumps({"kind": "uniform", "q": 2, "n": 12}))
        sched = self._write_schedule(tmp_path, [1] * 12)
        result = run(runner, "simulate", "--dist", big, "--schedule", sched, "--trials", "5")
        assert result.exit_code == 0
        obj = json.loads(result.output)
        assert obj["method"] == "mc"
        assert obj["trials"] == 5
        assert obj["expected_kl_bits"] == pytest.approx(0.0, abs=1e-12)
        assert obj["stderr"] == pytest.approx(0.0, abs=1e-12)

    def test_forced_exact_over_budget_is_feasibility_exit(self, runner, tmp_path):
        big = tmp_path / "uniform12.json"
        big.write_text(json.dumps({"kind": "uniform", "q": 2, "n": 12}))
        sched = self._write_schedule(tmp_path, [1] * 12)
        result = run(
            runner, "simulate", "--dist", big, "--schedule", sched, "--method", "exact"
        )
        assert result.exit_code == 3

    def test_length_mismatch(self, runner, tmp_path):
        sched = self._write_schedule(tmp_path, [1, 1, 1])
        assert run(runner, "simulate", "--dist", PAIR, "--schedule", sched).exit_code == 2


class TestSample:
    def _blocks(self, tmp_path, blocks):
        path = tmp_path / "blocks.json"
        path.write_text(json.dumps({"blocks": blocks}))
        return path

    def test_lines_respect_support(self, runner, tmp_path):
        blocks = self._blocks(tmp_path, [[0], [1]])
        result = run(runner, "sample", "--dist", PAIR, "--blocks", blocks, "--samples", "3")
        assert result.exit_code == 0
        rows = [tuple(int(v) for v in ln.split(",")) for ln in result.output.splitlines()]
        assert len(rows) == 3
        assert set(rows) <= {(0, 0), (1, 1)}

    def test_json_matches_lines(self, runner, tmp_path):
        blocks = self._blocks(tmp_path, [[0], [1]])
        text = run(runner, "sample", "--dist", PAIR, "--blocks", blocks, "--samples", "3")
        as_json = run(
            runner, "sample", "--dist", PAIR, "--blocks", blocks, "--samples", "3",
            "--format", "json",
        )
        assert as_json.exit_code == 0
        rows = [tuple(r) for r in json.loads(as_json.output)["samples"]]
        lines = [tuple(int(v) for v in ln.split(",")) for ln in text.output.splitlines()]
        assert rows == lines

    def test_schedule_route_and_smoothing(self, runner, tmp_path):
        sched = tmp_path / "sched.json"
        sched.write_text(json.dumps({"steps": [1, 1]}))
        clean = run(runner, "sample", "--dist", PAIR, "--schedule", sched, "--samples", "4")
        assert clean.exit_code == 0
        smoothed = run(
            runner, "sample", "--dist", PAIR, "--schedule", sched, "--samples", "4",
            "--eta", "1.0",
        )
        assert smoothed.exit_code == 0
        for ln in smoothed.output.splitlines():
            assert set(int(v) for v in ln.split(",")) <= {0, 1}

    def test_usage_errors(self, runner, tmp_path):
        blocks = self._blocks(tmp_path, [[0], [1]])
        sched = tmp_path / "sched.json"
        sched.write_text(json.dumps({"steps": [1, 1]}))
        assert run(runner, "sample", "--dist", PAIR).exit_code == 2
        assert (
            run(runner, "sample", "--dist", PAIR, "--blocks", blocks, "--schedule", sched).exit_code
            == 2
        )
        assert (
            run(runner, "sample", "--dist", PAIR, "--blocks", blocks, "--samples", "0").exit_code
            == 2
        )


class TestVerify:
    def test_battery_passes_on_bundled_specs(self, runner):
        result = run(runner, "verify", "--dist", MIXTURE)
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[-1] == "OK (10 checks)"
        assert all(ln.startswith("PASS") for ln in lines[:-1])

    def test_json_report(self, runner):
        result = run(runner, "verify", "--dist", UNIFORM6, "--format", "json")
        assert result.exit_code == 0
        obj = json.loads(result.output)
        assert obj["passed"] is True
        assert len(obj["checks"]) == 10
        assert {c["status"] for c in obj["checks"]} == {"pass"}

    def test_corrupted_input_is_a_failed_check(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"kind": "explicit", "q": 2, "n": 1, "pmf": [1.0, 1.0]}))
        result = run(runner, "verify", "--dist", bad)
        assert result.exit_code == 1
        assert "FAIL" in result.output
        assert "load-distribution" in result.output
        assert result.output.splitlines()[-1] == "FAILED (1 checks)"

    def test_mc_stress_pass_and_fail(self, runner, tmp_path):
        ok = run(runner, "verify", "--dist", RS, "--method", "mc", "--samples", "4")
        assert ok.exit_code == 0
        assert "mc-han-monotone" in ok.output
        assert ok.output.splitlines()[-1] == "OK (11 checks)"
        # A spiky distribution averaged over 2 subsets per level breaks the
        # shape laws for this seed; the command must report it, not crash.
        rng = np.random.default_rng(13)
        spiky = tmp_path / "spiky.json"
        spiky.write_text(
            json.dumps(
                {"kind": "explicit", "q": 2, "n": 6,
                 "pmf": rng.dirichlet(np.full(64, 0.3)).tolist()}
            )
        )
        failing = run(
            runner, "verify", "--dist", spiky, "--method", "mc",
            "--samples", "2", "--seed", "1",
        )
        assert failing.exit_code == 1
        assert "FAIL" in failing.output
        assert "mc-han-monotone" in failing.output


class TestSweep:
    def test_json_report_on_rs(self, runner):
        result = run(runner, "sweep", "--dist", RS, "--eps", "1")
        assert result.exit_code == 0
        obj = json.loads(result.output)
        assert obj["grid"] == [1.0, 2.0, 4.0, 8.0, 16.0]
        assert obj["tc_bits"] == pytest.approx(3 * math.log2(7))
        assert obj["dtc_bits"] == pytest.approx(2 * math.log2(7))
        best = obj["best_guaranteed"]
        assert (best["route"], best["hat_bits"]) == ("dtc", 8.0)
        emp = obj["best_empirical"]
        assert emp["k"] == 4
        assert emp["error_bits"] == pytest.approx(0.0, abs=1e-9)
        assert obj["factor2_tc"] and obj["factor2_dtc"]
        assert len(obj["plans"]) == 10
        # determinism: the JSON text is byte-stable
        assert run(runner, "sweep", "--dist", RS, "--eps", "1").output == result.output

    def test_csv_table(self, runner):
        result = run(runner, "sweep", "--dist", RS, "--eps", "1", "--format", "csv")
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == "route,hat_bits,k,error_bits,guaranteed,k_bound"
        assert len(lines) == 11

    def test_exponent_grid_mode(self, runner):
        result = run(
            runner, "sweep", "--dist", PAIR, "--eps", "1", "--grid-mode", "exponent"
        )
        assert result.exit_code == 0
        obj = json.loads(result.output)
        expected = sorted({t for t, _ in um.sweep_grid(2, 2, 1.0, mode="exponent")})
        assert obj["grid"] == expected


class TestHardcurve:
    def test_csv_default(self, runner):
        result = run(runner, "hardcurve", "--n-grid", "256,512")
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == "n,eps,k,best_error,ratio"
        assert len(lines) == 3
        ratios = [float(ln.split(",")[4]) for ln in lines[1:]]
        assert all(r >= 0.01 for r in ratios)

    def test_json_with_explicit_eps(self, runner):
        result = run(
            runner, "hardcurve", "--n-grid", "256", "--eps", "0.5", "--format", "json"
        )
        assert result.exit_code == 0
        obj = json.loads(result.output)
        assert [r["n"] for r in obj["rows"]] == [256]
        assert obj["rows"][0]["eps"] == 0.5
        assert obj["outside_proven_window"] == [256]

    def test_auto_eps_stays_inside_window(self, runner):
        result = run(runner, "hardcurve", "--n-grid", "256", "--format", "json")
        assert json.loads(result.output)["outside_proven_window"] == []

    def test_bad_grid(self, runner):
        assert run(runner, "hardcurve", "--n-grid", "abc").exit_code == 2
        assert run(runner, "hardcurve", "--n-grid", "").exit_code == 2


class TestOutputFiles:
    def test_out_writes_report_and_figure(self, runner, tmp_path):
        out = tmp_path / "summary.json"
        result = run(runner, "summary", "--dist", PAIR, "--out", out)
        assert result.exit_code == 0
        assert result.output == ""
        obj = json.loads(out.read_text())
        assert obj["tc_bits"] == pytest.approx(1.0)
        png = tmp_path / "summary.json.png"
        assert png.exists()
        assert png.read_bytes()[:4] == b"\x89PNG"

    def test_no_plot_suppresses_figure(self, runner, tmp_path):
        out = tmp_path / "summary.json"
        result = run(runner, "summary", "--dist", PAIR, "--out", out, "--no-plot")
        assert result.exit_code == 0
        assert not (tmp_path / "summary.json.png").exists()

    def test_stdout_and_file_agree(self, runner, tmp_path):
        streamed = run(runner, "curve", "--dist", RS)
        out = tmp_path / "curve.csv"
        run(runner, "curve", "--dist", RS, "--out", out, "--no-plot")
        assert out.read_text() == streamed.output
