import json
import math

import pytest

from entshare.cli import main, parse_cut, parse_grid
from entshare.errors import EntshareError
from entshare.states import make_family, state_to_json


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParsing:
    def test_cut_grammar(self):
        cut = parse_cut("A|B1B2", 3)
        assert cut.side_a == {0} and cut.side_b == {1, 2}
        cut = parse_cut("B1,B3|rest", 4)
        assert cut.side_a == {1, 3} and cut.side_b == {0, 2}

    def test_cut_rejects_nonsense(self):
        with pytest.raises(EntshareError):
            parse_cut("A|Bx", 3)
        with pytest.raises(EntshareError):
            parse_cut("rest|rest", 3)
        with pytest.raises(EntshareError):
            parse_cut("A|B7", 3)

    def test_grid(self):
        assert parse_grid("0:1:0.5") == pytest.approx([0.0, 0.5, 1.0])
        with pytest.raises(EntshareError):
            parse_grid("1:0:0.5")
        with pytest.raises(EntshareError):
            parse_grid("0:1:0")


class TestMeasureCommand:
    def test_w5_assistance_joint(self, capsys):
        code, out, _ = run(capsys, "measure", "--family", "w5",
                           "--measure", "tau_assistance", "--cut", "A|rest")
        assert code == 0
        doc = json.loads(out)
        assert doc["value"] == pytest.approx(0.8, abs=1e-10)
        assert doc["exactness"] == "exact"

    def test_w4_reduced_pair(self, capsys):
        code, out, _ = run(capsys, "measure", "--family", "w4", "--measure", "concurrence",
                           "--cut", "A|B1", "--reduce")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(0.5, abs=1e-10)

    def test_ghz_marginal_separable(self, capsys):
        code, out, _ = run(capsys, "measure", "--family", "ghz:3", "--measure", "concurrence",
                           "--cut", "A|B1", "--reduce")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(0.0, abs=1e-10)

    def test_state_json_source(self, capsys, tmp_path):
        path = tmp_path / "state.json"
        path.write_text(state_to_json(make_family("w5")))
        code, out, _ = run(capsys, "measure", "--state", str(path), "--measure",
                           "tau_assistance", "--cut", "A|rest")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(0.8, abs=1e-10)

    def test_invalid_family_exits_2(self, capsys):
        code, _, err = run(capsys, "measure", "--family", "w9")
        assert code == 2
        assert "error" in err


class TestThresholdCommand:
    def test_residual_zero(self, capsys):
        lam = ",".join([f"{1 / math.sqrt(5):.10f}"] * 5)
        code, out, _ = run(capsys, "threshold", "--family", "3q", "--params", lam,
                           "--kind", "residual-zero")
        assert code == 0
        assert json.loads(out)["root"] == pytest.approx(1.26185, abs=1e-3)

    def test_empirical_beta(self, capsys):
        code, out, _ = run(capsys, "threshold", "--family", "4q-theta",
                           "--params", "0.7853981634,0.7853981634",
                           "--kind", "empirical-beta", "--bound", "residual_max")
        assert code == 0
        assert json.loads(out)["root"] == pytest.approx(1.507126, abs=1e-4)

    def test_degenerate_exits_3(self, capsys):
        code, _, err = run(capsys, "threshold", "--family", "ghz:3", "--kind", "residual-zero")
        assert code == 3
        assert "degenerate" in err


class TestSweepCommand:
    def test_csv_contract_and_flags_recomputable(self, capsys, tmp_path):
        out_path = tmp_path / "sweep.csv"
        code, _, _ = run(capsys, "sweep", "--family", "w5", "--measure", "tau_assistance",
                         "--side", "polygamy", "--grid", "0.25:2:0.25",
                         "--bounds", "base,residual_max", "--out", str(out_path))
        assert code == 0
        lines = out_path.read_text().strip().split("\n")
        header = lines[0].split(",")
        assert header == ["exponent", "lhs", "base", "residual_max",
                          "tol_base", "tol_residual_max", "ok_base", "ok_residual_max"]
        for line in lines[1:]:
            cells = line.split(",")
            row = dict(zip(header, cells))
            lhs = float(row["lhs"])
            for bid in ("base", "residual_max"):
                bound, tol = float(row[bid]), float(row[f"tol_{bid}"])
                gap = bound - lhs
                if tol <= 1e-9:
                    expect = "1" if gap >= -tol else "0"
                else:
                    expect = "1" if gap >= tol else ("0" if gap <= -tol else "na")
                assert row[f"ok_{bid}"] == expect

    def test_rows_ordered_and_deterministic(self, capsys, tmp_path):
        args = ("sweep", "--family", "w4", "--measure", "concurrence", "--side", "monogamy",
                "--grid", "2:4:0.5", "--seed", "9")
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, *args, "--out", str(p1))[0] == 0
        assert run(capsys, *args, "--out", str(p2))[0] == 0
        assert p1.read_bytes() == p2.read_bytes()
        exps = [float(l.split(",")[0]) for l in p1.read_text().strip().split("\n")[1:]]
        assert exps == sorted(exps)

    def test_bad_grid_exits_2(self, capsys):
        code, _, _ = run(capsys, "sweep", "--family", "w4", "--side", "monogamy",
                         "--grid", "4:2:0.5")
        assert code == 2


class TestBoundsCommand:
    def test_json_report(self, capsys):
        code, out, _ = run(capsys, "bounds", "--family", "w4", "--measure", "concurrence",
                           "--side", "monogamy", "--exponent", "2")
        assert code == 0
        doc = json.loads(out)
        assert doc["bounds"]["base"]["value"] == pytest.approx(0.75, abs=1e-10)
        assert doc["satisfied"]["base"] is True
        assert doc["m"] is None


class TestFigureCommand:
    def test_first_preset_columns(self, capsys):
        code, out, _ = run(capsys, "figure", "1")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "exponent,lhs,base,residual_max"
        assert len(lines) == 202
        last = [float(x) for x in lines[-1].split(",")]
        assert last[0] == pytest.approx(2.0)
        assert last[1] == pytest.approx(0.64, abs=1e-12)
        assert last[2] == pytest.approx(0.64, abs=1e-12)
        assert last[3] == pytest.approx(0.64, abs=1e-12)

    def test_third_preset_endpoint(self, capsys):
        code, out, _ = run(capsys, "figure", "3")
        lines = out.strip().split("\n")
        assert lines[0] == "exponent,lhs,ratio_weighted,exp_weighted"
        first = [float(x) for x in lines[1].split(",")]
        assert first == pytest.approx([2.0, 0.75, 0.75, 0.75], abs=1e-12)

    def test_second_preset_reference_formula(self, capsys):
        code, out, _ = run(capsys, "figure", "2")
        lines = out.strip().split("\n")
        row = dict(zip(lines[0].split(","), (float(x) for x in lines[100].split(","))))
        a = row["exponent"]
        expect = (3 * (2 * math.sqrt(2) / 5) ** a - 2 * 0.4**a
                  - 2 * 0.5 ** (a / 2) + 0.5**a + (math.sqrt(3) / 2) ** a)
        assert row["weighted_residual"] == pytest.approx(expect, abs=1e-14)

    def test_byte_identical(self, capsys, tmp_path):
        p1, p2 = tmp_path / "f1.csv", tmp_path / "f2.csv"
        run(capsys, "figure", "3", "--out", str(p1))
        run(capsys, "figure", "3", "--out", str(p2))
        assert p1.read_bytes() == p2.read_bytes()


class TestFuzzCommand:
    def test_small_clean_run(self, capsys):
        code, out, err = run(capsys, "fuzz", "--samples", "25", "--seed", "5")
        assert code == 0
        doc = json.loads(out)
        assert doc["samples"] == 25 and doc["violations"] == []
        assert "fuzz:" in err

    def test_empty_run(self, capsys):
        code, out, _ = run(capsys, "fuzz", "--samples", "0")
        assert code == 0
        assert json.loads(out)["violations"] == []

    def test_deterministic_output_bytes(self, capsys, tmp_path):
        p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
        run(capsys, "fuzz", "--samples", "10", "--seed", "3", "--out", str(p1))
        run(capsys, "fuzz", "--samples", "10", "--seed", "3", "--out", str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_check_spec_exits_2(self, capsys):
        code, _, _ = run(capsys, "fuzz", "--samples", "1", "--checks", "sideways:concurrence:2")
        assert code == 2

    def test_env_seed_respected(self, capsys, monkeypatch):
        monkeypatch.setenv("ENTSHARE_SEED", "123")
        code, out, _ = run(capsys, "fuzz", "--samples", "1")
        assert code == 0
        assert json.loads(out)["seed"] == 123

    def test_explicit_seed_overrides_env(self, capsys, monkeypatch):
        monkeypatch.setenv("ENTSHARE_SEED", "123")
        code, out, _ = run(capsys, "fuzz", "--samples", "1", "--seed", "77")
        assert code == 0
        assert json.loads(out)["seed"] == 77

    def test_non_integer_env_seed_exits_2(self, capsys, monkeypatch):
        monkeypatch.setenv("ENTSHARE_SEED", "abc")
        code, _, err = run(capsys, "fuzz", "--samples", "1")
        assert code == 2


class TestOptimizerJson:
    def test_opt_json_accepted(self, capsys):
        code, out, _ = run(capsys, "measure", "--family", "w4", "--measure", "concurrence",
                           "--cut", "A|B1B2", "--reduce", "--seed", "4",
                           "--opt-json", json.dumps({"restarts": 3, "max_iters": 200}))
        assert code == 0
        doc = json.loads(out)
        assert doc["exactness"] == "upper-estimate"
        assert doc["optimizer_meta"]["restarts"] == 3
        assert "converged" in doc["optimizer_meta"]

    def test_opt_json_rejects_unknown_keys(self, capsys):
        code, _, err = run(capsys, "measure", "--family", "w4", "--cut", "A|B1B2",
                           "--reduce", "--opt-json", '{"stepsize": 3}')
        assert code == 2
