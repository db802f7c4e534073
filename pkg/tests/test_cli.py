"""End-to-end tests of the command-line harness via main(argv)."""

import json
from fractions import Fraction

import pytest

from orbint.cells import Cell, CellFunction
from orbint.cli import (
    EXIT_BUDGET,
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_PARSE,
    main,
    normalize_config,
)
from orbint.cyclotomic import CycValue
from orbint.errors import Mismatch, ParseError
from orbint.orbital import CSV_HEADER, phi_zero, phiprime_zero


def write_config(path, **overrides):
    doc = {
        "schema": "orbint-config/1",
        "models": [1],
        "primes": [3],
        "r_max": 1,
        "units": "all",
    }
    doc.update(overrides)
    path.write_text(json.dumps(doc))
    return str(path)


def write_step(path, p=3):
    fn = CellFunction(
        p,
        1,
        [
            (Cell.make(p, [Fraction(1, p)], [0]), Fraction(5, 2)),
            (Cell.make(p, [Fraction(2)], [1]), Fraction(-1)),
        ],
    )
    path.write_text(fn.to_json())
    return str(path)


class TestVerifyFl:
    def test_campaign_writes_reports(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out = str(tmp_path / "run")
        assert main(["verify-fl", "--config", cfg, "--out", out]) == EXIT_OK

        doc = json.loads((tmp_path / "run.json").read_text())
        assert doc["schema"] == "orbint-report/1"
        assert doc["ok"] is True
        assert len(doc["reports"]) == 1
        rep = doc["reports"][0]
        assert rep["model"] == 1 and rep["p"] == 3 and rep["ok"] is True
        kinds = [row["kind"] for row in rep["rows"]]
        # two singular identities, then r = 0 (one unit) and r = 1 (two units)
        assert kinds == ["singular+", "singular-", "orbital", "orbital", "orbital"]
        assert all(row["verdict"] == "equal" for row in rep["rows"])
        assert not any("millis" in row for row in rep["rows"])

        lines = (tmp_path / "run.csv").read_text().strip().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert len(lines) == 1 + 5
        for line in lines[1:]:
            assert len(line.split(",")) == len(CSV_HEADER)
            assert ",equal," in line

    def test_json_outputs_are_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["verify-fl", "--config", cfg, "--out", out1]) == EXIT_OK
        assert main(["verify-fl", "--config", cfg, "--out", out2]) == EXIT_OK
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_stdout_report_when_no_out(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", r_max=0)
        assert main(["verify-fl", "--config", cfg]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["ok"] is True

    def test_even_prime_for_family_b_is_guarded(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", models=[5], primes=[2])
        assert main(["verify-fl", "--config", cfg]) == EXIT_BUDGET
        assert "OddPrimeRequired" in capsys.readouterr().err

    def test_budget_guard(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json")
        assert main(["verify-fl", "--config", cfg, "--budget", "1"]) == EXIT_BUDGET
        assert "BudgetExceeded" in capsys.readouterr().err

    def test_empty_model_list_is_vacuously_ok(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json", models=[], primes=[])
        assert main(["verify-fl", "--config", cfg]) == EXIT_OK

    def test_corrupt_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"schema": "orbint-config/1", "models": [1')
        assert main(["verify-fl", "--config", str(bad)]) == EXIT_PARSE
        assert "error" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["verify-fl", "--config", str(tmp_path / "nope.json")]) == (
            EXIT_PARSE
        )

    def test_wrong_schema_tag(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema": "other/9", "models": [1]}))
        assert main(["verify-fl", "--config", str(bad)]) == EXIT_PARSE

    def test_config_validation(self):
        with pytest.raises(ParseError):
            normalize_config({"schema": "orbint-config/1", "models": [7]})
        with pytest.raises(ParseError):
            normalize_config({"schema": "orbint-config/1", "primes": [1]})
        with pytest.raises(ParseError):
            normalize_config({"schema": "orbint-config/1", "units": ["last", 2]})
        with pytest.raises(ParseError):
            normalize_config({"schema": "orbint-config/1", "units": ["first", 0]})
        cfg = normalize_config(
            {"schema": "orbint-config/1", "units": ["first", 2]}
        )
        assert cfg["units"] == ("first", 2)


class TestGerm:
    def test_basic_data_membership(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json")
        phi = tmp_path / "phi.json"
        phi.write_text(phi_zero(1, 3).to_json())
        assert main(["germ", "--config", cfg, "--phi", str(phi)]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["verdict"] == "member"
        assert doc["m"] == 1 and doc["r0"] == 3
        assert doc["c_plus"]["coeffs"] == ["1"]
        assert doc["c_minus"]["coeffs"] == ["1"]

    def test_family_b_requires_auxiliary(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", models=[6])
        phi = tmp_path / "phi.json"
        phi.write_text(phi_zero(6, 3).to_json())
        assert main(["germ", "--config", cfg, "--phi", str(phi)]) == EXIT_PARSE
        assert "--phiprime" in capsys.readouterr().err

    def test_family_b_with_auxiliary(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json", models=[6])
        phi = tmp_path / "phi.json"
        phi.write_text(phi_zero(6, 3).to_json())
        fp = tmp_path / "fp.json"
        fp.write_text(phiprime_zero(6, 3).to_json())
        code = main(
            ["germ", "--config", cfg, "--phi", str(phi), "--phiprime", str(fp)]
        )
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["verdict"] == "member"

    def test_corrupt_phi(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        bad = tmp_path / "phi.json"
        bad.write_text('{"schema": "orbint-cellfn/1", "p": 3,')
        assert main(["germ", "--config", cfg, "--phi", str(bad)]) == EXIT_PARSE

    def test_empty_config_models(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json", models=[])
        phi = tmp_path / "phi.json"
        phi.write_text(phi_zero(1, 3).to_json())
        assert main(["germ", "--config", cfg, "--phi", str(phi)]) == EXIT_PARSE

    def test_mismatch_prints_both_sides(self, tmp_path, capsys, monkeypatch):
        import orbint.cli as cli

        def forced(*a, **k):
            raise Mismatch(
                CycValue.rational(Fraction(0)),
                CycValue.rational(Fraction(1)),
                "forced for the error path",
            )

        monkeypatch.setattr(cli, "check_germ_membership", forced)
        cfg = write_config(tmp_path / "cfg.json")
        phi = tmp_path / "phi.json"
        phi.write_text(phi_zero(1, 3).to_json())
        assert main(["germ", "--config", cfg, "--phi", str(phi)]) == EXIT_MISMATCH
        err = capsys.readouterr().err
        assert "left  = 0" in err and "right = 1" in err


class TestKloosterman:
    def test_depth_one_at_3(self, capsys):
        assert main(["kloosterman", "3", "1", "1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "exact: -1/3" in out

    def test_depth_one_at_5(self, capsys):
        assert main(["kloosterman", "5", "1", "1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "coeffs (order p^1): ['2/5', '0', '1/5', '1/5']" in out

    def test_trivial_depth(self, capsys):
        assert main(["kloosterman", "3", "0", "1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "exact: " in out


class TestTransfer:
    def test_model_roundtrip_writes_report(self, tmp_path):
        step = write_step(tmp_path / "step.json")
        out = str(tmp_path / "tr")
        code = main(
            ["transfer", "--target", step, "--model", "1", "--out", out]
        )
        assert code == EXIT_OK
        doc = json.loads((tmp_path / "tr.json").read_text())
        assert doc["ok"] is True
        assert doc["kind"] == "model-1"
        assert len(doc["probes"]) == 5  # two per cell plus one off support
        assert all(pr["ok"] for pr in doc["probes"])
        assert doc["constructed"]["schema"] == "orbint-cellfn/1"

    def test_kuznetsov_roundtrip(self, tmp_path, capsys):
        step = write_step(tmp_path / "step.json")
        assert main(["transfer", "--target", step, "--kuznetsov"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["ok"] is True and doc["kind"] == "kuznetsov"

    def test_target_touching_zero(self, tmp_path, capsys):
        bad = tmp_path / "step.json"
        fn = CellFunction(3, 1, [(Cell.make(3, [Fraction(3)], [1]), Fraction(1))])
        bad.write_text(fn.to_json())
        assert main(["transfer", "--target", str(bad), "--model", "1"]) == (
            EXIT_PARSE
        )
        assert "contains 0" in capsys.readouterr().err

    def test_corrupt_target(self, tmp_path):
        bad = tmp_path / "step.json"
        bad.write_text("not json at all")
        assert main(["transfer", "--target", str(bad), "--model", "1"]) == (
            EXIT_PARSE
        )

    def test_empty_target_is_vacuous(self, tmp_path, capsys):
        empty = tmp_path / "step.json"
        empty.write_text(CellFunction(3, 1, []).to_json())
        assert main(["transfer", "--target", str(empty), "--model", "1"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["ok"] is True
