"""End-to-end command-line tests: exit codes, JSON envelopes validated
against the shipped schema, text renderings, config-file defaults, and the
thread-cap environment knob."""

import contextlib
import io
import json
import math
import pathlib
import subprocess
import sys

import jsonschema
import pytest

from fraclie import cli
from fraclie.cli import EXIT_INVALID_INPUT, EXIT_OK, EXIT_VERIFICATION_FAILED

SCHEMA = json.loads(
    (pathlib.Path(cli.__file__).parent / "schemas" / "report.schema.json")
    .read_text(encoding="utf-8")
)


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


def run_json(argv):
    code, out, _ = run_cli(argv)
    payload = json.loads(out)
    jsonschema.validate(payload, SCHEMA)
    return code, payload


class TestParsing:
    def test_help_exits_zero(self):
        code, out, _ = run_cli(["--help"])
        assert code == 0

    def test_missing_command_is_input_error(self):
        code, _, err = run_cli([])
        assert code == EXIT_INVALID_INPUT

    def test_unknown_command_is_input_error(self):
        code, _, _ = run_cli(["frobnicate"])
        assert code == EXIT_INVALID_INPUT

    def test_decimal_alpha_rejected(self):
        code, _, err = run_cli(["verify", "--family", "19", "--alpha", "0.5"])
        assert code == EXIT_INVALID_INPUT
        assert "exact rational" in err

    def test_alpha_above_one_rejected(self):
        code, _, err = run_cli(["tables", "--case", "1", "--alpha", "3/2"])
        assert code == EXIT_INVALID_INPUT
        assert "between 0 and 1" in err

    def test_nonpositive_steps_rejected(self):
        code, _, _ = run_cli(["evolve", "--family", "19", "--steps", "0"])
        assert code == EXIT_INVALID_INPUT

    def test_unknown_family_rejected(self):
        code, _, err = run_cli(["verify", "--family", "nope"])
        assert code == EXIT_INVALID_INPUT
        assert "invalid choice" in err


class TestTables:
    def test_generic_case_text(self):
        code, out, _ = run_cli(["tables", "--case", "1"])
        assert code == EXIT_OK
        assert "commutator table" in out
        assert "X3" in out
        assert "tables match the embedded transcriptions" in out
        # the generic case publishes no adjoint table
        assert "adjoint table" not in out

    def test_generic_case_json(self):
        code, payload = run_json(["tables", "--case", "1", "--format", "json"])
        assert code == EXIT_OK
        assert payload["passed"] is True
        assert payload["schema"] == "fraclie-report/1"
        assert payload["basis"] == ["X1", "X2", "X3"]
        assert payload["adjoint"] is None
        assert payload["commutators"]["X1"]["X3"] == "X1"
        assert payload["mismatches"] == []

    def test_regular_branch_tables(self):
        code, payload = run_json(
            ["tables", "--case", "2.1", "--alpha", "1/3", "--m", "2",
             "--format", "json"])
        assert code == EXIT_OK
        assert payload["basis"] == ["Y1", "Y2", "Y3", "Y4"]
        assert payload["commutators"]["Y1"]["Y2"] == "Y2"
        assert payload["commutators"]["Y3"]["Y4"] == "Y4"
        assert payload["commutators"]["Y1"]["Y3"] == "0"
        assert payload["adjoint"]["Y2"]["Y1"] == "Y1 + ε·Y2"

    def test_degenerate_branch_tables(self):
        code, payload = run_json(
            ["tables", "--case", "2.2", "--alpha", "1/3", "--format", "json"])
        assert code == EXIT_OK
        assert payload["commutators"]["Y1"]["Y3"] == "Y1"
        # Y4 is central: its entire row is zero
        assert all(v == "0" for v in payload["commutators"]["Y4"].values())

    def test_rational_m_supported(self):
        # negative rationals need the --m=value spelling
        code, payload = run_json(
            ["tables", "--case", "2.1", "--m=-1/3", "--format", "json"])
        assert code == EXIT_OK and payload["passed"]

    def test_degenerate_m_in_regular_branch_is_domain_error(self):
        code, _, err = run_cli(
            ["tables", "--case", "2.1", "--alpha", "1/3", "--m", "1"])
        assert code == EXIT_INVALID_INPUT
        assert "regular basis is undefined" in err

    def test_degenerate_branch_at_half_is_domain_error(self):
        code, _, err = run_cli(["tables", "--case", "2.2", "--alpha", "1/2"])
        assert code == EXIT_INVALID_INPUT
        assert "α ≠ 1/2" in err

    def test_m_not_accepted_for_generic_case(self):
        code, _, err = run_cli(["tables", "--case", "1", "--m", "2"])
        assert code == EXIT_INVALID_INPUT
        assert "generic" in err

    def test_m_not_accepted_for_degenerate_branch(self):
        code, _, err = run_cli(["tables", "--case", "2.2", "--m", "2"])
        assert code == EXIT_INVALID_INPUT
        assert "derives m" in err

    def test_output_file(self, tmp_path):
        target = tmp_path / "tables.json"
        code, out, _ = run_cli(["tables", "--case", "1", "--format", "json",
                                "--output", str(target)])
        assert code == EXIT_OK
        assert out == ""
        payload = json.loads(target.read_text(encoding="utf-8"))
        jsonschema.validate(payload, SCHEMA)
        assert payload["command"] == "tables"


class TestOptimal:
    def test_generic_case_lists_three_elements(self):
        code, payload = run_json(
            ["optimal", "--case", "1", "--alpha", "1/2", "--format", "json"])
        assert code == EXIT_OK
        assert [e["label"] for e in payload["elements"]] == ["U1", "U2", "U3"]
        assert payload["normal_forms"] == []

    def test_regular_branch_lists_six_elements_with_demos(self):
        code, payload = run_json(
            ["optimal", "--case", "2.1", "--alpha", "1/3", "--m", "2",
             "--format", "json"])
        assert code == EXIT_OK
        assert len(payload["elements"]) == 6
        statuses = [d["status"] for d in payload["normal_forms"]]
        assert statuses.count("documented-discrepancy") == 1
        assert statuses.count("ok") == 4
        # the U5 element carries its validity restriction
        u5 = next(e for e in payload["elements"] if e["label"] == "U5")
        assert "m < 0 or m > alpha/(1-alpha)" in u5["validity"]

    def test_regular_branch_scale_matches_discriminant(self):
        _, payload = run_json(
            ["optimal", "--case", "2.1", "--alpha", "1/3", "--m", "2",
             "--format", "json"])
        demos = [d for d in payload["normal_forms"]
                 if d["claim"].startswith("delta*Y1")]
        assert len(demos) == 2
        for d in demos:
            assert d["scale"] == pytest.approx(-1 / 3, abs=1e-12)
            assert d["epsilon"] == pytest.approx(math.log(3.0), abs=1e-12)

    def test_degenerate_branch_keeps_y4_sign(self):
        code, payload = run_json(
            ["optimal", "--case", "2.2", "--alpha", "1/3", "--format", "json"])
        assert code == EXIT_OK
        assert len(payload["elements"]) == 5
        demos = payload["normal_forms"]
        assert len(demos) == 4 and all(d["status"] == "ok" for d in demos)
        assert [d["b"] for d in demos] == [2.0, -2.0, 2.0, -2.0]
        assert all(d["scale"] > 0 for d in demos)

    def test_merged_branch_point_skips_demos_with_note(self):
        code, payload = run_json(
            ["optimal", "--case", "2.1", "--alpha", "1/3", "--m", "1",
             "--format", "json"])
        assert code == EXIT_OK
        assert payload["normal_forms"] == []
        assert any("degenerate" in n for n in payload["notes"])

    def test_text_rendering_mentions_discrepancy(self):
        code, out, _ = run_cli(["optimal", "--case", "2.1", "--alpha", "1/3",
                                "--m", "2"])
        assert code == EXIT_OK
        assert "[documented-discrepancy]" in out
        assert "optimal system (6 elements)" in out


class TestVerify:
    def test_all_families_pass_at_defaults(self):
        for family in ("5.1", "19", "20", "21", "22", "5.4", "5.5", "lemma2"):
            code, payload = run_json(["verify", "--family", family])
            assert code == EXIT_OK, f"family {family} exited {code}"
            assert payload["passed"] is True, f"family {family} failed"

    def test_family_51_emits_note(self):
        code, payload = run_json(
            ["verify", "--family", "5.1", "--a", "1", "--alpha", "1/2"])
        assert code == EXIT_OK
        notes = [r for r in payload["records"] if r["kind"] == "note"]
        assert len(notes) == 1
        note = notes[0]
        assert note["id"] == "coefficient-5.1"
        assert note["computed"] == pytest.approx(math.sqrt(math.pi), rel=1e-12)
        assert note["printed"] == pytest.approx(1 / math.gamma(0.5), rel=1e-12)
        assert "NOTE" in note["text"]
        assert "comparison only" in note["text"]

    def test_note_tracks_run_alpha(self):
        _, payload = run_json(
            ["verify", "--family", "5.1", "--a", "1", "--alpha", "1/3"])
        note = next(r for r in payload["records"] if r["kind"] == "note")
        expected = math.gamma(1 / 3) / math.gamma(2 / 3)
        assert note["alpha"] == "1/3"
        assert note["computed"] == pytest.approx(expected, rel=1e-12)

    def test_residual_tolerance_follows_path(self):
        _, payload = run_json(["verify", "--family", "5.5"])
        residual = next(r for r in payload["records"] if r["kind"] == "residual")
        assert residual["path"] == "quadrature"
        assert residual["tolerance"] == 1e-5
        _, payload = run_json(["verify", "--family", "19"])
        residual = next(r for r in payload["records"] if r["kind"] == "residual")
        assert residual["path"] == "exact-monomial"
        assert residual["tolerance"] == 1e-8

    def test_invariance_and_sequential_records_present(self):
        _, payload = run_json(["verify", "--family", "21"])
        kinds = [r["kind"] for r in payload["records"]]
        assert kinds == ["residual", "invariance", "sequential"]
        invariance = payload["records"][1]
        assert invariance["id"] == "Case2.1-U5"
        assert invariance["path"] == "analytic"

    def test_curve_uses_reduced_ode_route(self):
        _, payload = run_json(["verify", "--family", "20"])
        kinds = [r["kind"] for r in payload["records"]]
        assert kinds == ["reduced-ode", "info"]
        assert payload["records"][0]["path"] == "analytic"
        assert payload["records"][0]["tolerance"] == 1e-6

    def test_lemma2_reports_exact_exponents(self):
        _, payload = run_json(["verify", "--family", "lemma2"])
        exponents = next(r for r in payload["records"]
                         if r["kind"] == "exponents")
        assert exponents["passed"] is True
        assert exponents["lambda1"] == "-1/6"
        assert exponents["lambda2"] == "-1/2"

    def test_singular_gamma_tuple_is_input_error(self):
        code, _, err = run_cli(
            ["verify", "--family", "19", "--m", "1", "--k", "1",
             "--alpha", "1/3"])
        assert code == EXIT_INVALID_INPUT
        assert "pole" in err

    def test_nonreal_root_tuple_is_input_error(self):
        # the quoted benchmark tuple: its amplitude radicand is negative
        code, _, err = run_cli(
            ["verify", "--family", "19", "--m", "2", "--k", "1",
             "--alpha", "1/2"])
        assert code == EXIT_INVALID_INPUT
        assert "negative" in err

    def test_wrong_parameter_for_family_is_input_error(self):
        code, _, err = run_cli(["verify", "--family", "19", "--c1", "1.0"])
        assert code == EXIT_INVALID_INPUT
        assert "does not take" in err

    def test_grid_overrides_reach_the_report(self):
        _, payload = run_json(
            ["verify", "--family", "19", "--nx", "5", "--t1", "3.0"])
        grid = payload["records"][0]["grid"]
        assert grid["nx"] == 5
        assert grid["t1"] == 3.0

    def test_text_format(self):
        code, out, _ = run_cli(["verify", "--family", "5.1", "--format", "text"])
        assert code == EXIT_OK
        assert "verify family 5.1: PASS" in out
        assert "[ok] residual/system" in out
        assert "NOTE" in out

    def test_output_file_holds_the_json(self, tmp_path):
        target = tmp_path / "verify.json"
        code, out, _ = run_cli(["verify", "--family", "19",
                                "--output", str(target)])
        assert code == EXIT_OK and out == ""
        payload = json.loads(target.read_text(encoding="utf-8"))
        jsonschema.validate(payload, SCHEMA)
        assert payload["passed"] is True

    def test_thread_cap_env(self, monkeypatch):
        monkeypatch.setenv("FRACLIE_THREADS", "3")
        code, payload = run_json(["verify", "--family", "19"])
        assert code == EXIT_OK
        assert [r["kind"] for r in payload["records"]] == [
            "residual", "invariance", "sequential"]

    def test_bad_thread_cap_is_input_error(self, monkeypatch):
        for bad in ("0", "-2", "many"):
            monkeypatch.setenv("FRACLIE_THREADS", bad)
            code, _, err = run_cli(["verify", "--family", "19"])
            assert code == EXIT_INVALID_INPUT
            assert "FRACLIE_THREADS" in err


class TestEvolve:
    def test_json_summary(self):
        code, payload = run_json(
            ["evolve", "--family", "19", "--steps", "8", "--nx", "21",
             "--format", "json"])
        assert code == EXIT_OK
        assert payload["steps"] == 8
        assert payload["nx"] == 21
        assert payload["errors"]["max"] < 1e-2
        assert payload["x_independent"] is False
        assert payload["order"] is not None

    def test_single_step_has_no_order_estimate(self):
        _, payload = run_json(
            ["evolve", "--family", "19", "--steps", "1", "--nx", "11",
             "--format", "json"])
        assert payload["order"] is None
        assert any("single step" in n for n in payload["notes"])

    def test_x_independent_family_flagged(self):
        _, payload = run_json(
            ["evolve", "--family", "5.1", "--a", "0", "--steps", "4",
             "--nx", "11", "--format", "json"])
        assert payload["x_independent"] is True

    def test_csv_stdout(self):
        code, out, _ = run_cli(
            ["evolve", "--family", "19", "--steps", "2", "--nx", "5",
             "--format", "csv"])
        rows = out.strip().splitlines()
        assert code == EXIT_OK
        assert rows[0] == "t,x,u,v"
        assert len(rows) == 1 + 3 * 5  # header + (steps+1) levels x nx points

    def test_csv_file_plus_json_summary(self, tmp_path):
        target = tmp_path / "run.csv"
        code, out, _ = run_cli(
            ["evolve", "--family", "19", "--steps", "2", "--nx", "5",
             "--output", str(target)])
        assert code == EXIT_OK
        payload = json.loads(out)
        jsonschema.validate(payload, SCHEMA)
        assert payload["csv"] == str(target)
        rows = target.read_text(encoding="utf-8").strip().splitlines()
        assert rows[0] == "t,x,u,v" and len(rows) == 16

    def test_text_summary(self):
        code, out, _ = run_cli(
            ["evolve", "--family", "19", "--steps", "4", "--nx", "11"])
        assert code == EXIT_OK
        assert "terminal relative errors" in out
        assert "x-independent trajectory: False" in out

    def test_curve_has_no_term_structure(self):
        code, _, err = run_cli(["evolve", "--family", "20", "--steps", "2"])
        assert code == EXIT_INVALID_INPUT
        assert "term structure" in err


class TestSelftest:
    def test_filtered_run_passes(self):
        code, out, _ = run_cli(["selftest", "--filter", "tables"])
        assert code == EXIT_OK
        assert "criterion  1 [tables] PASS" in out
        assert "1/1 criteria passed" in out

    def test_seed_flag_reaches_the_power_rule_block(self):
        code, out, _ = run_cli(
            ["selftest", "--filter", "power-rule", "--seed", "11"])
        assert code == EXIT_OK
        assert "seed = 11" in out or "PASS" in out

    def test_json_format_validates(self):
        code, out, _ = run_cli(
            ["selftest", "--filter", "lemma2", "--format", "json"])
        payload = json.loads(out)
        jsonschema.validate(payload, SCHEMA)
        assert code == EXIT_OK
        assert payload["criteria"][0]["key"] == "lemma2"
        assert payload["criteria"][0]["passed"] is True

    def test_unknown_filter_is_input_error(self):
        code, _, err = run_cli(["selftest", "--filter", "bogus"])
        assert code == EXIT_INVALID_INPUT
        assert "matches no criterion" in err


class TestConfig:
    def test_config_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "defaults.cfg"
        cfg.write_text("# benchmark defaults\nalpha = 1/3\nnx = 5\n",
                       encoding="utf-8")
        code, payload = run_json(
            ["verify", "--family", "19", "--config", str(cfg)])
        assert code == EXIT_OK
        assert payload["records"][0]["grid"]["nx"] == 5
        assert payload["records"][0]["params"]["alpha"] == "1/3"

    def test_explicit_flag_beats_config(self, tmp_path):
        cfg = tmp_path / "defaults.cfg"
        cfg.write_text("nx = 5\n", encoding="utf-8")
        _, payload = run_json(
            ["verify", "--family", "19", "--config", str(cfg), "--nx", "7"])
        assert payload["records"][0]["grid"]["nx"] == 7

    def test_unknown_key_is_input_error(self, tmp_path):
        cfg = tmp_path / "defaults.cfg"
        cfg.write_text("bogus = 1\n", encoding="utf-8")
        code, _, err = run_cli(
            ["verify", "--family", "19", "--config", str(cfg)])
        assert code == EXIT_INVALID_INPUT
        assert "bogus" in err and "valid keys" in err

    def test_bad_value_is_input_error(self, tmp_path):
        cfg = tmp_path / "defaults.cfg"
        cfg.write_text("alpha = 0.5\n", encoding="utf-8")
        code, _, err = run_cli(
            ["verify", "--family", "19", "--config", str(cfg)])
        assert code == EXIT_INVALID_INPUT
        assert "alpha" in err

    def test_bad_choice_is_input_error(self, tmp_path):
        cfg = tmp_path / "defaults.cfg"
        cfg.write_text("format = yaml\n", encoding="utf-8")
        code, _, err = run_cli(
            ["verify", "--family", "19", "--config", str(cfg)])
        assert code == EXIT_INVALID_INPUT
        assert "format" in err

    def test_missing_file_is_input_error(self, tmp_path):
        code, _, err = run_cli(
            ["verify", "--family", "19", "--config",
             str(tmp_path / "absent.cfg")])
        assert code == EXIT_INVALID_INPUT
        assert "cannot read config file" in err

    def test_malformed_line_is_input_error(self, tmp_path):
        cfg = tmp_path / "defaults.cfg"
        cfg.write_text("just some words\n", encoding="utf-8")
        code, _, err = run_cli(
            ["verify", "--family", "19", "--config", str(cfg)])
        assert code == EXIT_INVALID_INPUT
        assert "key = value" in err


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "fraclie.cli", "tables", "--case", "1"],
            capture_output=True, text=True, timeout=120)
        assert proc.returncode == 0
        assert "tables match the embedded transcriptions" in proc.stdout
