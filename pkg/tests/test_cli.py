"""End-to-end tests of the command-line interface.

Each test drives ``cli.run`` directly and inspects exit status, stdout,
and the single-line JSON error envelope on stderr. File round trips go
through tmp_path.
"""

import io
import json

import pytest

import svg_utils as su
from rothman import __version__, cli
from rothman.diagnostics import analyze, collapsibility_report_json
from rothman.figures import figure_svg
from rothman.tables import parse_table, serialize_table
from rothman.whickham import six_strata_table, whickham_table

POPULATION_SPEC = {
    "stratum_probs": [0.5, 0.5],
    "exposure_probs": [0.25, 0.75],
    "po_probs": [[0.4, 0.2, 0.1, 0.3], [0.7, 0.1, 0.1, 0.1]],
}


@pytest.fixture
def run(capsys):
    def invoke(*args):
        code = cli.run(list(args))
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return invoke


def error_payload(err):
    doc = json.loads(err)
    return doc["error"]


class TestTopLevel:
    def test_version_exits_zero(self, run):
        code, out, _ = run("--version")
        assert code == 0
        assert out.strip() == f"rothman {__version__}"

    def test_help_exits_zero(self, run):
        code, out, _ = run("--help")
        assert code == 0
        assert "analyze" in out
        assert "simulate" in out

    def test_missing_subcommand_is_a_usage_error(self, run):
        code, _, err = run()
        assert code == 1
        assert "usage" in err.lower()

    def test_unknown_subcommand_is_a_usage_error(self, run):
        code, _, _ = run("frobnicate")
        assert code == 1


class TestAnalyze:
    def test_defaults_to_builtin_whickham(self, run):
        code, out, err = run("analyze")
        assert code == 0
        assert err == ""
        assert out == analyze(whickham_table()).to_json() + "\n"
        doc = json.loads(out)
        assert set(doc) == {"labels", "points", "confounding", "measures",
                            "collapsibility"}

    def test_builtin_six_strata(self, run):
        code, out, _ = run("analyze", "six_strata")
        assert code == 0
        assert len(json.loads(out)["points"]["strata"]) == 6

    def test_output_file(self, run, tmp_path):
        target = tmp_path / "report.json"
        code, out, _ = run("analyze", "-o", str(target))
        assert code == 0
        assert out == ""
        assert target.read_text() == analyze(whickham_table()).to_json()

    def test_csv_file_input(self, run, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text(serialize_table(whickham_table(), "csv"))
        code, out, _ = run("analyze", str(path))
        assert code == 0
        assert json.loads(out)["points"]["crude"]["x"] == 0.314208

    def test_json_extension_inferred(self, run, tmp_path):
        path = tmp_path / "table.json"
        path.write_text(serialize_table(whickham_table(), "json"))
        code, out, _ = run("analyze", str(path))
        assert code == 0
        assert json.loads(out) == analyze(whickham_table()).to_json_dict()

    def test_format_flag_overrides_extension(self, run, tmp_path):
        path = tmp_path / "table.json"
        path.write_text(serialize_table(whickham_table(), "csv"))
        code, _, err = run("analyze", str(path))
        assert code == 1
        assert error_payload(err)["code"] == "validation"
        code, out, _ = run("analyze", str(path), "--format", "csv")
        assert code == 0
        assert json.loads(out)["points"]["crude"]["x"] == 0.314208

    def test_stdin_table(self, run, monkeypatch):
        text = serialize_table(whickham_table(), "csv")
        monkeypatch.setattr("sys.stdin", io.StringIO(text))
        code, out, _ = run("analyze", "-")
        assert code == 0
        assert json.loads(out)["points"]["crude"]["y"] == 0.238832

    def test_missing_file_reports_io_error(self, run, tmp_path):
        code, _, err = run("analyze", str(tmp_path / "nope.csv"))
        assert code == 1
        payload = error_payload(err)
        assert payload["code"] == "io"
        assert payload["type"] == "FileNotFoundError"

    def test_malformed_table_reports_validation_error(self, run, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("not,a,table\n")
        code, _, err = run("analyze", str(path))
        assert code == 1
        payload = error_payload(err)
        assert payload["code"] == "validation"
        assert payload["type"] == "ParseError"
        assert payload["message"]

    def test_custom_weights_add_a_standardized_point(self, run):
        code, out, _ = run("analyze", "--weights", "0.5,0.5")
        assert code == 0
        std = json.loads(out)["points"]["standardized"]
        assert set(std) == {"study_sample", "exposed", "unexposed", "custom"}
        assert std["custom"]["x"] == 0.487758
        assert std["custom"]["y"] == 0.519566

    def test_weights_length_mismatch(self, run):
        code, _, err = run("analyze", "--weights", "0.2,0.3,0.5")
        assert code == 1
        assert "3 entries for 2 strata" in error_payload(err)["message"]

    def test_non_numeric_weights(self, run):
        code, _, err = run("analyze", "--weights", "a,b")
        assert code == 1
        assert error_payload(err)["code"] == "validation"

    def test_level_changes_intervals(self, run):
        _, narrow, _ = run("analyze", "--level", "0.5")
        _, wide, _ = run("analyze", "--level", "0.99")
        lo_narrow = json.loads(narrow)["measures"][0]["crude_interval"]
        lo_wide = json.loads(wide)["measures"][0]["crude_interval"]
        assert lo_narrow["level"] == 0.5
        assert lo_wide["level"] == 0.99
        assert lo_wide["lower"] < lo_narrow["lower"]
        assert lo_wide["upper"] > lo_narrow["upper"]


class TestStandardize:
    def test_default_emits_all_three_presets(self, run):
        code, out, _ = run("standardize")
        assert code == 0
        entries = json.loads(out)["standardized"]
        assert [e["name"] for e in entries] == ["study_sample", "exposed",
                                                "unexposed"]
        by_name = {e["name"]: e for e in entries}
        assert by_name["study_sample"]["x"] == 0.255835
        assert by_name["study_sample"]["y"] == 0.306332
        assert by_name["exposed"]["x"] == 0.182419
        assert by_name["exposed"]["y_full"] == 0.23883161512027493
        assert by_name["unexposed"]["x_full"] == 0.31420765027322406
        assert by_name["unexposed"]["y"] == 0.360001

    def test_single_preset(self, run):
        code, out, _ = run("standardize", "--preset", "exposed")
        assert code == 0
        entries = json.loads(out)["standardized"]
        assert len(entries) == 1
        assert entries[0]["name"] == "exposed"
        assert entries[0]["weights"] == pytest.approx([533 / 582, 49 / 582])

    def test_repeated_presets_keep_order(self, run):
        code, out, _ = run("standardize", "--preset", "unexposed",
                           "--preset", "study_sample")
        assert code == 0
        entries = json.loads(out)["standardized"]
        assert [e["name"] for e in entries] == ["unexposed", "study_sample"]

    def test_weights_alone_emit_only_custom(self, run):
        code, out, _ = run("standardize", "--weights", "0.25,0.75")
        assert code == 0
        entries = json.loads(out)["standardized"]
        assert [e["name"] for e in entries] == ["custom"]
        assert entries[0]["weights"] == [0.25, 0.75]

    def test_preset_and_weights_combine(self, run):
        code, out, _ = run("standardize", "--preset", "exposed",
                           "--weights", "0.5,0.5")
        assert code == 0
        names = [e["name"] for e in json.loads(out)["standardized"]]
        assert names == ["exposed", "custom"]

    def test_unknown_preset_rejected(self, run):
        code, _, err = run("standardize", "--preset", "bogus")
        assert code == 1
        assert "invalid choice" in err


class TestCollapse:
    def test_matches_library_report(self, run):
        code, out, _ = run("collapse")
        assert code == 0
        assert json.loads(out) == {
            "collapsibility": collapsibility_report_json(whickham_table())}

    def test_output_file(self, run, tmp_path):
        target = tmp_path / "collapse.json"
        code, out, _ = run("collapse", "six_strata", "-o", str(target))
        assert code == 0
        assert out == ""
        json.loads(target.read_text())


class TestPlot:
    def test_default_filename_in_cwd(self, run, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run("plot", "--figure", "1")
        assert code == 0
        assert out == "fig1_standardized_points.svg\n"
        written = (tmp_path / "fig1_standardized_points.svg").read_text()
        assert written == figure_svg(1)

    def test_explicit_output_path(self, run, tmp_path):
        target = tmp_path / "diagram.svg"
        code, out, _ = run("plot", "--figure", "2", "-o", str(target))
        assert code == 0
        assert out == f"{target}\n"
        assert target.read_text() == figure_svg(2)

    def test_figure4_defaults_to_six_strata_fixture(self, run, tmp_path):
        target = tmp_path / "hull.svg"
        code, _, _ = run("plot", "--figure", "4", "-o", str(target))
        assert code == 0
        assert target.read_text() == figure_svg(4, six_strata_table())

    def test_table_argument_feeds_the_figure(self, run, tmp_path):
        path = tmp_path / "table.csv"
        path.write_text(serialize_table(six_strata_table(), "csv"))
        target = tmp_path / "out.svg"
        code, _, _ = run("plot", str(path), "--figure", "1",
                         "-o", str(target))
        assert code == 0
        expected = figure_svg(1, parse_table(path.read_text(), format="csv"))
        assert target.read_text() == expected
        assert len(su.circles(su.parse_svg(expected))) == 10

    def test_figure_flag_is_required(self, run):
        code, _, err = run("plot")
        assert code == 1
        assert "--figure" in err

    def test_unknown_figure_number(self, run):
        code, _, err = run("plot", "--figure", "9")
        assert code == 1
        assert "invalid choice" in err

    def test_nonconvergent_fit_exits_two(self, run, tmp_path,
                                          zero_exposed_cases_table):
        path = tmp_path / "boundary.csv"
        path.write_text(serialize_table(zero_exposed_cases_table, "csv"))
        code, _, err = run("plot", str(path), "--figure", "6",
                           "-o", str(tmp_path / "fig.svg"))
        assert code == 2
        payload = error_payload(err)
        assert payload["code"] == "numerical"
        assert payload["type"] == "NonConvergenceError"

    def test_unwritable_output_reports_io_error(self, run, tmp_path):
        target = tmp_path / "missing_dir" / "fig.svg"
        code, _, err = run("plot", "--figure", "1", "-o", str(target))
        assert code == 1
        assert error_payload(err)["code"] == "io"


class TestSimulate:
    @pytest.fixture
    def spec_path(self, tmp_path):
        path = tmp_path / "population.json"
        path.write_text(json.dumps(POPULATION_SPEC))
        return str(path)

    def test_golden_sample(self, run, spec_path):
        code, out, _ = run("simulate", spec_path, "--n", "400",
                           "--seed", "20260815")
        assert code == 0
        doc = json.loads(out)
        assert doc["n"] == 400
        assert doc["seed"] == 20260815
        assert doc["spec"] == POPULATION_SPEC
        strata = doc["table"]["strata"]
        assert [s["label"] for s in strata] == ["s1", "s2"]
        assert strata[0] == {"label": "s1", "exposed_cases": 26,
                             "exposed_total": 45, "unexposed_cases": 66,
                             "unexposed_total": 142}
        assert strata[1]["exposed_total"] == 161
        assert strata[1]["unexposed_cases"] == 20

    def test_truth_section(self, run, spec_path):
        _, out, _ = run("simulate", spec_path, "--n", "10")
        truth = json.loads(out)["truth"]
        assert truth["confounded"] is True
        assert truth["crude_point"]["x"] == 0.35
        assert truth["crude_point"]["y"] == 0.275
        assert truth["marginal_causal_point"]["x"] == 0.3
        assert truth["marginal_causal_point"]["y"] == 0.35
        assert [p["x"] for p in truth["causal_points"]] == [0.4, 0.2]

    def test_same_seed_reproduces_output(self, run, spec_path):
        _, first, _ = run("simulate", spec_path, "--n", "100", "--seed", "7")
        _, second, _ = run("simulate", spec_path, "--n", "100", "--seed", "7")
        assert first == second

    def test_different_seeds_differ(self, run, spec_path):
        _, first, _ = run("simulate", spec_path, "--n", "500", "--seed", "1")
        _, second, _ = run("simulate", spec_path, "--n", "500", "--seed", "2")
        assert json.loads(first)["table"] != json.loads(second)["table"]

    def test_spec_from_stdin(self, run, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps(
            POPULATION_SPEC)))
        code, out, _ = run("simulate", "-", "--n", "50", "--seed", "3")
        assert code == 0
        assert json.loads(out)["n"] == 50

    def test_nonpositive_n_rejected(self, run, spec_path):
        code, _, err = run("simulate", spec_path, "--n", "0")
        assert code == 1
        assert "--n must be positive" in error_payload(err)["message"]

    def test_n_flag_is_required(self, run, spec_path):
        code, _, err = run("simulate", spec_path)
        assert code == 1
        assert "--n" in err

    def test_invalid_spec_json(self, run, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        code, _, err = run("simulate", str(path), "--n", "10")
        assert code == 1
        assert error_payload(err)["type"] == "ParseError"

    def test_missing_spec_key(self, run, tmp_path):
        path = tmp_path / "partial.json"
        path.write_text(json.dumps({"stratum_probs": [1.0]}))
        code, _, err = run("simulate", str(path), "--n", "10")
        assert code == 1
        message = error_payload(err)["message"]
        assert "exposure_probs" in message
        assert "po_probs" in message
