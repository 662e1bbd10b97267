"""End-to-end tests for the command-line frontend.

Most tests drive main() in process and read captured stdout; byte-level
determinism is checked through subprocesses with different hash seeds
so accidental set-iteration order cannot hide.
"""

import io
import json
import os
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

import latticeopt.cli as cli
from latticeopt.cli import CLIError, dumps_problem, main, parse_problem

FIXTURES = Path(__file__).parent / "fixtures"
ALL_FIXTURES = sorted(FIXTURES.glob("*.txt"))


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def report_of(out):
    fields = {}
    for line in out.splitlines():
        key, _, value = line.partition(":")
        fields[key] = value.strip()
    return fields


# ---------------------------------------------------------------------------
# parsing and serialization

def test_roundtrip_identity_on_all_fixtures():
    assert ALL_FIXTURES, "fixture directory is empty"
    for path in ALL_FIXTURES:
        first = parse_problem(path.read_text())
        again = parse_problem(dumps_problem(first))
        assert again == first, path.name


def test_parse_reports_offending_line():
    with pytest.raises(CLIError) as err:
        parse_problem("POLYTOPE\n1 0 <= 1\nnot a row\n")
    assert err.value.code == 4
    assert "line 3" in err.value.message


def test_parse_rejects_duplicate_section():
    with pytest.raises(CLIError) as err:
        parse_problem("POLYTOPE\n1 <= 1\nPOLYTOPE\n-1 <= 0\n")
    assert "line 3" in err.value.message
    assert "duplicate" in err.value.message


def test_parse_rejects_width_mismatch_inside_section():
    with pytest.raises(CLIError) as err:
        parse_problem("POLYTOPE\n1 0 <= 1\n1 0 0 <= 1\n")
    assert "line 3" in err.value.message


def test_parse_rejects_cross_section_mismatch():
    text = "POLYTOPE\n1 0 <= 1\n-1 0 <= 0\nPOLY\n1 2 0 0\n"
    with pytest.raises(CLIError) as err:
        parse_problem(text)
    assert err.value.code == 4
    assert "POLY" in err.value.message


def test_parse_rejects_content_before_header():
    with pytest.raises(CLIError) as err:
        parse_problem("1 <= 1\n")
    assert "before any section" in err.value.message


def test_parse_rejects_unknown_objective_term():
    with pytest.raises(CLIError) as err:
        parse_problem("OBJECTIVE\ncubic 3\n")
    assert "line 2" in err.value.message
    assert "cubic" in err.value.message


def test_parse_nfold_needs_all_keys():
    with pytest.raises(CLIError) as err:
        parse_problem("NFOLD\nA1\n1 1\nA2\n1 0\nn 2\n")
    assert "NFOLD needs" in err.value.message


def test_parse_tuple_is_single_line():
    with pytest.raises(CLIError) as err:
        parse_problem("TUPLE\n1 2\n3 4\n")
    assert "single line" in err.value.message


def test_comments_and_blank_lines_ignored():
    text = ("# leading comment\n\nPOLYTOPE\n"
            "1 <= 4   # trailing comment\n-1 <= 0\n\n")
    problem = parse_problem(text)
    assert problem.polytope is not None
    assert len(problem.polytope.A) == 2


def test_serialized_form_is_stable():
    text = (FIXTURES / "nfold_small.txt").read_text()
    once = dumps_problem(parse_problem(text))
    twice = dumps_problem(parse_problem(once))
    assert once == twice


# ---------------------------------------------------------------------------
# count

def test_count_interval_million(capsys):
    code, out, _ = run_cli(capsys, "count",
                           str(FIXTURES / "interval_million.txt"))
    fields = report_of(out)
    assert code == 0
    assert fields["count"] == "1000001"
    assert int(fields["gf_terms"]) >= 1


def test_count_unit_cube_brute(capsys):
    code, out, _ = run_cli(capsys, "count", str(FIXTURES / "unit_cube.txt"),
                           "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert fields["count"] == "8"
    assert fields["brute_count"] == "8"
    assert fields["brute_force"] == "MATCH"


def test_count_simplex_brute(capsys):
    code, out, _ = run_cli(capsys, "count", str(FIXTURES / "simplex.txt"),
                           "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert fields["count"] == "19"
    assert fields["brute_force"] == "MATCH"


def test_count_infeasible_exits_2(capsys, tmp_path):
    bad = tmp_path / "empty.txt"
    bad.write_text("POLYTOPE\n1 <= -1\n-1 <= 0\n")
    code, out, err = run_cli(capsys, "count", str(bad))
    assert code == 2
    assert out == ""
    assert "infeasible" in err


def test_count_unbounded_exits_3(capsys, tmp_path):
    bad = tmp_path / "ray.txt"
    bad.write_text("POLYTOPE\n-1 <= 0\n")
    code, _, err = run_cli(capsys, "count", str(bad))
    assert code == 3
    assert "unbounded" in err


def test_count_desk_guard_blocks_huge_brute(capsys):
    code, _, err = run_cli(capsys, "count",
                           str(FIXTURES / "interval_million.txt"),
                           "--brute-force")
    assert code == 4
    assert "desk-scale" in err


# ---------------------------------------------------------------------------
# optimize

def test_optimize_interval_half(capsys):
    code, out, _ = run_cli(capsys, "optimize",
                           str(FIXTURES / "interval_opt.txt"),
                           "--epsilon", "1/2", "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert Fraction(fields["value"]) >= 8
    assert fields["guarantee"] in ("relative", "shifted-range", "exact")
    assert fields["brute_optimum"] == "16"
    assert fields["brute_force"] == "MATCH"


def test_optimize_singleton_exact(capsys):
    code, out, _ = run_cli(capsys, "optimize",
                           str(FIXTURES / "singleton_opt.txt"),
                           "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert fields["guarantee"] == "exact"
    assert fields["value"] == "9"
    assert fields["point"] == "3"
    assert fields["brute_force"] == "MATCH"


def test_optimize_square_quarter(capsys):
    code, out, _ = run_cli(capsys, "optimize",
                           str(FIXTURES / "square_opt.txt"),
                           "--epsilon", "1/4", "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert Fraction(fields["value"]) >= Fraction(375, 4)
    assert fields["brute_optimum"] == "125"
    assert fields["brute_force"] == "MATCH"


@pytest.mark.parametrize("eps", ["0", "-1/2", "junk"])
def test_optimize_rejects_bad_epsilon(capsys, eps):
    code, out, err = run_cli(capsys, "optimize",
                             str(FIXTURES / "interval_opt.txt"),
                             "--epsilon", eps)
    assert code == 4
    assert out == ""
    assert "epsilon" in err


def test_optimize_no_lattice_points_exits_2(capsys, tmp_path):
    gap = tmp_path / "gap.txt"
    gap.write_text("POLYTOPE\n3 <= 2\n-3 <= -1\n\nPOLY\n1 2\n")
    code, _, err = run_cli(capsys, "optimize", str(gap))
    assert code == 2
    assert "lattice points" in err


# ---------------------------------------------------------------------------
# nfold

def test_nfold_small_certified(capsys):
    code, out, _ = run_cli(capsys, "nfold", str(FIXTURES / "nfold_small.txt"),
                           "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert fields["solution"] == "1 0 2 2"
    assert fields["value"] == "2"
    assert fields["certificate"] == "GRAVER-OPTIMAL"
    assert fields["brute_force"] == "MATCH"


def test_nfold_quadratic_certified(capsys):
    code, out, _ = run_cli(capsys, "nfold", str(FIXTURES / "nfold_quad.txt"),
                           "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert fields["solution"] == "1 3 2 0"
    assert fields["value"] == "2"
    assert fields["certificate"] == "GRAVER-OPTIMAL"
    assert fields["brute_force"] == "MATCH"


def test_nfold_infeasible_exits_2(capsys, tmp_path):
    text = (FIXTURES / "nfold_small.txt").read_text()
    bad = tmp_path / "bad.txt"
    bad.write_text(text.replace("b 5 1 2", "b 5 7 2"))
    code, _, err = run_cli(capsys, "nfold", str(bad))
    assert code == 2
    assert "infeasible" in err


def test_nfold_rejects_non_box_polytope(capsys, tmp_path):
    text = (FIXTURES / "nfold_small.txt").read_text()
    bad = tmp_path / "bad.txt"
    bad.write_text(text.replace("1 0 0 0 <= 5", "1 1 0 0 <= 5", 1))
    code, _, err = run_cli(capsys, "nfold", str(bad))
    assert code == 4
    assert "box POLYTOPE" in err
    assert "line" in err


def test_nfold_rejects_tab_objective(capsys, tmp_path):
    text = (FIXTURES / "nfold_small.txt").read_text()
    bad = tmp_path / "bad.txt"
    bad.write_text(text.replace("pwl 3 0", "tab 1 2 3", 1))
    code, _, err = run_cli(capsys, "nfold", str(bad))
    assert code == 4
    assert "tab" in err
    assert "indepsys" in err


# ---------------------------------------------------------------------------
# graver

def test_graver_listing_with_brute(capsys):
    code, out, _ = run_cli(capsys, "graver",
                           str(FIXTURES / "nfold_small.txt"),
                           "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert fields["rows"] == "3"
    assert fields["cols"] == "4"
    assert fields["size"] == "1"
    assert fields["elements"] == "0 1 0 -1"
    assert fields["brute_force"] == "MATCH"


# ---------------------------------------------------------------------------
# convexmax

def test_convexmax_fixture(capsys):
    code, out, _ = run_cli(capsys, "convexmax",
                           str(FIXTURES / "convexmax_sq.txt"),
                           "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert fields["value"] == "16"
    assert fields["image"] == "0 4"
    assert fields["solution"] == "0 1 3"
    assert int(fields["oracle_calls"]) >= 1
    assert fields["brute_force"] == "MATCH"


def test_convexmax_unbounded_exits_3(capsys, tmp_path):
    free = tmp_path / "free.txt"
    free.write_text("POLYTOPE\n1 -1 <= 0\n-1 1 <= 0\n\n"
                    "WEIGHTS\n1 1\n\nOBJECTIVE\nsq 0\n")
    code, _, err = run_cli(capsys, "convexmax", str(free))
    assert code == 3
    assert "unbounded" in err


def test_convexmax_infeasible_exits_2(capsys, tmp_path):
    tight = tmp_path / "tight.txt"
    tight.write_text("POLYTOPE\n1 1 <= 5\n-1 -1 <= -5\n"
                     "1 0 <= 1\n0 1 <= 1\n\n"
                     "WEIGHTS\n1 0\n\nOBJECTIVE\nsq 0\n")
    code, _, err = run_cli(capsys, "convexmax", str(tight))
    assert code == 2
    assert "infeasible" in err


def test_convexmax_rejects_unpaired_row(capsys, tmp_path):
    lonely = tmp_path / "lonely.txt"
    lonely.write_text("POLYTOPE\n1 1 1 <= 4\n1 0 0 <= 3\n"
                      "0 1 0 <= 3\n0 0 1 <= 3\n\n"
                      "WEIGHTS\n1 0 0\n\nOBJECTIVE\nsq 0\n")
    code, _, err = run_cli(capsys, "convexmax", str(lonely))
    assert code == 4
    assert "line 2" in err
    assert "equality pair" in err


# ---------------------------------------------------------------------------
# relax

PUBLISHED_ROWS = {
    "9 6 <= 29",
    "3 10 <= 31",
    "9 10 <= 37",
    "15 2 <= 37",
    "15 6 <= 41",
    "-1 0 <= 0",
    "0 -1 <= 0",
    "0 1 <= 3",
}


def test_relax_reproduces_published_rows(capsys):
    code, out, _ = run_cli(capsys, "relax", str(FIXTURES / "cps_relax.txt"),
                           "--brute-force")
    fields = report_of(out)
    assert code == 0
    rows = set(fields["inequalities"].split("; "))
    assert rows == PUBLISHED_ROWS
    assert fields["ki_equal"] == "true"
    assert fields["condition_holds"] == "true"
    assert fields["brute_force"] == "MATCH"
    points = fields["relaxation_points"].split("; ")
    assert "0 3" in points and "2 1" in points
    assert fields["relaxation_points"] == fields["ki_points"]


def test_relax_rejects_fractional_polynomial(capsys, tmp_path):
    frac = tmp_path / "frac.txt"
    frac.write_text("POLYTOPE\n1 <= 2\n-1 <= 0\n\nPOLY\n1/2 2\n")
    code, _, err = run_cli(capsys, "relax", str(frac))
    assert code == 4
    assert "integer" in err


# ---------------------------------------------------------------------------
# indepsys

def test_indepsys_gap_two_reported(capsys):
    code, out, _ = run_cli(capsys, "indepsys",
                           str(FIXTURES / "gap_indep_m2.txt"),
                           "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert fields["x_max"] == "0 0 0 0 1 1 1 1"
    assert fields["max_weight"] == "8"
    assert fields["best_weight"] == "0"
    assert fields["lower_image"] == "0 2 4 6 8"
    assert fields["image"] == "0 1 2 3 4 6 8"
    assert fields["better_values"] == "1 3"
    assert fields["gap"] == "2"
    assert fields["evaluations"] == "5"
    assert fields["brute_force"] == "MATCH"


def test_indepsys_cube_no_gap(capsys):
    code, out, _ = run_cli(capsys, "indepsys",
                           str(FIXTURES / "indep_cube.txt"),
                           "--brute-force")
    fields = report_of(out)
    assert code == 0
    assert fields["gap"] == "0"
    assert fields["better_values"] == ""
    assert fields["evaluations"] == "4"
    assert fields["r_bound"] == "0"
    assert fields["brute_force"] == "MATCH"


def test_indepsys_rejects_short_table(capsys, tmp_path):
    short = tmp_path / "short.txt"
    short.write_text("INDEP\n111\n\nWEIGHTS\n1 1 1\n\nTUPLE\n1\n\n"
                     "OBJECTIVE\ntab 1 2 3\n")
    code, _, err = run_cli(capsys, "indepsys", str(short))
    assert code == 4
    assert "maximum weight is 3" in err


def test_indepsys_needs_one_weights_row(capsys, tmp_path):
    two = tmp_path / "two.txt"
    two.write_text("INDEP\n111\n\nWEIGHTS\n1 1 1\n2 2 2\n\nTUPLE\n1 2\n\n"
                   "OBJECTIVE\npwl 1 0\n")
    code, _, err = run_cli(capsys, "indepsys", str(two))
    assert code == 4
    assert "one WEIGHTS row" in err


# ---------------------------------------------------------------------------
# cross-cutting behaviour

BRUTE_CASES = (
    ("count", "unit_cube.txt"),
    ("count", "simplex.txt"),
    ("optimize", "interval_opt.txt"),
    ("optimize", "singleton_opt.txt"),
    ("optimize", "square_opt.txt"),
    ("nfold", "nfold_small.txt"),
    ("nfold", "nfold_quad.txt"),
    ("graver", "nfold_small.txt"),
    ("graver", "nfold_quad.txt"),
    ("convexmax", "convexmax_sq.txt"),
    ("relax", "cps_relax.txt"),
    ("indepsys", "gap_indep_m2.txt"),
    ("indepsys", "indep_cube.txt"),
)


@pytest.mark.parametrize("command,fixture", BRUTE_CASES)
def test_brute_force_matches_everywhere(capsys, command, fixture):
    code, out, _ = run_cli(capsys, command, str(FIXTURES / fixture),
                           "--brute-force")
    assert code == 0
    assert report_of(out)["brute_force"] == "MATCH"


DETERMINISM_CASES = (
    ("count", "unit_cube.txt"),
    ("graver", "nfold_small.txt"),
    ("relax", "cps_relax.txt"),
    ("indepsys", "gap_indep_m2.txt"),
)


@pytest.mark.parametrize("command,fixture", DETERMINISM_CASES)
def test_output_bytes_survive_hash_seed_and_jobs(command, fixture):
    outputs = []
    for seed, jobs in (("1", "1"), ("77", "1"), ("1", "4")):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        proc = subprocess.run(
            [sys.executable, "-m", "latticeopt.cli", command,
             str(FIXTURES / fixture), "--brute-force", "--jobs", jobs],
            capture_output=True, env=env, cwd=str(FIXTURES.parent.parent))
        assert proc.returncode == 0, proc.stderr.decode()
        outputs.append(proc.stdout)
    assert outputs[0] == outputs[1] == outputs[2]


def test_json_matches_text_field_order(capsys):
    path = str(FIXTURES / "unit_cube.txt")
    _, text_out, _ = run_cli(capsys, "count", path, "--brute-force")
    _, json_out, _ = run_cli(capsys, "count", path, "--brute-force",
                             "--format", "json")
    parsed = json.loads(json_out)
    text_keys = [line.split(":")[0] for line in text_out.splitlines()]
    assert list(parsed.keys()) == text_keys
    assert parsed["count"] == 8
    assert parsed["brute_force"] == "MATCH"


def test_json_prints_rationals_exactly(capsys):
    _, out, _ = run_cli(capsys, "optimize",
                        str(FIXTURES / "interval_opt.txt"),
                        "--epsilon", "1/3", "--format", "json")
    parsed = json.loads(out)
    assert parsed["epsilon"] == "1/3"
    assert parsed["point"] == [4]


def test_mismatch_exits_1(capsys, monkeypatch):
    monkeypatch.setattr(cli, "specialize_at_one", lambda g: Fraction(7))
    code, out, _ = run_cli(capsys, "count", str(FIXTURES / "unit_cube.txt"),
                           "--brute-force")
    assert code == 1
    assert report_of(out)["brute_force"] == "MISMATCH"


def test_reads_stdin_with_dash(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin",
                        io.StringIO("POLYTOPE\n1 <= 2\n-1 <= 0\n"))
    code, out, _ = run_cli(capsys, "count", "-")
    assert code == 0
    assert report_of(out)["count"] == "3"


def test_timing_keeps_stdout_identical(capsys):
    path = str(FIXTURES / "unit_cube.txt")
    _, plain, _ = run_cli(capsys, "count", path)
    _, timed, err = run_cli(capsys, "count", path, "--timing")
    assert timed == plain
    assert "elapsed_seconds" in err


def test_usage_errors_exit_4(capsys):
    assert run_cli(capsys, "count")[0] == 4
    assert run_cli(capsys, "nosuchcommand", "x.txt")[0] == 4
    assert run_cli(capsys, "count", "no_such_file.txt")[0] == 4
    assert run_cli(capsys, "count", str(FIXTURES / "unit_cube.txt"),
                   "--jobs", "0")[0] == 4


def test_missing_section_exits_4(capsys):
    code, _, err = run_cli(capsys, "count", str(FIXTURES / "indep_cube.txt"))
    assert code == 4
    assert "POLYTOPE" in err


def test_empty_file_exits_4(capsys, tmp_path):
    blank = tmp_path / "blank.txt"
    blank.write_text("# nothing here\n")
    code, _, err = run_cli(capsys, "count", str(blank))
    assert code == 4
    assert "empty problem file" in err


def test_module_invocation_via_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "latticeopt.cli", "count",
         str(FIXTURES / "unit_cube.txt"), "--format", "json"],
        capture_output=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["count"] == 8
