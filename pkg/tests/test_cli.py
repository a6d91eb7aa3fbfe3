"""CLI: subcommand behavior, exit codes, report stability."""

import json

from ivalbench import cli


def run(argv):
    return cli.main(argv)


def test_extrema_matches_spec_example(capsys):
    assert run(["extrema", "--model", "approxN", "--n", "3", "--max", "2"]) == 0
    out = capsys.readouterr().out
    assert "lo = 3, hi = 3" in out


def test_mdp_counter(capsys):
    assert run(["mdp", "--model", "unbiased-counter", "--threads", "2",
                "--budget", "60", "-f", "read"]) == 0
    assert "lo = 2, hi = 2" in capsys.readouterr().out


def test_laws_deterministic_report(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["laws", "--suite", "extrema", "--cases", "40", "--seed", "7",
                "--out", str(a)]) == 0
    assert run(["laws", "--suite", "extrema", "--cases", "40", "--seed", "7",
                "--out", str(b)]) == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    ra.pop("elapsed_seconds"), rb.pop("elapsed_seconds")
    assert ra == rb


def test_couple_builtin_script(tmp_path):
    out = tmp_path / "couple.json"
    assert run(["couple", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["verdict"]["passed"] is True
    assert rep["witness"]["predicate"].startswith("(or")


def test_couple_failing_script(tmp_path):
    bad = tmp_path / "bad.sexp"
    bad.write_text("(equiv (ret 1 1 (pred-eq)) (ival (1 1/1)) (pset (ival (2 1/1))))\n")
    assert run(["couple", "--script", str(bad)]) == 1


def test_sandwich(capsys):
    assert run(["sandwich", "--threads", "1", "--max", "2", "--budget", "30"]) == 0
    assert "pass" in capsys.readouterr().out


def test_counter_bias_exit_and_report(tmp_path):
    out = tmp_path / "bias.json"
    assert run(["counter-bias", "--threads", "2", "--bits", "2",
                "--budget", "80", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["scheduler_dependent"] is True
    assert rep["lo"] == "3/2" and rep["hi"] == "5/2"


def test_skiplist_cost_csv(tmp_path):
    out = tmp_path / "cost.csv"
    assert run(["skiplist-cost", "--keys", "2", "4", "--max-size", "2",
                "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("keys,query")
    assert len(lines) == 1 + 4 * 2  # (empty, {2}, {4}, {2,4}) x 2 queries


def test_parse_bundled_programs(capsys):
    assert run(["parse"]) == 0
    assert "round-trip ok" in capsys.readouterr().out


def test_simulate_small(capsys):
    assert run(["simulate", "--model", "unbiased-counter", "--threads", "2",
                "--budget", "80", "--trials", "300", "--seed", "3",
                "-f", "read"]) == 0
    assert "mean = 2" in capsys.readouterr().out


def test_invalid_configuration_exit_code():
    assert run(["extrema", "--model", "nosuch", "--n", "1"]) == 2
    assert run(["mdp", "--model", "unbiased-counter", "--threads", "0"]) == 2
    assert run(["simulate", "--model", "unbiased-counter", "--sched", "bogus"]) == 2


def test_functional_validation():
    assert run(["mdp", "--model", "unbiased-counter", "-f", "nope"]) == 2
