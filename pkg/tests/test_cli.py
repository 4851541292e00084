import shutil
import subprocess
from importlib import resources

import pytest

from probe import corpus_files
from probe.cli import main
from probe.hotel import hotel_spec_text
from probe.semantics import read_plts

CORPUS = resources.files("probe") / "corpus"


def path(name):
    return str(CORPUS / name)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_throw(capsys):
    assert run(capsys, "parse", path("throw.prb")) == (0, "", "")


def test_parse_unguarded(capsys):
    code, _, err = run(capsys, "parse", path("unguarded.prb"))
    assert code == 1 and "unguarded recursion" in err
    assert ":2:6: error:" in err


def test_parse_error_position(tmp_path, capsys):
    f = tmp_path / "bad.prb"
    f.write_text("act a;\ninit a . ;\n")
    code, _, err = run(capsys, "parse", str(f))
    assert code == 1 and "bad.prb:2:10:" in err


def test_parse_real_hotel_warns(capsys):
    code, _, err = run(capsys, "parse", path("real_hotel_continuous.prb"))
    assert code == 0 and "not finitely explorable" in err


@pytest.mark.parametrize("name", ["throw.prb", "throw_sequence.prb", "delta.prb", "hotel2.prb",
                                  "bernoulli_3_4.prb", "slot_machine.prb", "store_employees.prb",
                                  "real_hotel_continuous.prb"])
def test_corpus_parses(name, capsys):
    code, _, err = run(capsys, "parse", path(name))
    assert code == 0 and "error" not in err


def test_corpus_listing():
    assert "throw.prb" in corpus_files() and "unguarded.prb" in corpus_files()


def test_explore_throw(tmp_path, capsys):
    out = tmp_path / "t.pdes"
    code, stdout, _ = run(capsys, "explore", path("throw.prb"), "--out", str(out))
    assert code == 0 and stdout.strip() == "2 nd-states, 1 prob-state, 2 transitions"
    assert len(read_plts(out.read_text()).nd_states) == 2


def test_explore_delta(capsys):
    code, stdout, err = run(capsys, "explore", path("delta.prb"))
    assert code == 0 and stdout.startswith("pdes (0, 1, 1)")
    assert "1 nd-state, 1 prob-state, 0 transitions" in err


def test_explore_hotel3_reloads(tmp_path, capsys):
    spec = tmp_path / "hotel3.prb"
    spec.write_text(hotel_spec_text(3))
    out = tmp_path / "hotel3.pdes"
    assert run(capsys, "explore", str(spec), "--out", str(out))[0] == 0
    plts = read_plts(out.read_text())
    masses = [p for _, p in plts.prob_states[plts.initial].items()]
    assert sum(masses) == 1 and all((27 * p).denominator == 1 for p in masses)
    code, stdout, _ = run(capsys, "compare", str(out), path("hotel2.prb"))
    assert code == 0 and stdout.startswith("DISTINGUISHED")


def test_explore_truncated(capsys):
    code, _, err = run(capsys, "explore", path("throw_sequence.prb"), "--max-depth", "3")
    assert code == 0 and "(truncated)" in err


def test_explore_infinite_sum_is_user_error(capsys):
    code, _, err = run(capsys, "explore", path("real_hotel_continuous.prb"))
    assert code == 1 and "not finitely explorable" in err


@pytest.mark.parametrize("a, b, verdict", [
    ("hotel2.prb", "bernoulli_3_4.prb", "EQUIVALENT"),
    ("throw.prb", "throw.prb", "EQUIVALENT"),
    ("throw.prb", "delta.prb", "DISTINGUISHED block=0 massA=1/2 massB=0"),
])
def test_compare(a, b, verdict, capsys):
    assert run(capsys, "compare", path(a), path(b)) == (0, verdict + "\n", "")


def test_minimize(tmp_path, capsys):
    out = tmp_path / "m.pdes"
    code, stdout, _ = run(capsys, "minimize", path("hotel2.prb"), "--out", str(out))
    assert code == 0 and stdout.strip().endswith("3 nd-states, 2 prob-states, 1 transition")
    assert len(read_plts(out.read_text()).nd_states) == 3


def test_trace(capsys):
    code, stdout, _ = run(capsys, "trace", path("throw.prb"), "-L", "2")
    assert code == 0
    assert stdout.splitlines() == ["1/4\thead head", "1/4\thead tail", "1/4\ttail head", "1/4\ttail tail"]


def test_simulate_throw(capsys):
    code, stdout, _ = run(capsys, "simulate", path("throw.prb"), "--runs", "100000",
                          "--steps", "1", "--seed", "1")
    assert code == 0
    head = next(l for l in stdout.splitlines() if l.startswith("head:"))
    fields = dict(kv.split("=") for kv in head.split()[1:])
    assert float(fields["ci_low"]) <= 0.5 <= float(fields["ci_high"])


def test_simulate_default_seed_reproducible(capsys):
    first = run(capsys, "simulate", path("throw.prb"), "--runs", "500", "--steps", "3")
    second = run(capsys, "simulate", path("throw.prb"), "--runs", "500", "--steps", "3", "--seed", "0xC0FFEE")
    assert first == second and "seed: 12648430" in first[1]


def test_simulate_jobs_independent(capsys):
    one = run(capsys, "simulate", path("throw.prb"), "--runs", "900", "--steps", "2", "--traces")
    two = run(capsys, "simulate", path("throw.prb"), "--runs", "900", "--steps", "2", "--traces", "--jobs", "2")
    assert one == two


def test_simulate_unresolved_sum(capsys):
    code, _, err = run(capsys, "simulate", path("slot_machine.prb"), "--runs", "10")
    assert code == 1 and "unresolved sum variable t" in err


def test_simulate_with_resolver(capsys):
    code, stdout, _ = run(capsys, "simulate", path("slot_machine.prb"), "--runs", "50",
                          "--scheduler", "resolve:t=Exp(1)", "--json")
    assert code == 0 and '"wait"' in stdout


def test_hotel_table(capsys):
    code, stdout, _ = run(capsys, "hotel", "1", "2", "4", "1000000")
    assert code == 0
    last = stdout.splitlines()[-1].split()
    assert last[0] == "1000000" and abs(float(last[2]) - 0.6321205588) <= 1e-6


def test_hotel_csv(capsys):
    code, stdout, _ = run(capsys, "hotel", "10", "100", "1000", "--csv", "--extrapolate")
    assert code == 0 and stdout.startswith("n,p_exact,p_float,abs_err\n")
    assert "# extrapolated limit 0.632" in stdout


def exit_code(argv):
    try:
        return main(argv)
    except SystemExit as exc:  # argparse usage errors
        return exc.code


@pytest.mark.parametrize("argv", [
    ["parse", "/nonexistent.prb"],
    ["hotel", "0"],
    ["hotel", "x"],
    ["simulate", "--runs", "0", "THROW"],
    ["simulate", "--scheduler", "fixed:x", "THROW"],
    ["frobnicate"],
    [],
])
def test_user_errors(argv, capsys):
    argv = [path("throw.prb") if a == "THROW" else a for a in argv]
    assert exit_code(argv) == 1


def test_limit_exceeded(capsys):
    code, _, err = run(capsys, "explore", path("hotel2.prb"), "--max-product", "2")
    assert code == 2 and "limit exceeded" in err


@pytest.mark.skipif(shutil.which("probe") is None, reason="console script not installed")
def test_console_script_exit_codes(tmp_path):
    def status(*argv):
        return subprocess.run(["probe", *argv], capture_output=True, text=True).returncode
    assert status("parse", path("throw.prb")) == 0
    assert status("parse", path("unguarded.prb")) == 1
    assert status("explore", path("hotel2.prb"), "--max-product", "2") == 2
    assert status("--help") == 0
