""" End-to-end tests of the command line through main()"""

import pytest

from automata import parse_dpa
from main import EXIT_ERROR, EXIT_I, EXIT_O, main
from machine import parse_strategy


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_copy(capsys, fixture_path):
    code, out, _ = run(capsys, "solve", fixture_path("copy"))
    assert code == EXIT_O
    lines = out.splitlines()
    assert lines[0] == "WINNER=O"
    assert "NPRIME=3" in lines and "BOUND=5" in lines


def test_solve_lost_game(capsys, fixture_path):
    code, out, _ = run(capsys, "solve", fixture_path("infones"))
    assert code == EXIT_I
    assert "WINNER=I" in out and "BOUND=-" in out


def test_solve_with_sweep(capsys, fixture_path):
    code, out, _ = run(capsys, "solve", fixture_path("shift1"), "--sweep", "2")
    assert code == EXIT_O
    assert out.splitlines()[5] == "MINDELAY=1"


@pytest.mark.parametrize("delay, expected", [(2, EXIT_I), (3, EXIT_O)])
def test_oracle(capsys, fixture_path, delay, expected):
    code, out, _ = run(capsys, "oracle", fixture_path("ex33"), "--delay", str(delay))
    assert code == expected
    assert f"DELAY={delay}" in out


def test_oracle_dumps(capsys, fixture_path, tmp_path):
    strategy, arena = tmp_path / "s.txt", tmp_path / "arena.txt"
    code, _, _ = run(
        capsys,
        "oracle",
        fixture_path("shift1"),
        "--delay",
        "1",
        "--dump-strategy",
        str(strategy),
        "--dump_arena",
        str(arena),
    )
    assert code == EXIT_O
    assert parse_strategy(strategy.read_text()).delay == 1
    assert arena.read_text().startswith("0 ")


def test_oracle_needs_delay(capsys, fixture_path):
    code, _, err = run(capsys, "oracle", fixture_path("copy"))
    assert code == EXIT_ERROR
    assert "--delay" in err


def test_profile(capsys, fixture_path):
    code, out, _ = run(capsys, "profile", fixture_path("copy"))
    assert code == EXIT_O
    lines = out.splitlines()
    assert lines[:4] == ["MONOID=3", "PROFILES=3", "NPRIME=3", "DPRIME=1"]
    assert lines[4].startswith("# NPRIME is the largest minimal automaton size")
    assert lines[5].startswith("STATE 0: init=True")
    assert len(lines) == 8


def test_synthesize_then_verify(capsys, fixture_path, tmp_path):
    target = tmp_path / "copy.strategy"
    code, out, _ = run(capsys, "synthesize", fixture_path("copy"), "-o", str(target))
    assert code == EXIT_O
    assert "DELAY=5" in out
    code, out, _ = run(capsys, "verify", fixture_path("copy"), "--strategy", str(target))
    assert code == EXIT_O
    assert out.strip() == "PASS"


def test_synthesize_to_stdout(capsys, fixture_path):
    code, out, _ = run(capsys, "synthesize", fixture_path("copy"))
    assert code == EXIT_O
    assert parse_strategy(out).delay == 5


def test_synthesize_lost_game(capsys, fixture_path):
    code, out, _ = run(capsys, "synthesize", fixture_path("infones"))
    assert code == EXIT_I
    assert out.splitlines() == ["WINNER=I", "I wins"]


def test_verify_failing_machine(capsys, fixture_path, tmp_path):
    complement = tmp_path / "complement.strategy"
    complement.write_text(
        "strategy\ndelay: 0\nin: 0 1\nout: 0 1\nstates: 1\ninit: 0\n"
        "0 0 -> 0 / 1\n0 1 -> 0 / 0\nend\n"
    )
    code, out, _ = run(capsys, "verify", fixture_path("copy"), "--strategy", str(complement))
    assert code == EXIT_I
    assert out.strip() == "FAIL"


def test_gen_is_seeded(capsys, tmp_path):
    first, second = tmp_path / "a.dpa", tmp_path / "b.dpa"
    for path in (first, second):
        code, _, _ = run(capsys, "gen", "--states", "4", "--seed", "7", "--output", str(path))
        assert code == EXIT_O
    assert first.read_text() == second.read_text()
    A = parse_dpa(first.read_text())
    assert A.n == 4


def test_xcheck_small(capsys):
    code, out, _ = run(
        capsys, "xcheck", "--count", "3", "--max-states", "2", "--max_delay", "2",
        "--nprime_cap", "3", "--synth_delay_cap", "5", "--max_profiles", "32", "--comet_skip",
    )
    assert code == EXIT_O
    assert "FAILURES=0" in out
    assert "homomorphism" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "does-not-exist.dpa"],
        ["oracle", "--delay", "-1"],
        ["gen", "--states", "0"],
        ["gen", "--inputs", "1"],
        ["solve"],
    ],
)
def test_errors_exit_with_one(capsys, fixture_path, argv):
    if argv[0] == "oracle":
        argv = argv[:1] + [fixture_path("copy")] + argv[1:]
    code, _, err = run(capsys, *argv)
    assert code == EXIT_ERROR
    assert err.startswith("error:")


def test_parse_error_reports_line(capsys, tmp_path):
    broken = tmp_path / "broken.dpa"
    broken.write_text("dpa\nin: 0 1\nout: 0 1\nstates: 1\ninit: 0\ncolors: 0\n0 0/0 7\n")
    code, _, err = run(capsys, "solve", str(broken))
    assert code == EXIT_ERROR
    assert "line 7" in err


def test_record_appends(capsys, fixture_path, tmp_path):
    record = tmp_path / "record.txt"
    for _ in range(2):
        run(capsys, "solve", fixture_path("copy"), "--record", str(record))
    assert record.read_text().count("WINNER=O") == 2


def test_invalid_utf8_is_a_parse_error(capsys, tmp_path):
    broken = tmp_path / "latin1.dpa"
    broken.write_bytes(b"dpa\nin: 0 1\n\xff\n")
    code, out, err = run(capsys, "solve", str(broken))
    assert code == EXIT_ERROR
    assert out == ""
    assert err.startswith("error:")
    assert "UTF-8" in err and "line 3" in err


def test_sweep_past_budget_keeps_the_verdict(capsys, fixture_path):
    code, out, _ = run(
        capsys, "solve", fixture_path("ex33"), "--sweep", "5", "--max_vertices", "50"
    )
    assert code == EXIT_O
    lines = out.splitlines()
    assert lines[0] == "WINNER=O"
    assert lines[5] == "MINDELAY=-"
    assert any(line.startswith("# oracle sweep stopped") for line in lines)


def test_oracle_with_delay_function(capsys, fixture_path):
    code, out, _ = run(capsys, "oracle", fixture_path("copy"), "--delay", "2,3:1")
    assert code == EXIT_O
    assert "DELAY=2,3:1" in out.splitlines()


def test_oracle_dumps_table_for_nonconstant_delay(capsys, fixture_path, tmp_path):
    table = tmp_path / "table.txt"
    code, _, _ = run(
        capsys, "oracle", fixture_path("copy"), "--delay", "2,3:1", "--dump_strategy", str(table)
    )
    assert code == EXIT_O
    rows = table.read_text().splitlines()
    assert rows and all(" -> " in row for row in rows)


@pytest.mark.parametrize("delay", ["1,2", "a:1", "1:3"])
def test_bad_delay_functions(capsys, fixture_path, delay):
    code, _, err = run(capsys, "oracle", fixture_path("copy"), "--delay", delay)
    assert code == EXIT_ERROR
    assert err.startswith("error:")


def test_verify_needs_constant_delay(capsys, fixture_path, tmp_path):
    copy = tmp_path / "copy.strategy"
    copy.write_text(
        "strategy\ndelay: 0\nin: 0 1\nout: 0 1\nstates: 1\ninit: 0\n"
        "0 0 -> 0 / 0\n0 1 -> 0 / 1\nend\n"
    )
    code, _, err = run(
        capsys, "verify", fixture_path("copy"), "--strategy", str(copy), "--delay", "2,3:1"
    )
    assert code == EXIT_ERROR
    assert "constant" in err
