"""The command-line front end: outputs, exit codes, and the self-test."""

import re
import subprocess
import sys

import pytest

from forestalg import cli, formats, oracle, trees


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- eval --------------------------------------------------------------------

def test_eval_accepts_the_nine_node_fixture(capsys, data_dir):
    code, out, _ = run(
        capsys, "eval",
        "--tree", str(data_dir / "nine.tree"),
        "--automaton", str(data_dir / "cycle.aut"),
    )
    assert code == 0
    assert out == "accepted: true\n"


def test_eval_rejects_a_single_b_node(capsys, tmp_path, data_dir):
    tree = tmp_path / "one.tree"
    tree.write_text("0 - b -\n")
    code, out, _ = run(
        capsys, "eval",
        "--tree", str(tree),
        "--automaton", str(data_dir / "cycle.aut"),
    )
    assert code == 0
    assert out == "accepted: false\n"


# -- exit codes --------------------------------------------------------------

def test_missing_argument_is_a_usage_error(capsys, data_dir):
    code, _, err = run(capsys, "eval", "--tree", str(data_dir / "nine.tree"))
    assert code == 1
    assert "usage error" in err


def test_unreadable_file_is_a_usage_error(capsys, data_dir):
    code, _, err = run(
        capsys, "eval",
        "--tree", str(data_dir / "no-such-file.tree"),
        "--automaton", str(data_dir / "cycle.aut"),
    )
    assert code == 1
    assert "cannot read tree file" in err


def test_enum_requires_a_selecting_automaton(capsys, data_dir):
    code, _, err = run(
        capsys, "enum",
        "--tree", str(data_dir / "nine.tree"),
        "--automaton", str(data_dir / "cycle.aut"),
    )
    assert code == 1
    assert "selecting automaton" in err


def test_malformed_tree_is_a_parse_error(capsys, tmp_path, data_dir):
    bad = tmp_path / "bad.tree"
    bad.write_text("0 - a\n")
    code, _, err = run(
        capsys, "eval",
        "--tree", str(bad),
        "--automaton", str(data_dir / "cycle.aut"),
    )
    assert code == 2
    assert "parse error" in err


def test_malformed_automaton_is_a_parse_error(capsys, tmp_path, data_dir):
    bad = tmp_path / "bad.aut"
    bad.write_text("states: q\nnonsense line\n")
    code, _, err = run(
        capsys, "eval",
        "--tree", str(data_dir / "nine.tree"),
        "--automaton", str(bad),
    )
    assert code == 2
    assert "parse error" in err


# -- enum --------------------------------------------------------------------

def test_enum_streams_the_pair_fixture(capsys, data_dir):
    code, out, _ = run(
        capsys, "enum",
        "--tree", str(data_dir / "seven.tree"),
        "--automaton", str(data_dir / "sel.aut"),
    )
    assert code == 0
    assert out == "4\t1\n5\t1\n#count 2\n"


def test_enum_respects_the_limit(capsys, data_dir):
    code, out, _ = run(
        capsys, "enum",
        "--tree", str(data_dir / "seven.tree"),
        "--automaton", str(data_dir / "sel.aut"),
        "--limit", "1",
    )
    assert code == 0
    assert out == "4\t1\n#count 1\n"


def test_enum_restreams_after_each_update(capsys, data_dir):
    code, out, _ = run(
        capsys, "enum",
        "--tree", str(data_dir / "seven.tree"),
        "--automaton", str(data_dir / "sel.aut"),
        "--updates", str(data_dir / "selups.txt"),
    )
    assert code == 0
    assert out == (
        "4\t1\n5\t1\n#count 2\n"
        "#update applied\n"
        "4\t1\n5\t1\n#count 2\n"
        "#update applied\n"
        "4\t1\n#count 1\n"
    )


# -- update-stream -----------------------------------------------------------

def test_update_stream_matches_oracle_replay(capsys, data_dir):
    code, out, _ = run(
        capsys, "update-stream",
        "--tree", str(data_dir / "nine.tree"),
        "--automaton", str(data_dir / "cycle.aut"),
        "--updates", str(data_dir / "ups.txt"),
    )
    assert code == 0
    lines = out.splitlines()
    accepted = [ln == "accepted: true" for ln in lines if ln.startswith("accepted:")]
    new_ids = [int(ln.split()[1]) for ln in lines if ln.startswith("#new ")]
    t = formats.parse_tree((data_dir / "nine.tree").read_text())
    aut = formats.parse_automaton((data_dir / "cycle.aut").read_text())
    ups = formats.parse_updates((data_dir / "ups.txt").read_text())
    assert len(new_ids) == sum(1 for u in ups if u.kind != "delete" and u.kind != "relab")
    want = [oracle.oracle_eval(aut, t)]
    minted = iter(new_ids)
    for u in ups:
        nid = next(minted) if u.kind in ("subdiv", "insertL", "insertR") else None
        trees.apply_update(t, u, new_id=nid)
        want.append(oracle.oracle_eval(aut, t))
    assert accepted == want


def test_update_stream_exact_output_in_a_fresh_process(data_dir):
    out = subprocess.run(
        [sys.executable, "-m", "forestalg.cli", "update-stream",
         "--tree", str(data_dir / "nine.tree"),
         "--automaton", str(data_dir / "cycle.aut"),
         "--updates", str(data_dir / "ups.txt")],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout == (
        "accepted: true\n"
        "accepted: false\n"
        "#new 9\n"
        "accepted: false\n"
        "accepted: false\n"
    )


# -- check -------------------------------------------------------------------

def test_check_passes(capsys):
    code, out, _ = run(capsys, "check", "--trials", "25", "--seed", "7")
    assert code == 0
    assert out == "ok: 25 trials\n"


def test_check_reports_a_planted_failure(capsys, monkeypatch):
    real = oracle.oracle_eval
    monkeypatch.setattr(cli.oracle, "oracle_eval", lambda aut, t: not real(aut, t))
    code, _, err = run(capsys, "check", "--trials", "5", "--seed", "7")
    assert code == 3
    assert "check failed at trial 0" in err
    assert "--- tree ---" in err
    assert "--- automaton ---" in err


# -- bench -------------------------------------------------------------------

ROW = re.compile(r"^(\d+),(\d+),(\d+),(\d+),(\d+),([\d.]+)$")


def test_bench_rows(capsys):
    code, out, err = run(
        capsys, "bench",
        "--sizes", "64,128",
        "--updates", "30",
        "--answers", "30",
        "--kernels", "py",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "# backend py"
    assert lines[1] == "n,build_ns,update_ns,delay_ns,height,bound10log2"
    rows = [ROW.match(ln) for ln in lines[2:]]
    assert len(rows) == 2 and all(rows)
    for m in rows:
        assert int(m.group(5)) <= float(m.group(6))  # height within its bound
    assert "update_p95_ns" in err


def test_bench_both_backends(capsys):
    try:
        from forestalg import kernels

        kernels.get_backend("c")
    except ImportError:
        pytest.skip("compiled kernels not built")
    code, out, _ = run(
        capsys, "bench",
        "--sizes", "64",
        "--updates", "10",
        "--answers", "10",
        "--kernels", "both",
    )
    assert code == 0
    backends = [ln for ln in out.splitlines() if ln.startswith("# backend")]
    assert backends == ["# backend py", "# backend c"]


def test_bench_rejects_bad_sizes(capsys):
    code, _, err = run(capsys, "bench", "--sizes", "128,64")
    assert code == 1
    assert "ascending" in err
    code, _, err = run(capsys, "bench", "--sizes", "abc")
    assert code == 1
