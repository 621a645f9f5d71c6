import json
import subprocess
import sys

import pytest

from objreplica.cli import EXIT_IO, EXIT_MALFORMED, EXIT_USAGE, main
from objreplica.workload import EXAMPLE1_ALLOC_PATH


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def ex1(tmp_path):
    p = tmp_path / "ex1.jsonl"
    assert main(["gen", "--scenario", "example1", "--out", str(p)]) == 0
    return p


def test_detect_example1(ex1, capsys):
    code, out, err = run(capsys, "detect", "--in", str(ex1), "--period", "1", "--watchpoints", "4")
    assert code == 0 and err == ""
    ctx = json.loads(out)["contexts"]
    (c,) = [c for c in ctx if tuple(c["alloc_path"]) == EXAMPLE1_ALLOC_PATH]
    assert (c["equivalent"], c["different"]) == (1, 1)


def test_detect_deterministic(ex1, capsys):
    a = run(capsys, "detect", "--in", str(ex1), "--period", "2", "--seed", "5")[1]
    b = run(capsys, "detect", "--in", str(ex1), "--period", "2", "--seed", "5")[1]
    assert a == b


@pytest.mark.parametrize("argv", [
    ["detect", "--in", "x", "--period", "0"],
    ["detect", "--in", "x", "--jitter", "1.5"],
    ["detect", "--in", "x", "--watchpoints", "0"],
    ["report", "--in", "x", "--format", "xml"],
    ["bounds", "--theta", "0.5", "--x", "1"],
    ["bounds", "--theta", "0.5", "--alpha", "1.0", "--x", "10"],
    ["gen", "--groups", "10,10", "--objects", "30"],
    ["frobnicate"],
    [],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == EXIT_USAGE


def test_io_error(tmp_path, capsys):
    code, out, err = run(capsys, "detect", "--in", str(tmp_path / "missing.jsonl"))
    assert code == EXIT_IO and out == "" and err


def test_malformed_trace_and_skip_budget(tmp_path, capsys):
    p = tmp_path / "bad.jsonl"
    p.write_text('{"k":"frame","id":1,"m":"main"}\n{"k":"alloc","size":-1}\n')
    assert run(capsys, "detect", "--in", str(p))[0] == EXIT_MALFORMED
    assert run(capsys, "detect", "--in", str(p), "--skip-budget", "1")[0] == 0


def test_malformed_profile(tmp_path, capsys):
    p = tmp_path / "p.json"
    p.write_text("{not json")
    assert run(capsys, "report", "--in", str(p))[0] == EXIT_MALFORMED


def test_report_empty_notice(tmp_path, capsys):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"version": "v1", "meta": {}, "frames": [], "contexts": []}))
    code, out, err = run(capsys, "report", "--in", str(p), "--format", "json")
    assert code == 0
    assert out == '{"version":"v1","contexts":[]}\n'
    assert "empty" in err


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--theta", "0.703", "--alpha", "0.1", "--x", "1000")
    assert code == 0
    vals = dict(line.split() for line in out.splitlines())
    assert vals == {"omega": "0.603", "gamma": "0.819036", "A": "0.67"}
    code, out, err = run(capsys, "bounds", "--theta", "1", "--x", "2", "--debug")
    assert "gamma 1\n" in out and "capped" in err and "B 0" in out


def test_merge_subcommand(tmp_path, capsys):
    paths = []
    for tid in (1, 2):
        p = tmp_path / f"t{tid}.jsonl"
        main(["gen", "--contexts", "1", "--objects", "20", "--groups", "15,5", "--seed", str(tid),
              "--out", str(p)])
        q = tmp_path / f"p{tid}.json"
        main(["detect", "--in", str(p), "--period", "1", "--out", str(q)])
        paths.append(str(q))
    code, out, _ = run(capsys, "merge", *paths)
    assert code == 0
    single = [json.loads(open(p).read())["contexts"][0]["equivalent"] for p in paths]
    assert json.loads(out)["contexts"][0]["equivalent"] == sum(single)


def test_merge_conflict(tmp_path, capsys):
    p = tmp_path / "t.jsonl"
    main(["gen", "--contexts", "1", "--objects", "10", "--out", str(p)])
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["detect", "--in", str(p), "--period", "1", "--out", str(a)])
    main(["detect", "--in", str(p), "--period", "2", "--out", str(b)])
    assert run(capsys, "merge", str(a), str(b))[0] == EXIT_USAGE


def test_e2e(tmp_path, capsys):
    code, out, _ = run(capsys, "e2e", "--contexts", "2", "--objects", "100", "--groups", "60,40",
                       "--period", "3", "--out-dir", str(tmp_path / "run"))
    assert code == 0
    rows = json.loads(out)["contexts"]
    assert all(r["abs_error"] <= 0.05 for r in rows)
    names = sorted(p.name for p in (tmp_path / "run").iterdir())
    assert names == ["oracle.json", "profile.json", "report.folded", "report.json",
                     "summary.json", "trace.jsonl"]


def test_random_seed_is_reported(capsys):
    code, out, err = run(capsys, "gen", "--contexts", "1", "--objects", "2", "--seed", "random")
    assert code == 0 and err.startswith("seed: ")


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "objreplica", "bounds", "--theta", "0.8", "--x", "100"],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert "gamma 0.899492" in r.stdout
