import csv
import io
import json
import subprocess
import sys

import pytest

from fourier_l1.cli import UsageError, main, parse
from fourier_l1.grid import save_grid
from fourier_l1.families import FamilySpec, build

RANDOM = "random:17,7,7"


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            meta[key] = value
        else:
            body.append(line)
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    return meta, rows


def test_parse_valid_identities():
    args = parse("identities --family geometric:0.7,0.3 --m 4 --n 4 --lambda 2".split())
    assert (args.command, args.m, args.n, args.lam) == ("identities", 4, 4, 2.0)
    assert args.family == "geometric:0.7,0.3"


def test_parse_rejections(tmp_path):
    with pytest.raises(UsageError):
        parse(["converge", "--family", "finite.json", "--grid-file", "g.txt", "--m", "4", "--n", "4"])
    with pytest.raises(UsageError, match="lambda"):
        parse("converge --family geometric:0.5 --lambda 1.0 --m 4 --n 4".split())
    with pytest.raises(UsageError):
        parse("identities --family geometric:0.5 --m four --n 4".split())
    with pytest.raises(UsageError):
        parse("identities --family geometric:0.5 --m 4 --n 4 --bogus".split())
    with pytest.raises(UsageError):
        parse("identities --family geometric:0.5 --m 4".split())
    with pytest.raises(UsageError):
        parse("converge --family geometric:0.5 --m 4 --mn-list 4,8".split())
    with pytest.raises(UsageError):
        parse("ek-norms --max-k 1".split())


def test_conflicting_sources_exit_one(capsys):
    code, _, err = run(["converge", "--family", "finite.json", "--grid-file", "g.txt"], capsys)
    assert code == 1 and "not allowed with" in err


def test_lambda_must_exceed_one(capsys):
    code, _, err = run("converge --family geometric:0.5 --lambda 1.0 --m 4 --n 4".split(), capsys)
    assert code == 1 and "lambda must exceed 1" in err


def test_degenerate_window_exit_one(capsys):
    code, out, err = run("decompose --family geometric:0.5 --lambda 1.05 --m 4 --n 4".split(), capsys)
    assert code == 1 and out == ""
    assert "DegenerateWindow" in err and "floor(1.05 * 4) = 4" in err


def test_identities_on_zero_grid(capsys):
    code, out, _ = run("identities --family zero --m 3 --n 3".split(), capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "identities"
    assert [row["lemma"] for row in doc["rows"]] == ["S-sigma", "V-S", "edge", "corner", "decomposition"]
    assert all(row["maxAbsResidual"] == 0 for row in doc["rows"])


def test_identities_check_passes_on_random_grid(capsys):
    code, out, _ = run(f"identities --family {RANDOM} --m 4 --n 5 --lambda 1.5 --check --tol 1e-9".split(), capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["metadata"]["check"] == "pass"
    assert all(row["relativeResidual"] <= 1e-9 for row in doc["rows"])


def test_failed_gate_exits_two(capsys):
    code, out, err = run(f"identities --family {RANDOM} --m 4 --n 4 --check --tol 1e-300".split(), capsys)
    assert code == 2
    assert json.loads(out)["metadata"]["check"] == "fail"
    assert "check failed" in err


def test_grid_file_source(tmp_path, capsys):
    path = tmp_path / "grid.txt"
    path.write_text(save_grid(build(FamilySpec.random_sparse(3, 4, 4), 4, 4)))
    code, out, _ = run(["identities", "--grid-file", str(path), "--m", "2", "--n", "2", "--check"], capsys)
    assert code == 0
    assert json.loads(out)["metadata"]["source"] == str(path)
    bad = tmp_path / "bad.txt"
    bad.write_text("0 0 1 0\n0 0 2 0\n")
    code, _, err = run(["identities", "--grid-file", str(bad), "--m", "2", "--n", "2"], capsys)
    assert code == 1 and "line 2" in err
    code, _, err = run(["identities", "--grid-file", str(tmp_path / "missing.txt"), "--m", "2", "--n", "2"], capsys)
    assert code == 1


@pytest.mark.parametrize("argv", [
    f"identities --family {RANDOM} --m 3 --n 4",
    "conditions --family geometric:0.6 --n-range 4,8,16",
    "ek-norms --max-k 32",
    "converge --family geometric:0.5,0.4 --mn-list 4,6 --lambda 2",
    "decompose --family geometric:0.5 --mn-list 4,8",
])
def test_json_and_csv_agree_and_are_deterministic(argv, capsys):
    _, js1, _ = run(argv.split() + ["--format", "json"], capsys)
    _, js2, _ = run(argv.split() + ["--format", "json"], capsys)
    _, cs1, _ = run(argv.split() + ["--format", "csv"], capsys)
    _, cs2, _ = run(argv.split() + ["--format", "csv"], capsys)
    assert js1 == js2 and cs1 == cs2
    doc = json.loads(js1)
    meta, rows = parse_csv(cs1)
    assert len(rows) == len(doc["rows"])
    for jrow, crow in zip(doc["rows"], rows):
        assert list(jrow) == list(crow)
        for key, value in jrow.items():
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                assert float(crow[key]) == pytest.approx(value, rel=1e-15, abs=0)
            else:
                assert crow[key] == ("" if value is None else str(value))
    assert json.loads(meta["defaults"]) == doc["metadata"]["defaults"]


def test_defaults_in_metadata(capsys):
    _, out, _ = run("conditions --family geometric:0.6 --n-range 4,8,16".split(), capsys)
    doc = json.loads(out)
    assert doc["metadata"]["lambdas"] == [1.25, 1.5, 2.0]
    assert doc["metadata"]["defaults"]["quad_tol"] == 1e-7
    assert set(doc["metadata"]["verdicts"]) == {"C31", "C32", "C33", "C34", "DECAY"}


def test_conditions_check_gates(capsys):
    code, _, _ = run("conditions --family geometric:0.8 --n-range 4,8,16,32,64 --check".split(), capsys)
    assert code == 0
    code, _, _ = run("conditions --family zero --check".split(), capsys)
    assert code == 0


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = run(["ek-norms", "--max-k", "16", "--format", "csv", "--output", str(target)], capsys)
    assert code == 0 and out == ""
    meta, rows = parse_csv(target.read_text())
    assert [int(r["k"]) for r in rows] == list(range(1, 17))
    assert float(rows[0]["norm"]) == pytest.approx(8.0, abs=1e-6)


def test_module_entry_point():
    # between k = 4 and k = 8 the ratio still moves by about 24%, so the 5% gate fails
    proc = subprocess.run([sys.executable, "-m", "fourier_l1", "ek-norms", "--max-k", "8", "--check"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    doc = json.loads(proc.stdout)
    assert doc["command"] == "ek-norms" and doc["metadata"]["ratio_spread"] > 0.05
    proc = subprocess.run([sys.executable, "-m", "fourier_l1", "nonsense"], capture_output=True, text=True)
    assert proc.returncode == 1
