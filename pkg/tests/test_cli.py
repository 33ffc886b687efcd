import csv
import io
import json

import pytest

from rotortree.cli import fmt, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_three_particle_example(capsys):
    code, out, _ = run(capsys, "simulate", "--family", "bary:2", "--config", "const:1", "--n", "3")
    assert code == 0
    r = rows(out)
    assert r[0] == ["n", "e_n[exact]", "E_n[exact]"]
    assert [x[1] for x in r[1:]] == ["1", "0", "1"]
    assert out.endswith("\n") and "\r" not in out


def test_explode_matches_simulate(capsys):
    _, a, _ = run(capsys, "simulate", "--family", "brush:2", "--n", "40")
    _, b, _ = run(capsys, "explode", "--family", "brush:2", "--n", "40")
    assert [x[1] for x in rows(a)[1:]] == [x[1] for x in rows(b)[1:]]


def test_escape_prob_exact(capsys):
    code, out, _ = run(capsys, "escape-prob", "--family", "bary:2", "--depth", "10")
    assert code == 0
    r = rows(out)
    assert r[1][:2] == ["10", "512/1023"]
    assert r[2][:2] == ["limit", "1/2"]


def test_tree_file(capsys, tmp_path):
    from rotortree.generators import Bary, truncate
    from rotortree.rules import Constant
    from rotortree.tree import serialize_tree
    tree, cfg = truncate(Bary(2, Constant(1)), 4)
    f = tmp_path / "small.tree"
    f.write_text(serialize_tree(tree, cfg))
    code, out, _ = run(capsys, "simulate", "--tree", str(f), "--n", "3")
    assert code == 0 and [x[1] for x in rows(out)[1:]] == ["1", "0", "1"]


@pytest.mark.parametrize("argv", [
    ["simulate", "--n", "3"],
    ["simulate", "--family", "bary:2", "--tree", "x", "--n", "3"],
    ["simulate", "--family", "nonsense:2", "--n", "3"],
    ["simulate", "--family", "bary:2", "--n", "0"],
    ["simulate", "--family", "bary:2", "--n", "3", "--depth-schedule", "8,4"],
    ["phase-scan", "--laws", "uniform:1"],
    ["verify", "--only", "99"],
    ["nosuch"],
])
def test_usage_errors_exit_two(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    capsys.readouterr()


def test_budget_exit_one(capsys):
    code, out, err = run(capsys, "simulate", "--family", "bary:2", "--n", "200", "--depth", "30",
                         "--budget", "50")
    assert code == 1 and "budget" in err and out == ""


def test_strict_flags_unconverged(capsys):
    argv = ["simulate", "--family", "bary:2", "--n", "50", "--depth-schedule", "4,5"]
    code, _, _ = run(capsys, *argv)
    assert code == 0
    code, _, _ = run(capsys, "--strict", *argv)
    assert code == 1


def test_deterministic_output(capsys):
    argv = ["--format", "json", "phase-scan", "--laws", "uniform:0,1", "--n", "30", "--seeds", "2",
            "--depth-schedule", "8,12,16,20"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    _, c, _ = run(capsys, "--seed", "7", *argv)
    assert json.loads(c)["manifest"]["seed"] == 7


def test_json_shape(capsys):
    code, out, _ = run(capsys, "--format", "json", "--seed", "99", "escape-prob", "--family", "bary:3")
    doc = json.loads(out)
    m = doc["manifest"]
    assert m["subcommand"] == "escape-prob" and m["seed"] == 99
    assert "version" in m and m["outputs"] == []
    assert doc["data"]["columns"] == ["depth", "escape_prob[exact]", "escape_prob[float]"]
    assert doc["data"]["rows"][0][1] == "2/3"


def test_global_flag_after_subcommand(capsys):
    _, out, _ = run(capsys, "escape-prob", "--family", "bary:2", "--seed", "5", "--format", "json")
    assert json.loads(out)["manifest"]["seed"] == 5


def test_output_file_and_sidecar(capsys, tmp_path):
    out = tmp_path / "e.csv"
    code, stdout, _ = run(capsys, "--output", str(out), "explode", "--family", "bary:2", "--n", "16")
    assert code == 0 and stdout == ""
    assert "".join(r[1] for r in rows(out.read_text())[1:]) == "1101100110110001"
    side = json.loads((tmp_path / "e.csv.manifest.json").read_text())
    assert side["manifest"]["outputs"] == [str(out)]
    assert side["manifest"]["parameters"]["n"] == 16


def test_exact_regular_and_discrepancy(capsys):
    code, out, _ = run(capsys, "exact-regular", "--b", "2", "--h", "2", "--configs", "5")
    assert code == 0 and len(rows(out)) == 3
    code, out, _ = run(capsys, "discrepancy", "--regular", "2,0", "--n-max", "300")
    assert code == 0
    code, out, _ = run(capsys, "discrepancy", "--f", "one", "--n-max", "300")
    assert code == 0


def test_depth_command(capsys):
    code, out, _ = run(capsys, "depth", "--law", "uniform:1,2", "--n-max", "4")
    assert code == 0 and len(rows(out)) == 5


def test_verify_single(capsys):
    code, out, err = run(capsys, "verify", "--only", "1")
    assert code == 0
    assert err.split()[:2] == ["[PASS]", "1"]
    assert rows(out)[1][2] == "true"


def test_fmt():
    from fractions import Fraction
    assert fmt(True) == "true" and fmt(Fraction(2, 4)) == "1/2" and fmt(0.1) == "0.1" and fmt(None) == ""
