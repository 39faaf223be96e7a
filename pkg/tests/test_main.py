import csv
import io
import json

import numpy as np
import pytest

from cqlab import main as cli
from cqlab.models import to_pairs


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def _run(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_quick_is_deterministic(capsys):
    code, first, _ = _run(capsys, ["verify", "--quick", "--seed", "0"])
    assert code == 0
    lines = first.strip().splitlines()
    assert lines[0].startswith("# cqlab verify seed=0")
    assert lines[-1].startswith("# ")
    _, second, _ = _run(capsys, ["verify", "--quick", "--seed", "0"])
    assert first == second


def test_trials_zero_is_input_error(capsys, fixture_dir):
    code, out, err = _run(capsys, ["packing", "--channel", str(fixture_dir / "distinguishable.json"),
                                   "--trials", "0"])
    assert code == 2
    assert out == ""
    assert err.startswith("error:")


def test_missing_channel_file(capsys, tmp_path):
    code, _, err = _run(capsys, ["entropy", "--channel", str(tmp_path / "nope.json")])
    assert code == 2
    assert "error:" in err


def test_corrupted_channel_names_letter(capsys, tmp_path):
    data = {"k": 2, "p": [0.5, 0.5],
            "outputs": [to_pairs(np.diag([1.0, 0.0])), to_pairs(np.diag([1.2, -0.2]))]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    code, _, err = _run(capsys, ["entropy", "--channel", str(path)])
    assert code == 2
    assert "letter 1" in err
    assert len(err.strip().splitlines()) == 1


def test_packing_csv(capsys, tmp_path, fixture_dir):
    argv = ["packing", "--channel", str(fixture_dir / "distinguishable.json"), "--n", "2", "3", "--delta", "0.5",
            "--mn", "2", "--gamma", "0.5", "--trials", "4", "--seed", "3"]
    code, out, _ = _run(capsys, argv + ["--workers", "1"])
    assert code == 0
    rows = _rows(out)
    assert rows[0] == ["n", "R_requested", "R_effective", "M_n", "gamma_n", "t", "p_e_mean", "p_e_stderr",
                       "bound_e16", "seed"]
    assert [r[0] for r in rows[1:]] == ["2", "3"]
    assert all(0.0 <= float(r[6]) <= 1.0 for r in rows[1:])

    target = tmp_path / "packing.csv"
    _run(capsys, argv + ["--workers", "4", "--out", str(target)])
    assert target.read_text(encoding="utf-8") == out


def test_covering_csv(capsys, fixture_dir):
    argv = ["covering", "--channel", str(fixture_dir / "zero_plus.json"), "--n", "4", "--delta", "0.5",
            "--ln", "2", "4", "--trials", "5", "--seed", "1"]
    code, out, _ = _run(capsys, argv)
    assert code == 0
    rows = _rows(out)
    assert rows[0][:9] == ["n", "L_n", "delta", "eps", "Delta_mean", "Delta_stderr", "threshold_obfus",
                           "eps_prime_n", "seed"]
    assert [r[1] for r in rows[1:]] == ["2", "4"]
    assert _run(capsys, argv)[1] == out


def test_private_csv(capsys, fixture_dir):
    argv = ["private", "--channel", str(fixture_dir / "wiretap.json"), "--n", "4", "--delta", "0.5",
            "--mn", "8", "--ln", "2", "--eps-target", "1.0", "--delta-target", "2.0", "--seed", "5"]
    code, out, _ = _run(capsys, argv)
    assert code == 0
    rows = _rows(out)
    assert rows[0][:8] == ["n", "J_n", "L_n", "p_e", "Delta_max", "verdict", "collisions", "seed"]
    assert rows[1][1:3] == ["4", "2"]
    assert rows[1][5] == "pass"
    _, rotated, _ = _run(capsys, [a if not a.endswith("wiretap.json") else str(fixture_dir / "wiretap_rotated.json")
                                  for a in argv])
    assert _rows(rotated)[1][1:3] == rows[1][1:3]
    assert float(_rows(rotated)[1][3]) == pytest.approx(float(rows[1][3]), abs=1e-8)


def test_private_needs_bipartite_channel(capsys, fixture_dir):
    code, _, err = _run(capsys, ["private", "--channel", str(fixture_dir / "distinguishable.json")])
    assert code == 2
    assert "bipartite" in err


def test_entropy_table(capsys, fixture_dir):
    code, out, _ = _run(capsys, ["entropy", "--channel", str(fixture_dir / "distinguishable.json")])
    assert code == 0
    rows = _rows(out)
    assert rows[0] == ["quantity", "alpha", "value"]
    assert rows[1][0] == "chi" and float(rows[1][2]) == pytest.approx(1.0)
    assert len(rows) == 2 + len(cli.ALPHA_GRID)


def test_empty_typical_set_exit(capsys, fixture_dir):
    code, _, err = _run(capsys, ["packing", "--channel", str(fixture_dir / "distinguishable.json"),
                                 "--n", "3", "--delta", "0.1", "--mn", "2", "--trials", "2"])
    assert code == 1
    assert "error:" in err


def test_private_row_per_covering_size(capsys, fixture_dir):
    def argv(*ln):
        return ["private", "--channel", str(fixture_dir / "wiretap.json"), "--n", "4", "--delta", "0.5",
                "--mn", "8", "--ln", *ln, "--eps-target", "1.0", "--delta-target", "2.0", "--seed", "5"]

    code, out, _ = _run(capsys, argv("2", "4"))
    assert code == 0
    rows = _rows(out)[1:]
    assert [r[1:3] for r in rows] == [["4", "2"], ["2", "4"]]
    assert _rows(_run(capsys, argv("2"))[1])[1:] == rows[:1]
