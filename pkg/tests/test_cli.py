import json
import subprocess
import sys

import pytest

from rtmot.cli import main
from rtmot.synthetic import crossing_paths


@pytest.fixture
def seq_path(tmp_path):
    return crossing_paths(n_pairs=2, n_frames=60, seed=3).write(str(tmp_path / "seq"))


def test_track_happy_path(seq_path, tmp_path):
    out = tmp_path / "res.txt"
    assert main(["track", "--seq", seq_path, "--out", str(out), "--predictor", "kalman", "--cost", "iou"]) == 0
    rows = out.read_text().splitlines()
    assert rows and all(r.endswith(",1,-1,-1,-1") and len(r.split(",")) == 10 for r in rows)


def test_eval_identical_files(seq_path, capsys):
    gt = str(seq_path).replace("seq.ini", "gt.txt")
    assert main(["eval", "--gt", gt, "--res", gt]) == 0
    header, row = capsys.readouterr().out.splitlines()
    assert header.split(",")[-2] == "MOTA"
    assert row.split(",")[-2] == "100.0" and row.split(",")[-1] == "100.0"


def test_eval_with_interval(seq_path, tmp_path, capsys):
    gt = str(seq_path).replace("seq.ini", "gt.txt")
    assert main(["eval", "--gt", gt, "--res", gt, "--seq", seq_path, "--interval", "10"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert row[0] == "10" and row[-2] == "100.0"


def test_unknown_flag(capsys):
    assert main(["track", "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err


def test_missing_subcommand(capsys):
    assert main([]) == 1


def test_invalid_option_value(seq_path, tmp_path):
    assert main(["track", "--seq", seq_path, "--out", str(tmp_path / "r"), "--min-hits", "0"]) == 1
    assert main(["track", "--seq", seq_path, "--out", str(tmp_path / "r"), "--predictor", "magic"]) == 1


def test_data_error(tmp_path, capsys):
    bad = tmp_path / "gt.txt"
    bad.write_text("1,1,0,0,10,10,1\n2,1,x,0,10,10,1\n")
    assert main(["eval", "--gt", str(bad), "--res", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "gt.txt:2:" in err


def test_missing_file(tmp_path):
    assert main(["eval", "--gt", str(tmp_path / "nope"), "--res", str(tmp_path / "nope")]) == 2


def test_track_without_seq(seq_path, tmp_path):
    det = str(seq_path).replace("seq.ini", "det.txt")
    out = tmp_path / "r.txt"
    assert main(["track", "--det", det, "--out", str(out)]) == 0
    assert out.read_text()


@pytest.mark.parametrize("predictor", ["kalman", "stationary", "particle"])
def test_byte_identical_reruns(seq_path, tmp_path, predictor):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.txt"
        assert main(["track", "--seq", seq_path, "--out", str(out), "--predictor", predictor,
                     "--cost", "exp", "--seed", "5"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_simulate(seq_path, tmp_path, capsys):
    out = tmp_path / "r.txt"
    assert main(["simulate", "--seq", seq_path, "--use-gt", "--fixed-cost", "0.25", "--out", str(out)]) == 0
    captured = capsys.readouterr()
    assert "mean_interval=8" in captured.err
    assert captured.out.splitlines()[1].startswith("8,")


def test_sweep(seq_path, tmp_path, capsys):
    conf = tmp_path / "sweep.json"
    conf.write_text(json.dumps({"intervals": [1, 3], "sequences": [seq_path],
                                "configurations": [{"detections": "gt", "predictor": "kalman", "cost": "iou"},
                                                   {"detections": "det", "predictor": "stationary",
                                                    "cost": "linear"}]}))
    outs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        assert main(["sweep", "--config", str(conf), "--out", str(out)]) == 0
        outs.append(sorted((p.name, p.read_bytes()) for p in out.iterdir()))
    assert outs[0] == outs[1]
    assert [n for n, _ in outs[0]] == ["det_stationary_linear.csv", "gt_kalman_iou.csv", "manifest.jsonl"]
    assert len(capsys.readouterr().out.splitlines()) == 4 * 2


def test_module_entry_point(seq_path, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rtmot", "eval", "--gt", "x", "--res"],
                          capture_output=True, text=True)
    assert proc.returncode == 1 and proc.stdout == ""
