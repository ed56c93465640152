import csv
import math
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from privlasso.cli import main
from privlasso.data import load_libsvm
from privlasso.model_io import load_model

TOY = Path(__file__).parent / "data" / "toy100.svm"
FAST = ["--iterations", "100", "--nonprivate-iterations", "600"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def printed(out, key):
    for line in out.splitlines():
        k, _, v = line.partition(" ")
        if k == key:
            return v
    raise KeyError(key)


@pytest.fixture
def small_file(tmp_path, capsys):
    path = tmp_path / "d.svm"
    assert run(capsys, "gen-data", "--out", path, "--n", 100, "--p", 10, "--seed", 5)[0] == 0
    return path


def test_gen_data_lines_sidecar_and_determinism(tmp_path, capsys, small_file):
    assert len(small_file.read_text().splitlines()) == 100
    assert Path(str(small_file) + ".support").read_text().split() == [str(i) for i in range(8)]
    again = tmp_path / "e.svm"
    run(capsys, "gen-data", "--out", again, "--n", 100, "--p", 10, "--seed", 5)
    assert again.read_bytes() == small_file.read_bytes()
    other = tmp_path / "f.svm"
    run(capsys, "gen-data", "--out", other, "--n", 100, "--p", 10, "--seed", 6)
    assert other.read_bytes() != small_file.read_bytes()


def test_gen_data_defaults_shape(tmp_path, capsys):
    path = tmp_path / "full.svm"
    run(capsys, "gen-data", "--out", path)
    data = load_libsvm(path)
    assert (data.n, data.p) == (10_000, 100)


def test_gen_data_unwritable_path(tmp_path, capsys):
    code, _, err = run(capsys, "gen-data", "--out", tmp_path / "missing" / "d.svm", "--n", 10, "--p", 10)
    assert code == 2 and "error" in err


def test_train_nonprivate_one_iteration(tmp_path, capsys, small_file):
    model = tmp_path / "m.txt"
    code, out, _ = run(capsys, "train", "--data", small_file, "--out", model,
                       "--algorithm", "nonprivate", "--iterations", 1)
    assert code == 0
    assert printed(out, "nonzeros") == "0"
    assert float(printed(out, "train_loss")) == pytest.approx(math.log(2))
    assert not load_model(model).weights.any()


def test_train_header_records_total_epsilon(tmp_path, capsys, small_file):
    model = tmp_path / "m.txt"
    code, out, _ = run(capsys, "train", "--data", small_file, "--out", model, "--lambda", 5,
                       "--epsilon1", 0.1, "--epsilon2", 0.7, *FAST)
    assert code == 0
    meta = load_model(model).meta
    assert meta["epsilon_total"] == pytest.approx(0.8)
    assert (meta["epsilon1"], meta["epsilon2"]) == (0.1, 0.7)
    assert meta["delta"] == pytest.approx(1 / 100)
    assert meta["algorithm"] == "sparsifier" and meta["lambda"] == 5.0
    assert 0 <= int(printed(out, "nonzeros")) <= 10


@pytest.mark.parametrize("algorithm", ["nonprivate", "private-lasso", "sparsifier"])
def test_evaluate_reproduces_train_loss(tmp_path, capsys, algorithm):
    model = tmp_path / "m.txt"
    _, out, _ = run(capsys, "train", "--data", TOY, "--out", model, "--algorithm", algorithm,
                    "--lambda", 3, *FAST)
    code, ev, _ = run(capsys, "evaluate", "--model", model, "--data", TOY)
    assert code == 0
    assert abs(float(printed(ev, "loss")) - float(printed(out, "train_loss"))) <= 1e-9
    assert printed(ev, "nonzeros") == printed(out, "nonzeros")
    assert float(printed(ev, "accuracy")) + float(printed(ev, "error")) == pytest.approx(1.0)


def test_evaluate_true_weight_is_perfect(tmp_path, capsys, small_file):
    w = np.array([10, 9, 8, 7, 6, 5, 4, 0.5, 0, 0])
    model = tmp_path / "star.txt"
    model.write_text("# algorithm truth\n# p 10\n" + "".join(f"{j} {float(w[j])!r}\n" for j in range(8)))
    code, out, _ = run(capsys, "evaluate", "--model", model, "--data", small_file,
                       "--support", str(small_file) + ".support", "--out", tmp_path / "ev.csv")
    assert code == 0
    assert float(printed(out, "error")) == 0.0 and float(printed(out, "f1")) == 1.0
    rows = list(csv.DictReader(open(tmp_path / "ev.csv")))
    assert rows[0]["f1"] == "1.0"


def test_evaluate_zero_model_on_balanced_data(tmp_path, capsys, small_file):
    model = tmp_path / "zero.txt"
    model.write_text("# p 10\n")
    _, out, _ = run(capsys, "evaluate", "--model", model, "--data", small_file)
    # 100 labels with P(y=1) = 1/2: four binomial standard deviations
    assert abs(float(printed(out, "accuracy")) - 0.5) <= 0.2


def test_evaluate_dimension_mismatch(tmp_path, capsys, small_file):
    model = tmp_path / "m.txt"
    model.write_text("# p 3\n0 1.0\n")
    code, _, err = run(capsys, "evaluate", "--model", model, "--data", small_file)
    assert code == 1 and "features" in err


def test_usage_and_io_errors(tmp_path, capsys, small_file):
    with pytest.raises(SystemExit) as info:
        main(["train", "--data", str(small_file)])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["train", "--data", str(small_file), "--out", str(tmp_path / "m"),
              "--epsilon", "1", "--epsilon1", "0.1", "--epsilon2", "0.5"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["experiment", "--out", "x.csv", "--split", "0.5,0.5"])
    assert info.value.code == 2
    code, _, _ = run(capsys, "train", "--data", tmp_path / "nope.svm", "--out", tmp_path / "m")
    assert code == 2
    bad = tmp_path / "bad.svm"
    bad.write_text("+1 2:1 1:1\n")
    code, _, err = run(capsys, "train", "--data", bad, "--out", tmp_path / "m")
    assert code == 2 and "line 1" in err
    code, _, _ = run(capsys, "train", "--data", small_file, "--out", tmp_path / "m", "--lambda", -1)
    assert code == 1


def test_toy_file_experiment_end_to_end(tmp_path, capsys):
    out = tmp_path / "trials.csv"
    code, text, _ = run(capsys, "experiment", "--data", TOY, "--out", out, "--trials", 2,
                        "--lambda", 1, "--lambda", 5, *FAST)
    assert code == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 4
    assert sum(int(r["selected"]) for r in rows) == 2
    for r in rows:
        assert 0 <= float(r["val_error"]) <= 1 and int(r["nonzeros"]) <= 12
        assert r["correct_zeros"] == ""  # no sidecar given
    agg = list(csv.DictReader(open(tmp_path / "trials_aggregate.csv")))
    assert len(agg) == 1 and agg[0]["trials"] == "2"
    assert 0 <= float(agg[0]["test_error_mean"]) <= 1


def test_experiment_cli_determinism(tmp_path, capsys):
    args = ["experiment", "--n", 400, "--p", 12, "--trials", 1, "--seed", 9, "--lambda", 2, *FAST]
    run(capsys, *args, "--out", tmp_path / "a.csv")
    run(capsys, *args, "--out", tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a_aggregate.csv").read_bytes() == (tmp_path / "b_aggregate.csv").read_bytes()


def test_multinomial_cli_round_trip(tmp_path, capsys):
    data = tmp_path / "mc.svm"
    run(capsys, "gen-data", "--out", data, "--n", 300, "--p", 12, "--classes", 3)
    model = tmp_path / "m.txt"
    _, out, _ = run(capsys, "train", "--data", data, "--out", model, "--algorithm", "multinomial",
                    "--classes", 3, "--lambda", 2, *FAST)
    assert load_model(model).weights.shape == (3, 12)
    _, ev, _ = run(capsys, "evaluate", "--model", model, "--data", data)
    assert abs(float(printed(ev, "loss")) - float(printed(out, "train_loss"))) <= 1e-9
    assert printed(ev, "auc") == "NA"


def test_console_script_installed(tmp_path):
    exe = shutil.which("privlasso")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run([exe, "gen-data", "--out", str(tmp_path / "d.svm"), "--n", "20", "--p", "8"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    proc = subprocess.run([exe, "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_normalize_rows_replayed_by_evaluate(tmp_path, capsys):
    model = tmp_path / "m.txt"
    _, out, _ = run(capsys, "train", "--data", TOY, "--out", model, "--algorithm", "private-lasso",
                    "--normalize-rows", "--lambda", 2, *FAST)
    assert load_model(model).meta["normalize_rows"] == 1
    _, ev, _ = run(capsys, "evaluate", "--model", model, "--data", TOY)
    assert abs(float(printed(ev, "loss")) - float(printed(out, "train_loss"))) <= 1e-9


def test_subsample_flags(tmp_path, capsys):
    model = tmp_path / "m.txt"
    code, _, _ = run(capsys, "train", "--data", TOY, "--out", model, "--subsample", 40, "--positives", 25,
                     "--algorithm", "private-lasso", "--delta", 0.01, *FAST)
    assert code == 0 and load_model(model).meta["delta"] == 0.01
    with pytest.raises(SystemExit):
        main(["train", "--data", str(TOY), "--out", str(model), "--subsample", "40"])
