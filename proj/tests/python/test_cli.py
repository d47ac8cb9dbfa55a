import csv
import json


def synth(cli, path, lang, split, size, seed):
    cli("synth", "--lang", lang, "--split", split, "--size", size, "--seed", seed, "-o", path)
    return path


def test_train_uses_language_defaults(cli, tmp_path):
    train = synth(cli, tmp_path / "train.tsv", "tamil", "train", 200, 1)
    cli("train", "--lang", "tamil", "--model", "lr", "--train", train, "-o", tmp_path / "m")
    config = json.loads((tmp_path / "m" / "config.json").read_text())
    assert config["hyperparameters"]["lr"]["C"] == 0.4
    assert (tmp_path / "m" / "model.bin").exists()


def test_predict_then_evaluate(cli, tmp_path):
    train = synth(cli, tmp_path / "train.tsv", "kannada", "train", 300, 1)
    valid = synth(cli, tmp_path / "valid.tsv", "kannada", "valid", 80, 2)
    cli("train", "--lang", "kannada", "--model", "svm", "--train", train, "-o", tmp_path / "m")
    cli("predict", "-m", tmp_path / "m" / "model.json", "-i", valid, "-o", tmp_path / "p.tsv")
    with open(tmp_path / "p.tsv", newline="") as f:
        rows = list(csv.reader(f, delimiter="\t"))
    assert rows[0][:2] == ["id", "predicted_label"]
    assert len(rows) == 81
    out = cli("evaluate", "--gold", valid, "--pred", tmp_path / "p.tsv").stdout
    f1 = float(out.strip().splitlines()[-1].split(":")[1])
    assert 0.0 <= f1 <= 1.0


def test_evaluate_gold_against_itself(cli, tmp_path):
    gold = synth(cli, tmp_path / "g.tsv", "malayalam", "test", 50, 3)
    pred = tmp_path / "p.tsv"
    with open(gold) as f:
        rows = [line.rstrip("\n").split("\t") for line in f][1:]
    pred.write_text("id\tpredicted_label\n" + "".join(f"{r[0]}\t{r[-1]}\n" for r in rows))
    out = cli("evaluate", "--gold", gold, "--pred", pred, "--lang", "malayalam").stdout
    assert "weighted F1: 1.0000" in out


def test_empty_input_gives_header_only(cli, tmp_path):
    train = synth(cli, tmp_path / "train.tsv", "tamil", "train", 100, 1)
    cli("train", "--lang", "tamil", "--model", "dt", "--train", train, "-o", tmp_path / "m")
    empty = tmp_path / "empty.tsv"
    empty.write_text("text\tcategory\n")
    cli("predict", "-m", tmp_path / "m" / "model.json", "-i", empty, "-o", tmp_path / "p.tsv")
    assert (tmp_path / "p.tsv").read_text().splitlines() == ["id\tpredicted_label"]


def test_clean_keeps_ids_and_labels(cli, tmp_path):
    src = tmp_path / "in.tsv"
    src.write_text("id\ttext\tcategory\nx-1\tSuper movie!!! 😍 100%\tNot_offensive\n")
    out = cli("clean", "-i", src).stdout.splitlines()
    assert out[0] == "id\ttext\tcategory"
    assert out[1] == "x-1\tsuper movie\tNot_offensive"


def test_usage_errors_exit_2(cli):
    assert cli("train", "--bogus", check=False).returncode == 2
    assert cli("evaluate", check=False).returncode == 2


def test_data_errors_exit_1(cli, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("text\tcategory\nhello\tNot_a_label\n")
    proc = cli("train", "--lang", "tamil", "--model", "lr", "--train", bad, "-o", tmp_path / "m", check=False)
    assert proc.returncode == 1
    assert "error" in proc.stderr


def test_grid_summary(cli, tmp_path):
    cli("grid", "--lang", "synthetic", "--models", "lr,svm,dt", "--synth-train", 300,
        "--synth-valid", 60, "--synth-test", 60, "-o", tmp_path / "g")
    with open(tmp_path / "g" / "summary.tsv", newline="") as f:
        rows = list(csv.DictReader(f, delimiter="\t"))
    assert [r["model"] for r in rows] == ["lr", "svm", "dt"]
    for r in rows:
        assert 0.0 <= float(r["weighted_f1"]) <= 1.0
    best = (tmp_path / "g" / "best.txt").read_text().strip()
    assert best == max(rows, key=lambda r: float(r["weighted_f1"]))["model"]
    for name in ("lr", "svm", "dt"):
        assert (tmp_path / "g" / "predictions" / f"{name}.tsv").exists()
        assert (tmp_path / "g" / "metrics" / f"{name}.json").exists()
