import hashlib
import json
import os
from pathlib import Path

import pytest

from quishing import cli, dataset, models, synthetic


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    recs = synthetic.generate_records(300, seed=21)
    synthetic.write_csv(recs, root / "urls.csv")
    with open(root / "urls.csv", "a") as fh:
        fh.write("http://long.example/" + "a" * 420 + ",1\n")
    return root


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_dataset_command(corpus):
    out = corpus / "set.qset"
    code = cli.main(["dataset", "--input", str(corpus / "urls.csv"), "--output", str(out),
                     "--images", str(corpus / "img"), "--images-limit", "2"])
    assert code == 0
    s = dataset.load_sample_set(out)
    assert len(s) == 300
    manifest = json.loads((corpus / "set.qset.manifest.json").read_text())
    assert manifest["counts"] == {"read": 301, "kept": 300, "rejected": 1,
                                  "legitimate": int((s.labels == 0).sum()),
                                  "phishing": int((s.labels == 1).sum())}
    assert manifest["error"] is None
    for path, digest in {**manifest["inputs"], **manifest["artifacts"]}.items():
        assert _sha(Path(path)) == digest
    assert len(list((corpus / "img").glob("*.pgm"))) == 2
    rejected = (corpus / "set.qset.rejected.csv").read_text().splitlines()
    assert rejected[0] == "length,url" and rejected[1].startswith("440,")


def test_dataset_is_byte_identical(corpus):
    out2 = corpus / "again.qset"
    assert cli.main(["dataset", "--input", str(corpus / "urls.csv"), "--output", str(out2)]) == 0
    assert out2.read_bytes() == (corpus / "set.qset").read_bytes()


def test_missing_input_exit_2_no_outputs(tmp_path, capsys):
    code = cli.main(["dataset", "--input", str(tmp_path / "nope.csv"), "--output", str(tmp_path / "o.qset")])
    assert code == 2
    assert "does not exist" in capsys.readouterr().err
    assert os.listdir(tmp_path) == []


def test_missing_required_flag(tmp_path):
    assert cli.main(["experiment1", "--out", str(tmp_path / "x")]) == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["bogus"])
    assert info.value.code == 2


def test_malformed_csv_exit_2(tmp_path):
    (tmp_path / "bad.csv").write_text("url,label\nhttp://a.com\n")
    code = cli.main(["dataset", "--input", str(tmp_path / "bad.csv"), "--output", str(tmp_path / "o.qset")])
    assert code == 2
    manifest = json.loads((tmp_path / "o.qset.manifest.json").read_text())
    assert "MalformedRow" in manifest["error"]


@pytest.fixture(scope="module")
def exp1(corpus):
    out = corpus / "e1"
    cfg = corpus / "cfg.json"
    cfg.write_text(json.dumps({"seed": 4, "threads": 2}))
    code = cli.main(["experiment1", "--config", str(cfg), "--set", str(corpus / "set.qset"),
                     "--out", str(out)])
    return code, out


def test_experiment1_outputs(exp1):
    code, out = exp1
    assert code == 0
    lines = (out / "metrics.csv").read_text().splitlines()
    assert lines[0] == "model,accuracy,precision,recall,f1,auc"
    assert [l.split(",")[0] for l in lines[1:]] == list(models.FAMILIES)
    for fam in models.FAMILIES:
        assert (out / "models" / f"{fam}.npz").exists()
    split = json.loads((out / "models" / "split.json").read_text())
    assert len(split["train"]) + len(split["test"]) == 300
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 4 and manifest["config"]["threads"] == 2
    assert set(manifest["seeds"]) >= {"root", "split", "model.gbt_cfg1"}
    for path, digest in manifest["artifacts"].items():
        assert _sha(Path(path)) == digest


def test_flag_overrides_config(corpus, exp1, tmp_path):
    cfg = corpus / "cfg.json"
    args = cli.resolve_args(["experiment1", "--config", str(cfg), "--seed", "9",
                             "--set", "s", "--out", "o"])
    assert args.seed == 9 and args.threads == 2 and args.split == 0.8


def test_experiment1_rerun_identical(corpus, exp1):
    _, out = exp1
    out2 = corpus / "e1b"
    assert cli.main(["experiment1", "--seed", "4", "--threads", "1", "--set", str(corpus / "set.qset"),
                     "--out", str(out2)]) == 0
    assert (out2 / "metrics.csv").read_bytes() == (out / "metrics.csv").read_bytes()


def test_experiment1_degenerate_split(tmp_path):
    recs = [dataset.UrlRecord(b"http://a.example", 0), dataset.UrlRecord(b"http://b.example", 1)]
    dataset.save_sample_set(dataset.build_feature_matrix(recs), tmp_path / "tiny.qset")
    code = cli.main(["experiment1", "--set", str(tmp_path / "tiny.qset"), "--split", "0.999",
                     "--out", str(tmp_path / "o")])
    assert code == 2
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert "DegenerateSplit" in manifest["error"]


def test_experiment1_search(corpus, tmp_path):
    space = tmp_path / "space.json"
    space.write_text(json.dumps({"dtree": {"max_depth": [1, 2]}}))
    out = tmp_path / "e"
    code = cli.main(["experiment1", "--set", str(corpus / "set.qset"), "--out", str(out),
                     "--search", str(space), "--search-iter", "2", "--folds", "3"])
    assert code == 0
    log = json.loads((out / "search.json").read_text())
    assert log["dtree"]["best"]["max_depth"] in (1, 2) and len(log["dtree"]["history"]) == 2


def test_experiment23_outputs(corpus, exp1):
    _, e1 = exp1
    out = corpus / "e23"
    assert cli.main(["experiment23", "--models", str(e1 / "models"), "--set", str(corpus / "set.qset"),
                     "--out", str(out)]) == 0
    lines = (out / "comparison.csv").read_text().splitlines()
    assert lines[0] == "model,auc_fs_gbt_cfg2,auc_fs_gbt_cfg1,auc_fs_rforest,auc_no_fs"
    assert len(lines) == 7 and all(len(l.split(",")) == 5 for l in lines[1:])
    for fam in ("gbt_cfg2", "gbt_cfg1", "rforest"):
        for kind in ("heatmap", "included", "excluded"):
            raw = (out / f"{kind}_{fam}.pgm").read_bytes()
            assert raw.startswith(b"P5\n69 69\n255\n") and len(raw) == 13 + 4761
        assert len((out / f"importance_{fam}.csv").read_text().splitlines()) == 4762
    assert (out / "importance_histogram.csv").exists()
    # the no-selection column equals the experiment1 AUCs
    e1_auc = {l.split(",")[0]: l.split(",")[5] for l in (e1 / "metrics.csv").read_text().splitlines()[1:]}
    for l in lines[1:]:
        cells = l.split(",")
        assert cells[4] == e1_auc[cells[0]]


def test_experiment23_missing_model(corpus, exp1, tmp_path, capsys):
    _, e1 = exp1
    partial = tmp_path / "models"
    partial.mkdir()
    for p in (e1 / "models").iterdir():
        if p.name != "rforest.npz":
            (partial / p.name).write_bytes(p.read_bytes())
    code = cli.main(["experiment23", "--models", str(partial), "--set", str(corpus / "set.qset"),
                     "--out", str(tmp_path / "o")])
    assert code == 2
    assert "rforest" in capsys.readouterr().err
