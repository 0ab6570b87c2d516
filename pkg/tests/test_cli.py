import csv
import io
import json

import numpy as np
import pytest

from jmdm import LabeledDataset, write_csv
from jmdm.cli import main


@pytest.fixture
def data_csv(tmp_path):
    r = np.random.default_rng(5)
    y = np.arange(60) % 3
    X = r.normal(size=(60, 10))
    X[:, :4] += y[:, None]
    X[:, 9] = X[:, 2]  # duplicate column
    p = tmp_path / "toy.csv"
    write_csv(LabeledDataset.from_arrays(X, np.array(["a", "b", "c"])[y]), p, label_name="class")
    return p


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSelect:
    def test_jmdm_fraction(self, data_csv, capsys):
        code, out, err = run(["select", "--data", data_csv, "--label-col", "class", "--fraction", "1/4", "--seed", 7], capsys)
        assert code == 0 and err == ""
        doc = json.loads(out)
        assert doc["method"] == "jmdm" and doc["k_star"] == 3 == len(doc["selected"])
        assert doc["config"]["seed"] == 7 and doc["config"]["fraction"] == "1/4"
        assert doc["config"]["kernel"] == {"alpha": 1.0, "dim": 3, "epsilon_factor": 1.0}

    @pytest.mark.parametrize("method", ["random", "fisher", "jmdm"])
    def test_repeatable(self, data_csv, capsys, method):
        argv = ["select", "--data", data_csv, "--method", method, "--k", 5, "--seed", 7]
        first = run(argv, capsys)[1]
        assert run(argv, capsys)[1] == first
        assert len(json.loads(first)["selected"]) == 5

    def test_seed_from_environment(self, data_csv, capsys, monkeypatch):
        argv = ["select", "--data", data_csv, "--method", "random", "--k", 4]
        monkeypatch.setenv("JMDM_SEED", "13")
        from_env = json.loads(run(argv, capsys)[1])
        assert from_env["seed"] == 13
        assert json.loads(run(argv + ["--seed", 13], capsys)[1]) == from_env
        monkeypatch.delenv("JMDM_SEED")
        assert json.loads(run(argv, capsys)[1])["seed"] == 0

    def test_out_file(self, data_csv, capsys, tmp_path):
        target = tmp_path / "sel.json"
        code, out, _ = run(["select", "--data", data_csv, "--k", 2, "--out", target], capsys)
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["k_star"] == 2

    @pytest.mark.parametrize(
        "extra",
        [["--k", 0], ["--k", 2, "--fraction", "1/2"], [], ["--k", 2, "--method", "relief"], ["--fraction", "2"], ["--k", 2, "--q", 1.5], ["--k", 2, "--bogus"]],
    )
    def test_usage_errors(self, data_csv, capsys, extra):
        with pytest.raises(SystemExit) as exc:
            main([str(a) for a in ["select", "--data", data_csv, *extra]])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_k_larger_than_m(self, data_csv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["select", "--data", str(data_csv), "--k", "11"])
        assert exc.value.code == 2

    def test_bad_env_seed(self, data_csv, monkeypatch):
        monkeypatch.setenv("JMDM_SEED", "seven")
        with pytest.raises(SystemExit) as exc:
            main(["select", "--data", str(data_csv), "--k", "2"])
        assert exc.value.code == 2

    def test_data_errors(self, tmp_path, capsys):
        code, out, err = run(["select", "--data", tmp_path / "missing.csv", "--k", 2], capsys)
        assert code == 1 and out == "" and err.startswith("jmdm: error:") and err.count("\n") == 1
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y,label\n1,2,a\n3,oops,b\n")
        code, _, err = run(["select", "--data", bad, "--k", 1], capsys)
        assert code == 1 and "line 3" in err


class TestEmbed:
    def _rows(self, out):
        header, body = out.split("\n", 1)
        assert header.startswith("# ")
        return json.loads(header[2:]), list(csv.reader(io.StringIO(body)))

    def test_default(self, data_csv, capsys):
        code, out, _ = run(["embed", "--data", data_csv], capsys)
        assert code == 0
        meta, rows = self._rows(out)
        assert rows[0] == ["feature_index", "mean_score", "coord_1", "coord_2", "coord_3"]
        assert len(rows) == 11 and meta["kernel"]["dim"] == 3 and meta["epsilon"] > 0

    def test_dim_two_and_duplicates(self, data_csv, capsys):
        _, rows = self._rows(run(["embed", "--data", data_csv, "--dim", 2], capsys)[1])
        assert len(rows[0]) == 4
        vals = np.array(rows[1:], dtype=float)
        np.testing.assert_allclose(vals[9, 1:], vals[2, 1:], atol=1e-9)

    def test_dim_too_large(self, data_csv):
        with pytest.raises(SystemExit) as exc:
            main(["embed", "--data", str(data_csv), "--dim", "10"])
        assert exc.value.code == 2


class TestBenchmark:
    def test_report_and_table(self, data_csv, capsys, tmp_path):
        target = tmp_path / "rep.json"
        argv = ["benchmark", "--data", data_csv, "--fractions", "1/2,1/5", "--dim", 2, "--seed", 11, "--out", target]
        code, out, err = run(argv, capsys)
        assert code == 0
        assert out.splitlines()[0].split() == ["Alg.", "Fraction", "fisher", "jmdm", "random"]
        assert len(out.splitlines()) == 3 and "fold 5/5 done" in err
        doc = json.loads(target.read_text())
        assert len(doc["cells"]) == 6 and doc["metadata"]["config"]["master_seed"] == 11

    def test_identical_reruns(self, data_csv, capsys, tmp_path):
        texts = []
        for name in ("a.json", "b.json"):
            run(["benchmark", "--data", data_csv, "--folds", 5, "--seed", 11, "--dim", 2, "--out", tmp_path / name], capsys)
            texts.append((tmp_path / name).read_bytes())
        assert texts[0] == texts[1]

    def test_csv_output(self, data_csv, capsys, tmp_path):
        target = tmp_path / "rep.csv"
        run(["benchmark", "--data", data_csv, "--methods", "random", "--fractions", "1/2", "--out", target], capsys)
        lines = target.read_text().splitlines()
        assert lines[0].startswith("# {") and lines[1] == "method,fraction,fold,accuracy" and len(lines) == 7

    def test_unknown_method(self, data_csv, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["benchmark", "--data", str(data_csv), "--methods", "jmdm,relief"])
        assert exc.value.code == 2
        err = capsys.readouterr().err
        assert "relief" in err and "fisher, jmdm, random" in err

    def test_bad_fraction_list(self, data_csv):
        with pytest.raises(SystemExit) as exc:
            main(["benchmark", "--data", str(data_csv), "--fractions", "1/8,zero"])
        assert exc.value.code == 2
