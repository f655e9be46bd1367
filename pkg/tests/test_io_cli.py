import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from matmix import io
from matmix.cli import EXIT_FIT, EXIT_IO, EXIT_VALIDATION, confusion_table, evaluate, main


@given(arrays(float, st.tuples(st.integers(1, 4), st.integers(1, 3), st.integers(1, 3)), elements=st.floats(-1e300, 1e300)))
def test_dataset_round_trip_is_exact(tensor):
    import tempfile, os

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "x.csv")
        io.write_dataset(path, tensor)
        assert np.array_equal(io.read_dataset(path), tensor)


def test_dataset_round_trip_tiny_values(tmp_path):
    t = np.array([[[5e-324, -2.2250738585072014e-308], [0.1, 1 / 3]]])
    io.write_dataset(tmp_path / "d.csv", t)
    back = io.read_dataset(tmp_path / "d.csv")
    assert back.tobytes() == t.tobytes()


@pytest.mark.parametrize(
    "text,msg",
    [
        ("obs,row,value\n0,0,1\n", "header"),
        ("obs,row,col,value\n", "no data"),
        ("obs,row,col,value\n0,0,0,abc\n", "malformed"),
        ("obs,row,col,value\n0,0,0\n", "4 fields"),
        ("obs,row,col,value\n0,0,0,1\n0,0,1,2\n1,0,0,3\n", "grid"),
        ("obs,row,col,value\n0,0,0,1\n0,0,0,2\n", "grid"),
        ("obs,row,col,value\n-1,0,0,1\n", "negative"),
    ],
)
def test_malformed_datasets(tmp_path, text, msg):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(io.DataFormatError, match=msg):
        io.read_dataset(path)


def test_duplicate_with_matching_count(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("obs,row,col,value\n0,0,0,1\n0,0,0,2\n1,0,0,3\n0,0,0,4\n")
    with pytest.raises(io.DataFormatError):
        io.read_dataset(path)


def test_labels_round_trip(tmp_path):
    lab = np.array([2, -1, 0, 1, -1])
    io.write_labels(tmp_path / "l.csv", lab)
    assert np.array_equal(io.read_labels(tmp_path / "l.csv", 5), lab)


@pytest.mark.parametrize(
    "text,n_obs",
    [
        ("id,label\n0,1\n", None),
        ("obs,label\n0,1\n2,1\n", None),
        ("obs,label\n0,-2\n", None),
        ("obs,label\n0,x\n", None),
        ("obs,label\n0,1\n1,0\n", 3),
    ],
)
def test_malformed_labels(tmp_path, text, n_obs):
    path = tmp_path / "l.csv"
    path.write_text(text)
    with pytest.raises(io.DataFormatError):
        io.read_labels(path, n_obs)


def test_labels_unordered_rows(tmp_path):
    path = tmp_path / "l.csv"
    path.write_text("obs,label\n1,0\n0,1\n")
    assert io.read_labels(path).tolist() == [1, 0]


def test_json_is_sorted(tmp_path):
    io.write_json(tmp_path / "a.json", {"b": 1, "a": [1.5]})
    text = (tmp_path / "a.json").read_text()
    assert text.index('"a"') < text.index('"b"') and json.loads(text) == {"a": [1.5], "b": 1}


def test_confusion_and_evaluate():
    tab = confusion_table([1, 1, 0, 0], [0, 0, 1, 1])
    assert tab == {"rows": [0, 1], "columns": ["P0", "P1"], "counts": [[0, 2], [2, 0]]}
    rep = evaluate([1, 1, 0, 0], [0, 0, 1, 1], [True, True, True, False])
    assert rep["n_evaluated"] == 3 and rep["mcr"] == 0.0 and rep["ari"] == 1.0


# ---------------------------------------------------------------- CLI


@pytest.fixture(scope="module")
def simulated(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    res = CliRunner().invoke(main, ["simulate", "sim1_mvst", "--seed", "3", "--per-group", "60", "-o", str(out)])
    assert res.exit_code == 0, res.output
    return out


def test_simulate_outputs(simulated):
    data = io.read_dataset(simulated / "data.csv")
    labels = io.read_labels(simulated / "labels.csv")
    assert data.shape == (120, 3, 4)
    assert np.bincount(labels).tolist() == [60, 60]
    params = json.loads((simulated / "params.json").read_text())
    assert params["kind"] == "mvst" and params["counts"] == [60, 60] and len(params["components"]) == 2


def test_simulate_deterministic(simulated, tmp_path):
    res = CliRunner().invoke(main, ["simulate", "sim1_mvst", "--seed", "3", "--per-group", "60", "-o", str(tmp_path)])
    assert res.exit_code == 0
    assert (tmp_path / "data.csv").read_bytes() == (simulated / "data.csv").read_bytes()


def test_simulate_unknown_preset(tmp_path):
    res = CliRunner().invoke(main, ["simulate", "nope", "-o", str(tmp_path)])
    assert res.exit_code == EXIT_VALIDATION and "unknown preset" in res.output


def test_fit_unsupervised(simulated, tmp_path):
    res = CliRunner().invoke(
        main,
        ["fit", str(simulated / "data.csv"), "--kind", "mvst", "--g-min", "1", "--g-max", "2", "--starts", "1",
         "--truth", str(simulated / "labels.csv"), "-o", str(tmp_path)],
    )
    assert res.exit_code == 0, res.output
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["chosen_bic"] == {"kind": "mvst", "G": 2}
    assert summary["evaluation"]["ari"] == 1.0 and summary["evaluation"]["n_evaluated"] == 120
    assert {f["G"] for f in summary["fits"]} == {1, 2}
    for g in (1, 2):
        rep = json.loads((tmp_path / f"fit_mvst_G{g}.json").read_text())
        assert rep["G"] == g and len(rep["map_labels"]) == 120
    assert len(io.read_labels(tmp_path / "map_labels.csv")) == 120


def test_fit_semi_supervised(simulated, tmp_path):
    truth = io.read_labels(simulated / "labels.csv")
    partial = truth.copy()
    partial[np.random.default_rng(0).random(len(truth)) < 0.5] = -1
    io.write_labels(tmp_path / "partial.csv", partial)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "mvst", "g_min": 1, "g_max": 2, "n_starts": 1}))
    out = tmp_path / "out"
    res = CliRunner().invoke(
        main,
        ["fit", str(simulated / "data.csv"), "--labels", str(tmp_path / "partial.csv"), "--truth",
         str(simulated / "labels.csv"), "--config", str(cfg), "-o", str(out)],
    )
    assert res.exit_code == 0, res.output
    summary = json.loads((out / "summary.json").read_text())
    assert summary["semi_supervised"] and summary["config"]["g_min"] == 2
    assert summary["evaluation"]["n_evaluated"] == int(np.sum(partial < 0))
    assert summary["evaluation"]["mcr"] == 0.0
    pred = io.read_labels(out / "map_labels.csv")
    known = partial >= 0
    assert np.array_equal(pred[known], partial[known])


@pytest.mark.parametrize(
    "cfg",
    [{"kind": "mvst", "bogus": 1}, {"epsilon": 0}, {"g_min": 3, "g_max": 2}, {"max_iter": 2}, {"init": "spectral"}],
)
def test_fit_rejects_bad_config(simulated, tmp_path, cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    res = CliRunner().invoke(main, ["fit", str(simulated / "data.csv"), "--config", str(path), "-o", str(tmp_path / "o")])
    assert res.exit_code == EXIT_VALIDATION


def test_fit_config_not_json(simulated, tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{")
    res = CliRunner().invoke(main, ["fit", str(simulated / "data.csv"), "--config", str(path), "-o", str(tmp_path)])
    assert res.exit_code == EXIT_VALIDATION


def test_fit_missing_file(tmp_path):
    res = CliRunner().invoke(main, ["fit", str(tmp_path / "absent.csv"), "-o", str(tmp_path)])
    assert res.exit_code == EXIT_IO


def test_fit_malformed_data(tmp_path):
    (tmp_path / "d.csv").write_text("a,b\n")
    res = CliRunner().invoke(main, ["fit", str(tmp_path / "d.csv"), "-o", str(tmp_path)])
    assert res.exit_code == EXIT_VALIDATION


def test_fit_every_g_fails(tmp_path):
    io.write_dataset(tmp_path / "d.csv", np.random.default_rng(0).normal(size=(4, 2, 2)))
    res = CliRunner().invoke(
        main, ["fit", str(tmp_path / "d.csv"), "--kind", "mvvg", "--g-min", "5", "--g-max", "5", "-o", str(tmp_path / "o")]
    )
    assert res.exit_code == EXIT_FIT
    assert "error" in json.loads((tmp_path / "o" / "summary.json").read_text())


def test_evaluate_command(tmp_path):
    io.write_labels(tmp_path / "p.csv", [1, 1, 0, 0])
    io.write_labels(tmp_path / "t.csv", [0, 0, 1, 0])
    io.write_labels(tmp_path / "m.csv", [0, -1, -1, -1])
    res = CliRunner().invoke(
        main, ["evaluate", str(tmp_path / "p.csv"), str(tmp_path / "t.csv"), "--mask", str(tmp_path / "m.csv"), "-o", str(tmp_path / "r.json")]
    )
    assert res.exit_code == 0, res.output
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["n_evaluated"] == 3 and rep["mcr"] == pytest.approx(1 / 3)
    assert rep["confusion_table"]["counts"] == [[1, 1], [1, 0]]


def test_evaluate_length_mismatch(tmp_path):
    io.write_labels(tmp_path / "p.csv", [1, 0])
    io.write_labels(tmp_path / "t.csv", [0, 0, 1])
    res = CliRunner().invoke(main, ["evaluate", str(tmp_path / "p.csv"), str(tmp_path / "t.csv")])
    assert res.exit_code == EXIT_VALIDATION


def test_marginals_command(simulated, tmp_path):
    out = tmp_path / "m.csv"
    res = CliRunner().invoke(main, ["marginals", str(simulated / "data.csv"), str(simulated / "labels.csv"), "-o", str(out)])
    assert res.exit_code == 0, res.output
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 120 * 3 * 4
    assert sorted({r["col"] for r in rows}) == ["V1", "V2", "V3", "V4"]
    data = io.read_dataset(simulated / "data.csv")
    r = rows[5]
    assert float(r["value"]) == data[int(r["obs"]), int(r["row"]), int(r["col"][1:]) - 1]
