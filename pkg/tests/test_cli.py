import csv
import json

import numpy as np
import pytest

from evoc import io
from evoc.analysis import LandscapePoint
from evoc.cli import main
from evoc.sweep import GridSpec, run_sweep
from evoc.world import WorldConfig, run_simulation

SMALL_FLAGS = ["--n-agents", "64", "--width", "8", "--height", "8", "--iterations", "40"]


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_run_degenerate_world(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["run", "--c", "0", "--p", "0.5", "--seed", "1", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert list(rows[0]) == io.SERIES_HEADER
    assert len(rows) == 100
    assert {r["mean_fitness"] for r in rows} == {"2"}
    text = capsys.readouterr().out
    assert "final_mean_fitness 2" in text and "censored" in text


def test_run_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["run", "--c", "1", "--p", "1", "--seed", "1", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_json_format(tmp_path):
    out = tmp_path / "s.json"
    main(["run", "--c", "0.5", "--p", "0.5", "--seed", "2", "--format", "json", "--out", str(out)] + SMALL_FLAGS)
    rows = json.loads(out.read_text())
    s = run_simulation(WorldConfig(c=0.5, p=0.5, seed=2, n_agents=64, width=8, height=8, iterations=40))
    assert [r["mean_fitness"] for r in rows] == list(s.mean_fitness)
    assert [r["diversity"] for r in rows] == list(s.diversity)


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["run", "--c", "1.5", "--p", "1", "--seed", "1"], "--c"),
        (["run", "--c", "1", "--p", "-1", "--seed", "1"], "--p"),
        (["run", "--c", "1", "--p", "1"], "--seed"),
        (["run", "--c", "1", "--p", "1", "--seed", "1", "--n-agents", "100"], "--n-agents"),
        (["sweep", "--runs", "1"], "--seed"),
        (["run", "--c", "1", "--p", "1", "--seed", "1", "--r", "0"], "--r"),
    ],
)
def test_usage_errors_exit_2(tmp_path, capsys, argv, flag):
    out = tmp_path / "never.csv"
    with pytest.raises(SystemExit) as exc:
        main(argv + ["--out", str(out)])
    assert exc.value.code == 2
    assert flag in capsys.readouterr().err
    assert not out.exists()


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"c": 0.0, "p": 0.5, "seed": 4, "n_agents": 64, "width": 8, "height": 8, "iterations": 20}))
    out = tmp_path / "s.csv"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(read_rows(out)) == 20
    assert main(["run", "--config", str(cfg), "--iterations", "7", "--out", str(out)]) == 0
    assert len(read_rows(out)) == 7


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": 1}))
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", str(cfg)])
    assert exc.value.code == 2


def test_paired_valley_direction(tmp_path, capsys):
    """Matched seeds: 40% creators reach the threshold no later than all creators."""

    def ttts(c):
        vals = []
        for seed in range(10):
            main(["run", "--c", c, "--p", "1.0", "--seed", str(seed), "--out", str(tmp_path / "s.csv")])
            line = [l for l in capsys.readouterr().out.splitlines() if l.startswith("ttt")][0]
            vals.append(int(line.split()[1]))
        return np.mean(vals)

    assert ttts("0.4") <= ttts("1")


def _sweep(tmp_path, name="sw"):
    out = tmp_path / name
    argv = ["sweep", "--seed", "5", "--c-values", "0.5,1", "--p-values", "0.5,1", "--runs", "2", "--out", str(out)]
    assert main(argv + SMALL_FLAGS) == 0
    return out


def test_sweep_minimal_grid(tmp_path):
    out = _sweep(tmp_path)
    rows = read_rows(out / "landscape.csv")
    assert list(rows[0]) == io.LANDSCAPE_HEADER
    assert len(rows) == 4
    base = [r for r in rows if float(r["C"]) == 1 and float(r["p"]) == 1][0]
    assert float(base["piv"]) == 0.0
    ridge = read_rows(out / "ridge.csv")
    assert list(ridge[0]) == io.RIDGE_HEADER
    assert len(ridge) == 8


def test_sweep_store_is_reproducible(tmp_path):
    a, b = _sweep(tmp_path, "a"), _sweep(tmp_path, "b")
    for name in ("series.csv", "seeds.csv", "provenance.json"):
        assert (a / "store" / name).read_bytes() == (b / "store" / name).read_bytes()
    assert (a / "landscape.csv").read_bytes() == (b / "landscape.csv").read_bytes()


def test_analyze_recomputes(tmp_path):
    out = _sweep(tmp_path)
    store = out / "store"
    l9, l10, l99 = tmp_path / "l9.csv", tmp_path / "l10.csv", tmp_path / "l99.csv"
    assert main(["analyze", "--store", str(store), "--tau", "9", "--out", str(l9)]) == 0
    assert l9.read_bytes() == (out / "landscape.csv").read_bytes()
    assert main(["analyze", "--store", str(store), "--tau", "10", "--out", str(l10)]) == 0
    for r9, r10 in zip(read_rows(l9), read_rows(l10)):
        assert float(r10["mean_ttt"]) >= float(r9["mean_ttt"])
    main(["analyze", "--store", str(store), "--tau", "10.5", "--out", str(l99)])
    assert all(r["censored_runs"] == r["runs"] for r in read_rows(l99))
    again = tmp_path / "again.csv"
    main(["analyze", "--store", str(store), "--tau", "10", "--out", str(again)])
    assert again.read_bytes() == l10.read_bytes()
    assert (tmp_path / "l10_ridge.csv").exists()


def test_analyze_without_baseline(tmp_path, capsys):
    spec = GridSpec(c_values=(0.5, 1.0), p_values=(1.0,), runs_per_cell=1,
                    base_config=WorldConfig(n_agents=64, width=8, height=8, iterations=10))
    res = run_sweep(spec, workers=1)
    del res.cells[(1.0, 1.0)]
    io.write_store(res, tmp_path / "store")
    code = main(["analyze", "--store", str(tmp_path / "store"), "--out", str(tmp_path / "l.csv")])
    assert code == 1
    assert "baseline" in capsys.readouterr().err
    assert not (tmp_path / "l.csv").exists()


def test_analyze_missing_store(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--store", str(tmp_path / "nope")])
    assert exc.value.code == 2


def test_export_json(tmp_path):
    out = _sweep(tmp_path)
    dst = tmp_path / "l.json"
    assert main(["export", str(out / "landscape.csv"), "--out", str(dst)]) == 0
    rows = json.loads(dst.read_text())
    pts = io.read_landscape(out / "landscape.csv")
    assert [r["mean_ttt"] for r in rows] == [p.mean_ttt for p in pts]
    assert [r["piv"] for r in rows] == [p.piv for p in pts]


def test_store_round_trip(tmp_path):
    spec = GridSpec(c_values=(0.35, 1.0), p_values=(0.15, 1.0), runs_per_cell=2, master_seed=7,
                    base_config=WorldConfig(n_agents=64, width=8, height=8, iterations=15))
    res = run_sweep(spec, workers=1)
    io.write_store(res, tmp_path / "st")
    back = io.read_store(tmp_path / "st")
    assert back.spec == spec
    for key, cell in res.cells.items():
        got = back.cells[key]
        assert got.mean_fitness.tobytes() == cell.mean_fitness.tobytes()
        assert got.diversity.tobytes() == cell.diversity.tobytes()
        assert np.array_equal(got.seeds, cell.seeds)


def test_landscape_and_ridge_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    pts = [LandscapePoint(float(c), 0.1 * k, *rng.random(1) * 90 + 1, 2, float(rng.random()), float(rng.normal()), 20)
           for k, c in enumerate(rng.random(6))]
    pts = [LandscapePoint(p.c, p.p, p.mean_ttt, p.censored_runs, np.log10(p.mean_ttt), p.piv, p.runs) for p in pts]
    io.write_landscape(tmp_path / "l.csv", pts)
    assert io.read_landscape(tmp_path / "l.csv") == pts
    ridge = [("c", 0.1 / 3, 2 / 3, "ttt"), ("p", 1.0, 0.15000000000000002, "piv")]
    io.write_ridge(tmp_path / "r.csv", ridge)
    assert io.read_ridge(tmp_path / "r.csv") == ridge


def test_run_series_round_trip(tmp_path):
    s = run_simulation(WorldConfig(c=0.45, p=0.3, seed=8, n_agents=64, width=8, height=8, iterations=25))
    io.write_run_series(tmp_path / "s.csv", s, 0.45, 0.3)
    back = io.read_series(tmp_path / "s.csv")
    assert back[(0.45, 0.3)]["mean_fitness"][0].tobytes() == s.mean_fitness.tobytes()


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    target = tmp_path / "x.csv"
    with pytest.raises(RuntimeError):
        with io.atomic_writer(target) as fh:
            fh.write("partial")
            raise RuntimeError
    assert list(tmp_path.iterdir()) == []
