import json
import math
from dataclasses import replace
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncesprit.errors import ModelError
from ncesprit.harness import (CSV_HEADER, ResultTable, emit, load_scenario, match,
                              preset, read_csv, run_monte_carlo, scenario_from_dict,
                              squared_errors, to_csv, trial_rng, wrap)
from ncesprit.harness.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from ncesprit.harness.matching import cost_matrix
from ncesprit.harness.scenario import FIG3_POSITIONS, PRESETS

BASE = {"name": "tiny", "grid": {"sizes": [5]},
        "sources": {"mu": [[-0.6, 0.7]], "phi": [0.0, 1.2]},
        "snapshots": 6, "snr_db": 25, "estimators": ["nc_se", "nc_ue", "se", "ue"],
        "sweep": {"axis": "snr", "values": [20, 30]}, "trials": 6, "seed": 3}


def small(**kw):
    cfg = json.loads(json.dumps(BASE))
    cfg.update(kw)
    return scenario_from_dict(cfg)


# --- scenario -----------------------------------------------------------------

def test_json_roundtrip(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(BASE), encoding="utf-8")
    sc = load_scenario(path)
    assert sc.grid.sizes == (5,) and sc.d == 2 and sc.trials == 6
    np.testing.assert_array_equal(sc.mu, [[-0.6, 0.7]])
    assert sc.at(30.0).sigma2 == pytest.approx(1e-3)


@pytest.mark.parametrize("where", ["top", "grid", "sources", "sweep"])
def test_unknown_keys_rejected(where):
    cfg = json.loads(json.dumps(BASE))
    (cfg if where == "top" else cfg[where])["bogus"] = 1
    with pytest.raises(ModelError, match="bogus"):
        scenario_from_dict(cfg)


def test_invalid_scenarios():
    with pytest.raises(ModelError):
        small(sweep={"axis": "temperature", "values": [1]})
    with pytest.raises(ModelError):
        small(trials=0)
    with pytest.raises(ModelError):
        small(estimators=["music"])
    # five sources on five sensors: fine for the NC methods, too many for SE
    cfg = json.loads(json.dumps(BASE))
    cfg["sources"] = {"mu": [[-1.6, -0.8, 0.0, 0.8, 1.6]], "phi": [0, 0.5, 1, 1.5, 2]}
    with pytest.raises(ModelError, match="se"):
        scenario_from_dict(cfg)
    cfg["estimators"] = ["nc_se", "nc_ue"]
    assert scenario_from_dict(cfg).d == 5
    with pytest.raises(ModelError):
        load_scenario("/nonexistent/scenario.json")


def test_ue_refuses_fig3_grid():
    sc = preset("fig2")
    with pytest.raises(ModelError, match="centro"):
        replace(sc, estimators=("ue",)).validate()


def test_presets_match_captions():
    f1 = preset("fig1")
    assert f1.grid.sizes == (4, 4, 4) and f1.snapshots == 5 and f1.correlation == 0.9
    np.testing.assert_array_equal(f1.mu, [[0, 0.1]] * 3)
    np.testing.assert_allclose(f1.phi, [0, np.pi / 2])
    assert f1.sweep_values[0] == 0 and f1.sweep_values[-1] == 50

    f2 = preset("fig2")
    assert f2.grid.M == 20 and not f2.grid.is_centro_symmetric()
    for got, want in zip(f2.grid.positions, FIG3_POSITIONS):
        np.testing.assert_array_equal(got, want)
    np.testing.assert_allclose(f2.phi, [0, np.pi / 4, np.pi / 2])
    assert f2.snr_db == 10 and f2.sweep_axis == "snapshots"

    f4 = preset("fig4")
    assert f4.grid.sizes == (5, 6) and f4.snapshots == 5 and f4.snr_db == 30
    p = f4.at(0.2)
    np.testing.assert_allclose(p.src.mu, [[-0.1, 0.0], [0.1, 0.2]])

    f5 = preset("fig5")
    assert f5.at(np.pi / 2).src.phi.tolist() == pytest.approx([0, np.pi / 2])

    f6 = preset("fig6")
    assert f6.sweep_axis == "sensors" and f6.sweep_values == tuple(range(2, 21))
    p = f6.at(4)
    assert p.N * 1.0 / p.sigma2 == pytest.approx(10 ** 4.6, rel=0.01)  # 46 dB effective
    for name in PRESETS:
        preset(name).validate()
    with pytest.raises(ModelError):
        preset("fig3")


# --- matching -----------------------------------------------------------------

def test_wrap_range():
    x = np.array([-np.pi, np.pi, 3 * np.pi, 0.1, -7.0])
    w = wrap(x)
    assert np.all(w >= -np.pi) and np.all(w < np.pi)
    np.testing.assert_allclose(np.exp(1j * w), np.exp(1j * x), atol=1e-12)


def test_wrapped_error_across_branch():
    mu = np.array([[np.pi - 0.01]])
    err = squared_errors(mu, np.array([[-np.pi + 0.01]]))
    assert err[0, 0] == pytest.approx(0.02**2)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 3))
def test_matching_is_optimal(seed, d, R):
    rng = np.random.default_rng(seed)
    mu, mu_hat = rng.uniform(-3, 3, (R, d)), rng.uniform(-3, 3, (R, d))
    c = cost_matrix(mu, mu_hat)
    best = min(c[np.arange(d), list(p)].sum() for p in permutations(range(d)))
    assert c[np.arange(d), match(mu, mu_hat)].sum() == pytest.approx(best)


def test_large_d_uses_assignment(rng):
    d = 9
    mu = rng.uniform(-3, 3, (2, d))
    perm = rng.permutation(d)
    mu_hat = mu[:, perm] + 1e-4 * rng.standard_normal((2, d))
    assert np.all(perm[match(mu, mu_hat)] == np.arange(d))


# --- Monte Carlo ----------------------------------------------------------------

def test_trial_streams_independent():
    a = trial_rng(1, 0, 0).standard_normal(4)
    assert not np.allclose(a, trial_rng(1, 0, 1).standard_normal(4))
    assert not np.allclose(a, trial_rng(1, 1, 0).standard_normal(4))
    np.testing.assert_array_equal(a, trial_rng(1, 0, 0).standard_normal(4))


def test_deterministic_csv():
    sc = small()
    assert to_csv(run_monte_carlo(sc)) == to_csv(run_monte_carlo(sc))
    assert to_csv(run_monte_carlo(sc)) != to_csv(run_monte_carlo(replace(sc, seed=4)))


def test_worker_count_does_not_change_output():
    sc = small()
    assert to_csv(run_monte_carlo(sc, workers=1)) == to_csv(run_monte_carlo(sc, workers=3))


def test_zero_noise_is_exact():
    sc = replace(small(), sweep_axis=None, sweep_values=(), snr_db=math.inf)
    t = run_monte_carlo(sc, analytic=False, bounds=False)
    for name in sc.estimators:
        r = t.get(math.nan, name)
        assert r.trials == sc.trials and r.failures == 0
        assert r.rmse_emp < 1e-9


def test_rmse_is_root_of_pooled_mean():
    t = run_monte_carlo(small())
    r = t.get(20.0, "nc_se")
    assert r.mse.shape == (1, 2)
    assert r.rmse_emp == pytest.approx(math.sqrt(r.mse.mean()), rel=1e-12)


def test_table_columns():
    t = run_monte_carlo(small())
    assert t.estimators == ["nc_se", "nc_ue", "se", "ue", "det_nc_crb", "det_crb"]
    for v in (20.0, 30.0):
        assert not math.isnan(t.get(v, "nc_se").rmse_ana)
        assert math.isnan(t.get(v, "se").rmse_ana)
        assert t.get(v, "det_nc_crb").crb <= t.get(v, "det_crb").crb
    _, ana = t.curve("nc_ue", "rmse_ana")
    assert ana[1] < ana[0]


def test_predict_only_has_ana_row():
    t = run_monte_carlo(small(), estimate=False, bounds=False)
    assert t.estimators == ["ana"]


# --- output ---------------------------------------------------------------------

def test_empty_sweep_header_only():
    sc = replace(small(), sweep_values=())
    text = to_csv(run_monte_carlo(sc))
    assert text == ",".join(CSV_HEADER) + "\n"
    assert read_csv(text) == []


def test_csv_roundtrip_exact():
    t = run_monte_carlo(small())
    back = read_csv(to_csv(t))
    assert len(back) == len(t.rows)
    for a, b in zip(t.rows, back):
        for col in ("sweep_value", "rmse_emp", "rmse_ana", "crb"):
            x, y = getattr(a, col), getattr(b, col)
            assert (math.isnan(x) and math.isnan(y)) or x == y
        assert (a.estimator, a.trials, a.failures) == (b.estimator, b.trials, b.failures)


def test_fig1_legend_set(tmp_path):
    sc = replace(preset("fig1"), trials=2, sweep_values=(30.0,))
    t = run_monte_carlo(sc)
    assert t.estimators == ["nc_se", "nc_ue", "se", "ue", "det_nc_crb", "det_crb"]
    paths = emit(t, tmp_path, ("csv", "svg"))
    assert [p.name for p in paths] == ["fig1.csv", "fig1.svg"]
    svg = paths[1].read_text()
    for label in ("NC SE emp", "NC UE emp", "SE emp", "UE emp", "ana", "Det NC CRB", "Det CRB"):
        assert label in svg


def test_sensor_sweep_plot(tmp_path):
    sc = replace(preset("fig6"), trials=3, sweep_values=(2, 3, 4))
    path, = emit(run_monte_carlo(sc), tmp_path, ("svg",))
    assert "asymptotic efficiency" in path.read_text()


def test_emit_rejects_format(tmp_path):
    with pytest.raises(ValueError):
        emit(ResultTable("x", None, 0, 1), tmp_path, ("png",))


# --- CLI --------------------------------------------------------------------------

def test_cli_run_to_stdout(tmp_path, capsys):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(BASE), encoding="utf-8")
    assert main(["run", "--config", str(path), "--trials", "2", "--seed", "5"]) == EXIT_OK
    rows = read_csv(capsys.readouterr().out)
    assert {r.trials for r in rows if r.estimator == "nc_se"} == {2}


def test_cli_writes_files(tmp_path, capsys):
    rc = main(["crb", "--preset", "fig6", "--trials", "2", "--out", str(tmp_path),
               "--format", "csv,svg"])
    assert rc == EXIT_OK
    assert (tmp_path / "fig6.csv").exists() and (tmp_path / "fig6.svg").exists()
    rows = read_csv((tmp_path / "fig6.csv").read_text())
    assert {r.estimator for r in rows} == {"det_nc_crb", "det_crb"}


def test_cli_config_errors(tmp_path, capsys):
    bad = dict(BASE, colour="red")
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad), encoding="utf-8")
    assert main(["run", "--config", str(path)]) == EXIT_CONFIG
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert main(["run", "--preset", "fig1", "--format", "pdf"]) == EXIT_CONFIG
    assert "invalid configuration" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["run", "--preset", "fig9"])


def test_cli_numerical_failure(tmp_path, capsys):
    cfg = dict(BASE, sweep=None, trials=2, estimators=["nc_se"])
    cfg["sources"] = {"mu": [[0.3, 0.3 + 1e-14]], "phi": [0.0, 0.0]}
    path = tmp_path / "near.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    assert main(["crb", "--config", str(path)]) == EXIT_NUMERIC
    assert main(["predict", "--config", str(path)]) == EXIT_NUMERIC
    # estimators fall back to exclude-and-count
    assert main(["run", "--config", str(path)]) == EXIT_OK
