"""Seeded Monte-Carlo evaluation of a scenario.

Every trial draws from its own Philox stream keyed by (seed, sweep index,
trial index), so the result does not depend on how trials are split across
worker processes.  Per-trial quantities are stored in trial order and reduced
only after all chunks are merged.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..array_model import SelectionSet, steering_matrix
from ..bounds import CrbInputs, derivative_matrix, det_crb_circular, nc_crb_full
from ..errors import NcEspritError, NumericalError
from ..estimators import ESTIMATORS, ComplexEigenvalueWarning, PairingWarning
from ..perf_analysis import analytic_context, mse_predict_white
from ..signal_synth import NoiseModel, gen_noise, gen_real_symbols, rotate, synthesize
from .matching import squared_errors
from .scenario import NC_ESTIMATORS, Point, Scenario

CRB_ROWS = ("det_nc_crb", "det_crb")


@dataclass
class Row:
    sweep_value: float
    estimator: str
    rmse_emp: float = math.nan
    rmse_ana: float = math.nan
    crb: float = math.nan
    trials: int = 0
    failures: int = 0
    mse: np.ndarray | None = field(default=None, repr=False)  # R x d, not written to CSV


@dataclass
class ResultTable:
    name: str
    sweep_axis: str | None
    seed: int
    trials: int
    rows: list = field(default_factory=list)

    def curve(self, estimator: str, column: str = "rmse_emp"):
        """(sweep values, column values) for one estimator."""
        sel = [r for r in self.rows if r.estimator == estimator]
        return (np.array([r.sweep_value for r in sel]),
                np.array([getattr(r, column) for r in sel], dtype=float))

    def get(self, sweep_value, estimator: str) -> Row:
        for r in self.rows:
            if r.estimator == estimator and (r.sweep_value == sweep_value or
                                             (math.isnan(r.sweep_value) and math.isnan(sweep_value))):
                return r
        raise KeyError((sweep_value, estimator))

    @property
    def estimators(self) -> list:
        seen = []
        for r in self.rows:
            if r.estimator not in seen:
                seen.append(r.estimator)
        return seen


def trial_rng(seed: int, k: int, t: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, k, t])))


def _run_chunk(sc: Scenario, k: int, t0: int, t1: int, estimators: tuple,
               analytic: bool, bounds: bool) -> dict:
    p = sc.at(sc.values()[k])
    grid_c = p.grid.centered()
    A = steering_matrix(grid_c, p.src)
    D = derivative_matrix(grid_c, p.src) if bounds else None
    sel = SelectionSet.max_overlap(p.grid)
    noise = NoiseModel.circular(p.sigma2)
    n, R, d = t1 - t0, p.src.R, p.src.d
    out = {name: np.full((n, R, d), np.nan) for name in estimators}
    out["ana"] = np.full((n, R, d), np.nan)
    out["det_nc_crb"] = np.full(n, np.nan)
    out["det_crb"] = np.full(n, np.nan)
    for j, t in enumerate(range(t0, t1)):
        rng = trial_rng(sc.seed, k, t)
        S0 = gen_real_symbols(p.symbols, p.N, rng)
        S = rotate(S0, p.src.phi)
        X = synthesize(A, S, gen_noise(noise, p.grid.M, p.N, rng))
        for name in estimators:
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", PairingWarning)
                    warnings.simplefilter("ignore", ComplexEigenvalueWarning)
                    res = ESTIMATORS[name](X, d, p.grid, sel)
                out[name][j] = squared_errors(p.src.mu, res.mu_hat)
            except (NcEspritError, np.linalg.LinAlgError):
                pass
        if analytic:
            try:
                ctx = analytic_context(grid_c, p.src, S, sel)
                out["ana"][j] = mse_predict_white(ctx, p.sigma2)
            except (NcEspritError, np.linalg.LinAlgError):
                pass
        if bounds:
            try:
                inp = CrbInputs(A, D, p.src.phi, S0 @ S0.T / p.N, p.sigma2, p.N)
                out["det_nc_crb"][j] = _mean_bound(nc_crb_full(inp))
            except (NcEspritError, np.linalg.LinAlgError):
                pass
            try:
                C = det_crb_circular(A, D, S @ S.conj().T / p.N, p.sigma2, p.N)
                out["det_crb"][j] = _mean_bound(C)
            except (NcEspritError, np.linalg.LinAlgError):
                pass
    return out


def _mean_bound(C: np.ndarray) -> float:
    v = float(np.trace(C)) / C.shape[0]
    if not (np.isfinite(v) and v > 0):
        raise NumericalError("bound is not positive")
    return v


def _chunks(trials: int, workers: int):
    size = max(1, math.ceil(trials / max(workers, 1)))
    return [(t, min(t + size, trials)) for t in range(0, trials, size)]


def _reduce(sc: Scenario, p: Point, data: dict, estimators: tuple,
            analytic: bool, bounds: bool) -> list:
    rows = []
    ana = data["ana"]
    ana_ok = ~np.isnan(ana).any(axis=(1, 2))
    rmse_ana = math.sqrt(float(np.mean(ana[ana_ok]))) if analytic and ana_ok.any() else math.nan
    for name in estimators:
        e = data[name]
        ok = ~np.isnan(e).any(axis=(1, 2))
        n_ok = int(ok.sum())
        mse = e[ok].mean(axis=0) if n_ok else np.full(e.shape[1:], np.nan)
        rows.append(Row(p.value, name,
                        rmse_emp=math.sqrt(float(np.mean(e[ok]))) if n_ok else math.nan,
                        rmse_ana=rmse_ana if name in NC_ESTIMATORS else math.nan,
                        trials=n_ok, failures=int(e.shape[0] - n_ok), mse=mse))
    if bounds:
        for name in CRB_ROWS:
            v = data[name]
            ok = ~np.isnan(v)
            rows.append(Row(p.value, name,
                            crb=math.sqrt(float(np.mean(v[ok]))) if ok.any() else math.nan,
                            trials=int(ok.sum()), failures=int(v.size - ok.sum())))
    if analytic and not estimators:
        rows.append(Row(p.value, "ana", rmse_ana=rmse_ana, trials=int(ana_ok.sum()),
                        failures=int(ana.shape[0] - ana_ok.sum())))
    return rows


def run_monte_carlo(sc: Scenario, workers: int = 1, estimate: bool = True,
                    analytic: bool = True, bounds: bool = True) -> ResultTable:
    """Run all trials of all sweep points and reduce them to a :class:`ResultTable`.

    The output is bit-identical for any ``workers`` value.
    """
    sc.validate()
    estimators = tuple(sc.estimators) if estimate else ()
    table = ResultTable(sc.name, sc.sweep_axis, sc.seed, sc.trials)
    jobs = [(k, t0, t1) for k in range(len(sc.values())) for t0, t1 in _chunks(sc.trials, workers)]
    args = (estimators, analytic, bounds)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(_run_chunk, sc, k, t0, t1, *args) for k, t0, t1 in jobs]
            parts = [f.result() for f in futs]
    else:
        parts = [_run_chunk(sc, k, t0, t1, *args) for k, t0, t1 in jobs]
    for k, v in enumerate(sc.values()):
        mine = [part for (kk, _, _), part in zip(jobs, parts) if kk == k]
        data = {key: np.concatenate([m[key] for m in mine]) for key in mine[0]}
        table.rows.extend(_reduce(sc, sc.at(v), data, estimators, analytic, bounds))
    return table
