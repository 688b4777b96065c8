"""Scenario description, JSON loading and the figure presets."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from ..array_model import SamplingGrid, SelectionSet, SourceParams
from ..errors import ModelError
from ..estimators import ESTIMATORS
from ..signal_synth import SymbolModel, correlation_matrix

SWEEP_AXES = ("snr", "snapshots", "separation", "phase_sep", "sensors")
DEFAULT_TRIALS = 500
FULL_TRIALS = 5000
FIG3_POSITIONS = ([0.0, 1.0, 2.0, 4.0, 5.0], [0.0, 1.0, 3.0, 4.0])
NC_ESTIMATORS = ("nc_se", "nc_ue")


@dataclass(frozen=True)
class Point:
    """One fully specified operating point of a scenario."""

    value: float
    grid: SamplingGrid
    src: SourceParams
    symbols: SymbolModel
    N: int
    sigma2: float


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: SamplingGrid
    mu: np.ndarray
    phi: np.ndarray
    snapshots: int
    snr_db: float
    estimators: tuple = ("nc_se", "nc_ue", "se", "ue")
    correlation: object = 0.0
    powers: Optional[np.ndarray] = None
    exact_covariance: bool = False
    sweep_axis: Optional[str] = None
    sweep_values: tuple = ()
    mu_slope: Optional[np.ndarray] = None
    phi_slope: Optional[np.ndarray] = None
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def d(self) -> int:
        return np.asarray(self.phi).size

    def values(self) -> tuple:
        return tuple(self.sweep_values) if self.sweep_axis else (float("nan"),)

    def at(self, value: float) -> Point:
        grid, N, snr = self.grid, self.snapshots, self.snr_db
        mu = np.array(self.mu, dtype=float)
        phi = np.array(self.phi, dtype=float)
        axis = self.sweep_axis
        if axis == "snr":
            snr = float(value)
        elif axis == "snapshots":
            N = int(value)
        elif axis == "separation":
            mu = mu + float(value) * np.asarray(self.mu_slope, dtype=float)
        elif axis == "phase_sep":
            phi = phi + float(value) * np.asarray(self.phi_slope, dtype=float)
        elif axis == "sensors":
            grid = SamplingGrid.uniform(int(value))
        src = SourceParams(mu, phi)
        if src.R != grid.R:
            raise ModelError(f"sources have R={src.R} but the grid has R={grid.R}")
        symbols = SymbolModel(phi, self.correlation, self.powers, self.exact_covariance)
        sigma2 = 0.0 if np.isinf(snr) else 10.0 ** (-snr / 10.0)
        return Point(float(value), grid, src, symbols, int(N), sigma2)

    def validate(self) -> None:
        """Check every estimator can resolve the sources at every sweep point."""
        if self.trials < 1:
            raise ModelError("trials must be >= 1")
        if self.seed < 0:
            raise ModelError("seed must be non-negative")
        if self.sweep_axis is not None and self.sweep_axis not in SWEEP_AXES:
            raise ModelError(f"unknown sweep axis {self.sweep_axis!r}")
        if self.sweep_axis == "separation" and self.mu_slope is None:
            raise ModelError("separation sweep needs sources.mu_slope")
        if self.sweep_axis == "phase_sep" and self.phi_slope is None:
            raise ModelError("phase_sep sweep needs sources.phi_slope")
        for name in self.estimators:
            if name not in ESTIMATORS:
                raise ModelError(f"unknown estimator {name!r}")
        correlation_matrix(self.correlation, self.d)
        for v in self.values():
            p = self.at(v)
            p.symbols.covariance()
            sel = SelectionSet.max_overlap(p.grid)
            for name in self.estimators:
                family = "nc" if name in NC_ESTIMATORS else name
                limit = sel.max_sources(family, p.N)
                if p.src.d > limit:
                    raise ModelError(f"{name} resolves at most {limit} sources at "
                                     f"{self.sweep_axis}={v}, scenario has {p.src.d}")
                if name == "ue" and not p.grid.is_centro_symmetric():
                    raise ModelError("ue needs a centro-symmetric grid")


# ---------------------------------------------------------------------------
# presets


def _snr_grid():
    return tuple(float(v) for v in range(0, 55, 5))


def preset(name: str) -> Scenario:
    half_pi = np.pi / 2
    if name == "fig1":
        return Scenario(
            "fig1", SamplingGrid.uniform(4, 4, 4),
            mu=np.array([[0.0, 0.1]] * 3), phi=np.array([0.0, half_pi]),
            snapshots=5, snr_db=30.0, correlation=0.9,
            sweep_axis="snr", sweep_values=_snr_grid())
    if name == "fig2":
        return Scenario(
            "fig2", SamplingGrid(FIG3_POSITIONS),
            mu=np.array([[0.25, 0.5, 0.75]] * 2), phi=np.array([0.0, np.pi / 4, half_pi]),
            snapshots=100, snr_db=10.0, estimators=("nc_se", "nc_ue", "se"),
            sweep_axis="snapshots", sweep_values=(3, 5, 10, 20, 50, 100, 200, 500, 1000))
    if name == "fig4":
        return Scenario(
            "fig4", SamplingGrid.uniform(5, 6),
            mu=np.zeros((2, 2)), phi=np.array([0.0, half_pi]),
            snapshots=5, snr_db=30.0,
            sweep_axis="separation",
            sweep_values=tuple(float(v) for v in np.logspace(-3, 0, 21)),
            mu_slope=np.array([[-0.5, 0.0], [0.5, 1.0]]))
    if name == "fig5":
        return Scenario(
            "fig5", SamplingGrid.uniform(5, 6),
            mu=np.array([[1.0, 0.8], [1.0, 0.8]]), phi=np.array([0.0, 0.0]),
            snapshots=5, snr_db=30.0,
            sweep_axis="phase_sep",
            sweep_values=tuple(float(v) for v in np.linspace(0.0, half_pi, 9)),
            phi_slope=np.array([0.0, 1.0]))
    if name == "fig6":
        return Scenario(
            "fig6", SamplingGrid.uniform(4),
            mu=np.array([[0.5]]), phi=np.array([0.0]),
            snapshots=4, snr_db=40.0, estimators=NC_ESTIMATORS,
            exact_covariance=True,
            sweep_axis="sensors", sweep_values=tuple(range(2, 21)))
    raise ModelError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


PRESETS = ("fig1", "fig2", "fig4", "fig5", "fig6")


# ---------------------------------------------------------------------------
# JSON

_TOP_KEYS = {"name", "grid", "sources", "snapshots", "snr_db", "estimators", "sweep",
             "trials", "seed"}
_GRID_KEYS = {"sizes", "positions", "preset"}
_SOURCE_KEYS = {"mu", "phi", "correlation", "powers", "exact_covariance", "mu_slope", "phi_slope"}
_SWEEP_KEYS = {"axis", "values"}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ModelError(f"{where} must be an object")
    extra = set(obj) - allowed
    if extra:
        raise ModelError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def _grid_from_json(g: dict) -> SamplingGrid:
    _reject_unknown(g, _GRID_KEYS, "grid")
    if len(g) != 1:
        raise ModelError("grid needs exactly one of sizes, positions, preset")
    if "sizes" in g:
        return SamplingGrid.uniform(*[int(m) for m in g["sizes"]])
    if "positions" in g:
        return SamplingGrid(tuple(np.asarray(p, dtype=float) for p in g["positions"]))
    if g["preset"] == "fig3":
        return SamplingGrid(FIG3_POSITIONS)
    raise ModelError(f"unknown grid preset {g['preset']!r}")


def scenario_from_dict(cfg: dict) -> Scenario:
    _reject_unknown(cfg, _TOP_KEYS, "scenario")
    for key in ("grid", "sources", "snapshots", "snr_db"):
        if key not in cfg:
            raise ModelError(f"scenario is missing {key!r}")
    src = cfg["sources"]
    _reject_unknown(src, _SOURCE_KEYS, "sources")
    if "mu" not in src or "phi" not in src:
        raise ModelError("sources need mu and phi")
    sweep = cfg.get("sweep")
    axis, values = None, ()
    if sweep is not None:
        _reject_unknown(sweep, _SWEEP_KEYS, "sweep")
        axis = sweep.get("axis")
        values = tuple(float(v) for v in sweep.get("values", ()))
    try:
        sc = Scenario(
            name=str(cfg.get("name", "scenario")),
            grid=_grid_from_json(cfg["grid"]),
            mu=np.atleast_2d(np.asarray(src["mu"], dtype=float)),
            phi=np.asarray(src["phi"], dtype=float),
            snapshots=int(cfg["snapshots"]),
            snr_db=float(cfg["snr_db"]),
            estimators=tuple(cfg.get("estimators", ("nc_se", "nc_ue", "se", "ue"))),
            correlation=src.get("correlation", 0.0),
            powers=None if src.get("powers") is None else np.asarray(src["powers"], dtype=float),
            exact_covariance=bool(src.get("exact_covariance", False)),
            sweep_axis=axis,
            sweep_values=values,
            mu_slope=None if src.get("mu_slope") is None else np.asarray(src["mu_slope"], dtype=float),
            phi_slope=None if src.get("phi_slope") is None else np.asarray(src["phi_slope"], dtype=float),
            trials=int(cfg.get("trials", DEFAULT_TRIALS)),
            seed=int(cfg.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ModelError(f"invalid scenario: {exc}") from exc
    sc.validate()
    return sc


def load_scenario(path) -> Scenario:
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read scenario {path}: {exc}") from exc
    return scenario_from_dict(cfg)


def with_overrides(sc: Scenario, **kw) -> Scenario:
    kw = {k: v for k, v in kw.items() if v is not None}
    return replace(sc, **kw) if kw else sc
