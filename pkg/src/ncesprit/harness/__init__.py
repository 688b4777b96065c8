"""Scenario files, presets, Monte-Carlo runs and result output."""
from .matching import match, squared_errors, wrap
from .montecarlo import ResultTable, Row, run_monte_carlo, trial_rng
from .output import CSV_HEADER, emit, read_csv, to_csv
from .scenario import PRESETS, Point, Scenario, load_scenario, preset, scenario_from_dict

__all__ = ["CSV_HEADER", "PRESETS", "Point", "ResultTable", "Row", "Scenario", "emit",
           "load_scenario", "match", "preset", "read_csv", "run_monte_carlo",
           "scenario_from_dict", "squared_errors", "to_csv", "trial_rng", "wrap"]
