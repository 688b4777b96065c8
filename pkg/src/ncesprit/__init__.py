"""Multi-dimensional ESPRIT for strictly non-circular sources.

NC Standard and NC Unitary ESPRIT on arbitrary shift-invariant R-D grids, their
first-order performance analysis, deterministic Cramer-Rao bounds and a
Monte-Carlo harness.
"""
from .array_model import (SamplingGrid, SelectionSet, SourceParams, augmented_steering,
                          steering_matrix)
from .bounds import CrbInputs, det_crb_circular, nc_crb_full, nc_crb_single, single_source_mse
from .errors import (ModelError, NcEspritError, NumericalError, RankDeficiencyError,
                     ResolvabilityError, SingularInvarianceError, UnsupportedGeometryError)
from .estimators import (ESTIMATORS, EstimationResult, nc_standard_esprit, nc_unitary_esprit,
                         standard_esprit, unitary_esprit)
from .perf_analysis import analytic_context, mse_predict, mse_predict_white, rmse_predict
from .signal_synth import NoiseModel, SymbolModel, gen_noise, gen_symbols, synthesize

__version__ = "0.1.0"
