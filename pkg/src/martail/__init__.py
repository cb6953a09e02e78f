"""Tail behaviour, prediction and bubble diagnostics for mixed causal/noncausal autoregressions."""

from .discrete import DiscretePrediction, from_pairs, total_variation
from .errors import DataError, MarError, ModelError, NumericError
from .model import (
    InnovationSpec,
    MaCoefficients,
    MarModel,
    SplitPolynomials,
    ma_coefficients,
    pure_components,
    split_polynomials,
)
from .tail import (
    DriftDistribution,
    drift_distribution,
    first_exceedance_law,
    forward_law,
    one_sided_laws,
    pure_tail_components,
    tail_coefficients,
    tail_trajectory,
    turning_point,
)
from .predict import (
    dbj_mar02_atoms,
    cauchy_mar11_predictive_density,
    predict_level,
    predict_level_and_ratio_mar11,
    predict_marp1,
)
from .simulate import simulate_trajectory
from .inference import FitResult, fit_mar11_cauchy, mar11_cauchy_loglik
from .diagnose import adjacency_summary, residual_panel

__version__ = "0.1.0"
