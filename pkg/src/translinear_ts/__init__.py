"""Transformed-linear models for the upper tail of heavy-tailed time series."""

__version__ = "0.1.0"

from .exceptions import (ArgumentError, ConvergenceError, DataIOError, DecompositionError,
                         DomainError, EstimationError, SingularityError, TranslinearError)
from .series import Series
from .translinear import ZERO, t_add, t_combine, t_scale, t_sub, tau, tau_inv
from .simulators import (MaModel, frechet_noise, simulate_garch11, simulate_logistic_markov,
                         simulate_ma)
from .tail_estimation import (MarginalFit, Tpdf, back_transform, chi_estimator, estimate_tpdf,
                              fit_marginal, hill_estimator, marginal_transform, preprocess,
                              scale_estimator)
from .innovations import (InnovationsState, PredictorWeights, direct_predictor_weights, fit_ma,
                          innovations_algorithm, innovations_predict, ma_tpdf, one_step_predict,
                          rolling_predict)
from .uncertainty import (AngularMeasure, IntervalSet, PredictionTpdm, angular_density,
                          angular_measure, conditional_interval, conditional_intervals,
                          cp_decompose, cp_decompose_many, gaussian_baseline, joint_region,
                          prediction_tpdm, region_coverage)
from .diagnostics import evaluate_coverage, run_lengths, sum_quantiles
