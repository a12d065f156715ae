"""Thresholded Lasso and Gauss-Dantzig estimators with incoherence
diagnostics and a reproducible simulation harness."""

from .analysis import (
    BoundCheck,
    IncoherenceReport,
    OracleQuantities,
    check_theorem_bounds,
    counting_bound_check,
    delta_s,
    ds_constants,
    ideal_estimator_mse,
    incoherence_report,
    lasso_oracle_constants,
    oracle_quantities,
    re_constant_upper,
    sparse_eigs,
    theta,
)
from .dantzig import DantzigSolution, dantzig_selector, ds_feasibility
from .ensembles import EnsembleSpec, generate, toeplitz_cholesky
from .harness import ExperimentConfig, ExperimentRecord, emit, run_experiment
from .lasso_path import LassoPath, cd_lasso, kkt_residual, lars_path, lasso_at
from .metrics import (
    Confusion,
    confusion,
    ell2_loss,
    exact_sign_recovery,
    prediction_loss,
    rho_squared,
)
from .model import (
    DesignMatrix,
    GroundTruth,
    ProblemInstance,
    noise_scale,
    sample_beta,
    snr,
    synthesize,
)
from .procedures import (
    ProcedureResult,
    adaptive_lasso,
    gauss_dantzig,
    iterative_multistep,
    optimal_path_estimate,
    threshold_select,
    thresholded_lasso,
)
from .refit import ols, ols_loss_decomposition

__version__ = "0.1.0"
