"""Thresholding estimators: two-step Thresholded Lasso, Gauss-Dantzig,
the iterative multi-step procedure, and the adaptive-lasso baseline.

All thresholds compare |beta_j| >= t (inclusive).  Magnitudes are compared
in absolute value throughout; signed comparison would discard every
negative coefficient, which is incompatible with the +-signed targets the
procedures are evaluated on.

Model-size safeguard: whenever a selected set exceeds n (so OLS would be
singular), it is truncated to the n largest initial-estimate magnitudes
and the result is flagged.  The regimes of interest never trigger this,
but the safeguard keeps the estimators total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dantzig import dantzig_selector
from .lasso_path import LassoPath, lars_path, lasso_at
from .metrics import confusion, ell2_loss
from .model import GroundTruth, ProblemInstance
from .refit import ols


@dataclass(frozen=True)
class Stage:
    """One selection stage: threshold used, surviving set, current estimate."""

    threshold: float
    selected: tuple[int, ...]
    beta: np.ndarray


@dataclass(frozen=True)
class ProcedureResult:
    """Initial estimate, per-stage selections, and the final refit."""

    procedure: str
    beta_init: np.ndarray
    stages: tuple[Stage, ...]
    beta_hat: np.ndarray
    lambda_n: float
    truncated: bool = False

    @property
    def selected(self) -> tuple[int, ...]:
        return self.stages[-1].selected

    def to_json_dict(self) -> dict:
        def sparse(v):
            return [[int(j), float(v[j])] for j in np.flatnonzero(v)]

        return {
            "procedure": self.procedure,
            "lambda_n": self.lambda_n,
            "truncated": self.truncated,
            "beta_init": sparse(self.beta_init),
            "beta_hat": sparse(self.beta_hat),
            "stages": [
                {
                    "threshold": st.threshold,
                    "selected": list(st.selected),
                    "beta": sparse(st.beta),
                }
                for st in self.stages
            ],
        }


def threshold_select(beta: np.ndarray, t0: float) -> np.ndarray:
    """Indices with |beta_j| >= t0 (so t0 = 0 selects everything)."""
    if t0 < 0:
        raise ValueError("threshold must be nonnegative")
    return np.flatnonzero(np.abs(np.asarray(beta, dtype=float)) >= t0)


def _cap_to_n(I: np.ndarray, beta_init: np.ndarray, n: int) -> tuple[np.ndarray, bool]:
    if I.size <= n:
        return I, False
    order = np.lexsort((I, -np.abs(beta_init[I])))  # magnitude desc, index asc
    return np.sort(I[order[:n]]), True


def _two_step(procedure, instance, beta_init, lambda_n, t0) -> ProcedureResult:
    I = threshold_select(beta_init, t0)
    I, truncated = _cap_to_n(I, beta_init, instance.n)
    beta_hat = ols(instance.X.entries, instance.Y, I)
    stage = Stage(threshold=float(t0), selected=tuple(int(j) for j in I), beta=beta_hat)
    return ProcedureResult(
        procedure=procedure,
        beta_init=np.asarray(beta_init, dtype=float),
        stages=(stage,),
        beta_hat=beta_hat,
        lambda_n=float(lambda_n),
        truncated=truncated,
    )


def thresholded_lasso(
    instance: ProblemInstance,
    lambda_n: float,
    t0: float,
    path: LassoPath | None = None,
) -> ProcedureResult:
    """Lasso at ``lambda_n``, hard threshold at ``t0``, OLS refit.

    ``path`` may supply a precomputed LARS path for the instance; the
    initial estimator is read off it by exact interpolation.
    """
    if lambda_n <= 0 or t0 <= 0:
        raise ValueError("lambda_n and t0 must be positive")
    if path is None:
        path = lars_path(instance.X.entries, instance.Y)
    beta_init = lasso_at(path, lambda_n)
    return _two_step("thresholded_lasso", instance, beta_init, lambda_n, t0)


def gauss_dantzig(instance: ProblemInstance, lambda_n: float, t0: float) -> ProcedureResult:
    """Dantzig selector at ``lambda_n``, hard threshold at ``t0``, OLS refit."""
    if lambda_n <= 0 or t0 <= 0:
        raise ValueError("lambda_n and t0 must be positive")
    beta_init = dantzig_selector(instance.X.entries, instance.Y, lambda_n).beta
    return _two_step("gauss_dantzig", instance, beta_init, lambda_n, t0)


def iterative_multistep(
    instance: ProblemInstance,
    lambda_n: float,
    initial: str = "lasso",
    path: LassoPath | None = None,
) -> ProcedureResult:
    """Iterated thresholding with the data-driven levels t_i = 4 lambda_n sqrt(|S_i|).

    Stage 0 keeps coordinates with |beta_init| strictly above 4 lambda_n.
    Two rounds follow, each thresholding the current estimate at
    4 lambda_n sqrt(|S_i|) within the previous set and refitting by OLS,
    so the selected sets are nested by construction.
    """
    if lambda_n <= 0:
        raise ValueError("lambda_n must be positive")
    X, Y = instance.X.entries, instance.Y
    if initial == "lasso":
        if path is None:
            path = lars_path(X, Y)
        beta_init = lasso_at(path, lambda_n)
    elif initial == "dantzig":
        beta_init = dantzig_selector(X, Y, lambda_n).beta
    else:
        raise ValueError(f"unknown initial estimator {initial!r}")

    truncated = False
    S = np.flatnonzero(np.abs(beta_init) > 4.0 * lambda_n)
    S, trunc = _cap_to_n(S, beta_init, instance.n)
    truncated |= trunc
    stages = [Stage(threshold=4.0 * lambda_n, selected=tuple(int(j) for j in S), beta=beta_init)]

    current = beta_init
    for _ in range(2):
        t_i = 4.0 * lambda_n * np.sqrt(S.size)
        S_next = S[np.abs(current[S]) >= t_i] if S.size else S
        S_next, trunc = _cap_to_n(S_next, current, instance.n)
        truncated |= trunc
        refit_beta = ols(X, Y, S_next)
        stages.append(
            Stage(threshold=float(t_i), selected=tuple(int(j) for j in S_next), beta=refit_beta)
        )
        S, current = S_next, refit_beta

    return ProcedureResult(
        procedure="iterative_multistep",
        beta_init=beta_init,
        stages=tuple(stages),
        beta_hat=current,
        lambda_n=float(lambda_n),
        truncated=truncated,
    )


def adaptive_lasso(
    instance: ProblemInstance,
    beta_init: np.ndarray,
    lambda_grid=None,
) -> list[np.ndarray]:
    """Second-stage lasso with weights 1/|beta_init_j| on supp(beta_init).

    Zero components of ``beta_init`` are removed.  Implemented by the
    rescaling identity: running the plain path on columns scaled by
    |beta_init_j| and unscaling the coefficients solves the weighted
    problem exactly.  Returns the full-length coefficient vector at every
    knot of the second-stage path, or at ``lambda_grid`` (second-stage
    penalty units) when given.
    """
    beta_init = np.asarray(beta_init, dtype=float)
    keep = np.flatnonzero(beta_init)
    if keep.size == 0:
        raise ValueError("adaptive lasso needs a nonzero initial estimator")
    weights = np.abs(beta_init[keep])
    X_scaled = instance.X.entries[:, keep] * weights
    path = lars_path(X_scaled, instance.Y)

    def unscale(b):
        full = np.zeros(instance.p)
        full[keep] = weights * b
        return full

    if lambda_grid is None:
        return [unscale(path.betas[k]) for k in range(path.lambdas.size)]
    return [unscale(lasso_at(path, lam)) for lam in lambda_grid]


def optimal_path_estimate(path: LassoPath, truth: GroundTruth, criterion: str) -> np.ndarray:
    """Oracle-tuned knot of the path: minimum l2 error or best support match.

    ``best_support_match`` maximizes TP - FP with l2 error breaking ties.
    """
    if path.lambdas.size == 0:
        raise ValueError("empty path")
    if criterion == "min_l2_loss":
        losses = [ell2_loss(path.betas[k], truth) for k in range(path.lambdas.size)]
        return path.betas[int(np.argmin(losses))].copy()
    if criterion == "best_support_match":
        best_key = None
        best_beta = None
        for k in range(path.lambdas.size):
            c = confusion(path.betas[k], truth)
            key = (-(c.tp - c.fp), ell2_loss(path.betas[k], truth))
            if best_key is None or key < best_key:
                best_key = key
                best_beta = path.betas[k]
        return best_beta.copy()
    raise ValueError(f"unknown criterion {criterion!r}")
