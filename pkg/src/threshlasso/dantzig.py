"""Dantzig selector: minimum-l1 estimation under a correlation constraint.

Solves

    min ||b||_1   subject to   ||X^T (Y - X b) / n||_inf <= lambda_n

as a dense LP.  With A = X^T X / n, z = X^T Y / n and the split b = u - v,
u, v >= 0, the constraint becomes the 2p inequalities
[A, -A] x <= z + lambda and [-A, A] x <= lambda - z over x = (u, v).

The LP is handed to HiGHS (scipy.optimize.linprog, method="highs"), which
runs a simplex with its own anti-cycling safeguards and returns an optimal
basic solution; primal/dual feasibility tolerances are pinned to 1e-9.
The problem is always feasible (b = 0 works once lambda_n >= ||z||_inf and
the least-squares solution otherwise at any lambda_n >= 0) and the
objective is bounded below by zero, so infeasible/unbounded statuses are
treated as internal errors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import NonConvergenceError

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}


@dataclass(frozen=True)
class DantzigSolution:
    """An optimal vertex of the Dantzig LP with its feasibility certificate."""

    beta: np.ndarray
    lambda_n: float
    l1_norm: float
    feasibility_gap: float

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        if self.feasibility_gap > 1e-7:
            raise NonConvergenceError(
                f"Dantzig solution violates its constraint by {self.feasibility_gap:.3e}",
                gap=self.feasibility_gap,
                objective=self.l1_norm,
            )


def ds_feasibility(X: np.ndarray, Y: np.ndarray, beta: np.ndarray, lambda_n: float) -> float:
    """||X^T (Y - X beta) / n||_inf - lambda_n; negative means strictly feasible."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    corr = X.T @ (np.asarray(Y, dtype=float) - X @ np.asarray(beta, dtype=float)) / n
    return float(np.max(np.abs(corr)) - lambda_n)


def dantzig_selector(X: np.ndarray, Y: np.ndarray, lambda_n: float) -> DantzigSolution:
    """Solve the Dantzig selector LP at constraint level ``lambda_n``."""
    if lambda_n < 0:
        raise ValueError("lambda_n must be nonnegative")
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n, p = X.shape
    A = X.T @ X / n
    z = X.T @ Y / n

    cost = np.ones(2 * p)
    A_ub = np.block([[A, -A], [-A, A]])
    b_ub = np.concatenate([z + lambda_n, lambda_n - z])
    res = linprog(
        cost,
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=(0, None),
        method="highs",
        options=_HIGHS_OPTIONS,
    )
    if res.status == 1:
        raise NonConvergenceError(
            "LP iteration limit reached in the Dantzig selector",
            objective=float(np.sum(np.abs(res.x[:p] - res.x[p:]))) if res.x is not None else None,
            gap=None,
        )
    assert res.status == 0, f"Dantzig LP cannot be infeasible/unbounded: {res.message}"

    beta = res.x[:p] - res.x[p:]
    gap = max(0.0, ds_feasibility(X, Y, beta, lambda_n))
    return DantzigSolution(
        beta=beta,
        lambda_n=float(lambda_n),
        l1_norm=float(np.sum(np.abs(beta))),
        feasibility_gap=gap,
    )
