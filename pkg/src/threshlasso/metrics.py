"""Support-recovery and estimation-error metrics.

Supports are read off by an exact nonzero test: the OLS refit leaves exact
zeros off the selected model, so no epsilon thresholding is applied here
(doing so would silently double-threshold the estimators under study).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Confusion:
    """Support-recovery confusion counts and rates.

    Conventions for the degenerate edges: tpr = 1 when s = 0 (nothing to
    find) and fpr = 0 when s = p (nothing to falsely find).
    """

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def s(self) -> int:
        return self.tp + self.fn

    @property
    def p(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def fpr(self) -> float:
        denom = self.fp + self.tn
        return self.fp / denom if denom else 0.0

    @property
    def tpr(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 1.0


def confusion(beta_hat: np.ndarray, truth) -> Confusion:
    """Confusion counts of supp(beta_hat) against the true support."""
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta = np.asarray(truth.beta, dtype=float)
    if beta_hat.shape != beta.shape:
        raise ValueError("beta_hat and truth have different lengths")
    got = beta_hat != 0.0
    want = beta != 0.0
    tp = int(np.sum(got & want))
    fp = int(np.sum(got & ~want))
    fn = int(np.sum(~got & want))
    tn = int(np.sum(~got & ~want))
    return Confusion(tp=tp, fp=fp, fn=fn, tn=tn)


def ell2_loss(beta_hat: np.ndarray, truth) -> float:
    beta_hat = np.asarray(beta_hat, dtype=float)
    if beta_hat.shape != truth.beta.shape:
        raise ValueError("beta_hat and truth have different lengths")
    d = beta_hat - truth.beta
    return float(np.sqrt(d @ d))


def prediction_loss(X: np.ndarray, beta_hat: np.ndarray, truth) -> float:
    """||X beta_hat - X beta||_2 / sqrt(n)."""
    X = np.asarray(X, dtype=float)
    beta_hat = np.asarray(beta_hat, dtype=float)
    if X.shape[1] != beta_hat.shape[0] or beta_hat.shape != truth.beta.shape:
        raise ValueError("dimension mismatch")
    d = X @ (beta_hat - truth.beta)
    return float(np.sqrt(d @ d / X.shape[0]))


def ideal_risk_proxy(truth, sigma: float, n: int) -> float:
    """sum_i min(beta_i^2, sigma^2 / n), the oracle risk that normalizes rho^2."""
    beta = truth.beta
    return float(np.sum(np.minimum(beta**2, sigma**2 / n)))


def rho_squared(beta_hat: np.ndarray, truth, sigma: float, n: int) -> float:
    """Squared l2 error over the ideal risk proxy."""
    denom = ideal_risk_proxy(truth, sigma, n)
    if denom <= 0.0:
        raise ValueError("rho^2 is undefined for a zero target vector")
    return ell2_loss(beta_hat, truth) ** 2 / denom


def exact_sign_recovery(beta_hat: np.ndarray, truth) -> bool:
    """True iff sign(beta_hat_i) = sign(beta_i) for every i (sign(0) = 0)."""
    beta_hat = np.asarray(beta_hat, dtype=float)
    if beta_hat.shape != truth.beta.shape:
        raise ValueError("beta_hat and truth have different lengths")
    return bool(np.array_equal(np.sign(beta_hat), np.sign(truth.beta)))
