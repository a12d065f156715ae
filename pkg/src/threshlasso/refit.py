"""Ordinary least squares on a selected model, the refit stage shared by
every thresholding procedure.

Solves through a Householder QR of the selected column block rather than
the normal equations, to avoid squaring the condition number.  Rank is
screened with singular values at 1e-8 relative tolerance; the theory
assumes well-conditioned active blocks but the code has to detect
violations explicitly.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import RankDeficiencyError
from .model import GroundTruth

_RANK_RTOL = 1e-8


def _column_block(X: np.ndarray, I) -> tuple[np.ndarray, np.ndarray]:
    I = np.asarray(I, dtype=int)
    if I.size != np.unique(I).size:
        raise ValueError("selected index set contains duplicates")
    return I, X[:, I]


def ols(X: np.ndarray, Y: np.ndarray, I) -> np.ndarray:
    """Least-squares coefficients on columns ``I``, zero elsewhere.

    The empty model returns the zero vector.  Raises
    :class:`RankDeficiencyError` when the selected block is numerically
    rank deficient and ``ValueError`` when |I| exceeds n.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n, p = X.shape
    beta = np.zeros(p)
    I, XI = _column_block(X, I)
    if I.size == 0:
        return beta
    if I.size > n:
        raise ValueError(f"cannot refit {I.size} columns with only {n} samples")
    svals = np.linalg.svd(XI, compute_uv=False)
    if svals[-1] < _RANK_RTOL * svals[0]:
        raise RankDeficiencyError(sorted(int(j) for j in I))
    Q, R = np.linalg.qr(XI)
    beta[I] = solve_triangular(R, Q.T @ Y, lower=False)
    return beta


def ols_loss_decomposition(
    X: np.ndarray, truth: GroundTruth, I, sigma: float
) -> tuple[float, float]:
    """Bias/variance split of the expected prediction loss of the refit.

    Returns (||(P_I - Id) X_{I^c} beta_{I^c}||^2 / n, |I| sigma^2 / n),
    whose sum is E ||X beta_hat_I - X beta||^2 / n over the noise.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    I, XI = _column_block(X, I)
    if I.size > n:
        raise ValueError(f"cannot refit {I.size} columns with only {n} samples")
    mask = np.ones(p, dtype=bool)
    mask[I] = False
    missing = X[:, mask] @ truth.beta[mask]
    if I.size == 0:
        bias_sq = float(missing @ missing) / n
        return bias_sq, 0.0
    svals = np.linalg.svd(XI, compute_uv=False)
    if svals[-1] < _RANK_RTOL * svals[0]:
        raise RankDeficiencyError(sorted(int(j) for j in I))
    Q, _ = np.linalg.qr(XI)
    resid = Q @ (Q.T @ missing) - missing
    bias_sq = float(resid @ resid) / n
    variance = I.size * sigma**2 / n
    return bias_sq, variance
