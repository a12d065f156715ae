"""Lasso solvers: LARS homotopy for the full path, cyclic coordinate
descent as an independent cross-check, and the KKT certificate both are
judged against.

The objective, fixed across the package, is

    f(beta) = ||Y - X beta||_2^2 / (2 n) + lam ||beta||_1

with the single gradient convention g = -X^T (Y - X beta) / n, so that
stationarity reads g_j + lam * sign(beta_j) = 0 on the active set and
|g_j| <= lam elsewhere.

The homotopy tracks correlations c = X^T (Y - X beta) / n.  Along each
segment the active |c_j| all equal the penalty and decrease at unit rate;
coefficients are piecewise linear in the penalty between events, which is
what makes exact interpolation in :func:`lasso_at` valid.  Events are a
variable joining (its correlation reaching the active level), a variable
leaving (its coefficient crossing zero; the lasso modification), or the
penalty reaching zero.  Ties between joining variables are broken by
lowest index so the path is deterministic.  Active-set systems are solved
through a Cholesky factor of the active Gram block, extended by one row
per join and refactored on the (rare) drops.  Correlations are recomputed
from scratch at every knot to stop floating-point drift from accumulating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DegenerateDesignError, NonConvergenceError

_RELTOL_PD = 1e-12  # relative pivot tolerance for "numerically singular"


@dataclass(frozen=True)
class LassoPath:
    """Full regularization path: knot penalties, coefficients, active sets.

    ``lambdas`` is strictly decreasing, starting at lam_max = ||X^T Y / n||_inf
    and ending at (numerical) zero; ``betas[k]`` solves the lasso at
    ``lambdas[k]``; coefficients are piecewise linear in between.
    """

    lambdas: np.ndarray  # (K,)
    betas: np.ndarray  # (K, p)
    actives: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        lambdas = np.array(self.lambdas, dtype=float)
        betas = np.array(self.betas, dtype=float)
        if lambdas.ndim != 1 or betas.ndim != 2 or betas.shape[0] != lambdas.size:
            raise ValueError("inconsistent path arrays")
        if lambdas.size > 1 and not np.all(np.diff(lambdas) < 0):
            raise ValueError("knot penalties must be strictly decreasing")
        lambdas.setflags(write=False)
        betas.setflags(write=False)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "betas", betas)

    @property
    def knots(self) -> list[tuple[float, np.ndarray, tuple[int, ...]]]:
        return [
            (float(self.lambdas[k]), self.betas[k], self.actives[k])
            for k in range(self.lambdas.size)
        ]

    @property
    def lambda_max(self) -> float:
        return float(self.lambdas[0])


class _ActiveCholesky:
    """Cholesky factor of the active Gram block, grown one column at a time."""

    def __init__(self, G: np.ndarray):
        self.G = G
        self.L = np.zeros((0, 0))

    def add(self, active: list[int], j: int) -> None:
        k = len(active)
        gjj = self.G[j, j]
        if k == 0:
            if gjj <= 0:
                raise DegenerateDesignError([j])
            self.L = np.array([[np.sqrt(gjj)]])
            return
        g = self.G[active, j]
        w = solve_triangular(self.L, g, lower=True)
        d = gjj - w @ w
        if d <= _RELTOL_PD * gjj:
            raise DegenerateDesignError(sorted(active + [j]))
        L = np.zeros((k + 1, k + 1))
        L[:k, :k] = self.L
        L[k, :k] = w
        L[k, k] = np.sqrt(d)
        self.L = L

    def refactor(self, active: list[int]) -> None:
        if not active:
            self.L = np.zeros((0, 0))
            return
        block = self.G[np.ix_(active, active)]
        try:
            self.L = np.linalg.cholesky(block)
        except np.linalg.LinAlgError:
            raise DegenerateDesignError(sorted(active)) from None

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        y = solve_triangular(self.L, rhs, lower=True)
        return solve_triangular(self.L, y, lower=True, trans="T")


def lars_path(
    X: np.ndarray,
    Y: np.ndarray,
    max_knots: int | None = None,
    gram: np.ndarray | None = None,
) -> LassoPath:
    """LARS homotopy with the lasso modification (variables may leave).

    ``gram`` may supply a precomputed X^T X / n, which the harness reuses
    across replications that share the design.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n, p = X.shape
    if np.any(np.einsum("ij,ij->j", X, X) == 0.0):
        raise ValueError("design has a zero column")
    G = X.T @ X / n if gram is None else gram
    cap = min(n, p)
    if max_knots is None:
        max_knots = 10 * cap + p + 16

    beta = np.zeros(p)
    c = X.T @ Y / n
    lam = float(np.max(np.abs(c))) if p else 0.0
    lam_floor = 1e-12 * lam

    knot_lams = [lam]
    knot_betas = [beta.copy()]
    knot_actives: list[tuple[int, ...]] = [()]
    if lam <= 0.0:
        return LassoPath(np.array(knot_lams), np.array(knot_betas), tuple(knot_actives))

    def record(lam_new: float, active: list[int]) -> None:
        # merge events that occur at (numerically) the same penalty
        if lam_new < knot_lams[-1]:
            knot_lams.append(lam_new)
            knot_betas.append(beta.copy())
            knot_actives.append(tuple(sorted(active)))
        else:
            knot_betas[-1] = beta.copy()
            knot_actives[-1] = tuple(sorted(active))

    def finish() -> LassoPath:
        return LassoPath(np.array(knot_lams), np.array(knot_betas), tuple(knot_actives))

    active: list[int] = [int(np.argmax(np.abs(c)))]  # lowest index wins ties
    chol = _ActiveCholesky(G)
    chol.add([], active[0])
    inactive_mask = np.ones(p, dtype=bool)
    inactive_mask[active[0]] = False

    for _ in range(4 * max_knots + 64):
        if len(knot_lams) > max_knots:
            break
        sigma = np.sign(c[active])
        delta = chol.solve(sigma)
        a = G[:, active] @ delta

        gamma = lam  # default event: the penalty hits zero
        event = ("end", -1)

        if len(active) < cap:
            idx = np.flatnonzero(inactive_mask)
            if idx.size:
                cj, aj = c[idx], a[idx]
                with np.errstate(divide="ignore", invalid="ignore"):
                    for cand in ((lam - cj) / (1.0 - aj), (lam + cj) / (1.0 + aj)):
                        vals = np.where(np.isfinite(cand) & (cand > 0.0), cand, np.inf)
                        k = int(np.argmin(vals))  # first minimum: lowest index on ties
                        if vals[k] < gamma:
                            gamma = float(vals[k])
                            event = ("join", int(idx[k]))

        beta_a = beta[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = -beta_a / delta
        vals = np.where(np.isfinite(ratios) & (ratios > 0.0), ratios, np.inf)
        k = int(np.argmin(vals))
        if vals[k] <= gamma:  # a drop beats a join at the same step length
            gamma = float(vals[k])
            event = ("drop", int(active[k]))

        beta[active] = beta_a + gamma * delta

        if event[0] == "end":
            record(0.0, active)
            return finish()
        if event[0] == "drop":
            j = event[1]
            beta[j] = 0.0
            active.remove(j)
            inactive_mask[j] = True
            chol.refactor(active)
        else:
            j = event[1]
            chol.add(active, j)
            active.append(j)
            inactive_mask[j] = False

        # refresh correlations from scratch at the knot
        c = X.T @ (Y - X @ beta) / n
        lam = float(np.max(np.abs(c)))
        record(lam, active)
        if lam <= lam_floor or not active:
            return finish()

    raise NonConvergenceError(
        f"LARS exceeded max_knots={max_knots}; the path appears to be cycling",
        residual=float(lam),
    )


def lasso_at(path: LassoPath, lambda_n: float) -> np.ndarray:
    """Exact lasso solution at ``lambda_n``, interpolated on the path.

    Valid because coefficients are piecewise linear in the penalty.
    Penalties at or above lam_max return the zero vector.
    """
    if lambda_n < 0:
        raise ValueError("lambda_n must be nonnegative")
    lams = path.lambdas
    if lambda_n >= lams[0]:
        return np.zeros(path.betas.shape[1])
    if lambda_n <= lams[-1]:
        return path.betas[-1].copy()
    i = int(np.argmax(lams <= lambda_n))
    if lams[i] == lambda_n:
        return path.betas[i].copy()
    lo, hi = lams[i], lams[i - 1]
    w = (hi - lambda_n) / (hi - lo)
    return (1.0 - w) * path.betas[i - 1] + w * path.betas[i]


def cd_lasso(
    X: np.ndarray,
    Y: np.ndarray,
    lambda_n: float,
    tol: float = 1e-9,
    max_iters: int = 10_000,
) -> np.ndarray:
    """Cyclic coordinate descent for the lasso at a single penalty.

    Sweeps run until the largest coordinate update falls below
    tol * (1 + ||beta||_inf) and the KKT residual is below 10 * tol.
    Kept deliberately independent of the homotopy code so the two can
    cross-check each other.
    """
    if lambda_n <= 0:
        raise ValueError("cd_lasso requires lambda_n > 0")
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n, p = X.shape
    G = X.T @ X / n
    z = X.T @ Y / n
    diag = np.diag(G).copy()
    if np.any(diag == 0.0):
        raise ValueError("design has a zero column")

    beta = np.zeros(p)
    q = np.zeros(p)  # q = G @ beta, maintained incrementally
    for _ in range(max_iters):
        max_step = 0.0
        for j in range(p):
            bj = beta[j]
            rho = z[j] - q[j] + diag[j] * bj
            mag = abs(rho) - lambda_n
            new = np.sign(rho) * mag / diag[j] if mag > 0.0 else 0.0
            if new != bj:
                q += G[:, j] * (new - bj)
                beta[j] = new
                step = abs(new - bj)
                if step > max_step:
                    max_step = step
        if max_step < tol * (1.0 + np.max(np.abs(beta))):
            res = kkt_residual(X, Y, beta, lambda_n)
            if res <= 10.0 * tol:
                return beta
    raise NonConvergenceError(
        f"coordinate descent did not converge in {max_iters} sweeps",
        residual=kkt_residual(X, Y, beta, lambda_n),
    )


def kkt_residual(X: np.ndarray, Y: np.ndarray, beta: np.ndarray, lambda_n: float) -> float:
    """Max violation of the lasso stationarity conditions at ``beta``.

    Zero (up to solver tolerance) certifies optimality: active coordinates
    must satisfy g_j = -lam sign(beta_j) and inactive ones |g_j| <= lam.
    """
    X = np.asarray(X, dtype=float)
    beta = np.asarray(beta, dtype=float)
    n = X.shape[0]
    g = -X.T @ (np.asarray(Y, dtype=float) - X @ beta) / n
    res = 0.0
    on = beta != 0.0
    if np.any(on):
        res = float(np.max(np.abs(g[on] + lambda_n * np.sign(beta[on]))))
    off = ~on
    if np.any(off):
        res = max(res, float(np.max(np.maximum(0.0, np.abs(g[off]) - lambda_n))))
    return res


def dump_path_csv(path: LassoPath, file) -> None:
    """Write the nonzero path coefficients as (knot, lambda, j, beta_j) rows."""
    close = False
    if isinstance(file, (str, bytes)) or hasattr(file, "__fspath__"):
        file = open(file, "w", newline="")
        close = True
    try:
        file.write("knot,lambda,j,beta_j\n")
        for k, (lam, beta, _) in enumerate(path.knots):
            for j in np.flatnonzero(beta):
                file.write(f"{k},{lam!r},{j},{beta[j]!r}\n")
    finally:
        if close:
            file.close()
