"""Brute-force incoherence diagnostics, oracle quantities, theory
constants, and per-realization audits of the estimation bounds.

Everything here is desk-scale by design: restricted eigenvalues and
orthogonality constants are combinatorial objects, so exact values are
only computed when the full subset enumeration fits a budget, and sampled
modes are clearly labeled one-sided estimates (an upper estimate for a
minimum, a lower estimate for a maximum).

The restricted-eigenvalue constant itself is never computed exactly;
callers get the uncertainty-principle upper bound (valid for cone opening
k0 = 1) and, separately, a sampled feasible-point lower estimate.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationBudgetError, InvalidRegimeError, PrecisionError
from .model import GroundTruth, ProblemInstance, noise_scale
from .procedures import ProcedureResult

DEFAULT_BUDGET = 2_000_000


def _gram(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return X.T @ X / X.shape[0]


def _check_budget(count: int, budget: int, what: str) -> None:
    if count > budget:
        raise EnumerationBudgetError(
            f"{what} needs {count} subsets, over the budget of {budget}; "
            "use sampled mode instead"
        )


def sparse_eigs(
    X: np.ndarray,
    m: int,
    mode: str = "exact",
    trials: int = 1000,
    rng: np.random.Generator | None = None,
    budget: int = DEFAULT_BUDGET,
) -> tuple[float, float]:
    """Extremes of the size-m restricted spectrum of X^T X / n.

    Exact mode enumerates every size-m subset.  Sampled mode inspects
    ``trials`` random subsets, so the returned minimum is only an upper
    estimate of Lambda_min(m) and the maximum a lower estimate of
    Lambda_max(m).
    """
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    if not 1 <= m <= p:
        raise ValueError(f"need 1 <= m <= p, got m={m}")
    G = _gram(X)
    if m == 1:
        d = np.diag(G)
        return float(np.min(d)), float(np.max(d))
    if mode == "exact":
        _check_budget(math.comb(p, m), budget, f"sparse_eigs(m={m})")
        subsets = itertools.combinations(range(p), m)
    elif mode == "sampled":
        rng = rng or np.random.default_rng(0)
        subsets = (rng.choice(p, size=m, replace=False) for _ in range(trials))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    lo, hi = np.inf, -np.inf
    for T in subsets:
        T = list(T)
        w = np.linalg.eigvalsh(G[np.ix_(T, T)])
        lo = min(lo, w[0])
        hi = max(hi, w[-1])
    return float(lo), float(hi)


def delta_s(
    X: np.ndarray,
    s: int,
    mode: str = "exact",
    trials: int = 1000,
    rng: np.random.Generator | None = None,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Restricted isometry constant: worst spectral distortion over sizes <= s."""
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    if not 1 <= s <= p:
        raise ValueError(f"need 1 <= s <= p, got s={s}")
    if mode == "exact":
        _check_budget(sum(math.comb(p, m) for m in range(1, s + 1)), budget, f"delta_s(s={s})")
    worst = 0.0
    for m in range(1, s + 1):
        lo, hi = sparse_eigs(X, m, mode=mode, trials=trials, rng=rng, budget=budget)
        worst = max(worst, hi - 1.0, 1.0 - lo)
    return worst


def theta(
    X: np.ndarray,
    s: int,
    s_prime: int,
    mode: str = "exact",
    trials: int = 1000,
    rng: np.random.Generator | None = None,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Restricted orthogonality constant for disjoint blocks of sizes (s, s').

    The worst normalized cross-correlation ||X_T^T X_T' / n||_2 over
    disjoint T, T'.  Smaller sizes are dominated by these, so enumerating
    the exact sizes suffices.
    """
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    if s < 1 or s_prime < 1 or s + s_prime > p:
        raise ValueError("need s, s' >= 1 and s + s' <= p")
    G = _gram(X)
    if mode == "exact":
        _check_budget(
            math.comb(p, s) * math.comb(p - s, s_prime), budget, f"theta({s},{s_prime})"
        )
        def pairs():
            for T in itertools.combinations(range(p), s):
                rest = [j for j in range(p) if j not in T]
                for Tp in itertools.combinations(rest, s_prime):
                    yield T, Tp
    elif mode == "sampled":
        rng_ = rng or np.random.default_rng(0)
        def pairs():
            for _ in range(trials):
                both = rng_.choice(p, size=s + s_prime, replace=False)
                yield both[:s], both[s:]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    worst = 0.0
    for T, Tp in pairs():
        block = G[np.ix_(list(T), list(Tp))]
        worst = max(worst, float(np.linalg.norm(block, 2)))
    return worst


def re_constant_upper(
    X: np.ndarray, s: int, k0: float, delta2s: float, theta_s_2s: float
) -> float | None:
    """Uncertainty-principle upper bound on the restricted-eigenvalue constant.

    sqrt(Lambda_min(2s)) / (Lambda_min(2s) - theta_{s,2s}), valid for cone
    opening k0 = 1 only.  Returns None when the bound is vacuous (k0 != 1
    or Lambda_min(2s) <= theta).
    """
    if k0 != 1:
        return None
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    m = min(2 * s, p)
    lmin, _ = sparse_eigs(X, m, mode="exact")
    assert lmin >= 1.0 - delta2s - 1e-9, "delta_2s inconsistent with Lambda_min(2s)"
    if lmin <= theta_s_2s:
        return None
    return float(np.sqrt(lmin) / (lmin - theta_s_2s))


def re_constant_sampled_lower(
    X: np.ndarray,
    s: int,
    k0: float,
    trials: int = 500,
    rng: np.random.Generator | None = None,
) -> float:
    """Sampled lower estimate of K(s, k0) from random cone-feasible vectors.

    Every sampled vector certifies K >= ||v_J0||_2 sqrt(n) / ||X v||_2, so
    the returned value never exceeds the true constant.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    rng = rng or np.random.default_rng(0)
    best = 0.0
    for _ in range(trials):
        J0 = rng.choice(p, size=s, replace=False)
        v = np.zeros(p)
        v[J0] = rng.standard_normal(s)
        rest = np.setdiff1d(np.arange(p), J0)
        if rest.size:
            u = rng.standard_normal(rest.size)
            l1_budget = k0 * np.sum(np.abs(v[J0])) * rng.uniform()
            u *= l1_budget / np.sum(np.abs(u))
            v[rest] = u
        denom = np.linalg.norm(X @ v) / np.sqrt(n)
        if denom > 0:
            best = max(best, float(np.linalg.norm(v[J0]) / denom))
    return best


@dataclass(frozen=True)
class IncoherenceReport:
    """Exact (or sampled) incoherence tables for one design.

    ``lambda_min``/``lambda_max`` map subset size m to the restricted
    eigenvalue extremes, ``delta`` to the isometry constant of size m
    (monotone closure), and ``theta`` maps size pairs to orthogonality
    constants.  ``k_upper`` is the UUP-derived RE-constant bound (k0 = 1).
    """

    s: int
    lambda_min: dict
    lambda_max: dict
    delta: dict
    theta: dict
    k_upper: float | None
    enumerated: bool

    def to_json_dict(self) -> dict:
        return {
            "s": self.s,
            "enumerated": self.enumerated,
            "k_upper": self.k_upper,
            "lambda_min": {str(m): v for m, v in sorted(self.lambda_min.items())},
            "lambda_max": {str(m): v for m, v in sorted(self.lambda_max.items())},
            "delta": {str(m): v for m, v in sorted(self.delta.items())},
            "theta": {f"{a},{b}": v for (a, b), v in sorted(self.theta.items())},
        }


def incoherence_report(
    X: np.ndarray,
    s: int,
    mode: str = "exact",
    pairs: tuple = (),
    trials: int = 1000,
    rng: np.random.Generator | None = None,
    budget: int = DEFAULT_BUDGET,
) -> IncoherenceReport:
    """Tabulate Lambda/delta for sizes up to 2s plus requested theta pairs."""
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    top = min(2 * s, p)
    lambda_min, lambda_max, delta = {}, {}, {}
    worst = 0.0
    for m in range(1, top + 1):
        lo, hi = sparse_eigs(X, m, mode=mode, trials=trials, rng=rng, budget=budget)
        lambda_min[m] = lo
        lambda_max[m] = hi
        worst = max(worst, hi - 1.0, 1.0 - lo)
        delta[m] = worst
    theta_tab = {}
    wanted = set(tuple(pr) for pr in pairs)
    if s + 2 * s <= p:
        wanted.add((s, 2 * s))
    for a, b in sorted(wanted):
        if a >= 1 and b >= 1 and a + b <= p:
            theta_tab[(a, b)] = theta(X, a, b, mode=mode, trials=trials, rng=rng, budget=budget)
    k_upper = None
    if (s, 2 * s) in theta_tab:
        lmin = lambda_min[top]
        th = theta_tab[(s, 2 * s)]
        if lmin > th:
            k_upper = float(np.sqrt(lmin) / (lmin - th))
    return IncoherenceReport(
        s=s,
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        delta=delta,
        theta=theta_tab,
        k_upper=k_upper,
        enumerated=(mode == "exact"),
    )


@dataclass(frozen=True)
class OracleQuantities:
    """Noise-relative bookkeeping of a target vector.

    ``s0`` is the smallest integer with sum_i min(beta_i^2, lam^2 sigma^2)
    <= s0 lam^2 sigma^2; ``T0`` holds the positions of the s0 largest
    magnitudes (ties to the lowest index); ``A0`` the positions strictly
    above lam*sigma.
    """

    s0: int
    lam: float
    lam_sigma: float
    lambda_sap: float
    a: float
    T0: tuple[int, ...]
    A0: tuple[int, ...]
    a0: int
    beta_min: float
    beta_min_A0: float
    min_sum: float


def oracle_quantities(
    truth: GroundTruth, p: int, n: int, sigma: float, a: float = 0.0
) -> OracleQuantities:
    if sigma <= 0:
        raise ValueError("oracle quantities need sigma > 0")
    if a < 0:
        raise ValueError("a must be nonnegative")
    beta = truth.beta
    if beta.shape[0] != p:
        raise ValueError("truth dimension disagrees with p")
    lam = noise_scale(p, n)
    unit = (lam * sigma) ** 2
    min_sum = float(np.sum(np.minimum(beta**2, unit)))
    s0 = int(np.ceil(min_sum / unit - 1e-9))
    order = np.lexsort((np.arange(p), -np.abs(beta)))
    T0 = tuple(int(j) for j in np.sort(order[:s0]))
    A0 = tuple(int(j) for j in np.flatnonzero(np.abs(beta) > lam * sigma))
    beta_min_A0 = float(np.min(np.abs(beta[list(A0)]))) if A0 else float("inf")
    return OracleQuantities(
        s0=s0,
        lam=lam,
        lam_sigma=lam * sigma,
        lambda_sap=float(sigma * np.sqrt(1.0 + a) * lam),
        a=float(a),
        T0=T0,
        A0=A0,
        a0=len(A0),
        beta_min=truth.beta_min,
        beta_min_A0=beta_min_A0,
        min_sum=min_sum,
    )


def counting_bound_check(
    truth: GroundTruth, p: int, n: int, sigma: float, c_prime: float
) -> bool:
    """Check the tail-count bound: few coefficients outside T0 sit above
    sqrt(log p / (c' n)) sigma in magnitude."""
    if c_prime <= 0.5:
        raise ValueError("the counting bound requires c' > 1/2")
    q = oracle_quantities(truth, p, n, sigma)
    cutoff = np.sqrt(np.log(p) / (c_prime * n)) * sigma
    outside = np.ones(p, dtype=bool)
    outside[list(q.T0)] = False
    count = int(np.sum(np.abs(truth.beta[outside]) >= cutoff))
    return count <= (2.0 * c_prime - 1.0) * (q.s0 - q.a0) + 1e-12


def subset_mse(X: np.ndarray, truth: GroundTruth, sigma: float, I) -> float:
    """Closed-form E||beta_hat_I - beta||^2 for the OLS refit on I."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    I = list(I)
    beta = truth.beta
    mask = np.ones(p, dtype=bool)
    mask[I] = False
    tail = float(beta[mask] @ beta[mask])
    if not I:
        return tail
    G = _gram(X)
    Gb = G[np.ix_(I, I)]
    cross = G[np.ix_(I, np.flatnonzero(mask))] @ beta[mask]
    try:
        shift = np.linalg.solve(Gb, cross)
        trace = float(np.trace(np.linalg.inv(Gb))) / n
    except np.linalg.LinAlgError:
        return float("inf")
    return tail + float(shift @ shift) + sigma**2 * trace


def subset_mse_monte_carlo(
    X: np.ndarray,
    truth: GroundTruth,
    sigma: float,
    I,
    reps: int,
    rng: np.random.Generator,
) -> float:
    """Monte-Carlo validation twin of :func:`subset_mse`."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    I = list(I)
    total = 0.0
    from .refit import ols  # local import to avoid a cycle at module load

    signal = X @ truth.beta
    for _ in range(reps):
        Y = signal + sigma * rng.standard_normal(n)
        bh = ols(X, Y, I)
        total += float(np.sum((bh - truth.beta) ** 2))
    return total / reps


def ideal_estimator_mse(
    X: np.ndarray,
    truth: GroundTruth,
    sigma: float,
    s: int,
    mc_reps: int = 0,
    subset_budget: int = DEFAULT_BUDGET,
    rng: np.random.Generator | None = None,
) -> float:
    """Risk of the ideal subset-OLS estimator: min over |I| <= s of
    E||beta_hat_I - beta||^2.

    The per-subset expectation is evaluated in closed form; pass
    ``mc_reps > 0`` to replace it with a Monte-Carlo average (only useful
    for validating the closed form).
    """
    X = np.asarray(X, dtype=float)
    p = X.shape[1]
    if not 0 <= s <= p:
        raise ValueError("need 0 <= s <= p")
    count = sum(math.comb(p, k) for k in range(s + 1))
    _check_budget(count, subset_budget, f"ideal_estimator_mse(s={s})")
    if mc_reps > 0 and rng is None:
        raise ValueError("Monte-Carlo mode needs an rng")
    best = np.inf
    for k in range(s + 1):
        for I in itertools.combinations(range(p), k):
            if mc_reps > 0:
                val = subset_mse_monte_carlo(X, truth, sigma, I, mc_reps, rng)
            else:
                val = subset_mse(X, truth, sigma, I)
            best = min(best, val)
    return float(best)


@dataclass(frozen=True)
class DSConstants:
    c0: float
    c0_prime: float
    c1: float
    c2: float
    c3: float


def ds_constants(
    delta: float,
    theta_s_2s: float,
    a: float,
    tau: float,
    C4: float,
    lambda_min_2s0: float | None = None,
) -> DSConstants:
    """Constants of the Dantzig-selector oracle analysis.

    ``lambda_min_2s0`` enters only C3; it defaults to its lower bound
    1 - delta when not supplied.
    """
    denom = 1.0 - delta - theta_s_2s
    if denom <= 0:
        raise InvalidRegimeError("need delta + theta < 1")
    if tau <= 0 or a < 0 or C4 < 0:
        raise ValueError("need tau > 0, a >= 0, C4 >= 0")
    c0 = 2.0 * np.sqrt(2.0) * (1.0 + (1.0 - delta**2) / denom) + (
        1.0 + 1.0 / np.sqrt(2.0)
    ) * (1.0 + delta) ** 2 / denom
    c0p = c0 / denom + theta_s_2s * (1.0 + delta) / denom**2
    c1 = c0p + (1.0 + delta) / denom
    c2 = 2.0 * c0p + (1.0 + delta) / denom
    lmin = lambda_min_2s0 if lambda_min_2s0 is not None else 1.0 - delta
    if lmin <= 0:
        raise InvalidRegimeError("need Lambda_min(2 s0) > 0")
    c3 = np.sqrt(
        3.0 * (np.sqrt(1.0 + a) + 1.0 / tau) ** 2 * ((c0p + C4) ** 2 + 1.0)
        + 4.0 * (1.0 + a) / lmin**2
    )
    return DSConstants(float(c0), float(c0p), float(c1), float(c2), float(c3))


def lasso_oracle_constants(
    K_s0_6: float,
    lambda_max_s_minus_s0: float,
    lambda_min_2s0: float,
    theta_s0_2s0: float,
    d0: float,
) -> tuple[float, float]:
    """(D0, D1) of the lasso oracle analysis, by direct evaluation."""
    if K_s0_6 <= 0 or lambda_min_2s0 <= 0 or d0 <= 0:
        raise ValueError("inputs must be positive")
    if lambda_max_s_minus_s0 < 0 or theta_s0_2s0 < 0:
        raise ValueError("inputs must be nonnegative")
    K = K_s0_6
    lmax = lambda_max_s_minus_s0
    lmin = lambda_min_2s0
    D = (np.sqrt(2.0) + 1.0) * np.sqrt(lmax) / np.sqrt(lmin) + theta_s0_2s0 * lmax / lmin
    D0 = max(D, K * np.sqrt(2.0) * (2.0 * np.sqrt(lmax) + 3.0 * d0 * K))
    D1 = 2.0 * lmax / d0 + 9.0 * K**2 * d0 / 2.0
    return float(D0), float(D1)


@dataclass(frozen=True)
class ClauseCheck:
    """Outcome of one theorem clause on one realization.

    ``conclusion_holds`` is None when the premises fail (vacuous case);
    it is never reported as a failure then.
    """

    name: str
    premise_holds: bool
    conclusion_holds: bool | None
    details: dict

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "premise_holds": self.premise_holds,
            "conclusion_holds": self.conclusion_holds,
            "details": {k: v for k, v in self.details.items()},
        }


@dataclass(frozen=True)
class BoundCheck:
    """Per-realization audit of the estimation bounds."""

    t_a_holds: bool
    lambda_sap: float
    clauses: tuple[ClauseCheck, ...]

    def violations(self) -> list[ClauseCheck]:
        return [c for c in self.clauses if c.premise_holds and c.conclusion_holds is False]

    def to_json_dict(self) -> dict:
        return {
            "t_a_holds": self.t_a_holds,
            "lambda_sap": self.lambda_sap,
            "clauses": [c.to_json_dict() for c in self.clauses],
        }


def _theta_lookup(report: IncoherenceReport, X: np.ndarray, a: int, b: int) -> float:
    if a == 0 or b == 0:
        return 0.0
    key = (a, b)
    if key in report.theta:
        return report.theta[key]
    return theta(X, a, b, mode="exact")


def check_theorem_bounds(
    instance: ProblemInstance,
    result: ProcedureResult,
    report: IncoherenceReport,
    a: float = 0.0,
) -> BoundCheck:
    """Audit the variable-selection and loss bounds on one realization.

    Requires an exact incoherence report (tiny p) and oracle access to the
    realized noise.  Premises are measured directly: the initial-estimator
    norm bounds use the uncertainty-principle surrogate for the
    restricted-eigenvalue constant (the exact constant is out of reach),
    so a premise marked true is sufficient for its conclusion.  Clauses
    whose premises fail are reported as not-applicable, never as failures.
    """
    if not report.enumerated:
        raise PrecisionError("theorem audit requires an exact incoherence report")
    X = instance.X.entries
    n, p = X.shape
    truth = instance.truth
    beta = truth.beta
    sigma = instance.sigma
    s = truth.s
    lam = noise_scale(p, n)
    lam_sap = sigma * np.sqrt(1.0 + a) * lam
    eps = instance.Y - X @ beta
    t_a = bool(np.max(np.abs(X.T @ eps / n)) <= lam_sap)
    fuzz = 1e-9

    clauses = []

    I = np.asarray(result.selected, dtype=int)
    S = np.asarray(truth.support, dtype=int)
    S_D = np.setdiff1d(S, I)
    beta_D = float(np.linalg.norm(beta[S_D])) if S_D.size else 0.0
    beta_hat = result.beta_hat
    l2 = float(np.linalg.norm(beta_hat - beta))
    two_s = min(2 * s, p) if s else 0

    # --- OLS with missing variables -------------------------------------
    prem = (
        t_a
        and s >= 1
        and I.size + S_D.size <= 2 * s
        and (I.size == 0 or report.lambda_min.get(I.size, 0.0) > 0.0)
    )
    concl = None
    details = {"I": int(I.size), "S_D": int(S_D.size), "beta_D": beta_D}
    if prem:
        if I.size == 0:
            bound = beta_D**2
        else:
            th = _theta_lookup(report, X, int(I.size), int(S_D.size))
            lmin = report.lambda_min[I.size]
            bound = (th * beta_D + lam_sap * np.sqrt(I.size)) ** 2 / lmin**2 + beta_D**2
        concl = bool(l2**2 <= bound + fuzz)
        details["bound"] = float(bound)
        details["l2_sq"] = l2**2
    clauses.append(ClauseCheck("ols_missing_variables", bool(prem), concl, details))

    # --- prediction error: explicit display ------------------------------
    pred = float(np.linalg.norm(X @ (beta_hat - beta)) / np.sqrt(n))
    prem = t_a and s >= 1 and 1 <= I.size <= two_s
    concl = None
    details = {"pred": pred}
    if prem:
        lmax_s = report.lambda_max[min(s, p)]
        lmax_I = report.lambda_max[I.size]
        lmin_I = report.lambda_min[I.size]
        prem = lmin_I > 0.0
        if prem:
            bound = np.sqrt(lmax_s) * beta_D + np.sqrt(I.size * lmax_I) * lam_sap / lmin_I
            concl = bool(pred <= bound + fuzz)
            details["bound"] = float(bound)
    clauses.append(ClauseCheck("prediction_display", bool(prem), concl, details))

    # --- prediction error: constant-level bound C6 * lam * sigma * sqrt(s0)
    concl = None
    details = {}
    prem = (
        t_a
        and s >= 1
        and result.procedure in ("thresholded_lasso", "gauss_dantzig")
        and report.k_upper is not None
        and 1 <= I.size <= two_s
    )
    if prem:
        q = oracle_quantities(truth, p, n, sigma, a)
        t0 = result.stages[-1].threshold
        C4 = t0 / q.lam_sigma
        lmax_tail = report.lambda_max.get(s - q.s0, 0.0) if s > q.s0 else 0.0
        lmin_2s0 = report.lambda_min.get(min(2 * q.s0, p), 0.0)
        th_s0 = _theta_lookup(report, X, q.s0, min(2 * q.s0, p - q.s0)) if q.s0 else 0.0
        prem = (
            q.s0 >= 1
            and I.size <= 2 * q.s0
            and lmin_2s0 > 0.0
            and report.lambda_min[I.size] > 0.0
        )
        if prem:
            D0, _ = lasso_oracle_constants(
                report.k_upper, lmax_tail, lmin_2s0, th_s0,
                d0=result.lambda_n / q.lam_sigma,
            )
            drop_cap = np.sqrt((D0 + C4) ** 2 + 1.0) * q.lam_sigma * np.sqrt(q.s0)
            prem = bool(beta_D <= drop_cap + fuzz)  # measured beta_D premise
            if prem:
                lmax_I = report.lambda_max[I.size]
                lmin_I = report.lambda_min[I.size]
                f_I = np.sqrt(2.0 * (1.0 + a) * lmax_I) / lmin_I
                C6 = np.sqrt(report.lambda_max[min(s, p)]) * np.sqrt((D0 + C4) ** 2 + 1.0) + f_I
                bound = C6 * q.lam_sigma * np.sqrt(q.s0)
                concl = bool(pred <= bound + fuzz)
                details = {"C6": float(C6), "bound": float(bound), "pred": pred}
    clauses.append(ClauseCheck("prediction_constant", bool(prem), concl, details))

    # --- iterative multi-step selection and l2 bounds ---------------------
    concl = None
    details = {}
    prem = result.procedure == "iterative_multistep" and report.k_upper is not None and s >= 1
    if prem:
        K = report.k_upper
        B = result.lambda_n / lam_sap
        lmin_2s = report.lambda_min[two_s]
        B0, B1 = 4.0 * K**2, 3.0 * K**2
        B2 = 1.0 / (B * lmin_2s) if lmin_2s > 0 else np.inf
        v_init = result.beta_init - beta
        measured_2 = float(np.linalg.norm(v_init[S]))
        off = np.setdiff1d(np.arange(p), S)
        measured_1 = float(np.sum(np.abs(result.beta_init[off])))
        beta_floor = (
            max(np.sqrt(B1), 2.0) * 2.0 * np.sqrt(2.0) + max(B0, np.sqrt(2.0) * B2)
        ) * result.lambda_n * np.sqrt(s)
        prem = (
            t_a
            and lmin_2s > 0.0
            and B >= 2.0 - fuzz
            and measured_2 <= B0 * result.lambda_n * np.sqrt(s) + fuzz
            and measured_1 <= B1 * result.lambda_n * s + fuzz
            and s >= B1**2 / 16.0
            and truth.beta_min >= beta_floor
        )
        details = {
            "B": float(B),
            "beta_floor": float(beta_floor),
            "measured_l2_S": measured_2,
            "measured_l1_off": measured_1,
        }
        if prem:
            S1 = np.asarray(result.stages[1].selected, dtype=int)
            S2 = np.asarray(result.stages[2].selected, dtype=int)
            checks = [S1.size <= 2 * s, S2.size <= 2 * s]
            checks.append(set(S) <= set(S2.tolist()) <= set(S1.tolist()))
            if checks[0] and checks[1] and S1.size >= 1 and S2.size >= 1:
                for Si, bi in ((S1, result.stages[1].beta), (S2, result.stages[2].beta)):
                    lmin_i = report.lambda_min[Si.size]
                    ok = lmin_i > 0 and float(np.linalg.norm(bi - beta)) <= (
                        lam_sap * np.sqrt(Si.size) / lmin_i + fuzz
                    )
                    checks.append(bool(ok))
                lmin_1 = report.lambda_min[S1.size]
                extra_cap = 1.0 / (16.0 * B**2 * lmin_1**2)
                checks.append(np.setdiff1d(S2, S).size <= extra_cap + fuzz)
            else:
                checks.append(False)
            concl = bool(all(checks))
            details["checks"] = [bool(c) for c in checks]
    clauses.append(ClauseCheck("multistep_selection", bool(prem), concl, details))

    return BoundCheck(t_a_holds=t_a, lambda_sap=float(lam_sap), clauses=tuple(clauses))
