"""Experiment driver: configuration, replication, aggregation, emission.

Reproduces the simulation studies at two scales: the published
configurations (``paper`` preset) and desk-scale variants (``small``)
suitable for CI.  Every experiment follows the same lifecycle: the design
matrix is generated once per configuration (or per grid point when its
size changes) and held fixed, while the target vector and the noise are
redrawn for each replication.

Reproducibility contract: the master seed and the configuration determine
every record.  Generator streams are derived with SeedSequence spawn keys
(stream 0 for designs, stream 1 for replications), so records are
identical no matter how many workers execute the replications, and
repeated runs emit byte-identical CSV.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .ensembles import EnsembleSpec, generate
from .lasso_path import lars_path, lasso_at
from .metrics import confusion, ell2_loss, exact_sign_recovery, prediction_loss, rho_squared
from .model import GroundTruth, ProblemInstance, noise_scale, sample_beta, synthesize
from .procedures import (
    adaptive_lasso,
    gauss_dantzig,
    iterative_multistep,
    optimal_path_estimate,
    thresholded_lasso,
)

EXPERIMENTS = (
    "illustrative",
    "type12_sweep",
    "rho_hist",
    "sparsity_table",
    "success_prob",
    "roc",
)

ESTIMATORS = (
    "thresholded_lasso",
    "gauss_dantzig",
    "iterative",
    "lasso_optimal",
    "adaptive_lasso",
    "lasso_init",
)

_STREAM_DESIGN = 0
_STREAM_REP = 1

ROC_FPR_GRID = tuple(np.round(np.linspace(0.0, 0.6, 121), 5))


def derived_rng(master_seed: int, *key: int) -> np.random.Generator:
    """PCG64 generator for one deterministic substream of the master seed."""
    ss = np.random.SeedSequence(
        entropy=int(master_seed), spawn_key=tuple(int(k) for k in key)
    )
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment's full recipe; hashable into a replay tag.

    ``s`` is an int except for ``sparsity_table`` where it is a grid;
    ``n_grid`` applies to ``success_prob`` only.  ``t0_rule`` is one of
    ``("multiple", x)`` (t0 = x * lam * sigma), ``("grid", (x1, ...))``,
    or ``("ft_sqrt_s0", f_t)`` for the data-driven rule
    t0 = f_t * sqrt(|S0|) * lam * sigma with S0 the coordinates of the
    initial estimate above 0.5 * lambda_n.  ``workers`` does not affect
    results and is excluded from the hash.
    """

    experiment: str
    ensemble: EnsembleSpec
    s: object
    sigma_rule: object
    t0_rule: tuple
    reps: int
    seed: int
    lambda_factor: float = 0.69
    estimators: tuple = ("thresholded_lasso", "lasso_optimal")
    n_grid: tuple | None = None
    beta_scheme: object = "gaussian_mixture"
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        for e in self.estimators:
            if e not in ESTIMATORS:
                raise ValueError(f"unknown estimator {e!r}")
        if self.experiment == "sparsity_table":
            if not isinstance(self.s, tuple) or not self.s:
                raise ValueError("sparsity_table needs a nonempty s grid")
        elif not isinstance(self.s, int):
            raise ValueError(f"{self.experiment} needs a single integer s")
        if self.experiment == "success_prob" and not self.n_grid:
            raise ValueError("success_prob needs a nonempty n_grid")

    def to_dict(self) -> dict:
        d = {
            "experiment": self.experiment,
            "ensemble": self.ensemble.to_dict(),
            "s": list(self.s) if isinstance(self.s, tuple) else self.s,
            "sigma_rule": list(self.sigma_rule)
            if isinstance(self.sigma_rule, tuple)
            else self.sigma_rule,
            "t0_rule": [self.t0_rule[0]]
            + [list(v) if isinstance(v, tuple) else v for v in self.t0_rule[1:]],
            "reps": self.reps,
            "seed": self.seed,
            "lambda_factor": self.lambda_factor,
            "estimators": list(self.estimators),
            "n_grid": list(self.n_grid) if self.n_grid else None,
            "beta_scheme": list(self.beta_scheme)
            if isinstance(self.beta_scheme, tuple)
            else self.beta_scheme,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        def detuple(v):
            if isinstance(v, list):
                return tuple(detuple(x) for x in v)
            return v

        return cls(
            experiment=d["experiment"],
            ensemble=EnsembleSpec.from_dict(d["ensemble"]),
            s=detuple(d["s"]),
            sigma_rule=detuple(d["sigma_rule"]),
            t0_rule=detuple(d["t0_rule"]),
            reps=int(d["reps"]),
            seed=int(d["seed"]),
            lambda_factor=float(d.get("lambda_factor", 0.69)),
            estimators=detuple(d.get("estimators", ["thresholded_lasso", "lasso_optimal"])),
            n_grid=detuple(d["n_grid"]) if d.get("n_grid") else None,
            beta_scheme=detuple(d.get("beta_scheme", "gaussian_mixture")),
            workers=int(d.get("workers", 1)),
        )

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


RECORD_COLUMNS = (
    "config_hash",
    "master_seed",
    "experiment",
    "replication",
    "estimator",
    "n",
    "p",
    "s",
    "sigma",
    "lambda_n",
    "t0",
    "tp",
    "fp",
    "fn",
    "tn",
    "fpr",
    "tpr",
    "rho2",
    "ell2",
    "pred",
    "success",
    "error",
)


@dataclass
class ExperimentRecord:
    """One (replication, estimator, grid point) outcome.

    ``replication`` is -1 for aggregated rows (the averaged ROC curves).
    ``wall_time`` is informational only: it is excluded from equality,
    emission, and hashing so that output files stay byte-reproducible.
    """

    config_hash: str
    master_seed: int
    experiment: str
    replication: int
    estimator: str
    n: int
    p: int
    s: int
    sigma: float
    lambda_n: float
    t0: float | None = None
    tp: int | None = None
    fp: int | None = None
    fn: int | None = None
    tn: int | None = None
    fpr: float | None = None
    tpr: float | None = None
    rho2: float | None = None
    ell2: float | None = None
    pred: float | None = None
    success: bool | None = None
    error: str | None = None
    wall_time: float | None = field(default=None, compare=False)

    def to_row(self) -> dict:
        d = asdict(self)
        d.pop("wall_time")
        return d


def _sigma_for(rule, s: int) -> float:
    if rule == "unit":
        return 1.0
    if rule == "sqrt_s":
        return float(np.sqrt(s))
    if rule == "sqrt_s_over_3":
        return float(np.sqrt(s) / 3.0)
    if isinstance(rule, tuple) and rule[0] == "fixed":
        return float(rule[1])
    raise ValueError(f"unknown sigma rule {rule!r}")


def _t0_multiples(rule) -> tuple[float, ...]:
    if rule[0] == "multiple":
        return (float(rule[1]),)
    if rule[0] == "grid":
        return tuple(float(v) for v in rule[1])
    raise ValueError(f"t0 rule {rule!r} does not define a fixed grid")


def _data_driven_t0(beta_init: np.ndarray, lambda_n: float, lam_sigma: float, f_t: float) -> float:
    """t0 = f_t sqrt(|S0|) lam sigma, S0 = coordinates above 0.5 lambda_n."""
    s0_hat = int(np.sum(np.abs(beta_init) >= 0.5 * lambda_n))
    if s0_hat == 0:
        return float("inf")  # empty first-stage set: select nothing
    return float(f_t * np.sqrt(s0_hat) * lam_sigma)


def make_instance(
    spec: EnsembleSpec,
    s: int,
    scheme,
    sigma: float,
    master_seed: int,
    design_key: tuple,
    rep_key: tuple,
    X=None,
) -> ProblemInstance:
    """Draw one replication; records the recipe needed to regenerate it."""
    if X is None:
        X = generate(spec, derived_rng(master_seed, _STREAM_DESIGN, *design_key))
    rng = derived_rng(master_seed, _STREAM_REP, *rep_key)
    truth = sample_beta(spec.p, s, scheme, rng)
    recipe = {
        "ensemble": spec.to_dict(),
        "scheme": list(scheme) if isinstance(scheme, tuple) else scheme,
        "seed": int(master_seed),
        "design_key": [int(k) for k in design_key],
        "rep_key": [int(k) for k in rep_key],
    }
    return synthesize(
        X, truth, sigma, rng, seed=(master_seed, *rep_key), recipe=recipe
    )


def instance_from_json(doc: str) -> ProblemInstance:
    """Regenerate a serialized instance bit for bit from its recipe."""
    d = json.loads(doc)
    spec = EnsembleSpec.from_dict(d["ensemble"])
    scheme = d["scheme"]
    if isinstance(scheme, list):
        scheme = (scheme[0], scheme[1] if scheme[0] != "explicit" else tuple(scheme[1]))
    return make_instance(
        spec,
        int(d["s"]),
        scheme,
        float(d["sigma"]),
        int(d["seed"]),
        tuple(d["design_key"]),
        tuple(d["rep_key"]),
    )


def _run_replications(task, reps: int, workers: int) -> list:
    """Run ``task(r)`` for r in range(reps); merge in replication order."""
    if workers <= 1:
        out = []
        for r in range(reps):
            out.extend(task(r))
        return out
    chunks = np.array_split(np.arange(reps), min(reps, workers * 4))
    results: dict[int, list] = {}
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = {ex.submit(_run_chunk, task, [int(r) for r in ch]): i for i, ch in enumerate(chunks) if len(ch)}
        for fut, i in futs.items():
            results[i] = fut.result()
    out = []
    for i in sorted(results):
        out.extend(results[i])
    return out


def _run_chunk(task, reps: list) -> list:
    out = []
    for r in reps:
        out.extend(task(r))
    return out


class _RepTask:
    """Picklable per-replication task: shared context plus a worker method."""

    def __init__(self, kind: str, ctx: dict):
        self.kind = kind
        self.ctx = ctx

    def __call__(self, r: int) -> list[ExperimentRecord]:
        return _REP_FUNCS[self.kind](r, self.ctx)


def _base_record(ctx, r, estimator, **kw) -> ExperimentRecord:
    return ExperimentRecord(
        config_hash=ctx["hash"],
        master_seed=ctx["seed"],
        experiment=ctx["experiment"],
        replication=r,
        estimator=estimator,
        n=ctx["n"],
        p=ctx["p"],
        s=ctx["s"],
        sigma=ctx["sigma"],
        lambda_n=ctx["lambda_n"],
        **kw,
    )


def _metric_fields(beta_hat, instance) -> dict:
    c = confusion(beta_hat, instance.truth)
    out = {
        "tp": c.tp,
        "fp": c.fp,
        "fn": c.fn,
        "tn": c.tn,
        "fpr": c.fpr,
        "tpr": c.tpr,
        "ell2": ell2_loss(beta_hat, instance.truth),
        "pred": prediction_loss(instance.X.entries, beta_hat, instance.truth),
        "success": exact_sign_recovery(beta_hat, instance.truth),
    }
    if instance.truth.s > 0:
        out["rho2"] = rho_squared(beta_hat, instance.truth, instance.sigma, instance.n)
    return out


def _instance_for_rep(ctx, r) -> ProblemInstance:
    spec = EnsembleSpec.from_dict(ctx["spec"])
    return make_instance(
        spec,
        ctx["s"],
        ctx["scheme"],
        ctx["sigma"],
        ctx["seed"],
        design_key=tuple(ctx["design_key"]),
        rep_key=(*ctx["design_key"], r),
        X=ctx["X"],
    )


def _rep_type12(r, ctx) -> list[ExperimentRecord]:
    t_start = time.perf_counter()
    inst = _instance_for_rep(ctx, r)
    records = []
    try:
        path = lars_path(inst.X.entries, inst.Y, gram=ctx["gram"])
    except Exception as exc:  # noqa: BLE001 - failure isolation per replication
        for est in ctx["estimators"]:
            for t0 in ctx["t0_values"]:
                records.append(_base_record(ctx, r, est, t0=t0, error=repr(exc)))
        return records
    for est in ctx["estimators"]:
        for t0 in ctx["t0_values"]:
            try:
                if est == "thresholded_lasso":
                    res = thresholded_lasso(inst, ctx["lambda_n"], t0, path=path)
                else:
                    res = gauss_dantzig(inst, ctx["lambda_n"], t0)
                rec = _base_record(
                    ctx, r, est, t0=t0, **_metric_fields(res.beta_hat, inst)
                )
            except Exception as exc:  # noqa: BLE001
                rec = _base_record(ctx, r, est, t0=t0, error=repr(exc))
            rec.wall_time = time.perf_counter() - t_start
            records.append(rec)
    return records


def _rep_point(r, ctx) -> list[ExperimentRecord]:
    """Shared worker for rho_hist / sparsity_table / illustrative / success_prob."""
    t_start = time.perf_counter()
    inst = _instance_for_rep(ctx, r)
    records = []
    path = None
    t0 = None
    need_path = bool(set(ctx["estimators"]) - {"gauss_dantzig"}) or (
        ctx["t0_rule"][0] == "ft_sqrt_s0"
    )
    try:
        if need_path:
            path = lars_path(inst.X.entries, inst.Y, gram=ctx["gram"])
        if ctx["t0_rule"][0] == "ft_sqrt_s0":
            beta_init = lasso_at(path, ctx["lambda_n"])
            t0 = _data_driven_t0(
                beta_init, ctx["lambda_n"], ctx["lam_sigma"], float(ctx["t0_rule"][1])
            )
        else:
            t0 = _t0_multiples(ctx["t0_rule"])[0] * ctx["lam_sigma"]
    except Exception as exc:  # noqa: BLE001
        for est in ctx["estimators"]:
            records.append(_base_record(ctx, r, est, error=repr(exc)))
        return records
    for est in ctx["estimators"]:
        try:
            if est == "thresholded_lasso":
                beta_hat = thresholded_lasso(inst, ctx["lambda_n"], t0, path=path).beta_hat
            elif est == "gauss_dantzig":
                beta_hat = gauss_dantzig(inst, ctx["lambda_n"], t0).beta_hat
            elif est == "iterative":
                beta_hat = iterative_multistep(inst, ctx["lambda_n"], path=path).beta_hat
            elif est == "lasso_optimal":
                beta_hat = optimal_path_estimate(path, inst.truth, ctx["path_criterion"])
            else:  # lasso_init
                beta_hat = lasso_at(path, ctx["lambda_n"])
            rec = _base_record(ctx, r, est, t0=t0, **_metric_fields(beta_hat, inst))
        except Exception as exc:  # noqa: BLE001
            rec = _base_record(ctx, r, est, t0=t0, error=repr(exc))
        rec.wall_time = time.perf_counter() - t_start
        records.append(rec)
    return records


def _roc_points(beta_vectors, truth) -> list[tuple[float, float]]:
    pts = [(0.0, 0.0)]
    for b in beta_vectors:
        c = confusion(b, truth)
        pts.append((c.fpr, c.tpr))
    return pts


def _vertical_average(points: list[tuple[float, float]], grid) -> np.ndarray:
    """Monotone ROC envelope of ``points`` evaluated on a fixed FPR grid."""
    pts = sorted(points)
    fpr = np.array([q[0] for q in pts])
    tpr = np.maximum.accumulate(np.array([q[1] for q in pts]))
    # collapse duplicate fpr values to their best tpr
    keep = np.r_[fpr[1:] != fpr[:-1], True]
    fpr, tpr = fpr[keep], tpr[keep]
    return np.interp(grid, fpr, tpr, left=0.0, right=tpr[-1])


def _rep_roc(r, ctx) -> list[ExperimentRecord]:
    """Emits per-rep marker records; curve data is aggregated by the caller."""
    inst = _instance_for_rep(ctx, r)
    out = {"r": r}
    path = lars_path(inst.X.entries, inst.Y, gram=ctx["gram"])
    grid = np.asarray(ctx["fpr_grid"])
    if "thresholded_lasso" in ctx["estimators"]:
        rates = []
        for t0_mult in ctx["t0_values"]:
            res = thresholded_lasso(
                inst, ctx["lambda_n"], t0_mult * ctx["lam_sigma"], path=path
            )
            c = confusion(res.beta_hat, inst.truth)
            rates.append((c.fpr, c.tpr))
        out["thresholded_lasso"] = rates
    if "lasso_optimal" in ctx["estimators"]:
        pts = _roc_points(list(path.betas), inst.truth)
        out["lasso_optimal"] = _vertical_average(pts, grid)
    if "adaptive_lasso" in ctx["estimators"]:
        beta_init = optimal_path_estimate(path, inst.truth, "min_l2_loss")
        if not np.any(beta_init):
            out["adaptive_lasso"] = None
        else:
            vectors = adaptive_lasso(inst, beta_init)
            pts = _roc_points(vectors, inst.truth)
            out["adaptive_lasso"] = _vertical_average(pts, grid)
    return [out]


def _ctx_common(config: ExperimentConfig, spec: EnsembleSpec, s: int, sigma: float, design_key) -> dict:
    lam = noise_scale(spec.p, spec.n)
    X = generate(spec, derived_rng(config.seed, _STREAM_DESIGN, *design_key))
    return {
        "hash": config.hash(),
        "seed": config.seed,
        "experiment": config.experiment,
        "spec": spec.to_dict(),
        "scheme": config.beta_scheme,
        "estimators": tuple(config.estimators),
        "n": spec.n,
        "p": spec.p,
        "s": s,
        "sigma": sigma,
        "lam_sigma": lam * sigma,
        "lambda_n": config.lambda_factor * lam * sigma,
        "t0_rule": config.t0_rule,
        "design_key": tuple(design_key),
        "X": X,
        "gram": X.gram(),
    }


def _check_estimators(config: ExperimentConfig, allowed: tuple) -> None:
    bad = set(config.estimators) - set(allowed)
    if bad:
        raise ValueError(
            f"estimators {sorted(bad)} are not supported by {config.experiment}"
        )


def run_type12_sweep(config: ExperimentConfig) -> list[ExperimentRecord]:
    """FP/FN means across a threshold sweep; design fixed, targets redrawn."""
    _check_estimators(config, ("thresholded_lasso", "gauss_dantzig"))
    s = int(config.s)
    sigma = _sigma_for(config.sigma_rule, s)
    ctx = _ctx_common(config, config.ensemble, s, sigma, design_key=(0,))
    ctx["t0_values"] = tuple(m * ctx["lam_sigma"] for m in _t0_multiples(config.t0_rule))
    return _run_replications(_RepTask("type12", ctx), config.reps, config.workers)


def run_rho_hist(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Per-replication rho^2 records for histogramming."""
    _check_estimators(config, ("thresholded_lasso", "gauss_dantzig", "iterative", "lasso_optimal", "lasso_init"))
    s = int(config.s)
    sigma = _sigma_for(config.sigma_rule, s)
    ctx = _ctx_common(config, config.ensemble, s, sigma, design_key=(0,))
    ctx["path_criterion"] = "min_l2_loss"
    return _run_replications(_RepTask("point", ctx), config.reps, config.workers)


def run_illustrative(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Single-replication walkthrough with the initial estimate kept."""
    _check_estimators(config, ("thresholded_lasso", "gauss_dantzig", "iterative", "lasso_optimal", "lasso_init"))
    cfg = replace(config, reps=1)
    s = int(cfg.s)
    sigma = _sigma_for(cfg.sigma_rule, s)
    ctx = _ctx_common(cfg, cfg.ensemble, s, sigma, design_key=(0,))
    ctx["path_criterion"] = "min_l2_loss"
    return _run_replications(_RepTask("point", ctx), 1, 1)


def run_sparsity_table(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Mean rho^2 per sparsity level at fixed SNR; one design per level."""
    _check_estimators(config, ("thresholded_lasso", "gauss_dantzig", "iterative", "lasso_optimal", "lasso_init"))
    records = []
    for i, s in enumerate(config.s):
        sigma = _sigma_for(config.sigma_rule, int(s))
        ctx = _ctx_common(config, config.ensemble, int(s), sigma, design_key=(i,))
        ctx["path_criterion"] = "min_l2_loss"
        records.extend(
            _run_replications(_RepTask("point", ctx), config.reps, config.workers)
        )
    return records


def run_success_prob(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Exact sign-recovery rates along a sample-size grid.

    The lasso baseline takes the best support match over the whole path,
    then is judged by exact sign recovery like the rest.
    """
    _check_estimators(config, ("thresholded_lasso", "gauss_dantzig", "lasso_optimal"))
    records = []
    for i, n in enumerate(config.n_grid):
        spec = replace(config.ensemble, n=int(n))
        s = int(config.s)
        sigma = _sigma_for(config.sigma_rule, s)
        ctx = _ctx_common(config, spec, s, sigma, design_key=(i,))
        ctx["path_criterion"] = "best_support_match"
        records.extend(
            _run_replications(_RepTask("point", ctx), config.reps, config.workers)
        )
    return records


def run_roc(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Averaged ROC curves: per-threshold means for the thresholded lasso,
    vertically averaged path envelopes for the lasso and adaptive lasso."""
    _check_estimators(config, ("thresholded_lasso", "lasso_optimal", "adaptive_lasso"))
    s = int(config.s)
    sigma = _sigma_for(config.sigma_rule, s)
    ctx = _ctx_common(config, config.ensemble, s, sigma, design_key=(0,))
    ctx["t0_values"] = _t0_multiples(config.t0_rule)
    ctx["fpr_grid"] = ROC_FPR_GRID
    raw = _run_replications(_RepTask("roc", ctx), config.reps, config.workers)

    records = []
    lam_sigma = ctx["lam_sigma"]
    if "thresholded_lasso" in config.estimators:
        rates = np.array([d["thresholded_lasso"] for d in raw])  # (reps, t0, 2)
        for k, t0_mult in enumerate(ctx["t0_values"]):
            records.append(
                _base_record(
                    ctx,
                    -1,
                    "thresholded_lasso",
                    t0=t0_mult * lam_sigma,
                    fpr=float(np.mean(rates[:, k, 0])),
                    tpr=float(np.mean(rates[:, k, 1])),
                )
            )
    for est in ("lasso_optimal", "adaptive_lasso"):
        if est not in config.estimators:
            continue
        curves = [d[est] for d in raw if d.get(est) is not None]
        if not curves:
            continue
        mean_curve = np.mean(np.array(curves), axis=0)
        for g, t in zip(ctx["fpr_grid"], mean_curve):
            records.append(_base_record(ctx, -1, est, fpr=float(g), tpr=float(t)))
    return records


_REP_FUNCS = {
    "type12": _rep_type12,
    "point": _rep_point,
    "roc": _rep_roc,
}

RUNNERS = {
    "illustrative": run_illustrative,
    "type12_sweep": run_type12_sweep,
    "rho_hist": run_rho_hist,
    "sparsity_table": run_sparsity_table,
    "success_prob": run_success_prob,
    "roc": run_roc,
}


def run_experiment(config: ExperimentConfig) -> list[ExperimentRecord]:
    return RUNNERS[config.experiment](config)


# ---------------------------------------------------------------- summaries


def type12_summary(records) -> list[dict]:
    """Mean and std of FP/FN per threshold value (error rows excluded)."""
    by_t0: dict[float, list] = {}
    for rec in records:
        if rec.error is None and rec.fp is not None:
            by_t0.setdefault(rec.t0, []).append((rec.fp, rec.fn))
    out = []
    for t0 in sorted(by_t0):
        arr = np.array(by_t0[t0], dtype=float)
        out.append(
            {
                "t0": t0,
                "fp_mean": float(arr[:, 0].mean()),
                "fp_std": float(arr[:, 0].std()),
                "fn_mean": float(arr[:, 1].mean()),
                "fn_std": float(arr[:, 1].std()),
                "reps": len(arr),
            }
        )
    return out


def median_rho2(records, estimator: str) -> float:
    vals = [r.rho2 for r in records if r.estimator == estimator and r.rho2 is not None]
    if not vals:
        raise ValueError(f"no rho^2 records for {estimator!r}")
    return float(np.median(vals))


def mean_rho2_by_s(records) -> dict[tuple[int, str], float]:
    groups: dict[tuple[int, str], list] = {}
    for r in records:
        if r.rho2 is not None:
            groups.setdefault((r.s, r.estimator), []).append(r.rho2)
    return {k: float(np.mean(v)) for k, v in groups.items()}


def success_rates(records) -> dict[tuple[int, str], float]:
    groups: dict[tuple[int, str], list] = {}
    for r in records:
        if r.error is None and r.success is not None:
            groups.setdefault((r.n, r.estimator), []).append(bool(r.success))
    return {k: float(np.mean(v)) for k, v in groups.items()}


def roc_curve(records, estimator: str) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted(
        (r.fpr, r.tpr)
        for r in records
        if r.estimator == estimator and r.fpr is not None
    )
    return np.array([q[0] for q in pts]), np.array([q[1] for q in pts])


# ----------------------------------------------------------------- emission


def emit(records, sink) -> None:
    """Write records to a CSV or JSON file (chosen by extension).

    Column order is frozen (see RECORD_COLUMNS); floats are rendered with
    repr so identical runs produce byte-identical files.
    """
    sink = str(sink)
    try:
        if sink.endswith(".json"):
            with open(sink, "w", newline="\n") as f:
                json.dump([r.to_row() for r in records], f, indent=1)
                f.write("\n")
            return
        with open(sink, "w", newline="") as f:
            writer = csv.DictWriter(
                f, fieldnames=RECORD_COLUMNS, lineterminator="\n"
            )
            writer.writeheader()
            for rec in records:
                row = rec.to_row()
                writer.writerow(
                    {k: ("" if row[k] is None else repr(row[k]) if isinstance(row[k], float) else row[k]) for k in RECORD_COLUMNS}
                )
    except OSError as exc:
        raise OSError(f"cannot write records to {sink!r}: {exc}") from exc


def read_records(path) -> list[ExperimentRecord]:
    """Parse a CSV written by :func:`emit` back into records."""
    out = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            kw = {}
            for key in RECORD_COLUMNS:
                val = row[key]
                if val == "":
                    kw[key] = None
                elif key in ("master_seed", "replication", "n", "p", "s", "tp", "fp", "fn", "tn"):
                    kw[key] = int(val)
                elif key in ("sigma", "lambda_n", "t0", "fpr", "tpr", "rho2", "ell2", "pred"):
                    kw[key] = float(val)
                elif key == "success":
                    kw[key] = val == "True"
                else:
                    kw[key] = val
            out.append(ExperimentRecord(**kw))
    return out


# ------------------------------------------------------------------ presets


def _preset(experiment, **kw) -> dict:
    return {"experiment": experiment, **kw}


PRESETS: dict[str, dict[str, dict]] = {
    "illustrative": {
        "paper": _preset(
            "illustrative",
            ensemble={"kind": "gaussian_iid", "n": 72, "p": 256},
            s=8,
            sigma_rule="sqrt_s_over_3",
            t0_rule=("multiple", 1.0),
            reps=1,
            estimators=("lasso_init", "thresholded_lasso", "lasso_optimal"),
        ),
    },
    "type12_sweep": {
        "paper": _preset(
            "type12_sweep",
            ensemble={"kind": "gaussian_iid", "n": 72, "p": 256},
            s=8,
            sigma_rule="sqrt_s_over_3",
            t0_rule=("grid", tuple(np.round(np.linspace(0.01, 1.5, 30), 4))),
            reps=200,
            estimators=("thresholded_lasso",),
        ),
        "small": _preset(
            "type12_sweep",
            ensemble={"kind": "gaussian_iid", "n": 72, "p": 128},
            s=8,
            sigma_rule="sqrt_s_over_3",
            t0_rule=("grid", tuple(np.round(np.linspace(0.01, 1.5, 10), 4))),
            reps=100,
            estimators=("thresholded_lasso",),
        ),
    },
    "rho_hist": {
        "paper": _preset(
            "rho_hist",
            ensemble={"kind": "gaussian_iid", "n": 72, "p": 256},
            s=8,
            sigma_rule="sqrt_s_over_3",
            t0_rule=("multiple", 1.0),
            reps=500,
            estimators=("thresholded_lasso", "lasso_optimal"),
        ),
        "small": _preset(
            "rho_hist",
            ensemble={"kind": "gaussian_iid", "n": 72, "p": 256},
            s=8,
            sigma_rule="sqrt_s_over_3",
            t0_rule=("multiple", 1.0),
            reps=100,
            estimators=("thresholded_lasso", "lasso_optimal"),
        ),
    },
    "sparsity_table": {
        "paper": _preset(
            "sparsity_table",
            ensemble={"kind": "gaussian_iid", "n": 400, "p": 2000},
            s=(5, 18, 20, 40, 60, 80, 100),
            sigma_rule="sqrt_s_over_3",
            t0_rule=("multiple", 1.0),
            reps=100,
            estimators=("thresholded_lasso", "lasso_optimal"),
        ),
        "small": _preset(
            "sparsity_table",
            ensemble={"kind": "gaussian_iid", "n": 200, "p": 500},
            s=(5, 15, 25),
            sigma_rule="sqrt_s_over_3",
            t0_rule=("multiple", 1.0),
            reps=100,
            estimators=("thresholded_lasso", "lasso_optimal"),
        ),
    },
    "success_prob": {
        "paper": _preset(
            "success_prob",
            ensemble={"kind": "gaussian_iid", "n": 72, "p": 256},
            s=8,
            sigma_rule="unit",
            t0_rule=("ft_sqrt_s0", 0.17),
            reps=100,
            beta_scheme=("constant", 0.9),
            estimators=("thresholded_lasso", "lasso_optimal"),
            n_grid="auto",
        ),
        "small": _preset(
            "success_prob",
            ensemble={"kind": "gaussian_iid", "n": 72, "p": 256},
            s=8,
            sigma_rule="unit",
            t0_rule=("ft_sqrt_s0", 0.17),
            reps=50,
            beta_scheme=("constant", 0.9),
            estimators=("thresholded_lasso", "lasso_optimal"),
            n_grid="auto",
        ),
    },
    "roc": {
        "paper": _preset(
            "roc",
            ensemble={"kind": "gaussian_iid", "n": 330, "p": 512},
            s=64,
            sigma_rule="sqrt_s_over_3",
            t0_rule=("grid", tuple(np.round(np.linspace(0.01, 1.5, 30), 4))),
            reps=100,
            estimators=("thresholded_lasso", "lasso_optimal", "adaptive_lasso"),
        ),
        "small": _preset(
            "roc",
            ensemble={"kind": "gaussian_iid", "n": 165, "p": 256},
            s=32,
            sigma_rule="sqrt_s_over_3",
            t0_rule=("grid", tuple(np.round(np.linspace(0.01, 1.5, 15), 4))),
            reps=50,
            estimators=("thresholded_lasso", "lasso_optimal", "adaptive_lasso"),
        ),
    },
}


def auto_n_grid(p: int, s: int, points: int = 10) -> tuple[int, ...]:
    """Sample-size grid from 0.5 s log(p) to 6 s log(p), ``points`` steps."""
    lo = 0.5 * s * np.log(p)
    hi = 6.0 * s * np.log(p)
    return tuple(int(v) for v in np.unique(np.rint(np.linspace(lo, hi, points))))


def config_from_preset(experiment: str, preset: str = "small", **overrides) -> ExperimentConfig:
    """Build a config from a named preset; keyword overrides win."""
    presets = PRESETS.get(experiment)
    if presets is None:
        raise ValueError(f"unknown experiment {experiment!r}")
    if preset not in presets:
        preset = "paper" if preset == "small" else preset
    if preset not in presets:
        raise ValueError(f"experiment {experiment!r} has no preset {preset!r}")
    d = dict(presets[preset])
    d.setdefault("seed", 20100208)
    d.update(overrides)
    if d.get("n_grid") == "auto":
        p = d["ensemble"]["p"]
        d["n_grid"] = auto_n_grid(p, int(d["s"]))
    d["ensemble"] = (
        d["ensemble"] if isinstance(d["ensemble"], dict) else d["ensemble"].to_dict()
    )
    return ExperimentConfig.from_dict(d)
