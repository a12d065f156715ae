"""Command-line entry point for the experiment harness.

Subcommands map to the experiments (`type12`, `rho-hist`, `sparsity-table`,
`success-prob`, `roc`, `illustrative`) plus `diagnose`, which computes an
incoherence report for a generated design.  Configuration comes from the
built-in presets, optionally overridden by a JSON or TOML file and by
flags.  On failure the process exits nonzero with a machine-readable JSON
error on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

try:
    import tomllib  # py3.11+
except ImportError:  # pragma: no cover - py3.10 fallback
    import tomli as tomllib

from . import analysis, harness
from .ensembles import EnsembleSpec, generate

_SUBCOMMANDS = {
    "type12": "type12_sweep",
    "rho-hist": "rho_hist",
    "sparsity-table": "sparsity_table",
    "success-prob": "success_prob",
    "roc": "roc",
    "illustrative": "illustrative",
}


def _load_config_file(path: str) -> dict:
    if path.endswith(".toml"):
        with open(path, "rb") as f:
            return tomllib.load(f)
    with open(path) as f:
        return json.load(f)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="threshlasso",
        description="Thresholded-lasso simulation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON or TOML config file (overrides preset)")
        p.add_argument("--preset", choices=("paper", "small"), default="small")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--reps", type=int, help="replication count")
        p.add_argument("--workers", type=int, help="parallel workers (default 1)")
        p.add_argument(
            "--estimators", help="comma-separated estimator subset", default=None
        )
        p.add_argument("--out", required=True, help="output CSV or JSON path")

    d = sub.add_parser("diagnose", help="incoherence report for a generated design")
    d.add_argument("--ensemble", choices=("gaussian_iid", "toeplitz", "bernoulli"),
                   default="gaussian_iid")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--s", type=int, required=True)
    d.add_argument("--gamma", type=float, default=None)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    d.add_argument("--out", help="output JSON path (stdout when omitted)")
    return parser


def _run_experiment_command(args, experiment: str) -> None:
    overrides: dict = {}
    if args.config:
        overrides.update(_load_config_file(args.config))
        overrides["experiment"] = experiment
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.reps is not None:
        overrides["reps"] = args.reps
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.estimators:
        overrides["estimators"] = tuple(
            e.strip() for e in args.estimators.split(",") if e.strip()
        )
    config = harness.config_from_preset(experiment, args.preset, **overrides)
    records = harness.run_experiment(config)
    harness.emit(records, args.out)
    print(
        f"{experiment}: {len(records)} records -> {args.out} "
        f"(config {config.hash()}, seed {config.seed})"
    )


def _run_diagnose(args) -> None:
    spec = EnsembleSpec(kind=args.ensemble, n=args.n, p=args.p, gamma=args.gamma)
    X = generate(spec, harness.derived_rng(args.seed, 0))
    report = analysis.incoherence_report(X.entries, args.s, mode=args.mode)
    doc = report.to_json_dict()
    doc["ensemble"] = spec.to_dict()
    doc["seed"] = args.seed
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "diagnose":
            _run_diagnose(args)
        else:
            _run_experiment_command(args, _SUBCOMMANDS[args.command])
        return 0
    except Exception as exc:  # noqa: BLE001 - uniform machine-readable failure
        err = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
