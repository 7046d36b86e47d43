"""Command-line front end.

Subcommands cover the full workflow: sample a reference model, fit and
simulate the generator, evaluate generated against reference data, train
a hedge, estimate roughness, and split datasets chronologically.  Every
command takes a single --seed and derives all of its streams from it,
writes its primary outputs deterministically (same command line, same
bytes), and drops a RunManifest sidecar <out>.manifest.json recording
parameters, input/output digests, and runtime.

Failures exit nonzero with one machine-parsable line on stderr:
error:<category>: <detail>, category in {params, data, io, numerical,
zero-weight-mass, divergence}.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .core import RngStream, SimConfig, ValidationError
from .dataio import read_dataset_csv, sha256_file, write_dataset_csv, write_json
from .drift import DriftEstimator, ZeroWeightMass
from .hedging import (HedgeConfig, TrainingDiverged, evaluate_hedger, pnl_values,
                      train_hedger)
from .metrics import build_report, hurst_estimate
from .refmodels import (ArParams, CholeskyFailure, FbmParams, GarchParams, GbmParams,
                        sample_ar, sample_fbm, sample_garch, sample_gaussian_onestep,
                        sample_gbm, scaled_grid, unit_grid)
from .simulator import simulate_batch

_ERROR_CATEGORIES = (
    (ZeroWeightMass, "zero-weight-mass"),
    (CholeskyFailure, "numerical"),
    (TrainingDiverged, "divergence"),
    (ValidationError, "data"),
    (ValueError, "params"),
    (OSError, "io"),
)
_ERROR_CLASSES = tuple(cls for cls, _ in _ERROR_CATEGORIES)


def _write_manifest(command: str, params: dict, seed, inputs: list, outputs: list,
                    runtime: float) -> None:
    manifest = {
        "command": command,
        "params": params,
        "seed": seed,
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {str(p): sha256_file(p) for p in outputs},
        "runtime_seconds": runtime,
    }
    for out in params.get("out_paths", [params.get("out")]):
        if out:
            write_json(manifest, f"{out}.manifest.json")


def _run_command(args, command: str, params: dict, inputs: list, worker) -> None:
    """Execute worker(), then stamp manifests for its returned output list."""
    start = time.perf_counter()
    outputs = worker()
    _write_manifest(command, params, getattr(args, "seed", None), inputs, outputs,
                    time.perf_counter() - start)


def cmd_sample_ref(args) -> None:
    rng = RngStream(args.seed, 0)
    if args.model == "ar":
        p = ArParams(args.b, args.beta1, args.beta2, args.sigma1, args.sigma2, args.sigma3)
        data = sample_ar(p, args.m, rng)
    elif args.model == "garch":
        p = GarchParams(args.alpha0, args.alpha1, args.alpha2, args.noise_var, args.n)
        data = sample_garch(p, args.m, rng)
    elif args.model == "fbm":
        grid = scaled_grid(args.n, args.t_max) if args.t_max else unit_grid(args.n)
        data = sample_fbm(FbmParams(args.hurst, grid), args.m, rng)
    elif args.model == "gbm":
        grid = scaled_grid(args.n, args.t_max) if args.t_max else unit_grid(args.n)
        data = sample_gbm(GbmParams(grid, args.s0, args.mu, args.vol), args.m, rng)
    else:
        data = sample_gaussian_onestep(args.mean, args.var, args.t1, args.m, rng)
    def worker():
        write_dataset_csv(data, args.out)
        return [args.out]

    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    _run_command(args, f"sample-ref {args.model}", params, [], worker)


def cmd_generate(args) -> None:
    data = read_dataset_csv(args.data)
    memory = "full" if args.memory == "full" else int(args.memory)
    est = DriftEstimator(data, args.bandwidth, memory=memory,
                         fallback=args.fallback, kernel=args.kernel)
    cfg = SimConfig(n_sub=args.n_sub, seed=args.seed, batch=args.batch)

    def worker():
        out = simulate_batch(est, cfg)
        write_dataset_csv(out, args.out)
        return [args.out]

    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    _run_command(args, "generate", params, [args.data], worker)


def cmd_evaluate(args) -> None:
    ref = read_dataset_csv(args.ref)
    gen = read_dataset_csv(args.gen)

    def worker():
        report = build_report(ref, gen, include_origin=not args.qv_exclude_origin,
                              with_hurst=args.hurst)
        write_json(report.to_dict(), args.out)
        outputs = [args.out]
        if args.figures:
            from .figures import evaluation_figures

            outputs += evaluation_figures(report, ref, gen, args.figures)
        return outputs

    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    _run_command(args, "evaluate", params, [args.ref, args.gen], worker)


def cmd_hedge(args) -> None:
    train = read_dataset_csv(args.train)
    valid = read_dataset_csv(args.valid)
    test = read_dataset_csv(args.test)
    hidden = tuple(int(tok) for tok in args.hidden.split(","))
    cfg = HedgeConfig(hidden=hidden, learning_rate=args.lr, epochs=args.epochs,
                      batch_size=args.batch_size, seed=args.seed)

    def worker():
        result = train_hedger(train, valid, cfg, args.s0)
        stats = {
            name: dict(zip(("mean", "std"), evaluate_hedger(result, ds)))
            for name, ds in (("train", train), ("valid", valid), ("test", test))
        }
        doc = {
            "premium": result.premium,
            "best_epoch": result.best_epoch,
            "s0": args.s0,
            "config": {
                "hidden": list(hidden),
                "learning_rate": cfg.learning_rate,
                "epochs": cfg.epochs,
                "batch_size": cfg.batch_size,
                "seed": cfg.seed,
            },
            "pnl": stats,
            "train_history": result.train_history,
            "valid_history": result.valid_history,
            "policy": {
                "t_scale": result.policy.t_scale,
                "s_scale": result.policy.s_scale,
                "weights": [w.tolist() for w in result.policy.weights],
                "biases": [b.tolist() for b in result.policy.biases],
            },
        }
        write_json(doc, args.out)
        outputs = [args.out]
        if args.figures:
            from .figures import hedge_figures

            outputs += hedge_figures(result.train_history, result.valid_history,
                                     pnl_values(result, test), args.figures)
        return outputs

    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    _run_command(args, "hedge", params, [args.train, args.valid, args.test], worker)


def cmd_hurst(args) -> None:
    data = read_dataset_csv(args.data)

    def worker():
        per_path = [hurst_estimate(data.values[m]) for m in range(data.n_paths)]
        arr = np.asarray(per_path)
        doc = {
            "n_paths": data.n_paths,
            "mean": float(arr.mean()),
            "std": float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
            "per_path": per_path,
        }
        write_json(doc, args.out)
        return [args.out]

    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    _run_command(args, "hurst", params, [args.data], worker)


def cmd_split(args) -> None:
    data = read_dataset_csv(args.data)
    ranges = []
    for tok in args.ranges.split(","):
        lo, _, hi = tok.partition(":")
        try:
            ranges.append((int(lo), int(hi)))
        except ValueError:
            raise ValueError(f"malformed range {tok!r}; expected lo:hi") from None
    if len(ranges) != len(args.out):
        raise ValueError(f"{len(ranges)} ranges but {len(args.out)} output paths")

    def worker():
        from .core import Dataset

        for (lo, hi), out in zip(ranges, args.out):
            if not 0 <= lo < hi <= data.n_paths:
                raise ValueError(f"range {lo}:{hi} outside [0, {data.n_paths}]")
            write_dataset_csv(Dataset(data.grid, data.values[lo:hi]), out)
        return list(args.out)

    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    params["out_paths"] = list(args.out)
    _run_command(args, "split", params, [args.data], worker)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsbridge",
        description="Generate, evaluate, and hedge synthetic time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ref = sub.add_parser("sample-ref", help="draw paths from a reference model")
    refsub = ref.add_subparsers(dest="model", required=True)

    def _common(p):
        p.add_argument("--m", type=int, required=True, help="number of paths")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="output CSV")
        p.set_defaults(func=cmd_sample_ref)

    p = refsub.add_parser("ar", help="three-date autoregression")
    p.add_argument("--b", type=float, default=0.7)
    p.add_argument("--beta1", type=float, default=-1.0)
    p.add_argument("--beta2", type=float, default=-1.0)
    p.add_argument("--sigma1", type=float, default=0.1)
    p.add_argument("--sigma2", type=float, default=0.05)
    p.add_argument("--sigma3", type=float, default=0.05)
    _common(p)

    p = refsub.add_parser("garch", help="conditionally heteroskedastic recursion")
    p.add_argument("--alpha0", type=float, default=5.0)
    p.add_argument("--alpha1", type=float, default=0.4)
    p.add_argument("--alpha2", type=float, default=0.1)
    p.add_argument("--noise-var", type=float, default=0.1)
    p.add_argument("--n", type=int, default=60)
    _common(p)

    p = refsub.add_parser("fbm", help="fractional Brownian motion")
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--n", type=int, default=60)
    p.add_argument("--t-max", type=float, default=None,
                   help="horizon; grid is i*t_max/n (default: unit spacing)")
    _common(p)

    p = refsub.add_parser("gbm", help="geometric Brownian motion")
    p.add_argument("--s0", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--vol", type=float, default=0.2)
    p.add_argument("--n", type=int, default=60)
    p.add_argument("--t-max", type=float, default=None)
    _common(p)

    p = refsub.add_parser("gauss1", help="single Gaussian marginal")
    p.add_argument("--mean", type=float, default=0.0)
    p.add_argument("--var", type=float, default=1.0)
    p.add_argument("--t1", type=float, default=1.0)
    _common(p)

    p = sub.add_parser("generate", help="fit the drift on a dataset and simulate")
    p.add_argument("--data", required=True, help="training CSV")
    p.add_argument("--bandwidth", type=float, required=True)
    p.add_argument("--memory", default="full", help="'full' or window length L")
    p.add_argument("--n-sub", type=int, default=100)
    p.add_argument("--batch", type=int, required=True, help="paths to generate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fallback", choices=("nearest", "error"), default="nearest")
    p.add_argument("--kernel", choices=("quartic", "biweight"), default="quartic")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="compare generated against reference data")
    p.add_argument("--ref", required=True)
    p.add_argument("--gen", required=True)
    p.add_argument("--qv-exclude-origin", action="store_true",
                   help="drop the implicit X_{t_0}=0 increment from QV")
    p.add_argument("--hurst", action="store_true", help="add roughness estimates")
    p.add_argument("--figures", default=None, metavar="DIR",
                   help="also render comparison figures into DIR")
    p.add_argument("--out", required=True, help="report JSON")
    p.set_defaults(func=cmd_evaluate, seed=None)

    p = sub.add_parser("hedge", help="train a replication policy")
    p.add_argument("--train", required=True)
    p.add_argument("--valid", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--s0", type=float, default=1.0, help="spot at t_0")
    p.add_argument("--hidden", default="16,16")
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--figures", default=None, metavar="DIR")
    p.add_argument("--out", required=True, help="result JSON")
    p.set_defaults(func=cmd_hedge)

    p = sub.add_parser("hurst", help="per-path roughness of a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hurst, seed=None)

    p = sub.add_parser("split", help="cut a dataset by path index ranges")
    p.add_argument("--data", required=True)
    p.add_argument("--ranges", required=True, help="comma list of lo:hi path ranges")
    p.add_argument("--out", nargs="+", required=True, help="one CSV per range")
    p.set_defaults(func=cmd_split, seed=None)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        args.func(args)
    except _ERROR_CLASSES as exc:
        for cls, category in _ERROR_CATEGORIES:
            if isinstance(exc, cls):
                print(f"error:{category}: {exc}", file=sys.stderr)
                return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
