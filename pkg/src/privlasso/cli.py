"""Command-line entry point: ``privlasso {gen-data,train,evaluate,experiment}``.

Exit codes: 0 on success, 1 on runtime errors, 2 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from .core import Dataset
from .data import (
    LibsvmParseError,
    SyntheticSpec,
    generate_synthetic,
    generate_synthetic_multiclass,
    load_libsvm,
    load_support,
    normalize_rows,
    save_libsvm,
    save_support,
    scale_features,
    stratified_subsample,
    support_sidecar_path,
)
from .experiment import (
    ALGORITHMS,
    DEFAULT_LAMBDAS,
    ExperimentConfig,
    aggregate,
    error_rate,
    fit,
    run_experiment,
    score_auc,
    support_columns,
    training_loss,
)
from .metrics import count_nonzero, support_report
from .model_io import load_model, save_model
from .noise import RandomSource

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
DEFAULT_EPSILON1, DEFAULT_EPSILON2 = 0.05, 0.95


class UsageError(Exception):
    pass


# -- argument helpers ----------------------------------------------------

def _fractions(text):
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad split {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("split needs three comma-separated fractions")
    return parts


def _add_privacy(p, grid=False):
    g = p.add_argument_group("privacy")
    if grid:
        g.add_argument("--epsilon", type=float, action="append",
                       help="total epsilon; repeat for a grid (default 1)")
    else:
        g.add_argument("--epsilon", type=float, help="total epsilon (default 1)")
    g.add_argument("--epsilon1", type=float, help="count budget for the sparsifier (default 0.05)")
    g.add_argument("--epsilon2", type=float,
                   help="optimizer budget for the sparsifier (default: epsilon - epsilon1)")
    g.add_argument("--delta", type=float, help="default 1/n_train")


def _add_model(p, grid=False):
    p.add_argument("--algorithm", choices=ALGORITHMS, default="sparsifier")
    if grid:
        p.add_argument("--lambda", dest="lambdas", type=float, action="append",
                       help="L1 radius; repeat for a grid (default: 5 log-spaced values in [1, 50])")
    else:
        p.add_argument("--lambda", dest="lambdas", type=float, action="append",
                       help="L1 radius (default 10)")
    p.add_argument("--iterations", type=int,
                   help="solver iterations (default 1000; 50000 for --algorithm nonprivate)")
    p.add_argument("--nonprivate-iterations", type=int, default=50_000)
    p.add_argument("--alpha", type=float, help="lower count clip (default sqrt(p))")
    p.add_argument("--beta", type=float, help="upper count clip (default 2 sqrt(p))")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--classes", type=int, default=2, help="class count for --algorithm multinomial")
    p.add_argument("--multinomial-sparsify", choices=("off", "entries", "columns"), default="off",
                   help="apply the sparsifier to multinomial weights, counting entries or columns")
    p.add_argument("--seed", type=int, default=0)
    _add_privacy(p, grid)


def _add_preprocess(p):
    p.add_argument("--normalize-rows", action="store_true",
                   help="after max-abs feature scaling, rescale every sample to unit L2 norm")
    p.add_argument("--subsample", type=int, metavar="N", help="stratified subsample of N rows")
    p.add_argument("--positives", type=int, metavar="M", help="positives kept by --subsample")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privlasso",
                                     description="Differentially private sparse logistic regression.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic LIBSVM dataset and its true support")
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, default=10_000)
    g.add_argument("--p", type=int, default=100)
    g.add_argument("--correlation", type=float, default=0.5)
    g.add_argument("--classes", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("train", help="fit one model and write it to a text file")
    t.add_argument("--data", required=True, help="LIBSVM file")
    t.add_argument("--out", required=True, help="model file")
    _add_model(t)
    _add_preprocess(t)

    e = sub.add_parser("evaluate", help="score a model file on a dataset")
    e.add_argument("--model", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--support", help="true-support sidecar (one index per line)")
    e.add_argument("--out", help="append a CSV row of the metrics here")

    x = sub.add_parser("experiment", help="multi-trial grid run with CSV output")
    x.add_argument("--data", help="LIBSVM file (default: synthetic data from --n/--p)")
    x.add_argument("--support", help="true-support sidecar for --data")
    x.add_argument("--n", type=int, default=10_000)
    x.add_argument("--p", type=int, default=100)
    x.add_argument("--correlation", type=float, default=0.5)
    x.add_argument("--out", required=True, help="per-trial CSV")
    x.add_argument("--aggregate", help="per-epsilon CSV (default: OUT with _aggregate suffix)")
    x.add_argument("--trials", type=int, default=50)
    x.add_argument("--split", type=_fractions, default=(0.6, 0.2, 0.2))
    x.add_argument("--jobs", type=int, default=1)
    x.add_argument("--timing", action="store_true", help="fill the wall_ms column")
    _add_model(x, grid=True)
    _add_preprocess(x)
    return parser


def resolve_budget(args, algorithm, counted):
    """Return the epsilon list plus epsilon1, checking that the parts add up."""
    eps_list = args.epsilon if isinstance(args.epsilon, list) else (
        [args.epsilon] if args.epsilon is not None else None)
    eps1 = args.epsilon1 if args.epsilon1 is not None else DEFAULT_EPSILON1
    if not counted:
        if args.epsilon1 is not None or args.epsilon2 is not None:
            if eps_list is None and args.epsilon1 is not None and args.epsilon2 is not None:
                return [args.epsilon1 + args.epsilon2], eps1
            raise UsageError(f"--epsilon1/--epsilon2 only apply to the sparsifier, not {algorithm}")
        return eps_list or [1.0], eps1
    if eps_list is None:
        eps2 = args.epsilon2 if args.epsilon2 is not None else DEFAULT_EPSILON2
        return [eps1 + eps2], eps1
    if args.epsilon2 is not None:
        for eps in eps_list:
            if abs(eps1 + args.epsilon2 - eps) > 1e-12:
                raise UsageError(f"epsilon1 + epsilon2 = {eps1 + args.epsilon2} does not match --epsilon {eps}")
    return eps_list, eps1


def _config(args, grid):
    sparsify = None if args.multinomial_sparsify == "off" else args.multinomial_sparsify
    counted = args.algorithm == "sparsifier" or (args.algorithm == "multinomial" and sparsify is not None)
    epsilons, eps1 = resolve_budget(args, args.algorithm, counted)
    if grid:
        lambdas = args.lambdas or list(DEFAULT_LAMBDAS)
    else:
        if args.lambdas and len(args.lambdas) > 1:
            raise UsageError("train takes a single --lambda")
        lambdas = args.lambdas or [10.0]
    extra = {}
    if grid:
        extra = dict(trials=args.trials, split=args.split, jobs=args.jobs, timing=args.timing)
    return ExperimentConfig(
        algorithm=args.algorithm, epsilons=epsilons, lambdas=lambdas, epsilon1=eps1, delta=args.delta,
        iterations=args.iterations, nonprivate_iterations=args.nonprivate_iterations,
        alpha=args.alpha, beta=args.beta, rho=args.rho, seed=args.seed, classes=args.classes,
        multinomial_sparsify=sparsify, **extra)


def _load(path, args, multiclass):
    data = load_libsvm(path, binary=not multiclass)
    if args.subsample is not None:
        if args.positives is None:
            raise UsageError("--subsample needs --positives")
        data = stratified_subsample(data, args.subsample, args.positives, RandomSource(args.seed).child(2))
    return _preprocess(data, args.normalize_rows)


def _preprocess(data: Dataset, rows: bool) -> Dataset:
    data = scale_features(data)
    return normalize_rows(data) if rows else data


# -- commands ------------------------------------------------------------

def cmd_gen_data(args):
    rng = RandomSource(args.seed)
    if args.classes > 2:
        data, W = generate_synthetic_multiclass(args.n, args.p, args.classes, rng,
                                                correlation=args.correlation)
        support = np.flatnonzero(np.any(W != 0, axis=0))
    else:
        data, support = generate_synthetic(SyntheticSpec(n=args.n, p=args.p, correlation=args.correlation), rng)
    save_libsvm(data, args.out)
    save_support(support, support_sidecar_path(args.out))
    print(f"wrote {data.n} samples, p={data.p}, to {args.out}")
    return EXIT_OK


def cmd_train(args):
    cfg = _config(args, grid=False)
    data = _load(args.data, args, cfg.algorithm == "multinomial")
    eps, lam = cfg.epsilons[0], cfg.lambdas[0]
    delta = cfg.delta if cfg.delta is not None else 1.0 / data.n
    w = fit(cfg, data, eps, lam, delta, RandomSource(cfg.seed))
    eps_total, eps1, eps2 = cfg.budget(eps)
    save_model(args.out, w, algorithm=cfg.algorithm, epsilon_total=eps_total, epsilon1=eps1, epsilon2=eps2,
               delta=delta if cfg.private else None, **{"lambda": lam}, iterations=cfg.solver_iterations,
               seed=cfg.seed, p=data.p, classes=cfg.classes, normalize_rows=int(args.normalize_rows))
    print(f"nonzeros {count_nonzero(w)}")
    print(f"train_loss {training_loss(cfg, w, data)!r}")
    return EXIT_OK


def cmd_evaluate(args):
    model = load_model(args.model)
    w = model.weights
    multiclass = model.is_matrix
    data = load_libsvm(args.data, binary=not multiclass)
    p = w.shape[-1]
    if data.p > p:
        raise ValueError(f"dataset has {data.p} features but the model has {p}")
    if data.p < p:
        # trailing all-zero features are invisible in LIBSVM text
        data = Dataset(np.pad(data.features, ((0, 0), (0, p - data.p))), data.labels)
    data = _preprocess(data, bool(model.meta.get("normalize_rows")))
    metrics = {
        "nonzeros": count_nonzero(w),
        "loss": training_loss("multinomial" if multiclass else "binary", w, data),
        "accuracy": 1.0 - error_rate(w, data),
        "error": error_rate(w, data),
        "auc": score_auc(w, data),
    }
    if args.support:
        rep = support_report(support_columns(w), load_support(args.support), p)
        metrics.update(correct_zeros=rep.correct_zeros, incorrect_zeros=rep.incorrect_zeros, f1=rep.f1)
    for k, v in metrics.items():
        print(f"{k} {'NA' if v is None else repr(v)}")
    if args.out:
        new = not os.path.exists(args.out) or os.path.getsize(args.out) == 0
        with open(args.out, "a", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["model", "data", *metrics], lineterminator="\n")
            if new:
                writer.writeheader()
            writer.writerow({"model": args.model, "data": args.data,
                             **{k: "" if v is None else v for k, v in metrics.items()}})
    return EXIT_OK


def cmd_experiment(args):
    cfg = _config(args, grid=True)
    multiclass = cfg.algorithm == "multinomial"
    support = None
    if args.data:
        data = _load(args.data, args, multiclass)
        if args.support:
            support = load_support(args.support)
    else:
        rng = RandomSource(args.seed)
        if multiclass:
            data, W = generate_synthetic_multiclass(args.n, args.p, cfg.classes, rng,
                                                    correlation=args.correlation)
            support = np.flatnonzero(np.any(W != 0, axis=0))
        else:
            data, support = generate_synthetic(
                SyntheticSpec(n=args.n, p=args.p, correlation=args.correlation), rng)
        if args.normalize_rows:
            data = normalize_rows(data)
    agg_path = args.aggregate or _aggregate_path(args.out)
    result = run_experiment(cfg, data, support, trials_csv=args.out, aggregate_csv=agg_path)
    for row in aggregate(result):
        parts = [f"epsilon={row['epsilon']}", f"lambda={row['lambda']:.4g}"]
        for m in ("nonzeros", "correct_zeros", "incorrect_zeros", "f1", "test_error"):
            if row[f"{m}_mean"] is not None:
                parts.append(f"{m}={row[f'{m}_mean']:.4g}")
        print(" ".join(parts))
    print(f"wrote {args.out} and {agg_path}")
    return EXIT_OK


def _aggregate_path(path):
    root, ext = os.path.splitext(path)
    return f"{root}_aggregate{ext or '.csv'}"


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (OSError, LibsvmParseError) as exc:
        print(f"privlasso: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, IndexError, ArithmeticError) as exc:
        print(f"privlasso: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
