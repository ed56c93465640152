"""Multi-trial experiment runner with validation-based lambda selection.

For every epsilon in the grid and every lambda in the grid, ``trials``
seeded runs are trained on the train split. The lambda with the best mean
validation accuracy is selected per epsilon, and only its trials are scored
on the test split. Each trial draws from its own child stream keyed by
``(epsilon index, lambda index, trial)``, so results do not depend on the
order or degree of parallelism, and growing a grid leaves existing trials
untouched.
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, bce_loss, require_scaled
from .data import split
from .frank_wolfe import FwConfig, nonprivate_frank_wolfe, private_lasso
from .metrics import auc, count_nonzero, predict, support_report
from .multinomial import (
    MULTINOMIAL_LIPSCHITZ,
    multinomial_frank_wolfe,
    multinomial_loss,
    multinomial_private_lasso,
    multinomial_sparsifier,
    predict_classes,
)
from .noise import RandomSource
from .sparsifier import DEFAULT_NONPRIVATE_ITERATIONS, SparsifierConfig, sparsifier

log = logging.getLogger(__name__)

ALGORITHMS = ("nonprivate", "private-lasso", "sparsifier", "multinomial")
DEFAULT_LAMBDAS = tuple(float(x) for x in np.geomspace(1.0, 50.0, 5))
DEFAULT_PRIVATE_ITERATIONS = 1000

# stream keys under the master seed
SPLIT_KEY = 0
TRIAL_KEY = 1

TRIAL_COLUMNS = (
    "epsilon", "lambda", "trial", "seed", "selected", "epsilon1", "epsilon2", "delta",
    "iterations", "nonzeros", "nonprivate_nonzeros", "correct_zeros", "incorrect_zeros",
    "f1", "train_error", "val_error", "test_error", "auc", "wall_ms",
)
AGGREGATE_METRICS = (
    "nonzeros", "nonprivate_nonzeros", "correct_zeros", "incorrect_zeros", "f1",
    "train_error", "val_error", "test_error", "auc", "wall_ms",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs besides the data.

    ``iterations`` defaults to 1000 for the private algorithms and to
    ``nonprivate_iterations`` for ``algorithm="nonprivate"``. ``delta``
    defaults to ``1 / n_train``. For the Sparsifier each grid epsilon is the
    total budget, split as ``epsilon1`` for the count and the rest for the
    optimizer. ``multinomial_sparsify`` is ``None`` (plain private solver),
    ``"entries"`` or ``"columns"``.
    """

    algorithm: str = "sparsifier"
    epsilons: Sequence[float] = (1.0,)
    lambdas: Sequence[float] = DEFAULT_LAMBDAS
    epsilon1: float = 0.05
    delta: Optional[float] = None
    iterations: Optional[int] = None
    nonprivate_iterations: int = DEFAULT_NONPRIVATE_ITERATIONS
    alpha: Optional[float] = None
    beta: Optional[float] = None
    rho: float = 1.0
    trials: int = 50
    seed: int = 0
    split: Sequence[float] = (0.6, 0.2, 0.2)
    classes: int = 2
    multinomial_sparsify: Optional[str] = None
    jobs: int = 1
    timing: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; pick one of {ALGORITHMS}")
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        object.__setattr__(self, "split", tuple(float(f) for f in self.split))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.epsilons or not self.lambdas:
            raise ValueError("epsilon and lambda grids must be nonempty")
        if any(not lam > 0 for lam in self.lambdas):
            raise ValueError("every lambda must be positive")
        if self.private and any(not e > 0 for e in self.epsilons):
            raise ValueError("every epsilon must be positive")
        if self.uses_count_budget and any(e <= self.epsilon1 for e in self.epsilons):
            raise ValueError("each total epsilon must exceed epsilon1 so epsilon2 > 0")
        if self.algorithm == "multinomial" and self.classes < 2:
            raise ValueError("multinomial needs --classes >= 2")
        if self.multinomial_sparsify not in (None, "entries", "columns"):
            raise ValueError("multinomial_sparsify must be None, 'entries' or 'columns'")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    @property
    def private(self) -> bool:
        return self.algorithm != "nonprivate"

    @property
    def uses_count_budget(self) -> bool:
        return self.algorithm == "sparsifier" or (
            self.algorithm == "multinomial" and self.multinomial_sparsify is not None)

    @property
    def needs_nonprivate(self) -> bool:
        return self.algorithm == "nonprivate" or self.uses_count_budget

    @property
    def solver_iterations(self) -> int:
        if self.iterations is not None:
            return int(self.iterations)
        return self.nonprivate_iterations if self.algorithm == "nonprivate" else DEFAULT_PRIVATE_ITERATIONS

    def budget(self, epsilon: float):
        """``(epsilon_total, epsilon1, epsilon2)`` for one grid value; unused parts are None."""
        if not self.private:
            return None, None, None
        if self.uses_count_budget:
            return epsilon, self.epsilon1, epsilon - self.epsilon1
        return epsilon, None, None


@dataclass
class TrialRecord:
    epsilon: Optional[float]
    lam: float
    trial: int
    seed: int
    epsilon1: Optional[float]
    epsilon2: Optional[float]
    delta: Optional[float]
    iterations: int
    nonzeros: int
    nonprivate_nonzeros: Optional[int] = None
    correct_zeros: Optional[int] = None
    incorrect_zeros: Optional[int] = None
    f1: Optional[float] = None
    train_error: Optional[float] = None
    val_error: Optional[float] = None
    test_error: Optional[float] = None
    auc: Optional[float] = None
    wall_ms: Optional[float] = None
    selected: bool = False
    weights: Optional[np.ndarray] = field(default=None, repr=False)

    def row(self) -> dict:
        out = {k: getattr(self, k) for k in TRIAL_COLUMNS if k not in ("lambda", "selected")}
        out["lambda"] = self.lam
        out["selected"] = int(self.selected)
        return out


@dataclass
class ExperimentResult:
    records: list
    selected_lambda: dict
    delta: Optional[float]
    nonprivate: dict = field(default_factory=dict)
    train: Optional[Dataset] = field(default=None, repr=False)

    def selected(self, epsilon: Optional[float] = None) -> list:
        return [r for r in self.records if r.selected and (epsilon is None or r.epsilon == epsilon)]


# -- single fits ---------------------------------------------------------

def sparsifier_config(cfg: ExperimentConfig, epsilon: float, lam: float, delta: float) -> SparsifierConfig:
    _, eps1, eps2 = cfg.budget(epsilon)
    return SparsifierConfig(
        epsilon1=eps1, epsilon2=eps2, delta=delta, lam=lam, iterations=cfg.solver_iterations,
        nonprivate_iterations=cfg.nonprivate_iterations, rho=cfg.rho, alpha=cfg.alpha, beta=cfg.beta)


def nonprivate_solution(cfg: ExperimentConfig, data: Dataset, lam: float) -> np.ndarray:
    """The deterministic nonprivate fit that ``cfg.algorithm`` depends on."""
    iterations = cfg.solver_iterations if cfg.algorithm == "nonprivate" else cfg.nonprivate_iterations
    if cfg.algorithm == "multinomial":
        return multinomial_frank_wolfe(data, FwConfig(lam, iterations), cfg.classes)
    return nonprivate_frank_wolfe(data, FwConfig(lam, iterations))


def fit(cfg: ExperimentConfig, data: Dataset, epsilon: float, lam: float, delta: Optional[float],
        rng: RandomSource, w_nonprivate=None) -> np.ndarray:
    """Train ``cfg.algorithm`` once at ``(epsilon, lam)``.

    ``w_nonprivate`` may carry a cached :func:`nonprivate_solution`.
    """
    algo = cfg.algorithm
    if algo == "nonprivate":
        return nonprivate_solution(cfg, data, lam) if w_nonprivate is None else w_nonprivate.copy()
    if algo == "private-lasso":
        fw = FwConfig(lam, cfg.solver_iterations, epsilon=epsilon, delta=delta)
        return private_lasso(data, fw, rng)
    if algo == "sparsifier":
        return sparsifier(data, sparsifier_config(cfg, epsilon, lam, delta), rng, w_nonprivate=w_nonprivate)
    if cfg.multinomial_sparsify is None:
        fw = FwConfig(lam, cfg.solver_iterations, lipschitz=MULTINOMIAL_LIPSCHITZ,
                      epsilon=epsilon, delta=delta)
        return multinomial_private_lasso(data, fw, cfg.classes, rng)
    return multinomial_sparsifier(data, sparsifier_config(cfg, epsilon, lam, delta), cfg.classes, rng,
                                  count=cfg.multinomial_sparsify, w_nonprivate=w_nonprivate)


def training_loss(cfg_or_algorithm, w, data: Dataset) -> float:
    algo = getattr(cfg_or_algorithm, "algorithm", cfg_or_algorithm)
    return multinomial_loss(w, data) if algo == "multinomial" else bce_loss(w, data)


def error_rate(w, data: Dataset) -> float:
    w = np.asarray(w)
    if w.ndim == 2:
        return float(np.mean(predict_classes(w, data.features) != data.labels))
    return float(np.mean(predict(w, data.features) != data.labels))


def score_auc(w, data: Dataset) -> Optional[float]:
    """Test AUC for binary models; None when it is undefined."""
    w = np.asarray(w)
    if w.ndim == 2 or len(np.unique(data.labels)) != 2:
        return None
    return auc(data.features @ w, data.labels)


def support_columns(w) -> np.ndarray:
    """Per-feature support: a matrix column counts if any entry is nonzero."""
    w = np.asarray(w)
    return np.any(w != 0, axis=0) if w.ndim == 2 else w


# -- worker plumbing -----------------------------------------------------

_WORKER = {}


def _init_worker(cfg, train):
    _WORKER["cfg"] = cfg
    _WORKER["train"] = train


def _nonprivate_task(lam):
    return nonprivate_solution(_WORKER["cfg"], _WORKER["train"], lam)


def _trial_task(args):
    epsilon, lam, delta, seed, w_np = args
    start = time.perf_counter()
    w = fit(_WORKER["cfg"], _WORKER["train"], epsilon, lam, delta, RandomSource(seed), w_nonprivate=w_np)
    return w, (time.perf_counter() - start) * 1e3


class _Pool:
    """Runs tasks inline for ``jobs=1``, otherwise in worker processes.

    ``map`` always returns results in submission order.
    """

    def __init__(self, cfg, train):
        self.executor = None
        if cfg.jobs > 1:
            self.executor = ProcessPoolExecutor(cfg.jobs, initializer=_init_worker, initargs=(cfg, train))
        else:
            _init_worker(cfg, train)

    def map(self, fn, items):
        if self.executor is None:
            return [fn(x) for x in items]
        return list(self.executor.map(fn, items))

    def close(self):
        if self.executor is not None:
            self.executor.shutdown()
        _WORKER.clear()


# -- the experiment ------------------------------------------------------

def run_experiment(cfg: ExperimentConfig, data: Dataset, true_support=None,
                   trials_csv=None, aggregate_csv=None) -> ExperimentResult:
    """Run the full grid and optionally write the two CSV files.

    Parameters
    ----------
    cfg : ExperimentConfig
    data : Dataset
        Scaled features. Split with the stream keyed ``SPLIT_KEY``.
    true_support : array of int, optional
        Enables the support-recovery columns.
    trials_csv, aggregate_csv : path, optional
        Trial rows are appended per epsilon block once its lambda is
        chosen; rows finished before a failure are still written.
    """
    require_scaled(data)
    master = RandomSource(cfg.seed)
    train, val, test = split(data, cfg.split, master.child(SPLIT_KEY))
    if val is None:
        raise ValueError("lambda selection needs a nonzero validation fraction")
    if test is None:
        raise ValueError("test metrics need a nonzero test fraction")
    delta = cfg.delta
    if cfg.private and delta is None:
        delta = 1.0 / train.n
    epsilons = cfg.epsilons if cfg.private else (None,)

    writer = _TrialWriter(trials_csv)
    pool = _Pool(cfg, train)
    records, chosen, cache = [], {}, {}
    try:
        if cfg.needs_nonprivate:
            log.info("nonprivate solves for %d lambda values", len(cfg.lambdas))
            cache = dict(zip(cfg.lambdas, pool.map(_nonprivate_task, cfg.lambdas)))
        for ei, eps in enumerate(epsilons):
            block = []
            try:
                for li, lam in enumerate(cfg.lambdas):
                    log.info("epsilon=%s lambda=%.4g: %d trials", eps, lam, cfg.trials)
                    block.extend(_run_cell(cfg, master, pool, train, val, true_support, cache.get(lam),
                                           ei, li, eps, lam, delta))
            except BaseException:
                writer.write(block)
                raise
            chosen[eps] = _select(block, cfg.lambdas)
            for rec in block:
                if rec.lam == chosen[eps]:
                    rec.selected = True
                    rec.test_error = error_rate(rec.weights, test)
                    rec.auc = score_auc(rec.weights, test)
            writer.write(block)
            records.extend(block)
    finally:
        pool.close()
        writer.close()

    result = ExperimentResult(records, chosen, delta, cache, train)
    if aggregate_csv is not None:
        write_aggregate(result, aggregate_csv)
    return result


def _run_cell(cfg, master, pool, train, val, true_support, w_np, ei, li, eps, lam, delta):
    seeds = [master.child_seed(TRIAL_KEY, ei, li, t) for t in range(cfg.trials)]
    outputs = pool.map(_trial_task, [(eps, lam, delta, s, w_np) for s in seeds])
    _, eps1, eps2 = cfg.budget(eps)
    p = train.p
    records = []
    for t, (seed, (w, ms)) in enumerate(zip(seeds, outputs)):
        rec = TrialRecord(
            epsilon=eps, lam=lam, trial=t, seed=seed, epsilon1=eps1, epsilon2=eps2, delta=delta,
            iterations=cfg.solver_iterations, nonzeros=count_nonzero(w),
            train_error=error_rate(w, train), val_error=error_rate(w, val),
            wall_ms=ms if cfg.timing else None, weights=w)
        if cfg.uses_count_budget:
            rec.nonprivate_nonzeros = count_nonzero(w_np)
        if true_support is not None:
            rep = support_report(support_columns(w), true_support, p)
            rec.correct_zeros, rec.incorrect_zeros, rec.f1 = rep.correct_zeros, rep.incorrect_zeros, rep.f1
        records.append(rec)
    return records


def _select(block, lambdas) -> float:
    # best mean validation accuracy; the earlier grid value wins ties
    means = [np.mean([r.val_error for r in block if r.lam == lam]) for lam in lambdas]
    return lambdas[int(np.argmin(means))]


# -- CSV output ----------------------------------------------------------

def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


class _TrialWriter:
    def __init__(self, path):
        self.fh = None
        if path is not None:
            self.fh = open(path, "w", encoding="utf-8", newline="")
            self.writer = csv.DictWriter(self.fh, fieldnames=TRIAL_COLUMNS, lineterminator="\n")
            self.writer.writeheader()
            self.fh.flush()

    def write(self, records):
        if self.fh is None:
            return
        for rec in records:
            self.writer.writerow({k: _cell(v) for k, v in rec.row().items()})
        self.fh.flush()

    def close(self):
        if self.fh is not None:
            self.fh.close()


def aggregate(result: ExperimentResult) -> list:
    """Mean and sample std of each metric over the selected trials, per epsilon."""
    rows = []
    for eps, lam in result.selected_lambda.items():
        recs = result.selected(eps)
        row = {"epsilon": eps, "lambda": lam, "trials": len(recs)}
        for m in AGGREGATE_METRICS:
            vals = [getattr(r, m) for r in recs if getattr(r, m) is not None]
            row[f"{m}_mean"] = float(np.mean(vals)) if vals else None
            row[f"{m}_std"] = float(np.std(vals, ddof=1)) if len(vals) > 1 else None
        rows.append(row)
    return rows


def aggregate_columns() -> list:
    cols = ["epsilon", "lambda", "trials"]
    for m in AGGREGATE_METRICS:
        cols += [f"{m}_mean", f"{m}_std"]
    return cols


def write_aggregate(result: ExperimentResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=aggregate_columns(), lineterminator="\n")
        writer.writeheader()
        for row in aggregate(result):
            writer.writerow({k: _cell(v) for k, v in row.items()})

