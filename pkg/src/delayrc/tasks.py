"""Benchmark tasks and the end-to-end train/evaluate harness."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import readout
from .reservoir import ReservoirConfig, run_batch
from .separation import separation_curve

__all__ = [
    "NarmaSpec",
    "SyntheticClassSpec",
    "RegressionTask",
    "ClassificationTask",
    "TrainSpec",
    "narma_recurrence",
    "narma_generate",
    "synth_classes",
    "fit_readout",
    "hyperparameter",
    "run_benchmark",
]

# NARMA-10: y(t+1) = a y(t) + b y(t) sum_{i<order} y(t-i) + c u(t-order+1) u(t) + d
NARMA_COEFFS = (0.3, 0.05, 1.5, 0.1)
NARMA_INPUT_RANGE = (0.0, 0.5)
NARMA_DIVERGENCE = 1e6


class NarmaDiverged(ArithmeticError):
    pass


@dataclass(frozen=True)
class NarmaSpec:
    length: int
    seed: int
    order: int = 10


@dataclass(frozen=True)
class SyntheticClassSpec:
    templates: Sequence[Sequence[float]]
    samples_per_class: int
    noise: float
    seed: int

    @property
    def num_classes(self) -> int:
        return len(self.templates)


@dataclass(frozen=True)
class RegressionTask:
    """One long input series and a target aligned with it (target[t-1] <-> time t)."""

    inputs: np.ndarray
    target: np.ndarray


@dataclass(frozen=True)
class ClassificationTask:
    inputs: np.ndarray  # (num_samples, M), padded
    labels: np.ndarray


@dataclass(frozen=True)
class TrainSpec:
    method: str = "ridge"
    lam: float = 1e-6
    delta: float = 1e-3
    washout: int = 0
    train_fraction: float = 0.8
    seed: int = 0


def narma_recurrence(u: np.ndarray, order: int = 10) -> np.ndarray:
    """Iterate the NARMA recurrence; returns y(0..T) for inputs u(0..T-1).

    ``y(0..order-1)`` are zero and ``y(t+1)`` is defined for ``t >= order-1``.
    """
    a, b, c, d = NARMA_COEFFS
    T = len(u)
    y = np.zeros(T + 1)
    for t in range(order - 1, T):
        window = y[t - order + 1 : t + 1].sum()
        y[t + 1] = a * y[t] + b * y[t] * window + c * u[t - order + 1] * u[t] + d
        if not abs(y[t + 1]) <= NARMA_DIVERGENCE:
            raise NarmaDiverged("NARMA diverged; reseed")
    return y


def narma_generate(spec: NarmaSpec) -> tuple[np.ndarray, np.ndarray]:
    """Input series u(1..T) and target with ``target[t-1] = y(t)``.

    The target at reservoir time t depends on inputs up to and including u(t).
    """
    if spec.length <= spec.order:
        raise ValueError("length must exceed the NARMA order")
    rng = np.random.default_rng(spec.seed)
    u = rng.uniform(*NARMA_INPUT_RANGE, size=spec.length)
    y = narma_recurrence(u, spec.order)
    return u, y[1:]


def synth_classes(spec: SyntheticClassSpec) -> ClassificationTask:
    """Template plus Uniform[-noise, noise] jitter, ``samples_per_class`` per template."""
    templates = [np.asarray(t, dtype=np.float64) for t in spec.templates]
    if not templates:
        raise ValueError("no templates")
    if len({t.shape for t in templates}) != 1:
        raise ValueError("templates must share one length")
    rng = np.random.default_rng(spec.seed)
    inputs, labels = [], []
    for label, tpl in enumerate(templates):
        for _ in range(spec.samples_per_class):
            inputs.append(tpl + rng.uniform(-spec.noise, spec.noise, size=tpl.shape))
            labels.append(label)
    return ClassificationTask(np.array(inputs), np.array(labels))


def fit_readout(X, target, spec: TrainSpec) -> readout.ReadoutWeights:
    if spec.method in ("ls", "least_squares"):
        return readout.train_least_squares(X, target)
    if spec.method == "ridge":
        return readout.train_ridge(X, target, spec.lam)
    if spec.method == "dantzig":
        X = X.X if isinstance(X, readout.DesignMatrix) else np.asarray(X)
        return readout.ReadoutWeights(readout.dantzig_selector(X.T, target, spec.delta))
    raise ValueError(f"unknown training method {spec.method!r}")


def hyperparameter(spec: TrainSpec) -> float | None:
    return {"ridge": spec.lam, "dantzig": spec.delta}.get(spec.method)


def _regression(config: ReservoirConfig, task: RegressionTask, spec: TrainSpec) -> dict:
    u = np.asarray(task.inputs, dtype=np.float64)
    target = np.asarray(task.target, dtype=np.float64)
    if u.shape != target.shape:
        raise ValueError("input and target lengths differ")
    if spec.washout >= len(u):
        raise ValueError("washout leaves no samples")
    states = run_batch(config, u[None])[0][:, 1:]
    X, tgt = states[:, spec.washout :], target[spec.washout :]
    n_train = int(round(spec.train_fraction * X.shape[1]))
    if not 2 <= n_train <= X.shape[1] - 2:
        raise ValueError("train/test split leaves fewer than two samples on one side")
    w = fit_readout(X[:, :n_train], tgt[:n_train], spec)
    pred = w.w @ X
    return {
        "task": "regression",
        "method": spec.method,
        "lambda_or_delta": hyperparameter(spec),
        "nrmse_train": readout.nrmse(pred[:n_train], tgt[:n_train]),
        "nrmse_test": readout.nrmse(pred[n_train:], tgt[n_train:]),
        "weight_norm": w.norm,
        "num_train": n_train,
        "num_test": X.shape[1] - n_train,
        "weights": w.w.tolist(),
    }


def _stratified_split(labels: np.ndarray, fraction: float, seed: int):
    rng = np.random.default_rng(seed)
    train, test = [], []
    for lab in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == lab))
        k = min(max(1, int(round(fraction * idx.size))), idx.size)
        train.extend(idx[:k])
        test.extend(idx[k:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def _classification(config: ReservoirConfig, task: ClassificationTask, spec: TrainSpec) -> dict:
    U = np.atleast_2d(np.asarray(task.inputs, dtype=np.float64))
    labels = np.asarray(task.labels)
    if U.shape[0] != labels.size:
        raise ValueError("one label per input is required")
    if spec.washout >= U.shape[1]:
        raise ValueError("washout leaves no samples")
    classes, codes = np.unique(labels, return_inverse=True)
    train, test = _stratified_split(labels, spec.train_fraction, spec.seed)
    states = run_batch(config, U)[:, :, spec.washout + 1 :]  # (B, N+1, T)
    T = states.shape[2]
    X = np.hstack([states[i] for i in train])
    target = np.repeat(codes[train].astype(np.float64), T)
    w = fit_readout(X, target, spec)
    score = np.einsum("k,bkt->b", w.w, states) / T
    means = np.array([score[train][codes[train] == c].mean() for c in range(classes.size)])
    pred = np.argmin(np.abs(score[:, None] - means[None, :]), axis=1)

    def acc(idx):
        return float(np.mean(pred[idx] == codes[idx])) if idx.size else None

    sep = separation_curve(config, U, labels.tolist())
    return {
        "task": "classification",
        "method": spec.method,
        "lambda_or_delta": hyperparameter(spec),
        "accuracy_train": acc(train),
        "accuracy_test": acc(test),
        "weight_norm": w.norm,
        "num_train": int(train.size),
        "num_test": int(test.size),
        "separation": sep.to_dict(),
    }


def run_benchmark(config: ReservoirConfig, task, spec: TrainSpec | None = None) -> dict:
    """Train a readout on ``task`` and report its quality.

    Regression tasks split the post-washout time steps chronologically and
    report NRMSE. Classification tasks split samples per class, train the
    readout towards the integer class code at every retained time step, and
    assign each sample to the nearest class mean of its time-averaged output.
    """
    spec = spec or TrainSpec()
    if isinstance(task, RegressionTask):
        return _regression(config, task, spec)
    if isinstance(task, ClassificationTask):
        return _classification(config, task, spec)
    raise TypeError(f"unsupported task {type(task).__name__}")
