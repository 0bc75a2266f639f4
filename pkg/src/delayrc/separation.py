"""Separation metrics over instantaneous reservoir states.

At a fixed time t the states of all inputs are grouped into labeled classes.
From the class centers of mass we form the inter-class distance C_d (mean
distance over all ordered pairs of centers, the zero n = m terms included),
the intra-class variance C_v (mean distance of members to their own center,
averaged over classes) and the separation ``Sep = C_d / (C_v + 1)``.
Distances are Euclidean on the full (N+1)-vector.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .reservoir import ReservoirConfig, run_batch

__all__ = [
    "SeparationReport",
    "class_average",
    "inter_class_distance",
    "intra_class_variance",
    "separation",
    "group_states",
    "separation_curve",
    "InverseProbe",
    "inverse_separation_probe",
    "injectivity_check",
    "periodicity_check",
    "periodic_shift",
]


def _class_array(members) -> np.ndarray:
    arr = np.asarray(members, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] == 0:
        raise ValueError("empty class")
    return arr


def _classes(classes) -> list[np.ndarray]:
    out = [_class_array(c) for c in classes]
    if not out:
        raise ValueError("at least one class is required")
    if len({c.shape[1] for c in out}) != 1:
        raise ValueError("state vectors must share one length")
    return out


def class_average(members) -> np.ndarray:
    return _class_array(members).mean(axis=0)


def _centers(classes) -> np.ndarray:
    return np.array([c.mean(axis=0) for c in _classes(classes)])


def inter_class_distance(classes: Sequence) -> float:
    mu = _centers(classes)
    diffs = np.linalg.norm(mu[:, None, :] - mu[None, :, :], axis=-1)
    return float(diffs.sum() / len(mu) ** 2)


def intra_class_variance(classes: Sequence) -> float:
    cs = _classes(classes)
    spreads = [np.linalg.norm(c - c.mean(axis=0), axis=1).mean() for c in cs]
    return float(np.mean(spreads))


def separation(classes: Sequence) -> float:
    return inter_class_distance(classes) / (intra_class_variance(classes) + 1)


def group_states(states: np.ndarray, labels: Sequence) -> tuple[list, list[np.ndarray]]:
    """Split rows of ``states`` by label; returns (labels in first-seen order, classes)."""
    order: list = []
    for lab in labels:
        if lab not in order:
            order.append(lab)
    labels = np.asarray(labels, dtype=object)
    return order, [states[labels == lab] for lab in order]


@dataclass(frozen=True)
class SeparationReport:
    """Per-time metrics for t = 0..M."""

    C_d: np.ndarray
    C_v: np.ndarray

    @property
    def sep(self) -> np.ndarray:
        return self.C_d / (self.C_v + 1)

    @property
    def argmax_time(self) -> int:
        return int(np.argmax(self.sep))

    def to_dict(self) -> dict:
        return {
            "t": list(range(len(self.C_d))),
            "C_d": self.C_d.tolist(),
            "C_v": self.C_v.tolist(),
            "Sep": self.sep.tolist(),
            "argmax_time": self.argmax_time,
            "max_Sep": float(self.sep.max()),
        }


def separation_curve(config: ReservoirConfig, inputs, labels: Sequence) -> SeparationReport:
    """C_d(t), C_v(t) for every t of a labeled, padded input batch."""
    X = run_batch(config, inputs)
    if X.shape[0] != len(labels):
        raise ValueError("one label per input is required")
    T = X.shape[2]
    cd, cv = np.empty(T), np.empty(T)
    for t in range(T):
        _, classes = group_states(X[:, :, t], labels)
        cd[t] = inter_class_distance(classes)
        cv[t] = intra_class_variance(classes)
    return SeparationReport(cd, cv)


@dataclass(frozen=True)
class InverseProbe:
    infimum: float
    pair: tuple[int, int]
    t: int
    num_admissible: int

    def to_dict(self) -> dict:
        return asdict(self)


def inverse_separation_probe(
    config: ReservoirConfig,
    inputs,
    labels: Sequence | None = None,
    epsilon: float = 1.0,
    atol: float = 1e-12,
) -> InverseProbe:
    """Largest C supported by the data in ``|x_u(t) - x_v(t)| >= C |u(t) - v(t)|``.

    Ranges over all pairs of inputs (only cross-class pairs when ``labels`` is
    given) and all t with ``|u(t) - v(t)| >= epsilon``. State distances at or
    below ``atol`` count as coincident states (floating point round-off).
    ``t`` is 1-based.
    """
    U = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    X = run_batch(config, U)
    best = (np.inf, (-1, -1), -1)
    count = 0
    for i, j in combinations(range(U.shape[0]), 2):
        if labels is not None and labels[i] == labels[j]:
            continue
        du = np.abs(U[i] - U[j])
        ok = du >= epsilon
        if not ok.any():
            continue
        dx = np.linalg.norm(X[i, :, 1:] - X[j, :, 1:], axis=0)
        dx = np.where(dx <= atol, 0.0, dx)
        r = np.where(ok, dx / np.where(ok, du, 1.0), np.inf)
        t = int(np.argmin(r))
        count += int(ok.sum())
        if r[t] < best[0]:
            best = (float(r[t]), (i, j), t + 1)
    if count == 0:
        raise ValueError("no admissible pair/time step")
    return InverseProbe(best[0], best[1], best[2], count)


def _require_distinct(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u and v must be padded to a common length")
    diff = np.flatnonzero(u != v)
    if diff.size == 0:
        raise ValueError("u and v are identical")
    return u, v, int(diff[0]) + 1


def injectivity_check(config: ReservoirConfig, u, v) -> bool:
    """Whether the states differ at the first time u and v differ.

    For injective f this always holds; ``False`` indicates a bug.
    """
    if not config.nonlinearity.injective:
        raise ValueError(f"{config.nonlinearity.kind} is not injective")
    u, v, t1 = _require_distinct(u, v)
    X = run_batch(config, np.stack([u[:t1], v[:t1]]))
    return bool(np.any(X[0, :, t1] != X[1, :, t1]))


def periodic_shift(config: ReservoirConfig, u) -> np.ndarray:
    """``u - P / beta`` for a P-periodic nonlinearity."""
    P = config.nonlinearity.period
    if P is None:
        raise ValueError(f"{config.nonlinearity.kind} is not periodic")
    return np.asarray(u, dtype=np.float64) - P / config.beta


def periodicity_check(config: ReservoirConfig, u, tol: float = 1e-9) -> bool:
    v = periodic_shift(config, u)
    X = run_batch(config, np.stack([np.asarray(u, dtype=np.float64), v]))
    return bool(np.max(np.abs(X[0] - X[1])) <= tol)
