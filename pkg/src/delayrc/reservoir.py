"""Single nonlinear node with a delay line.

Nodes are indexed 0..N (N+1 in total). Node 0 is the nonlinear input node;
nodes 1..N form a pure delay line so that ``x_{k+1}(t) = x_k(t-1)``. The
head node is driven by

    x_0(t) = f(alpha * x_N(t-1) + beta * u(t))        (delayed feedback)
    x_0(t) = f(alpha * x_N(t)   + beta * u(t))        (instantaneous feedback)

with ``x_k(0) = 0`` for every node and ``u(0) = 0``. A reservoir written with
nodes 1..N and ``x_1`` as the input node is the same object re-indexed.

Because the delay line is a shift register, every node state is a lagged copy
of the head node: ``x_k(t) = x_0(t-k)`` (zero for ``t <= k``). The batch
routines exploit this and only iterate the head node.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Feedback",
    "Nonlinearity",
    "ReservoirConfig",
    "Trajectory",
    "pad_inputs",
    "normalize_input",
    "apply_mask",
    "step",
    "run",
    "head_sequences",
    "run_batch",
    "outputs_batch",
    "read_series_csv",
    "write_series_csv",
    "write_trajectory_csv",
]


class Feedback(str, enum.Enum):
    DELAYED = "delayed"
    INSTANTANEOUS = "instantaneous"


_KINDS = ("tanh", "sine", "scaled_tanh")


@dataclass(frozen=True)
class Nonlinearity:
    """Activation of the input node, drawn from a closed set with known
    Lipschitz constants.

    ``scaled_tanh`` is ``tanh(gain * x)``; its Lipschitz constant is ``gain``.
    """

    kind: str = "tanh"
    gain: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown nonlinearity {self.kind!r}; expected one of {_KINDS}")
        if not self.gain > 0:
            raise ValueError("gain must be positive")
        if self.kind != "scaled_tanh" and self.gain != 1.0:
            raise ValueError(f"gain only applies to scaled_tanh, not {self.kind}")

    @classmethod
    def tanh(cls) -> "Nonlinearity":
        return cls("tanh")

    @classmethod
    def sine(cls) -> "Nonlinearity":
        return cls("sine")

    @classmethod
    def scaled_tanh(cls, gain: float) -> "Nonlinearity":
        return cls("scaled_tanh", gain)

    @property
    def lipschitz(self) -> float:
        return self.gain if self.kind == "scaled_tanh" else 1.0

    @property
    def period(self) -> float | None:
        return 2 * math.pi if self.kind == "sine" else None

    @property
    def injective(self) -> bool:
        return self.kind != "sine"

    def __call__(self, x):
        if self.kind == "tanh":
            return np.tanh(x)
        if self.kind == "sine":
            return np.sin(x)
        return np.tanh(self.gain * x)


@dataclass(frozen=True)
class ReservoirConfig:
    N: int
    alpha: float
    beta: float
    nonlinearity: Nonlinearity = Nonlinearity()
    feedback: Feedback = Feedback.DELAYED

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N!r}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "feedback", Feedback(self.feedback))

    @property
    def num_nodes(self) -> int:
        return self.N + 1

    @property
    def lipschitz(self) -> float:
        return self.nonlinearity.lipschitz

    # lag between a head-node value and the value it feeds back into
    @property
    def _feedback_lag(self) -> int:
        return self.N + 1 if self.feedback is Feedback.DELAYED else self.N


@dataclass(frozen=True)
class Trajectory:
    """Node states ``states[k, t] = x_k(t)`` for k = 0..N and t = 0..M."""

    states: np.ndarray

    @property
    def N(self) -> int:
        return self.states.shape[0] - 1

    @property
    def M(self) -> int:
        return self.states.shape[1] - 1

    def at(self, t: int) -> np.ndarray:
        """Instantaneous reservoir state x(t)."""
        return self.states[:, t]


def _as_series(u) -> np.ndarray:
    arr = np.asarray(u, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"input series must be one-dimensional, got shape {arr.shape}")
    return arr


def pad_inputs(batch: Sequence[Sequence[float]]) -> np.ndarray:
    """Zero-extend every series to the longest length M.

    Returns an array of shape ``(len(batch), M)``; row i holds u_i(1..M).
    """
    series = [_as_series(u) for u in batch]
    if not series:
        raise ValueError("no inputs")
    M = max(len(u) for u in series)
    out = np.zeros((len(series), M))
    for i, u in enumerate(series):
        out[i, : len(u)] = u
    return out


def normalize_input(u) -> np.ndarray:
    u = _as_series(u)
    norm = np.linalg.norm(u)
    if norm == 0:
        raise ValueError("cannot normalize zero series")
    return u / norm


def apply_mask(u, mask) -> np.ndarray:
    """Multiply ``u`` elementwise by ``mask`` repeated periodically."""
    u = _as_series(u)
    mask = _as_series(mask)
    if mask.size == 0:
        raise ValueError("mask must be nonempty")
    return u * np.resize(mask, u.shape)


def step(prev, u_t: float, config: ReservoirConfig) -> np.ndarray:
    """Advance one state column by one time step."""
    prev = np.asarray(prev, dtype=np.float64)
    if prev.shape != (config.num_nodes,):
        raise ValueError(f"state must have {config.num_nodes} entries, got shape {prev.shape}")
    f, a, b = config.nonlinearity, config.alpha, config.beta
    new = np.empty_like(prev)
    new[1:] = prev[:-1]
    if config.feedback is Feedback.DELAYED:
        new[0] = f(a * prev[-1] + b * u_t)
    else:
        new[0] = f(a * new[-1] + b * u_t)
    return new


def head_sequences(config: ReservoirConfig, inputs) -> np.ndarray:
    """Head-node values ``x_0(t)`` for t = 0..M, one row per input.

    ``inputs`` is either a single series or a 2-D array of padded series.
    """
    U = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    B, M = U.shape
    lag = config._feedback_lag
    f, a, b = config.nonlinearity, config.alpha, config.beta
    h = np.zeros((B, M + 1))
    drive = b * U
    for t in range(1, M + 1):
        s = t - lag
        if s >= 1:
            h[:, t] = f(a * h[:, s] + drive[:, t - 1])
        else:
            h[:, t] = f(drive[:, t - 1])
    return h


def _expand(h: np.ndarray, N: int) -> np.ndarray:
    B, T = h.shape
    X = np.zeros((B, N + 1, T))
    for k in range(min(N + 1, T)):
        X[:, k, k:] = h[:, : T - k]
    return X


def run_batch(config: ReservoirConfig, inputs) -> np.ndarray:
    """States for a batch of padded inputs, shape ``(B, N+1, M+1)``."""
    return _expand(head_sequences(config, inputs), config.N)


def run(config: ReservoirConfig, u) -> Trajectory:
    """Full state trajectory for one (already padded) input series."""
    u = _as_series(u)
    return Trajectory(run_batch(config, u[None, :])[0])


def outputs_batch(config: ReservoirConfig, inputs, w) -> np.ndarray:
    """Readout outputs ``y(1..M)`` for a batch without materialising all states."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (config.num_nodes,):
        raise ValueError(f"weights must have {config.num_nodes} entries, got shape {w.shape}")
    h = head_sequences(config, inputs)
    y = np.zeros_like(h)
    T = h.shape[1]
    for k, wk in enumerate(w):
        if wk != 0 and k < T:
            y[:, k:] += wk * h[:, : T - k]
    return y[:, 1:]


def read_series_csv(path: str | Path, column: str = "u") -> np.ndarray:
    """Read one named column of a headed CSV file as a float series."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ValueError(f"{path}: missing column {column!r}")
        values = []
        for lineno, row in enumerate(reader, start=2):
            try:
                values.append(float(row[column]))
            except (TypeError, ValueError):
                raise ValueError(f"{path}:{lineno}: bad value {row[column]!r}") from None
    return np.asarray(values)


def write_series_csv(path: str | Path, values: Iterable[float], column: str = "u") -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([column])
        for v in values:
            writer.writerow([repr(float(v))])


def write_trajectory_csv(dest, traj: Trajectory) -> None:
    """Write ``t, x0..xN`` rows to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_trajectory(dest, traj)
    else:
        with open(dest, "w", newline="") as fh:
            _write_trajectory(fh, traj)


def _write_trajectory(fh, traj: Trajectory) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["t"] + [f"x{k}" for k in range(traj.N + 1)])
    for t in range(traj.M + 1):
        writer.writerow([t] + [repr(float(x)) for x in traj.states[:, t]])
