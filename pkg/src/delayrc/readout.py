"""Linear readout: outputs, design matrices, training and error metrics."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .reservoir import Trajectory

__all__ = [
    "ReadoutWeights",
    "DesignMatrix",
    "output",
    "build_design",
    "train_least_squares",
    "train_ridge",
    "nrmse",
    "dantzig_selector",
    "dantzig_constraint",
    "read_weights_csv",
    "write_weights_csv",
]


@dataclass(frozen=True)
class ReadoutWeights:
    w: np.ndarray
    norm: float = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1:
            raise ValueError("weights must be a vector")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "norm", float(np.linalg.norm(w)))

    def __len__(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class DesignMatrix:
    """Columns are reservoir states at the retained time steps.

    ``X`` has shape ``(N+1, column_count)``.
    """

    X: np.ndarray
    washout: int = 0

    @property
    def column_count(self) -> int:
        return self.X.shape[1]

    @property
    def num_nodes(self) -> int:
        return self.X.shape[0]


def _weights(w) -> np.ndarray:
    return w.w if isinstance(w, ReadoutWeights) else np.asarray(w, dtype=np.float64)


def _matrix(X) -> np.ndarray:
    return X.X if isinstance(X, DesignMatrix) else np.asarray(X, dtype=np.float64)


def output(traj: Trajectory, w) -> np.ndarray:
    """``y(t) = sum_k w_k x_k(t)`` for t = 1..M."""
    w = _weights(w)
    if w.shape != (traj.N + 1,):
        raise ValueError(f"weights have {w.size} entries, trajectory has {traj.N + 1} nodes")
    return w @ traj.states[:, 1:]


def build_design(trajs: Sequence[Trajectory], washout: int = 0) -> DesignMatrix:
    """Concatenate the states at times ``t > washout`` of every trajectory."""
    if not trajs:
        raise ValueError("no trajectories")
    if washout < 0:
        raise ValueError("washout must be nonnegative")
    blocks = []
    for traj in trajs:
        if washout >= traj.M:
            raise ValueError(f"washout {washout} leaves no columns (M={traj.M})")
        blocks.append(traj.states[:, washout + 1 :])
    return DesignMatrix(np.hstack(blocks), washout)


def _check_training(X: np.ndarray, target) -> np.ndarray:
    target = np.asarray(target, dtype=np.float64)
    if X.size == 0 or X.shape[1] == 0:
        raise ValueError("empty design matrix")
    if target.shape != (X.shape[1],):
        raise ValueError(f"target length {target.size} != column count {X.shape[1]}")
    return target


def train_least_squares(X, target) -> ReadoutWeights:
    """Minimum-norm least-squares weights (SVD based)."""
    X = _matrix(X)
    target = _check_training(X, target)
    w, *_ = np.linalg.lstsq(X.T, target, rcond=None)
    return ReadoutWeights(w)


def train_ridge(X, target, lam: float) -> ReadoutWeights:
    """Minimise ``|X^T w - target|^2 + lam |w|^2``.

    Solved as the stacked least-squares problem ``[X^T; sqrt(lam) I] w = [target; 0]``,
    whose normal equations are exactly ``(X X^T + lam I) w = X target``.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    X = _matrix(X)
    target = _check_training(X, target)
    p = X.shape[0]
    A = np.vstack([X.T, np.sqrt(lam) * np.eye(p)])
    b = np.concatenate([target, np.zeros(p)])
    w, *_ = np.linalg.lstsq(A, b, rcond=None)
    return ReadoutWeights(w)


def nrmse(y, target) -> float:
    """Root mean square error normalised by the (population) target variance."""
    y = np.asarray(y, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if y.shape != target.shape or y.ndim != 1:
        raise ValueError("y and target must be vectors of equal length")
    if y.size < 2:
        raise ValueError("need at least two samples")
    var = np.var(target)
    if var == 0:
        raise ValueError("target has zero variance")
    return float(np.sqrt(np.mean((y - target) ** 2) / var))


def _column_scaling(A: np.ndarray) -> np.ndarray:
    d = np.linalg.norm(A, axis=0)
    if np.any(d == 0):
        raise ValueError("degenerate column norm")
    return d


def dantzig_constraint(A, y, beta) -> float:
    """``|D^{-1} A^T (A beta - y)|_inf`` with D the column norms of A."""
    A = np.asarray(A, dtype=np.float64)
    d = _column_scaling(A)
    return float(np.max(np.abs(A.T @ (A @ np.asarray(beta) - np.asarray(y)) / d)))


def dantzig_selector(A, y, delta: float) -> np.ndarray:
    """Dantzig selector: the minimum l1-norm ``beta`` with
    ``|D^{-1} A^T (A beta - y)|_inf <= delta``.

    ``A`` is the n x p regression matrix (samples by features). To fit readout
    weights pass ``design.X.T``. Solved as a linear program in the split
    variables ``beta = b_plus - b_minus`` with HiGHS.
    """
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise ValueError("A must be n x p and y of length n")
    if not delta > 0:
        raise ValueError("delta must be positive")
    d = _column_scaling(A)
    G = (A.T @ A) / d[:, None]
    g = (A.T @ y) / d
    p = A.shape[1]
    c = np.ones(2 * p)
    GG = np.hstack([G, -G])
    A_ub = np.vstack([GG, -GG])
    b_ub = np.concatenate([delta + g, delta - g])
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=b_ub,
        bounds=(0, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 2:
        raise ValueError("Dantzig selector problem is infeasible")
    if not res.success:
        raise RuntimeError(f"LP solver failed: {res.message}")
    return res.x[:p] - res.x[p:]


def read_weights_csv(path: str | Path) -> ReadoutWeights:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "w" not in reader.fieldnames:
            raise ValueError(f"{path}: missing column 'w'")
        try:
            return ReadoutWeights([float(row["w"]) for row in reader])
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{path}: {exc}") from None


def write_weights_csv(path: str | Path, w) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["w"])
        for v in _weights(w):
            writer.writerow([repr(float(v))])
