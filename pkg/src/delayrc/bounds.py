"""Input-to-output Lipschitz bound for the delay-line reservoir.

For an L-Lipschitz nonlinearity with ``alpha * L < 1/sqrt(2)`` and padded
inputs of length M,

    |y_u - y_v|^2 <= |w|^2 M (L beta)^2 (N+1) (1 + 2 / (1 - 2 alpha^2 L^2)) |u - v|^2

where norms of time series run over t = 1..M. This module evaluates the
constant and measures the actual ratio on simulated input pairs.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .readout import ReadoutWeights
from .reservoir import ReservoirConfig, outputs_batch

__all__ = [
    "BoundInapplicable",
    "BoundParams",
    "BoundReport",
    "PointwiseStats",
    "contraction_valid",
    "geometric_factor",
    "theoretical_constant",
    "empirical_ratio",
    "pair_ratios",
    "bound_check",
    "pointwise_ratio_probe",
    "random_pairs",
    "random_unit_weights",
]

INV_SQRT2 = 1 / math.sqrt(2)
VIOLATION_RTOL = 1e-9


class BoundInapplicable(ValueError):
    pass


@dataclass(frozen=True)
class BoundParams:
    L: float
    alpha: float
    beta: float
    N: int
    M: int
    weight_norm: float

    @classmethod
    def from_config(cls, config: ReservoirConfig, M: int, w) -> "BoundParams":
        norm = w.norm if isinstance(w, ReadoutWeights) else float(np.linalg.norm(w))
        return cls(config.lipschitz, config.alpha, config.beta, config.N, M, norm)


@dataclass(frozen=True)
class BoundReport:
    theoretical_C: float
    max_empirical_ratio: float
    mean_empirical_ratio: float
    num_pairs: int
    violations: int

    @property
    def slack(self) -> float:
        return self.theoretical_C - self.max_empirical_ratio

    def to_dict(self) -> dict:
        d = asdict(self)
        d["slack"] = self.slack
        return d


@dataclass(frozen=True)
class PointwiseStats:
    max: float
    mean: float
    p99: float
    num_samples: int

    def to_dict(self) -> dict:
        return asdict(self)


def contraction_valid(alpha: float, L: float) -> bool:
    return alpha * L < INV_SQRT2


def geometric_factor(alpha: float, L: float) -> float:
    """``1 + 2 / (1 - 2 (alpha L)^2)``, the closed form of ``1 + sum_k 2^k (alpha L)^(2(k-1))``."""
    if not contraction_valid(alpha, L):
        raise BoundInapplicable("αL ≥ 1/√2: bound undefined")
    aL = alpha * L
    return 1 + 2 / (1 - 2 * aL * aL)


def theoretical_constant(p: BoundParams) -> float:
    return p.weight_norm**2 * p.M * (p.L * p.beta) ** 2 * (p.N + 1) * geometric_factor(p.alpha, p.L)


def _pair_arrays(pairs):
    U = np.asarray([u for u, _ in pairs], dtype=np.float64)
    V = np.asarray([v for _, v in pairs], dtype=np.float64)
    if U.ndim != 2 or U.shape != V.shape:
        raise ValueError("pairs must be equal-length padded series")
    return U, V


def pair_ratios(config: ReservoirConfig, w, U, V) -> np.ndarray:
    """``|y_u - y_v|^2 / |u - v|^2`` for each row pair of U and V."""
    w = w.w if isinstance(w, ReadoutWeights) else np.asarray(w, dtype=np.float64)
    U = np.atleast_2d(np.asarray(U, dtype=np.float64))
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    den = np.sum((U - V) ** 2, axis=1)
    if np.any(den == 0):
        raise ValueError("zero denominator: u and v coincide")
    num = np.sum((outputs_batch(config, U, w) - outputs_batch(config, V, w)) ** 2, axis=1)
    return num / den


def empirical_ratio(config: ReservoirConfig, w, u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u and v must be padded to a common length")
    return float(pair_ratios(config, w, u[None], v[None])[0])


def bound_check(config: ReservoirConfig, w, pairs) -> BoundReport:
    """Compare every pair's ratio against the theoretical constant.

    ``pairs`` is a sequence of ``(u, v)`` or a tuple of two 2-D arrays ``(U, V)``.
    """
    if isinstance(pairs, tuple) and len(pairs) == 2 and np.ndim(pairs[0]) == 2:
        U, V = (np.asarray(a, dtype=np.float64) for a in pairs)
    else:
        if len(pairs) == 0:
            raise ValueError("no pairs")
        U, V = _pair_arrays(pairs)
    if U.shape[0] == 0:
        raise ValueError("no pairs")
    C = theoretical_constant(BoundParams.from_config(config, U.shape[1], w))
    r = pair_ratios(config, w, U, V)
    return BoundReport(
        theoretical_C=C,
        max_empirical_ratio=float(r.max()),
        mean_empirical_ratio=float(r.mean()),
        num_pairs=int(r.size),
        violations=int(np.count_nonzero(r > C * (1 + VIOLATION_RTOL))),
    )


def pointwise_ratio_probe(config: ReservoirConfig, w, pairs, epsilon: float = 1e-6) -> PointwiseStats:
    """Distribution of ``|y_u(t) - y_v(t)| / |u(t) - v(t)|`` over time steps with
    ``|u(t) - v(t)| >= epsilon``. Measures only; no uniform constant is implied."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if isinstance(pairs, tuple) and len(pairs) == 2 and np.ndim(pairs[0]) == 2:
        U, V = (np.asarray(a, dtype=np.float64) for a in pairs)
    else:
        U, V = _pair_arrays(pairs)
    w = w.w if isinstance(w, ReadoutWeights) else np.asarray(w, dtype=np.float64)
    du = np.abs(U - V)
    dy = np.abs(outputs_batch(config, U, w) - outputs_batch(config, V, w))
    mask = du >= epsilon
    if not mask.any():
        raise ValueError("no admissible time steps")
    r = dy[mask] / du[mask]
    return PointwiseStats(float(r.max()), float(r.mean()), float(np.percentile(r, 99)), int(r.size))


def random_pairs(rng: np.random.Generator, count: int, M: int) -> tuple[np.ndarray, np.ndarray]:
    """i.i.d. Uniform[-1, 1] input pairs, shape ``(count, M)`` each."""
    U = rng.uniform(-1.0, 1.0, size=(count, M))
    V = rng.uniform(-1.0, 1.0, size=(count, M))
    return U, V


def random_unit_weights(rng: np.random.Generator, num_nodes: int) -> ReadoutWeights:
    w = rng.standard_normal(num_nodes)
    return ReadoutWeights(w / np.linalg.norm(w))
