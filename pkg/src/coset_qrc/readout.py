"""Linear readout: ridge least squares, R^2 and closed-loop generation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

DIVERGENCE_BOUND = 1e3


@dataclass(frozen=True)
class FeatureMatrix:
    data: np.ndarray
    col_labels: list = field(default_factory=list, compare=False)

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float)
        if d.ndim != 2:
            raise ValueError("feature matrix must be 2-d")
        if not np.all(np.isfinite(d)):
            raise ValueError("feature matrix has non-finite entries")
        object.__setattr__(self, "data", d)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class ReadoutWeights:
    v: np.ndarray
    ridge_lambda: float = 0.0

    def predict(self, features: FeatureMatrix | np.ndarray) -> np.ndarray:
        f = features.data if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=float)
        if f.shape[-1] != len(self.v):
            raise ValueError(f"{f.shape[-1]} features, weights expect {len(self.v)}")
        return f @ self.v


def fit(features: FeatureMatrix | np.ndarray, targets: Sequence[float], lam: float = 1e-8) -> ReadoutWeights:
    """Minimize ``||F v - y||^2 + lam ||v||^2`` through the thin SVD of ``F``.

    ``lam = 0`` gives the minimum-norm least-squares solution, so
    rank-deficient ``F`` never raises.
    """
    f = features.data if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    if f.ndim != 2 or f.shape[0] < 1:
        raise ValueError("need at least one feature row")
    if y.shape != (f.shape[0],):
        raise ValueError(f"{f.shape[0]} feature rows but {y.shape} targets")
    if lam < 0:
        raise ValueError("ridge lambda must be >= 0")
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite features or targets")
    u, s, vt = np.linalg.svd(f, full_matrices=False)
    if lam > 0:
        gain = s / (s ** 2 + lam)
    else:
        cutoff = s.max(initial=0.0) * max(f.shape) * np.finfo(float).eps
        gain = np.divide(1.0, s, out=np.zeros_like(s), where=s > cutoff)
    v = vt.T @ (gain * (u.T @ y))
    return ReadoutWeights(v, float(lam))


def score_r2(predictions: Sequence[float], targets: Sequence[float]) -> float:
    p = np.asarray(predictions, dtype=float)
    y = np.asarray(targets, dtype=float)
    if p.shape != y.shape or p.size == 0:
        raise ValueError("predictions and targets need equal nonzero length")
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        raise ValueError("R^2 undefined for constant targets")
    return float(1 - np.sum((y - p) ** 2) / ss_tot)


def one_step_targets(series: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(series, dtype=float)
    if len(x) < 2:
        raise ValueError("series needs at least two points")
    return x[:-1], x[1:]


class Driver(Protocol):
    def features(self) -> np.ndarray: ...

    def advance(self, x: float) -> None: ...


class Diverged(RuntimeError):
    def __init__(self, partial: np.ndarray):
        super().__init__(f"closed-loop prediction diverged after {len(partial)} steps")
        self.partial = partial


def predict_closed_loop(driver: Driver, weights: ReadoutWeights, horizon: int) -> np.ndarray:
    """Autonomous continuation: predict from the current feature row, feed the prediction back.

    ``driver`` must already be warmed on the training inputs; it is advanced
    in place.  Raises :class:`Diverged` once ``|x| > 1e3``.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    out = np.empty(horizon)
    for i in range(horizon):
        y = float(driver.features() @ weights.v)
        if not np.isfinite(y) or abs(y) > DIVERGENCE_BOUND:
            raise Diverged(out[:i].copy())
        out[i] = y
        if i + 1 < horizon:
            driver.advance(y)
    return out
