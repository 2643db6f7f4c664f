"""Logistic and Hénon benchmark maps, the map-consistency error, and an ESN baseline."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .readout import Diverged, ReadoutWeights, fit, predict_closed_loop, score_r2


@dataclass(frozen=True)
class MapSpec:
    """``logistic``: x' = r x (1 - x).  ``henon``: x' = 1 - a x^2 + b x_prev."""

    kind: str = "logistic"
    r: float = 3.9
    a: float = 1.4
    b: float = 0.3
    init: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("logistic", "henon"):
            raise ValueError(f"unknown map {self.kind!r}")
        if self.init is None:
            object.__setattr__(self, "init", (0.5,) if self.kind == "logistic" else (0.0, 0.0))
        if len(self.init) != self.memory:
            raise ValueError(f"{self.kind} needs {self.memory} initial values")

    @property
    def memory(self) -> int:
        return 1 if self.kind == "logistic" else 2

    def __call__(self, *history: float) -> float:
        return map_step(self, history)


def map_step(spec: MapSpec, history: Sequence[float]) -> float:
    """Next value from the last ``memory`` values, most recent first."""
    if len(history) != spec.memory:
        raise ValueError(f"{spec.kind} needs {spec.memory} history values, got {len(history)}")
    if spec.kind == "logistic":
        x = history[0]
        return spec.r * x * (1 - x)
    x, y = history
    return 1 - spec.a * x * x + spec.b * y


def generate_trajectory(spec: MapSpec, length: int) -> np.ndarray:
    """Iterate from ``spec.init`` (given oldest first) to ``length`` points."""
    if length < spec.memory:
        raise ValueError(f"length must be >= {spec.memory}")
    xs = list(spec.init[:length])
    while len(xs) < length:
        xs.append(map_step(spec, xs[-1 : -spec.memory - 1 : -1]))
    return np.array(xs)


def map_residuals(spec: MapSpec, series: Sequence[float]) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    m = spec.memory
    if len(x) < m + 1:
        raise ValueError(f"series needs at least {m + 1} points")
    if spec.kind == "logistic":
        pred = spec.r * x[:-1] * (1 - x[:-1])
    else:
        pred = 1 - spec.a * x[1:-1] ** 2 + spec.b * x[:-2]
    return x[m:] - pred


def map_error(spec: MapSpec, predicted: Sequence[float]) -> float:
    """``sqrt(sum_i (x_{i+1} - F(x_i, x_{i-1}, ...))^2)`` over every full window."""
    return float(np.sqrt(np.sum(map_residuals(spec, predicted) ** 2)))


def lyapunov_exponent(spec: MapSpec, length: int = 1000, discard: int = 1) -> float:
    """Mean of ``log|F'(x_n)|`` along a logistic trajectory.

    The default start x0 = 0.5 is the critical point (F' = 0), hence ``discard``.
    """
    if spec.kind != "logistic":
        raise ValueError("one-dimensional derivative only defined for the logistic map")
    x = generate_trajectory(spec, length + discard)[discard:]
    return float(np.mean(np.log(np.abs(spec.r * (1 - 2 * x)))))


# --- echo state network ---------------------------------------------------------


@dataclass(frozen=True)
class EsnConfig:
    neurons: int = 140
    spectral_radius: float = 0.9
    input_scale: float = 0.5
    leak: float = 1.0
    ridge_lambda: float = 1e-8
    seed: int | None = 0

    def __post_init__(self):
        if self.neurons < 1:
            raise ValueError("neurons must be >= 1")
        if not 0 < self.leak <= 1:
            raise ValueError("leak must lie in (0, 1]")
        if self.spectral_radius >= 1.5:
            raise ValueError("spectral radius >= 1.5 is unstable by construction")


class EchoStateNetwork:
    """Leaky tanh reservoir ``h' = (1 - leak) h + leak tanh(W h + w_in x)``.

    Implements the same ``features``/``advance`` protocol as the quantum
    reservoir so readout fitting and closed-loop prediction are shared.
    """

    def __init__(self, config: EsnConfig, l: int = 10, include_bias: bool = True, w_in: np.ndarray | None = None):
        self.config = config
        self.l = l
        self.include_bias = include_bias
        rng = np.random.default_rng(config.seed)
        w = rng.uniform(-1, 1, (config.neurons, config.neurons))
        rho = np.max(np.abs(np.linalg.eigvals(w)))
        self.w = w * (config.spectral_radius / rho) if rho > 0 else w
        self.w_in = rng.uniform(-1, 1, config.neurons) * config.input_scale if w_in is None else np.asarray(w_in)
        self.h = np.zeros(config.neurons)
        self.window: deque[np.ndarray] = deque(maxlen=l)

    def advance(self, x: float) -> None:
        c = self.config
        self.h = (1 - c.leak) * self.h + c.leak * np.tanh(self.w @ self.h + self.w_in * x)
        self.window.append(self.h.copy())

    def drive(self, inputs: Sequence[float]) -> np.ndarray:
        states = []
        for x in inputs:
            self.advance(x)
            states.append(self.h)
        return np.array(states)

    def features(self) -> np.ndarray:
        if len(self.window) < self.l:
            raise ValueError(f"need {self.l} driven steps before a feature row exists")
        flat = np.concatenate(list(self.window)[::-1])
        return np.append(flat, 1.0) if self.include_bias else flat


def esn_feature_matrix(states: np.ndarray, l: int, include_bias: bool = True) -> np.ndarray:
    rows = []
    for t in range(l - 1, len(states)):
        flat = states[t - l + 1 : t + 1][::-1].reshape(-1)
        rows.append(np.append(flat, 1.0) if include_bias else flat)
    return np.array(rows)


@dataclass
class EsnResult:
    weights: ReadoutWeights
    predictions: np.ndarray
    error: float
    train_r2: float
    diverged: bool = False


def esn_run_and_fit(
    config: EsnConfig,
    inputs: Sequence[float],
    targets: Sequence[float],
    l: int = 10,
    map_spec: MapSpec | None = None,
    horizon: int = 100,
    w_in: np.ndarray | None = None,
) -> EsnResult:
    """Drive, fit the readout, then predict ``horizon`` steps in closed loop.

    ``error`` is the map error of the closed-loop segment, ``inf`` when the
    prediction diverges.
    """
    map_spec = map_spec or MapSpec()
    esn = EchoStateNetwork(config, l=l, w_in=w_in)
    states = esn.drive(inputs)
    feats = esn_feature_matrix(states, l)
    y = np.asarray(targets, dtype=float)[l - 1 :]
    weights = fit(feats, y, config.ridge_lambda)
    try:
        r2 = score_r2(weights.predict(feats), y)
    except ValueError:
        r2 = float("nan")
    try:
        pred = predict_closed_loop(esn, weights, horizon)
        return EsnResult(weights, pred, map_error(map_spec, pred), r2)
    except Diverged as exc:
        return EsnResult(weights, exc.partial, float("inf"), r2, diverged=True)
