"""Encode -> reservoir -> decode channel and the multiplexed drive loop."""

from __future__ import annotations

import copy
import functools
import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .pauli import StabilizerSpec, all_syndromes, correction_for_syndrome, syndrome_projector, to_matrix
from .readout import FeatureMatrix
from .state import DensityMatrix, IsingHamiltonian, init_state, pauli_rotation, trotter_unitary

STRATEGIES = ("uniform", "exponential", "custom")


@dataclass(frozen=True)
class EncodingConfig:
    """Rotation angles ``beta_j`` applied as ``exp(-i beta_j * input_scale * x * F_j)``.

    ``uniform`` uses ``beta_j = 1/2``; ``exponential`` uses ``beta_j = 3**(j-1) / 2``,
    whose frequency set is every integer up to ``(3**k - 1) / 2``.
    """

    strategy: str
    betas: tuple[float, ...]
    input_scale: float = 1.0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown encoding strategy {self.strategy!r}")
        b = tuple(float(v) for v in self.betas)
        if not b or not all(np.isfinite(b)) or any(v == 0 for v in b):
            raise ValueError("betas must be finite and nonzero")
        object.__setattr__(self, "betas", b)

    @classmethod
    def make(cls, strategy: str, k: int, betas: Sequence[float] | None = None, input_scale: float = 1.0):
        if strategy == "uniform":
            b = (0.5,) * k
        elif strategy == "exponential":
            b = tuple(3.0 ** j / 2 for j in range(k))
        elif strategy == "custom":
            if betas is None or len(betas) != k:
                raise ValueError(f"custom encoding needs {k} betas")
            b = tuple(betas)
        else:
            raise ValueError(f"unknown encoding strategy {strategy!r}")
        return cls(strategy, b, input_scale)

    @property
    def k(self) -> int:
        return len(self.betas)


@dataclass(frozen=True)
class _Compiled:
    """Dense operators shared by every reservoir with the same stabilizer."""

    destab: np.ndarray  # (k, d, d)
    observables: np.ndarray  # (2^k - 1, d, d)
    projectors: np.ndarray  # (2^k, d, d)
    kraus: np.ndarray  # (2^k, d, d), Q(a) Pi_a
    subset_signs: np.ndarray  # (2^k, 2^k - 1): prod_{j in A} a_j


@functools.lru_cache(maxsize=64)
def _compile(spec: StabilizerSpec) -> _Compiled:
    k = spec.k
    projectors = np.array([syndrome_projector(spec, a) for a in all_syndromes(k)])
    q = np.array([to_matrix(correction_for_syndrome(spec, a)) for a in all_syndromes(k)])
    signs = np.array(
        [[np.prod([a[j] for j in range(k) if (m >> j) & 1]) for m in range(1, 2 ** k)] for a in all_syndromes(k)],
        dtype=float,
    )
    return _Compiled(
        destab=np.array([to_matrix(f) for f in spec.destabilizers]),
        observables=np.array([to_matrix(p) for p in spec.subset_observables()]),
        projectors=projectors,
        kraus=q @ projectors,
        subset_signs=signs,
    )


def _apply_kraus(ops: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """``sum_m K_m rho K_m^dagger`` for stacked states ``(R, d, d)``."""
    return (ops[None] @ rho[:, None] @ np.conj(np.swapaxes(ops, -1, -2))[None]).sum(axis=1)


def encoding_unitary(x: float, spec: StabilizerSpec, enc: EncodingConfig, reverse: bool = False) -> np.ndarray:
    if enc.k != spec.k:
        raise ValueError(f"encoding has {enc.k} betas, stabilizer has {spec.k} generators")
    order = range(spec.k - 1, -1, -1) if reverse else range(spec.k)
    u = np.eye(2 ** spec.n, dtype=complex)
    for j in order:
        u = pauli_rotation(enc.betas[j] * enc.input_scale * x, spec.destabilizers[j]) @ u
    return u


def encode(state: DensityMatrix, x: float, spec: StabilizerSpec, enc: EncodingConfig) -> DensityMatrix:
    u = encoding_unitary(x, spec, enc)
    return DensityMatrix(u @ state.data @ u.conj().T)


def decode(state: DensityMatrix, spec: StabilizerSpec, correct: bool = True) -> DensityMatrix:
    """Ensemble over syndrome outcomes, ``sum_a Q(a) Pi_a rho Pi_a Q(a)^dagger``.

    With ``correct=False`` the ``Q(a)`` factor is dropped (measure only).
    """
    c = _compile(spec)
    ops = c.kraus if correct else c.projectors
    return DensityMatrix(_apply_kraus(ops, state.data[None])[0])


def encoding_spectrum(enc: EncodingConfig, spec: StabilizerSpec) -> list[float]:
    """Frequencies of ``x -> exp(-i x G) rho exp(i x G)`` for ``G = sum_j beta_j F_j``.

    The ``F_j`` commute and are independent, so the eigenvalues of ``G`` are
    all sign combinations ``sum_j ±beta_j`` and the frequencies are their
    pairwise differences.
    """
    if enc.k != spec.k:
        raise ValueError(f"encoding has {enc.k} betas, stabilizer has {spec.k} generators")
    b = np.array(enc.betas) * enc.input_scale
    eig = {round(float(np.dot(s, b)), 12) for s in itertools.product((1, -1), repeat=len(b))}
    diffs = {round(u - v, 10) + 0.0 for u in eig for v in eig}
    return sorted(diffs)


@dataclass(frozen=True)
class ObservableRecord:
    t: int
    values: np.ndarray


@dataclass(frozen=True)
class ReservoirInstance:
    """One reservoir: stabilizer, Hamiltonian, compiled unitary, encoding and current state.

    ``shots=None`` records exact expectations; otherwise syndromes are sampled
    ``shots`` times per step from ``rng`` (the state itself always follows the
    exact ensemble).
    """

    spec: StabilizerSpec
    hamiltonian: IsingHamiltonian
    u_reservoir: np.ndarray = field(repr=False)
    encoding: EncodingConfig
    state: DensityMatrix = field(repr=False)
    correction: bool = True
    shots: int | None = None
    rng: np.random.Generator | None = field(default=None, repr=False, compare=False)
    t: int = 0

    @classmethod
    def build(
        cls,
        spec: StabilizerSpec,
        hamiltonian: IsingHamiltonian,
        encoding: EncodingConfig,
        correction: bool = True,
        shots: int | None = None,
        seed: int | np.random.SeedSequence | None = None,
    ) -> ReservoirInstance:
        if hamiltonian.n != spec.n:
            raise ValueError("Hamiltonian and stabilizer act on different registers")
        if encoding.k != spec.k:
            raise ValueError(f"encoding has {encoding.k} betas, stabilizer has {spec.k} generators")
        if shots is not None and shots < 1:
            raise ValueError("shots must be >= 1")
        rng = np.random.default_rng(seed) if shots is not None else None
        return cls(spec, hamiltonian, trotter_unitary(hamiltonian), encoding, init_state(spec), correction, shots, rng)

    @property
    def num_observables(self) -> int:
        return 2 ** self.spec.k - 1


def _step_batch(
    states: np.ndarray,
    x: float,
    ensemble: Sequence[ReservoirInstance],
) -> tuple[np.ndarray, np.ndarray]:
    """Advance stacked states ``(R, d, d)`` by one input; returns (new states, observables)."""
    head = ensemble[0]
    c = _compile(head.spec)
    u_enc = encoding_unitary(x, head.spec, head.encoding)
    w = np.stack([r.u_reservoir for r in ensemble]) @ u_enc
    rho = w @ states @ np.conj(np.swapaxes(w, -1, -2))
    obs = np.einsum("aij,rji->ra", c.observables, rho).real
    for r, res in enumerate(ensemble):
        if res.shots is not None:
            p = np.clip(np.einsum("mij,ji->m", c.projectors, rho[r]).real, 0.0, None)
            counts = res.rng.multinomial(res.shots, p / p.sum())
            obs[r] = counts @ c.subset_signs / res.shots
    ops = c.kraus if head.correction else c.projectors
    return _apply_kraus(ops, rho), obs


def _check_compatible(ensemble: Sequence[ReservoirInstance]) -> None:
    if not ensemble:
        raise ValueError("empty ensemble")
    head = ensemble[0]
    for r in ensemble[1:]:
        if r.spec != head.spec or r.encoding != head.encoding or r.correction != head.correction:
            raise ValueError("all reservoirs in an ensemble must share stabilizer, encoding and correction mode")


def drive_step(res: ReservoirInstance, x: float) -> tuple[ReservoirInstance, ObservableRecord]:
    new, obs = _step_batch(res.state.data[None], x, [res])
    return replace(res, state=DensityMatrix(new[0]), t=res.t + 1), ObservableRecord(res.t, obs[0])


def drive_sequence(
    ensemble: Sequence[ReservoirInstance], inputs: Sequence[float]
) -> tuple[np.ndarray, list[ReservoirInstance]]:
    """Drive every reservoir with the common input series.

    Returns observables shaped ``(num_reservoirs, T, 2**k - 1)`` and the
    advanced reservoirs.
    """
    _check_compatible(ensemble)
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 1 or len(inputs) == 0:
        raise ValueError("inputs must be a nonempty 1-d series")
    states = np.stack([r.state.data for r in ensemble])
    out = np.empty((len(ensemble), len(inputs), ensemble[0].num_observables))
    for t, x in enumerate(inputs):
        states, out[:, t] = _step_batch(states, x, ensemble)
    advanced = [replace(r, state=DensityMatrix(states[i]), t=r.t + len(inputs)) for i, r in enumerate(ensemble)]
    return out, advanced


def feature_labels(num_reservoirs: int, num_obs: int, l: int, include_bias: bool) -> list[tuple]:
    """Column tags ``(reservoir, subset, lag, is_bias)``; lag 0 is the current step."""
    labels = [(r, a, lag, False) for lag in range(l) for r in range(num_reservoirs) for a in range(num_obs)]
    if include_bias:
        labels.append((None, None, None, True))
    return labels


def _row(window: np.ndarray, include_bias: bool) -> np.ndarray:
    # window: (l, R, A) oldest first -> lag 0 first
    flat = window[::-1].reshape(-1)
    return np.append(flat, 1.0) if include_bias else flat


def build_features(records: np.ndarray, l: int, include_bias: bool = True) -> FeatureMatrix:
    """Temporal multiplexing: row ``t`` holds steps ``t-l+1 .. t`` of every reservoir.

    ``records`` is ``(R, T, A)``; the first ``l - 1`` steps produce no row.
    """
    records = np.asarray(records, dtype=float)
    if records.ndim == 2:
        records = records[None]
    num_res, T, num_obs = records.shape
    if l < 1:
        raise ValueError("l must be >= 1")
    if T < l:
        raise ValueError(f"need at least l={l} steps, got {T}")
    by_time = np.swapaxes(records, 0, 1)  # (T, R, A)
    rows = np.array([_row(by_time[t - l + 1 : t + 1], include_bias) for t in range(l - 1, T)])
    return FeatureMatrix(rows, feature_labels(num_res, num_obs, l, include_bias))


class MultiplexedReservoir:
    """Spatially and temporally multiplexed quantum reservoir.

    Keeps the ensemble state and the last ``l`` observable vectors, so it can
    be driven on a training series and then continued in closed loop.
    """

    def __init__(self, ensemble: Sequence[ReservoirInstance], l: int = 10, include_bias: bool = True):
        _check_compatible(ensemble)
        self.ensemble = list(ensemble)
        self.l = l
        self.include_bias = include_bias
        self.window: deque[np.ndarray] = deque(maxlen=l)

    def drive(self, inputs: Sequence[float]) -> np.ndarray:
        records, self.ensemble = drive_sequence(self.ensemble, inputs)
        for t in range(records.shape[1]):
            self.window.append(records[:, t])
        return records

    def advance(self, x: float) -> None:
        self.drive([x])

    def features(self) -> np.ndarray:
        if len(self.window) < self.l:
            raise ValueError(f"need {self.l} driven steps before a feature row exists")
        return _row(np.array(self.window), self.include_bias)

    def copy(self) -> MultiplexedReservoir:
        other = copy.copy(self)
        other.window = deque(self.window, maxlen=self.l)
        other.ensemble = [replace(r, rng=copy.deepcopy(r.rng)) for r in self.ensemble]
        return other
