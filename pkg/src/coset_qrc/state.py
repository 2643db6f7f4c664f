"""Dense density-matrix simulation for small registers."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import (
    DENSE_LIMIT,
    PauliString,
    StabilizerSpec,
    all_syndromes,
    correction_for_syndrome,
    syndrome_projector,
    to_matrix,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
BRANCH_CUTOFF = 1e-14


class InvalidState(ValueError):
    pass


@dataclass(frozen=True)
class DensityMatrix:
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.data, dtype=complex)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] & (d.shape[0] - 1):
            raise InvalidState(f"density matrix must be 2^n x 2^n, got {d.shape}")
        object.__setattr__(self, "data", d)

    @property
    def n(self) -> int:
        return self.data.shape[0].bit_length() - 1

    @classmethod
    def pure(cls, psi: np.ndarray) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, n: int, index: int = 0) -> DensityMatrix:
        psi = np.zeros(2 ** n, dtype=complex)
        psi[index] = 1
        return cls.pure(psi)

    @classmethod
    def maximally_mixed(cls, n: int) -> DensityMatrix:
        return cls(np.eye(2 ** n, dtype=complex) / 2 ** n)

    def defects(self) -> dict[str, float]:
        """Hermiticity defect, trace error and minimum eigenvalue."""
        d = self.data
        herm = float(np.max(np.abs(d - d.conj().T)))
        return {
            "hermiticity": herm,
            "trace": float(abs(np.trace(d) - 1)),
            "min_eig": float(np.linalg.eigvalsh((d + d.conj().T) / 2).min()),
        }

    def validate(self, herm_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, psd_tol=PSD_TOL) -> DensityMatrix:
        f = self.defects()
        if f["hermiticity"] > herm_tol:
            raise InvalidState(f"not Hermitian (defect {f['hermiticity']:.3g})")
        if f["trace"] > trace_tol:
            raise InvalidState(f"trace off by {f['trace']:.3g}")
        if f["min_eig"] < -psd_tol:
            raise InvalidState(f"negative eigenvalue {f['min_eig']:.3g}")
        return self


def code_projector(spec: StabilizerSpec) -> np.ndarray:
    return syndrome_projector(spec, (1,) * spec.k)


def init_state(spec: StabilizerSpec) -> DensityMatrix:
    """Pure state in the code space: ``|0...0>`` projected onto ``V_S``."""
    proj = code_projector(spec)
    psi = proj[:, 0]
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        raise InvalidState("|0...0> has no overlap with the code space")
    return DensityMatrix.pure(psi / norm)


def pauli_rotation(theta: float, p: PauliString) -> np.ndarray:
    """``exp(-i theta P) = cos(theta) I - i sin(theta) P`` for Hermitian ``P``."""
    if not p.is_hermitian:
        raise ValueError(f"rotation generator {p} is not Hermitian")
    return np.cos(theta) * np.eye(2 ** p.n, dtype=complex) - 1j * np.sin(theta) * to_matrix(p)


def _check_unitary(u: np.ndarray, tol: float = 1e-10) -> None:
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > tol:
        raise ValueError("matrix is not unitary")


def apply_unitary(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    u = np.asarray(u, dtype=complex)
    if u.shape != rho.data.shape:
        raise ValueError(f"unitary shape {u.shape} does not match state {rho.data.shape}")
    _check_unitary(u)
    return DensityMatrix(u @ rho.data @ u.conj().T)


def expectation(rho: DensityMatrix, p: PauliString | np.ndarray) -> float:
    """``Tr(P rho)`` with the (numerically zero) imaginary part discarded."""
    m = to_matrix(p) if isinstance(p, PauliString) else np.asarray(p)
    if m.shape != rho.data.shape:
        raise ValueError(f"observable shape {m.shape} does not match state {rho.data.shape}")
    val = np.einsum("ij,ji->", m, rho.data)
    return float(val.real)


# --- Ising reservoir ----------------------------------------------------------


def all_to_all(n: int) -> tuple[tuple[int, int], ...]:
    """Complete graph on 0-based qubit indices, lexicographic."""
    return tuple(itertools.combinations(range(n), 2))


@dataclass(frozen=True)
class IsingHamiltonian:
    """``sum_i (hx X_i + hy Y_i + hz Z_i) + sum_(i,j) (Jz Z_i Z_j + Jx X_i X_j)``.

    Edges are 0-based ``(i, j)`` pairs with ``i < j``.
    """

    n: int
    hx: tuple[float, ...]
    hy: tuple[float, ...]
    hz: tuple[float, ...]
    edges: tuple[tuple[int, int], ...]
    jz: tuple[float, ...]
    jx: tuple[float, ...]
    dt: float = 1.645
    trotter_steps: int = 1

    def __post_init__(self):
        for name in ("hx", "hy", "hz"):
            if len(getattr(self, name)) != self.n:
                raise ValueError(f"{name} needs {self.n} entries")
        if len(self.jz) != len(self.edges) or len(self.jx) != len(self.edges):
            raise ValueError("one Jz and one Jx per edge")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-edge ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            if not (0 <= key[0] and key[1] < self.n):
                raise ValueError(f"edge {key} outside register")
            seen.add(key)
        if self.trotter_steps < 1:
            raise ValueError("trotter_steps must be positive")

    @classmethod
    def zero(cls, n: int, dt: float = 1.645) -> IsingHamiltonian:
        edges = all_to_all(n)
        z = (0.0,) * n
        return cls(n, z, z, z, edges, (0.0,) * len(edges), (0.0,) * len(edges), dt)

    def terms(self) -> list[tuple[float, PauliString]]:
        """``(coefficient, Pauli)`` pairs in the fixed Trotter order."""
        out = []
        for i in range(self.n):
            for letter, h in zip("XYZ", (self.hx[i], self.hy[i], self.hz[i])):
                out.append((h, PauliString.single(self.n, {i + 1: letter})))
        for (i, j), jz in zip(self.edges, self.jz):
            out.append((jz, PauliString.single(self.n, {i + 1: "Z", j + 1: "Z"})))
        for (i, j), jx in zip(self.edges, self.jx):
            out.append((jx, PauliString.single(self.n, {i + 1: "X", j + 1: "X"})))
        return out

    def matrix(self) -> np.ndarray:
        d = 2 ** self.n
        h = np.zeros((d, d), dtype=complex)
        for c, p in self.terms():
            h += c * to_matrix(p)
        return h


def sample_ising(
    n: int,
    edges: Sequence[tuple[int, int]] | None = None,
    rng: np.random.Generator | int | None = None,
    dt: float = 1.645,
    trotter_steps: int = 1,
) -> IsingHamiltonian:
    """Random fields ``U(-1/2, 1/2)`` and couplings ``U(-1, 1)``.

    Draw order is hx, hy, hz (n each) then Jz, Jx (one per edge).
    """
    rng = np.random.default_rng(rng)
    edges = all_to_all(n) if edges is None else tuple((int(i), int(j)) for i, j in edges)
    hx, hy, hz = (tuple(rng.uniform(-0.5, 0.5, n)) for _ in range(3))
    jz = tuple(rng.uniform(-1.0, 1.0, len(edges)))
    jx = tuple(rng.uniform(-1.0, 1.0, len(edges)))
    return IsingHamiltonian(n, hx, hy, hz, edges, jz, jx, dt, trotter_steps)


def trotter_unitary(h: IsingHamiltonian, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    """First-order Trotter product of ``exp(-i dt H)``.

    Within a step the factors act in :meth:`IsingHamiltonian.terms` order
    (single-site X, Y, Z per site, then ZZ edges, then XX edges).
    """
    if h.n > dense_limit:
        raise ValueError(f"{h.n} qubits exceeds dense limit {dense_limit}")
    tau = h.dt / h.trotter_steps
    step = np.eye(2 ** h.n, dtype=complex)
    for c, p in h.terms():
        step = pauli_rotation(tau * c, p) @ step
    return np.linalg.matrix_power(step, h.trotter_steps)


# --- syndrome measurement -------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    syndrome: tuple[int, ...]
    probability: float
    state: DensityMatrix


def measure_stabilizers_branches(
    rho: DensityMatrix, spec: StabilizerSpec, correct: bool = True
) -> list[Branch]:
    """Projective measurement of all generators; each branch is corrected back into ``V_S``.

    Branches with probability below ``1e-14`` are dropped.
    """
    if rho.n != spec.n:
        raise ValueError(f"state has {rho.n} qubits, stabilizer {spec.n}")
    out = []
    for a in all_syndromes(spec.k):
        proj = syndrome_projector(spec, a)
        post = proj @ rho.data @ proj
        p = float(np.trace(post).real)
        if p < BRANCH_CUTOFF:
            continue
        if correct:
            q = to_matrix(correction_for_syndrome(spec, a))
            post = q @ post @ q.conj().T
        out.append(Branch(a, p, DensityMatrix(post / p)))
    return out


def mixture(branches: Sequence[Branch]) -> DensityMatrix:
    return DensityMatrix(sum(b.probability * b.state.data for b in branches))


def syndrome_probabilities(rho: DensityMatrix | np.ndarray, spec: StabilizerSpec) -> np.ndarray:
    """``p(a)`` for every syndrome, indexed by :func:`~coset_qrc.pauli.syndrome_index`."""
    data = rho.data if isinstance(rho, DensityMatrix) else rho
    p = np.array([np.trace(syndrome_projector(spec, a) @ data).real for a in all_syndromes(spec.k)])
    return _clean_probabilities(p)


def _clean_probabilities(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def shot_estimate_syndromes(
    rho: DensityMatrix, spec: StabilizerSpec, shots: int, rng: np.random.Generator | int | None = None
) -> np.ndarray:
    """Draw ``shots`` syndromes i.i.d. from ``p(a)``; returns a ``(shots, k)`` array of ±1."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(rng)
    p = syndrome_probabilities(rho, spec)
    idx = rng.choice(len(p), size=shots, p=p)
    bits = (idx[:, None] >> np.arange(spec.k)[None, :]) & 1
    return 1 - 2 * bits
