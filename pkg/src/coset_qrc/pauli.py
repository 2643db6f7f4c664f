"""Pauli strings and stabilizer groups in the binary symplectic picture.

A Pauli string on ``n`` qubits is stored as two GF(2) vectors ``x`` and ``z``
together with a power of ``i``.  Qubit 1 is the leftmost tensor factor and
the most significant bit of a computational-basis index.  Letters map to bit
pairs as ``I=(0,0)``, ``X=(1,0)``, ``Z=(0,1)``, ``Y=(1,1)``, and the matrix
of a string is ``i**phase`` times the Kronecker product of its letters, so
``Y`` means the Hermitian Pauli-Y itself (no hidden ``i`` factor).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

DENSE_LIMIT = 10

_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTERS.items()}
_PREFIX = {0: "+", 1: "+i", 2: "-", 3: "-i"}
_PARSE_PREFIX = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class StabilizerError(ValueError):
    """Base class for invalid generator sets."""


class NotCommuting(StabilizerError):
    def __init__(self, i: int, j: int):
        super().__init__(f"generators {i} and {j} anticommute")
        self.i, self.j = i, j


class Dependent(StabilizerError):
    def __init__(self, i: int):
        super().__init__(f"generator {i} is a product of earlier generators")
        self.i = i


class MinusIdentity(StabilizerError):
    def __init__(self, msg: str = "generators produce -I"):
        super().__init__(msg)


def _g(x1: int, z1: int, x2: int, z2: int) -> int:
    # exponent of i picked up by sigma(x1,z1) * sigma(x2,z2)
    if x1 == 0 and z1 == 0:
        return 0
    if x1 == 1 and z1 == 1:
        return z2 - x2
    if x1 == 1:
        return z2 * (2 * x2 - 1)
    return x2 * (1 - 2 * z2)


@dataclass(frozen=True)
class PauliString:
    """``i**phase * P_1 ⊗ ... ⊗ P_n`` with ``P_q`` given by ``(x[q], z[q])``."""

    x: tuple[int, ...]
    z: tuple[int, ...]
    phase: int = 0

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ValueError("x and z bit vectors must have equal length")
        object.__setattr__(self, "x", tuple(int(b) & 1 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) & 1 for b in self.z))
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls((0,) * n, (0,) * n, 0)

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse ``"+ZZI"``, ``"-iXYZ"``, ``"XX"`` and similar."""
        label = label.strip()
        body_start = len(label) - len(label.lstrip("+-i"))
        prefix, body = label[:body_start], label[body_start:]
        if prefix not in _PARSE_PREFIX:
            raise ValueError(f"bad phase prefix {prefix!r} in {label!r}")
        if not body or any(c not in _BITS for c in body):
            raise ValueError(f"bad Pauli letters in {label!r}")
        bits = [_BITS[c] for c in body]
        return cls(tuple(b[0] for b in bits), tuple(b[1] for b in bits), _PARSE_PREFIX[prefix])

    @classmethod
    def single(cls, n: int, letters: dict[int, str], phase: int = 0) -> PauliString:
        """Build from ``{qubit: letter}`` with 1-based qubit indices, e.g. ``{1: "Z", 2: "Z"}``."""
        body = ["I"] * n
        for q, c in letters.items():
            if not 1 <= q <= n:
                raise ValueError(f"qubit index {q} outside 1..{n}")
            body[q - 1] = c
        p = cls.from_label("".join(body))
        return cls(p.x, p.z, phase)

    @property
    def letters(self) -> str:
        return "".join(_LETTERS[(a, b)] for a, b in zip(self.x, self.z))

    def __str__(self) -> str:
        return _PREFIX[self.phase] + self.letters

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def is_z_type(self) -> bool:
        return not any(self.x)

    @property
    def weight(self) -> int:
        return sum(1 for a, b in zip(self.x, self.z) if a or b)

    def symplectic(self) -> np.ndarray:
        """Row vector ``(x | z)`` over GF(2)."""
        return np.array(self.x + self.z, dtype=np.uint8)

    def to_matrix(self) -> np.ndarray:
        return to_matrix(self)


def _check_same_n(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise ValueError(f"qubit count mismatch: {p.n} vs {q.n}")


def multiply(p: PauliString, q: PauliString) -> PauliString:
    _check_same_n(p, q)
    phase = p.phase + q.phase
    for x1, z1, x2, z2 in zip(p.x, p.z, q.x, q.z):
        phase += _g(x1, z1, x2, z2)
    x = tuple(a ^ b for a, b in zip(p.x, q.x))
    z = tuple(a ^ b for a, b in zip(p.z, q.z))
    return PauliString(x, z, phase % 4)


def symplectic_product(p: PauliString, q: PauliString) -> int:
    _check_same_n(p, q)
    s = 0
    for x1, z1, x2, z2 in zip(p.x, p.z, q.x, q.z):
        s ^= (x1 & z2) ^ (z1 & x2)
    return s


def commutes(p: PauliString, q: PauliString) -> bool:
    return symplectic_product(p, q) == 0


def to_matrix(p: PauliString, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    if p.n > dense_limit:
        raise ValueError(f"{p.n} qubits exceeds dense limit {dense_limit}")
    m = np.ones((1, 1), dtype=complex)
    for c in p.letters:
        m = np.kron(m, _SINGLE[c])
    return (1j ** p.phase) * m


def product(paulis: Iterable[PauliString], n: int) -> PauliString:
    out = PauliString.identity(n)
    for p in paulis:
        out = multiply(out, p)
    return out


# --- GF(2) linear algebra -------------------------------------------------


def gf2_rank(rows: np.ndarray) -> int:
    m = np.array(rows, dtype=np.uint8) % 2
    rank = 0
    for col in range(m.shape[1]):
        pivot = next((r for r in range(rank, m.shape[0]) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
        if rank == m.shape[0]:
            break
    return rank


def gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """Solve ``a @ v = b`` over GF(2); free variables are set to zero.

    Returns ``None`` if the system is inconsistent.
    """
    a = np.array(a, dtype=np.uint8) % 2
    b = np.array(b, dtype=np.uint8) % 2
    aug = np.concatenate([a, b[:, None]], axis=1)
    rows, cols = a.shape
    pivots = []
    r = 0
    for col in range(cols):
        pivot = next((i for i in range(r, rows) if aug[i, col]), None)
        if pivot is None:
            continue
        aug[[r, pivot]] = aug[[pivot, r]]
        for i in range(rows):
            if i != r and aug[i, col]:
                aug[i] ^= aug[r]
        pivots.append(col)
        r += 1
        if r == rows:
            break
    if np.any(aug[r:, -1]):
        return None
    v = np.zeros(cols, dtype=np.uint8)
    for i, col in enumerate(pivots):
        v[col] = aug[i, -1]
    return v


# --- stabilizer groups ------------------------------------------------------


def validate_stabilizer(generators: Sequence[PauliString]) -> tuple[PauliString, ...]:
    """Check that ``generators`` define a stabilizer group and return them.

    Raises :class:`MinusIdentity`, :class:`NotCommuting` or :class:`Dependent`.
    """
    gens = tuple(generators)
    if not gens:
        raise StabilizerError("need at least one generator")
    n = gens[0].n
    if any(g.n != n for g in gens):
        raise StabilizerError("generators act on different qubit counts")
    for i, g in enumerate(gens):
        if not g.is_hermitian:
            raise MinusIdentity(f"generator {i} ({g}) squares to -I")
    for i, j in itertools.combinations(range(len(gens)), 2):
        if not commutes(gens[i], gens[j]):
            raise NotCommuting(i, j)
    for i, g in enumerate(gens):
        if not any(g.x) and not any(g.z):
            if g.phase == 2:
                raise MinusIdentity(f"generator {i} is -I")
            raise Dependent(i)
        if i == 0:
            continue
        earlier = np.array([h.symplectic() for h in gens[:i]])
        coeffs = gf2_solve(earlier.T, g.symplectic())
        if coeffs is not None:
            combo = product((gens[m] for m in np.flatnonzero(coeffs)), n)
            # combo and g share their symplectic part, so combo * g = ±I
            if multiply(combo, g).phase == 2:
                raise MinusIdentity(f"generator {i} times earlier generators gives -I")
            raise Dependent(i)
    return gens


def compute_destabilizers(generators: Sequence[PauliString]) -> tuple[PauliString, ...]:
    """Destabilizers ``F_j``: anticommute with ``s_j`` only and commute mutually.

    Each ``F_j`` is the canonical solution (free bits zero, x bits before z
    bits) of the GF(2) system fixing its symplectic products with every
    generator and every earlier ``F``.  Output depends only on generator order.
    """
    gens = validate_stabilizer(generators)
    n, k = gens[0].n, len(gens)
    found: list[PauliString] = []
    for j in range(k):
        constraints = list(gens) + found
        # <f, c> = f.x . c.z + f.z . c.x
        a = np.array([np.concatenate([c.symplectic()[n:], c.symplectic()[:n]]) for c in constraints])
        b = np.zeros(len(constraints), dtype=np.uint8)
        b[j] = 1
        v = gf2_solve(a, b)
        if v is None:  # pragma: no cover - independent constraints are always solvable
            raise StabilizerError(f"no destabilizer for generator {j}")
        found.append(PauliString(tuple(v[:n]), tuple(v[n:]), 0))
    return tuple(found)


def syndrome_from_index(m: int, k: int) -> tuple[int, ...]:
    """Generator ``j`` (0-based) reads bit ``j`` of ``m``; bit 1 means outcome -1."""
    return tuple(-1 if (m >> j) & 1 else 1 for j in range(k))


def syndrome_index(a: Sequence[int]) -> int:
    return sum(1 << j for j, aj in enumerate(a) if aj == -1)


def all_syndromes(k: int) -> list[tuple[int, ...]]:
    return [syndrome_from_index(m, k) for m in range(2 ** k)]


EAGER_TABLE_MAX_K = 20


@dataclass(frozen=True)
class StabilizerSpec:
    """A validated stabilizer group with its destabilizers and correction lookup."""

    generators: tuple[PauliString, ...]
    destabilizers: tuple[PauliString, ...]
    correction_table: dict[tuple[int, ...], PauliString] = field(compare=False, repr=False)

    @classmethod
    def from_generators(cls, generators: Sequence[PauliString | str]) -> StabilizerSpec:
        gens = tuple(PauliString.from_label(g) if isinstance(g, str) else g for g in generators)
        gens = validate_stabilizer(gens)
        fs = compute_destabilizers(gens)
        table = {}
        if len(gens) <= EAGER_TABLE_MAX_K:
            table = {a: _correction(fs, a) for a in all_syndromes(len(gens))}
        return cls(gens, fs, table)

    @property
    def n(self) -> int:
        return self.generators[0].n

    @property
    def k(self) -> int:
        return len(self.generators)

    @property
    def is_z_type(self) -> bool:
        return all(g.is_z_type for g in self.generators)

    def subset_observables(self) -> list[PauliString]:
        """Products ``prod_{j in A} s_j`` for nonempty ``A`` in binary-counting order."""
        out = []
        for m in range(1, 2 ** self.k):
            out.append(product((self.generators[j] for j in range(self.k) if (m >> j) & 1), self.n))
        return out


def _correction(fs: Sequence[PauliString], a: Sequence[int]) -> PauliString:
    n = fs[0].n
    return product((f for f, aj in zip(fs, a) if aj == -1), n)


def correction_for_syndrome(spec: StabilizerSpec, a: Sequence[int]) -> PauliString:
    """``Q(a) = prod_j F_j^{(1 - a_j)/2}``."""
    a = tuple(int(v) for v in a)
    if len(a) != spec.k:
        raise ValueError(f"syndrome length {len(a)} != {spec.k} generators")
    if any(v not in (1, -1) for v in a):
        raise ValueError("syndrome entries must be +1 or -1")
    q = spec.correction_table.get(a)
    return q if q is not None else _correction(spec.destabilizers, a)


@dataclass(frozen=True)
class Coset:
    syndrome: tuple[int, ...]
    basis_states: tuple[int, ...] | None = None
    projector: np.ndarray | None = field(default=None, compare=False, repr=False)

    def labels(self, n: int) -> list[str]:
        if self.basis_states is None:
            raise ValueError("coset was not built from diagonal generators")
        return [format(b, f"0{n}b") for b in self.basis_states]

    @property
    def dim(self) -> int:
        if self.basis_states is not None:
            return len(self.basis_states)
        return int(round(np.trace(self.projector).real))


def _z_eigenvalue(p: PauliString, basis: int) -> int:
    n = p.n
    parity = 0
    for q in range(n):
        if p.z[q] and (basis >> (n - 1 - q)) & 1:
            parity ^= 1
    sign = 1 if p.phase == 0 else -1
    return sign * (-1) ** parity


def syndrome_projector(spec: StabilizerSpec, a: Sequence[int]) -> np.ndarray:
    """``prod_j (I + a_j s_j) / 2`` as a dense matrix."""
    d = 2 ** spec.n
    proj = np.eye(d, dtype=complex)
    for s, aj in zip(spec.generators, a):
        proj = proj @ ((np.eye(d) + aj * to_matrix(s)) / 2)
    return proj


def enumerate_cosets(spec: StabilizerSpec) -> list[Coset]:
    """All ``2**k`` joint eigenspaces, in syndrome-index order.

    Diagonal (Z-type) generators give explicit basis-state spans; otherwise
    each coset carries its dense projector.
    """
    k = spec.k
    if spec.is_z_type:
        members: list[list[int]] = [[] for _ in range(2 ** k)]
        for b in range(2 ** spec.n):
            a = tuple(_z_eigenvalue(s, b) for s in spec.generators)
            members[syndrome_index(a)].append(b)
        return [Coset(syndrome_from_index(m, k), tuple(members[m])) for m in range(2 ** k)]
    return [Coset(a, None, syndrome_projector(spec, a)) for a in all_syndromes(k)]


# --- presets -----------------------------------------------------------------


def single_z(n: int, k: int) -> StabilizerSpec:
    """``S = <Z_1, ..., Z_k>``."""
    if k < 1 or n < k:
        raise ValueError(f"single_z needs 1 <= k <= n (got n={n}, k={k})")
    return StabilizerSpec.from_generators([PauliString.single(n, {j: "Z"}) for j in range(1, k + 1)])


def chain_zz(n: int, k: int) -> StabilizerSpec:
    """``S = <Z_1 Z_2, ..., Z_k Z_{k+1}>``."""
    if k < 1 or n < k + 1:
        raise ValueError(f"chain_zz needs n >= k + 1 (got n={n}, k={k})")
    return StabilizerSpec.from_generators(
        [PauliString.single(n, {j: "Z", j + 1: "Z"}) for j in range(1, k + 1)]
    )
