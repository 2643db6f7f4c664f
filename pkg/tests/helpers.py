import numpy as np

from coset_qrc.pauli import PauliString, StabilizerSpec, commutes, gf2_rank


def random_pauli(rng, n, hermitian=False):
    x = rng.integers(0, 2, n)
    z = rng.integers(0, 2, n)
    phase = 2 * rng.integers(0, 2) if hermitian else rng.integers(0, 4)
    return PauliString(tuple(x), tuple(z), int(phase))


def random_stabilizer(rng, n, k, max_tries=10_000):
    """Greedy random commuting, independent, Hermitian generator set."""
    gens = []
    for _ in range(max_tries):
        if len(gens) == k:
            break
        p = random_pauli(rng, n, hermitian=True)
        if not any(p.x) and not any(p.z):
            continue
        if not all(commutes(p, g) for g in gens):
            continue
        if gf2_rank(np.array([g.symplectic() for g in gens + [p]])) < len(gens) + 1:
            continue
        gens.append(p)
    assert len(gens) == k
    return StabilizerSpec.from_generators(gens)


def dense_commute(a, b):
    return np.allclose(a @ b, b @ a)
