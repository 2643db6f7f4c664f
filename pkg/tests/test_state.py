import numpy as np
import pytest
from scipy.linalg import expm

from coset_qrc.pauli import PauliString, StabilizerSpec, chain_zz, single_z, to_matrix
from coset_qrc.state import (
    DensityMatrix,
    IsingHamiltonian,
    InvalidState,
    all_to_all,
    apply_unitary,
    expectation,
    init_state,
    measure_stabilizers_branches,
    mixture,
    pauli_rotation,
    sample_ising,
    shot_estimate_syndromes,
    trotter_unitary,
)

P = PauliString.from_label


def random_state(rng, n, rank=2):
    a = rng.normal(size=(2 ** n, rank)) + 1j * rng.normal(size=(2 ** n, rank))
    rho = a @ a.conj().T
    return DensityMatrix(rho / np.trace(rho))


def test_density_matrix_validation():
    DensityMatrix.basis(2).validate()
    with pytest.raises(InvalidState):
        DensityMatrix(np.eye(3))
    with pytest.raises(InvalidState):
        DensityMatrix(np.eye(2)).validate()
    with pytest.raises(InvalidState):
        DensityMatrix(np.array([[1, 1], [0, 0]])).validate()


class TestInitState:
    def test_chain(self):
        rho = init_state(chain_zz(3, 2))
        np.testing.assert_array_equal(rho.data, DensityMatrix.basis(3).data)
        for s in chain_zz(3, 2).generators:
            assert expectation(rho, s) == 1

    def test_single_z(self):
        np.testing.assert_array_equal(init_state(single_z(3, 2)).data, DensityMatrix.basis(3).data)

    def test_x_stabilizer_gives_plus_state(self):
        proj_zero = (np.eye(2) + to_matrix(P("X"))) / 2 @ np.array([1, 0])
        plus = proj_zero / np.linalg.norm(proj_zero)
        rho = init_state(StabilizerSpec.from_generators(["X"]))
        np.testing.assert_allclose(rho.data, np.outer(plus, plus), atol=1e-15)

    def test_no_overlap(self):
        with pytest.raises(InvalidState):
            init_state(StabilizerSpec.from_generators(["-Z"]))


class TestRotation:
    def test_zero_angle(self):
        np.testing.assert_array_equal(pauli_rotation(0.0, P("XZ")), np.eye(4))

    def test_half_pi(self):
        np.testing.assert_allclose(pauli_rotation(np.pi / 2, P("YZ")), -1j * to_matrix(P("YZ")), atol=1e-15)

    def test_expm_oracle(self):
        x = to_matrix(P("X"))
        u = pauli_rotation(np.pi / 4, P("X"))
        np.testing.assert_allclose(u, expm(-1j * np.pi / 4 * x), atol=1e-12)
        np.testing.assert_allclose(u, (np.eye(2) - 1j * x) / np.sqrt(2), atol=1e-15)

    def test_rejects_antihermitian(self):
        with pytest.raises(ValueError):
            pauli_rotation(0.1, P("iX"))


class TestApplyUnitary:
    def test_identity(self):
        rho = random_state(np.random.default_rng(0), 2)
        np.testing.assert_allclose(apply_unitary(rho, np.eye(4)).data, rho.data)

    def test_bit_flip(self):
        out = apply_unitary(DensityMatrix.basis(1, 0), to_matrix(P("X")))
        np.testing.assert_array_equal(out.data, DensityMatrix.basis(1, 1).data)

    def test_mixed_invariant(self):
        u = trotter_unitary(sample_ising(3, rng=1))
        out = apply_unitary(DensityMatrix.maximally_mixed(3), u)
        np.testing.assert_allclose(out.data, np.eye(8) / 8, atol=1e-15)

    def test_spectrum_preserved(self):
        rng = np.random.default_rng(3)
        rho = random_state(rng, 3, rank=3)
        out = apply_unitary(rho, trotter_unitary(sample_ising(3, rng=rng)))
        np.testing.assert_allclose(np.linalg.eigvalsh(out.data), np.linalg.eigvalsh(rho.data), atol=1e-12)
        assert abs(np.trace(out.data) - 1) < 1e-12

    def test_errors(self):
        rho = DensityMatrix.basis(1)
        with pytest.raises(ValueError):
            apply_unitary(rho, np.eye(4))
        with pytest.raises(ValueError):
            apply_unitary(rho, np.array([[1, 1], [0, 1]]))


class TestExpectation:
    def test_examples(self):
        assert expectation(DensityMatrix.basis(1, 0), P("Z")) == 1
        assert expectation(DensityMatrix.basis(2, 0b01), P("ZZ")) == -1
        assert expectation(DensityMatrix.basis(1, 0), P("X")) == 0

    def test_bounds(self):
        rng = np.random.default_rng(4)
        rho = random_state(rng, 3)
        for letters in ("ZZI", "XYZ", "IIY"):
            assert -1 - 1e-10 <= expectation(rho, P(letters)) <= 1 + 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            expectation(DensityMatrix.basis(2), P("Z"))


class TestIsing:
    def test_determinism(self):
        assert sample_ising(4, rng=7) == sample_ising(4, rng=7)
        assert sample_ising(4, rng=7) != sample_ising(4, rng=8)

    def test_complete_graph(self):
        h = sample_ising(4, rng=0)
        assert len(h.edges) == 6
        assert h.dt == 1.645 and h.trotter_steps == 1

    def test_field_distribution(self):
        hx = np.concatenate([sample_ising(1, rng=np.random.default_rng(s)).hx for s in range(2000)])
        rng = np.random.default_rng(0)
        hx = np.concatenate([hx] + [np.array(sample_ising(5, rng=rng).hx) for _ in range(1600)])
        assert len(hx) == 10_000
        assert abs(hx.mean()) < 0.02
        assert hx.min() >= -0.5 and hx.max() <= 0.5

    def test_coupling_range(self):
        h = sample_ising(5, rng=2)
        assert all(abs(j) <= 1 for j in h.jz + h.jx)
        assert all(abs(v) <= 0.5 for v in h.hx + h.hy + h.hz)

    def test_edge_validation(self):
        z = (0.0,) * 3
        with pytest.raises(ValueError):
            IsingHamiltonian(3, z, z, z, ((0, 0),), (0.0,), (0.0,))
        with pytest.raises(ValueError):
            IsingHamiltonian(3, z, z, z, ((0, 1), (1, 0)), (0.0, 0.0), (0.0, 0.0))

    def test_zero_hamiltonian_identity(self):
        np.testing.assert_array_equal(trotter_unitary(IsingHamiltonian.zero(3)), np.eye(8))

    def test_single_qubit_exact(self):
        h = IsingHamiltonian(1, (0.0,), (0.0,), (0.5,), (), (), (), dt=np.pi)
        u = trotter_unitary(h)
        np.testing.assert_allclose(u, expm(-1j * np.pi * 0.5 * to_matrix(P("Z"))), atol=1e-12)
        np.testing.assert_allclose(u, -1j * to_matrix(P("Z")), atol=1e-12)

    def test_factor_order(self):
        # hz on qubit 1 and Jx on (1,2): singles act first, so U = exp(-i XX) exp(-i Z1)
        h = IsingHamiltonian(2, (0, 0), (0, 0), (0.3, 0), ((0, 1),), (0.0,), (0.7,), dt=1.0)
        expected = expm(-0.7j * to_matrix(P("XX"))) @ expm(-0.3j * to_matrix(P("ZI")))
        np.testing.assert_allclose(trotter_unitary(h), expected, atol=1e-12)

    def test_trotter_convergence(self):
        base = sample_ising(3, rng=11)
        exact = expm(-1j * base.dt * base.matrix())
        errs = []
        for steps in (1, 10, 100):
            h = IsingHamiltonian(**{**base.__dict__, "trotter_steps": steps})
            u = trotter_unitary(h)
            np.testing.assert_allclose(u.conj().T @ u, np.eye(8), atol=1e-10)
            errs.append(np.linalg.norm(u - exact, 2))
        assert errs[0] > errs[1] > errs[2]
        # first order: error ~ 1/steps, below the commutator bound t^2/(2N) sum_{a<b} ||[H_a, H_b]||
        assert 8 < errs[1] / errs[2] < 12
        terms = [c * to_matrix(p) for c, p in base.terms()]
        comm = sum(
            np.linalg.norm(terms[a] @ terms[b] - terms[b] @ terms[a], 2)
            for a in range(len(terms))
            for b in range(a + 1, len(terms))
        )
        assert errs[2] <= base.dt ** 2 / (2 * 100) * comm
        assert errs[2] < 0.035

    def test_dense_limit(self):
        with pytest.raises(ValueError):
            trotter_unitary(sample_ising(3, rng=0), dense_limit=2)


class TestMeasurement:
    def test_code_state_single_branch(self):
        spec = chain_zz(3, 2)
        rho = init_state(spec)
        branches = measure_stabilizers_branches(rho, spec)
        assert len(branches) == 1
        assert branches[0].syndrome == (1, 1) and branches[0].probability == pytest.approx(1)
        np.testing.assert_allclose(branches[0].state.data, rho.data, atol=1e-15)

    def test_plus_state_two_branches(self):
        spec = StabilizerSpec.from_generators(["ZI"])
        plus = np.array([1, 1]) / np.sqrt(2)
        rho = DensityMatrix.pure(np.kron(plus, [1, 0]))
        branches = measure_stabilizers_branches(rho, spec)
        assert [b.syndrome for b in branches] == [(1,), (-1,)]
        for b in branches:
            assert b.probability == pytest.approx(0.5, abs=1e-14)
            # both land on |00>: the -1 branch is |10>, corrected by X1
            np.testing.assert_allclose(b.state.data, DensityMatrix.basis(2, 0).data, atol=1e-14)

    def test_mixture_trace_and_code_space(self):
        rng = np.random.default_rng(5)
        spec = chain_zz(4, 3)
        rho = random_state(rng, 4, rank=4)
        branches = measure_stabilizers_branches(rho, spec)
        assert sum(b.probability for b in branches) == pytest.approx(1, abs=1e-10)
        mixed = mixture(branches)
        assert abs(np.trace(mixed.data) - 1) < 1e-10
        for b in branches:
            for s in spec.generators:
                assert expectation(b.state, s) == pytest.approx(1, abs=1e-10)

    def test_idempotent_on_code_space(self):
        rng = np.random.default_rng(6)
        spec = chain_zz(3, 2)
        psi = rng.normal(size=2) + 1j * rng.normal(size=2)
        full = np.zeros(8, dtype=complex)
        full[[0, 7]] = psi / np.linalg.norm(psi)
        rho = DensityMatrix.pure(full)
        out = mixture(measure_stabilizers_branches(rho, spec))
        assert np.max(np.abs(out.data - rho.data)) < 1e-12


class TestShots:
    def test_code_state_deterministic(self):
        spec = chain_zz(3, 2)
        samples = shot_estimate_syndromes(init_state(spec), spec, 500, rng=0)
        assert samples.shape == (500, 2) and np.all(samples == 1)

    def test_unbiased_zero_mean(self):
        spec = StabilizerSpec.from_generators(["Z"])
        plus = DensityMatrix.pure(np.array([1, 1]) / np.sqrt(2))
        samples = shot_estimate_syndromes(plus, spec, 100_000, rng=123)
        assert abs(samples.mean()) < 0.01

    def test_seed_reproducible(self):
        spec = chain_zz(3, 2)
        rho = random_state(np.random.default_rng(1), 3)
        a = shot_estimate_syndromes(rho, spec, 1000, rng=9)
        b = shot_estimate_syndromes(rho, spec, 1000, rng=9)
        np.testing.assert_array_equal(a, b)

    def test_converges_to_expectation(self):
        spec = chain_zz(3, 2)
        rho = random_state(np.random.default_rng(2), 3)
        shots = 100_000
        samples = shot_estimate_syndromes(rho, spec, shots, rng=4)
        for j, s in enumerate(spec.generators):
            m = expectation(rho, s)
            sigma = np.sqrt((1 - m ** 2) / shots)
            assert abs(samples[:, j].mean() - m) < 3 * sigma + 1e-12

    def test_rejects_zero_shots(self):
        with pytest.raises(ValueError):
            shot_estimate_syndromes(DensityMatrix.basis(1), StabilizerSpec.from_generators(["Z"]), 0)


def test_all_to_all_order():
    assert all_to_all(3) == ((0, 1), (0, 2), (1, 2))
