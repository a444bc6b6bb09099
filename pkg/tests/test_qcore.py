import numpy as np
import pytest

from gsdsim.qcore import (
    DensityMatrix,
    OperatorMatrix,
    SPIN_Z,
    StateVector,
    expm_hermitian,
    partial_trace,
    tensor_product,
)
from gsdsim.model import build_hamiltonian


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return OperatorMatrix.hermitian((a + a.conj().T) / 2)


def random_state(rng, n_qubits):
    a = rng.normal(size=2 ** n_qubits) + 1j * rng.normal(size=2 ** n_qubits)
    return StateVector.from_amplitudes(a, normalize=True)


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.conj().T
    return DensityMatrix(dim, m / np.trace(m).real)


class TestTensorProduct:
    def test_basis_composition(self):
        ket0 = StateVector.basis(1, 0)
        ket1 = StateVector.basis(1, 1)
        out = tensor_product(ket0, ket1)
        assert np.allclose(out.amplitudes, [0, 1, 0, 0])

    def test_identity_case(self):
        eye2 = OperatorMatrix.unitary(np.eye(2))
        out = tensor_product(eye2, eye2)
        assert out.role == "unitary"
        assert np.array_equal(out.entries, np.eye(4))

    def test_superposition_times_basis(self):
        plus = StateVector.from_amplitudes([1, 1], normalize=True)
        out = tensor_product(plus, StateVector.basis(1, 0))
        assert np.allclose(out.amplitudes, [1 / np.sqrt(2), 0, 1 / np.sqrt(2), 0])

    def test_dimension_overflow(self):
        big = StateVector.basis(6, 0)
        with pytest.raises(ValueError, match="exceeds"):
            tensor_product(big, StateVector.basis(1, 0))

    def test_associative_exactly_on_dyadic_amplitudes(self):
        # dyadic entries multiply without rounding, so equality is bit-exact
        a = StateVector.from_amplitudes([0.5, 0.5, 0.5, 0.5])
        b = StateVector.basis(1, 1)
        c = StateVector.from_amplitudes([0.5, -0.5, 0.5j, -0.5j])
        left = tensor_product(tensor_product(a, b), c)
        right = tensor_product(a, tensor_product(b, c))
        assert np.array_equal(left.amplitudes, right.amplitudes)

    def test_associative_within_rounding_for_random_states(self):
        rng = np.random.default_rng(11)
        a, b, c = (random_state(rng, 1) for _ in range(3))
        left = tensor_product(tensor_product(a, b), c)
        right = tensor_product(a, tensor_product(b, c))
        assert np.max(np.abs(left.amplitudes - right.amplitudes)) < 1e-15

    def test_type_mismatch(self):
        with pytest.raises(TypeError):
            tensor_product(StateVector.basis(1, 0), OperatorMatrix.unitary(np.eye(2)))


class TestExpmHermitian:
    def test_zero_generator(self):
        h = OperatorMatrix.hermitian(np.zeros((4, 4)))
        assert np.allclose(expm_hermitian(h, 3.7).entries, np.eye(4))

    def test_known_rotation(self):
        # e^{-i (sigma_z/2) 2 pi} = -I
        h = OperatorMatrix.hermitian(SPIN_Z)
        u = expm_hermitian(h, 2 * np.pi)
        assert np.allclose(u.entries, -np.eye(2), atol=1e-12)

    def test_matches_commuting_factorization(self, p_h0):
        # independent oracle: the product of the three commuting-term propagators
        from gsdsim.qcore import SPIN_X, SPIN_Y

        h = build_hamiltonian(p_h0)
        xx = OperatorMatrix.hermitian(np.kron(SPIN_X, SPIN_X))
        yy = OperatorMatrix.hermitian(np.kron(SPIN_Y, SPIN_Y))
        zz = OperatorMatrix.hermitian(np.kron(SPIN_Z, SPIN_Z))
        product = (
            expm_hermitian(xx, 1.0).entries
            @ expm_hermitian(yy, 1.0).entries
            @ expm_hermitian(zz, 1.0).entries
        )
        assert np.max(np.abs(expm_hermitian(h, 1.0).entries - product)) < 1e-10

    def test_rejects_non_hermitian(self):
        bad = OperatorMatrix(2, np.array([[0, 1], [0, 0]], dtype=complex), "general")
        with pytest.raises(ValueError, match="Hermitian"):
            expm_hermitian(bad, 1.0)

    def test_additivity(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            h = random_hermitian(rng, 4)
            t1, t2 = rng.uniform(-2, 2, size=2)
            lhs = expm_hermitian(h, t1).entries @ expm_hermitian(h, t2).entries
            rhs = expm_hermitian(h, t1 + t2).entries
            assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_result_is_unitary(self):
        rng = np.random.default_rng(6)
        u = expm_hermitian(random_hermitian(rng, 8), 0.3)
        assert u.role == "unitary"


class TestPartialTrace:
    def test_product_state_factorizes(self):
        rng = np.random.default_rng(7)
        rho_a = random_density(rng, 2)
        rho_b = random_density(rng, 2)
        joint = DensityMatrix(4, np.kron(rho_a.entries, rho_b.entries))
        reduced = partial_trace(joint, keep={0})
        assert np.max(np.abs(reduced.entries - rho_a.entries)) < 1e-12

    def test_bell_state_marginal(self):
        bell = StateVector.from_amplitudes([1, 0, 0, 1], normalize=True)
        reduced = partial_trace(bell.density(), keep={0})
        assert np.allclose(reduced.entries, np.eye(2) / 2, atol=1e-12)

    def test_probe_offdiagonal_matches_eigensum(self, p_h0, psi_star):
        # oracle: (1/2) sum_k |a_k|^2 e^{+i E_k t} from the eigendecomposition
        h = build_hamiltonian(p_h0)
        w, v = np.linalg.eigh(h.entries)
        weights = np.abs(v.conj().T @ psi_star.amplitudes) ** 2
        t = 1.6
        expected = 0.5 * np.sum(weights * np.exp(1j * w * t))

        u = expm_hermitian(h, t)
        cu = np.kron(np.eye(4), np.diag([1.0, 0.0])) + np.kron(u.entries, np.diag([0.0, 1.0]))
        probe = StateVector.from_amplitudes([1, 1], normalize=True)
        psi3 = tensor_product(psi_star, probe)
        evolved = StateVector(3, cu @ psi3.amplitudes)
        rho_probe = partial_trace(evolved.density(), keep={2})
        assert abs(rho_probe.entries[0, 1] - expected) < 1e-10

    def test_empty_keep_rejected(self, psi_star):
        with pytest.raises(ValueError, match="non-empty"):
            partial_trace(psi_star.density(), keep=set())

    def test_trace_preserved(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            rho = random_density(rng, 8)
            for keep in ({0}, {1}, {2}, {0, 2}, {1, 2}):
                reduced = partial_trace(rho, keep)
                assert abs(np.trace(reduced.entries) - 1.0) < 1e-10


class TestValidation:
    def test_norm_enforced(self):
        with pytest.raises(ValueError, match="norm"):
            StateVector(1, np.array([1.0, 1.0]))

    def test_unitary_role_enforced(self):
        with pytest.raises(ValueError, match="unitary"):
            OperatorMatrix(2, 2 * np.eye(2, dtype=complex), "unitary")

    def test_density_positivity_enforced(self):
        bad = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(ValueError, match="negative"):
            DensityMatrix(2, bad)

    def test_density_trace_enforced(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix(2, np.eye(2, dtype=complex))
