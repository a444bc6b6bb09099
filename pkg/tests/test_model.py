import numpy as np
import pytest

from gsdsim.model import (
    HeisenbergParams,
    TrialParams,
    build_hamiltonian,
    build_trial_state,
    critical_field,
    diagonalize,
    optimize_trial,
    optimized_trial_state,
    variational_energy,
)

SQ2 = np.sqrt(2.0)


class TestHamiltonian:
    def test_spectrum_h0(self, p_h0):
        # oracle: dense diagonalization
        eigs = np.linalg.eigvalsh(build_hamiltonian(p_h0).entries)
        assert np.allclose(sorted(eigs), [-0.75, 0.25, 0.25, 0.25], atol=1e-12)

    def test_crossing_degeneracy(self):
        p = HeisenbergParams(1.0, 1.0)
        h = build_hamiltonian(p).entries
        e11 = h[3, 3].real
        assert abs(e11 - (-0.75)) < 1e-12  # degenerate with the singlet
        eigs = np.linalg.eigvalsh(h)
        assert abs(eigs[0] - eigs[1]) < 1e-12

    def test_rejects_zero_coupling(self):
        with pytest.raises(ValueError, match="positive"):
            HeisenbergParams(0.0, 0.0)

    def test_hermitian_role(self, p_low):
        assert build_hamiltonian(p_low).role == "hermitian"


class TestDiagonalize:
    def test_ground_below_crossing(self, p_h0):
        table = diagonalize(p_h0)
        assert table.ground.label == "S"
        assert abs(table.ground.energy + 0.75) < 1e-12

    def test_ground_above_crossing(self, p_high):
        table = diagonalize(p_high)
        assert table.ground.label == "T-1"
        assert abs(table.ground.energy + 1.0) < 1e-12

    def test_ordering_midfield(self, p_low):
        table = diagonalize(p_low)
        assert [lv.label for lv in table.levels] == ["S", "T-1", "T0", "T+1"]
        assert np.allclose(
            [lv.energy for lv in table.levels], [-0.75, -0.5, 0.25, 1.0], atol=1e-12
        )

    @pytest.mark.parametrize("J,h", [(1.0, 0.0), (1.0, 0.6), (2.5, 1.3), (1.0, 3.0)])
    def test_eigenpairs_and_orthonormality(self, J, h):
        p = HeisenbergParams(J, h)
        hm = build_hamiltonian(p).entries
        table = diagonalize(p)
        vectors = np.column_stack([lv.eigenvector.amplitudes for lv in table.levels])
        assert np.max(np.abs(vectors.conj().T @ vectors - np.eye(4))) < 1e-10
        for lv in table.levels:
            v = lv.eigenvector.amplitudes
            assert np.max(np.abs(hm @ v - lv.energy * v)) < 1e-10
        energies = [lv.energy for lv in table.levels]
        assert energies == sorted(energies)

    def test_closed_forms_match_dense_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            p = HeisenbergParams(rng.uniform(0.5, 3.0), rng.uniform(0.0, 3.0))
            dense = np.linalg.eigvalsh(build_hamiltonian(p).entries)
            table = diagonalize(p)
            assert np.allclose([lv.energy for lv in table.levels], dense, atol=1e-10)


class TestCriticalField:
    def test_unit_coupling(self, p_h0):
        assert critical_field(p_h0) == 1.0

    def test_linearity(self):
        assert critical_field(HeisenbergParams(2.0, 0.0)) == 2.0

    def test_degeneracy_at_crossing(self):
        p = HeisenbergParams(1.0, critical_field(HeisenbergParams(1.0, 0.0)))
        table = diagonalize(p)
        assert abs(table.levels[0].energy - table.levels[1].energy) < 1e-12


class TestTrialState:
    def test_optimized_amplitudes(self):
        psi = build_trial_state(TrialParams(-np.pi / 4, np.pi / 2))
        expected = np.array([0, -0.5, 0.5, 1 / SQ2])
        assert np.max(np.abs(psi.amplitudes - expected)) < 1e-12

    def test_zero_angles(self):
        psi = build_trial_state(TrialParams(0.0, 0.0))
        expected = np.zeros(4)
        expected[0b10] = expected[0b00] = 1 / SQ2
        assert np.max(np.abs(psi.amplitudes - expected)) < 1e-12

    def test_half_overlap_with_singlet(self, psi_star):
        singlet = np.array([0, 1, -1, 0]) / SQ2
        assert abs(abs(np.vdot(singlet, psi_star.amplitudes)) ** 2 - 0.5) < 1e-12


class TestVariationalEnergy:
    @pytest.mark.parametrize(
        "theta,phi,J,h,expected",
        [
            (-np.pi / 4, np.pi / 2, 1.0, 0.0, -0.25),
            (-np.pi / 4, np.pi / 2, 1.0, 0.75, -0.625),
            (np.pi / 4, 0.0, 1.0, 0.0, 0.25),
        ],
    )
    def test_frozen_values(self, theta, phi, J, h, expected):
        e = variational_energy(TrialParams(theta, phi), HeisenbergParams(J, h))
        assert abs(e - expected) < 1e-12

    def test_closed_form_on_random_angles(self):
        # trial energy decomposes as (1/2)(-J/4 + J/2 sin 2theta) + (1/2)(J/4 + h cos 2phi)
        rng = np.random.default_rng(3)
        for _ in range(50):
            th, ph = rng.uniform(-np.pi, np.pi, size=2)
            p = HeisenbergParams(rng.uniform(0.5, 2.0), rng.uniform(0, 2.0))
            closed = 0.5 * (-p.J / 4 + p.J / 2 * np.sin(2 * th)) + 0.5 * (
                p.J / 4 + p.h * np.cos(2 * ph)
            )
            assert abs(variational_energy(TrialParams(th, ph), p) - closed) < 1e-12


class TestOptimizeTrial:
    def test_midfield_minimum(self):
        p = HeisenbergParams(1.0, 0.5)
        tp = optimize_trial(p)
        assert abs(tp.theta + np.pi / 4) < 1e-6
        assert abs(tp.phi - np.pi / 2) < 1e-6
        assert abs(variational_energy(tp, p) + 0.5) < 1e-9

    def test_degenerate_phi_tiebreak(self, p_h0):
        tp = optimize_trial(p_h0)
        assert abs(tp.theta + np.pi / 4) < 1e-6
        assert tp.phi == np.pi / 2

    def test_scale_invariance(self):
        p = HeisenbergParams(3.0, 0.0)
        tp = optimize_trial(p)
        assert abs(tp.theta + np.pi / 4) < 1e-6
        assert abs(tp.phi - np.pi / 2) < 1e-6
        assert abs(variational_energy(tp, p) + 0.75) < 1e-9

    @pytest.mark.parametrize("J,h", [(1.0, 0.0), (1.0, 0.9), (2.0, 3.5)])
    def test_grid_global_minimum(self, J, h):
        p = HeisenbergParams(J, h)
        tp = optimize_trial(p)
        best = variational_energy(tp, p)
        grid = np.linspace(-np.pi, np.pi, 360, endpoint=False) + np.pi / 180
        energies = [
            variational_energy(TrialParams(th, ph), p) for th in grid[::6] for ph in grid[::6]
        ]
        assert min(energies) >= best - 1e-9


class TestCapturedLevels:
    @pytest.mark.parametrize("h_over_hc", [0.0, 0.75, 1.25])
    def test_half_ground_fidelity(self, h_over_hc):
        p = HeisenbergParams(1.0, h_over_hc * 1.0)
        psi = optimized_trial_state(p)
        ground = diagonalize(p).ground.eigenvector
        overlap = abs(np.vdot(ground.amplitudes, psi.amplitudes)) ** 2
        assert abs(overlap - 0.5) < 1e-10

    def test_no_weight_on_other_levels(self, p_low):
        psi = optimized_trial_state(p_low)
        table = diagonalize(p_low)
        for label in ("T0", "T+1"):
            v = table.level(label).eigenvector.amplitudes
            assert abs(np.vdot(v, psi.amplitudes)) ** 2 < 1e-12
