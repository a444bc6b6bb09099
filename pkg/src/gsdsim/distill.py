"""Ground-state distillation: tag eigencomponents to probe outcomes and project.

With the two captured energies E0 < E1 measured, evolving controlled on a
probe prepared as (|0> + e^{i E0 tau} |1>)/sqrt2 for tau = pi/(E1 - E0) turns
the branch phases into +1 and -1; a -pi/2 y-rotation of the probe then leaves
the ground component tagged |0> and the excited component tagged |1>.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ipea import SampleGrid, controlled_wrapped_unitary, run_ipea_detailed
from .model import HeisenbergParams, SpectrumTable, diagonalize
from .qcore import SPIN_Y, DensityMatrix, StateVector, expm_hermitian, OperatorMatrix
from .tomo import spectral_weights

_SQRT2 = float(np.sqrt(2.0))

GAP_TOL_J = 1e-6          # below this (in units of J) the tag phase is unresolvable
IMPOSSIBLE_BRANCH = 1e-12


@dataclass(frozen=True)
class DistillationPlan:
    """Measured energies (plain energy units) and the derived tag evolution."""

    e0: float
    e1: float

    def __post_init__(self):
        if not self.e1 > self.e0:
            raise ValueError(f"need e1 > e0, got e0={self.e0!r}, e1={self.e1!r}")

    @property
    def tau(self) -> float:
        return float(np.pi / (self.e1 - self.e0))

    @property
    def preload_phase(self) -> float:
        return self.e0 * self.tau


def plan_from_spectrum(table: SpectrumTable, excited_label: str | None = None) -> DistillationPlan:
    """Exact-energy plan between the ground level and a captured excited level."""
    ground = table.ground
    if excited_label is None:
        # the trial family captures the singlet and T-1; the partner of the
        # ground level is whichever of the two is not the ground
        excited_label = "T-1" if ground.label == "S" else "S"
    return DistillationPlan(ground.energy, table.level(excited_label).energy)


def measure_plan(system: StateVector, p: HeisenbergParams, n_iterations: int = 5,
                 grid: SampleGrid | None = None, time_scale: float = 1.0,
                 min_weight: float = 0.05) -> DistillationPlan:
    """Plan from digit-refined energies of the lowest and highest captured peaks."""
    threads = run_ipea_detailed(system, p, n_iterations, grid,
                                min_weight=min_weight, time_scale=time_scale)
    energies = sorted(th.digits.energy(p.J) for th in threads)
    if len(energies) < 2:
        raise ValueError("need at least two captured eigenvalues to build a plan")
    return DistillationPlan(energies[0], energies[-1])


def _probe_rotation() -> OperatorMatrix:
    return expm_hermitian(OperatorMatrix.hermitian(SPIN_Y), -np.pi / 2)


def pre_rotation_state(system: StateVector, p: HeisenbergParams, plan: DistillationPlan,
                       time_scale: float = 1.0) -> StateVector:
    """State after the preloaded probe and controlled-U(tau), before the y-rotation."""
    if system.n_qubits != 2:
        raise ValueError("expected a 2-qubit system state")
    if abs(plan.e1 - plan.e0) < GAP_TOL_J * p.J:
        raise ValueError("gap unresolvable")
    probe = np.array([1.0, np.exp(1j * plan.preload_phase)], dtype=complex) / _SQRT2
    psi8 = np.kron(system.amplitudes, probe)
    cu = controlled_wrapped_unitary(p, plan.tau, time_scale)
    return StateVector(3, cu.entries @ psi8)


def build_final_state(system: StateVector, p: HeisenbergParams, plan: DistillationPlan,
                      time_scale: float = 1.0) -> StateVector:
    """Probe-tagged state (a0 e0 |0> - a1 e1 |1>) / norm for the captured branch pair."""
    staged = pre_rotation_state(system, p, plan, time_scale)
    rot = np.kron(np.eye(4), _probe_rotation().entries)
    return StateVector(3, rot @ staged.amplitudes)


def project_probe(state, outcome: int) -> tuple[DensityMatrix, float]:
    """Post-measurement system density matrix and Born probability for the probe."""
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    if isinstance(state, StateVector):
        if state.n_qubits != 3:
            raise ValueError("expected a 3-qubit state")
        col = state.amplitudes.reshape(4, 2)[:, outcome]
        prob = float(np.real(np.vdot(col, col)))
        if prob < IMPOSSIBLE_BRANCH:
            raise ValueError("impossible branch")
        rho = np.outer(col, col.conj()) / prob
        return DensityMatrix(4, rho), prob
    if isinstance(state, DensityMatrix):
        if state.dim != 8:
            raise ValueError("expected an 8-dimensional density matrix")
        block = state.entries.reshape(4, 2, 4, 2)[:, outcome, :, outcome]
        prob = float(np.real(np.trace(block)))
        if prob < IMPOSSIBLE_BRANCH:
            raise ValueError("impossible branch")
        return DensityMatrix(4, block / prob), prob
    raise TypeError("state must be a StateVector or DensityMatrix")


def eliminate_iteratively(system: StateVector, p: HeisenbergParams, max_rounds: int = 4,
                          exact_energies: bool = False, n_iterations: int = 5,
                          grid: SampleGrid | None = None,
                          excited_tol: float = 1e-6) -> DensityMatrix:
    """Strip captured excited levels one tag round at a time until only the ground remains.

    Each round measures the gap between the ground and the highest level still
    captured, tags that level to the probe |1> branch, and keeps the |0>
    projection.  Aborts if the ground weight decays below 1e-3.
    """
    table = diagonalize(p)
    ground_label = table.ground.label
    current = system
    for _ in range(max_rounds):
        weights = spectral_weights(current.density(), table)
        if weights[ground_label] < 1e-3:
            raise RuntimeError(
                f"ground weight {weights[ground_label]:.2e} too small to distill"
            )
        if 1.0 - weights[ground_label] < excited_tol:
            break
        if exact_energies:
            captured = [lv for lv in table.levels if weights[lv.label] > 1e-8]
            plan = DistillationPlan(captured[0].energy, captured[-1].energy)
        else:
            plan = measure_plan(current, p, n_iterations, grid, min_weight=0.01)
        tagged = build_final_state(current, p, plan)
        col = tagged.amplitudes.reshape(4, 2)[:, 0]
        prob = float(np.real(np.vdot(col, col)))
        if prob < IMPOSSIBLE_BRANCH:
            raise RuntimeError("distillation round extinguished the kept branch")
        current = StateVector(2, col / np.sqrt(prob))
    return current.density()
