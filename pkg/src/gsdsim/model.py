"""Two-spin Heisenberg model: Hamiltonian, labeled spectrum, variational trial family.

Energies are in the same units as the coupling J (hbar = 1); time is the
inverse of that.  Reported "phase fraction" values elsewhere divide by 2*pi*J.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import IDENTITY_2, SPIN_X, SPIN_Y, SPIN_Z, OperatorMatrix, StateVector

# Deterministic ordering of degenerate levels: lower rank sorts first.
LABELS = ("S", "T-1", "T0", "T+1")
_LABEL_RANK = {lab: i for i, lab in enumerate(LABELS)}


@dataclass(frozen=True)
class HeisenbergParams:
    """Exchange coupling J > 0 and longitudinal field h (same energy units)."""

    J: float
    h: float = 0.0

    def __post_init__(self):
        if not (self.J > 0):
            raise ValueError(f"coupling J must be positive, got {self.J!r}")
        if not np.isfinite(self.h):
            raise ValueError(f"field h must be finite, got {self.h!r}")


@dataclass(frozen=True)
class TrialParams:
    theta: float
    phi: float

    def __post_init__(self):
        if not (np.isfinite(self.theta) and np.isfinite(self.phi)):
            raise ValueError("trial angles must be finite")


@dataclass(frozen=True)
class SpectrumLevel:
    label: str
    energy: float
    eigenvector: StateVector


@dataclass(frozen=True)
class SpectrumTable:
    """The four labeled levels, sorted ascending in energy (label rank breaks ties)."""

    levels: tuple[SpectrumLevel, ...]

    def __post_init__(self):
        if len(self.levels) != 4:
            raise ValueError("spectrum table must hold exactly 4 levels")

    @property
    def ground(self) -> SpectrumLevel:
        return self.levels[0]

    def level(self, label: str) -> SpectrumLevel:
        for lv in self.levels:
            if lv.label == label:
                return lv
        raise KeyError(label)

    def energies(self) -> dict[str, float]:
        return {lv.label: lv.energy for lv in self.levels}


def build_hamiltonian(p: HeisenbergParams) -> OperatorMatrix:
    """J(IxIx + IyIy + IzIz) + h(Iz x 1 + 1 x Iz) as a 4x4 Hermitian matrix."""
    exchange = (
        np.kron(SPIN_X, SPIN_X) + np.kron(SPIN_Y, SPIN_Y) + np.kron(SPIN_Z, SPIN_Z)
    )
    field = np.kron(SPIN_Z, IDENTITY_2) + np.kron(IDENTITY_2, SPIN_Z)
    return OperatorMatrix.hermitian(p.J * exchange + p.h * field)


def _sqrt2() -> float:
    return float(np.sqrt(2.0))


def diagonalize(p: HeisenbergParams) -> SpectrumTable:
    """Closed-form labeled spectrum: singlet at -3J/4, triplet at J/4 split by h."""
    s2 = _sqrt2()
    vec = {
        "S": np.array([0, 1, -1, 0], dtype=complex) / s2,
        "T0": np.array([0, 1, 1, 0], dtype=complex) / s2,
        "T+1": np.array([1, 0, 0, 0], dtype=complex),
        "T-1": np.array([0, 0, 0, 1], dtype=complex),
    }
    energy = {
        "S": -0.75 * p.J,
        "T0": 0.25 * p.J,
        "T+1": 0.25 * p.J + p.h,
        "T-1": 0.25 * p.J - p.h,
    }
    levels = [
        SpectrumLevel(lab, energy[lab], StateVector(2, vec[lab])) for lab in LABELS
    ]
    levels.sort(key=lambda lv: (lv.energy, _LABEL_RANK[lv.label]))
    return SpectrumTable(tuple(levels))


def critical_field(p: HeisenbergParams) -> float:
    """Field at which the singlet and T-1 levels cross: h_c = J."""
    return p.J


def build_trial_state(tp: TrialParams) -> StateVector:
    """(cos(theta)|10> + sin(theta)|01>)/sqrt2 + (cos(phi)|00> + sin(phi)|11>)/sqrt2."""
    s2 = _sqrt2()
    amps = np.zeros(4, dtype=complex)
    amps[0b10] = np.cos(tp.theta) / s2
    amps[0b01] = np.sin(tp.theta) / s2
    amps[0b00] = np.cos(tp.phi) / s2
    amps[0b11] = np.sin(tp.phi) / s2
    return StateVector(2, amps)


def variational_energy(tp: TrialParams, p: HeisenbergParams) -> float:
    """<psi(theta, phi)| H |psi(theta, phi)>."""
    psi = build_trial_state(tp).amplitudes
    h = build_hamiltonian(p).entries
    return float(np.real(psi.conj() @ h @ psi))


def optimized_trial_state(p: HeisenbergParams) -> StateVector:
    return build_trial_state(optimize_trial(p))


def _trial_energy_grid(p: HeisenbergParams, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Energy on the outer grid thetas x phis, vectorized."""
    h = build_hamiltonian(p).entries
    th = thetas[:, None] + np.zeros_like(phis)[None, :]
    ph = np.zeros_like(thetas)[:, None] + phis[None, :]
    s2 = _sqrt2()
    psi = np.stack(
        [np.cos(ph), np.sin(th), np.cos(th), np.sin(ph)], axis=0
    ) / s2  # (4, nth, nph)
    hpsi = np.tensordot(h, psi, axes=(1, 0))
    return np.real(np.sum(psi.conj() * hpsi, axis=0))


def _parabola_vertex(x: np.ndarray, y: np.ndarray, i: int) -> float:
    """Vertex of the parabola through grid points i-1, i, i+1 (circular)."""
    n = len(x)
    y0, y1, y2 = y[(i - 1) % n], y[i], y[(i + 1) % n]
    denom = y0 - 2 * y1 + y2
    if abs(denom) < 1e-14:
        return float(x[i])
    step = x[1] - x[0]
    return float(x[i] + 0.5 * step * (y0 - y2) / denom)


def _canonical_half_period(angle: float) -> float:
    """Map into (-pi/2, pi/2]; the trial energy has period pi in each angle."""
    a = float(angle)
    while a <= -np.pi / 2:
        a += np.pi
    while a > np.pi / 2:
        a -= np.pi
    return a


def optimize_trial(p: HeisenbergParams) -> TrialParams:
    """Angles minimizing the variational energy: 1-degree grid plus local parabola.

    Results are canonicalized to (-pi/2, pi/2].  The phi minimum is degenerate
    at h = 0; ties resolve to phi = pi/2.
    """
    step = np.pi / 180
    grid = -np.pi + step * np.arange(1, 361)  # (-pi, pi]
    energies = _trial_energy_grid(p, grid, grid)
    i_th, i_ph = np.unravel_index(np.argmin(energies), energies.shape)

    theta_slice = energies[:, i_ph]
    phi_slice = energies[i_th, :]
    theta = _parabola_vertex(grid, theta_slice, int(i_th))
    if np.ptp(phi_slice) < 1e-12 * max(1.0, abs(p.J)):
        phi = np.pi / 2  # degenerate direction, pick the canonical representative
    else:
        phi = _parabola_vertex(grid, phi_slice, int(i_ph))

    theta = _canonical_half_period(theta)
    phi = _canonical_half_period(phi)
    refined = TrialParams(theta, phi)
    if variational_energy(refined, p) > energies[i_th, i_ph] + 1e-9:
        raise RuntimeError("trial-state optimization failed to refine the grid minimum")
    return refined
