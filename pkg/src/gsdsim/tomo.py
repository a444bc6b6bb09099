"""State metrics: fidelity, purity, projection, magnetization, eigenbasis weights."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .model import SpectrumTable
from .qcore import IDENTITY_2, SPIN_Z, DensityMatrix, StateVector

_MAGNETIZATION_OP = np.kron(SPIN_Z, IDENTITY_2) + np.kron(IDENTITY_2, SPIN_Z)


@dataclass(frozen=True)
class StateReport:
    """Bundle of the scalar metrics for one reconstructed state."""

    fidelity: float
    purity: float
    projection: float
    magnetization: float
    weights: dict[str, float]

    def __post_init__(self):
        total = sum(self.weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"spectral weights sum to {total!r}, not 1")
        if abs(self.projection - self.fidelity / np.sqrt(self.purity)) > 1e-12:
            raise ValueError("projection must equal fidelity / sqrt(purity)")

    def as_dict(self) -> dict:
        return {
            "fidelity": self.fidelity,
            "purity": self.purity,
            "projection": self.projection,
            "magnetization": self.magnetization,
            "weights": dict(sorted(self.weights.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def fidelity(rho: DensityMatrix, target: StateVector) -> float:
    """<target| rho |target>, clamped to [0, 1]."""
    if rho.dim != 2 ** target.n_qubits:
        raise ValueError(f"dimension mismatch: rho dim {rho.dim}, target dim {2 ** target.n_qubits}")
    t = target.amplitudes
    value = float(np.real(t.conj() @ rho.entries @ t))
    return min(1.0, max(0.0, value))


def purity_projection(rho: DensityMatrix, target: StateVector | None = None):
    """Purity Q = Tr rho^2; with a target also the projection P = F / sqrt(Q)."""
    q = float(np.real(np.trace(rho.entries @ rho.entries)))
    if target is None:
        return q
    return q, fidelity(rho, target) / np.sqrt(q)


def magnetization(rho: DensityMatrix) -> float:
    """Total longitudinal spin Tr[rho (Iz x 1 + 1 x Iz)] of a 2-qubit state."""
    if rho.dim != 4:
        raise ValueError("magnetization is defined for 2-qubit density matrices")
    return float(np.real(np.trace(rho.entries @ _MAGNETIZATION_OP)))


def spectral_weights(rho: DensityMatrix, spectrum: SpectrumTable) -> dict[str, float]:
    """Population of each labeled eigenvector: w_label = <v| rho |v>."""
    weights = {}
    for level in spectrum.levels:
        v = level.eigenvector.amplitudes
        weights[level.label] = float(np.real(v.conj() @ rho.entries @ v))
    return weights


def state_report(rho: DensityMatrix, spectrum: SpectrumTable,
                 target: StateVector | None = None) -> StateReport:
    """All metrics against a target (defaults to the spectrum's ground vector)."""
    if target is None:
        target = spectrum.ground.eigenvector
    f = fidelity(rho, target)
    q, p = purity_projection(rho, target)
    return StateReport(
        fidelity=f,
        purity=q,
        projection=p,
        magnetization=magnetization(rho),
        weights=spectral_weights(rho, spectrum),
    )
