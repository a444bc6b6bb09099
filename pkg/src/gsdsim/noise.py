"""Error models: per-qubit dephasing scaled by pulse durations, coupling jitter.

Coupling jitter is modeled as a per-run calibration offset: one relative error
epsilon is drawn per seeded run and every commanded evolution interval runs on
the same stretched clock, so each measured eigenvalue shifts by the factor
(1 + epsilon).  Dephasing multiplies the off-diagonal elements of each qubit
by e^{-duration/T2} once per program segment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import distill, pulsec, tomo
from .ipea import SampleGrid
from .model import HeisenbergParams, diagonalize
from .qcore import DensityMatrix, SPIN_Y, OperatorMatrix, StateVector, expm_hermitian


def _default_t2() -> dict[str, float]:
    return {"a": 1.0, "b": 1.0, "c": 1.0}


@dataclass(frozen=True)
class NoiseConfig:
    """Per-qubit T2 (seconds), relative coupling jitter, tomography perturbation."""

    t2_s: dict[str, float] = field(default_factory=_default_t2)
    delta_j_rel: float = 1e-4
    tomo_scale: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for qubit, value in self.t2_s.items():
            if qubit not in ("a", "b", "c"):
                raise ValueError(f"unknown qubit {qubit!r} in T2 map")
            if not value > 0:
                raise ValueError(f"T2 for qubit {qubit!r} must be positive")
        if self.delta_j_rel < 0 or self.tomo_scale < 0:
            raise ValueError("noise scales must be non-negative")

    @classmethod
    def noiseless(cls, seed: int = 0) -> "NoiseConfig":
        return cls(t2_s={"a": math.inf, "b": math.inf, "c": math.inf},
                   delta_j_rel=0.0, tomo_scale=0.0, seed=seed)


def dephase(rho: DensityMatrix, qubit: int, duration: float, t2: float) -> DensityMatrix:
    """Scale every element whose bra and ket differ on `qubit` by e^{-duration/T2}."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    if not t2 > 0:
        raise ValueError("T2 must be positive")
    n = rho.n_qubits
    if qubit < 0 or qubit >= n:
        raise ValueError(f"qubit {qubit} out of range for {n}-qubit state")
    factor = math.exp(-duration / t2)
    idx = np.arange(rho.dim)
    bit = (idx >> (n - 1 - qubit)) & 1
    differs = bit[:, None] != bit[None, :]
    return DensityMatrix(rho.dim, rho.entries * np.where(differs, factor, 1.0))


def jitter_J(p: HeisenbergParams, cfg: NoiseConfig, rng: np.random.Generator) -> HeisenbergParams:
    """Coupling with a uniform relative offset in [-delta, +delta], one draw."""
    eps = rng.uniform(-cfg.delta_j_rel, cfg.delta_j_rel)
    return HeisenbergParams(p.J * (1.0 + eps), p.h)


def perturb_tomography(rho: DensityMatrix, scale: float, rng: np.random.Generator) -> DensityMatrix:
    """Mix in a seeded random state to emulate reconstruction error."""
    if scale == 0:
        return rho
    a = rng.normal(size=(rho.dim, rho.dim)) + 1j * rng.normal(size=(rho.dim, rho.dim))
    sigma = a @ a.conj().T
    sigma = sigma / np.trace(sigma).real
    return DensityMatrix(rho.dim, (1.0 - scale) * rho.entries + scale * sigma)


def distillation_duration_s(plan: distill.DistillationPlan, p: HeisenbergParams) -> float:
    """Wall-clock length of the compiled tag sequence (rotations are free)."""
    return pulsec.program_duration(pulsec.compile_controlled_u(plan.tau, p))


def noisy_final_states(trial: StateVector, p: HeisenbergParams, cfg: NoiseConfig,
                       n_iterations: int = 5, grid: SampleGrid | None = None,
                       exact_energies: bool = False,
                       ) -> tuple[DensityMatrix, DensityMatrix, float]:
    """Tagged 8-dim state, probe-0 projection, and outcome probability under noise.

    The digit refinement and the tag evolution share the jittered clock, the
    dephasing channel acts once per qubit with the compiled tag-sequence
    duration, and an optional perturbation blurs the reconstructed projection.
    """
    rng = np.random.default_rng(cfg.seed)
    jittered = jitter_J(p, cfg, rng)
    time_scale = jittered.J / p.J

    if exact_energies:
        plan = distill.plan_from_spectrum(diagonalize(p))
    else:
        plan = distill.measure_plan(trial, p, n_iterations, grid, time_scale=time_scale)

    staged = distill.pre_rotation_state(trial, p, plan, time_scale)
    rho = staged.density()
    duration = distillation_duration_s(plan, p)
    for index, qubit in enumerate(("a", "b", "c")):
        rho = dephase(rho, index, duration, cfg.t2_s.get(qubit, math.inf))

    rot = np.kron(np.eye(4), expm_hermitian(OperatorMatrix.hermitian(SPIN_Y), -np.pi / 2).entries)
    rho = DensityMatrix(8, rot @ rho.entries @ rot.conj().T)
    projected, prob = distill.project_probe(rho, 0)
    projected = perturb_tomography(projected, cfg.tomo_scale, rng)
    return rho, projected, prob


def noisy_pipeline(trial: StateVector, p: HeisenbergParams, cfg: NoiseConfig,
                   n_iterations: int = 5, grid: SampleGrid | None = None,
                   exact_energies: bool = False) -> tomo.StateReport:
    """Distillation under jitter and dephasing; metrics of the probe-0 projection."""
    _, projected, _ = noisy_final_states(trial, p, cfg, n_iterations, grid, exact_energies)
    return tomo.state_report(projected, diagonalize(p))
