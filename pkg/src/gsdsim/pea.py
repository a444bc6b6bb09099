"""Single-probe phase estimation: evolve, record the probe coherence, Fourier-transform.

Sign convention: the controlled evolution acts on the |1> branch of the probe,
so an eigencomponent at energy E contributes e^{-iEt} there and the recorded
off-diagonal <0|rho_probe|1> carries e^{+iEt}.  Energies on the spectrum axis
are quoted as phase fractions, i.e. in units of 2*pi*J.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .qcore import DensityMatrix, OperatorMatrix, StateVector, expm_hermitian, partial_trace, tensor_product

PROBE_MAG_TOL = 1e-10
_SQRT2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class ProbeRecord:
    """Probe coherence <0|rho_probe|1> sampled at time t (1/J units)."""

    t: float
    m: complex

    def __post_init__(self):
        if abs(self.m) > 0.5 + PROBE_MAG_TOL:
            raise ValueError(f"|m| = {abs(self.m)!r} exceeds the 1/2 prefactor bound")


@dataclass(frozen=True)
class SpectralPeak:
    energy: float       # phase-fraction units (2*pi*J)
    weight: float       # recovered |a_k|^2
    uncertainty: float  # half a grid step, phase-fraction units

    def __post_init__(self):
        if self.weight < -1e-12 or self.weight > 1.05 + 1e-12:
            raise ValueError(f"peak weight {self.weight!r} outside [0, 1.05]")


@dataclass(frozen=True)
class SpectrumEstimate:
    """DFT of probe records: full grid plus detected peaks."""

    energies: np.ndarray          # phase-fraction units, ascending
    amplitudes: np.ndarray        # complex g(E), same order
    peaks: tuple[SpectralPeak, ...]

    def __post_init__(self):
        total = sum(p.weight for p in self.peaks)
        if total > 1.05 + 1e-12:
            raise ValueError(f"sum of peak weights {total!r} exceeds 1.05")
        for name in ("energies", "amplitudes"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def grid_spacing(self) -> float:
        return float(self.energies[1] - self.energies[0])


def probe_plus_state() -> StateVector:
    return StateVector(1, np.array([1.0, 1.0], dtype=complex) / _SQRT2)


def controlled_unitary(u: OperatorMatrix) -> OperatorMatrix:
    """Apply u to the system when the probe (least significant qubit) is |1>."""
    dim = 2 * u.dim
    cu = np.zeros((dim, dim), dtype=complex)
    cu[0::2, 0::2] = np.eye(u.dim)
    cu[1::2, 1::2] = u.entries
    return OperatorMatrix(dim, cu, "unitary")


def evolve_probe(system: StateVector, hamiltonian: OperatorMatrix, t: float) -> ProbeRecord:
    """Attach a |+> probe, run controlled-e^{-iHt}, trace out the system."""
    if system.n_qubits != 2 or hamiltonian.dim != 4:
        raise ValueError("evolve_probe expects a 2-qubit system and a 4x4 Hamiltonian")
    state = tensor_product(system, probe_plus_state())
    cu = controlled_unitary(expm_hermitian(hamiltonian, t))
    evolved = StateVector(3, cu.entries @ state.amplitudes)
    rho_probe = partial_trace(evolved.density(), keep={2})
    return ProbeRecord(t, complex(rho_probe.entries[0, 1]))


def nyquist_bound(hamiltonian: OperatorMatrix) -> float:
    """Largest eigenvalue magnitude; dt must keep max|E|*dt below pi."""
    return float(np.max(np.abs(np.linalg.eigvalsh(hamiltonian.entries))))


def sample_series(system: StateVector, hamiltonian: OperatorMatrix, dt: float, n: int = 128) -> list[ProbeRecord]:
    """Probe records at t = 0, dt, ..., (n-1) dt."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if n < 2:
        raise ValueError("need at least 2 samples")
    emax = nyquist_bound(hamiltonian)
    if emax * dt >= np.pi:
        raise ValueError(
            f"Nyquist violation: max|E|*dt = {emax * dt:.6g} >= pi "
            f"(max|E| = {emax:.6g}, dt = {dt:.6g}, limit dt < {np.pi / emax:.6g})"
        )
    return [evolve_probe(system, hamiltonian, k * dt) for k in range(n)]


def _detect_peaks(energies: np.ndarray, mags: np.ndarray, half_step: float,
                  rel_threshold: float) -> tuple[SpectralPeak, ...]:
    # Strict circular local maxima; the threshold suppresses leakage shoulders.
    n = len(mags)
    top = mags.max()
    if top <= 0:
        return ()
    peaks = []
    for i in range(n):
        if mags[i] >= rel_threshold * top and mags[i] > mags[(i - 1) % n] and mags[i] > mags[(i + 1) % n]:
            peaks.append(SpectralPeak(float(energies[i]), float(2 * mags[i]), half_step))
    peaks.sort(key=lambda p: p.energy)
    return tuple(peaks)


def spectrum_from_values(values: np.ndarray, dt: float, coupling: float = 1.0,
                         one_sided: bool = False, rel_threshold: float = 0.1) -> SpectrumEstimate:
    """DFT g(E_j) = (1/n) sum_m x_m e^{-i E_j t_m} on the canonical grid.

    Signed grids map bins into (-pi/dt, pi/dt]; one-sided grids keep [0, 2pi/dt),
    which is how aliased residual spectra are read during digit refinement.
    """
    x = np.asarray(values, dtype=complex)
    n = x.size
    g = np.fft.fft(x) / n
    k = np.arange(n)
    if not one_sided:
        k = np.where(k <= n // 2, k, k - n)
        order = np.argsort(k, kind="stable")
        k = k[order]
        g = g[order]
    energies = k / (n * dt * coupling)  # phase-fraction units
    half_step = 1.0 / (2 * n * dt * coupling)
    peaks = _detect_peaks(energies, np.abs(g), half_step, rel_threshold)
    return SpectrumEstimate(energies, g, peaks)


def compute_spectrum(records, coupling: float = 1.0, rel_threshold: float = 0.1) -> SpectrumEstimate:
    """Spectrum of uniformly spaced probe records, energies in 2*pi*J units."""
    recs = list(records)
    if len(recs) < 2:
        raise ValueError("need at least 2 records")
    times = np.array([r.t for r in recs])
    steps = np.diff(times)
    dt = steps[0]
    if dt <= 0 or np.max(np.abs(steps - dt)) > 1e-9 * max(dt, 1.0):
        raise ValueError("records are not uniformly spaced")
    values = np.array([r.m for r in recs])
    return spectrum_from_values(values, float(dt), coupling)


def peak_uncertainty(spectrum: SpectrumEstimate) -> float:
    """Relative line-position uncertainty of the lowest-energy peak.

    Half of one angular-frequency bin, pi/(n*dt), taken relative to the peak
    position on the phase-fraction axis.  Positions are quoted as fractions of
    2*pi*J while the instrumental bin is an angular frequency, so the ratio
    deliberately carries a factor 2*pi over a naive bin/position quotient.
    """
    if not spectrum.peaks:
        raise ValueError("spectrum has no peaks")
    ground = min(spectrum.peaks, key=lambda p: p.energy)
    if ground.energy == 0:
        raise ValueError("ground peak sits at zero energy; relative uncertainty undefined")
    half_bin_angular = np.pi * spectrum.grid_spacing  # = pi/(n*dt*J)
    return float(half_bin_angular / abs(ground.energy))


def spectrum_csv(spectrum: SpectrumEstimate) -> str:
    lines = ["energy_2piJ,re_g,im_g,abs_g"]
    for e, g in zip(spectrum.energies, spectrum.amplitudes):
        lines.append(f"{e!r},{g.real!r},{g.imag!r},{abs(g)!r}")
    return "\n".join(lines) + "\n"


def peaks_json(spectrum: SpectrumEstimate) -> str:
    payload = [
        {"energy_2piJ": p.energy, "weight": p.weight, "uncertainty": p.uncertainty}
        for p in spectrum.peaks
    ]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
