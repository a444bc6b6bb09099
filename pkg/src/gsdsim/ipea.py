"""Digit-by-digit eigenvalue refinement with symmetry-based time wrapping.

Eigenvalues are written as signed decimal phase fractions v = +/- 0.x1 x2 x3...
in units of 2*pi*J.  Each refinement round scales every evolution time by a
further factor of ten, subtracts the phase already pinned down by the accepted
digits, and reads the next digit off the residual spectrum.  Long evolutions
stay affordable because each commuting Hamiltonian term has a symmetric,
bounded spectrum, so its propagator is periodic: a time t can be replaced by
t mod (8*pi/J) per exchange term without changing the unitary at all.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import HeisenbergParams, build_hamiltonian
from .pea import SpectrumEstimate, spectrum_from_values
from .qcore import SPIN_X, SPIN_Y, SPIN_Z, IDENTITY_2, OperatorMatrix, StateVector

TERM_XX = "XX"
TERM_YY_ZZ = "YY_ZZ"
TERM_LOCAL_Z = "LOCAL_Z"

_SQRT2 = float(np.sqrt(2.0))

# Term generators at unit coupling; eigenbases fixed once, scaled phases per call.
_G_XX = np.kron(SPIN_X, SPIN_X)
_G_YYZZ = np.kron(SPIN_Y, SPIN_Y) + np.kron(SPIN_Z, SPIN_Z)
_G_Z_DIAG = np.array([1.0, 0.0, 0.0, -1.0])  # Iz x 1 + 1 x Iz is diagonal
_W_XX, _V_XX = np.linalg.eigh(_G_XX)
_W_YYZZ, _V_YYZZ = np.linalg.eigh(_G_YYZZ)

_DIGIT_TIE_EPS = 1e-12


@dataclass(frozen=True)
class DigitString:
    """Signed base-10 phase fraction, one digit per completed iteration."""

    sign: int
    digits: tuple[int, ...] = ()

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        digits = tuple(int(d) for d in self.digits)
        if any(d < 0 or d > 9 for d in digits):
            raise ValueError(f"digits must lie in 0..9, got {digits}")
        object.__setattr__(self, "digits", digits)
        if abs(self.value) >= 0.5:
            raise ValueError(f"value {self.value!r} breaks the |v| < 1/2 alias bound")

    @property
    def value(self) -> float:
        """Signed phase fraction in 2*pi*J units."""
        return self.sign * sum(d * 10.0 ** -(i + 1) for i, d in enumerate(self.digits))

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def uncertainty(self) -> float:
        return 10.0 ** -len(self.digits)

    def energy(self, coupling: float) -> float:
        """Back to plain energy units: v * 2*pi*J."""
        return self.value * 2 * np.pi * coupling

    def with_digit(self, digit: int) -> "DigitString":
        return DigitString(self.sign, self.digits + (int(digit),))

    def shifted_last(self, delta: int) -> "DigitString":
        """Add delta (+1 or -1) to the last digit with decimal borrow/carry."""
        digits = list(self.digits)
        i = len(digits) - 1
        if delta == -1:
            while i >= 0 and digits[i] == 0:
                digits[i] = 9
                i -= 1
            if i < 0:
                raise RuntimeError("digit rollback underflow: prefix is all zeros")
            digits[i] -= 1
        elif delta == +1:
            while i >= 0 and digits[i] == 9:
                digits[i] = 0
                i -= 1
            if i < 0:
                raise RuntimeError("digit carry overflow")
            digits[i] += 1
        else:
            raise ValueError("delta must be +1 or -1")
        return DigitString(self.sign, tuple(digits))


@dataclass(frozen=True)
class IterationReport:
    iteration: int
    scale: int
    spectrum: SpectrumEstimate
    digit: int
    value: float
    corrected: bool
    residual_reading: float
    digits_after: tuple[int, ...]


@dataclass(frozen=True)
class SampleGrid:
    points: int = 128
    dt: float | None = None  # defaults to 0.8/J at use

    def resolve(self, p: HeisenbergParams) -> tuple[int, float]:
        dt = self.dt if self.dt is not None else 0.8 / p.J
        if dt <= 0 or self.points < 2:
            raise ValueError("sample grid needs dt > 0 and at least 2 points")
        return self.points, dt


@dataclass
class IpeaThread:
    digits: DigitString
    reports: list[IterationReport] = field(default_factory=list)

    @property
    def refined_value(self) -> float:
        """Signed estimate keeping the final residual reading beyond its digit.

        The last round reads r_n = 10^(n-1) (|v| - prefix), so adding the full
        reading back recovers about one decimal more than the digit string.
        """
        if not self.reports:
            return self.digits.value
        last = self.reports[-1]
        prefix_mag = sum(d * 10.0 ** -(i + 1) for i, d in enumerate(last.digits_after[:-1]))
        return self.digits.sign * (prefix_mag + last.residual_reading / last.scale)


def wrap_time(t: float, term: str, p: HeisenbergParams) -> float:
    """Shorter time tau with e^{-i term tau} = e^{-i term t} exactly.

    Exchange terms have eigenvalues in {0, +-J/4, +-J/2}, so 8*pi/J is a common
    period; the local-field term reduces through its rotation angle h*t mod 2*pi.
    """
    if t < 0:
        raise ValueError("wrap_time requires t >= 0")
    if term in (TERM_XX, TERM_YY_ZZ):
        period = 8 * np.pi / p.J
        return float(np.mod(t, period))
    if term == TERM_LOCAL_Z:
        if p.h == 0:
            return float(t)
        return float(np.mod(p.h * t, 2 * np.pi) / p.h)
    raise ValueError(f"unknown term {term!r}")


def wrapped_unitary(p: HeisenbergParams, t: float) -> np.ndarray:
    """Product of per-term propagators at their wrapped times; equals e^{-iHt}."""
    tau_x = wrap_time(t, TERM_XX, p)
    tau_yz = wrap_time(t, TERM_YY_ZZ, p)
    tau_z = wrap_time(t, TERM_LOCAL_Z, p)
    ux = (_V_XX * np.exp(-1j * p.J * _W_XX * tau_x)) @ _V_XX.conj().T
    uyz = (_V_YYZZ * np.exp(-1j * p.J * _W_YYZZ * tau_yz)) @ _V_YYZZ.conj().T
    uz = np.exp(-1j * p.h * _G_Z_DIAG * tau_z)
    return (ux @ uyz) * uz[None, :]


def evolve_wrapped(system: StateVector, p: HeisenbergParams, t: float) -> StateVector:
    """Evolve a 2-qubit state through the wrapped term factorization."""
    if system.n_qubits != 2:
        raise ValueError("evolve_wrapped expects a 2-qubit state")
    return StateVector(2, wrapped_unitary(p, t) @ system.amplitudes)


def controlled_wrapped_unitary(p: HeisenbergParams, t: float, time_scale: float = 1.0) -> OperatorMatrix:
    """Controlled wrapped evolution on system+probe; fires on the probe |1> branch.

    time_scale stretches the executed duration, modeling a coupling-calibration
    offset: every commanded interval runs on the same miscalibrated clock.
    """
    u = wrapped_unitary(p, t * time_scale)
    cu = np.zeros((8, 8), dtype=complex)
    cu[0::2, 0::2] = np.eye(4)
    cu[1::2, 1::2] = u
    return OperatorMatrix(8, cu, "unitary")


def probe_records(system: StateVector, p: HeisenbergParams, times, time_scale: float = 1.0) -> np.ndarray:
    """<0|rho_probe|1> for a |+> probe after controlled wrapped evolution, per time."""
    amps = system.amplitudes
    col0 = amps / _SQRT2
    out = np.empty(len(times), dtype=complex)
    for i, t in enumerate(times):
        u = wrapped_unitary(p, float(t) * time_scale)
        col1 = (u @ amps) / _SQRT2
        out[i] = np.vdot(col1, col0)  # sum_s psi_{s0} conj(psi_{s1})
    return out


def phase_error_bound(n_wraps: int, delta_j_rel: float) -> float:
    """Accumulated phase-angle error 8*n*pi*(dJ/J) after n full-period wraps."""
    if n_wraps < 0:
        raise ValueError("n_wraps must be non-negative")
    return 8.0 * n_wraps * np.pi * delta_j_rel


def _digit_from_residual(r: float) -> int:
    # Boundary ties (within 1e-12 of an integer) resolve downward; the next
    # round's out-of-window check repairs a digit resolved one too low.
    x = 10.0 * r
    d = math.floor(x)
    if abs(x - round(x)) < _DIGIT_TIE_EPS and round(x) > 0:
        d = int(round(x)) - 1
    return max(0, min(9, d))


def _circular_distance(a: float, b: float, width: float) -> float:
    d = abs(a - b) % width
    return min(d, width - d)


def _pick_peak(spectrum: SpectrumEstimate, expected: float | None, width: float):
    if not spectrum.peaks:
        raise RuntimeError("residual spectrum shows no peak")
    if expected is None:
        return max(spectrum.peaks, key=lambda p: p.weight)
    return min(spectrum.peaks, key=lambda p: _circular_distance(p.energy, expected, width))


def next_digit(prefix: DigitString, system: StateVector, p: HeisenbergParams,
               grid: SampleGrid | None = None, expected: float | None = None,
               time_scale: float = 1.0) -> tuple[int, IterationReport]:
    """One refinement round: read digit number len(prefix)+1 of the eigenvalue.

    All evolution times are scaled by 10^(n-1); the phase already fixed by the
    prefix, 2*pi * 10^(n-1) * prefix_value * J * t, is divided out of the
    records in software before the residual transform.  The residual peak is
    read on the one-sided window [0, 1/(J*dt)): a legitimate next digit lies in
    [0, 1), while a reading at or beyond 1 flags a mis-accepted previous digit,
    which is shifted by one and the round recomputed.
    """
    grid = grid or SampleGrid()
    npts, dt = grid.resolve(p)
    n = len(prefix.digits) + 1
    scale = 10 ** (n - 1)
    base_times = np.arange(npts) * dt
    width = 1.0 / (p.J * dt)

    if n == 1:
        records = probe_records(system, p, base_times, time_scale)
        spectrum = spectrum_from_values(records, dt, p.J, one_sided=False)
        same_sign = [pk for pk in spectrum.peaks if (1 if pk.energy >= 0 else -1) == prefix.sign]
        if not same_sign:
            raise RuntimeError("no spectral peak in the requested sign half-plane")
        if expected is None:
            peak = max(same_sign, key=lambda pk: pk.weight)
        else:
            peak = min(same_sign, key=lambda pk: abs(abs(pk.energy) - expected))
        reading = abs(peak.energy)
        digit = _digit_from_residual(reading)
        report = IterationReport(
            iteration=1, scale=1, spectrum=spectrum, digit=digit,
            value=prefix.with_digit(digit).value, corrected=False,
            residual_reading=reading, digits_after=prefix.with_digit(digit).digits,
        )
        return digit, report

    records = probe_records(system, p, scale * base_times, time_scale)

    def residual_spectrum(pref: DigitString) -> SpectrumEstimate:
        known = np.exp(-1j * pref.sign * 2 * np.pi * p.J * pref.magnitude * scale * base_times)
        z = records * known
        if pref.sign < 0:
            z = z.conj()  # mirror so the residual lands at positive frequency
        return spectrum_from_values(z, dt, p.J, one_sided=True)

    spectrum = residual_spectrum(prefix)
    peak = _pick_peak(spectrum, expected, width)
    reading = peak.energy
    corrected = False
    if reading >= 1.0:
        # Out-of-window residual: the previous digit was mis-read.  Readings
        # aliased near the top of the window come from a small negative
        # residual (digit one too high, shift down); readings just above 1
        # come from a boundary resolved one too low (shift up).
        delta = -1 if reading >= (1.0 + width) / 2 else +1
        prefix = prefix.shifted_last(delta)
        corrected = True
        spectrum = residual_spectrum(prefix)
        expected_after = None if expected is None else (expected - delta) % width
        peak = _pick_peak(spectrum, expected_after, width)
        reading = peak.energy
        if reading >= 1.0:
            raise RuntimeError("residual still outside [0, 1) after one digit correction")

    digit = _digit_from_residual(reading)
    result = prefix.with_digit(digit)
    report = IterationReport(
        iteration=n, scale=scale, spectrum=spectrum, digit=digit,
        value=result.value, corrected=corrected,
        residual_reading=reading, digits_after=result.digits,
    )
    return digit, report


def run_ipea_detailed(system: StateVector, p: HeisenbergParams, n_iterations: int = 5,
                      grid: SampleGrid | None = None, min_weight: float = 0.05,
                      time_scale: float = 1.0, rel_threshold: float = 0.1) -> list[IpeaThread]:
    """Full refinement for every captured eigenvalue, with per-round reports."""
    if n_iterations < 1:
        raise ValueError("need at least one iteration")
    grid = grid or SampleGrid()
    npts, dt = grid.resolve(p)
    emax = float(np.max(np.abs(np.linalg.eigvalsh(build_hamiltonian(p).entries))))
    if emax * dt >= np.pi:
        raise ValueError(
            f"Nyquist violation: max|E|*dt = {emax * dt:.6g} >= pi (dt limit {np.pi / emax:.6g})"
        )

    base_times = np.arange(npts) * dt
    coarse = spectrum_from_values(
        probe_records(system, p, base_times, time_scale), dt, p.J,
        one_sided=False, rel_threshold=rel_threshold,
    )
    if not coarse.peaks:
        raise RuntimeError("coarse spectrum shows no usable peak")

    threads: list[IpeaThread] = []
    for peak in coarse.peaks:
        if peak.weight < min_weight:
            warnings.warn(
                f"skipping eigenvalue near {peak.energy:+.4f} (2piJ units): "
                f"weight {peak.weight:.3f} below {min_weight}",
                stacklevel=2,
            )
            continue
        sign = 1 if peak.energy >= 0 else -1
        prefix = DigitString(sign)
        reports: list[IterationReport] = []
        reading = abs(peak.energy)
        for n in range(1, n_iterations + 1):
            expected = reading if n == 1 else (10 * reading - reports[-1].digit)
            digit, report = next_digit(prefix, system, p, grid, expected, time_scale)
            prefix = DigitString(sign, report.digits_after)
            reading = report.residual_reading
            reports.append(report)
        threads.append(IpeaThread(prefix, reports))
    threads.sort(key=lambda th: th.digits.value)
    return threads


def run_ipea(system: StateVector, p: HeisenbergParams, n_iterations: int = 5,
             grid: SampleGrid | None = None, min_weight: float = 0.05,
             time_scale: float = 1.0) -> list[DigitString]:
    """Digit strings for every captured eigenvalue, sorted by energy."""
    return [
        th.digits
        for th in run_ipea_detailed(system, p, n_iterations, grid, min_weight, time_scale)
    ]
