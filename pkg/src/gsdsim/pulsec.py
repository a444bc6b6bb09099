"""Compile circuit blocks to NMR pulse primitives and verify them against exact unitaries.

Primitives are single-spin rotations R_alpha^j(theta) = e^{-i theta I_alpha^j}
(idealized as instantaneous) and scalar-coupling evolutions
U^{jk}(theta) = e^{-i theta I_z^j I_z^k}, whose duration theta/(2 pi J_jk) is
what the program duration accounts.  Qubits are labeled a, b (system) and c
(probe), matching bit positions 0, 1, 2.

Angles are canonicalized to (-2*pi, 2*pi].  For a coupling step a 4*pi shift
flips the sign of its propagator; since every contract here is stated up to
global phase, canonicalization is safe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import HeisenbergParams
from .qcore import (
    IDENTITY_2,
    SIGMA_X,
    SIGMA_Y,
    SPIN_X,
    SPIN_Y,
    SPIN_Z,
    OperatorMatrix,
)

QUBITS = ("a", "b", "c")
PAIRS = ("ab", "bc", "ac")
AXES = ("x", "y", "z")
_QUBIT_INDEX = {q: i for i, q in enumerate(QUBITS)}
_AXIS_OP = {"x": SPIN_X, "y": SPIN_Y, "z": SPIN_Z}

# Scalar couplings of the three-spin register, Hz.
DEFAULT_COUPLINGS_HZ = {"ab": 160.7, "bc": -194.4, "ac": 47.6}

# Exact state-prep angles; the conditional-rotation ZZ angle is twice the
# trailing rotation angle arcsin(1/sqrt(3)) ~ 0.19591*pi.
PREP_ROT_ANGLE = math.asin(1.0 / math.sqrt(3.0))
PREP_ZZ_ANGLE = 2.0 * PREP_ROT_ANGLE


def _canonical_angle(angle: float) -> float:
    a = math.fmod(float(angle), 4.0 * math.pi)
    if a <= -2.0 * math.pi:
        a += 4.0 * math.pi
    elif a > 2.0 * math.pi:
        a -= 4.0 * math.pi
    return a


@dataclass(frozen=True)
class Rot:
    qubit: str
    axis: str
    angle: float

    def __post_init__(self):
        if self.qubit not in QUBITS:
            raise ValueError(f"unknown qubit {self.qubit!r}")
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        object.__setattr__(self, "angle", _canonical_angle(self.angle))


@dataclass(frozen=True)
class ZZ:
    pair: str
    angle: float

    def __post_init__(self):
        if self.pair not in PAIRS:
            raise ValueError(f"unknown pair {self.pair!r}")
        object.__setattr__(self, "angle", _canonical_angle(self.angle))


PulsePrimitive = Rot | ZZ


@dataclass(frozen=True)
class PulseProgram:
    """Time-ordered primitive list plus the couplings that set ZZ durations."""

    steps: tuple[PulsePrimitive, ...]
    couplings_hz: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_COUPLINGS_HZ))

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __add__(self, other: "PulseProgram") -> "PulseProgram":
        if self.couplings_hz != other.couplings_hz:
            raise ValueError("cannot concatenate programs with different couplings")
        return PulseProgram(self.steps + other.steps, dict(self.couplings_hz))

    @property
    def duration_s(self) -> float:
        return program_duration(self)


def _embed(op2: np.ndarray, qubit: str) -> np.ndarray:
    mats = [IDENTITY_2, IDENTITY_2, IDENTITY_2]
    mats[_QUBIT_INDEX[qubit]] = op2
    return np.kron(np.kron(mats[0], mats[1]), mats[2])


def _rotation_unitary(step: Rot) -> np.ndarray:
    gen = _AXIS_OP[step.axis]
    w, v = np.linalg.eigh(gen)
    u2 = (v * np.exp(-1j * w * step.angle)) @ v.conj().T
    return _embed(u2, step.qubit)


def _zz_unitary(step: ZZ) -> np.ndarray:
    i, j = _QUBIT_INDEX[step.pair[0]], _QUBIT_INDEX[step.pair[1]]
    idx = np.arange(8)
    zi = 1.0 - 2.0 * ((idx >> (2 - i)) & 1)
    zj = 1.0 - 2.0 * ((idx >> (2 - j)) & 1)
    return np.diag(np.exp(-1j * step.angle * zi * zj / 4.0))


def program_unitary(prog: PulseProgram) -> OperatorMatrix:
    """Time-ordered product of the primitive propagators on the 3-qubit space."""
    u = np.eye(8, dtype=complex)
    for step in prog.steps:
        if isinstance(step, Rot):
            u = _rotation_unitary(step) @ u
        elif isinstance(step, ZZ):
            u = _zz_unitary(step) @ u
        else:
            raise ValueError(f"unknown primitive {step!r}")
    return OperatorMatrix(8, u, "unitary")


def program_duration(prog: PulseProgram, rotation_cost_s: float = 0.0) -> float:
    """Sum of |angle|/(2 pi |J_pair|) over coupling steps, in seconds."""
    total = 0.0
    for step in prog.steps:
        if isinstance(step, ZZ):
            j = prog.couplings_hz.get(step.pair, 0.0)
            if j == 0.0:
                raise ValueError(f"pair {step.pair!r} has no coupling; cannot evolve")
            total += abs(step.angle) / (2.0 * math.pi * abs(j))
        else:
            total += rotation_cost_s
    return total


def compile_state_prep() -> PulseProgram:
    """Probe pseudo-Hadamard plus the six-pulse preparation of the optimized trial state."""
    return PulseProgram(
        (
            Rot("c", "y", math.pi / 2),
            Rot("a", "y", math.pi),
            Rot("b", "y", 2 * math.pi / 3),
            Rot("a", "x", -math.pi / 2),
            ZZ("ab", PREP_ZZ_ANGLE),
            Rot("a", "x", math.pi / 2),
            Rot("a", "y", PREP_ROT_ANGLE),
        )
    )


def _controlled_pauli(axis: str) -> tuple[PulsePrimitive, ...]:
    """Apply sigma_axis to qubit b when the probe is |0> (up to global phase).

    The coupling evolution also phases the probe; the trailing z-rotation of
    the probe is the frame correction that makes the block an exact
    controlled-Pauli rather than one with a residual branch phase.
    """
    if axis == "x":
        return (
            Rot("b", "y", -math.pi / 2),
            ZZ("bc", math.pi),
            Rot("b", "y", math.pi / 2),
            Rot("b", "x", math.pi / 2),
            Rot("c", "z", -math.pi / 2),
        )
    if axis == "y":
        return (
            Rot("b", "x", math.pi / 2),
            ZZ("bc", math.pi),
            Rot("b", "x", -math.pi / 2),
            Rot("b", "y", math.pi / 2),
            Rot("c", "z", -math.pi / 2),
        )
    raise ValueError(f"no controlled-Pauli lowering for axis {axis!r}")


def _half_evolution(term: str, theta: float) -> tuple[PulsePrimitive, ...]:
    """Uncontrolled V(t/2) block; theta = J*t/2 is the coupling angle."""
    if term == "XX":
        return (
            Rot("a", "y", -math.pi / 2),
            Rot("b", "y", -math.pi / 2),
            ZZ("ab", theta),
            Rot("a", "y", math.pi / 2),
            Rot("b", "y", math.pi / 2),
        )
    if term == "YZ":
        return (
            Rot("a", "x", math.pi / 2),
            Rot("b", "x", math.pi / 2),
            ZZ("ab", theta),
            Rot("a", "x", -math.pi / 2),
            Rot("b", "x", -math.pi / 2),
            ZZ("ab", theta),
        )
    raise ValueError(f"unknown evolution term {term!r}")


def compile_controlled_v(term: str, t: float, coupling: float = 1.0) -> PulseProgram:
    """Controlled exchange evolution for a pre-wrapped time t >= 0.

    The conjugating controlled-Pauli (active on the probe |0> state) flips the
    sign of the generator between the two half evolutions: the |0> branch sees
    V(t/2) V(-t/2) = 1 while the |1> branch runs V(t/2) twice, i.e. V(t).
    """
    if t < 0:
        raise ValueError("evolution time must be non-negative (wrap it first)")
    if term == "XX":
        cw = _controlled_pauli("y")
        half = _half_evolution("XX", coupling * t / 2.0)
    elif term == "YZ":
        cw = _controlled_pauli("x")
        half = _half_evolution("YZ", coupling * t / 2.0)
    else:
        raise ValueError(f"unknown controlled-evolution term {term!r}")
    return PulseProgram(cw + half + cw + half)


def compile_local_field(t: float, p: HeisenbergParams) -> PulseProgram:
    """Two z-rotations implementing the uncontrolled field term e^{-i h (Iz+Iz) t}."""
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    angle = math.fmod(p.h * t, 2 * math.pi)
    return PulseProgram((Rot("a", "z", angle), Rot("b", "z", angle)))


def compile_controlled_local_field(t: float, p: HeisenbergParams) -> PulseProgram:
    """Field term applied only on the probe |1> branch.

    A z-rotation controlled through the probe splits into half the rotation
    plus a probe-system coupling evolution of the opposite angle.
    """
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    angle = p.h * t
    return PulseProgram(
        (
            Rot("a", "z", angle / 2),
            ZZ("ac", -angle),
            Rot("b", "z", angle / 2),
            ZZ("bc", -angle),
        )
    )


def compile_controlled_u(t: float, p: HeisenbergParams) -> PulseProgram:
    """Full controlled evolution e^{-iHt} on the probe |1> branch, wrapped per term."""
    from .ipea import TERM_LOCAL_Z, TERM_XX, TERM_YY_ZZ, wrap_time  # avoid import cycle

    t_x = wrap_time(t, TERM_XX, p)
    t_yz = wrap_time(t, TERM_YY_ZZ, p)
    t_z = wrap_time(t, TERM_LOCAL_Z, p)
    program = compile_controlled_local_field(t_z, p)
    program = program + compile_controlled_v("YZ", t_yz, p.J)
    program = program + compile_controlled_v("XX", t_x, p.J)
    return program


def verify_equivalence(u1: OperatorMatrix, u2: OperatorMatrix,
                       tol: float = 1e-8) -> tuple[bool, float]:
    """Equality up to global phase: strip the phase of u1^dag u2, compare to identity."""
    for u in (u1, u2):
        dev = np.max(np.abs(u.entries.conj().T @ u.entries - np.eye(u.dim)))
        if dev > 1e-8:
            raise ValueError(f"verify_equivalence requires unitary inputs (deviation {dev:.3e})")
    if u1.dim != u2.dim:
        raise ValueError("dimension mismatch")
    d = u1.entries.conj().T @ u2.entries
    flat = d.flatten()
    phase = flat[np.argmax(np.abs(flat))]
    phase = phase / abs(phase)
    deviation = float(np.max(np.abs(d - phase * np.eye(u1.dim))))
    return deviation < tol, deviation


def emit(prog: PulseProgram) -> str:
    """Plain-text program, one primitive per line, couplings and duration up front."""
    pairs = " ".join(f"{pair}={prog.couplings_hz[pair]!r}" for pair in PAIRS if pair in prog.couplings_hz)
    lines = [f"# couplings_hz {pairs}", f"# duration_s {prog.duration_s!r}"]
    for step in prog.steps:
        if isinstance(step, Rot):
            lines.append(f"ROT q={step.qubit} axis={step.axis} angle={step.angle!r}")
        else:
            lines.append(f"ZZ pair={step.pair} angle={step.angle!r}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> PulseProgram:
    """Inverse of emit; the duration header is recomputed, not trusted."""
    steps: list[PulsePrimitive] = []
    couplings = dict(DEFAULT_COUPLINGS_HZ)
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = line[1:].split()
            if fields and fields[0] == "couplings_hz":
                couplings = {}
                for item in fields[1:]:
                    pair, value = item.split("=")
                    if pair not in PAIRS:
                        raise ValueError(f"unknown pair {pair!r} in couplings header")
                    couplings[pair] = float(value)
            continue
        fields = dict(item.split("=") for item in line.split()[1:])
        kind = line.split()[0]
        if kind == "ROT":
            steps.append(Rot(fields["q"], fields["axis"], float(fields["angle"])))
        elif kind == "ZZ":
            steps.append(ZZ(fields["pair"], float(fields["angle"])))
        else:
            raise ValueError(f"unknown primitive line: {raw!r}")
    return PulseProgram(tuple(steps), couplings)
