"""Spin-level model of the three-spin molecule and a pulse-level engine.

The built-in parameter set describes trichloroethylene (TCE): one hydrogen
and two carbon-13 nuclei, with measured Larmor frequencies, J couplings and
relaxation times.  Gates are compiled to rotating-frame schedules of x/y rf
rotations plus free evolution under the weak-coupling (sigma_z.sigma_z)
Hamiltonian; z rotations never appear explicitly because in the rotating
frame they are realized by x/y conjugation.  Refocusing is modeled
declaratively: a free-evolution interval lists the couplings that are
active, and everything else contributes nothing.

The order of ``MoleculeModel.spins`` defines the qubit register: spin i is
qubit i.  For TCE that order is (C2, C1, H), matching the circuit roles
(data, ancilla, target).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .channels import RelaxationParams, apply_channel, relaxation_channel
from .circuits import Circuit, GateEvent
from .errors import UnsupportedGateError
from .qstate import (
    CNOT,
    DensityMatrix,
    enforce_hermitian,
    lift_operator,
    rotation_x,
    rotation_y,
    tensor_product,
)

_ANGLE_EPS = 1e-12
_MATCH_TOL = 1e-9

# Control = first qubit of the pair (matches qstate.CNOT); the reversed form
# has the control on the second qubit.
_CNOT_REVERSED = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)


@dataclass(frozen=True)
class SpinParams:
    """One nuclear spin: Larmor frequency (Hz) and relaxation times (s)."""

    name: str
    larmor_hz: float
    t1: float
    t2: float

    def __post_init__(self):
        if not self.name:
            raise ValueError("spin needs a name")
        if not self.larmor_hz > 0.0:
            raise ValueError(f"Larmor frequency must be positive, got {self.larmor_hz}")
        self.relaxation()  # validates t1/t2

    def relaxation(self) -> RelaxationParams:
        return RelaxationParams(self.t1, self.t2)


def _pair(a: str, b: str) -> tuple[str, str]:
    if a == b:
        raise ValueError(f"spin {a!r} cannot couple to itself")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True, eq=False)
class MoleculeModel:
    """Named spins, pairwise J couplings, and which couplings are active.

    Couplings absent from ``active_couplings`` are treated as refocused
    away; they never contribute to free evolution.
    """

    spins: tuple[SpinParams, ...]
    j_couplings: Mapping[tuple[str, str], float]
    active_couplings: frozenset[tuple[str, str]]

    def __post_init__(self):
        names = [s.name for s in self.spins]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate spin names in {names}")
        couplings = {}
        for (a, b), j in dict(self.j_couplings).items():
            if a not in names or b not in names:
                raise ValueError(f"coupling ({a}, {b}) references unknown spin")
            if not j > 0.0:
                raise ValueError(f"J coupling must be positive, got {j} for ({a}, {b})")
            couplings[_pair(a, b)] = float(j)
        active = frozenset(_pair(a, b) for a, b in self.active_couplings)
        if not active <= set(couplings):
            raise ValueError("active couplings must be a subset of the J couplings")
        object.__setattr__(self, "spins", tuple(self.spins))
        object.__setattr__(self, "j_couplings", couplings)
        object.__setattr__(self, "active_couplings", active)

    def index(self, name: str) -> int:
        for i, s in enumerate(self.spins):
            if s.name == name:
                return i
        raise ValueError(f"unknown spin {name!r}")

    def spin(self, name: str) -> SpinParams:
        return self.spins[self.index(name)]

    def coupling(self, a: str, b: str) -> float | None:
        return self.j_couplings.get(_pair(a, b))

    def is_active(self, a: str, b: str) -> bool:
        return _pair(a, b) in self.active_couplings

    def with_relaxation(self, t1_enabled: bool = True, t2_enabled: bool = True) -> MoleculeModel:
        """Copy with relaxation processes switched on or off per spin.

        Disabling T2 removes only the dephasing in excess of the T1-induced
        coherence decay (t2 -> 2*t1), which is the physical no-extra-dephasing
        limit; disabling T1 sets it to infinity.
        """
        spins = []
        for s in self.spins:
            t1 = s.t1 if t1_enabled else math.inf
            t2 = s.t2 if t2_enabled else 2.0 * t1
            spins.append(SpinParams(s.name, s.larmor_hz, t1, t2))
        return MoleculeModel(tuple(spins), self.j_couplings, self.active_couplings)

    def noiseless(self) -> MoleculeModel:
        return self.with_relaxation(t1_enabled=False, t2_enabled=False)


def tce_model(carbon_t1: float = 25.0) -> MoleculeModel:
    """Measured TCE parameters; spin order (C2, C1, H) matches the register.

    The carbon T1 defaults to the middle of the measured 20-30 s range; its
    exact value barely matters because the carbon T2 times are two orders of
    magnitude shorter.  The H-C2 and chlorine couplings are suppressed by
    refocusing and are not part of the model.
    """
    if not carbon_t1 > 0.0:
        raise ValueError(f"carbon T1 must be positive, got {carbon_t1}")
    spins = (
        SpinParams("C2", 125_772_580.0 - 911.0, carbon_t1, 0.3),
        SpinParams("C1", 125_772_580.0, carbon_t1, 0.4),
        SpinParams("H", 500_133_491.0, 5.0, 3.0),
    )
    couplings = {("C1", "H"): 201.0, ("C1", "C2"): 103.0}
    return MoleculeModel(spins, couplings, frozenset(couplings))


@dataclass(frozen=True)
class RfRotation:
    """Instantaneous rotating-frame rf rotation about x or y."""

    spin: str
    axis: str
    angle: float

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")
        if not math.isfinite(self.angle):
            raise ValueError(f"angle must be finite, got {self.angle}")


@dataclass(frozen=True)
class FreeEvolution:
    """Evolution under the listed J couplings for ``duration`` seconds."""

    duration: float
    couplings: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        if self.duration < 0.0:
            raise ValueError(f"duration must be nonnegative, got {self.duration}")
        couplings = frozenset(_pair(a, b) for a, b in self.couplings)
        if math.isinf(self.duration) and couplings:
            raise ValueError("infinite evolution is only meaningful with all couplings refocused")
        object.__setattr__(self, "couplings", couplings)


@dataclass(frozen=True, eq=False)
class PulseSchedule:
    """Ordered rf rotations and free-evolution intervals."""

    events: tuple[RfRotation | FreeEvolution, ...]

    def __post_init__(self):
        for ev in self.events:
            if not isinstance(ev, (RfRotation, FreeEvolution)):
                raise ValueError(f"unsupported schedule event {ev!r}")
        object.__setattr__(self, "events", tuple(self.events))

    def total_free_evolution(self) -> float:
        return sum(ev.duration for ev in self.events if isinstance(ev, FreeEvolution))


def _wrap_angle(angle: float) -> float:
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return wrapped if abs(wrapped) > _ANGLE_EPS else 0.0


def _rz_pulses(spin: str, angle: float) -> list[RfRotation]:
    """z rotation by x/y conjugation: Rz(a) = Rx(pi/2) Ry(a) Rx(-pi/2)."""
    angle = _wrap_angle(angle)
    if angle == 0.0:
        return []
    return [
        RfRotation(spin, "x", -math.pi / 2.0),
        RfRotation(spin, "y", angle),
        RfRotation(spin, "x", math.pi / 2.0),
    ]


def _zyz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Euler angles (phi, theta, lam) with U ~ Rz(phi) Ry(theta) Rz(lam)."""
    det = np.linalg.det(u)
    v = u * np.exp(-0.5j * np.angle(det))
    a, b = v[0, 0], v[1, 0]
    theta = 2.0 * math.atan2(abs(b), abs(a))
    if abs(b) < _ANGLE_EPS:
        return -2.0 * float(np.angle(a)), theta, 0.0
    if abs(a) < _ANGLE_EPS:
        return 2.0 * float(np.angle(b)), theta, 0.0
    return (
        float(np.angle(b) - np.angle(a)),
        theta,
        float(-np.angle(b) - np.angle(a)),
    )


def _single_spin_schedule(u: np.ndarray, spin: str) -> list[RfRotation]:
    phi, theta, lam = _zyz_angles(u)
    pulses = _rz_pulses(spin, lam)
    theta = _wrap_angle(theta)
    if theta != 0.0:
        pulses.append(RfRotation(spin, "y", theta))
    pulses.extend(_rz_pulses(spin, phi))
    return pulses


def _hadamard_pulses(spin: str) -> list[RfRotation]:
    # H = X Ry(pi/2) up to global phase.
    return [RfRotation(spin, "y", math.pi / 2.0), RfRotation(spin, "x", math.pi)]


def _matches(u: np.ndarray, ref: np.ndarray) -> bool:
    overlap = np.sum(ref.conj() * u)
    if abs(overlap) < _MATCH_TOL:
        return False
    phase = overlap / abs(overlap)
    return bool(np.max(np.abs(u - phase * ref)) < _MATCH_TOL)


def _coupling_for(model: MoleculeModel, a: str, b: str) -> float:
    j = model.coupling(a, b)
    if j is None or not model.is_active(a, b):
        raise UnsupportedGateError(
            f"no active J coupling between {a} and {b}; two-spin gates need one"
        )
    return j


def _cnot_schedule(control: str, target: str, j: float) -> list[RfRotation | FreeEvolution]:
    """CNOT = H_t CZ H_t with CZ from one 1/(2J) coupling interval.

    Exact up to a global phase, so the compiled gate composes freely with
    the rest of a schedule.
    """
    events: list[RfRotation | FreeEvolution] = []
    events += _hadamard_pulses(target)
    events += _rz_pulses(control, -math.pi / 2.0)
    events += _rz_pulses(target, -math.pi / 2.0)
    events.append(FreeEvolution(1.0 / (2.0 * j), frozenset({_pair(control, target)})))
    events += _hadamard_pulses(target)
    return events


def _diagonal_schedule(u: np.ndarray, spin_a: str, spin_b: str, j: float) -> list[RfRotation | FreeEvolution]:
    """Any diagonal two-qubit unitary via z rotations plus zz evolution."""
    p = np.angle(np.diag(u))
    coef_a = (p[0] + p[1] - p[2] - p[3]) / 4.0
    coef_b = (p[0] - p[1] + p[2] - p[3]) / 4.0
    coef_zz = (p[0] - p[1] - p[2] + p[3]) / 4.0
    events: list[RfRotation | FreeEvolution] = []
    events += _rz_pulses(spin_a, -2.0 * coef_a)
    events += _rz_pulses(spin_b, -2.0 * coef_b)
    theta = (-coef_zz) % math.pi  # shifting by pi only flips the global sign
    if theta > _ANGLE_EPS and (math.pi - theta) > _ANGLE_EPS:
        events.append(FreeEvolution(2.0 * theta / (math.pi * j), frozenset({_pair(spin_a, spin_b)})))
    return events


def compile_gate(gate: GateEvent, model: MoleculeModel) -> PulseSchedule:
    """Translate one circuit event into an rf/J-coupling schedule.

    Supported: any single-qubit unitary (ZYZ decomposition), CNOT in either
    orientation and diagonal two-qubit unitaries (controlled phases) between
    J-coupled spins, and bare delays (free evolution with every coupling
    refocused).  Everything else raises :class:`UnsupportedGateError`.
    """
    if gate.kind == "delay":
        return PulseSchedule((FreeEvolution(gate.duration, frozenset()),))
    if gate.kind != "unitary":
        raise UnsupportedGateError(f"cannot compile {gate.kind!r} events")
    if len(gate.targets) == 1:
        spin = model.spins[gate.targets[0]].name
        if _matches(gate.unitary, np.eye(2, dtype=complex)):
            return PulseSchedule(())
        return PulseSchedule(tuple(_single_spin_schedule(gate.unitary, spin)))
    if len(gate.targets) == 2:
        name_a = model.spins[gate.targets[0]].name
        name_b = model.spins[gate.targets[1]].name
        j = _coupling_for(model, name_a, name_b)
        u = gate.unitary
        if _matches(u, np.eye(4, dtype=complex)):
            return PulseSchedule(())
        if _matches(u, CNOT):
            return PulseSchedule(tuple(_cnot_schedule(name_a, name_b, j)))
        if _matches(u, _CNOT_REVERSED):
            return PulseSchedule(tuple(_cnot_schedule(name_b, name_a, j)))
        off_diag = u - np.diag(np.diag(u))
        if np.max(np.abs(off_diag)) < _MATCH_TOL:
            return PulseSchedule(tuple(_diagonal_schedule(u, name_a, name_b, j)))
        raise UnsupportedGateError("two-spin gate is neither a CNOT nor diagonal")
    raise UnsupportedGateError(f"gates on {len(gate.targets)} spins have no pulse realization")


def _zz_phases(duration: float, pairs: list[tuple[int, int, float]], n: int) -> np.ndarray:
    """Diagonal of exp(-i H t) for H = sum pi*J/2 sigma_z sigma_z (rad/s)."""
    phases = np.zeros(2**n)
    for ia, ib, j in pairs:
        rate = math.pi * j * duration / 2.0
        for idx in range(2**n):
            za = 1.0 - 2.0 * ((idx >> (n - 1 - ia)) & 1)
            zb = 1.0 - 2.0 * ((idx >> (n - 1 - ib)) & 1)
            phases[idx] -= rate * za * zb
    return phases


def simulate_schedule(
    schedule: PulseSchedule,
    model: MoleculeModel,
    rho: DensityMatrix,
    angle_error: float = 0.0,
) -> DensityMatrix:
    """Execute a schedule: ideal instantaneous rf pulses, exact zz evolution,
    and per-spin relaxation over each free-evolution interval.

    ``angle_error`` is a fractional miscalibration applied to every rf
    rotation angle (0 means perfect pulses).  Couplings listed by an
    interval but refocused away in the model contribute nothing.
    """
    n = len(model.spins)
    if rho.num_qubits != n:
        raise ValueError(f"state has {rho.num_qubits} qubits but model has {n} spins")
    for ev in schedule.events:
        if isinstance(ev, RfRotation):
            idx = model.index(ev.spin)
            angle = ev.angle * (1.0 + angle_error)
            u = rotation_x(angle) if ev.axis == "x" else rotation_y(angle)
            lifted = lift_operator(u, (idx,), n)
            rho = DensityMatrix(n, enforce_hermitian(lifted @ rho.matrix @ lifted.conj().T))
        else:
            pairs = []
            for a, b in ev.couplings:
                ia, ib = model.index(a), model.index(b)
                j = model.coupling(a, b)
                if j is not None and model.is_active(a, b):
                    pairs.append((ia, ib, j))
            if pairs and ev.duration > 0.0:
                diag = np.exp(1j * _zz_phases(ev.duration, pairs, n))
                rho = DensityMatrix(n, enforce_hermitian(rho.matrix * np.outer(diag, diag.conj())))
            if ev.duration > 0.0:
                for q, spin in enumerate(model.spins):
                    if math.isinf(spin.t1) and math.isinf(spin.t2):
                        continue
                    rho = apply_channel(rho, relaxation_channel(ev.duration, spin.relaxation(), target=q))
    return rho


def run_circuit_pulse(
    circuit: Circuit,
    model: MoleculeModel,
    input_data: DensityMatrix,
    angle_error: float = 0.0,
) -> DensityMatrix:
    """Hamiltonian-level twin of :func:`nmrteleport.circuits.run_circuit`.

    Every one- and two-spin unitary is compiled to pulses and executed with
    relaxation disabled (pulses and coupling intervals are idealized, just
    as gates are instantaneous at the gate level); channel events carry the
    noise and are applied directly, so both engines see identical noise.
    The classically conditioned correction block spans three spins and has
    no pulse decomposition here (the data and target spins are not
    J-coupled), so it is applied as an exact unitary.
    """
    if len(model.spins) != circuit.num_qubits:
        raise ValueError("model and circuit register sizes differ")
    if input_data.num_qubits != 1:
        raise ValueError("input must be a single-qubit state")
    quiet = model.noiseless()
    n = circuit.num_qubits
    rest = 2 ** (n - 1)
    padding = np.zeros((rest, rest), dtype=complex)
    padding[0, 0] = 1.0
    rho = DensityMatrix(n, tensor_product(input_data.matrix, padding))
    for ev in circuit.events:
        if ev.kind == "unitary":
            if len(ev.targets) <= 2:
                rho = simulate_schedule(compile_gate(ev, model), quiet, rho, angle_error)
            else:
                lifted = lift_operator(ev.unitary, ev.targets, n)
                rho = DensityMatrix(n, enforce_hermitian(lifted @ rho.matrix @ lifted.conj().T))
        elif ev.kind == "channel":
            rho = apply_channel(rho, ev.channel)
        else:
            continue
    return rho
