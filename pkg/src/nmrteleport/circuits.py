"""Gate-level teleportation and control circuits.

The register order is fixed: qubit 0 carries the unknown input state (the
data spin, C2), qubit 1 is the ancilla (C1), and qubit 2 is the target (H)
that should end up holding the input.

The measurement of the data/ancilla pair is never sampled.  Dephasing during
the decoherence delay diagonalizes those qubits in the computational basis,
and the final correction is applied as a single unitary controlled on that
basis, which is mathematically identical to reading the environment's
outcome and acting conditionally.  Global phases are ignored throughout; the
correction table is derived from the circuit's own Bell-basis labeling
rather than hand-entered, so the two cannot drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .channels import KrausChannel, apply_channel, relaxation_channel
from .qstate import (
    CNOT,
    HADAMARD,
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    UNITARY_TOL,
    DensityMatrix,
    enforce_hermitian,
    lift_operator,
    tensor_product,
)

if TYPE_CHECKING:
    from .nmr import MoleculeModel

DATA, ANCILLA, TARGET = 0, 1, 2
OUTCOMES = ("00", "01", "10", "11")


@dataclass(frozen=True, eq=False)
class GateEvent:
    """One step of a circuit: a unitary, a noise channel, or a timed wait.

    Exactly the fields for the event's kind are populated.  A ``delay``
    event records wall-clock structure only; decoherence for a wait is
    always attached as explicit channel events by the circuit builders, so
    both execution engines treat a bare delay as an idle interval.
    """

    kind: str
    unitary: np.ndarray | None = None
    targets: tuple[int, ...] | None = None
    channel: KrausChannel | None = None
    duration: float | None = None

    def __post_init__(self):
        if self.kind == "unitary":
            if self.unitary is None or self.targets is None or self.channel is not None or self.duration is not None:
                raise ValueError("unitary event must carry exactly a matrix and targets")
            u = np.asarray(self.unitary, dtype=complex)
            targets = tuple(int(t) for t in self.targets)
            if len(set(targets)) != len(targets):
                raise ValueError(f"duplicate targets {targets}")
            dim = 2 ** len(targets)
            if u.shape != (dim, dim):
                raise ValueError(f"unitary shape {u.shape} does not fit targets {targets}")
            dev = np.max(np.abs(u.conj().T @ u - np.eye(dim)))
            if dev > UNITARY_TOL:
                raise ValueError(f"matrix is not unitary: U†U deviates from I by {dev:.3e}")
            u = u.copy()
            u.flags.writeable = False
            object.__setattr__(self, "unitary", u)
            object.__setattr__(self, "targets", targets)
        elif self.kind == "channel":
            if self.channel is None or self.unitary is not None or self.targets is not None or self.duration is not None:
                raise ValueError("channel event must carry exactly a KrausChannel")
            if not isinstance(self.channel, KrausChannel):
                raise ValueError(f"channel event needs a KrausChannel, got {type(self.channel)}")
        elif self.kind == "delay":
            if self.duration is None or self.unitary is not None or self.targets is not None or self.channel is not None:
                raise ValueError("delay event must carry exactly a duration")
            if self.duration < 0.0:
                raise ValueError(f"delay duration must be nonnegative, got {self.duration}")
        else:
            raise ValueError(f"unknown event kind {self.kind!r}")


def unitary_event(matrix: np.ndarray, targets: tuple[int, ...]) -> GateEvent:
    return GateEvent("unitary", unitary=matrix, targets=targets)


def channel_event(channel: KrausChannel) -> GateEvent:
    return GateEvent("channel", channel=channel)


def delay_event(duration: float) -> GateEvent:
    return GateEvent("delay", duration=duration)


@dataclass(frozen=True, eq=False)
class Circuit:
    """Ordered event sequence on a fixed-size register, with spin roles."""

    num_qubits: int
    events: tuple[GateEvent, ...]
    roles: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for ev in self.events:
            if ev.kind == "unitary":
                bad = [t for t in ev.targets if t >= self.num_qubits]
            elif ev.kind == "channel":
                bad = [t for t in ev.channel.targets if t >= self.num_qubits]
            else:
                bad = []
            if bad:
                raise ValueError(f"event targets {bad} exceed register size {self.num_qubits}")
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "roles", dict(self.roles))


def entangle_gate(ancilla: int = 0, target: int = 1) -> tuple[GateEvent, GateEvent]:
    """Hadamard on the ancilla, then CNOT onto the target.

    Maps |0>|0> on (ancilla, target) to the Bell pair (|00>+|11>)/sqrt(2).
    """
    return (
        unitary_event(HADAMARD, (ancilla,)),
        unitary_event(CNOT, (ancilla, target)),
    )


def bell_to_computational(data: int = 0, ancilla: int = 1) -> tuple[GateEvent, GateEvent]:
    """Rotate the Bell basis of (data, ancilla) into the computational basis.

    CNOT from data to ancilla followed by a Hadamard on data; sends the four
    Bell states (|00>±|11>, |01>±|10>)/sqrt(2) to |00>, |10>, |01>, |11>.
    """
    return (
        unitary_event(CNOT, (data, ancilla)),
        unitary_event(HADAMARD, (data,)),
    )


_PAULI_LIKE = {"I": IDENTITY_2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


@dataclass(frozen=True, eq=False)
class CorrectionTable:
    """Outcome (two bits on data, ancilla) -> single-qubit recovery unitary."""

    corrections: Mapping[str, np.ndarray]

    def __post_init__(self):
        if set(self.corrections) != set(OUTCOMES):
            raise ValueError(f"correction table must cover outcomes {OUTCOMES}")
        frozen = {}
        for outcome, u in self.corrections.items():
            u = np.asarray(u, dtype=complex)
            overlaps = [abs(np.trace(p.conj().T @ u)) / 2.0 for p in _PAULI_LIKE.values()]
            if max(overlaps) < 1.0 - 1e-9:
                raise ValueError(
                    f"correction for outcome {outcome} is not a Pauli up to global phase"
                )
            u = u.copy()
            u.flags.writeable = False
            frozen[outcome] = u
        object.__setattr__(self, "corrections", frozen)


@lru_cache(maxsize=1)
def correction_table() -> CorrectionTable:
    """Derive the recovery unitaries from the circuit's own conventions.

    Runs the pre-measurement unitary (entangle, then Bell rotation) on basis
    inputs and extracts, for each computational outcome of (data, ancilla),
    the residual operator left on the target; the correction is its inverse.
    """
    pre = (
        lift_operator(HADAMARD, (DATA,), 3)
        @ lift_operator(CNOT, (DATA, ANCILLA), 3)
        @ lift_operator(CNOT, (ANCILLA, TARGET), 3)
        @ lift_operator(HADAMARD, (ANCILLA,), 3)
    )
    table = {}
    for b0 in (0, 1):
        for b1 in (0, 1):
            residual = np.empty((2, 2), dtype=complex)
            for t in (0, 1):
                for s in (0, 1):
                    # Branch amplitude of |b0 b1 t> for input |s 0 0>; each
                    # branch carries weight 1/2, so the block is half the
                    # residual unitary.
                    residual[t, s] = 2.0 * pre[(b0 << 2) | (b1 << 1) | t, s << 2]
            table[f"{b0}{b1}"] = residual.conj().T
    return CorrectionTable(table)


def conditional_correction(outcome: str, target: int = TARGET) -> GateEvent:
    """Recovery unitary for one measurement branch, as a gate on ``target``."""
    if outcome not in OUTCOMES:
        raise ValueError(f"outcome must be one of {OUTCOMES}, got {outcome!r}")
    return unitary_event(correction_table().corrections[outcome], (target,))


def _controlled_correction() -> np.ndarray:
    """All four corrections as one unitary controlled on (data, ancilla)."""
    table = correction_table().corrections
    full = np.zeros((8, 8), dtype=complex)
    for b0 in (0, 1):
        for b1 in (0, 1):
            proj = np.zeros((4, 4), dtype=complex)
            proj[2 * b0 + b1, 2 * b0 + b1] = 1.0
            full += tensor_product(proj, table[f"{b0}{b1}"])
    return full


def _roles(model: MoleculeModel) -> dict[str, str]:
    return {
        "data": model.spins[DATA].name,
        "ancilla": model.spins[ANCILLA].name,
        "target": model.spins[TARGET].name,
    }


def _delay_noise(delay: float, model: MoleculeModel) -> list[GateEvent]:
    """Relaxation of every spin for the wall-clock duration of the delay.

    Couplings are refocused during the delay, so each spin decoheres
    independently with its own T1/T2.
    """
    return [
        channel_event(relaxation_channel(delay, spin.relaxation(), target=q))
        for q, spin in enumerate(model.spins)
    ]


def teleport_circuit(delay: float, model: MoleculeModel) -> Circuit:
    """Full teleportation: entangle, Bell rotation, decoherence delay, recovery.

    The delay doubles as the measurement: carbon dephasing diagonalizes the
    data/ancilla pair in the computational basis, after which the controlled
    correction restores the input on the target.  At ``delay=inf`` the
    dephasing equals the exact computational-basis projection.
    """
    if delay < 0.0:
        raise ValueError(f"delay must be nonnegative, got {delay}")
    if len(model.spins) != 3:
        raise ValueError("teleportation needs a three-spin model")
    events = [
        *entangle_gate(ANCILLA, TARGET),
        *bell_to_computational(DATA, ANCILLA),
        *_delay_noise(delay, model),
        unitary_event(_controlled_correction(), (DATA, ANCILLA, TARGET)),
    ]
    return Circuit(3, tuple(events), _roles(model))


def control_circuit(delay: float, model: MoleculeModel) -> Circuit:
    """Control experiment: entangle ancilla and target, then only decohere.

    No Bell rotation and no conditional correction; the input state simply
    rides out the delay on the data spin, which is where readout happens.
    """
    if delay < 0.0:
        raise ValueError(f"delay must be nonnegative, got {delay}")
    if len(model.spins) != 3:
        raise ValueError("the control experiment needs a three-spin model")
    events = [
        *entangle_gate(ANCILLA, TARGET),
        *_delay_noise(delay, model),
    ]
    return Circuit(3, tuple(events), _roles(model))


def run_circuit(circuit: Circuit, input_data: DensityMatrix) -> DensityMatrix:
    """Execute the circuit on ``input_data`` ⊗ |0...0> and return the full state.

    State preparation is idealized: all qubits except the data qubit start
    in |0>.  Execution is deterministic; measurement never collapses the
    state (decoherence plus controlled unitaries carry the ensemble
    semantics instead).
    """
    if input_data.num_qubits != 1:
        raise ValueError("input must be a single-qubit state")
    rest = 2 ** (circuit.num_qubits - 1)
    padding = np.zeros((rest, rest), dtype=complex)
    padding[0, 0] = 1.0
    rho = DensityMatrix(circuit.num_qubits, tensor_product(input_data.matrix, padding))
    for ev in circuit.events:
        if ev.kind == "unitary":
            lifted = lift_operator(ev.unitary, ev.targets, circuit.num_qubits)
            rho = DensityMatrix(circuit.num_qubits, enforce_hermitian(lifted @ rho.matrix @ lifted.conj().T))
        elif ev.kind == "channel":
            rho = apply_channel(rho, ev.channel)
        elif ev.kind == "delay":
            continue
        else:  # pragma: no cover - GateEvent validation forbids this
            raise ValueError(f"malformed event kind {ev.kind!r}")
    return rho
