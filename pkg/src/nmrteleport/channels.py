"""Completely positive trace-preserving noise maps as Kraus operation elements.

Provides phase damping (T2), amplitude damping combined with phase damping
(T1/T2 relaxation), depolarizing noise, and the two-qubit computational-basis
projection that models ensemble dephasing acting as a measurement.

Durations may be ``math.inf``: an infinite dephasing interval is exactly the
projection onto the computational basis, so the idealized measurement limit
is reachable without large-number hacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qstate import (
    DensityMatrix,
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    enforce_hermitian,
    lift_operator,
)

CPTP_TOL = 1e-10


def _decay(duration: float, timescale: float) -> float:
    """exp(-duration/timescale) with the 0 and inf corner cases pinned."""
    if timescale <= 0.0:
        raise ValueError(f"timescale must be positive, got {timescale}")
    if math.isinf(timescale):
        return 1.0
    if math.isinf(duration):
        return 0.0
    return math.exp(-duration / timescale)


@dataclass(frozen=True)
class RelaxationParams:
    """Per-spin relaxation times in seconds; ``inf`` disables a process."""

    t1: float
    t2: float

    def __post_init__(self):
        if not self.t1 > 0.0:
            raise ValueError(f"t1 must be positive, got {self.t1}")
        if not self.t2 > 0.0:
            raise ValueError(f"t2 must be positive, got {self.t2}")
        if self.t2 > 2.0 * self.t1:
            raise ValueError(
                f"unphysical relaxation: t2={self.t2} exceeds 2*t1={2.0 * self.t1}"
            )


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """CPTP map defined by operation elements acting on ``targets``.

    Construction rejects non-trace-preserving sets, so every instance in
    circulation satisfies sum_i A_i† A_i = I within 1e-10.
    """

    targets: tuple[int, ...]
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        if len(set(targets)) != len(targets):
            raise ValueError(f"duplicate channel targets {targets}")
        if not self.elements:
            raise ValueError("channel needs at least one operation element")
        dim = 2 ** len(targets)
        elements = []
        for a in self.elements:
            a = np.asarray(a, dtype=complex)
            if a.shape != (dim, dim):
                raise ValueError(f"element shape {a.shape} does not fit targets {targets}")
            a = a.copy()
            a.flags.writeable = False
            elements.append(a)
        total = sum(a.conj().T @ a for a in elements)
        deviation = np.max(np.abs(total - np.eye(dim)))
        if deviation > CPTP_TOL:
            raise ValueError(
                f"channel is not trace preserving: sum A†A deviates from I by {deviation:.3e}"
            )
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "elements", tuple(elements))


def identity_channel(target: int = 0) -> KrausChannel:
    return KrausChannel((target,), (IDENTITY_2.copy(),))


def apply_channel(rho: DensityMatrix, channel: KrausChannel) -> DensityMatrix:
    """rho -> sum_i A_i rho A_i† on the target subspace, identity elsewhere."""
    n = rho.num_qubits
    if any(t >= n for t in channel.targets):
        raise ValueError(f"channel targets {channel.targets} outside {n}-qubit register")
    out = np.zeros_like(rho.matrix)
    for a in channel.elements:
        lifted = lift_operator(a, channel.targets, n)
        out += lifted @ rho.matrix @ lifted.conj().T
    return DensityMatrix(n, enforce_hermitian(out))


def dephasing_channel(duration: float, t2: float, target: int = 0) -> KrausChannel:
    """Pure phase damping: off-diagonals scale by exp(-duration/t2).

    ``duration=math.inf`` gives complete dephasing, i.e. projection onto the
    computational basis.
    """
    if duration < 0.0:
        raise ValueError(f"duration must be nonnegative, got {duration}")
    factor = _decay(duration, t2)
    return KrausChannel((target,), _dephasing_elements(factor))


def _dephasing_elements(factor: float) -> tuple[np.ndarray, ...]:
    """Kraus pair scaling off-diagonals by ``factor`` in [0, 1]."""
    k0 = math.sqrt((1.0 + factor) / 2.0)
    k1 = math.sqrt((1.0 - factor) / 2.0)
    if k1 == 0.0:
        return (IDENTITY_2.copy(),)
    return (k0 * IDENTITY_2, k1 * PAULI_Z)


def relaxation_channel(
    duration: float, params: RelaxationParams, target: int = 0
) -> KrausChannel:
    """Combined T1/T2 relaxation over ``duration`` seconds.

    Amplitude damping toward |0> with gamma = 1 - exp(-duration/t1),
    composed with just enough extra dephasing that the total off-diagonal
    decay factor is exp(-duration/t2).  The channel is specified by this
    action, not by a canonical factorization.
    """
    if duration < 0.0:
        raise ValueError(f"duration must be nonnegative, got {duration}")
    survival = _decay(duration, params.t1)  # population of |1> retained
    gamma = 1.0 - survival
    amp = math.sqrt(survival)  # off-diagonal factor from T1 alone
    total = _decay(duration, params.t2)
    extra = 1.0 if amp == 0.0 else min(1.0, total / amp)

    a0 = np.array([[1.0, 0.0], [0.0, amp]], dtype=complex)
    a1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    elements = []
    for d in _dephasing_elements(extra):
        for a in (a0, a1):
            prod = d @ a
            if np.max(np.abs(prod)) > 0.0:
                elements.append(prod)
    return KrausChannel((target,), tuple(elements))


def depolarizing_channel(p: float, target: int = 0) -> KrausChannel:
    """rho -> (1-p) rho + p I/2."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {p}")
    k_id = math.sqrt(1.0 - 3.0 * p / 4.0)
    k_pauli = math.sqrt(p / 4.0)
    elements = [k_id * IDENTITY_2]
    if k_pauli > 0.0:
        elements += [k_pauli * PAULI_X, k_pauli * PAULI_Y, k_pauli * PAULI_Z]
    return KrausChannel((target,), tuple(elements))


def measurement_dephasing(targets: tuple[int, int] = (0, 1)) -> KrausChannel:
    """Projection of a two-qubit subspace onto its computational basis.

    The four operation elements are the projectors |b><b|; the output is
    diagonal in that basis, which is indistinguishable from the environment
    measuring the two qubits and discarding the outcome.
    """
    if len(targets) != 2 or targets[0] == targets[1]:
        raise ValueError(f"need two distinct targets, got {targets}")
    elements = []
    for b in range(4):
        proj = np.zeros((4, 4), dtype=complex)
        proj[b, b] = 1.0
        elements.append(proj)
    return KrausChannel(tuple(targets), tuple(elements))
