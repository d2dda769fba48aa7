"""Dense complex linear algebra for small qubit registers.

Everything in the simulator lives on at most three qubits, so states and
operators are plain dense numpy arrays: Kronecker products, density
matrices with physicality checks, partial traces, Pauli expectation
values, and Uhlmann fidelity.

Conventions used package-wide:

* qubit 0 is the leftmost tensor factor, so the basis index of
  ``|b0 b1 ... b_{n-1}>`` is the integer with ``b0`` as its most
  significant bit;
* normalization factors are always explicit; every state is normalized;
* every :class:`DensityMatrix` is validated on construction (Hermitian
  within 1e-10, unit trace within 1e-10, eigenvalues >= -1e-9).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import NumericalInvariantError

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_SLACK = 1e-9
UNITARY_TOL = 1e-10
EXPECTATION_IMAG_TOL = 1e-9

IDENTITY_2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = {"I": IDENTITY_2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
# Two-qubit gates act on adjacent factors (control = leftmost of the pair).
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def rotation_x(angle: float) -> np.ndarray:
    """exp(-i*angle*X/2)."""
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    return np.array([[c, -1.0j * s], [-1.0j * s, c]], dtype=complex)


def rotation_y(angle: float) -> np.ndarray:
    """exp(-i*angle*Y/2)."""
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotation_z(angle: float) -> np.ndarray:
    """exp(-i*angle*Z/2)."""
    phase = np.exp(-0.5j * angle)
    return np.array([[phase, 0.0], [0.0, np.conj(phase)]], dtype=complex)


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the left factor becomes the leading qubits."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def enforce_hermitian(matrix: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Check Hermiticity within ``tol``, then return (M + M†)/2.

    The symmetrization damps floating-point drift accumulated by channel
    applications; the check runs first so genuine violations are not
    silently absorbed.
    """
    deviation = np.max(np.abs(matrix - matrix.conj().T))
    if deviation > tol:
        raise NumericalInvariantError(
            f"matrix deviates from Hermitian by {deviation:.3e} (tol {tol:.1e})"
        )
    return (matrix + matrix.conj().T) / 2.0


def lift_operator(op: np.ndarray, targets: tuple[int, ...], num_qubits: int) -> np.ndarray:
    """Embed a k-qubit operator into an n-qubit register.

    ``targets`` gives the register indices the operator acts on, in the
    operator's own qubit order (``targets[0]`` is the operator's leftmost
    factor); all other qubits get identity.
    """
    op = np.asarray(op, dtype=complex)
    k = len(targets)
    if len(set(targets)) != k:
        raise ValueError(f"duplicate targets {targets}")
    if any(t < 0 or t >= num_qubits for t in targets):
        raise ValueError(f"targets {targets} out of range for {num_qubits} qubits")
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator shape {op.shape} does not match {k} targets")
    if k == num_qubits and targets == tuple(range(num_qubits)):
        return op.copy()
    rest = [q for q in range(num_qubits) if q not in targets]
    full = np.kron(op, np.eye(2 ** len(rest), dtype=complex))
    # Tensor axes currently follow [targets..., rest...]; permute back to
    # ascending register order for both row and column indices.
    order = list(targets) + rest
    perm = [order.index(q) for q in range(num_qubits)]
    tens = full.reshape([2] * (2 * num_qubits))
    tens = tens.transpose(perm + [num_qubits + p for p in perm])
    return tens.reshape(2**num_qubits, 2**num_qubits)


@dataclass(frozen=True, eq=False)
class PureState:
    """State vector of an n-qubit register, normalized to one."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.num_qubits < 1:
            raise ValueError("need at least one qubit")
        if amps.size != 2**self.num_qubits:
            raise ValueError(
                f"{amps.size} amplitudes do not fit {self.num_qubits} qubits"
            )
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > TRACE_TOL:
            raise ValueError(f"squared amplitudes sum to {norm}, not 1")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_bits(cls, bits: str) -> PureState:
        """Computational basis state, e.g. ``'01'`` for |01>."""
        if not bits or any(b not in "01" for b in bits):
            raise ValueError(f"invalid bit string {bits!r}")
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(len(bits), amps)

    def density(self) -> DensityMatrix:
        """Projector |psi><psi| as a density matrix."""
        return DensityMatrix(self.num_qubits, np.outer(self.amplitudes, self.amplitudes.conj()))


def bell_states() -> tuple[PureState, PureState, PureState, PureState]:
    """The four Bell states, ordered (|00>+|11>, |00>-|11>, |01>+|10>, |01>-|10>)/sqrt(2)."""
    r = 1.0 / np.sqrt(2.0)
    return (
        PureState(2, np.array([r, 0, 0, r])),
        PureState(2, np.array([r, 0, 0, -r])),
        PureState(2, np.array([0, r, r, 0])),
        PureState(2, np.array([0, r, -r, 0])),
    )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one positive-semidefinite Hermitian operator on n qubits."""

    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dim = 2**self.num_qubits
        if self.num_qubits < 1:
            raise ValueError("need at least one qubit")
        if m.shape != (dim, dim):
            raise ValueError(f"matrix shape {m.shape} does not fit {self.num_qubits} qubits")
        dev = np.max(np.abs(m - m.conj().T))
        if dev > HERMITICITY_TOL:
            raise NumericalInvariantError(f"density matrix not Hermitian: deviation {dev:.3e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise NumericalInvariantError(f"density matrix trace {tr} differs from 1")
        eigmin = float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2.0)))
        if eigmin < -PSD_SLACK:
            raise NumericalInvariantError(f"density matrix has eigenvalue {eigmin:.3e} < -{PSD_SLACK:.1e}")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    @classmethod
    def ground(cls, num_qubits: int) -> DensityMatrix:
        """|0...0><0...0|."""
        return PureState.from_bits("0" * num_qubits).density()

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> DensityMatrix:
        return cls(num_qubits, np.eye(2**num_qubits, dtype=complex) / 2**num_qubits)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on ``keep``, in ascending original order."""
    keep = sorted(keep)
    n = rho.num_qubits
    if not keep:
        raise ValueError("must keep at least one qubit")
    if len(set(keep)) != len(keep) or any(q < 0 or q >= n for q in keep):
        raise ValueError(f"invalid qubit indices {keep} for {n}-qubit state")
    traced = [q for q in range(n) if q not in keep]
    tens = rho.matrix.reshape([2] * (2 * n))
    # Row subscript q, column subscript n+q; tracing a qubit identifies the pair.
    row = list(range(n))
    col = [n + q for q in range(n)]
    for q in traced:
        col[q] = row[q]
    out_subs = [row[q] for q in keep] + [col[q] for q in keep]
    reduced = np.einsum(tens, row + col, out_subs)
    dim = 2 ** len(keep)
    return DensityMatrix(len(keep), reduced.reshape(dim, dim))


def pauli_string(label: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis named by ``label``, e.g. ``'IXZ'``."""
    if not label or any(c not in PAULIS for c in label):
        raise ValueError(f"invalid Pauli label {label!r}")
    op = PAULIS[label[0]]
    for c in label[1:]:
        op = np.kron(op, PAULIS[c])
    return op


def pauli_expectation(rho: DensityMatrix, label: str) -> float:
    """tr(rho * P) for the Pauli string ``label``; guaranteed real.

    The imaginary residue must stay below 1e-9 (it is discarded after the
    check); larger residues indicate a corrupted state.
    """
    if len(label) != rho.num_qubits:
        raise ValueError(f"label {label!r} does not match {rho.num_qubits} qubits")
    value = complex(np.trace(rho.matrix @ pauli_string(label)))
    if abs(value.imag) > EXPECTATION_IMAG_TOL:
        raise NumericalInvariantError(
            f"expectation of {label} has imaginary part {value.imag:.3e}"
        )
    return float(value.real)


def _clipped_eigenvalues(vals: np.ndarray) -> np.ndarray:
    # Square roots amplify spurious near-zero eigenvalues (eps -> sqrt(eps)),
    # so zero out anything far below the spectral radius before taking them.
    cutoff = 1e-12 * max(float(np.max(vals, initial=0.0)), 0.0)
    return np.where(vals > cutoff, vals, 0.0)


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    vals = _clipped_eigenvalues(vals)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def state_fidelity(a: DensityMatrix, b: DensityMatrix) -> float:
    """Uhlmann fidelity F(a, b) = (tr sqrt(sqrt(a) b sqrt(a)))^2 in [0, 1].

    Symmetric in its arguments; reduces to |<psi|phi>|^2 for pure states.
    """
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    sqrt_a = _psd_sqrt(a.matrix)
    inner = sqrt_a @ b.matrix @ sqrt_a
    vals = np.linalg.eigvalsh((inner + inner.conj().T) / 2.0)
    fid = float(np.sum(np.sqrt(_clipped_eigenvalues(vals))) ** 2)
    return min(max(fid, 0.0), 1.0)
