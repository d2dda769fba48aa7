import math

import numpy as np
import pytest

from nmrteleport.circuits import (
    ANCILLA,
    DATA,
    TARGET,
    Circuit,
    GateEvent,
    bell_to_computational,
    channel_event,
    conditional_correction,
    control_circuit,
    correction_table,
    delay_event,
    entangle_gate,
    run_circuit,
    teleport_circuit,
    unitary_event,
)
from nmrteleport.channels import dephasing_channel
from nmrteleport.nmr import MoleculeModel, SpinParams, tce_model
from nmrteleport.qstate import (
    CNOT,
    HADAMARD,
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
    PureState,
    bell_states,
    lift_operator,
    partial_trace,
    state_fidelity,
    tensor_product,
)
from tests.helpers import phase_distance, random_pure_state

PLUS = PureState(1, np.array([1.0, 1.0]) / np.sqrt(2.0))

# Residual operator on the target for each (data, ancilla) outcome, written
# down independently of the package's derived table.
BRANCH_RESIDUALS = {
    "00": IDENTITY_2,
    "10": PAULI_Z,
    "01": PAULI_X,
    "11": -1j * PAULI_Y,
}


def dephasing_only_model(c1_t2=0.4, c2_t2=0.3, h_t2=math.inf):
    spins = (
        SpinParams("C2", 1e6, math.inf, c2_t2),
        SpinParams("C1", 2e6, math.inf, c1_t2),
        SpinParams("H", 3e6, math.inf, h_t2),
    )
    couplings = {("C1", "H"): 201.0, ("C1", "C2"): 103.0}
    return MoleculeModel(spins, couplings, frozenset(couplings))


def events_unitary(events, num_qubits):
    """Compose unitary events into one matrix (time order = list order)."""
    u = np.eye(2**num_qubits, dtype=complex)
    for ev in events:
        u = lift_operator(ev.unitary, ev.targets, num_qubits) @ u
    return u


def test_entangle_gate_creates_bell_pair():
    circuit = Circuit(2, entangle_gate(0, 1))
    out = run_circuit(circuit, PureState.from_bits("0").density())
    assert np.allclose(out.matrix, bell_states()[0].density().matrix, atol=1e-12)


def test_entangle_gate_inverse_returns_input():
    events = entangle_gate(0, 1)
    # H and CNOT are self-inverse, so the inverse sequence is just reversed.
    u = events_unitary(list(events) + list(reversed(events)), 2)
    assert np.max(np.abs(u - np.eye(4))) < 1e-12


def test_entangle_gate_on_excited_ancilla():
    # Direct matrix product: CNOT . (H ⊗ I) applied to |10> gives the
    # orthogonal Bell state (|00> - |11>)/sqrt(2).
    u = CNOT @ tensor_product(HADAMARD, IDENTITY_2)
    ket = np.zeros(4, dtype=complex)
    ket[2] = 1.0
    expected = u @ ket
    assert np.allclose(expected, bell_states()[1].amplitudes, atol=1e-12)
    via_events = events_unitary(entangle_gate(0, 1), 2) @ ket
    assert np.allclose(via_events, expected, atol=1e-12)


def test_bell_rotation_maps_bell_basis_to_computational():
    u = events_unitary(bell_to_computational(0, 1), 2)
    expected_bits = ("00", "10", "01", "11")
    outputs = []
    for bell, bits in zip(bell_states(), expected_bits):
        out = u @ bell.amplitudes
        target = PureState.from_bits(bits).amplitudes
        assert phase_distance(out.reshape(2, 2), target.reshape(2, 2)) < 1e-12
        outputs.append(bits)
    assert len(set(outputs)) == 4


def test_bell_rotation_singlet_lands_on_11_exactly():
    u = events_unitary(bell_to_computational(0, 1), 2)
    out = u @ bell_states()[3].amplitudes
    expected = PureState.from_bits("11").amplitudes
    assert np.allclose(out, expected, atol=1e-12)


def test_bell_rotation_composes_with_inverse_to_identity():
    u = events_unitary(bell_to_computational(0, 1), 2)
    assert np.max(np.abs(u.conj().T @ u - np.eye(4))) < 1e-12


def test_correction_table_entries_are_paulis_up_to_phase():
    table = correction_table().corrections
    expected = {"00": IDENTITY_2, "10": PAULI_Z, "01": PAULI_X, "11": 1j * PAULI_Y}
    for outcome, unitary in table.items():
        assert phase_distance(unitary, expected[outcome]) < 1e-12


def test_corrections_restore_every_branch():
    # Exhaustive branch simulation: project the rotated state on each
    # outcome, apply the correction, and demand the input state back.
    rng = np.random.default_rng(42)
    pre = events_unitary(
        list(entangle_gate(ANCILLA, TARGET)) + list(bell_to_computational(DATA, ANCILLA)), 3
    )
    for outcome in ("00", "01", "10", "11"):
        b = int(outcome, 2)
        correction = conditional_correction(outcome).unitary
        for _ in range(20):
            psi = random_pure_state(rng, 1)
            full = np.kron(psi.amplitudes, PureState.from_bits("00").amplitudes)
            rotated = pre @ full
            branch = 2.0 * rotated[2 * b : 2 * b + 2]  # weight 1/2 per branch
            recovered = correction @ branch
            fidelity = abs(np.vdot(psi.amplitudes, recovered)) ** 2
            assert fidelity == pytest.approx(1.0, abs=1e-10)


def test_conditional_correction_rejects_bad_outcome():
    with pytest.raises(ValueError):
        conditional_correction("2")


def test_pre_measurement_state_expands_into_four_branches():
    # Regrouping the entangled state in the Bell basis of (data, ancilla)
    # exposes the residual I, Z, X, -iY on the target, amplitude 1/2 each.
    rng = np.random.default_rng(6)
    psi = random_pure_state(rng, 1)
    state = np.kron(psi.amplitudes, bell_states()[0].amplitudes)
    bell_order = ("00", "10", "01", "11")  # computational label of each Bell state
    for bell, label in zip(bell_states(), bell_order):
        residual = BRANCH_RESIDUALS[label]
        expected = 0.5 * (residual @ psi.amplitudes)
        for t in (0, 1):
            basis = np.kron(bell.amplitudes, np.eye(2)[t])
            amplitude = np.vdot(basis, state)
            assert amplitude == pytest.approx(expected[t], abs=1e-12)


def test_noiseless_teleportation_identity():
    model = tce_model().noiseless()
    rng = np.random.default_rng(8)
    circuit = teleport_circuit(0.5, model)
    for _ in range(10):
        psi = random_pure_state(rng, 1)
        out = run_circuit(circuit, psi.density())
        fidelity = state_fidelity(partial_trace(out, [TARGET]), psi.density())
        assert fidelity >= 1.0 - 1e-9


def test_teleportation_survives_complete_carbon_dephasing():
    model = dephasing_only_model()
    circuit = teleport_circuit(math.inf, model)
    rng = np.random.default_rng(12)
    for _ in range(10):
        psi = random_pure_state(rng, 1)
        out = run_circuit(circuit, psi.density())
        fidelity = state_fidelity(partial_trace(out, [TARGET]), psi.density())
        assert fidelity >= 1.0 - 1e-9
    # After an infinite delay the carbons really are diagonal.
    reduced = partial_trace(run_circuit(circuit, PLUS.density()), [DATA, ANCILLA])
    off_diag = reduced.matrix - np.diag(np.diag(reduced.matrix))
    assert np.max(np.abs(off_diag)) < 1e-12


def test_teleport_circuit_roles_and_validation():
    model = tce_model()
    circuit = teleport_circuit(0.1, model)
    assert circuit.roles == {"data": "C2", "ancilla": "C1", "target": "H"}
    with pytest.raises(ValueError):
        teleport_circuit(-0.1, model)
    with pytest.raises(ValueError):
        control_circuit(-0.1, model)


def test_control_circuit_zero_delay_keeps_data_state():
    model = tce_model()
    circuit = control_circuit(0.0, model)
    rng = np.random.default_rng(13)
    psi = random_pure_state(rng, 1)
    out = run_circuit(circuit, psi.density())
    assert state_fidelity(partial_trace(out, [DATA]), psi.density()) >= 1.0 - 1e-10


def test_control_circuit_infinite_delay_kills_data_coherence():
    model = dephasing_only_model()
    circuit = control_circuit(math.inf, model)
    out = run_circuit(circuit, PLUS.density())
    reduced = partial_trace(out, [DATA])
    assert np.allclose(reduced.matrix, np.eye(2) / 2.0, atol=1e-12)


def test_run_circuit_empty_pads_with_ground_states():
    rng = np.random.default_rng(19)
    psi = random_pure_state(rng, 1)
    out = run_circuit(Circuit(3, ()), psi.density())
    expected = tensor_product(
        psi.density().matrix, PureState.from_bits("00").density().matrix
    )
    assert np.allclose(out.matrix, expected, atol=1e-12)


def test_run_circuit_single_x_flips_data():
    circuit = Circuit(3, (unitary_event(PAULI_X, (DATA,)),))
    out = run_circuit(circuit, PureState.from_bits("0").density())
    reduced = partial_trace(out, [DATA])
    assert np.allclose(reduced.matrix, np.diag([0.0, 1.0]), atol=1e-12)


def test_run_circuit_teleports_plus_state_matches_hand_simulation():
    # Independent oracle: compose the known gate matrices and the known
    # correction table by hand and compare full output states.
    model = tce_model().noiseless()
    out = run_circuit(teleport_circuit(0.0, model), PLUS.density())

    pre = (
        lift_operator(HADAMARD, (DATA,), 3)
        @ lift_operator(CNOT, (DATA, ANCILLA), 3)
        @ lift_operator(CNOT, (ANCILLA, TARGET), 3)
        @ lift_operator(HADAMARD, (ANCILLA,), 3)
    )
    correction = np.zeros((8, 8), dtype=complex)
    for label, residual in BRANCH_RESIDUALS.items():
        b = int(label, 2)
        proj = np.zeros((4, 4), dtype=complex)
        proj[b, b] = 1.0
        correction += np.kron(proj, residual.conj().T)
    rho0 = tensor_product(PLUS.density().matrix, PureState.from_bits("00").density().matrix)
    expected = correction @ pre @ rho0 @ pre.conj().T @ correction.conj().T
    assert np.max(np.abs(out.matrix - expected)) < 1e-12
    reduced = partial_trace(out, [TARGET])
    assert np.max(np.abs(reduced.matrix - PLUS.density().matrix)) < 1e-10


def test_delay_events_are_inert_at_gate_level():
    rng = np.random.default_rng(25)
    psi = random_pure_state(rng, 1)
    plain = run_circuit(Circuit(3, ()), psi.density())
    delayed = run_circuit(Circuit(3, (delay_event(0.7),)), psi.density())
    assert np.allclose(plain.matrix, delayed.matrix, atol=1e-15)


def test_gate_event_validation():
    with pytest.raises(ValueError):
        unitary_event(np.array([[1.0, 0.0], [1.0, 0.0]]), (0,))  # not unitary
    with pytest.raises(ValueError):
        GateEvent("unitary", unitary=IDENTITY_2, targets=(0,), duration=1.0)
    with pytest.raises(ValueError):
        GateEvent("delay", duration=-1.0)
    with pytest.raises(ValueError):
        GateEvent("wait")
    with pytest.raises(ValueError):
        Circuit(2, (unitary_event(PAULI_X, (5,)),))
    with pytest.raises(ValueError):
        Circuit(1, (channel_event(dephasing_channel(0.1, 0.3, target=4)),))


def test_teleport_output_satisfies_state_invariants():
    model = tce_model()
    out = run_circuit(teleport_circuit(0.4, model), PLUS.density())
    # DensityMatrix construction enforces the invariants; spot-check trace.
    assert abs(np.trace(out.matrix) - 1.0) < 1e-10
