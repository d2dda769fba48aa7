import math

import numpy as np
import pytest

from nmrteleport.channels import (
    KrausChannel,
    apply_channel,
    dephasing_channel,
    depolarizing_channel,
)
from nmrteleport.errors import NumericalInvariantError, UnphysicalBlochError
from nmrteleport.qstate import (
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
)
from nmrteleport.tomography import (
    ProcessMap,
    TomographyInputSet,
    canonical_input_states,
    entanglement_fidelity,
    entanglement_fidelity_from_kraus,
    process_tomography,
    state_tomography,
)
from tests.helpers import apply_elements, random_cptp_elements


def channel_process(channel):
    return lambda rho: apply_channel(rho, channel)


def kraus_process(elements):
    return lambda rho: DensityMatrix(1, apply_elements(rho.matrix, elements))


def test_state_tomography_anchors():
    assert np.allclose(state_tomography(0, 0, 1).matrix, np.diag([1.0, 0.0]), atol=1e-12)
    assert np.allclose(state_tomography(0, 0, 0).matrix, np.eye(2) / 2.0, atol=1e-12)
    assert np.allclose(
        state_tomography(1, 0, 0).matrix, np.full((2, 2), 0.5), atol=1e-12
    )


def test_state_tomography_renormalizes_marginal_excess():
    rho = state_tomography(1.0 + 5e-7, 0.0, 0.0)
    assert abs(np.trace(rho.matrix) - 1.0) < 1e-12
    assert np.linalg.eigvalsh(rho.matrix)[0] >= -1e-12


def test_state_tomography_rejects_unphysical_bloch_vector():
    with pytest.raises(UnphysicalBlochError):
        state_tomography(1.0, 0.5, 0.0)


def test_identity_process_map():
    pm = process_tomography(lambda rho: rho)
    assert np.allclose(pm.transfer_matrix, np.eye(4), atol=1e-10)
    assert np.allclose(pm.chi_matrix, np.diag([1.0, 0.0, 0.0, 0.0]), atol=1e-10)
    assert entanglement_fidelity(pm) == pytest.approx(1.0, abs=1e-9)


def test_complete_dephasing_process_map():
    pm = process_tomography(channel_process(dephasing_channel(math.inf, 1.0)))
    assert np.allclose(pm.transfer_matrix, np.diag([1.0, 0.0, 0.0, 1.0]), atol=1e-10)
    assert np.allclose(pm.chi_matrix, np.diag([0.5, 0.0, 0.0, 0.5]), atol=1e-10)
    assert entanglement_fidelity(pm) == pytest.approx(0.5, abs=1e-9)


def test_total_depolarizing_process_map():
    pm = process_tomography(channel_process(depolarizing_channel(1.0)))
    assert np.allclose(pm.transfer_matrix, np.diag([1.0, 0.0, 0.0, 0.0]), atol=1e-10)
    assert entanglement_fidelity(pm) == pytest.approx(0.25, abs=1e-9)


def test_fe_from_kraus_anchors():
    assert entanglement_fidelity_from_kraus([IDENTITY_2]) == pytest.approx(1.0, abs=1e-12)
    p = 0.75
    twirl = [
        math.sqrt(1.0 - p) * IDENTITY_2,
        math.sqrt(p / 3.0) * PAULI_X,
        math.sqrt(p / 3.0) * PAULI_Y,
        math.sqrt(p / 3.0) * PAULI_Z,
    ]
    assert entanglement_fidelity_from_kraus(twirl) == pytest.approx(0.25, abs=1e-12)
    projectors = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
    assert entanglement_fidelity_from_kraus(projectors) == pytest.approx(0.5, abs=1e-12)


def test_fe_from_kraus_rejects_non_cptp():
    with pytest.raises(ValueError):
        entanglement_fidelity_from_kraus([0.9 * IDENTITY_2])
    with pytest.raises(ValueError):
        entanglement_fidelity_from_kraus([])


def test_pauli_twirl_equals_total_depolarizing():
    p = 0.75
    twirl = [
        math.sqrt(1.0 - p) * IDENTITY_2,
        math.sqrt(p / 3.0) * PAULI_X,
        math.sqrt(p / 3.0) * PAULI_Y,
        math.sqrt(p / 3.0) * PAULI_Z,
    ]
    pm = process_tomography(kraus_process(twirl))
    assert np.allclose(pm.transfer_matrix, np.diag([1.0, 0.0, 0.0, 0.0]), atol=1e-10)


def test_tomography_agrees_with_kraus_formula_randomized():
    rng = np.random.default_rng(71)
    for _ in range(25):
        elements = random_cptp_elements(rng, int(rng.integers(1, 5)))
        direct = entanglement_fidelity_from_kraus(elements)
        via_tomography = entanglement_fidelity(process_tomography(kraus_process(elements)))
        assert via_tomography == pytest.approx(direct, abs=1e-8)


def test_bare_pauli_processes_have_zero_fidelity():
    for pauli in (PAULI_X, PAULI_Y, PAULI_Z):
        pm = process_tomography(kraus_process([pauli]))
        assert entanglement_fidelity(pm) == pytest.approx(0.0, abs=1e-9)
    pm_x = process_tomography(kraus_process([PAULI_X]))
    assert np.allclose(pm_x.transfer_matrix, np.diag([1.0, 1.0, -1.0, -1.0]), atol=1e-10)


def test_unitary_followed_by_inverse_is_perfect():
    rng = np.random.default_rng(73)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, _ = np.linalg.qr(g)

    def corrected(rho):
        out = q @ rho.matrix @ q.conj().T
        out = q.conj().T @ out @ q
        return DensityMatrix(1, out)

    assert entanglement_fidelity(process_tomography(corrected)) == pytest.approx(1.0, abs=1e-9)


def test_alternate_input_set_reconstructs_same_transfer_matrix():
    rng = np.random.default_rng(74)
    elements = random_cptp_elements(rng, 3)
    evaluate = kraus_process(elements)
    canonical = process_tomography(evaluate)
    alternate_states = (
        state_tomography(1.0, 0.0, 0.0),
        state_tomography(-1.0, 0.0, 0.0),
        state_tomography(0.0, 0.0, 1.0),
        state_tomography(0.0, 1.0, 0.0),
    )
    alternate = process_tomography(evaluate, inputs=TomographyInputSet(alternate_states))
    assert np.max(np.abs(canonical.transfer_matrix - alternate.transfer_matrix)) < 1e-8


def test_trace_over_four_equals_chi00():
    rng = np.random.default_rng(75)
    for _ in range(10):
        elements = random_cptp_elements(rng, 2)
        pm = process_tomography(kraus_process(elements))
        assert float(np.trace(pm.transfer_matrix)) / 4.0 == pytest.approx(
            float(pm.chi_matrix[0, 0].real), abs=1e-12
        )


def test_input_set_requires_linear_independence():
    zero = state_tomography(0.0, 0.0, 1.0)
    plus = state_tomography(1.0, 0.0, 0.0)
    plus_i = state_tomography(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        TomographyInputSet((zero, zero, plus, plus_i))
    with pytest.raises(ValueError):
        TomographyInputSet((zero, plus))


def test_canonical_inputs_are_the_four_reference_states():
    states = canonical_input_states()
    assert np.allclose(states[0].matrix, np.diag([1.0, 0.0]), atol=1e-12)
    assert np.allclose(states[1].matrix, np.diag([0.0, 1.0]), atol=1e-12)
    assert np.allclose(states[2].matrix, np.full((2, 2), 0.5), atol=1e-12)
    assert np.allclose(states[3].matrix, np.array([[0.5, -0.5j], [0.5j, 0.5]]), atol=1e-12)


def test_process_map_validation():
    good = process_tomography(lambda rho: rho)
    with pytest.raises(NumericalInvariantError):
        ProcessMap(np.diag([0.9, 1.0, 1.0, 1.0]), good.chi_matrix)
    bad_chi = np.diag([0.7, 0.0, 0.0, 0.0]).astype(complex)
    with pytest.raises(NumericalInvariantError):
        ProcessMap(np.eye(4), bad_chi)


def test_evaluate_must_return_single_qubit_density_matrix():
    with pytest.raises(ValueError):
        process_tomography(lambda rho: rho.matrix)


def test_clamp_option_returns_physical_map():
    rng = np.random.default_rng(77)
    elements = random_cptp_elements(rng, 2)
    pm = process_tomography(kraus_process(elements), clamp_positive=True)
    assert float(np.min(np.linalg.eigvalsh(pm.chi_matrix))) >= -1e-12
    assert abs(np.trace(pm.chi_matrix) - 1.0) < 1e-10
