import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvqnn import fock
from cvqnn.errors import (
    ImpossibleOutcomeError,
    InvalidCutoffError,
    InvalidTargetError,
    LeakageError,
    ShapeMismatchError,
)
from cvqnn.gates import displacement, identity, rotation


def test_make_operators_basics():
    ops = fock.make_operators(6, 2.0)
    # <0|q|1> = sqrt(hbar/2) * sqrt(1) = 1 at hbar = 2
    assert ops.q[0, 1] == pytest.approx(1.0)
    comm = ops.q @ ops.p - ops.p @ ops.q
    assert comm[0, 0] == pytest.approx(2j)


def test_commutator_truncation_corner():
    # oracle: direct matrix arithmetic on the ladder matrices
    D = 8
    ops = fock.make_operators(D, 2.0)
    comm = ops.a @ ops.adag - ops.adag @ ops.a
    expected = np.eye(D, dtype=complex)
    expected[D - 1, D - 1] = -(D - 1)
    np.testing.assert_allclose(comm, expected, atol=1e-12)


def test_quadratures_hermitian():
    ops = fock.make_operators(10, 2.0)
    assert np.abs(ops.q - ops.q.conj().T).max() < 1e-12
    assert np.abs(ops.p - ops.p.conj().T).max() < 1e-12


def test_commutator_identity_on_interior():
    D = 10
    ops = fock.make_operators(D, 2.0)
    comm = ops.q @ ops.p - ops.p @ ops.q
    np.testing.assert_allclose(comm[: D - 1, : D - 1], 2j * np.eye(D - 1), atol=1e-12)


def test_invalid_cutoff():
    with pytest.raises(InvalidCutoffError):
        fock.make_operators(1, 2.0)


def test_apply_identity_gate():
    state = fock.basis_state([2, 1], 5)
    out = fock.apply_gate(state, identity(5), [1])
    np.testing.assert_array_equal(out.amps, state.amps)


def test_displaced_vacuum_amplitude():
    # coherent-state analytic form: |<0|D(1)|0>| = e^{-1/2}
    state = fock.apply_gate(fock.vacuum(1, 20), displacement(1.0, 20), [0])
    assert abs(state.amps[0]) == pytest.approx(np.exp(-0.5), abs=1e-10)


def test_displacement_composition_matches_single():
    # oracle: compose two half displacements, compare against one full one
    D = 25
    psi1 = fock.vacuum(1, D)
    for _ in range(2):
        psi1 = fock.apply_gate(psi1, displacement(0.3, D), [0])
    psi2 = fock.apply_gate(fock.vacuum(1, D), displacement(0.6, D), [0])
    assert np.abs(psi1.amps - psi2.amps).max() < 1e-6


def test_apply_gate_errors():
    state = fock.vacuum(2, 4)
    with pytest.raises(InvalidTargetError):
        fock.apply_gate(state, identity(4), [0, 0])
    with pytest.raises(InvalidTargetError):
        fock.apply_gate(state, identity(4), [2])
    with pytest.raises(ShapeMismatchError):
        fock.apply_gate(state, identity(4, arity=2), [0])


def test_norm_preserved_by_unitary():
    D = 12
    state = fock.apply_gate(fock.vacuum(1, D), displacement(0.4 + 0.2j, D), [0])
    out = fock.apply_gate(state, rotation(0.7, D), [0])
    assert out.norm() == pytest.approx(1.0, abs=1e-10)


def test_tensor_locality_commutes():
    # applying G to mode 0 and H to mode 1 in either order agrees
    D = 6
    state = fock.vacuum(2, D)
    g = displacement(0.5, D)
    h = rotation(1.1, D)
    a = fock.apply_gate(fock.apply_gate(state, g, [0]), h, [1])
    b = fock.apply_gate(fock.apply_gate(state, h, [1]), g, [0])
    assert np.abs(a.amps - b.amps).max() < 1e-12


def test_little_endian_mode_order():
    # |n_0=1, n_1=0> lives at flat index 1; |n_0=0, n_1=1> at index D
    D = 4
    s = fock.basis_state([1, 0], D)
    assert s.amps[1] == 1.0
    s = fock.basis_state([0, 1], D)
    assert s.amps[D] == 1.0


def test_project_vacuum_ancilla():
    state = fock.vacuum(2, 6)
    out, prob = fock.project_mode(state, 1, fock.fock_bra(0, 6))
    assert prob == pytest.approx(1.0, abs=1e-12)
    assert out.modes == 1
    np.testing.assert_allclose(out.amps, fock.vacuum(1, 6).amps)


def test_project_coherent_poisson():
    # Poisson photon statistics: P(1) for alpha=1 is e^{-1}
    D = 20
    coh = fock.apply_gate(fock.vacuum(1, D), displacement(1.0, D), [0])
    state = fock.vacuum(1, D).tensor(coh)  # coherent state is mode 1
    out, prob = fock.project_mode(state, 1, fock.fock_bra(1, D))
    assert prob == pytest.approx(np.exp(-1.0), abs=1e-10)
    assert out.norm_tracked == pytest.approx(prob)


def test_projector_completeness():
    # sum of Fock-outcome probabilities equals squared norm
    D = 8
    state = fock.apply_gate(fock.vacuum(2, D), displacement(0.7, D), [1])
    state = fock.apply_gate(state, displacement(0.3j, D), [0])
    total = sum(
        fock.project_mode(state, 1, fock.fock_bra(n, D))[1]
        for n in range(D)
        if state.marginal_population(1)[n] > 1e-16
    )
    assert total == pytest.approx(1.0, abs=1e-10)


def test_norm_tracked_non_increasing():
    D = 10
    coh = fock.apply_gate(fock.vacuum(1, D), displacement(0.8, D), [0])
    state = coh.tensor(coh)
    s1, p1 = fock.project_mode(state, 1, fock.fock_bra(0, D))
    assert s1.norm_tracked <= state.norm_tracked
    s1 = s1.normalize()
    assert s1.norm_tracked == pytest.approx(p1)


def test_impossible_outcome():
    state = fock.vacuum(2, 6)
    with pytest.raises(ImpossibleOutcomeError):
        fock.project_mode(state, 1, fock.fock_bra(3, 6))


def test_leakage_monitor_trips():
    D = 6
    mon = fock.LeakageMonitor(budget=1e-4)
    state = fock.vacuum(1, D)
    with pytest.raises(LeakageError):
        # alpha=3 at cutoff 6 pushes heavy population onto the top levels
        fock.apply_gate(state, displacement(3.0, D), [0], monitor=mon)


def test_leakage_monitor_quiet_for_mild_gates():
    mon = fock.LeakageMonitor(budget=1e-4)
    state = fock.vacuum(1, 20)
    state = fock.apply_gate(state, displacement(0.5, 20), [0], monitor=mon)
    assert mon.total < 1e-8


def test_marginal_population():
    D = 5
    state = fock.basis_state([2, 3], D)
    np.testing.assert_allclose(state.marginal_population(0), np.eye(D)[2])
    np.testing.assert_allclose(state.marginal_population(1), np.eye(D)[3])


@given(
    alpha_re=st.floats(-0.8, 0.8),
    alpha_im=st.floats(-0.8, 0.8),
    phi=st.floats(-np.pi, np.pi),
)
@settings(max_examples=25, deadline=None)
def test_unitary_gates_preserve_norm_property(alpha_re, alpha_im, phi):
    D = 16
    state = fock.vacuum(1, D)
    state = fock.apply_gate(state, displacement(alpha_re + 1j * alpha_im, D), [0])
    state = fock.apply_gate(state, rotation(phi, D), [0])
    assert state.norm() == pytest.approx(1.0, abs=1e-10)
