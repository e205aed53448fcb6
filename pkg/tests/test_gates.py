import numpy as np
import pytest
from scipy.linalg import expm

from cvqnn import fock, gates


def ladder(D):
    a = np.zeros((D, D), dtype=complex)
    for n in range(1, D):
        a[n - 1, n] = np.sqrt(n)
    return a


def test_displacement_zero_is_identity():
    g = gates.displacement(0.0, 8)
    np.testing.assert_allclose(g.matrix, np.eye(8), atol=1e-14)


def test_displacement_mean_q():
    D = 20
    state = fock.apply_gate(fock.vacuum(1, D), gates.displacement(1.0, D), [0])
    q = fock.make_operators(D, 2.0).q
    mean = np.real(state.amps.conj() @ (q @ state.amps))
    assert mean == pytest.approx(2.0, abs=1e-8)  # sqrt(2 hbar) Re alpha


def test_displacement_inverse_product():
    # matrix-product oracle: D(a) D(-a) = I
    D = 20
    prod = gates.displacement(0.8, D).matrix @ gates.displacement(-0.8, D).matrix
    sub = prod[: D - 2, : D - 2]
    assert np.abs(sub - np.eye(D - 2)).max() < 1e-8


def test_displacement_group_law():
    # D(a)D(b) = exp(i Im(a b*)) D(a+b) on the low-Fock block
    D = 22
    a, b = 0.4 + 0.1j, -0.2 + 0.3j
    lhs = gates.displacement(a, D).matrix @ gates.displacement(b, D).matrix
    rhs = np.exp(1j * np.imag(a * np.conj(b))) * gates.displacement(a + b, D).matrix
    assert np.abs(lhs[:10, :10] - rhs[:10, :10]).max() < 1e-8


def test_squeezing_zero_identity():
    np.testing.assert_allclose(gates.squeezing(0.0, cutoff=10).matrix, np.eye(10), atol=1e-14)


def test_squeezed_vacuum_parity():
    D = 12
    state = fock.apply_gate(fock.vacuum(1, D), gates.squeezing(0.5, cutoff=D), [0])
    assert np.abs(state.amps[1::2]).max() < 1e-12


def test_rotation_diagonal():
    D = 7
    g = gates.rotation(0.9, D)
    np.testing.assert_allclose(np.diag(g.matrix), np.exp(1j * 0.9 * np.arange(D)), atol=1e-14)


def test_rotation_group_law():
    D = 9
    lhs = gates.rotation(0.4, D).matrix @ gates.rotation(1.1, D).matrix
    rhs = gates.rotation(1.5, D).matrix
    assert np.abs(lhs - rhs).max() < 1e-12


def test_beamsplitter_5050():
    D = 5
    state = fock.apply_gate(fock.basis_state([1, 0], D), gates.beamsplitter(np.pi / 4, 0.0, D), [0, 1])
    amp10 = state.amps[1]  # |1,0>
    amp01 = state.amps[D]  # |0,1>
    assert amp10 == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert amp01 == pytest.approx(1 / np.sqrt(2), abs=1e-12)


def test_beamsplitter_matches_dense_exponential():
    # oracle: dense expm of the same generator
    D = 8
    theta, phi = 0.37, 0.6
    a = ladder(D)
    ad = a.conj().T
    gen = theta * (np.exp(1j * phi) * np.kron(a, ad) - np.exp(-1j * phi) * np.kron(ad, a))
    np.testing.assert_allclose(
        gates.beamsplitter(theta, phi, D).matrix, expm(gen), atol=1e-12
    )


def test_two_mode_squeezer_vacuum_element():
    # analytic two-mode-squeezed-vacuum oracle: <00|S2(r)|00> = 1/cosh r
    D = 15
    g = gates.two_mode_squeezer(0.8, 0.0, D)
    assert g.matrix[0, 0] == pytest.approx(1 / np.cosh(0.8), abs=1e-10)


def test_two_mode_squeezer_matches_dense_exponential():
    D = 7
    r, phi = 0.45, -0.3
    a = ladder(D)
    ad = a.conj().T
    gen = r * (np.exp(1j * phi) * np.kron(ad, ad) - np.exp(-1j * phi) * np.kron(a, a))
    np.testing.assert_allclose(
        gates.two_mode_squeezer(r, phi, D).matrix, expm(gen), atol=1e-12
    )


def test_unitarity_within_truncation():
    # ||G+G - I|| on the low block for parameter magnitudes <= 1.5
    D = 12
    block = D - 2
    for g in (
        gates.displacement(1.5, D),
        gates.squeezing(1.5, 0.3, D),
        gates.rotation(1.5, D),
    ):
        dev = g.matrix.conj().T @ g.matrix - np.eye(D)
        assert np.abs(dev[:block, :block]).max() < 1e-8
    for g in (gates.beamsplitter(1.5, 0.2, D), gates.two_mode_squeezer(1.5, 0.0, D)):
        dev = g.matrix.conj().T @ g.matrix - np.eye(D * D)
        assert np.abs(dev).max() < 1e-10  # exact exponentials are fully unitary


def test_constructors_deterministic():
    a = gates.squeezing(0.7, 0.1, 10).matrix
    b = gates.squeezing(0.7, 0.1, 10).matrix
    assert a is b or np.array_equal(a, b)


def test_cx_zero_identity():
    np.testing.assert_allclose(gates.cx_direct(0.0, 6).matrix, np.eye(36), atol=1e-14)
    np.testing.assert_allclose(gates.cx_decomposed(0.0, 6).matrix, np.eye(36), atol=1e-14)


def test_cx_heisenberg_shift():
    # <q_anc> after CX(0.5) on D(1)|0> (x) |0| is 0.5 * 2.0 = 1.0 at hbar=2
    D = 15
    primary = fock.apply_gate(fock.vacuum(1, D), gates.displacement(1.0, D), [0])
    state = primary.tensor(fock.vacuum(1, D))
    state = fock.apply_gate(state, gates.cx_direct(0.5, D), [0, 1])
    q = fock.make_operators(D, 2.0).q
    t = state.amps.reshape(D, D)  # axes (mode1, mode0)
    qanc = np.real(np.einsum("ij,ik,kj->", t.conj(), q, t))
    assert qanc == pytest.approx(1.0, abs=1e-8)


def test_cx_inverse_product():
    # matrix-product oracle: CX(s) CX(-s) = I (exact for the unitary build)
    D = 15
    prod = gates.cx_direct(0.7, D).matrix @ gates.cx_direct(-0.7, D).matrix
    assert np.abs(prod - np.eye(D * D)).max() < 1e-8


def test_cx_matches_dense_exponential():
    D = 8
    a = ladder(D)
    ad = a.conj().T
    gen = (0.6 / 2.0) * np.kron(a + ad, ad - a)
    np.testing.assert_allclose(gates.cx_direct(0.6, D).matrix, expm(gen), atol=1e-12)


@pytest.mark.parametrize("s", [0.25, -0.25, 0.5, -0.5, 1.0, -1.0])
def test_cx_decomposition_equivalence(s):
    # cx_direct (converged) as the oracle, compared on levels < D-5 at D=20
    D = 20
    keep = D - 5
    direct = gates.cx_direct(s, D, converged=True).matrix
    dec = gates.cx_decomposed(s, D).matrix
    idx = [m * D + n for m in range(keep) for n in range(keep)]
    sub = np.ix_(idx, idx)
    assert np.abs(direct[sub] - dec[sub]).max() < 1e-3


def test_cx_decomposition_equivalence_smaller_cutoff():
    # levels < 10 at D=15 per the operation contract
    D, keep, s = 15, 10, 0.5
    direct = gates.cx_direct(s, D, converged=True).matrix
    dec = gates.cx_decomposed(s, D).matrix
    idx = [m * D + n for m in range(keep) for n in range(keep)]
    sub = np.ix_(idx, idx)
    assert np.abs(direct[sub] - dec[sub]).max() < 1e-3


def test_cx_decomposition_params_relation():
    # tan(2 theta) = sinh(r) = s/2, same splitter on both sides
    for s in (0.3, -0.8, 1.2):
        theta, r = gates.cx_decomposition_params(s)
        assert np.tan(2 * theta) == pytest.approx(s / 2, abs=1e-12)
        assert np.sinh(r) == pytest.approx(s / 2, abs=1e-12)
