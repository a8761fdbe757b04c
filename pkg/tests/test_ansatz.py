import numpy as np
import pytest

from criticalcircuits import ansatz, numerics
from criticalcircuits.errors import NotUnitary


def test_zero_angles_give_identity():
    # the two CZ entanglers cancel when every rotation is trivial
    assert np.allclose(ansatz.build_unitary(np.zeros(8)), np.eye(4))


def test_build_unitary_is_unitary():
    rng = np.random.default_rng(1)
    for _ in range(10):
        U = ansatz.build_unitary(rng.uniform(-np.pi, np.pi, 8))
        assert numerics.assert_unitary(U, 1e-12)


def test_two_pi_shift_flips_global_sign_only():
    rng = np.random.default_rng(2)
    p = rng.uniform(-np.pi, np.pi, 8)
    p2 = p.copy()
    p2[3] += 2 * np.pi
    U, U2 = ansatz.build_unitary(p), ansatz.build_unitary(p2)
    # half-angle convention: same state, opposite global sign
    assert np.max(np.abs(U2 + U)) < 1e-12


def test_check_params_validation():
    with pytest.raises(ValueError):
        ansatz.check_params(np.zeros(7))
    with pytest.raises(ValueError):
        ansatz.check_params([0.0] * 7 + [np.inf])


def test_canonicalize_angles_range():
    q = ansatz.canonicalize_angles([3 * np.pi, -3 * np.pi, 0.1, np.pi])
    assert np.all(q > -np.pi) and np.all(q <= np.pi)
    assert abs(q[0] - np.pi) < 1e-12 and abs(q[1] - np.pi) < 1e-12


def test_mps_tensor_left_canonical():
    rng = np.random.default_rng(3)
    for _ in range(5):
        A = ansatz.mps_tensor(ansatz.build_unitary(rng.uniform(-np.pi, np.pi, 8)))
        gauge = A[0].conj().T @ A[0] + A[1].conj().T @ A[1]
        assert np.allclose(gauge, np.eye(2), atol=1e-12)


def test_mps_tensor_rejects_nonunitary():
    with pytest.raises(NotUnitary):
        ansatz.mps_tensor(np.ones((4, 4)))


def test_trotter_gate_expansion():
    h = ansatz.HamiltonianParams(1.0, 0.7)
    H2 = ansatz.two_site_hamiltonian(h)
    assert np.allclose(H2, H2.conj().T)
    dt = 1e-4
    W = ansatz.trotter_gate(h, dt)
    assert numerics.assert_unitary(W, 1e-12)
    assert np.max(np.abs(W - (np.eye(4) + 1j * dt * H2))) < 2 * dt**2 * np.linalg.norm(H2) ** 2


def test_second_order_pair():
    h = ansatz.HamiltonianParams(1.0, 0.7)
    We, Wo = ansatz.second_order_trotter_gate_pair(h, 0.2)
    assert np.allclose(Wo @ Wo, We, atol=1e-12)
