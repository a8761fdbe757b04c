import numpy as np
import pytest

from criticalcircuits import ansatz, imps, noise as nz
from criticalcircuits.optimize import SpsaConfig


def _random_state(seed):
    rng = np.random.default_rng(seed)
    p = rng.uniform(-np.pi, np.pi, 8)
    U = ansatz.build_unitary(p)
    return p, U, ansatz.mps_tensor(U)


def test_self_transfer_dominant_eigenvalue_is_one():
    for seed in range(5):
        _, _, A = _random_state(seed)
        E = imps.transfer_matrix(A, A)
        assert abs(np.max(np.abs(np.linalg.eigvals(E))) - 1.0) < 1e-12


def test_right_density_is_fixed_point():
    _, _, A = _random_state(11)
    rho = imps.right_density(imps.transfer_matrix(A, A))
    assert abs(np.trace(rho) - 1.0) < 1e-12
    assert np.allclose(rho, rho.conj().T, atol=1e-12)
    assert np.allclose(imps.apply_transfer_layer(A, rho), rho, atol=1e-10)


def test_environment_from_eigvec_consistency():
    _, U, A = _random_state(12)
    env = imps.environment_from_eigvec(imps.transfer_matrix(A, A))
    assert np.allclose(env.V @ env.V.conj().T, np.eye(4), atol=1e-10)
    assert np.allclose(imps.bond_state_from_V(env.V), env.rho, atol=1e-10)
    res = imps.fixed_point_residual(U, env.V, "exact")
    assert res.distance < 1e-10


def test_expect_energy_matches_dense_contraction():
    _, U, A = _random_state(13)
    env = imps.environment_from_eigvec(imps.transfer_matrix(A, A))
    h = ansatz.HamiltonianParams(1.0, 0.7)
    e_circ = imps.expect_energy(U, env.V, h, "exact")
    e_dense = imps.energy_density_dense(A, env.rho, h)
    assert abs(e_circ - e_dense) < 1e-10


def test_lambda_estimate_exact_equals_dense():
    for seed in (20, 21):
        _, UA, A = _random_state(seed)
        _, UB, B = _random_state(seed + 100)
        lam = np.max(np.abs(np.linalg.eigvals(imps.transfer_matrix(A, B))))
        for n in (2, 4, 8):
            assert abs(imps.lambda_estimate(UA, UB, n) - lam) < 1e-12


def test_overlap_echo_is_one_for_identical_states():
    _, U, _ = _random_state(30)
    model = nz.NoiseModel(shots=200_000, seed=4)
    rng = model.rng()
    for n in (1, 3):
        est = imps.overlap_power_estimate(U, U, n, mode="sampled", noise=model, rng=rng)
        assert abs(est.C_n / est.echo - 1.0) < 5e-3


def test_loschmidt_rate_zero_for_same_state():
    _, U, _ = _random_state(31)
    assert imps.loschmidt_rate(U, U) < 1e-12


def test_overlap_power_estimate_validation():
    _, U, _ = _random_state(32)
    with pytest.raises(ValueError):
        imps.overlap_power_estimate(U, U, 0)
    with pytest.raises(ValueError):
        imps.overlap_power_estimate(U, U, 2, mode="sampled")  # no noise model


def test_sampled_estimates_deterministic_given_seed():
    _, UA, _ = _random_state(33)
    _, UB, _ = _random_state(34)
    model = nz.NoiseModel(global_depol=0.1, shots=50_000, seed=9)
    a = imps.lambda_estimate(UA, UB, 3, mode="sampled", noise=model)
    b = imps.lambda_estimate(UA, UB, 3, mode="sampled", noise=model)
    assert a == b


def test_solve_environment_variational_reaches_eigvec_solution():
    _, U, A = _random_state(35)
    env = imps.solve_environment_variational(U, SpsaConfig(max_iters=1500, seed=0))
    assert env.converged
    assert env.distance <= 1e-5
    ref = imps.environment_from_eigvec(imps.transfer_matrix(A, A))
    h = ansatz.HamiltonianParams(1.0, 1.0)
    e_var = imps.expect_energy(U, env.V, h, "exact")
    e_ref = imps.energy_density_dense(A, ref.rho, h)
    assert abs(e_var - e_ref) < 1e-3
