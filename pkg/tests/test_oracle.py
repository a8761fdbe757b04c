"""Ground-truth checks: closed-form values first, then cross-validation of
the free-fermion formulas against brute-force diagonalization."""

import numpy as np
import pytest

from criticalcircuits import ansatz, imps, oracle
from criticalcircuits.errors import TooLarge


def test_energy_density_closed_forms():
    assert abs(oracle.exact_energy_density(ansatz.HamiltonianParams(1.0, 0.0)) + 1.0) < 1e-10
    assert abs(
        oracle.exact_energy_density(ansatz.HamiltonianParams(1.0, 1.0)) + 4.0 / np.pi
    ) < 1e-10
    # deep paramagnet: E -> -(g + J^2 / 4g)
    e = oracle.exact_energy_density(ansatz.HamiltonianParams(1.0, 50.0))
    assert abs(e + 50.0 + 1.0 / 200.0) < 1e-5


def test_dispersion_endpoints():
    h = ansatz.HamiltonianParams(1.0, 0.3)
    assert abs(oracle.dispersion(0.0, h) - 2 * abs(1.0 - 0.3)) < 1e-12
    assert abs(oracle.dispersion(np.pi, h) - 2 * (1.0 + 0.3)) < 1e-12


def test_dqpt_cusp_times_frozen():
    assert abs(oracle.dqpt_momentum(1.5, 0.2) - np.arccos(1.3 / 1.7)) < 1e-12
    assert abs(oracle.dqpt_cusp_time(1.5, 0.2) - 0.916657401300382) < 1e-9
    assert abs(oracle.dqpt_cusp_time(1.5, 0.2, order=2) - 2.749972203901146) < 1e-9
    # no critical mode when the quench stays on one side of g = J
    assert oracle.dqpt_momentum(1.5, 1.2) is None
    assert oracle.dqpt_cusp_time(1.5, 1.2) is None


def test_rate_function_trivial_cases():
    assert oracle.exact_loschmidt_rate(1.5, 0.2, 1.0, 0.0) == 0.0
    assert oracle.exact_loschmidt_rate(0.7, 0.7, 1.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        oracle.exact_loschmidt_rate(1.5, 0.2, 1.0, -0.1)


def test_rate_function_matches_brute_force():
    # the convention gate: formula vs Krylov propagation on a finite ring
    for t in (0.3, 0.5):
        ff = oracle.exact_loschmidt_rate(1.5, 0.2, 1.0, t)
        ed = oracle.ed_loschmidt_rate(10, 1.5, 0.2, 1.0, t)
        assert abs(ff - ed) < 5e-3


def test_exact_diag_small():
    spec = oracle.exact_diag_small(2, ansatz.HamiltonianParams(1.0, 0.0), boundary="open")
    assert np.allclose(np.sort(spec.eigenvalues), [-1.0, -1.0, 1.0, 1.0], atol=1e-12)
    with pytest.raises(TooLarge):
        oracle.exact_diag_small(13, ansatz.HamiltonianParams())


def test_ed_rate_extrapolated_improves_on_smallest_size():
    t = 0.5
    truth = oracle.exact_loschmidt_rate(1.5, 0.2, 1.0, t)
    small = oracle.ed_loschmidt_rate(6, 1.5, 0.2, 1.0, t)
    extr = oracle.ed_rate_extrapolated(1.5, 0.2, 1.0, t)
    assert abs(extr - truth) < abs(small - truth)
    assert abs(extr - truth) < 1e-2


def test_dense_variational_optimum_is_variational():
    h = ansatz.HamiltonianParams(1.0, 1.0)
    p, e = oracle.dense_variational_optimum(h, n_starts=10, seed=0)
    exact = oracle.exact_energy_density(h)
    assert e >= exact - 1e-9
    assert (e - exact) / abs(exact) < 5e-3  # D=2 optimum sits ~0.3% above exact at g=1


def test_dense_lambda_is_two_site_value():
    rng = np.random.default_rng(5)
    p = rng.uniform(-np.pi, np.pi, 8)
    pp = rng.uniform(-np.pi, np.pi, 8)
    A = ansatz.mps_tensor(ansatz.build_unitary(p))
    B = ansatz.mps_tensor(ansatz.build_unitary(pp))
    lam1 = np.max(np.abs(np.linalg.eigvals(imps.transfer_matrix(A, B))))
    assert abs(oracle.dense_lambda(p, pp, np.eye(4)) - lam1**2) < 1e-12


def test_dense_tdvp_update_zero_step():
    p = np.linspace(-1, 1, 8)
    out = oracle.dense_tdvp_update(p, ansatz.HamiltonianParams(1.0, 0.2), 0.0)
    assert np.array_equal(out, p)
