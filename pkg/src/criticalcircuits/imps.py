"""Transfer matrices, environments, energy observables, overlap estimation.

The state is an infinite staircase of one two-qubit unitary U; everything
observable reduces to the 4x4 transfer matrix E = sum_s kron(A^s, conj(B^s))
and its principal eigenpair. The half-infinite remainder of the chain enters
local circuits through an environment unitary V whose bond-qubit marginal is
the right fixed point of E.

Circuit conventions (statevector helpers): qubit 0 is the most significant
bit of the flat statevector index; gates act on (first, second) qubit with
row index 2*s_first + s_second.
"""

from dataclasses import dataclass

import numpy as np

from . import ansatz, noise as noise_mod, numerics
from .errors import DegenerateDominantEigenvalue, EchoTooSmall, NotConverged, NotUnitary
from .kernels import apply_two_qubit, cap_amp, mixed_transfer

LARGE_RATE = 50.0

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_P00 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)


@dataclass
class Environment:
    """Environment unitary V and the bond density matrix it encodes.

    rho is the partial trace over the first qubit of V|00><00|V^dag.
    """

    V: np.ndarray
    rho: np.ndarray


@dataclass
class VariationalEnvironment(Environment):
    distance: float = 0.0
    converged: bool = True
    history: list = None


@dataclass
class FixedPointResidual:
    trace_rho_L_sq: float
    trace_rho_R_sq: float
    trace_cross: float

    @property
    def distance(self):
        return self.trace_rho_L_sq + self.trace_rho_R_sq - 2.0 * self.trace_cross


@dataclass
class OverlapEstimate:
    n: int
    C_n: float
    lambda_ratio: float | None
    echo: float


def transfer_matrix(ket, bra):
    """Mixed transfer matrix E_{(ii'),(jj')} = sum_s A^s_{ij} conj(B^s_{i'j'})."""
    return mixed_transfer(np.asarray(ket, dtype=complex), np.asarray(bra, dtype=complex))


def principal_eigen(E):
    """Dominant eigenvalue with left/right eigenvectors reshaped to 2x2.

    The right vector is rescaled to unit trace (and Hermitized when it is
    Hermitian up to noise, as for self-overlaps). Raises
    DegenerateDominantEigenvalue when the top two moduli are closer than 1e-9.
    """
    spec = numerics.eig_dense(E)
    w = spec.eigenvalues
    if len(w) > 1 and abs(w[0]) - abs(w[1]) < 1e-9:
        raise DegenerateDominantEigenvalue(
            f"|lambda_1| - |lambda_2| = {abs(w[0]) - abs(w[1]):.2e}"
        )
    lam = w[0]
    left = spec.left_vectors[0].reshape(2, 2)
    right = spec.right_vectors[0].reshape(2, 2)
    tr = np.trace(right)
    if abs(tr) > 1e-10:
        right = right / tr
        if np.max(np.abs(right - right.conj().T)) < 1e-8 * max(np.max(np.abs(right)), 1.0):
            right = 0.5 * (right + right.conj().T)
    return lam, left, right


def right_density(E_self):
    """PSD, trace-1 right fixed point of a self-overlap transfer matrix.

    A degenerate dominant eigenvalue (symmetry-broken states carry one fixed
    point per sector) is handled by power iteration from the maximally mixed
    state, which converges to the symmetric mixture of sector fixed points.
    """
    try:
        lam, _, rho = principal_eigen(E_self)
    except DegenerateDominantEigenvalue:
        rho = 0.5 * np.eye(2, dtype=complex)
        for _ in range(200):
            rho = (E_self @ rho.reshape(4)).reshape(2, 2)
            rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    return rho


def environment_from_eigvec(E_self):
    """Closed-form environment: purify the dense right fixed point.

    V|00> = sum_i sqrt(p_i) |u_i>|u_i> with rho = sum_i p_i |u_i><u_i|;
    the remaining columns are completed by QR.
    """
    rho = right_density(E_self)
    p, u = np.linalg.eigh(rho)
    p = np.clip(p[::-1], 0.0, None)
    u = u[:, ::-1]
    phi = sum(np.sqrt(p[i]) * np.kron(u[:, i], u[:, i]) for i in range(2))
    phi = phi / np.linalg.norm(phi)
    basis = np.concatenate([phi[:, None], np.eye(4, dtype=complex)], axis=1)
    Q, _ = np.linalg.qr(basis)
    phase = np.vdot(Q[:, 0], phi)
    Q[:, 0] *= phase / abs(phase)
    return Environment(V=Q, rho=rho)


def bond_state_from_V(V):
    """Partial trace over the first qubit of V|00><00|V^dag."""
    phi = np.asarray(V, dtype=complex)[:, 0]
    return np.outer(phi[0:2], phi[0:2].conj()) + np.outer(phi[2:4], phi[2:4].conj())


def apply_transfer_layer(A, rho):
    """One staircase layer acting on a bond density matrix."""
    return A[0] @ rho @ A[0].conj().T + A[1] @ rho @ A[1].conj().T


def energy_density_dense(A, rho, h):
    """Per-site J <Z Z> + g <X> contracted directly from (A, rho)."""
    zz = 0.0
    for s in (0, 1):
        for t in (0, 1):
            M = A[t] @ A[s]
            zz += (1 - 2 * s) * (1 - 2 * t) * np.trace(M @ rho @ M.conj().T).real
    x = 2.0 * np.trace(A[0] @ rho @ A[1].conj().T).real
    return h.J * zz + h.g * x


def _check_unitary(*mats):
    for M in mats:
        if not numerics.assert_unitary(np.asarray(M, dtype=complex), 1e-10):
            raise NotUnitary("matrix fails the 1e-10 unitarity check")


def _init_state(nq):
    psi = np.zeros(2**nq, dtype=complex)
    psi[0] = 1.0
    return psi


def _marginal(psi, measured, nq):
    """Outcome distribution over the listed qubits (in order)."""
    pr = np.abs(psi.reshape((2,) * nq)) ** 2
    keep = tuple(q for q in range(nq) if q not in measured)
    marg = pr.sum(axis=keep) if keep else pr
    # axes of marg follow sorted(measured); permute into the listed order
    srt = sorted(measured)
    marg = np.transpose(marg, axes=[srt.index(q) for q in measured])
    return marg.reshape(-1)


def _energy_circuit_dists(U, V):
    """(ZZ-basis, X-basis) outcome distributions over the two observable sites."""
    nq = 4  # [aux, site1, site2, bond]
    psi = _init_state(nq)
    psi = apply_two_qubit(psi, V, 0, 3, nq)
    psi = apply_two_qubit(psi, U, 1, 3, nq)
    psi = apply_two_qubit(psi, U, 2, 3, nq)
    dist_z = _marginal(psi, (1, 2), nq)
    psi_x = apply_two_qubit(psi, np.kron(_H, np.eye(2)), 1, 3, nq)
    dist_x = _marginal(psi_x, (1, 2), nq)
    return dist_z, dist_x


_SIGN_ZZ = np.array([1.0, -1.0, -1.0, 1.0])
_SIGN_FIRST = np.array([1.0, 1.0, -1.0, -1.0])


def expect_energy(U, V, h, mode="exact", noise=None, rng=None, mitigate=False):
    """Per-site energy from the finite circuit: V on the bond, two staircase
    layers, Z(x)Z and X measurements on the two hosted sites.

    X is measured on the first hosted site, where left canonicity makes the
    circuit value equal the dense (A, rho) contraction exactly. With
    mitigate=True the readout confusion is inverted and both expectations are
    divided by the white-noise survival factor measured from an echo circuit
    of the same depth (traceless observables shrink by exactly 1 - p under
    the white-noise channel).
    """
    _check_unitary(U, V)
    dist_z, dist_x = _energy_circuit_dists(np.asarray(U, complex), np.asarray(V, complex))
    if mode == "exact":
        zz = float(_SIGN_ZZ @ dist_z)
        x = float(_SIGN_FIRST @ dist_x)
        return h.J * zz + h.g * x
    if noise is None:
        raise ValueError("sampled mode needs a NoiseModel")
    rng = noise.rng() if rng is None else rng
    fz = noise_mod.measured_frequencies(dist_z, noise, n_gates=3, rng=rng, mitigate=mitigate)
    fx = noise_mod.measured_frequencies(dist_x, noise, n_gates=3, rng=rng, mitigate=mitigate)
    zz = float(_SIGN_ZZ @ fz)
    x = float(_SIGN_FIRST @ fx)
    if mitigate:
        ideal = np.zeros(4)
        ideal[0] = 1.0
        echo = float(
            noise_mod.measured_frequencies(ideal, noise, n_gates=3, rng=rng, mitigate=True)[0]
        )
        # echo reads (1 - p) + p / 4; recover the survival factor 1 - p
        scale = max((echo - 0.25) / 0.75, 1e-2)
        zz /= scale
        x /= scale
    return h.J * zz + h.g * x


def _swap_test_overlap(prep_gates, nq, bond_a, bond_b, mode, noise, rng):
    """Destructive swap test between the bond qubits of two prepared copies.

    Returns the estimate of Tr(rho_a rho_b) = <(-1)^{ab}> over the measured
    pair after CNOT(bond_a -> bond_b) and H on bond_a.
    """
    psi = _init_state(nq)
    for gate, qa, qb in prep_gates:
        psi = apply_two_qubit(psi, gate, qa, qb, nq)
    psi = apply_two_qubit(psi, _CNOT, bond_a, bond_b, nq)
    psi = apply_two_qubit(psi, np.kron(_H, np.eye(2)), bond_a, bond_b, nq)
    dist = _marginal(psi, (bond_a, bond_b), nq)
    signs = np.array([1.0, 1.0, 1.0, -1.0])
    if mode == "exact":
        return float(signs @ dist)
    f = noise_mod.measured_frequencies(dist, noise, n_gates=len(prep_gates) + 1, rng=rng)
    return float(signs @ f)


def fixed_point_residual(U, V, mode="exact", noise=None, rng=None):
    """Swap-test terms of Tr(rho_L - rho_R)^2.

    rho_R is the bond state prepared by V alone; rho_L adds one staircase
    layer of U. Exact mode contracts densely; sampled mode runs the three
    destructive swap tests through the noise model.
    """
    _check_unitary(U, V)
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if mode == "exact":
        rho_r = bond_state_from_V(V)
        A = ansatz.mps_tensor(U)
        rho_l = apply_transfer_layer(A, rho_r)
        return FixedPointResidual(
            trace_rho_L_sq=float(np.trace(rho_l @ rho_l).real),
            trace_rho_R_sq=float(np.trace(rho_r @ rho_r).real),
            trace_cross=float(np.trace(rho_l @ rho_r).real),
        )
    if noise is None:
        raise ValueError("sampled mode needs a NoiseModel")
    rng = noise.rng() if rng is None else rng
    # copy layouts: L-copy = [aux, site, bond], R-copy = [aux, bond]
    ll = _swap_test_overlap(
        [(V, 0, 2), (U, 1, 2), (V, 3, 5), (U, 4, 5)], 6, 2, 5, mode, noise, rng
    )
    rr = _swap_test_overlap([(V, 0, 1), (V, 2, 3)], 4, 1, 3, mode, noise, rng)
    lr = _swap_test_overlap([(V, 0, 2), (U, 1, 2), (V, 3, 4)], 5, 2, 4, mode, noise, rng)
    return FixedPointResidual(trace_rho_L_sq=ll, trace_rho_R_sq=rr, trace_cross=lr)


def solve_environment_variational(U, cfg, mode="exact", noise=None):
    """Fit the environment unitary by minimizing the fixed-point residual
    over the 8 angles of a V ansatz (same circuit layout as the state).

    Exact mode polishes the stochastic optimum with a deterministic simplex
    step. Returns a VariationalEnvironment carrying the final residual and a
    convergence flag (target residual = cfg.tol).
    """
    from .optimize import spsa_minimize

    _check_unitary(U)
    rng = None if noise is None else noise.rng()

    def cost(pv):
        Vm = ansatz.build_unitary(pv)
        return fixed_point_residual(U, Vm, mode, noise, rng).distance

    theta0 = np.zeros(8)
    best, best_cost, history = spsa_minimize(cost, theta0, cfg)
    if mode == "exact":
        # a small transfer-matrix gap turns the residual valley into a long
        # narrow trough: a residual of 1e-5 can still mix in a subleading
        # mode with O(1) weight, so polish hard and restart until the
        # residual is at numerical noise
        from scipy.optimize import minimize

        srng = np.random.default_rng(cfg.seed + 91)
        starts = [best] + [srng.uniform(-np.pi, np.pi, 8) for _ in range(5)]
        for x0 in starts:
            res = minimize(
                cost, x0, method="Nelder-Mead",
                options={"maxiter": 8000, "fatol": 1e-18, "xatol": 1e-12},
            )
            if res.fun < best_cost:
                best, best_cost = res.x, float(res.fun)
            if best_cost <= 1e-12:
                break
    Vm = ansatz.build_unitary(best)
    target = getattr(cfg, "tol", 1e-6) or 1e-6
    return VariationalEnvironment(
        V=Vm,
        rho=bond_state_from_V(Vm),
        distance=float(best_cost),
        converged=bool(best_cost <= target),
        history=history,
    )


def _overlap_amp(E, n, fp):
    if fp == "zero":
        return cap_amp(E, _P00, n)
    if fp == "exact":
        lam = np.max(np.abs(np.linalg.eigvals(E)))
        return lam**n
    raise ValueError(f"unknown fixed-point approximation {fp!r}")


def _overlap_zero_cap_dist(U_A, U_B, n):
    """Full outcome distribution of the (n+1)-qubit overlap circuit."""
    nq = n + 1
    psi = _init_state(nq)
    for k in range(n):
        psi = apply_two_qubit(psi, U_A, k, nq - 1, nq)
    Bd = U_B.conj().T
    for k in reversed(range(n)):
        psi = apply_two_qubit(psi, Bd, k, nq - 1, nq)
    return np.abs(psi) ** 2


def overlap_power_estimate(U_A, U_B, n, fp="zero", mode="exact", noise=None, rng=None):
    """C_n = sqrt(all-zeros probability) of the n-layer overlap circuit.

    fp="zero" caps the bond with |0><0| (the measurable circuit); fp="exact"
    caps it with the dense right eigenvector, for which the ratio
    C_n / C_{n-1} equals |lambda| at every order. Sampled mode pushes the
    outcome distribution through depolarization, finite shots and readout
    confusion, and returns the echo C_n(U_A, U_A) measured the same way.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_unitary(U_A, U_B)
    U_A = np.asarray(U_A, dtype=complex)
    U_B = np.asarray(U_B, dtype=complex)
    A = ansatz.mps_tensor(U_A)
    B = ansatz.mps_tensor(U_B)
    E = transfer_matrix(A, B)
    amp_n = _overlap_amp(E, n, fp)
    amp_prev = _overlap_amp(E, n - 1, fp) if n >= 1 else None
    if mode == "exact":
        C = min(abs(amp_n), 1.0)
        prev = abs(amp_prev)
        ratio = C / prev if prev > 1e-300 else None
        return OverlapEstimate(n=n, C_n=C, lambda_ratio=ratio, echo=1.0)
    if noise is None:
        raise ValueError("sampled mode needs a NoiseModel")
    rng = noise.rng() if rng is None else rng
    m = n + 1
    n_gates = 2 * n

    def observed(dist):
        f = noise_mod.measured_frequencies(dist, noise, n_gates=n_gates, rng=rng)
        return float(np.sqrt(max(f[0], 0.0)))

    if fp == "zero":
        dist = _overlap_zero_cap_dist(U_A, U_B, n)
        dist_echo = _overlap_zero_cap_dist(U_A, U_A, n)
    else:
        # emulation of the exact-cap circuit at probability level
        dist = np.full(2**m, (1.0 - abs(amp_n) ** 2) / (2**m - 1))
        dist[0] = abs(amp_n) ** 2
        dist_echo = np.zeros(2**m)
        dist_echo[0] = 1.0
    C = observed(dist)
    echo = observed(dist_echo)
    return OverlapEstimate(n=n, C_n=C, lambda_ratio=None, echo=echo)


def lambda_estimate(U_A, U_B, n, mode="exact", noise=None, rng=None):
    """Depolarization-rescaled power-method ratio
    (C_n / echo_n) / (C_{n-1} / echo_{n-1}), estimating |lambda|.

    Uses the exact-eigenvector bond cap, for which the noiseless ratio equals
    |lambda| at every order.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = (noise.rng() if noise is not None else None) if rng is None else rng
    hi = overlap_power_estimate(U_A, U_B, n, fp="exact", mode=mode, noise=noise, rng=rng)
    lo = overlap_power_estimate(U_A, U_B, n - 1, fp="exact", mode=mode, noise=noise, rng=rng)
    if mode != "exact":
        floor = 10.0 / noise.shots
        if hi.echo**2 < floor or lo.echo**2 < floor:
            raise EchoTooSmall("echo probability below 10/shots")
    return (hi.C_n / hi.echo) / (lo.C_n / lo.echo)


def loschmidt_rate(U_0, U_t):
    """-log |lambda| of the mixed transfer matrix; capped at LARGE_RATE.

    Complex-conjugate dominant pairs (real transfer matrices) share a modulus
    and are accepted; any other near-degeneracy raises.
    """
    _check_unitary(U_0, U_t)
    A = ansatz.mps_tensor(np.asarray(U_0, dtype=complex))
    B = ansatz.mps_tensor(np.asarray(U_t, dtype=complex))
    w = np.linalg.eigvals(transfer_matrix(A, B))
    order = np.argsort(-np.abs(w))
    w = w[order]
    if abs(w[0]) - abs(w[1]) < 1e-9 and abs(w[0] - np.conj(w[1])) > 1e-8:
        raise DegenerateDominantEigenvalue("dominant moduli coincide (non-conjugate pair)")
    lam = abs(w[0])
    if lam < np.exp(-LARGE_RATE):
        return LARGE_RATE
    return float(min(-np.log(lam), LARGE_RATE))
