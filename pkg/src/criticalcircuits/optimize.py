"""SPSA stochastic optimization and the quasi-adiabatic groundstate sweep."""

from dataclasses import dataclass, replace

import numpy as np

from . import ansatz
from .kernels import sweep_terms


@dataclass
class SpsaConfig:
    a: float = 0.2
    c: float = 0.1
    A: float | None = None  # stability offset; defaults to 0.01 * max_iters
    alpha: float = 0.602
    gamma: float = 0.101
    max_iters: int = 2000
    tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if self.a <= 0 or self.c <= 0:
            raise ValueError("a and c must be positive")
        if not 0 < self.gamma < self.alpha <= 1:
            raise ValueError("need 0 < gamma < alpha <= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SweepSchedule:
    g_values: tuple
    iters_per_stage: int = 4000
    J: float = 1.0

    def __post_init__(self):
        if len(self.g_values) == 0:
            raise ValueError("schedule must contain at least one g value")
        if not np.all(np.isfinite(self.g_values)):
            raise ValueError("g values must be finite")


@dataclass
class SweepStage:
    g: float
    theta_U: np.ndarray
    theta_V: np.ndarray
    energy: float
    residual: float
    converged: bool


def spsa_minimize(cost, theta0, cfg):
    """Two-measurement simultaneous perturbation stochastic approximation.

    At iteration k a Rademacher direction Delta is drawn, the gradient is
    estimated from cost(theta +- c_k Delta), and theta moves against it with
    gain a_k = a / (A + k + 1)^alpha, c_k = c / (k + 1)^gamma. Returns the
    best parameters seen, their cost, and the per-iteration history. Stops
    early when the running best improves by less than cfg.tol over a
    trailing window of 100 iterations. Deterministic given cfg.seed.
    """
    rng = np.random.default_rng(cfg.seed)
    theta = np.array(theta0, dtype=float)
    n = theta.size
    A = 0.01 * cfg.max_iters if cfg.A is None else cfg.A
    best = theta.copy()
    best_cost = float(cost(theta))
    history = []
    window = []
    for k in range(cfg.max_iters):
        ck = cfg.c / (k + 1) ** cfg.gamma
        ak = cfg.a / (A + k + 1) ** cfg.alpha
        delta = rng.integers(0, 2, size=n) * 2.0 - 1.0
        cp = float(cost(theta + ck * delta))
        cm = float(cost(theta - ck * delta))
        ghat = (cp - cm) / (2.0 * ck) * delta
        if cp < best_cost:
            best, best_cost = theta + ck * delta, cp
        if cm < best_cost:
            best, best_cost = theta - ck * delta, cm
        theta = theta - ak * ghat
        history.append((k, 0.5 * (cp + cm), best_cost))
        window.append(best_cost)
        if len(window) > 100:
            window.pop(0)
            if window[0] - best_cost < cfg.tol:
                break
    final = float(cost(theta))
    if final < best_cost:
        best, best_cost = theta, final
    return np.asarray(best, dtype=float), best_cost, history


def adiabatic_sweep(schedule, cfg, trace_weight=10.0, mode="exact", noise=None, n_restarts=6):
    """Stage-by-stage groundstate search along a schedule of transverse fields.

    Each stage minimizes energy(U, V) + trace_weight * residual(U, V) jointly
    over the 16 angles via SPSA, warm-started from the previous stage (the
    first stage starts from a seeded random point). The warm start alone can
    stay stuck on a metastable branch of the ansatz landscape through the
    critical region, so every stage also tries seeded random restarts and
    keeps the lowest cost. In exact mode each candidate is polished with a
    deterministic simplex step, and the reported energy is the dense energy
    of U with its exact environment, so it stays variational regardless of
    residual quality.
    """
    from . import imps

    rng = np.random.default_rng(cfg.seed)
    theta = rng.uniform(-np.pi, np.pi, 16)
    stages = []
    for stage_idx, g in enumerate(schedule.g_values):
        J = schedule.J
        h = ansatz.HamiltonianParams(J, g)

        if mode == "exact":
            def cost(th, _J=J, _g=g):
                e, r = sweep_terms(th[:8], th[8:], _J, _g)
                return e + trace_weight * r
        else:
            srng = noise.rng() if noise is not None else np.random.default_rng(cfg.seed)

            def cost(th, _h=h, _rng=srng):
                Um = ansatz.build_unitary(th[:8])
                Vm = ansatz.build_unitary(th[8:])
                e = imps.expect_energy(Um, Vm, _h, "sampled", noise, _rng)
                r = imps.fixed_point_residual(Um, Vm, "sampled", noise, _rng).distance
                return e + trace_weight * r

        stage_cfg = replace(
            cfg, max_iters=schedule.iters_per_stage, seed=cfg.seed + 1000 * stage_idx
        )
        srng = np.random.default_rng(cfg.seed + 1000 * stage_idx + 17)
        starts = [theta] + [srng.uniform(-np.pi, np.pi, 16) for _ in range(n_restarts)]
        theta, stage_cost = None, np.inf
        converged = True
        for i, x0 in enumerate(starts):
            cand, cand_cost, _ = spsa_minimize(
                cost, x0, replace(stage_cfg, seed=stage_cfg.seed + i)
            )
            if mode == "exact":
                from scipy.optimize import minimize

                res = minimize(
                    cost, cand, method="Nelder-Mead",
                    options={"maxiter": 8000, "fatol": 1e-13, "xatol": 1e-9},
                )
                if res.fun < cand_cost:
                    cand, cand_cost = res.x, float(res.fun)
            if cand_cost < stage_cost:
                theta, stage_cost = np.asarray(cand, dtype=float), cand_cost
        theta_U, theta_V = theta[:8].copy(), theta[8:].copy()
        Um = ansatz.build_unitary(theta_U)
        Vm = ansatz.build_unitary(theta_V)
        residual = imps.fixed_point_residual(Um, Vm, "exact").distance
        if mode == "exact":
            A = ansatz.mps_tensor(Um)
            rho = imps.right_density(imps.transfer_matrix(A, A))
            energy = imps.energy_density_dense(A, rho, h)
        else:
            energy = imps.expect_energy(Um, Vm, h, "sampled", noise)
        stages.append(
            SweepStage(
                g=float(g), theta_U=theta_U, theta_V=theta_V,
                energy=float(energy), residual=float(residual), converged=converged,
            )
        )
    return stages
