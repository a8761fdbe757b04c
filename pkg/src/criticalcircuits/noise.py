"""Device emulation and mitigation.

Depolarization is modeled as a global white-noise channel acting on the
measured register: every outcome distribution d becomes (1-p) d + p/2^m.
That is exactly the error mode the echo rescaling corrects, so per-gate
rates only enter through the effective p for a circuit's gate count.
Readout bias is a column-stochastic confusion matrix, applied by resampling
each shot and mitigated by inversion. All randomness flows through explicit
numpy Generators.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    IncompleteBasis,
    InvalidDistribution,
    SingularConfusion,
)


@dataclass
class ConfusionMatrix:
    """entries[observed, true]; each column sums to 1."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        d = self.entries.shape[0]
        if self.entries.shape != (d, d):
            raise DimensionMismatch("confusion matrix must be square")
        if np.any(self.entries < -1e-12):
            raise InvalidDistribution("confusion entries must be nonnegative")
        if np.max(np.abs(self.entries.sum(axis=0) - 1.0)) > 1e-12:
            raise InvalidDistribution("confusion columns must sum to 1")

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def condition_number(self):
        return float(np.linalg.cond(self.entries))

    def tensor_power(self, m):
        """Joint confusion for m qubits from this per-qubit matrix."""
        out = np.array([[1.0]])
        for _ in range(m):
            out = np.kron(out, self.entries)
        return ConfusionMatrix(out)


def symmetric_readout(eps):
    """Per-qubit confusion with symmetric flip probability eps."""
    return ConfusionMatrix(np.array([[1 - eps, eps], [eps, 1 - eps]]))


@dataclass
class NoiseModel:
    global_depol: float = 0.0
    per_gate_depol: float = 0.0
    confusion: ConfusionMatrix | None = None  # per-qubit 2x2
    joint_confusion: ConfusionMatrix | None = None  # overrides for its own dim
    shots: int = 100_000
    seed: int = 0

    def __post_init__(self):
        for name in ("global_depol", "per_gate_depol"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidDistribution(f"{name} must lie in [0, 1]")
        if self.shots < 1:
            raise InvalidDistribution("shots must be >= 1")

    def rng(self):
        return np.random.default_rng(self.seed)

    def confusion_for(self, m):
        """Joint confusion matrix on m measured qubits, or None if noiseless."""
        if self.joint_confusion is not None and self.joint_confusion.dim == 2**m:
            return self.joint_confusion
        if self.confusion is not None:
            return self.confusion.tensor_power(m)
        return None


def effective_depolarization(model, n_two_qubit_gates, n_measured_qubits):
    """p_total = 1 - (1 - global)(1 - per_gate)^n_gates."""
    if n_two_qubit_gates < 0 or n_measured_qubits < 0:
        raise ValueError("counts must be nonnegative")
    return 1.0 - (1.0 - model.global_depol) * (1.0 - model.per_gate_depol) ** n_two_qubit_gates


def apply_depolarizing(ideal_prob, p_total, n_measured_qubits):
    """(1-p) q + p / 2^m for a single outcome probability q."""
    if not 0.0 <= ideal_prob <= 1.0 + 1e-12:
        raise InvalidDistribution("ideal_prob must lie in [0, 1]")
    return (1.0 - p_total) * ideal_prob + p_total / 2**n_measured_qubits


def depolarize_distribution(dist, p_total, n_measured_qubits):
    """White-noise channel on a full outcome distribution."""
    dist = np.asarray(dist, dtype=float)
    return (1.0 - p_total) * dist + p_total / 2**n_measured_qubits


def sample_counts(dist, shots, rng):
    dist = np.asarray(dist, dtype=float)
    if np.any(dist < -1e-12) or abs(dist.sum() - 1.0) > 1e-9:
        raise InvalidDistribution("probabilities must be nonnegative and sum to 1")
    dist = np.clip(dist, 0.0, None)
    dist = dist / dist.sum()
    return rng.multinomial(int(shots), dist)


def apply_confusion(counts, C, rng):
    """Redraw each sampled outcome through the confusion column of its true value."""
    counts = np.asarray(counts)
    if C is None:
        return counts.copy()
    if counts.shape[0] != C.dim:
        raise DimensionMismatch(
            f"counts dimension {counts.shape[0]} != confusion dimension {C.dim}"
        )
    out = np.zeros_like(counts)
    for true_state, c in enumerate(counts):
        if c > 0:
            out += rng.multinomial(int(c), C.entries[:, true_state])
    return out


def invert_confusion(freqs, C, return_raw=False):
    """Mitigate readout bias: C^{-1} freqs, clipped to [0,1] and renormalized.

    The raw (pre-clip) vector is available via return_raw for diagnostics.
    """
    freqs = np.asarray(freqs, dtype=float)
    if C is None:
        return (freqs.copy(), freqs.copy()) if return_raw else freqs.copy()
    if freqs.shape[0] != C.dim:
        raise DimensionMismatch("frequency vector does not match confusion matrix")
    if C.condition_number > 1e12:
        raise SingularConfusion(f"condition number {C.condition_number:.2e}")
    try:
        raw = np.linalg.solve(C.entries, freqs)
    except np.linalg.LinAlgError as exc:
        raise SingularConfusion("confusion matrix is singular") from exc
    clipped = np.clip(raw, 0.0, 1.0)
    total = clipped.sum()
    if total > 0:
        clipped = clipped / total
    return (clipped, raw) if return_raw else clipped


def learn_confusion(true_state_preparations, model):
    """Empirical confusion matrix from repeated basis-state preparations."""
    states = sorted(set(int(s) for s in true_state_preparations))
    dim = max(states) + 1
    if states != list(range(dim)) or dim & (dim - 1):
        raise IncompleteBasis("preparations must cover every basis state of the register")
    m = dim.bit_length() - 1
    truth = model.confusion_for(m)
    cols = np.eye(dim) if truth is None else truth.entries
    rng = model.rng()
    est = np.zeros((dim, dim))
    for t in range(dim):
        counts = rng.multinomial(model.shots, cols[:, t])
        est[:, t] = counts / model.shots
    return ConfusionMatrix(est)


def loschmidt_reference(descriptor, model, rng=None, sampled=True):
    """Observed all-zeros probability of a reference (echo) circuit.

    descriptor: dict with n_measured, n_gates and optionally ideal_prob
    (default 1: a circuit composed with its inverse). The result is the
    rescaling denominator; it equals 1 in the noiseless case.
    """
    m = int(descriptor["n_measured"])
    n_gates = int(descriptor.get("n_gates", 0))
    ideal = float(descriptor.get("ideal_prob", 1.0))
    p = effective_depolarization(model, n_gates, m)
    dist = np.full(2**m, (1.0 - ideal) / max(2**m - 1, 1))
    dist[0] = ideal
    dist = depolarize_distribution(dist, p, m)
    if not sampled:
        return float(dist[0])
    rng = model.rng() if rng is None else rng
    counts = sample_counts(dist, model.shots, rng)
    counts = apply_confusion(counts, model.confusion_for(m), rng)
    return counts[0] / model.shots


def measured_frequencies(dist, model, n_gates, rng, mitigate=False):
    """Full emulation pipeline: depolarize, sample, confuse, optionally invert."""
    dist = np.asarray(dist, dtype=float)
    m = int(np.log2(dist.size))
    p = effective_depolarization(model, n_gates, m)
    noisy = depolarize_distribution(dist, p, m)
    counts = sample_counts(noisy, model.shots, rng)
    C = model.confusion_for(m)
    counts = apply_confusion(counts, C, rng)
    freqs = counts / model.shots
    if mitigate and C is not None:
        freqs = invert_confusion(freqs, C)
    return freqs
