import numpy as np
import pytest

from criticalcircuits import noise as nz
from criticalcircuits.errors import (
    DimensionMismatch,
    IncompleteBasis,
    InvalidDistribution,
    SingularConfusion,
)


def test_confusion_matrix_validation():
    with pytest.raises(DimensionMismatch):
        nz.ConfusionMatrix(np.ones((2, 3)))
    with pytest.raises(InvalidDistribution):
        nz.ConfusionMatrix(np.array([[1.5, 0.0], [-0.5, 1.0]]))
    with pytest.raises(InvalidDistribution):
        nz.ConfusionMatrix(np.array([[0.9, 0.1], [0.2, 0.9]]))


def test_tensor_power_dimensions():
    C = nz.symmetric_readout(0.05)
    C3 = C.tensor_power(3)
    assert C3.dim == 8
    assert np.allclose(C3.entries.sum(axis=0), 1.0)
    assert abs(C3.entries[0, 0] - 0.95**3) < 1e-12


def test_effective_depolarization():
    m = nz.NoiseModel(global_depol=0.1, per_gate_depol=0.01)
    p = nz.effective_depolarization(m, 5, 3)
    assert abs(p - (1 - 0.9 * 0.99**5)) < 1e-12
    with pytest.raises(ValueError):
        nz.effective_depolarization(m, -1, 3)


def test_depolarize_distribution_preserves_normalization():
    d = np.array([0.7, 0.1, 0.1, 0.1])
    out = nz.depolarize_distribution(d, 0.3, 2)
    assert abs(out.sum() - 1.0) < 1e-12
    assert abs(out[0] - (0.7 * 0.7 + 0.3 / 4)) < 1e-12


def test_sample_counts_determinism_and_validation():
    d = np.array([0.5, 0.5])
    a = nz.sample_counts(d, 1000, np.random.default_rng(3))
    b = nz.sample_counts(d, 1000, np.random.default_rng(3))
    assert np.array_equal(a, b) and a.sum() == 1000
    with pytest.raises(InvalidDistribution):
        nz.sample_counts(np.array([0.5, 0.2]), 100, np.random.default_rng(0))


def test_invert_confusion_algebraic_roundtrip():
    C = nz.symmetric_readout(0.08).tensor_power(2)
    d = np.array([0.55, 0.25, 0.15, 0.05])
    observed = C.entries @ d
    recovered = nz.invert_confusion(observed, C)
    assert np.allclose(recovered, d, atol=1e-12)
    clipped, raw = nz.invert_confusion(observed, C, return_raw=True)
    assert np.allclose(raw, d, atol=1e-12)


def test_invert_confusion_singular():
    with pytest.raises(SingularConfusion):
        nz.invert_confusion(np.array([0.5, 0.5]), nz.symmetric_readout(0.5))


def test_learn_confusion_recovers_truth():
    model = nz.NoiseModel(confusion=nz.symmetric_readout(0.07), shots=200_000, seed=2)
    est = nz.learn_confusion(range(4), model)
    truth = nz.symmetric_readout(0.07).tensor_power(2)
    assert np.max(np.abs(est.entries - truth.entries)) < 5e-3
    with pytest.raises(IncompleteBasis):
        nz.learn_confusion([0, 1, 2], model)


def test_loschmidt_reference_noiseless_is_one():
    model = nz.NoiseModel()
    assert nz.loschmidt_reference({"n_measured": 3, "n_gates": 6}, model, sampled=False) == 1.0
    noisy = nz.NoiseModel(global_depol=0.2)
    val = nz.loschmidt_reference({"n_measured": 3, "n_gates": 0}, noisy, sampled=False)
    assert abs(val - (0.8 + 0.2 / 8)) < 1e-12


def test_measured_frequencies_mitigation_recovers_distribution():
    dist = np.array([0.6, 0.2, 0.15, 0.05])
    model = nz.NoiseModel(confusion=nz.symmetric_readout(0.05), shots=500_000, seed=8)
    rng = model.rng()
    f = nz.measured_frequencies(dist, model, n_gates=0, rng=rng, mitigate=True)
    assert np.max(np.abs(f - dist)) < 5e-3
