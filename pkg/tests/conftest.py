import pytest

from sigverify.datasets import SynthParams, generate_synthetic


@pytest.fixture(scope="session")
def synth_small():
    return generate_synthetic(SynthParams(seed=7, n_signers=3, n_genuine=6, n_forgery=6, n_points=120, distortion=0.5))


@pytest.fixture(scope="session")
def synth_default():
    return generate_synthetic(SynthParams(seed=42, n_signers=10, n_genuine=20, n_forgery=20, distortion=0.3))
