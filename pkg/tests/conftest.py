import numpy as np
import pytest

from sd2e.data import SynthConfig, generate_synthetic


@pytest.fixture(scope="session")
def small_synth():
    """600-sample train / 400-sample test pair sharing one neuron ensemble."""
    train, train_truth = generate_synthetic(SynthConfig(sample_count=600, seed=0))
    test, test_truth = generate_synthetic(
        SynthConfig(sample_count=400, seed=0, trajectory_seed=1001)
    )
    return train, test, train_truth, test_truth


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
