import numpy as np
import pytest

from linexsel import LinexParams, analysis


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def poultry_model():
    data = analysis.load_dataset(analysis.bundled_dataset_path(), clean=True)
    return analysis.fit(data)


@pytest.fixture(scope="session")
def poultry_summary(poultry_model):
    from linexsel import ObservationPair, select

    return select(ObservationPair(poultry_model.theta_hat_1, poultry_model.theta_hat_2))


@pytest.fixture(params=[1.0, -1.0], ids=["a=1", "a=-1"])
def sign_a(request):
    return LinexParams(request.param)
