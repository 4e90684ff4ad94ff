import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from febim import data, gnbc

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("fast", max_examples=10, deadline=None)
settings.load_profile("default")

np.seterr(all="warn")


@pytest.fixture(scope="session")
def iris():
    return data.load_dataset("iris")


@pytest.fixture(scope="session")
def iris_split(iris):
    return data.split(iris, data.SplitSpec(0.7, 0, 0))


@pytest.fixture(scope="session")
def iris_params(iris_split):
    return gnbc.train(iris_split[0])


def make_dataset(X, y, k=None, name="synthetic"):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    k = k if k is not None else int(y.max()) + 1
    return data.Dataset(name, X, y, [f"f{i}" for i in range(X.shape[1])], [f"c{c}" for c in range(k)])
