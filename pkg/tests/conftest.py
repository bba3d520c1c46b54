import numpy as np
import pytest

from frictionlab import FormFactorModel, RadialProfile


def gaussian_model(mu=0.0, g=1.0, d=1, scale1=1.0, scale2=1.0, amp=1.0):
    return FormFactorModel(RadialProfile("gaussian", scale1, amp), RadialProfile("gaussian", scale2, amp),
                           mu=mu, d=d, g=g)


@pytest.fixture
def model():
    return gaussian_model()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
