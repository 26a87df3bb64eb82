import numpy as np
import pytest

from polariton_fsrs.bath import BathSpec
from polariton_fsrs.model import SystemSpec
from polariton_fsrs.response import PulseSpec
from polariton_fsrs.signals import build_model

GSQRTN = 0.05 * np.sqrt(2.0)


def make_spec(detuning=1.25, **kw):
    return SystemSpec.from_collective(10, 1.84, GSQRTN, detuning, exciton_interaction_u=0.02, **kw)


@pytest.fixture(scope="session")
def pulse():
    return PulseSpec()


@pytest.fixture(scope="session")
def bath():
    return BathSpec()


@pytest.fixture(scope="session")
def model_plus():
    return build_model(make_spec(1.25), BathSpec())


@pytest.fixture(scope="session")
def model_minus():
    return build_model(make_spec(-1.25), BathSpec())


@pytest.fixture(scope="session")
def model_zero():
    return build_model(make_spec(0.0), BathSpec())


@pytest.fixture(scope="session")
def model_ct():
    return build_model(make_spec(1.25, ct_energy=1.6), BathSpec())
