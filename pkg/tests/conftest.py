import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from zerofiber.serialize import load_model
from zerofiber.surface import build
from zerofiber.verification import random_script

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def m1():
    return load_model("p1-one-blowup")


@pytest.fixture
def chain3():
    return load_model("p1-chain-3")


@pytest.fixture
def m2():
    return load_model("p1p1-normal-cone")


def rationals(lo=-3, hi=3, max_den=64):
    return st.fractions(min_value=lo, max_value=hi, max_denominator=max_den)


@st.composite
def surface_models(draw, max_steps=6):
    seed = draw(st.integers(0, 10**6))
    return build(random_script(random.Random(seed), max_steps)).model


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k, (ok, detail) in sorted(test_acceptance.RESULTS.items()):
            terminalreporter.write_line(test_acceptance.summary_line(k, ok, detail))
