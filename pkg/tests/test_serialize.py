import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from zerofiber.errors import ModelError
from zerofiber.model import ClassVector, DivisorialMeasure
from zerofiber.serialize import (BUILTIN_MODELS, divisor_from_dict, divisor_to_dict, dumps, load_model,
                                 measure_from_dict, measure_to_dict, model_from_dict, model_to_dict, parse_q, qstr)

from .conftest import rationals, surface_models


def test_rationals_are_strings():
    assert qstr(3) == "3/1"
    assert parse_q("-7/4") == parse_q("-14/8")
    with pytest.raises(ModelError):
        parse_q(0.5)
    with pytest.raises(ModelError):
        parse_q(True)


@pytest.mark.parametrize("name", BUILTIN_MODELS)
def test_builtin_round_trip(name):
    m = load_model(name)
    doc = model_to_dict(m)
    assert model_from_dict(json.loads(dumps(doc))) == m
    assert dumps(model_to_dict(model_from_dict(doc))) == dumps(doc)


@given(surface_models())
def test_model_round_trip(m):
    assert model_from_dict(json.loads(dumps(model_to_dict(m)))) == m


@given(st.lists(rationals(), min_size=1, max_size=6))
def test_divisor_and_measure_round_trip(xs):
    D = ClassVector.divisor(xs)
    assert divisor_from_dict(json.loads(dumps(divisor_to_dict(D)))) == D
    mu = DivisorialMeasure(tuple(xs))
    assert measure_from_dict(measure_to_dict(mu)) == mu


def test_unknown_tensor_name_rejected(m1):
    doc = model_to_dict(m1)
    doc["tensor"]["A.E7"] = "1/1"
    with pytest.raises(ModelError):
        model_from_dict(doc)


def test_float_entry_rejected(m1):
    doc = model_to_dict(m1)
    doc["V"] = 1.0
    with pytest.raises(ModelError):
        model_from_dict(doc)
