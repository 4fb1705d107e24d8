import random
from fractions import Fraction as F

import pytest

from zerofiber.errors import NotBigError
from zerofiber.model import ClassVector
from zerofiber.serialize import divisor_from_dict, model_from_dict
from zerofiber.surface import BlowupStep, build, zariski
from zerofiber.verification import (CheckReport, FuzzSpec, check_corWN, check_derivative, check_gauge,
                                    check_oracle, check_orthogonality, check_probability, corpus, random_divisor,
                                    run_suites, zariski_oracle)

SMALL = FuzzSpec(seed=3, models=8, divisors_per_model=3, derivative_limit=30)


def test_oracle_examples(m1):
    beta = ClassVector.divisor((F(9, 4), F(1)))
    o = zariski_oracle(m1, beta)
    assert o.support == (0,) and o.N == (F(1, 4), 0)
    assert o == zariski(m1, beta)
    assert zariski_oracle(m1, ClassVector.divisor((F(1), F(1, 2)))).support == ()
    with pytest.raises(NotBigError):
        zariski_oracle(m1, ClassVector.divisor((F(-1), F(-1))))


def test_oracle_on_five_component_chain():
    steps = [BlowupStep("interior", (0,)), BlowupStep("intersection", (0, 1)),
             BlowupStep("intersection", (0, 2)), BlowupStep("intersection", (1, 2))]
    m = build(steps).model
    assert m.N == 5
    rng = random.Random(11)
    checked = 0
    while checked < 100:
        beta = random_divisor(rng, m)
        try:
            z = zariski(m, beta)
        except NotBigError:
            continue
        assert zariski_oracle(m, beta) == z
        checked += 1


def test_corpus_is_seed_deterministic():
    a, b = corpus(SMALL), corpus(SMALL)
    assert a == b
    assert corpus(FuzzSpec(seed=4, models=8)) != a
    assert all(len(inst.script) <= 8 for inst in a)


def test_corwn_examples(m1):
    for d in ((F(9, 4), 1), (1, 3), (1, F(1, 2))):
        rep = check_corWN(m1, ClassVector.divisor(d))
        assert rep.passed and rep.instances == 1


@pytest.mark.parametrize("check", [check_probability, check_orthogonality, check_gauge, check_oracle,
                                   check_derivative])
def test_suites_pass_on_small_corpus(check):
    rep = check(SMALL)
    assert rep.passed and rep.instances > 0


def test_derivative_limit_respected():
    rep = check_derivative(FuzzSpec(seed=1, models=10, derivative_limit=10))
    assert 10 <= rep.instances < 20


def test_failure_report_replays(m1):
    rep = CheckReport("demo")
    beta = ClassVector.divisor((F(9, 4), F(1)))
    rep.fail(m1, beta, "synthetic")
    assert not rep.passed
    f = rep.failures[0]
    assert model_from_dict(f["model"]) == m1 and divisor_from_dict(f["divisor"]) == beta


def test_run_suites_rejects_unknown():
    with pytest.raises(ValueError):
        run_suites(["nope"], SMALL)


def test_parallel_map_matches_serial(monkeypatch):
    serial = check_probability(SMALL)
    monkeypatch.setenv("ZEROFIBER_THREADS", "2")
    parallel = check_probability(SMALL)
    assert (serial.instances, serial.failures) == (parallel.instances, parallel.failures)
