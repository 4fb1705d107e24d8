"""Acceptance gate: criteria 1-8, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""
import functools
import random
import time
from fractions import Fraction as F

import pytest

from zerofiber.model import ClassVector, is_kahler_certified, ma_kahler
from zerofiber.serialize import load_model
from zerofiber.solver import build_calibrated_divisors, is_calibrated, solve_ma, variational_solve
from zerofiber.verification import (FuzzSpec, check_derivative, check_gauge, check_oracle, check_orthogonality,
                                    check_probability, corpus, random_measure)

SPEC = FuzzSpec(seed=2024, models=200, divisors_per_model=5, max_steps=8, derivative_limit=100)
RESULTS: dict[int, tuple[bool, str]] = {}


@functools.lru_cache(maxsize=None)
def fuzz_corpus():
    return corpus(SPEC)


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def criterion_1():
    t = time.perf_counter()
    insts = fuzz_corpus()
    rep = check_probability(SPEC, insts)
    dt = time.perf_counter() - t
    n_div = min(len(i.divisors) for i in insts)
    ok = rep.passed and len(insts) >= 200 and n_div >= 5 and dt < 30
    return ok, f"{len(insts)} models x {n_div}+ divisors, {rep.instances} exact checks, {len(rep.failures)} failures, {dt:.1f}s"


def criterion_2():
    t = time.perf_counter()
    m = load_model("p1p1-normal-cone")
    bad = 0
    a1 = []
    for k in range(1, 100):
        e = F(k, 100)
        mu = ma_kahler(m, ClassVector.divisor((F(1), 1 - e)))
        a1.append(mu.masses[0])
        bad += mu.masses != (1 - e * e / 2, e * e / 2)
    rejected = all(not variational_solve(m, (a, 1 - a)).attainable
                   for a in (F(1, 10), F(1, 4), F(2, 5), F(1, 2)))
    accepted = all(variational_solve(m, (a, 1 - a)).attainable for a in (F(51, 100), F(3, 4), F(99, 100)))
    dt = time.perf_counter() - t
    ok = bad == 0 and rejected and accepted and min(a1) > F(1, 2) and max(a1) < 1 and dt < 5
    return ok, (f"99 scan points, {bad} mismatches, a_1 in [{min(a1)}, {max(a1)}], "
                f"a_1 <= 1/2 rejected: {rejected}, {dt:.2f}s")


def criterion_3():
    rng = random.Random(SPEC.seed)
    worst_res, worst_time, worst_gap, n_var = 0.0, 0.0, 0.0, 0
    ok = True
    for name in ("p1-one-blowup", "p1-chain-3"):
        m = load_model(name)
        for _ in range(50):
            mu = random_measure(rng, m.N)
            r, dt = _timed(lambda: solve_ma(m, mu, tol=1e-9))
            res = float(r.residual_exact)
            worst_res, worst_time = max(worst_res, res), max(worst_time, dt)
            ok &= res <= 1e-9 and dt < 1
            v = variational_solve(m, mu)
            if v.attainable:
                n_var += 1
                gap = max(abs(float(x - y)) for x, y in zip(v.masses, r.masses))
                worst_gap = max(worst_gap, gap)
                ok &= gap <= 1e-8
    return ok, (f"100 targets, max residual {worst_res:.1e}, max time {worst_time:.2f}s, "
                f"{n_var} Kahler-chamber cross-checks, max gap {worst_gap:.1e}")


def criterion_4():
    rep = check_orthogonality(SPEC, fuzz_corpus())
    return rep.passed, f"{rep.instances} instances, {len(rep.failures)} failures"


def criterion_5():
    insts = [i for i in fuzz_corpus() if i.model.N <= 12]
    rep, dt = _timed(lambda: check_oracle(SPEC, insts))
    ok = rep.passed and rep.instances >= 500 and dt < 60
    return ok, f"{rep.instances} instances, {len(rep.failures)} failures, {dt:.1f}s"


def criterion_6():
    rep = check_derivative(SPEC, fuzz_corpus())
    pairs = rep.instances // 2
    return rep.passed and pairs >= 50, f"{pairs} (beta, E_i) pairs x 2 step sizes, {len(rep.failures)} failures"


def criterion_7():
    rep = check_gauge(SPEC, fuzz_corpus())
    return rep.passed, f"{rep.instances} instances (translations and Kahler gradients), {len(rep.failures)} failures"


def criterion_8():
    worst = 0
    bad = 0
    for inst in fuzz_corpus():
        fam = build_calibrated_divisors(inst.model, 2**20)
        worst = max(worst, fam.t0)
        bad += not (fam.t0 <= 2**20 and is_calibrated(inst.model, fam.D))
    return bad == 0, f"{len(fuzz_corpus())} models, largest t0 = {worst}, {bad} failures"


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


def summary_line(k: int, ok: bool, detail: str) -> str:
    return f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})"


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    ok, detail = CRITERIA[k]()
    RESULTS[k] = (ok, detail)
    print(summary_line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    for k, fn in CRITERIA.items():
        print(summary_line(k, *fn()), flush=True)
