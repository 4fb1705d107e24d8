"""Independent oracles and fuzz harnesses for the identities of the engine.

Instances come from seeded random blow-up scripts on the trivial surface model
and random rational divisors. Every failure carries a serialized model and
divisor so it can be replayed.
"""
from __future__ import annotations

import itertools
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .errors import NotBigError, ZeroFiberError
from .linalg import SingularMatrixError, is_negative_definite, solve
from .model import (ClassVector, Model, energy, gauge_normalize, grad_energy, is_kahler_certified,
                    ma_kahler)
from .serialize import divisor_to_dict, model_to_dict, qstr
from .solver import build_calibrated_divisors, is_calibrated, variational_solve
from .surface import (IN_ENK_NOT_ENN, BlowupStep, ZariskiDecomposition, build, classify_components,
                      envelope_values, ma_big, orthogonality_pairing, restricted_volumes,
                      volume_derivative_check, vertical_pairings, zariski)


@dataclass(frozen=True)
class FuzzSpec:
    seed: int = 0
    models: int = 40
    divisors_per_model: int = 5
    max_steps: int = 8
    coef_bound: int = 3
    max_den: int = 64
    derivative_limit: int = 200


@dataclass
class CheckReport:
    name: str
    instances: int = 0
    failures: list[dict] = field(default_factory=list)
    exact: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, m: Model, beta: ClassVector | None, detail: str) -> None:
        self.failures.append({
            "detail": detail,
            "model": model_to_dict(m),
            "divisor": divisor_to_dict(beta) if beta is not None else None,
        })

    def to_dict(self) -> dict:
        return {"name": self.name, "instances": self.instances, "passed": self.passed,
                "exact": self.exact, "failures": self.failures, "notes": self.notes}


# ---------------------------------------------------------------------------
# instance generation


def random_script(rng: random.Random, max_steps: int = 8) -> list[BlowupStep]:
    b = build([])
    steps = []
    for k in range(rng.randint(0, max_steps)):
        edges = [f for f in b.faces() if len(f) == 2]
        on_section = [(s, i) for s, sec in b.sections.items() for i in range(b.N) if sec["pairing"][i + 1] >= 1]
        r = rng.random()
        if edges and (r < 0.45 or (k % 2 == 1 and r < 0.9)):
            step = BlowupStep("intersection", tuple(rng.choice(edges)))
        elif on_section and r > 0.9:
            step = BlowupStep("on-section", rng.choice(on_section))
        else:
            step = BlowupStep("interior", (rng.randrange(b.N),))
        b.apply(step)
        steps.append(step)
    return steps


def random_divisor(rng: random.Random, m: Model, bound: int = 3, max_den: int = 64) -> ClassVector:
    d = []
    for _ in range(m.N):
        den = rng.randint(1, max_den)
        d.append(Fraction(rng.randint(-bound * den, bound * den), den))
    return gauge_normalize(m, ClassVector.divisor(d), "dominate-X0")


def random_measure(rng: random.Random, N: int, max_weight: int = 64) -> tuple[Fraction, ...]:
    w = [rng.randint(1, max_weight) for _ in range(N)]
    return tuple(Fraction(x, sum(w)) for x in w)


@dataclass(frozen=True)
class Instance:
    model: Model
    script: tuple[BlowupStep, ...]
    divisors: tuple[ClassVector, ...]


def corpus(spec: FuzzSpec) -> list[Instance]:
    """Seed-deterministic stream of models with big divisors."""
    rng = random.Random(spec.seed)
    out = []
    for _ in range(spec.models):
        script = random_script(rng, spec.max_steps)
        m = build(script).model
        divs = []
        attempts = 0
        while len(divs) < spec.divisors_per_model and attempts < 50 * spec.divisors_per_model:
            attempts += 1
            D = random_divisor(rng, m, spec.coef_bound, spec.max_den)
            try:
                zariski(m, D)
            except NotBigError:
                continue
            divs.append(D)
        out.append(Instance(m, tuple(script), tuple(divs)))
    return out


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ZEROFIBER_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn: Callable, items: Iterable) -> list:
    items = list(items)
    workers = _threads()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _merge(name: str, parts: list[CheckReport], exact: bool = True) -> CheckReport:
    rep = CheckReport(name, exact=exact)
    for p in parts:
        rep.instances += p.instances
        rep.failures.extend(p.failures)
        rep.notes.extend(p.notes)
    return rep


# ---------------------------------------------------------------------------
# oracles


def zariski_oracle(m: Model, beta: ClassVector) -> ZariskiDecomposition:
    """Zariski decomposition by enumerating every candidate negative support."""
    if m.n != 1:
        raise ZeroFiberError("oracle needs n = 1")
    if m.N > 12:
        raise ZeroFiberError("oracle limited to 12 components")
    G = m.gram
    p = vertical_pairings(m, beta)
    found = []
    for r in range(m.N):
        for S in itertools.combinations(range(m.N), r):
            GS = [[G[i][j] for j in S] for i in S]
            if not is_negative_definite(GS):
                continue
            try:
                x = solve(GS, [p[j] for j in S])
            except SingularMatrixError:
                continue
            if any(v <= 0 for v in x):
                continue
            N = [Fraction(0)] * m.N
            for idx, j in enumerate(S):
                N[j] = x[idx]
            if all(p[k] - sum((N[j] * G[j][k] for j in S), Fraction(0)) >= 0 for k in range(m.N) if k not in S):
                found.append((S, N))
    if not found:
        raise NotBigError("oracle: no admissible negative support")
    if len(found) > 1:
        raise ZeroFiberError(f"oracle: several admissible supports {[s for s, _ in found]}")
    S, N = found[0]
    P = beta - ClassVector(0, N)
    vol = m.pair(P, P)
    if vol <= 0:
        raise NotBigError(f"oracle: positive part has self-intersection {vol}")
    return ZariskiDecomposition(P, tuple(N), S, vol)


# ---------------------------------------------------------------------------
# checks on single instances


def _probability_one(inst: Instance) -> CheckReport:
    rep = CheckReport("probability")
    m = inst.model
    for D in inst.divisors:
        rep.instances += 1
        rv = restricted_volumes(m, D)
        total = sum((b * r for b, r in zip(m.b, rv)), Fraction(0))
        if total != m.V:
            rep.fail(m, D, f"sum b_i rv_i = {total} != V = {m.V}")
        mu = ma_big(m, D)
        if not mu.is_probability():
            rep.fail(m, D, f"MA masses {list(map(qstr, mu.masses))} not a probability vector")
    return rep


def check_corWN(m: Model, beta: ClassVector) -> CheckReport:
    """Both sides of ``sum_i b_i rv(E_i) = rv(X_1)`` for ``X0 ~ X_1``.

    The general-fibre side is ``(beta - N) . X0`` expanded term by term, which
    must also equal ``V``.
    """
    rep = CheckReport("corWN", instances=1)
    z = zariski(m, beta)
    rv = restricted_volumes(m, beta, z)
    left = sum((b * r for b, r in zip(m.b, rv)), Fraction(0))
    f = m.form
    x0 = m.zero_fiber().basis
    beta_x0 = sum((beta.basis[i] * f[i][j] * x0[j] for i in range(m.N + 1) for j in range(m.N + 1)), Fraction(0))
    n_x0 = sum((z.N[k] * f[k + 1][j] * x0[j] for k in range(m.N) for j in range(m.N + 1)), Fraction(0))
    right = beta_x0 - n_x0
    if left != right or right != m.V:
        rep.fail(m, beta, f"sum b_i rv_i = {left}, (beta - N).X0 = {right}, V = {m.V}")
    return rep


def _corwn_one(inst: Instance) -> CheckReport:
    return _merge("corWN", [check_corWN(inst.model, D) for D in inst.divisors])


def _orthogonality_one(inst: Instance) -> CheckReport:
    rep = CheckReport("orthogonality")
    m = inst.model
    for D in inst.divisors:
        rep.instances += 1
        val = orthogonality_pairing(m, D)
        if val != 0:
            rep.fail(m, D, f"orthogonality pairing = {val}")
        z = zariski(m, D)
        masses = ma_big(m, D, z).masses
        for i in range(m.N):
            if z.N[i] > 0 and masses[i] != 0:
                rep.fail(m, D, f"mass {masses[i]} on negative-part component {i}")
        env = envelope_values(m, D)
        for i in range(m.N):
            if env[i] > D.d[i] / m.b[i]:
                rep.fail(m, D, f"envelope above f_D at component {i}")
    return rep


def _gauge_one(args) -> CheckReport:
    inst, seed = args
    rng = random.Random(seed)
    rep = CheckReport("gauge")
    m = inst.model
    x0 = m.zero_fiber()
    for D in inst.divisors:
        rep.instances += 1
        c = Fraction(rng.randint(1, 512), rng.randint(1, 64))
        if ma_big(m, D + c * x0) != ma_big(m, D):
            rep.fail(m, D, f"MA changed under translation by {c} X0")
        if energy(m, D + c * x0) != energy(m, D) + c:
            rep.fail(m, D, f"energy not equivariant under translation by {c} X0")
    # Kahler instances: solutions of random interior targets
    for _ in range(2):
        mu = random_measure(rng, m.N)
        res = variational_solve(m, mu)
        if not res.attainable:
            rep.notes.append(f"Kahler target {mu} not attained on a model with {m.N} components")
            continue
        D = res.D
        rep.instances += 1
        if not is_kahler_certified(m, D):
            rep.fail(m, D, "variational solution not certified")
            continue
        grad = grad_energy(m, D)
        masses = ma_kahler(m, D).masses
        if any(g * b != x for g, b, x in zip(grad, m.b, masses)):
            rep.fail(m, D, "gradient identity grad_i * b_i = MA_i fails")
        if ma_big(m, gauge_normalize(m, D, "dominate-X0")) != ma_kahler(m, D):
            rep.fail(m, D, "big and Kahler measures disagree on a Kahler class")
        c = Fraction(rng.randint(1, 64), rng.randint(1, 16))
        if ma_kahler(m, D + c * x0) != ma_kahler(m, D):
            rep.fail(m, D, "Kahler MA changed under translation")
    return rep


def _derivative_one(inst: Instance, limit: int | None = None) -> CheckReport:
    rep = CheckReport("derivative", exact=True)
    m = inst.model
    for D in inst.divisors:
        if limit is not None and rep.instances >= limit:
            break
        status = classify_components(m, D)
        for i in range(m.N):
            if status[i] == IN_ENK_NOT_ENN:
                rep.notes.append(f"skipped component {i}: not good")
                continue
            for h in (Fraction(1, 64), Fraction(1, 256)):
                try:
                    chk = volume_derivative_check(m, D, i, h)
                except NotBigError:
                    rep.notes.append(f"skipped component {i}, h = {h}: leaves the big cone")
                    continue
                rep.instances += 1
                if not chk.within_bound:
                    rep.fail(m, D, f"component {i}, h = {h}: errors {chk.err_left}, {chk.err_right} exceed {chk.bound}")
                if chk.right_single_chamber and chk.right_corrected != chk.target:
                    rep.fail(m, D, f"component {i}, h = {h}: corrected right slope {chk.right_corrected} != {chk.target}")
                if chk.left_single_chamber and chk.left_corrected != chk.target:
                    rep.fail(m, D, f"component {i}, h = {h}: corrected left slope {chk.left_corrected} != {chk.target}")
                if chk.left_single_chamber and chk.right_single_chamber:
                    lo, hi = sorted((chk.left, chk.right))
                    if not lo <= chk.target <= hi:
                        rep.fail(m, D, f"component {i}, h = {h}: slopes do not bracket the target")
    return rep


def _oracle_one(inst: Instance) -> CheckReport:
    rep = CheckReport("oracle")
    m = inst.model
    if m.N > 12:
        rep.notes.append("model too large for the oracle")
        return rep
    for D in inst.divisors:
        rep.instances += 1
        z = zariski(m, D)
        o = zariski_oracle(m, D)
        if (z.P, z.N, z.support) != (o.P, o.N, o.support):
            rep.fail(m, D, f"engine {z} != oracle {o}")
        G = m.gram
        if not is_negative_definite([[G[i][j] for j in z.support] for i in z.support]):
            rep.fail(m, D, "support Gram matrix not negative definite")
        pz = vertical_pairings(m, z.P)
        if any(pz[j] != 0 for j in z.support) or any(pz[k] < 0 for k in range(m.N)):
            rep.fail(m, D, "positive part not orthogonal to support or not nef on components")
    return rep


def _calibration_one(inst: Instance) -> CheckReport:
    rep = CheckReport("calibration", instances=1)
    m = inst.model
    fam = build_calibrated_divisors(m, 2**20)
    if fam.t0 > 2**20 or not is_calibrated(m, fam.D):
        rep.fail(m, None, f"calibration invalid at t0 = {fam.t0}")
    return rep


# ---------------------------------------------------------------------------
# suites


def check_probability(spec: FuzzSpec, instances: list[Instance] | None = None) -> CheckReport:
    return _merge("probability", _map(_probability_one, instances or corpus(spec)))


def check_corWN_suite(spec: FuzzSpec, instances: list[Instance] | None = None) -> CheckReport:
    return _merge("corWN", _map(_corwn_one, instances or corpus(spec)))


def check_orthogonality(spec: FuzzSpec, instances: list[Instance] | None = None) -> CheckReport:
    return _merge("orthogonality", _map(_orthogonality_one, instances or corpus(spec)))


def check_gauge(spec: FuzzSpec, instances: list[Instance] | None = None) -> CheckReport:
    insts = instances or corpus(spec)
    seeds = random.Random(spec.seed + 1).sample(range(10**9), len(insts))
    return _merge("gauge", _map(_gauge_one, list(zip(insts, seeds))))


def check_derivative(spec: FuzzSpec, instances: list[Instance] | None = None) -> CheckReport:
    """Runs instances in stream order until ``spec.derivative_limit`` (D, i, h) triples are checked."""
    parts = []
    done = 0
    for inst in instances or corpus(spec):
        if done >= spec.derivative_limit:
            break
        part = _derivative_one(inst, spec.derivative_limit - done)
        done += part.instances
        parts.append(part)
    return _merge("derivative", parts)


def check_oracle(spec: FuzzSpec, instances: list[Instance] | None = None) -> CheckReport:
    return _merge("oracle", _map(_oracle_one, instances or corpus(spec)))


def check_calibration(spec: FuzzSpec, instances: list[Instance] | None = None) -> CheckReport:
    return _merge("calibration", _map(_calibration_one, instances or corpus(spec)))


SUITES = {
    "probability": check_probability,
    "corWN": check_corWN_suite,
    "orthogonality": check_orthogonality,
    "gauge": check_gauge,
    "derivative": check_derivative,
    "oracle": check_oracle,
    "calibration": check_calibration,
}


def run_suites(names: Iterable[str], spec: FuzzSpec) -> list[CheckReport]:
    names = list(names)
    if names == ["all"]:
        names = list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)} or 'all'")
    insts = corpus(spec)
    return [SUITES[n](spec, insts) for n in names]
