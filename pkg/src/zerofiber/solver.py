"""Solvers for ``MA(X, A + D) = mu`` on a fixed model.

``solve_ma`` follows the existence argument: calibrated divisors ``D_i`` whose
convex combinations ``D_a`` give a boundary-preserving map ``f`` of the unit
simplex onto itself, ``f(a) = MA(A + D_a)``. A damped projected residual
iteration looks for ``f(a) = mu``; simplex bisection driven by the local
image index is the fallback for small simplices. Every answer is certified by
recomputing the measure exactly at a rationalized point.

``variational_solve`` maximizes ``E(D) - sum_i mu_i d_i / b_i`` over divisors
certified relatively Kahler; at an interior maximizer the Kahler measure of
``D`` is ``mu``.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import CalibrationError, DomainError, ModelError, NotBigError
from .linalg import SingularMatrixError, rationalize, solve
from .model import (ClassVector, DivisorialMeasure, Model, contract, energy,
                    grad_energy, hessian_energy, ma_kahler, top_power_with)
from .surface import ma_big, negative_part, vertical_pairings, zariski


@dataclass(frozen=True)
class IntersectionGraph:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    dist: tuple[tuple[int, ...], ...]


def intersection_graph(m: Model) -> IntersectionGraph:
    """Components as vertices, an edge when two components meet; BFS distances."""
    nbrs: list[set[int]] = [set() for _ in range(m.N)]
    for face in m.faces:
        for i in face:
            for j in face:
                if i != j:
                    nbrs[i].add(j)
    dist = []
    for src in range(m.N):
        d = [-1] * m.N
        d[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for v in sorted(nbrs[u]):
                if d[v] < 0:
                    d[v] = d[u] + 1
                    queue.append(v)
        if any(x < 0 for x in d):
            raise ModelError("intersection graph of the zero fibre is disconnected")
        dist.append(tuple(d))
    edges = tuple((i, j) for i in range(m.N) for j in sorted(nbrs[i]) if i < j)
    return IntersectionGraph(tuple(range(m.N)), edges, tuple(dist))


@dataclass(frozen=True)
class CalibratedFamily:
    t0: Fraction
    D: tuple[ClassVector, ...]


def calibrated_divisor(m: Model, graph: IntersectionGraph, i: int, t) -> ClassVector:
    """``A + sum_j (1 + t^N - t^(N - l(i,j))) b_j E_j``."""
    N = m.N
    t = Fraction(t)
    return ClassVector.divisor(tuple((1 + t**N - t ** (N - graph.dist[i][j])) * m.b[j] for j in range(N)))


def is_calibrated(m: Model, D: Sequence[ClassVector]) -> bool:
    """``(A + D_i) . E_k < 0`` for every ``k != i``."""
    for i, Di in enumerate(D):
        p = vertical_pairings(m, Di)
        if any(p[k] >= 0 for k in range(m.N) if k != i):
            return False
    return True


def build_calibrated_divisors(m: Model, t_cap=2**20) -> CalibratedFamily:
    """Doubling search ``t = 2, 4, 8, ...`` for the first calibrated family."""
    if m.n != 1:
        raise DomainError("calibration by degree signs needs n = 1")
    graph = intersection_graph(m)
    t = Fraction(2)
    while t <= t_cap:
        D = tuple(calibrated_divisor(m, graph, i, t) for i in range(m.N))
        if is_calibrated(m, D):
            return CalibratedFamily(t, D)
        t *= 2
    raise CalibrationError(f"calibration failed below cap {t_cap}")


def divisor_at(fam: CalibratedFamily, a: Sequence[Fraction]) -> ClassVector:
    out = Fraction(0) * fam.D[0]
    for ai, Di in zip(a, fam.D):
        if ai:
            out = out + ai * Di
    return out


def _check_simplex_point(a: Sequence[Fraction], N: int) -> list[Fraction]:
    a = [Fraction(x) for x in a]
    if len(a) != N:
        raise DomainError(f"simplex point has {len(a)} coordinates, expected {N}")
    if any(x < 0 for x in a) or sum(a) != 1:
        raise DomainError(f"{a} is not a point of the unit simplex")
    return a


def simplex_map(m: Model, fam: CalibratedFamily, a: Sequence) -> DivisorialMeasure:
    """``f(a) = MA(A + sum_i a_i D_i)``."""
    if m.n != 1:
        raise DomainError("the simplex map needs n = 1")
    a = _check_simplex_point(a, m.N)
    return ma_big(m, divisor_at(fam, a))


# ---------------------------------------------------------------------------
# fixed-point solver


@dataclass
class SolveResult:
    a: tuple[float, ...]
    a_exact: tuple[Fraction, ...]
    D: ClassVector
    masses: tuple[Fraction, ...]
    residual: float
    residual_exact: Fraction
    iterations: int
    converged: bool
    method: str
    trace: list[tuple[int, float, float]] = field(default_factory=list)


def _check_target(mu, N: int) -> tuple[Fraction, ...]:
    masses = tuple(Fraction(x) for x in (mu.masses if isinstance(mu, DivisorialMeasure) else mu))
    if len(masses) != N:
        raise DomainError(f"target has {len(masses)} masses, model has {N} components")
    if any(x < 0 for x in masses) or sum(masses) != 1:
        raise DomainError("target is not a probability vector")
    return masses


class _Evaluator:
    """Exact ``f`` on the face spanned by ``J``, fed from float iterates."""

    def __init__(self, m: Model, fam: CalibratedFamily, mu: tuple[Fraction, ...], J: list[int], max_den: int):
        self.m, self.fam, self.mu, self.J, self.max_den = m, fam, mu, J, max_den

    def exact_point(self, x: Sequence[float]) -> list[Fraction]:
        # rationalize on the face and put the rounding slack on the largest coordinate
        q = [max(Fraction(0), rationalize(float(v), self.max_den)) for v in x]
        total = sum(q)
        if total == 0:
            q = [Fraction(1, len(q))] * len(q)
        else:
            q = [v / total for v in q] if total != 1 else q
        a = [Fraction(0)] * self.m.N
        for j, v in zip(self.J, q):
            a[j] = v
        return a

    def measure(self, a: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return ma_big(self.m, divisor_at(self.fam, a)).masses

    def residual(self, masses: Sequence[Fraction]) -> Fraction:
        return max(abs(x - y) for x, y in zip(masses, self.mu))

    def __call__(self, x: Sequence[float]):
        a = self.exact_point(x)
        masses = self.measure(a)
        return a, masses, self.residual(masses)


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the unit simplex (sort-and-threshold)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(v) + 1)
    rho = np.nonzero(u * k > css - 1)[0][-1]
    theta = (css[rho] - 1) / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _support_at(ev: _Evaluator, a: Sequence[Fraction]) -> tuple[int, ...]:
    return negative_part(ev.m, vertical_pairings(ev.m, divisor_at(ev.fam, a)))[2]


def _solve_in_chamber(ev: _Evaluator, S: tuple[int, ...]):
    """Exact preimage of ``mu`` under the affine formula of the chamber with negative support ``S``."""
    m, J = ev.m, ev.J
    G = m.gram
    cols = []
    for i in J:
        p = vertical_pairings(m, ev.fam.D[i])
        if S:
            x = solve([[G[r][c] for c in S] for r in S], [p[j] for j in S])
            for idx, j in enumerate(S):
                for k in range(m.N):
                    p[k] -= x[idx] * G[j][k]
        cols.append([m.b[k] * p[k] / m.V for k in J])
    M = [[cols[c][r] for c in range(len(J))] for r in range(len(J))]
    try:
        sol = solve(M, [ev.mu[k] for k in J])
    except SingularMatrixError:
        return None
    if any(x < 0 for x in sol) or sum(sol) != 1:
        return None
    a_new = [Fraction(0)] * m.N
    for j, v in zip(J, sol):
        a_new[j] = v
    try:
        masses = ev.measure(a_new)
    except NotBigError:
        return None
    if ev.residual(masses) != 0:
        return None
    return a_new, masses


def _chamber_solve(ev: _Evaluator, a: Sequence[Fraction], nearby: Sequence[Sequence[Fraction]] = ()):
    """Certify an exact solution from the chambers met at ``a`` and at ``nearby`` points.

    A solution charges every component of ``J``, so its negative support is
    disjoint from ``J``; the empty support is always tried last.
    """
    J = set(ev.J)
    tried = set()
    for pt in [a, *nearby]:
        S = _support_at(ev, pt)
        if S in tried or set(S) & J:
            continue
        tried.add(S)
        hit = _solve_in_chamber(ev, S)
        if hit is not None:
            return hit
    if () not in tried:
        return _solve_in_chamber(ev, ())
    return None


def _kuhn_simplices(d: int, K: int):
    """Kuhn triangulation of ``{y in Z^d : K >= y_1 >= ... >= y_d >= 0}``.

    Each simplex is a base point plus the partial sums of a permutation of
    unit steps; only those inside the ordered region are kept, and together
    they triangulate it.
    """
    perms = list(itertools.permutations(range(d)))
    for base in itertools.product(range(K), repeat=d):
        for perm in perms:
            verts = [base]
            cur = list(base)
            for k in perm:
                cur[k] += 1
                verts.append(tuple(cur))
            if all(K >= v[0] and all(v[i] >= v[i + 1] for i in range(d - 1)) and (d == 0 or v[-1] >= 0)
                   for v in verts):
                yield verts


def _subdivision_search(ev: _Evaluator, levels=(4, 8, 16, 32)):
    """Locate ``mu`` in the image of a Freudenthal grid on the face simplex.

    ``f`` fixes the vertices of the face and preserves its sub-faces, so the
    piecewise-linear interpolant of ``f`` on any triangulation has degree one
    and some grid simplex has ``mu`` in the hull of its vertex images. The
    interpolated preimage is then handed to the exact chamber solve.
    """
    m, J = ev.m, ev.J
    d = len(J) - 1
    if d == 0:
        return None
    mu = np.array([float(ev.mu[j]) for j in J[:-1]] + [1.0])
    for K in levels:
        cache: dict[tuple, tuple] = {}

        def point(y):
            # ordered coordinates -> barycentric coordinates on the face
            bary = [K - y[0]] + [y[i] - y[i + 1] for i in range(d - 1)] + [y[-1]]
            a = [Fraction(0)] * m.N
            for j, c in zip(J, bary):
                a[j] = Fraction(c, K)
            return a

        def image(y):
            if y not in cache:
                a = point(y)
                cache[y] = (a, ev.measure(a))
            return cache[y]

        for verts in _kuhn_simplices(d, K):
            imgs = [image(v)[1] for v in verts]
            M = np.array([[float(im[j]) for im in imgs] for j in J[:-1]] + [[1.0] * (d + 1)])
            try:
                lam = np.linalg.solve(M, mu)
            except np.linalg.LinAlgError:
                continue
            if np.all(lam >= -1e-12):
                lam = np.maximum(lam, 0) / np.maximum(lam, 0).sum()
                pts = [image(v)[0] for v in verts]
                a = [sum((Fraction(float(l)).limit_denominator(ev.max_den) * p[r] for l, p in zip(lam, pts)),
                         Fraction(0)) for r in range(m.N)]
                total = sum(a)
                a = [x / total for x in a]
                hit = _chamber_solve(ev, a, pts)
                if hit is not None:
                    return hit
    return None


def solve_ma(m: Model, mu, tol: float = 1e-9, max_iter: int = 500, family: CalibratedFamily | None = None,
             restrict_support: bool = True, max_denominator: int = 10**12, polish: bool = True) -> SolveResult:
    """Find ``a`` in the simplex with ``MA(A + D_a) = mu``.

    Targets with zero masses are solved on the face spanned by their support
    (``f`` preserves faces); with ``restrict_support=False`` they are rejected.
    """
    if m.n != 1:
        raise DomainError("the fixed-point solver needs n = 1")
    target = _check_target(mu, m.N)
    J = [i for i, x in enumerate(target) if x > 0]
    if len(J) < m.N and not restrict_support:
        raise DomainError("target has zero masses and support restriction is disabled")
    fam = family or build_calibrated_divisors(m)
    ev = _Evaluator(m, fam, target, J, max_denominator)
    mu_J = np.array([float(target[j]) for j in J])

    x = np.full(len(J), 1.0 / len(J))
    a, masses, res = ev(x)
    lam = 0.5
    trace = [(0, float(res), lam)]
    method = "damped"
    it = 0
    while it < max_iter and res > tol:
        it += 1
        r = mu_J - np.array([float(masses[j]) for j in J])
        cand = _project_simplex(x + lam * r)
        a_c, masses_c, res_c = ev(cand)
        if res_c <= res:
            # flat pieces of f leave the residual unchanged; move but shorten the step
            if res_c == res:
                lam /= 2
            x, a, masses, res = cand, a_c, masses_c, res_c
        else:
            lam /= 2
        trace.append((it, float(res), lam))
        if lam < 1e-12:
            break

    if polish and res != 0:
        hit = _chamber_solve(ev, a)
        if hit is not None:
            a, masses = hit
            res = Fraction(0)
            method += "+chamber"

    if res > tol and len(J) <= 4:
        hit = _subdivision_search(ev)
        if hit is not None:
            a, masses = hit
            res = Fraction(0)
            method = "subdivision+chamber"
            trace.append((it, 0.0, 0.0))

    D = divisor_at(fam, a)
    return SolveResult(
        a=tuple(float(v) for v in a), a_exact=tuple(a), D=D, masses=tuple(masses),
        residual=float(res), residual_exact=Fraction(res), iterations=it,
        converged=res <= tol, method=method, trace=trace,
    )


# ---------------------------------------------------------------------------
# variational solver


@dataclass
class VariationalResult:
    D: ClassVector | None
    masses: tuple[Fraction, ...] | None
    residual: float
    dual_energy_lower_bound: Fraction | None
    attainable: bool
    iterations: int
    message: str = ""


def _objective(m: Model, D: ClassVector, mu: Sequence[Fraction]) -> Fraction:
    return energy(m, D) - sum((x * d / b for x, d, b in zip(mu, D.d, m.b)), Fraction(0))


def _certificate_values(m: Model, D: ClassVector) -> list[Fraction]:
    """Strict-positivity quantities of the certificate that do not depend on the gauge."""
    vals = []
    for c in m.curves:
        if m.curve_fiber_degree(c) == 0:
            vals.append(sum((x * p for x, p in zip(D.basis, c.pairing)), Fraction(0)))
    for i in range(m.N):
        vals.append(top_power_with(m, D, m.unit(i)))
    return vals


def certifying_gauge(m: Model, D: ClassVector) -> ClassVector:
    """Translate by ``c X0`` so that every horizontal catalog curve pairs positively.

    Starts from the min-zero gauge and adds the least integer ``c >= 0`` that works.
    """
    D0 = D - min(d / b for d, b in zip(D.d, m.b)) * m.zero_fiber()
    need = Fraction(-1)
    for c in m.curves:
        deg = m.curve_fiber_degree(c)
        if deg > 0:
            val = sum((x * p for x, p in zip(D0.basis, c.pairing)), Fraction(0))
            need = max(need, -val / deg)
    c = max(0, math.floor(need) + 1)
    return D0 + c * m.zero_fiber()


def _default_starts(m: Model) -> list[ClassVector]:
    graph = intersection_graph(m)
    dom = max(range(m.N), key=lambda i: contract(m, [m.class_A()] * m.n + [m.unit(i)]))
    starts = []
    for eps in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)):
        starts.append(ClassVector.divisor(tuple(-(eps ** graph.dist[dom][j]) * m.b[j] if j != dom else 0
                                                for j in range(m.N))))
    return starts


def variational_solve(m: Model, mu, tol: float = 1e-9, max_iter: int = 200, start: ClassVector | None = None,
                      boundary_margin: float = 1e-9, max_denominator: int = 10**12) -> VariationalResult:
    """Maximize ``E(D) - int f_D dmu`` over the certified Kahler region (gauge ``d_0 = 0``)."""
    target = _check_target(mu, m.N)
    if m.n == 1:
        return _variational_surface(m, target)
    N = m.N

    def cls(x) -> ClassVector:
        return ClassVector.divisor((Fraction(0),) + tuple(Fraction(float(v)) for v in x))

    def feasible(D) -> bool:
        return all(v > 0 for v in _certificate_values(m, D))

    candidates = [start] if start is not None else _default_starts(m)
    D = next((c - c.d[0] * m.zero_fiber() for c in candidates if feasible(c)), None)
    if D is None:
        return VariationalResult(None, None, math.inf, None, False, 0,
                                 "no certified starting point; pass start=")
    x = np.array([float(v) for v in D.d[1:]])
    mu_b = np.array([float(target[i] / m.b[i]) for i in range(1, N)])
    it = 0
    stalled = False
    while it < max_iter:
        it += 1
        Dx = cls(x)
        grad = np.array([float(g) for g in grad_energy(m, Dx)[1:]]) - mu_b
        if np.max(np.abs(grad)) < tol / 10:
            break
        H = np.array([[float(h) for h in row[1:]] for row in hessian_energy(m, Dx)[1:]])
        try:
            step = np.linalg.solve(H, -grad)
            if step @ grad <= 0:
                step = grad
        except np.linalg.LinAlgError:
            step = grad
        g0 = float(_objective(m, Dx, target))
        t = 1.0
        while t > 1e-14:
            cand = x + t * step
            Dc = cls(cand)
            if feasible(Dc) and float(_objective(m, Dc, target)) >= g0 - 1e-15:
                break
            t /= 2
        else:
            stalled = True
            break
        x = cand
    D = ClassVector.divisor((Fraction(0),) + tuple(rationalize(float(v), max_denominator) for v in x))
    vals = _certificate_values(m, D)
    margin = min(vals)
    if stalled or margin <= boundary_margin:
        return VariationalResult(None, None, math.inf, _objective(m, D, target) if margin > 0 else None, False, it,
                                 "target not attainable in Kahler chamber of this model (maximizer on the boundary)")
    D = certifying_gauge(m, D)
    masses = ma_kahler(m, D).masses
    res = max(abs(a - b) for a, b in zip(masses, target))
    if float(res) > tol:
        return VariationalResult(D, masses, float(res), _objective(m, D, target), False, it,
                                 "ascent did not reach the tolerance")
    return VariationalResult(D, masses, float(res), _objective(m, D, target), True, it, "ok")


def _variational_surface(m: Model, target: tuple[Fraction, ...]) -> VariationalResult:
    # the objective is an exact concave quadratic; its critical point solves a linear system
    N = m.N
    if N == 1:
        D = certifying_gauge(m, ClassVector.divisor((Fraction(0),)))
        return VariationalResult(D, ma_kahler(m, D).masses, 0.0, _objective(m, D, target), True, 0, "ok")
    G = m.gram
    Arow = m.form[0]
    rhs = [m.V * target[i] / m.b[i] - Arow[i + 1] for i in range(1, N)]
    x = solve([row[1:] for row in G[1:]], rhs)
    D = ClassVector.divisor((Fraction(0),) + tuple(x))
    if min(_certificate_values(m, D)) <= 0:
        return VariationalResult(None, None, math.inf, None, False, 1,
                                 "target not attainable in Kahler chamber of this model (maximizer on the boundary)")
    D = certifying_gauge(m, D)
    masses = ma_kahler(m, D).masses
    res = max(abs(a - b) for a, b in zip(masses, target))
    return VariationalResult(D, masses, float(res), _objective(m, D, target), True, 1, "ok")
