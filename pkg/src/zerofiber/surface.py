"""Positive intersection calculus on surface models (``n = 1``).

On a surface the positive product of a big class is the positive part of its
Zariski decomposition, Lelong numbers along components are the coefficients
of the negative part, and the restricted volume along a component is the
degree of the positive part on it (zero on the negative part).

Only vertical components are Zariski candidates. This is complete once the
divisor is translated so that ``D >= X0``, and translation by ``X0`` does not
change any pairing with a vertical component.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import BoundaryClassError, DomainError, ModelError, NotBigError, ZeroFiberError
from .linalg import SingularMatrixError, solve
from .model import (ClassVector, Component, Curve, DivisorialMeasure, Model,
                    gauge_normalize, validate_model)

KAHLER_LOCUS = "kahler-locus"
IN_ENK_NOT_ENN = "in-EnK-not-Enn"
IN_ENN = "in-Enn"


# ---------------------------------------------------------------------------
# model builder


@dataclass(frozen=True)
class BlowupStep:
    """One blow-up of a point of the zero fibre.

    ``interior``: ``args = (i,)``, a general point of ``E_i``.
    ``intersection``: ``args = (i, j)``, the crossing point of ``E_i`` and ``E_j``.
    ``on-section``: ``args = (section_name, i)``, the point where a tracked
    horizontal curve meets ``E_i``.
    """

    kind: str
    args: tuple

    def to_dict(self) -> dict:
        return {"kind": self.kind, "args": list(self.args)}

    @classmethod
    def from_dict(cls, doc: dict) -> "BlowupStep":
        return cls(str(doc["kind"]), tuple(doc.get("args", ())))


@dataclass
class SurfaceBuilder:
    V: Fraction
    names: list[str]
    b: list[Fraction]
    form: list[list[Fraction]]
    dominant: int = 0
    sections: dict[str, dict] = field(default_factory=dict)
    log: list[tuple[BlowupStep, int]] = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.b)

    def faces(self) -> list[tuple[int, ...]]:
        out = [(i,) for i in range(self.N)]
        out += [(i, j) for i in range(self.N) for j in range(i + 1, self.N) if self.form[i + 1][j + 1] > 0]
        return out

    @property
    def model(self) -> Model:
        size = self.N + 1
        tensor = {(i, j): self.form[i][j] for i in range(size) for j in range(i, size) if self.form[i][j]}
        comps = tuple(Component(i, name, b) for i, (name, b) in enumerate(zip(self.names, self.b)))
        curves = tuple(Curve(name, tuple(sec["pairing"])) for name, sec in self.sections.items())
        return Model(1, self.V, comps, tensor, tuple(self.faces()), curves)

    def _component(self, x) -> int:
        if isinstance(x, str) and not x.lstrip("-").isdigit():
            try:
                return self.names.index(x)
            except ValueError:
                raise DomainError(f"no component named {x!r}") from None
        i = int(x)
        if not 0 <= i < self.N:
            raise DomainError(f"component index {i} out of range")
        return i

    def _append(self, b_new: Fraction) -> int:
        for row in self.form:
            row.append(Fraction(0))
        self.form.append([Fraction(0)] * (self.N + 2))
        self.b.append(b_new)
        k = 1
        while f"E{k}" in self.names:
            k += 1
        self.names.append(f"E{k}")
        for sec in self.sections.values():
            sec["pairing"].append(Fraction(0))
        new = self.N - 1
        self.form[new + 1][new + 1] = Fraction(-1)
        return new

    def apply(self, step: BlowupStep) -> int:
        """Blow up in place; returns the id of the exceptional component."""
        f = self.form
        if step.kind == "interior":
            (i,) = step.args
            i = self._component(i)
            new = self._append(self.b[i])
            f[i + 1][i + 1] -= 1
            f[i + 1][new + 1] = f[new + 1][i + 1] = Fraction(1)
            if i == self.dominant:
                # the fibre of X x P^1 -> X through the centre is a horizontal curve
                pairing = [Fraction(0)] * (self.N + 1)
                pairing[new + 1] = Fraction(1)
                k = 1
                while f"G{k}" in self.sections:
                    k += 1
                self.sections[f"G{k}"] = {"pairing": pairing, "self": Fraction(-1)}
        elif step.kind == "intersection":
            i, j = (self._component(x) for x in step.args)
            if i == j or f[i + 1][j + 1] < 1:
                raise DomainError(f"components {self.names[i]} and {self.names[j]} do not meet")
            new = self._append(self.b[i] + self.b[j])
            f[i + 1][i + 1] -= 1
            f[j + 1][j + 1] -= 1
            f[i + 1][j + 1] -= 1
            f[j + 1][i + 1] -= 1
            for k in (i, j):
                f[k + 1][new + 1] = f[new + 1][k + 1] = Fraction(1)
        elif step.kind == "on-section":
            s, i = step.args
            if s not in self.sections:
                raise DomainError(f"no tracked section {s!r}")
            i = self._component(i)
            sec = self.sections[s]
            if sec["pairing"][i + 1] < 1:
                raise DomainError(f"section {s} does not meet {self.names[i]}")
            new = self._append(self.b[i])
            f[i + 1][i + 1] -= 1
            f[i + 1][new + 1] = f[new + 1][i + 1] = Fraction(1)
            sec["pairing"][i + 1] -= 1
            sec["pairing"][new + 1] = Fraction(1)
            sec["self"] -= 1
        else:
            raise DomainError(f"unknown blow-up kind {step.kind!r}")
        self.log.append((step, new))
        report = validate_model(self.model)
        if report:
            raise ModelError(f"blow-up produced an invalid model: {report}")
        return new

    def copy(self) -> "SurfaceBuilder":
        return copy.deepcopy(self)


def trivial_model(V=1) -> SurfaceBuilder:
    """The product model ``X x P^1`` with zero fibre ``E1 = X x {0}``."""
    V = Fraction(V)
    if V <= 0:
        raise DomainError("V must be positive")
    form = [[Fraction(0), V], [V, Fraction(0)]]
    return SurfaceBuilder(V=V, names=["E1"], b=[Fraction(1)], form=form)


def blowup(builder: SurfaceBuilder, step: BlowupStep) -> SurfaceBuilder:
    """Return a new builder with ``step`` applied."""
    out = builder.copy()
    out.apply(step)
    return out


def build(script: Sequence[BlowupStep | dict], V=1) -> SurfaceBuilder:
    b = trivial_model(V)
    for step in script:
        if isinstance(step, dict):
            step = BlowupStep.from_dict(step)
        b.apply(step)
    return b


# ---------------------------------------------------------------------------
# Zariski decomposition


@dataclass(frozen=True)
class ZariskiDecomposition:
    P: ClassVector
    N: tuple[Fraction, ...]
    support: tuple[int, ...]
    volume: Fraction

    @property
    def negative_part(self) -> ClassVector:
        return ClassVector(0, self.N)


def _require_surface(m: Model) -> None:
    if m.n != 1:
        raise DomainError("the surface engine needs a model with n = 1")


def vertical_pairings(m: Model, beta: ClassVector) -> list[Fraction]:
    """``beta . E_j`` for every component."""
    f = m.form
    v = beta.basis
    return [sum((v[k] * f[k][j + 1] for k in range(len(v)) if v[k]), Fraction(0)) for j in range(m.N)]


def _lex_neg(v: Fraction, dv: Fraction) -> bool:
    return v < 0 or (v == 0 and dv < 0)


def negative_part(m: Model, p: Sequence[Fraction], dp: Sequence[Fraction] | None = None):
    """Iterated negative-locus enlargement on the vertical components.

    ``p`` are the pairings ``beta . E_j``. With ``dp`` given, the class is
    ``beta + eps * delta`` for an infinitesimal ``eps > 0`` (``dp`` are the
    pairings of ``delta``) and comparisons are lexicographic; this selects
    the Zariski chamber on the positive side of ``beta`` along ``delta``.

    Returns ``(x0, x1, support)`` with negative part ``x0 + eps * x1``.
    """
    nc = m.N
    dp = list(dp) if dp is not None else [Fraction(0)] * nc
    G = m.gram
    S: list[int] = []
    x0 = [Fraction(0)] * nc
    x1 = [Fraction(0)] * nc
    while True:
        new = []
        for k in range(nc):
            if k in S:
                continue
            q0 = p[k] - sum((x0[j] * G[j][k] for j in S), Fraction(0))
            q1 = dp[k] - sum((x1[j] * G[j][k] for j in S), Fraction(0))
            if _lex_neg(q0, q1):
                new.append(k)
        if not new:
            return x0, x1, tuple(S)
        S = sorted(S + new)
        if len(S) == nc:
            raise NotBigError("not big: the negative locus would contain the whole zero fibre")
        GS = [[G[i][j] for j in S] for i in S]
        try:
            s0 = solve(GS, [p[j] for j in S])
            s1 = solve(GS, [dp[j] for j in S])
        except SingularMatrixError as exc:
            raise ZeroFiberError(f"internal invariant violated: singular Gram matrix on support {S}") from exc
        x0 = [Fraction(0)] * nc
        x1 = [Fraction(0)] * nc
        for idx, j in enumerate(S):
            x0[j], x1[j] = s0[idx], s1[idx]


def zariski(m: Model, beta: ClassVector) -> ZariskiDecomposition:
    """Zariski decomposition ``beta = P + N`` with ``N`` supported on the zero fibre."""
    _require_surface(m)
    normalized = gauge_normalize(m, beta, "dominate-X0")
    N, _, S = negative_part(m, vertical_pairings(m, normalized))
    P = beta - ClassVector(0, N)
    vol = m.pair(P, P)
    if vol < 0:
        raise NotBigError(f"not big: positive part has self-intersection {vol}")
    if vol == 0:
        raise BoundaryClassError("class on the boundary of the big cone (volume 0)")
    support = tuple(i for i in range(m.N) if N[i] > 0)
    if support != S or any(x < 0 for x in N):
        raise ZeroFiberError(f"internal invariant violated: support {S} vs positive coefficients {support}")
    return ZariskiDecomposition(P, tuple(N), support, vol)


def is_big(m: Model, beta: ClassVector) -> bool:
    try:
        zariski(m, beta)
    except NotBigError:
        return False
    return True


def volume(m: Model, beta: ClassVector) -> Fraction:
    return zariski(m, beta).volume


def restricted_volume(m: Model, beta: ClassVector, i: int, z: ZariskiDecomposition | None = None) -> Fraction:
    """Restricted volume along ``E_i``: ``P . E_i`` off the negative part, else 0."""
    z = z or zariski(m, beta)
    if i in z.support:
        return Fraction(0)
    return m.pair(z.P, m.unit(i))


def restricted_volumes(m: Model, beta: ClassVector, z: ZariskiDecomposition | None = None) -> list[Fraction]:
    z = z or zariski(m, beta)
    pairings = vertical_pairings(m, z.P)
    return [Fraction(0) if i in z.support else pairings[i] for i in range(m.N)]


def lelong(m: Model, beta: ClassVector) -> list[Fraction]:
    return list(zariski(m, beta).N)


def ma_big(m: Model, D: ClassVector, z: ZariskiDecomposition | None = None) -> DivisorialMeasure:
    """Monge-Ampere measure ``V^{-1} sum_i b_i <(A+D)>_{|E_i} delta_i`` of a big class."""
    _require_surface(m)
    rv = restricted_volumes(m, D, z)
    return DivisorialMeasure(tuple(b * r / m.V for b, r in zip(m.b, rv)))


def envelope_values(m: Model, D: ClassVector) -> list[Fraction]:
    """Envelope of the PL function of ``D`` at the divisorial points, ``(d_i - N_i) / b_i``."""
    z = zariski(m, D)
    return [(d - nu) / b for d, nu, b in zip(D.d, z.N, m.b)]


def orthogonality_pairing(m: Model, D: ClassVector) -> Fraction:
    """``sum_i (f_D - P(f_D))(v_i) * MA(P(f_D))_i``; vanishes by orthogonality."""
    z = zariski(m, D)
    masses = ma_big(m, D, z).masses
    return sum((nu / b * mass for nu, b, mass in zip(z.N, m.b, masses)), Fraction(0))


def classify_components(m: Model, beta: ClassVector) -> list[str]:
    z = zariski(m, beta)
    pairings = vertical_pairings(m, z.P)
    out = []
    for i in range(m.N):
        if z.N[i] > 0:
            out.append(IN_ENN)
        elif pairings[i] == 0:
            out.append(IN_ENK_NOT_ENN)
        else:
            out.append(KAHLER_LOCUS)
    return out


# ---------------------------------------------------------------------------
# volume along a line


@dataclass(frozen=True)
class Chamber:
    """``vol(beta + t delta) = c0 + c1 t + c2 t^2`` for ``t`` in ``[t0, t1]``."""

    t0: Fraction
    t1: Fraction
    support: tuple[int, ...]
    c0: Fraction
    c1: Fraction
    c2: Fraction

    def __call__(self, t) -> Fraction:
        return self.c0 + self.c1 * t + self.c2 * t * t


def volume_along(m: Model, beta: ClassVector, delta: ClassVector, length) -> list[Chamber]:
    """Exact piecewise-quadratic volume of ``beta + t delta`` for ``0 <= t <= length``.

    Walks the Zariski chambers crossed by the segment; inside a chamber the
    negative part is affine in ``t``.
    """
    _require_surface(m)
    length = Fraction(length)
    if length <= 0:
        raise DomainError("segment length must be positive")
    base = gauge_normalize(m, beta, "dominate-X0")
    p = vertical_pairings(m, base)
    dp = vertical_pairings(m, delta)
    pieces: list[Chamber] = []
    t = Fraction(0)
    for _ in range(4 * m.N + 8):
        pt = [a + t * b for a, b in zip(p, dp)]
        _, _, S = negative_part(m, pt, dp)
        G = m.gram
        GS = [[G[i][j] for j in S] for i in S]
        s0 = solve(GS, [p[j] for j in S]) if S else []
        s1 = solve(GS, [dp[j] for j in S]) if S else []
        x0 = [Fraction(0)] * m.N
        x1 = [Fraction(0)] * m.N
        for idx, j in enumerate(S):
            x0[j], x1[j] = s0[idx], s1[idx]
        P0 = beta - ClassVector(0, x0)  # positive part at t = 0 of the chamber's affine formula
        P1 = delta - ClassVector(0, x1)
        q0 = vertical_pairings(m, P0)
        q1 = vertical_pairings(m, P1)
        walls = [length]
        for k in range(m.N):
            if k in S:
                if x1[k] < 0:
                    walls.append(-x0[k] / x1[k])
            elif q1[k] < 0:
                walls.append(-q0[k] / q1[k])
        t_next = min(w for w in walls if w > t)
        pieces.append(Chamber(t, t_next, S, m.pair(P0, P0), 2 * m.pair(P0, P1), m.pair(P1, P1)))
        if t_next >= length:
            break
        t = t_next
    else:
        raise ZeroFiberError("chamber walk did not terminate")
    for c in pieces:
        if c(c.t1) <= 0 or c(c.t0) <= 0:
            raise NotBigError(f"class leaves the big cone on the segment near t = {c.t1}")
    return pieces


@dataclass(frozen=True)
class DerivativeCheck:
    left: Fraction
    right: Fraction
    target: Fraction
    err_left: Fraction
    err_right: Fraction
    C: Fraction
    bound: Fraction
    left_corrected: Fraction
    right_corrected: Fraction
    left_single_chamber: bool
    right_single_chamber: bool
    good: bool

    @property
    def within_bound(self) -> bool:
        return self.err_left <= self.bound and self.err_right <= self.bound


def volume_derivative_check(m: Model, beta: ClassVector, i: int, h) -> DerivativeCheck:
    """One-sided difference quotients of ``t -> vol(beta + t E_i)`` at 0.

    The target is ``dim * rv(beta, E_i)`` with ``dim = n + 1 = 2`` the
    dimension of the model. ``C`` is the largest ``|c2|`` over the chambers
    crossed within distance ``h``, so ``|quotient - target| <= h * C``.
    Within a single chamber the corrected slopes ``right - h c2`` and
    ``left + h c2`` equal the target exactly.
    """
    _require_surface(m)
    h = Fraction(h)
    if h <= 0:
        raise DomainError("h must be positive")
    E = m.unit(i)
    z = zariski(m, beta)
    try:
        vol_plus = volume(m, beta + h * E)
        vol_minus = volume(m, beta - h * E)
        right_pieces = volume_along(m, beta, E, h)
        left_pieces = volume_along(m, beta, -E, h)
    except NotBigError as exc:
        raise NotBigError(f"beta +- h E_{i} is not big; shrink h (h = {h})") from exc
    right = (vol_plus - z.volume) / h
    left = (z.volume - vol_minus) / h
    target = (m.n + 1) * restricted_volume(m, beta, i, z)
    C = max(abs(c.c2) for c in right_pieces + left_pieces)
    status = classify_components(m, beta)[i]
    return DerivativeCheck(
        left=left, right=right, target=target,
        err_left=abs(left - target), err_right=abs(right - target),
        C=C, bound=h * C,
        left_corrected=left + h * left_pieces[0].c2,
        right_corrected=right - h * right_pieces[0].c2,
        left_single_chamber=len(left_pieces) == 1,
        right_single_chamber=len(right_pieces) == 1,
        good=status != IN_ENK_NOT_ENN,
    )
