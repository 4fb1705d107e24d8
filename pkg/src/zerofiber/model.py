"""Combinatorial SNC test configurations and their Kahler-case calculus.

A model is stored as a symmetric intersection tensor of degree ``n + 1`` on
the basis ``{A, E_1, ..., E_N}``. Basis index 0 is ``A``; component ``i``
(0-based) sits at basis index ``i + 1``. Tensor keys are sorted tuples of
basis indices, so symmetry holds by construction and absent keys read as 0.

The numerical class of the general fibre is ``X0 = sum_i b_i E_i``; there is
no separate generator for it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, ModelError, NotKahlerError

Key = tuple[int, ...]


def frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted where an exact rational is required")
    return Fraction(x)


@lru_cache(maxsize=None)
def _distinct_permutations(key: Key) -> tuple[Key, ...]:
    return tuple(sorted(set(itertools.permutations(key))))


@dataclass(frozen=True)
class Component:
    id: int
    name: str
    b: Fraction


@dataclass(frozen=True)
class Curve:
    """A curve class known only through its pairings with ``A, E_1..E_N``."""

    name: str
    pairing: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "pairing", tuple(frac(x) for x in self.pairing))


@dataclass(frozen=True)
class ClassVector:
    """The class ``s*A + sum_i d_i E_i``."""

    s: Fraction
    d: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "s", frac(self.s))
        object.__setattr__(self, "d", tuple(frac(x) for x in self.d))

    @classmethod
    def divisor(cls, d: Iterable) -> "ClassVector":
        """``A + D`` for the vertical divisor with coefficients ``d``."""
        return cls(Fraction(1), tuple(d))

    @classmethod
    def from_basis(cls, v: Sequence) -> "ClassVector":
        return cls(v[0], tuple(v[1:]))

    @property
    def basis(self) -> tuple[Fraction, ...]:
        return (self.s,) + self.d

    def __add__(self, other: "ClassVector") -> "ClassVector":
        if len(self.d) != len(other.d):
            raise ModelError("class vectors of different length")
        return ClassVector(self.s + other.s, tuple(x + y for x, y in zip(self.d, other.d)))

    def __sub__(self, other: "ClassVector") -> "ClassVector":
        return self + (-1) * other

    def __mul__(self, c) -> "ClassVector":
        c = frac(c)
        return ClassVector(c * self.s, tuple(c * x for x in self.d))

    __rmul__ = __mul__

    def __neg__(self) -> "ClassVector":
        return (-1) * self


@dataclass(frozen=True)
class DivisorialMeasure:
    masses: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(frac(x) for x in self.masses))

    @property
    def total(self) -> Fraction:
        return sum(self.masses, Fraction(0))

    def is_probability(self) -> bool:
        return all(m >= 0 for m in self.masses) and self.total == 1


@dataclass(frozen=True)
class Violation:
    identity: str
    detail: str
    value: Fraction | None = None


@dataclass(frozen=True)
class Model:
    n: int
    V: Fraction
    components: tuple[Component, ...]
    tensor: Mapping[Key, Fraction]
    faces: tuple[tuple[int, ...], ...] = ()
    curves: tuple[Curve, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("n must be >= 1")
        object.__setattr__(self, "V", frac(self.V))
        size = self.N + 1
        clean: dict[Key, Fraction] = {}
        for key, val in self.tensor.items():
            key = tuple(sorted(key))
            if len(key) != self.n + 1:
                raise ModelError(f"tensor degree mismatch: key {key} has size {len(key)}, expected {self.n + 1}")
            if any(k < 0 or k >= size for k in key):
                raise ModelError(f"tensor key {key} out of range for {self.N} components")
            if key in clean:
                raise ModelError(f"tensor key {key} given twice")
            clean[key] = frac(val)
        object.__setattr__(self, "tensor", {k: v for k, v in sorted(clean.items()) if v})
        faces = {tuple(sorted(set(f))) for f in self.faces}
        for f in faces:
            if not f or any(i < 0 or i >= self.N for i in f):
                raise ModelError(f"face {f} is not a nonempty set of component ids")
        object.__setattr__(self, "faces", tuple(sorted(faces, key=lambda f: (len(f), f))))
        for c in self.curves:
            if len(c.pairing) != size:
                raise ModelError(f"curve {c.name} pairing has length {len(c.pairing)}, expected {size}")
        for i, comp in enumerate(self.components):
            if comp.id != i:
                raise ModelError("component ids must be 0..N-1 in order")

    # -- basic accessors -------------------------------------------------

    @property
    def N(self) -> int:
        return len(self.components)

    @property
    def b(self) -> tuple[Fraction, ...]:
        return tuple(c.b for c in self.components)

    @property
    def basis_names(self) -> list[str]:
        return ["A"] + [c.name for c in self.components]

    def component_index(self, name: str) -> int:
        for c in self.components:
            if c.name == name:
                return c.id
        raise ModelError(f"no component named {name!r}")

    def zero_fiber(self) -> ClassVector:
        return ClassVector(0, self.b)

    def unit(self, i: int) -> ClassVector:
        return ClassVector(0, tuple(Fraction(int(j == i)) for j in range(self.N)))

    def class_A(self) -> ClassVector:
        return ClassVector(1, (0,) * self.N)

    def entry(self, *key: int) -> Fraction:
        return self.tensor.get(tuple(sorted(key)), Fraction(0))

    @cached_property
    def form(self) -> list[list[Fraction]]:
        """Dense bilinear form on the basis; only meaningful for ``n == 1``."""
        if self.n != 1:
            raise ModelError("dense bilinear form is only available for n = 1")
        size = self.N + 1
        return [[self.entry(i, j) for j in range(size)] for i in range(size)]

    @cached_property
    def gram(self) -> list[list[Fraction]]:
        """Intersection matrix of the vertical components (``n == 1``)."""
        return [row[1:] for row in self.form[1:]]

    def pair(self, x: ClassVector, y: ClassVector) -> Fraction:
        """Intersection of two classes on a surface model."""
        f = self.form
        xb, yb = x.basis, y.basis
        total = Fraction(0)
        for i, xi in enumerate(xb):
            if xi:
                row = f[i]
                total += xi * sum((row[j] * yj for j, yj in enumerate(yb) if yj and row[j]), Fraction(0))
        return total

    def curve_fiber_degree(self, c: Curve) -> Fraction:
        """``X0 . C``; zero for curves inside the zero fibre."""
        return sum((b * p for b, p in zip(self.b, c.pairing[1:])), Fraction(0))

    def with_tensor_entry(self, key: Key, value) -> "Model":
        t = dict(self.tensor)
        t[tuple(sorted(key))] = frac(value)
        return Model(self.n, self.V, self.components, t, self.faces, self.curves)


def _vector(m: Model, c) -> tuple[Fraction, ...]:
    if isinstance(c, ClassVector):
        if len(c.d) != m.N:
            raise ModelError(f"class has {len(c.d)} divisor coefficients, model has {m.N} components")
        return c.basis
    v = tuple(frac(x) for x in c)
    if len(v) != m.N + 1:
        raise ModelError("basis vector has wrong length")
    return v


def contract(m: Model, classes: Sequence) -> Fraction:
    """Multilinear extension of the intersection tensor evaluated on ``n + 1`` classes."""
    if len(classes) != m.n + 1:
        raise ModelError(f"contract needs {m.n + 1} classes, got {len(classes)}")
    vecs = [_vector(m, c) for c in classes]
    if m.n == 1:
        f = m.form
        x, y = vecs
        return sum((xi * f[i][j] * yj for i, xi in enumerate(x) if xi
                    for j, yj in enumerate(y) if yj and f[i][j]), Fraction(0))
    total = Fraction(0)
    for key, val in m.tensor.items():
        for perm in _distinct_permutations(key):
            prod = val
            for vec, idx in zip(vecs, perm):
                c = vec[idx]
                if not c:
                    break
                prod *= c
            else:
                total += prod
    return total


def validate_model(m: Model) -> list[Violation]:
    """Check the identities every test configuration satisfies.

    (a) ``X0 . X0 . gamma = 0`` and ``X0 . E_j . gamma = 0`` for every basis
    monomial ``gamma`` of degree n-1,
    (b) ``A^n . X0 = V``, (c) ``A^{n+1} = 0``, (d) all multiplicities positive,
    (e) every singleton is a face. An empty list means the model is valid.
    """
    report: list[Violation] = []
    x0 = m.zero_fiber()
    A = m.class_A()
    basis = [A] + [m.unit(i) for i in range(m.N)]
    names = m.basis_names
    for gamma in itertools.combinations_with_replacement(range(m.N + 1), m.n - 1):
        rest = [basis[g] for g in gamma]
        label = "".join("." + names[g] for g in gamma)
        val = contract(m, [x0, x0] + rest)
        if val != 0:
            report.append(Violation("(a)", f"X0.X0{label} = {val}, expected 0", val))
        # X0 is numerically trivial on each vertical component, which implies the line above
        for j in range(m.N):
            val = contract(m, [x0, basis[j + 1]] + rest)
            if val != 0:
                report.append(Violation("(a)", f"X0.{names[j + 1]}{label} = {val}, expected 0", val))
    val = contract(m, [A] * m.n + [x0])
    if val != m.V:
        report.append(Violation("(b)", f"A^n.X0 = {val}, expected V = {m.V}", val))
    val = contract(m, [A] * (m.n + 1))
    if val != 0:
        report.append(Violation("(c)", f"A^(n+1) = {val}, expected 0", val))
    for c in m.components:
        if c.b <= 0:
            report.append(Violation("(d)", f"multiplicity of {c.name} is {c.b}, expected > 0", c.b))
    if m.V <= 0:
        report.append(Violation("(d)", f"V = {m.V}, expected > 0", m.V))
    faces = set(m.faces)
    for i in range(m.N):
        if (i,) not in faces:
            report.append(Violation("(e)", f"singleton face {{{i}}} missing"))
    return report


def top_power_with(m: Model, beta: ClassVector, other) -> Fraction:
    """``beta^n . other``."""
    return contract(m, [beta] * m.n + [other])


def energy(m: Model, D: ClassVector) -> Fraction:
    """Energy ``(A+D)^{n+1} / ((n+1) V)`` of the model potential of ``D``."""
    beta = _as_class(m, D)
    return contract(m, [beta] * (m.n + 1)) / ((m.n + 1) * m.V)


def grad_energy(m: Model, D: ClassVector) -> list[Fraction]:
    """Partial derivatives of :func:`energy` in the coefficients ``d_i``."""
    beta = _as_class(m, D)
    return [top_power_with(m, beta, m.unit(i)) / m.V for i in range(m.N)]


def hessian_energy(m: Model, D: ClassVector) -> list[list[Fraction]]:
    """Second derivatives ``n (A+D)^{n-1} E_i E_j / V``."""
    beta = _as_class(m, D)
    units = [m.unit(i) for i in range(m.N)]
    H = [[Fraction(0)] * m.N for _ in range(m.N)]
    for i in range(m.N):
        for j in range(i, m.N):
            v = m.n * contract(m, [beta] * (m.n - 1) + [units[i], units[j]]) / m.V
            H[i][j] = H[j][i] = v
    return H


def _as_class(m: Model, D) -> ClassVector:
    if isinstance(D, ClassVector):
        if len(D.d) != m.N:
            raise ModelError(f"divisor has {len(D.d)} coefficients, model has {m.N} components")
        return D
    return ClassVector.divisor(D)


def kahler_violations(m: Model, D: ClassVector) -> list[tuple[str, Fraction]]:
    """Failed strict positivity conditions of the catalog certificate."""
    beta = _as_class(m, D)
    bad = []
    for c in m.curves:
        val = sum((x * p for x, p in zip(beta.basis, c.pairing)), Fraction(0))
        if val <= 0:
            bad.append((c.name, val))
    for comp in m.components:
        val = top_power_with(m, beta, m.unit(comp.id))
        if val <= 0:
            bad.append((comp.name, val))
    return bad


def is_kahler_certified(m: Model, D: ClassVector) -> bool:
    return not kahler_violations(m, D)


def ma_kahler(m: Model, D: ClassVector) -> DivisorialMeasure:
    """Monge-Ampere measure ``V^{-1} sum_i b_i (A+D)^n.E_i delta_i`` of a Kahler class."""
    beta = _as_class(m, D)
    bad = kahler_violations(m, beta)
    if bad:
        raise NotKahlerError(bad)
    return DivisorialMeasure(tuple(c.b * top_power_with(m, beta, m.unit(c.id)) / m.V
                                   for c in m.components))


def eval_pl(m: Model, D: ClassVector, face: Sequence[int], w: Sequence) -> Fraction:
    """Value of the PL function of ``D`` at the point ``w`` of the simplex of ``face``.

    ``w`` is aligned with ``sorted(face)``; the simplex is
    ``{w >= 0 : sum_i w_i b_i <= 1}`` and vertex ``i`` is ``w = e_i / b_i``.
    """
    key = tuple(sorted(face))
    if key not in set(m.faces):
        raise DomainError(f"{key} is not a face of the dual complex")
    w = [frac(x) for x in w]
    if len(w) != len(key):
        raise DomainError("weight vector length does not match face")
    if any(x < 0 for x in w) or sum(x * m.components[i].b for x, i in zip(w, key)) > 1:
        raise DomainError(f"weights {w} lie outside the face simplex")
    d = _as_class(m, D).d
    return sum((x * d[i] for x, i in zip(w, key)), Fraction(0))


def gauge_constant(m: Model, D: ClassVector, mode: str) -> Fraction:
    d = _as_class(m, D).d
    ratios = [di / bi for di, bi in zip(d, m.b)]
    if mode == "min-zero":
        return -min(ratios)
    if mode == "dominate-X0":
        return max(1 - r for r in ratios)
    raise ValueError(f"unknown gauge mode {mode!r}")


def gauge_normalize(m: Model, D: ClassVector, mode: str = "dominate-X0") -> ClassVector:
    """Translate ``D`` by ``c X0``.

    ``min-zero`` makes ``min_i d_i / b_i = 0``; ``dominate-X0`` picks the least
    ``c`` with ``D + c X0 >= X0`` coefficientwise.
    """
    D = _as_class(m, D)
    return D + gauge_constant(m, D, mode) * m.zero_fiber()
