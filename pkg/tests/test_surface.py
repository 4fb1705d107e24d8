from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from zerofiber.errors import BoundaryClassError, NotBigError
from zerofiber.model import ClassVector, gauge_normalize, is_kahler_certified, ma_kahler, validate_model
from zerofiber.surface import (IN_ENK_NOT_ENN, IN_ENN, KAHLER_LOCUS, BlowupStep, build, classify_components,
                               envelope_values, is_big, lelong, ma_big, orthogonality_pairing, restricted_volume,
                               restricted_volumes, trivial_model, volume, volume_along, volume_derivative_check,
                               zariski)

from .conftest import rationals, surface_models


def D(*d):
    return ClassVector.divisor([F(x) for x in d])


def test_trivial_model():
    m = trivial_model(1).model
    assert m.tensor == {(0, 1): 1}
    assert validate_model(m) == []
    assert trivial_model(2).model.entry(0, 1) == 2
    assert ma_kahler(m, D(0)).masses == (1,)


def test_builder_reproduces_shipped_models(m1, chain3):
    b1 = build([BlowupStep("interior", (0,))])
    assert b1.model.tensor == m1.tensor
    b2 = build([BlowupStep("interior", (0,)), BlowupStep("intersection", (0, 1))])
    m = b2.model
    assert m.tensor == chain3.tensor
    assert m.b == (1, 1, 2)
    assert m.entry(3, 3) == -1 and m.entry(1, 2) == 0 and m.entry(1, 3) == 1 and m.entry(2, 3) == 1
    x0 = m.zero_fiber()
    assert all(m.pair(x0, m.unit(i)) == 0 for i in range(3))


def test_builder_script_dicts_match_steps():
    steps = [BlowupStep("interior", (0,)), BlowupStep("intersection", (0, 1))]
    assert build([s.to_dict() for s in steps]).model == build(steps).model


@given(surface_models(max_steps=8))
def test_random_builds_are_valid(m):
    assert validate_model(m) == []


def test_zariski_examples(m1):
    z = zariski(m1, D(F(9, 4), 1))
    assert z.N == (F(1, 4), 0) and z.support == (0,) and z.volume == 3
    assert (m1.pair(z.P, m1.unit(0)), m1.pair(z.P, m1.unit(1))) == (0, 1)
    z = zariski(m1, D(1, 1))
    assert z.N == (0, 0) and z.support == ()
    z = zariski(m1, D(1, 3))
    assert z.N == (0, 2)
    assert (m1.pair(z.P, m1.unit(0)), m1.pair(z.P, m1.unit(1))) == (1, 0)


def test_volume_examples(m1):
    assert volume(m1, D(F(9, 4), 1)) == 3
    for c in (F(1, 2), 1, F(7, 3)):
        assert volume(m1, D(c, c)) == 2 * c
    assert volume(m1, D(1, 2)) >= volume(m1, D(1, 1))


def test_not_big_and_boundary(m1):
    with pytest.raises(BoundaryClassError):
        zariski(m1, D(0, 0))
    with pytest.raises(NotBigError):
        zariski(m1, D(-1, -1))
    assert not is_big(m1, D(0, 0))


def test_restricted_volumes_and_lelong(m1):
    assert restricted_volumes(m1, D(F(9, 4), 1)) == [0, 1]
    assert restricted_volumes(m1, D(1, 3)) == [1, 0]
    assert lelong(m1, D(F(9, 4), 1)) == [F(1, 4), 0]
    assert lelong(m1, D(1, 3)) == [0, 2]
    k = D(1, F(1, 2))
    assert lelong(m1, k) == [0, 0]
    assert [restricted_volume(m1, k, i) for i in range(2)] == [m1.pair(k, m1.unit(i)) for i in range(2)]


def test_ma_big_examples(m1):
    assert ma_big(m1, D(F(9, 4), 1)).masses == (0, 1)
    assert ma_big(m1, D(1, F(1, 2))) == ma_kahler(m1, D(1, F(1, 2)))
    assert ma_big(m1, D(1, 3)).masses == (1, 0)


def test_envelope_and_orthogonality(m1):
    assert envelope_values(m1, D(F(9, 4), 1)) == [2, 1]
    assert envelope_values(m1, D(1, 3)) == [1, 1]
    assert envelope_values(m1, D(1, F(1, 2))) == [1, F(1, 2)]
    for d in (D(F(9, 4), 1), D(1, 3), D(1, F(1, 2))):
        assert orthogonality_pairing(m1, d) == 0


def test_classification(m1):
    assert classify_components(m1, D(F(9, 4), 1)) == [IN_ENN, KAHLER_LOCUS]
    assert classify_components(m1, D(1, F(1, 2))) == [KAHLER_LOCUS, KAHLER_LOCUS]
    assert classify_components(m1, D(1, 1))[1] == IN_ENK_NOT_ENN


def test_volume_along_is_continuous_and_exact(m1):
    beta, delta = D(2, 0), D(0, 1)
    pieces = volume_along(m1, beta, delta, 4)
    assert pieces[0].t0 == 0 and pieces[-1].t1 == 4
    for a, b in zip(pieces, pieces[1:]):
        assert a.t1 == b.t0 and a(a.t1) == b(b.t0)
    for t in (F(0), F(1, 3), F(3, 2), F(5, 2), F(4)):
        piece = next(p for p in pieces if p.t0 <= t <= p.t1)
        assert piece(t) == volume(m1, beta + t * delta)


def test_derivative_boundary_example(m1):
    chk = volume_derivative_check(m1, D(1, 1), 1, F(1, 8))
    assert chk.target == 0
    assert chk.err_right <= chk.bound and chk.C <= 2
    assert not chk.good


def test_derivative_interior_kahler(m1):
    beta = D(F(3, 2), F(5, 4))
    assert is_kahler_certified(m1, beta)
    chk = volume_derivative_check(m1, beta, 0, F(1, 64))
    assert chk.left_single_chamber and chk.right_single_chamber
    assert chk.left_corrected == chk.right_corrected == chk.target == 2 * m1.pair(beta, m1.unit(0))
    assert min(chk.left, chk.right) <= chk.target <= max(chk.left, chk.right)


def test_derivative_inside_negative_chamber(m1):
    # E2 carries negative part 1/4 here, and the slope along E1 sees P . E1 = 1
    beta = D(F(3, 2), F(7, 4))
    assert zariski(m1, beta).N == (0, F(1, 4))
    chk = volume_derivative_check(m1, beta, 0, F(1, 64))
    assert chk.target == 2
    assert chk.left_corrected == chk.right_corrected == 2


def test_derivative_leaving_big_cone(m1):
    with pytest.raises(NotBigError):
        volume_derivative_check(m1, D(F(1, 8), F(1, 8)), 0, 4)


@given(surface_models(), st.data())
def test_probability_and_orthogonality_on_random_models(m, data):
    d = data.draw(st.lists(rationals(), min_size=m.N, max_size=m.N))
    beta = gauge_normalize(m, ClassVector.divisor(d))
    mu = ma_big(m, beta)
    assert mu.is_probability()
    assert orthogonality_pairing(m, beta) == 0
    z = zariski(m, beta)
    assert all(mu.masses[i] == 0 for i in z.support)


@given(surface_models(), st.data())
def test_kahler_and_big_measures_agree(m, data):
    d = data.draw(st.lists(rationals(), min_size=m.N, max_size=m.N))
    beta = gauge_normalize(m, ClassVector.divisor(d))
    if is_kahler_certified(m, beta):
        assert ma_big(m, beta) == ma_kahler(m, beta)
        assert zariski(m, beta).support == ()


@given(surface_models(), st.data())
def test_gauge_invariance_of_zariski(m, data):
    d = data.draw(st.lists(rationals(), min_size=m.N, max_size=m.N))
    c = data.draw(rationals(0, 4))
    beta = gauge_normalize(m, ClassVector.divisor(d))
    assert zariski(m, beta + c * m.zero_fiber()).N == zariski(m, beta).N
