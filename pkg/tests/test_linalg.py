from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from zerofiber.linalg import SingularMatrixError, inertia, is_negative_definite, rationalize, solve

from .conftest import rationals


def test_solve_small_system():
    assert solve([[F(2), F(1)], [F(1), F(3)]], [F(3), F(5)]) == [F(4, 5), F(7, 5)]


def test_singular_matrix_raises():
    with pytest.raises(SingularMatrixError):
        solve([[F(1), F(2)], [F(2), F(4)]], [F(1), F(1)])


@given(st.lists(rationals(), min_size=9, max_size=9), st.lists(rationals(), min_size=3, max_size=3))
def test_solve_satisfies_system(entries, b):
    a = [entries[0:3], entries[3:6], entries[6:9]]
    try:
        x = solve(a, b)
    except SingularMatrixError:
        return
    assert [sum(a[i][j] * x[j] for j in range(3)) for i in range(3)] == b


def test_inertia_and_definiteness():
    assert inertia([[F(-1), F(1)], [F(1), F(-1)]]) == (0, 1, 1)
    assert inertia([[F(0), F(1)], [F(1), F(0)]]) == (1, 1, 0)
    assert is_negative_definite([[F(-2), F(1)], [F(1), F(-1)]])
    assert not is_negative_definite([[F(-1), F(1)], [F(1), F(-1)]])
    assert is_negative_definite([])


def test_rationalize():
    assert rationalize(0.25) == F(1, 4)
    assert rationalize(1 / 3) == F(1, 3)
