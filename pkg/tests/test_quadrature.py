import math

import numpy as np
import pytest

import oracle_values as ov
from qent.errors import ToleranceNotReached
from qent.quadrature import simplex_quadrature


def test_one_state():
    logZ, p = simplex_quadrature([1.5])
    assert logZ == -1.5 and p.tolist() == [1.0]


@pytest.mark.parametrize("n", [2, 3])
def test_uniform(n):
    logZ, p = simplex_quadrature(np.zeros(n))
    assert logZ == 0.0
    np.testing.assert_allclose(p, 1.0 / n, atol=1e-15)


def test_two_state_closed_form():
    for a in (1e-6, 1e-2, 0.7, 1.0, 3.0, 12.0):
        logZ, p = simplex_quadrature([-a, a])
        assert logZ == pytest.approx(math.log(math.sinh(a) / a), rel=1e-10)
        d = -2 * a   # lam1 - lam2
        assert p[0] == pytest.approx(1 / d - 1 / math.expm1(d), rel=1e-10)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_frozen_values():
    assert simplex_quadrature([-1.0, 1.0])[0] == pytest.approx(ov.LOGZ_2, rel=1e-12)
    np.testing.assert_allclose(simplex_quadrature([-1.0, 1.0])[1], ov.P_LAM1, rtol=1e-12)
    assert simplex_quadrature([0.0, 1.0, 2.0])[0] == pytest.approx(ov.LOGZ_3, rel=1e-12)


def test_gauge():
    a, pa = simplex_quadrature([0.2, -0.5, 0.3])
    b, pb = simplex_quadrature([3.2, 2.5, 3.3])
    assert b == pytest.approx(a - 3.0, abs=1e-12)
    np.testing.assert_allclose(pa, pb, rtol=1e-10)


def test_small_branch_boundary():
    # both integrand forms agree where they meet
    a = simplex_quadrature([-1.0 + 1e-12, 0.5, 0.5 - 1e-12])
    b = simplex_quadrature([-1.0 - 1e-12, 0.5, 0.5 + 1e-12])
    assert a[0] == pytest.approx(b[0], rel=1e-10)


def test_unsupported_dimension():
    with pytest.raises(ValueError):
        simplex_quadrature(np.zeros(4))


def test_unreachable_tolerance():
    with pytest.raises(ToleranceNotReached):
        simplex_quadrature([-30.0, 30.0], tol=1e-20)
