"""Power nonlinearities and the growth-hypotheses audit."""

from __future__ import annotations

import numpy as np
import pytest

from indefbvp import Nonlinearity, audit_hypotheses, make_power
from indefbvp.errors import InvalidExponent


def test_cubic_values():
    g = make_power(3)
    assert g.g(2.0) == pytest.approx(8.0)
    assert g.g_prime(2.0) == pytest.approx(12.0)
    assert g.g_int(2.0) == pytest.approx(4.0)


def test_extension_below_zero():
    g = make_power(3)
    assert g.g(-1.0) == 0.0
    assert g.g_prime(-1.0) == 0.0
    assert g.g(0.0) == 0.0
    assert g.g_prime(0.0) == 0.0
    arr = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
    np.testing.assert_allclose(g.g(arr), [0.0, 0.0, 0.0, 0.125, 8.0])


def test_invalid_exponent():
    with pytest.raises(InvalidExponent):
        make_power(1.0)
    with pytest.raises(InvalidExponent):
        make_power(0.5)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
def test_euler_identity(p):
    # s g'(s) = p g(s) for pure powers
    g = make_power(p)
    s = np.geomspace(1e-3, 1e3, 301)
    np.testing.assert_allclose(g.g_prime(s) * s, p * g.g(s), rtol=1e-14)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_audit_margin_formula(p):
    g = make_power(p)
    s = np.geomspace(1e-2, 1e2, 201)
    audit = audit_hypotheses(g, s)
    # g'(s) - g(s)/s = (p-1) s^(p-1); the minimum sits at the smallest point
    expected = (p - 1.0) * s[0] ** (p - 1.0)
    assert audit.gs_margin_min == pytest.approx(expected, rel=1e-12)
    assert audit.all_ok


def test_linear_case_fails_star_shapedness():
    g = Nonlinearity(
        g=lambda s: np.maximum(np.asarray(s, dtype=float), 0.0),
        g_prime=lambda s: (np.asarray(s, dtype=float) > 0).astype(float),
        descriptor="linear",
    )
    audit = audit_hypotheses(g, np.geomspace(1e-2, 1e2, 101))
    assert not audit.gs_ok
    assert audit.gs_margin_min == pytest.approx(0.0, abs=1e-15)
    assert not audit.g0_ok and not audit.ginf_ok


def test_audit_grid_validation():
    g = make_power(3)
    with pytest.raises(ValueError):
        audit_hypotheses(g, [-1.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        audit_hypotheses(g, [2.0, 1.0, 3.0])
