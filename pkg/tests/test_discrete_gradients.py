import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from phdgp.discrete_gradients import (DiscreteGradientPair, MassMatrixError,
                                      midpoint_discrete_gradient, midpoint_discrete_gradient_pair,
                                      midpoint_dg, pair_for, verify_dg_axioms, verify_pair_axioms)
from phdgp.models import make_synthetic_nonlinear_ph

coords = st.floats(-2.0, 2.0, allow_nan=False)
vec4 = arrays(np.float64, 4, elements=coords)


def quartic_pair():
    E = lambda x: np.array([[1.0 + x[0] ** 2]])
    H = lambda x: 0.25 * x[0] ** 4
    z = lambda x: np.array([x[0] ** 3 / (1.0 + x[0] ** 2)])
    return midpoint_discrete_gradient_pair(H, E, z)


def test_dg_diagonal_branch_returns_gradient():
    x = np.array([0.3, -0.7])
    g = midpoint_discrete_gradient(lambda v: np.sin(v).sum(), np.cos, x, x.copy())
    np.testing.assert_array_equal(g, np.cos(x))


def test_dg_quadratic_is_midpoint_gradient():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3))
    Q = A + A.T
    x, xh = rng.standard_normal(3), rng.standard_normal(3)
    g = midpoint_discrete_gradient(lambda v: 0.5 * v @ Q @ v, lambda v: Q @ v, x, xh)
    np.testing.assert_allclose(g, Q @ (0.5 * (x + xh)), rtol=0, atol=1e-14)


def test_dg_scalar_quartic_is_difference_quotient():
    # n = 1: the secant property forces (H(2) - H(0)) / 2 = (4 - 0) / 2
    g = midpoint_discrete_gradient(lambda v: 0.25 * v[0] ** 4, lambda v: v ** 3,
                                   np.array([0.0]), np.array([2.0]))
    assert g[0] == pytest.approx(2.0, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_dg_scalar_equals_difference_quotient(a, b):
    H = lambda v: np.cosh(v[0]) + v[0] ** 3
    gradH = lambda v: np.sinh(v) + 3 * v ** 2
    g = midpoint_discrete_gradient(H, gradH, np.array([a]), np.array([b]))
    if abs(b - a) > 1e-6:
        assert g[0] == pytest.approx((H([b]) - H([a])) / (b - a), rel=1e-8, abs=1e-8)


@settings(max_examples=300, deadline=None)
@given(vec4, vec4)
def test_dg_secant_identity(x, xh):
    sys = make_synthetic_nonlinear_ph()
    g = midpoint_discrete_gradient(sys.H, sys.gradH, x, xh)
    assert abs(g @ (xh - x) - (sys.H(xh) - sys.H(x))) <= 1e-12


def test_pair_diagonal_branch():
    pair = quartic_pair()
    x = np.array([0.7])
    Eb, zb = pair.evaluate(x, x)
    assert Eb[0, 0] == 1.49 and zb[0] == pytest.approx(0.343 / 1.49, rel=1e-15)


def test_pair_scalar_hand_values():
    # mid = 0.5: Ebar = 1.25, z(mid) = 0.1, correction (0.25 - 0.125) / 1.25 = 0.1
    pair = quartic_pair()
    x, xh = np.array([0.0]), np.array([1.0])
    Eb, zb = pair.evaluate(x, xh)
    assert Eb[0, 0] == pytest.approx(1.25, abs=1e-15)
    assert zb[0] == pytest.approx(0.2, abs=1e-15)
    assert zb[0] * Eb[0, 0] * 1.0 == pytest.approx(0.25, abs=1e-15)
    np.testing.assert_array_equal(pair.zbar(x, xh), zb)
    np.testing.assert_array_equal(pair.Ebar(x, xh), Eb)


def test_pair_constant_E_quadratic_H_is_midpoint_effort():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((3, 3))
    E = np.eye(3) + A @ A.T
    C = rng.standard_normal((3, 3))
    Q = np.eye(3) + C @ C.T
    Z = np.linalg.solve(E, Q)
    pair = midpoint_discrete_gradient_pair(lambda v: 0.5 * v @ Q @ v, lambda v: E, lambda v: Z @ v)
    x, xh = rng.standard_normal(3), rng.standard_normal(3)
    np.testing.assert_allclose(pair.zbar(x, xh), Z @ (0.5 * (x + xh)), rtol=0, atol=1e-13)


def test_pair_axioms_on_scalar_model():
    rng = np.random.default_rng(2)
    samples = rng.uniform(-2, 2, (1000, 2, 1))
    d = verify_pair_axioms(quartic_pair(), [(s[0], s[1]) for s in samples])
    assert d.mass_consistency <= 1e-12
    assert d.effort_consistency <= 1e-12
    assert d.secant <= 1e-12


def test_pair_without_correction_breaks_secant():
    base = quartic_pair()
    naive = DiscreteGradientPair(Ebar=base.Ebar, zbar=lambda x, xh: base.z(0.5 * (x + xh)),
                                 H=base.H, E=base.E, z=base.z)
    d = verify_pair_axioms(naive, [(np.array([0.0]), np.array([1.5]))])
    assert d.secant > 1e-3


def test_pair_diagonal_samples_only():
    sys = make_synthetic_nonlinear_ph()
    rng = np.random.default_rng(4)
    pts = rng.uniform(-1, 1, (20, 4))
    d = verify_pair_axioms(pair_for(sys), [(p, p.copy()) for p in pts])
    assert d.mass_consistency == 0 and d.effort_consistency == 0 and d.secant == 0


@settings(max_examples=300, deadline=None)
@given(vec4, vec4)
def test_pair_secant_identity(x, xh):
    sys = make_synthetic_nonlinear_ph()
    Eb, zb = pair_for(sys).evaluate(x, xh)
    assert abs(zb @ Eb @ (xh - x) - (sys.H(xh) - sys.H(x))) <= 1e-12


def test_pair_continuity_at_diagonal():
    sys = make_synthetic_nonlinear_ph()
    pair = pair_for(sys)
    rng = np.random.default_rng(7)
    for _ in range(5):
        x = rng.uniform(-1, 1, 4)
        v = rng.standard_normal(4)
        v /= np.linalg.norm(v)
        dist = [np.linalg.norm(pair.zbar(x, x + 2.0 ** -k * v) - sys.z(x)) for k in range(1, 21)]
        assert all(b < a for a, b in zip(dist, dist[1:]))
        assert dist[-1] < 1e-5


def test_pair_rejects_indefinite_mass():
    pair = midpoint_discrete_gradient_pair(lambda v: 0.5 * v @ v, lambda v: -np.eye(2),
                                           lambda v: -v)
    with pytest.raises(MassMatrixError) as info:
        pair.zbar(np.zeros(2), np.ones(2))
    np.testing.assert_array_equal(info.value.xhat, np.ones(2))


def test_dg_axiom_checker():
    sys = make_synthetic_nonlinear_ph()
    rng = np.random.default_rng(9)
    cons, sec = verify_dg_axioms(midpoint_dg(sys.H, sys.gradH),
                                 zip(rng.uniform(-1, 1, (200, 4)), rng.uniform(-1, 1, (200, 4))))
    assert cons == 0.0 and sec <= 1e-12
