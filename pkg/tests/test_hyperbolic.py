import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bianchi_modsym.hyperbolic import (
    Cusp, Mat2, PointH3, UnsupportedLevelError, act, act_many, cusp_equivalent,
    inequivalent_cusps, stabilizer_index)
from bianchi_modsym.quadfield import QuadInt, canonical, field, qi_gcd, qi_xgcd

fin = st.floats(-3, 3)
cplx = st.builds(complex, fin, fin)
points = st.builds(PointH3, cplx, st.floats(0.05, 4))


@st.composite
def sl2(draw):
    a, b, c = draw(cplx), draw(cplx), draw(cplx)
    assume(abs(a) > 0.1)
    return Mat2(a, b, c, (1 + b * c) / a)


# quaternion oracle: alpha + beta j with j alpha = conj(alpha) j
def qmul(p, q):
    (a1, b1), (a2, b2) = p, q
    return (a1 * a2 - b1 * np.conj(b2), a1 * b2 + b1 * np.conj(a2))


def qinv(p):
    a, b = p
    n = abs(a) ** 2 + abs(b) ** 2
    return (np.conj(a) / n, -b / n)


def quaternion_action(g: Mat2, P: PointH3):
    x = (P.z, P.y)
    num = (g.a * x[0] + g.b, g.a * x[1])
    den = (g.c * x[0] + g.d, g.c * x[1])
    return qmul(num, qinv(den))


def hyperbolic_cosh(P, Q):
    return 1 + (abs(P.z - Q.z) ** 2 + (P.y - Q.y) ** 2) / (2 * P.y * Q.y)


@given(sl2(), points)
def test_action_matches_quaternion_formula(g, P):
    Q = act(g, P)
    z, y = quaternion_action(g, P)
    assert abs(Q.z - z) <= 1e-8 * (1 + abs(z))
    assert Q.y == pytest.approx(y.real, rel=1e-8)
    assert abs(y.imag) <= 1e-8 * abs(y)


@given(sl2(), sl2(), points)
def test_action_is_a_group_action(g, h, P):
    left = act(g @ h, P)
    right = act(g, act(h, P))
    assert abs(left.z - right.z) <= 1e-7 * (1 + abs(left.z))
    assert left.y == pytest.approx(right.y, rel=1e-7)


@given(sl2(), points, points)
def test_action_is_an_isometry(g, P, Q):
    before = hyperbolic_cosh(P, Q)
    after = hyperbolic_cosh(act(g, P), act(g, Q))
    assert after == pytest.approx(before, rel=1e-6)


def test_act_normalizes_determinant():
    P = PointH3(0.3 + 0.1j, 0.7)
    g = Mat2(2, 1, 1, 1)
    scaled = Mat2(6, 3, 3, 3)
    assert act(g, P).y == pytest.approx(act(scaled, P).y)


@given(sl2(), points)
def test_vectorized_action(g, P):
    z, y = act_many(g.a, g.b, g.c, g.d, np.array([P.z]), np.array([P.y]))
    Q = act(g, P)
    assert abs(z[0] - Q.z) <= 1e-8 * (1 + abs(Q.z)) and y[0] == pytest.approx(Q.y, rel=1e-8)


def test_point_validation():
    with pytest.raises(ValueError):
        PointH3(0j, 0.0)
    with pytest.raises(ValueError):
        Mat2(1, 1, 1, 1).normalized()


# -- cusps ---------------------------------------------------------------------------------

FLD = field(-1)
LEVEL = QuadInt(11, 0, FLD)


@st.composite
def cusps(draw):
    p = QuadInt(draw(st.integers(-30, 30)), draw(st.integers(-30, 30)), FLD)
    q = QuadInt(draw(st.integers(-30, 30)), draw(st.integers(-30, 30)), FLD)
    assume(not (p.is_zero() and q.is_zero()))
    return Cusp.make(p, q)


def gamma0_element(c_mult: QuadInt, d: QuadInt):
    """A matrix of Gamma_0(11) with lower row (11 c_mult, d), d coprime to 11 c_mult."""
    c = LEVEL * c_mult
    g, s, t = qi_xgcd(d, c)
    assert g.is_unit()
    u = g.exact_div(g * g)  # g^{-1}
    # s d + t c = g  =>  (s u) d - (-t u) c = 1
    return s * u, -(t * u), c, d


def apply(mat, r: Cusp) -> Cusp:
    a, b, c, d = mat
    if r.is_infinity:
        return Cusp.make(a, c)
    return Cusp.make(a * r.p + b * r.q, c * r.p + d * r.q)


def test_cusp_representatives_gaussian_level_11():
    reps = inequivalent_cusps(LEVEL)
    assert [str(r.q) for r in reps] == ["1", "11"]
    assert not cusp_equivalent(reps[0], reps[1], LEVEL)
    assert inequivalent_cusps(QuadInt(1, 0, FLD))[0].is_infinity


@given(cusps())
@settings(max_examples=60)
def test_cusp_class_is_decided_by_gcd_with_level(r):
    # for squarefree levels whose divisors d satisfy d + n/d = (1), classes match divisors
    g = canonical(qi_gcd(r.q, LEVEL)) if not r.q.is_zero() else canonical(LEVEL)
    matches = [rep for rep in inequivalent_cusps(LEVEL) if cusp_equivalent(r, rep, LEVEL)]
    assert len(matches) == 1
    assert canonical(matches[0].q) == g


@given(cusps(), st.integers(-4, 4), st.integers(-4, 4), st.integers(-5, 5), st.integers(-5, 5))
@settings(max_examples=60)
def test_cusp_equivalence_is_gamma0_invariant(r, ca, cb, da, db):
    d = QuadInt(da, db, FLD)
    c_mult = QuadInt(ca, cb, FLD)
    assume(not d.is_zero() and qi_gcd(d, LEVEL * c_mult if not c_mult.is_zero() else d).is_unit())
    mat = gamma0_element(c_mult, d)
    a, b, c, dd = mat
    assert a * dd - b * c == 1
    assert cusp_equivalent(r, apply(mat, r), LEVEL)


def test_cusp_make_and_parse():
    r = Cusp.parse("2/4", FLD)
    assert str(r) == "1/2" or canonical(r.q) == r.q
    assert r.value() == pytest.approx(0.5)
    with pytest.raises(ValueError):
        Cusp(QuadInt(2, 0, FLD), QuadInt(4, 0, FLD))
    with pytest.raises(UnsupportedLevelError):
        inequivalent_cusps(QuadInt(2, 0, FLD))


def test_stabilizer_index():
    assert [stabilizer_index(field(d)) for d in (-1, -2, -3)] == [2, 1, 3]
