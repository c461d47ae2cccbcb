import cmath
import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bianchi_modsym.quadfield import (
    EUCLIDEAN_D, QuadInt, UnsupportedFieldError, canonical, coprime_mask, divisors, dual_basis,
    euler_phi, factor, field, hnf_basis, hurwitz_zeta2, inverse_mod, is_coprime, is_squarefree,
    kronecker, pairing, qi, qi_gcd, qi_xgcd, residue_grid, residues_coprime, smallest_dual_vectors,
    split_type, units, zeta_K2)

small = st.integers(-60, 60)
fields = st.sampled_from(EUCLIDEAN_D)


@st.composite
def elements(draw, nonzero=False, d=None):
    d = draw(fields) if d is None else d
    a, b = draw(small), draw(small)
    if nonzero:
        assume((a, b) != (0, 0))
    return QuadInt(a, b, field(d))


@st.composite
def pairs(draw, nonzero=False):
    d = draw(fields)
    return draw(elements(d=d)), draw(elements(nonzero=nonzero, d=d))


# -- field constants ----------------------------------------------------------------------

@pytest.mark.parametrize("d,d_K,units_", [(-1, -4, 4), (-2, -8, 2), (-3, -3, 6), (-7, -7, 2),
                                          (-11, -11, 2)])
def test_field_constants(d, d_K, units_):
    fld = field(d)
    assert fld.d_K == d_K and fld.unit_count == units_
    w = fld.omega
    # w is a root of x^2 - d_K x + (d_K^2 - d_K)/4
    assert abs(w * w - fld.trace_w * w + fld.norm_w) < 1e-12
    assert fld.covol_P == pytest.approx(abs(w.imag))
    assert len(units(fld)) == units_


def test_gaussian_omega_convention():
    assert field(-1).omega == pytest.approx(-2 + 1j)


@pytest.mark.parametrize("d", [-19, -43, -67, -163, -5, 3])
def test_non_euclidean_fields_rejected(d):
    with pytest.raises(UnsupportedFieldError, match="Euclidean"):
        field(d)


# -- ring structure ---------------------------------------------------------------------------

@given(pairs())
def test_arithmetic_matches_complex_numbers(xy):
    x, y = xy
    for got, want in [(x + y, complex(x) + complex(y)), (x - y, complex(x) - complex(y)),
                      (x * y, complex(x) * complex(y)), (x.conj(), complex(x).conjugate())]:
        assert abs(complex(got) - want) <= 1e-9 * (1 + abs(want))


@given(pairs())
def test_norm_is_multiplicative(xy):
    x, y = xy
    assert (x * y).norm() == x.norm() * y.norm()
    assert x.norm() == pytest.approx(abs(complex(x)) ** 2)


@given(pairs(nonzero=True))
def test_euclidean_division(xy):
    x, y = xy
    r = x % y
    assert r.norm() < y.norm()
    assert y.divides(x - r)


@given(pairs())
def test_xgcd_bezout(xy):
    x, y = xy
    assume(not (x.is_zero() and y.is_zero()))
    g, s, t = qi_xgcd(x, y)
    assert s * x + t * y == g
    assert g == qi_gcd(x, y)
    assert g.divides(x) and g.divides(y)
    assert canonical(g) == g


@given(pairs(nonzero=True))
def test_inverse_mod(xy):
    x, m = xy
    assume(not m.is_unit() and is_coprime(x, m))
    inv = inverse_mod(x, m)
    assert m.divides(x * inv - 1)


@given(elements(nonzero=True))
def test_canonical_is_a_unit_multiple_and_idempotent(x):
    c = canonical(x)
    assert canonical(c) == c
    assert c.exact_div(x).is_unit()
    assert all(canonical(u * x) == c for u in units(x.field))


@given(st.text(max_size=6))
def test_parse_rejects_or_roundtrips(text):
    fld = field(-1)
    try:
        q = QuadInt.parse(text, fld)
    except ValueError:
        return
    assert QuadInt.parse(str(q), fld) == q


@given(elements())
def test_parse_roundtrip(x):
    assert QuadInt.parse(str(x), x.field) == x


def test_parse_forms():
    fld = field(-1)
    assert QuadInt.parse("3-w", fld) == QuadInt(3, -1, fld)
    assert QuadInt.parse("-2*w", fld) == QuadInt(0, -2, fld)
    assert QuadInt.parse("w", fld) == QuadInt(0, 1, fld)
    assert QuadInt.parse("-w", fld) == QuadInt(0, -1, fld)
    assert QuadInt.parse("7", fld) == QuadInt(7, 0, fld)
    assert QuadInt.parse("4+3*w", fld) == QuadInt(4, 3, fld)
    with pytest.raises(ValueError):
        QuadInt.parse("1+i", fld)


# -- primes ------------------------------------------------------------------------------------

@pytest.mark.parametrize("d", EUCLIDEAN_D)
def test_kronecker_matches_legendre(d):
    d_K = field(d).d_K
    for p in [3, 5, 7, 11, 13, 17, 19, 23, 29, 31]:
        # Euler's criterion
        r = pow(d_K % p, (p - 1) // 2, p)
        want = 0 if r == 0 else (1 if r == 1 else -1)
        assert kronecker(d_K, p) == want


@pytest.mark.parametrize("d", EUCLIDEAN_D)
def test_split_type_counts_residues(d):
    fld = field(d)
    for p in [2, 3, 5, 7, 11, 13, 17, 19, 23]:
        kind = split_type(p, fld)
        n_primes = len(kind.primes)
        assert {"inert": 1, "ramified": 1, "split": 2}[kind.kind] == n_primes
        prod = 1
        for pi in kind.primes:
            prod *= pi.norm()
        assert prod == (p * p if kind.kind == "inert" else p if kind.kind == "ramified" else p * p)


@given(elements(nonzero=True))
@settings(max_examples=60)
def test_factor_reconstructs(x):
    prod = QuadInt(1, 0, x.field)
    for pi, e in factor(x):
        prod = prod * pi**e
    assert canonical(prod) == canonical(x)


def test_squarefree_and_divisors():
    fld = field(-1)
    assert is_squarefree(QuadInt(11, 0, fld))
    assert not is_squarefree(QuadInt(2, 0, fld))  # (2) = (1+i)^2
    assert len(divisors(QuadInt(5, 0, fld))) == 4  # 5 splits
    assert len(divisors(QuadInt(3, 0, fld))) == 2  # 3 is inert


# -- residues -----------------------------------------------------------------------------

def _brute_residues(c):
    """Residues mod (c) found by scanning a box; x = y mod c iff (x - y) conj(c) = 0 mod N(c)."""
    fld = c.field
    N = c.norm()
    R = 2 * int(math.isqrt(N)) + 4
    cc = c.conj()
    classes, invertible = set(), set()
    for a, b in itertools.product(range(-R, R + 1), repeat=2):
        x = QuadInt(a, b, fld)
        p = x * cc
        key = (p.a % N, p.b % N)
        if key not in classes:
            classes.add(key)
            if is_coprime(x, c):
                invertible.add(key)
    return len(classes), len(invertible)


@pytest.mark.parametrize("d,coords", [(-1, (3, 1)), (-1, (2, 0)), (-2, (1, 1)), (-3, (4, 1)),
                                      (-7, (2, 1)), (-11, (3, 0))])
def test_residue_counts_against_brute_force(d, coords):
    c = QuadInt(*coords, field(d))
    total, invertible = _brute_residues(c)
    assert total == c.norm() == len(residue_grid(c))
    assert invertible == euler_phi(c) == len(residues_coprime(c))


@given(fields, st.integers(-12, 12), st.integers(-6, 6))
@settings(max_examples=40)
def test_hnf_grid_is_a_complete_residue_system(d, a, b):
    c = QuadInt(a, b, field(d))
    assume(0 < c.norm() <= 400)
    A, B, C = hnf_basis(c)
    assert A * C == c.norm() and 0 <= B < A
    grid = residue_grid(c)
    # pairwise incongruent: differences of distinct rows are not multiples of c
    for i in range(0, len(grid), max(1, len(grid) // 8)):
        x = QuadInt(*grid[i], c.field)
        for j in range(len(grid)):
            if j != i:
                assert not c.divides(x - QuadInt(*grid[j], c.field))
    mask = coprime_mask(grid, c)
    assert int(mask.sum()) == euler_phi(c)


# -- zeta and dual lattice -------------------------------------------------------------------

@pytest.mark.parametrize("q", [0.25, 0.5, 1.0, 1.0 / 3.0, 0.9])
def test_hurwitz_zeta2_against_mpmath(q):
    assert hurwitz_zeta2(q) == pytest.approx(float(mpmath.zeta(2, q)), rel=1e-14)


def test_zeta_K2_gaussian_closed_form():
    # zeta_Q(i)(2) = zeta(2) * Catalan's constant
    assert zeta_K2(field(-1)) == pytest.approx(math.pi ** 2 / 6 * float(mpmath.catalan), rel=1e-13)


@pytest.mark.parametrize("d", EUCLIDEAN_D)
def test_dual_basis_pairs_to_identity(d):
    fld = field(d)
    basis = dual_basis(fld)
    assert pairing(basis.mu1, 1) == pytest.approx(1) and pairing(basis.mu1, fld.omega) == pytest.approx(0, abs=1e-12)
    assert pairing(basis.mu2, 1) == pytest.approx(0, abs=1e-12) and pairing(basis.mu2, fld.omega) == pytest.approx(1)
    vecs = smallest_dual_vectors(fld, 4)
    lengths = [abs(basis.element(*m)) for m in vecs]
    assert np.all(np.diff(lengths) >= -1e-12) and len(set(vecs)) == 4
    # nothing outside the list is shorter than its longest member
    others = [abs(basis.element(m1, m2)) for m1 in range(-30, 31) for m2 in range(-30, 31)
              if (m1, m2) != (0, 0) and (m1, m2) not in vecs]
    assert min(others) >= lengths[-1] - 1e-12


def test_qi_shorthand():
    assert qi(1, 1) == QuadInt(1, 1, field(-1))
    assert qi(1, 1, -3).field.d == -3
    assert cmath.isclose(complex(qi(0, 1, -3)), field(-3).omega)
