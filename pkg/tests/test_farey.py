import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bianchi_modsym.farey import (
    InsufficientDataError, InvalidDivisorError, count_Q, count_fit, dual_vector, enumerate_Q,
    read_csv, weyl_sum)
from bianchi_modsym.quadfield import (
    QuadInt, canonical, euler_phi, factor, field, is_coprime, qi_gcd, smallest_dual_vectors)


def brute_force_Q(n: QuadInt, d: QuadInt, X: float) -> set:
    """Fractions a/c (as rounded points of C / O_K) found by scanning boxes of elements."""
    fld = n.field
    w = fld.omega
    R = int(2 * X + abs(fld.trace_w) * X) + 2
    out = set()
    for ca, cb in itertools.product(range(-R, R + 1), repeat=2):
        c = QuadInt(ca, cb, fld)
        if c.is_zero() or not abs(complex(c)) < X or canonical(c) != c:
            continue
        if canonical(qi_gcd(c, n)) != canonical(d):
            continue
        N = c.norm()
        cc = c.conj()
        # numerators: all residues of a box, keyed by a * conj(c) mod N
        seen = set()
        r = int(math.isqrt(N)) * 2 + 3
        for aa, ab in itertools.product(range(-r, r + 1), repeat=2):
            a = QuadInt(aa, ab, fld)
            p = a * cc
            key = (p.a % N, p.b % N)
            if key in seen or not is_coprime(a, c):
                continue
            seen.add(key)
            # a/c = (p + q w)/N reduced into [0,1) + [0,1) w
            z = (key[0] + key[1] * w) / N
            out.add((round(z.real, 9), round(z.imag, 9), ca, cb))
    return out


def as_points(S):
    z = S.values()
    return {(round(v.real, 9), round(v.imag, 9), int(ca), int(cb))
            for v, (ca, cb) in zip(z, S.c.tolist())}


@pytest.mark.parametrize("d,level,divisor,X", [
    (-1, (11, 0), (1, 0), 5.0), (-1, (11, 0), (11, 0), 12.0), (-3, (7, 0), (1, 0), 4.0),
    (-2, (1, 0), (1, 0), 4.0)])
def test_enumeration_matches_brute_force(d, level, divisor, X):
    fld = field(d)
    n, dd = QuadInt(*level, fld), QuadInt(*divisor, fld)
    S = enumerate_Q(n, dd, X)
    want = brute_force_Q(n, dd, X)
    assert len(S) == len(want) == count_Q(n, dd, X)
    assert as_points(S) == want


def test_split_prime_divisor_classes_partition():
    fld = field(-3)
    n = QuadInt(7, 0, fld)
    p1, p2 = (pi for pi, _ in factor(n))
    X = 9.0
    parts = [count_Q(n, dv, X) for dv in (QuadInt(1, 0, fld), p1, p2, n)]
    total = sum(euler_phi(QuadInt(a, b, fld)) for a in range(-30, 31) for b in range(-30, 31)
                if 0 < abs(complex(QuadInt(a, b, fld))) < X and canonical(QuadInt(a, b, fld)) == QuadInt(a, b, fld))
    assert sum(parts) == total


def test_rows_are_reduced_sorted_and_coprime():
    fld = field(-1)
    n = QuadInt(11, 0, fld)
    S = enumerate_Q(n, QuadInt(1, 0, fld), 8.0)
    assert np.all(np.diff(S.absc) >= 0)
    assert np.all(S.absc < 8.0)
    for frac in list(S)[::37]:
        assert is_coprime(frac.a, frac.c) or frac.c.is_unit()
        assert is_coprime(frac.c, n)
        # reduced into the half-open parallelogram
        z = frac.value
        w = fld.omega
        t = z.imag / w.imag
        s = z.real - t * w.real
        assert 0 <= s < 1 and 0 <= t < 1


def test_strict_radius():
    fld = field(-1)
    n = QuadInt(11, 0, fld)
    # |3 + w| = |1 + i| = sqrt 2, so X = sqrt 2 excludes it
    S = enumerate_Q(n, QuadInt(1, 0, fld), math.sqrt(2))
    assert len(S) == 1 and S.absc[0] == 1.0


def test_restrict_matches_fresh_enumeration():
    fld = field(-1)
    n = QuadInt(11, 0, fld)
    big = enumerate_Q(n, QuadInt(1, 0, fld), 12.0)
    small = enumerate_Q(n, QuadInt(1, 0, fld), 7.0)
    sub = big.restrict(7.0)
    assert np.array_equal(sub.a, small.a) and np.array_equal(sub.c, small.c)


def test_denominator_groups_cover_rows():
    fld = field(-1)
    S = enumerate_Q(QuadInt(11, 0, fld), QuadInt(1, 0, fld), 6.0)
    groups = S.denominator_groups()
    assert sum(sl.stop - sl.start for _, sl in groups) == len(S)
    for c, sl in groups:
        assert (sl.stop - sl.start) == euler_phi(c) or c.is_unit()


def test_invalid_divisors():
    fld = field(-1)
    n = QuadInt(11, 0, fld)
    with pytest.raises(InvalidDivisorError):
        enumerate_Q(n, QuadInt(3, 0, fld), 5)
    with pytest.raises(InvalidDivisorError):
        enumerate_Q(QuadInt(2, 0, fld), QuadInt(1, 0, fld), 5)  # (2) is not squarefree
    with pytest.raises(ValueError):
        enumerate_Q(n, QuadInt(1, 0, fld), 0)


def test_csv_roundtrip(tmp_path):
    fld = field(-1)
    S = enumerate_Q(QuadInt(11, 0, fld), QuadInt(11, 0, fld), 25.0)
    path = tmp_path / "q.csv"
    S.write_csv(path)
    T = read_csv(path, fld)
    assert np.array_equal(S.a, T.a) and np.array_equal(S.c, T.c)
    assert T.X == S.X and str(T.divisor) == "11"
    # same file written twice is byte-identical
    path2 = tmp_path / "q2.csv"
    S.write_csv(path2)
    assert path.read_bytes() == path2.read_bytes()


def test_csv_shards(tmp_path):
    fld = field(-1)
    S = enumerate_Q(QuadInt(11, 0, fld), QuadInt(1, 0, fld), 6.0)
    paths = S.write_csv(tmp_path / "q.csv", shard_size=100)
    assert len(paths) == math.ceil(len(S) / 100)
    T = read_csv(tmp_path / "q.csv", fld)
    assert np.array_equal(S.a, T.a)


def test_count_fit_is_near_four():
    fld = field(-1)
    slope = count_fit(QuadInt(11, 0, fld), QuadInt(1, 0, fld), [10, 14, 20, 28])
    assert 3.8 <= slope <= 4.2
    with pytest.raises(InsufficientDataError):
        count_fit(QuadInt(11, 0, fld), QuadInt(1, 0, fld), [10, 14])


def test_weyl_sum_matches_direct_evaluation():
    fld = field(-1)
    S = enumerate_Q(QuadInt(11, 0, fld), QuadInt(1, 0, fld), 8.0)
    z = S.values()
    for m in smallest_dual_vectors(fld):
        mu = dual_vector(fld, *m)
        direct = np.sum(np.exp(2j * np.pi * (mu.real * z.real + mu.imag * z.imag)))
        assert abs(weyl_sum(S, m) - direct) <= 1e-8 * len(S)
        assert abs(weyl_sum(S, mu) - direct) <= 1e-8 * len(S)
    assert weyl_sum(S, (0, 0)) == len(S)
    with pytest.raises(ValueError):
        weyl_sum(S, 0.3 + 0.1j)


@given(st.floats(2, 9))
@settings(max_examples=15, deadline=None)
def test_counts_are_monotone(X):
    fld = field(-1)
    n, one = QuadInt(11, 0, fld), QuadInt(1, 0, fld)
    assert count_Q(n, one, X) <= count_Q(n, one, X + 0.5)
