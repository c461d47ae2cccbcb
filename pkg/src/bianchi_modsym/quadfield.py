"""Exact arithmetic in the ring of integers of a Euclidean imaginary quadratic field.

Elements are stored in the Z-basis {1, w} with w = (d_K + sqrt(d_K)) / 2.
Only the five norm-Euclidean fields d in {-1, -2, -3, -7, -11} are supported.
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from sympy import factorint, isprime
from sympy.ntheory import sqrt_mod

EUCLIDEAN_D = (-1, -2, -3, -7, -11)


class UnsupportedFieldError(ValueError):
    pass


@dataclass(frozen=True)
class FieldParams:
    d: int
    d_K: int
    unit_count: int
    covol_P: float

    @property
    def omega(self) -> complex:
        return (self.d_K + cmath.sqrt(self.d_K)) / 2

    @property
    def trace_w(self) -> int:
        return self.d_K

    @property
    def norm_w(self) -> int:
        return (self.d_K * self.d_K - self.d_K) // 4

    @property
    def sqrt_abs_dK(self) -> float:
        return math.sqrt(-self.d_K)

    def __repr__(self) -> str:
        return f"FieldParams(d={self.d})"


@lru_cache(maxsize=None)
def field(d: int) -> FieldParams:
    """Return the parameters of Q(sqrt(d)); raise for anything but the Euclidean five."""
    if d not in EUCLIDEAN_D:
        raise UnsupportedFieldError(
            f"d={d} is not supported: only the norm-Euclidean fields d in {EUCLIDEAN_D} "
            "are implemented (gcd and fraction reduction need Euclidean division)")
    d_K = d if d % 4 == 1 else 4 * d
    units = {-1: 4, -3: 6}.get(d, 2)
    return FieldParams(d=d, d_K=d_K, unit_count=units, covol_P=math.sqrt(-d_K) / 2)


class QuadInt:
    """An element a + b*w of O_K."""

    __slots__ = ("a", "b", "field")

    def __init__(self, a: int, b: int, fld: FieldParams):
        self.a = int(a)
        self.b = int(b)
        self.field = fld

    # -- construction / conversion -------------------------------------------------
    @classmethod
    def parse(cls, text: str, fld: FieldParams) -> QuadInt:
        """Parse the "a+b*w" encoding (also "a", "b*w", "a-w")."""
        s = text.replace(" ", "")
        # a constant term, when present, must be followed by a signed w term
        m = (re.fullmatch(r"([+-]?\d+)", s) or re.fullmatch(r"()([+-]?\d*)\*?w", s)
             or re.fullmatch(r"([+-]?\d+)([+-]\d*)\*?w", s))
        if m is None:
            raise ValueError(f"cannot parse QuadInt from {text!r}")
        a = int(m.group(1)) if m.group(1) else 0
        bs = m.group(2) if m.lastindex and m.lastindex >= 2 else None
        if bs is None:
            b = 0
        elif bs in ("", "+"):
            b = 1
        elif bs == "-":
            b = -1
        else:
            b = int(bs)
        return cls(a, b, fld)

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        return f"{self.a}{self.b:+d}*w"

    def __repr__(self) -> str:
        return f"QuadInt({self.a}, {self.b}, d={self.field.d})"

    def __complex__(self) -> complex:
        return self.a + self.b * self.field.omega

    @property
    def coords(self) -> tuple[int, int]:
        return (self.a, self.b)

    # -- ring operations -------------------------------------------------------------
    def _coerce(self, other) -> QuadInt:
        if isinstance(other, QuadInt):
            return other
        if isinstance(other, int):
            return QuadInt(other, 0, self.field)
        return NotImplemented

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self.b == 0 and self.a == other
        if isinstance(other, QuadInt):
            return self.a == other.a and self.b == other.b and self.field == other.field
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.field.d))

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.a + o.a, self.b + o.b, self.field)

    __radd__ = __add__

    def __neg__(self) -> QuadInt:
        return QuadInt(-self.a, -self.b, self.field)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadInt(self.a - o.a, self.b - o.b, self.field)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        t, n = self.field.trace_w, self.field.norm_w
        a, b, c, d = self.a, self.b, o.a, o.b
        return QuadInt(a * c - b * d * n, a * d + b * c + b * d * t, self.field)

    __rmul__ = __mul__

    def conj(self) -> QuadInt:
        return QuadInt(self.a + self.b * self.field.trace_w, -self.b, self.field)

    def norm(self) -> int:
        a, b = self.a, self.b
        return a * a + self.field.trace_w * a * b + self.field.norm_w * b * b

    def __abs__(self) -> float:
        return math.sqrt(self.norm())

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_unit(self) -> bool:
        return self.norm() == 1

    def divides(self, other: QuadInt) -> bool:
        if self.is_zero():
            return other.is_zero()
        p = other * self.conj()
        n = self.norm()
        return p.a % n == 0 and p.b % n == 0

    def exact_div(self, other: QuadInt) -> QuadInt:
        """self / other, raising if the quotient is not integral."""
        p = self * other.conj()
        n = other.norm()
        if n == 0 or p.a % n or p.b % n:
            raise ArithmeticError(f"{other} does not divide {self}")
        return QuadInt(p.a // n, p.b // n, self.field)

    __floordiv__ = exact_div

    def round_div(self, other: QuadInt) -> QuadInt:
        """Nearest-lattice-point quotient q, so that N(self - q*other) < N(other)."""
        p = self * other.conj()
        n = other.norm()
        qa, qb = Fraction(p.a, n), Fraction(p.b, n)
        # lattice rows sit at Im = b Im(w); the nearest point lies in one of the two rows
        # adjacent to the target, and within a row Re shifts by (qb - b) Re(w)
        half_t = Fraction(self.field.trace_w, 2)
        best = None
        for b in (math.floor(qb), math.floor(qb) + 1):
            x = qa + (qb - b) * half_t
            for a in (math.floor(x), math.floor(x) + 1):
                q = QuadInt(a, b, self.field)
                r = (self - q * other).norm()
                if best is None or r < best[0]:
                    best = (r, q)
        return best[1]

    def __mod__(self, other: QuadInt) -> QuadInt:
        return self - self.round_div(other) * other

    def __pow__(self, k: int) -> QuadInt:
        out = QuadInt(1, 0, self.field)
        base = self
        while k > 0:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out


def qi(a: int, b: int = 0, d: int = -1) -> QuadInt:
    return QuadInt(a, b, field(d))


@lru_cache(maxsize=None)
def units(fld: FieldParams) -> tuple[QuadInt, ...]:
    """All units of O_K, ordered by argument starting at 1."""
    out = []
    for a in range(-3, 4):
        for b in range(-2, 3):
            u = QuadInt(a, b, fld)
            if u.norm() == 1:
                out.append(u)
    out.sort(key=lambda u: cmath.phase(complex(u)) % (2 * math.pi))
    assert len(out) == fld.unit_count
    return tuple(out)


def _in_canonical_sector(q: QuadInt) -> bool:
    # 2q = X + Y*sqrt(|d_K|) i  with X = 2a + b*t, Y = b
    fld = q.field
    X = 2 * q.a + q.b * fld.trace_w
    Y = q.b
    if fld.unit_count == 2:
        return Y > 0 or (Y == 0 and X > 0)
    if fld.unit_count == 4:
        # arg in [0, pi/2): real part > 0, imaginary part >= 0
        return X > 0 and Y >= 0
    # arg in [0, pi/3): Im >= 0 and Im < sqrt(3) Re, with sqrt(|d_K|) = sqrt(3)
    return Y >= 0 and X > 0 and Y < X


def canonical(q: QuadInt) -> QuadInt:
    """The associate of q with argument in [0, 2*pi/|O_K^*|)."""
    if q.is_zero():
        return q
    for u in units(q.field):
        v = u * q
        if _in_canonical_sector(v):
            return v
    raise AssertionError("no canonical associate found")


def mul_coords(a1, b1, a2, b2, fld: FieldParams):
    """Product of (a1 + b1 w)(a2 + b2 w) on integer arrays."""
    t, n = fld.trace_w, fld.norm_w
    return a1 * a2 - b1 * b2 * n, a1 * b2 + b1 * a2 + b1 * b2 * t


def canonical_array(a: np.ndarray, b: np.ndarray, fld: FieldParams) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized `canonical` on coordinate arrays (zeros map to zero)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out_a = np.zeros_like(a)
    out_b = np.zeros_like(b)
    for u in units(fld):
        ua, ub = mul_coords(u.a, u.b, a, b, fld)
        X = 2 * ua + ub * fld.trace_w
        Y = ub
        if fld.unit_count == 2:
            ok = (Y > 0) | ((Y == 0) & (X > 0))
        elif fld.unit_count == 4:
            ok = (X > 0) & (Y >= 0)
        else:
            ok = (Y >= 0) & (X > 0) & (Y < X)
        out_a = np.where(ok, ua, out_a)
        out_b = np.where(ok, ub, out_b)
    return out_a, out_b


def qi_gcd(x: QuadInt, y: QuadInt) -> QuadInt:
    if x.field.d not in EUCLIDEAN_D:
        raise UnsupportedFieldError(f"gcd needs a Euclidean field, got d={x.field.d}")
    if x.is_zero() and y.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    while not y.is_zero():
        x, y = y, x % y
    return canonical(x)


def qi_xgcd(x: QuadInt, y: QuadInt) -> tuple[QuadInt, QuadInt, QuadInt]:
    """Return (g, s, t) with s*x + t*y = g, g the canonical gcd."""
    fld = x.field
    one, zero = QuadInt(1, 0, fld), QuadInt(0, 0, fld)
    r0, r1, s0, s1, t0, t1 = x, y, one, zero, zero, one
    while not r1.is_zero():
        q = r0.round_div(r1)
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    g = canonical(r0)
    u = g.exact_div(r0) if not r0.is_zero() else one
    return g, s0 * u, t0 * u


def inverse_mod(x: QuadInt, m: QuadInt) -> QuadInt:
    """x^{-1} mod (m); raises when x is not invertible."""
    if m.is_unit():
        return QuadInt(0, 0, x.field)
    g, s, _ = qi_xgcd(x, m)
    if not g.is_unit():
        raise ValueError(f"{x} is not invertible modulo {m}")
    return s % m


def is_coprime(x: QuadInt, y: QuadInt) -> bool:
    return qi_gcd(x, y).is_unit()


# -- primes and factorization ------------------------------------------------------------

def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D / n) for n > 0."""
    if n == 1:
        return 1
    out = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        out *= 1 if D % 8 in (1, 7) else -1
    if n > 1:
        out *= _jacobi(D % n, n)
    return out


def _jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a / n) for odd n > 0."""
    a %= n
    out = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                out = -out
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            out = -out
        a %= n
    return out if n == 1 else 0


class SplitType(NamedTuple):
    kind: str  # "split" | "inert" | "ramified"
    primes: tuple[QuadInt, ...]


@lru_cache(maxsize=200_000)
def split_type(p: int, fld: FieldParams) -> SplitType:
    """Decomposition of the rational prime p in O_K, with canonical prime generators."""
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    k = kronecker(fld.d_K, p)
    if k == -1:
        return SplitType("inert", (QuadInt(p, 0, fld),))
    # find x with x^2 = d_K mod p and x = d_K mod 2, so (x + sqrt(d_K))/2 is integral
    if p == 2:
        xs = [x for x in range(4) if (x * x - fld.d_K) % 8 == 0] or [fld.d_K % 2]
        x = xs[0]
    else:
        x = sqrt_mod(fld.d_K % p, p)
        if (x - fld.d_K) % 2:
            x = p - x if x else p
    elt = QuadInt((x - fld.d_K) // 2, 1, fld)  # (x + sqrt(d_K))/2 = (x - d_K)/2 + w
    pi = qi_gcd(QuadInt(p, 0, fld), elt)
    assert pi.norm() == p, (p, pi)
    if k == 0:
        return SplitType("ramified", (pi,))
    return SplitType("split", (pi, canonical(pi.conj())))


def factor(x: QuadInt) -> list[tuple[QuadInt, int]]:
    """Prime ideal factorization of (x) as [(canonical prime, exponent)], sorted by norm."""
    if x.is_zero():
        raise ValueError("cannot factor 0")
    fld = x.field
    out = []
    rest = x
    for p in sorted(factorint(x.norm())):
        for pi in split_type(p, fld).primes:
            e = 0
            while pi.divides(rest):
                rest = rest.exact_div(pi)
                e += 1
            if e:
                out.append((pi, e))
    assert rest.is_unit()
    out.sort(key=lambda t: (t[0].norm(), t[0].a, t[0].b))
    return out


def is_squarefree(x: QuadInt) -> bool:
    return all(e == 1 for _, e in factor(x))


def divisors(x: QuadInt) -> list[QuadInt]:
    """Canonical generators of all ideal divisors of (x), sorted by norm."""
    divs = [QuadInt(1, 0, x.field)]
    for pi, e in factor(x):
        divs = [d * pi**k for d in divs for k in range(e + 1)]
    out = sorted({canonical(d) for d in divs}, key=lambda q: (q.norm(), q.a, q.b))
    return out


def euler_phi(c: QuadInt) -> int:
    """Order of (O_K/(c))^*."""
    out = 1
    for pi, e in factor(c):
        n = pi.norm()
        out *= (n - 1) * n ** (e - 1)
    return out


# -- residues --------------------------------------------------------------------------

def hnf_basis(c: QuadInt) -> tuple[int, int, int]:
    """HNF (A, B, C) of the lattice c*O_K in (1, w)-coordinates.

    The lattice has basis (A, 0), (B, C) with A*C = N(c) and 0 <= B < A, so
    residues mod (c) are represented by u in [0, A), v in [0, C).
    """
    cw = c * QuadInt(0, 1, c.field)
    # columns (c.a, c.b), (cw.a, cw.b); column-reduce to lower-triangular form on v
    m = [[c.a, cw.a], [c.b, cw.b]]
    # gcd on second row
    x0, x1 = m[1][0], m[1][1]
    g, s, t = _int_xgcd(x0, x1)
    # new columns: col_a = s*col0 + t*col1 (v=g), col_b = (x1/g)*col0 - (x0/g)*col1 (v=0)
    ua = s * m[0][0] + t * m[0][1]
    ub = (x1 // g) * m[0][0] - (x0 // g) * m[0][1]
    A = abs(ub)
    C = abs(g)
    if g < 0:
        ua = -ua
    B = ua % A
    assert A * C == c.norm()
    return A, B, C


def _int_xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def residue_grid(c: QuadInt) -> np.ndarray:
    """All residues mod (c) as an (N, 2) integer array of (u, v) coordinates."""
    if c.is_zero():
        raise ValueError("modulus must be nonzero")
    A, B, C = hnf_basis(c)
    u = np.arange(A)
    v = np.arange(C)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    return np.stack([uu.ravel(), vv.ravel()], axis=1).astype(np.int64)


def coprime_mask(uv: np.ndarray, c: QuadInt) -> np.ndarray:
    """Boolean mask of rows of uv that are units modulo (c)."""
    fld = c.field
    t, n = fld.trace_w, fld.norm_w
    keep = np.ones(len(uv), dtype=bool)
    u, v = uv[:, 0], uv[:, 1]
    for pi, _ in factor(c):
        pc = pi.conj()
        # (u + v w)(pc.a + pc.b w) coefficients; divisible by pi iff both = 0 mod N(pi)
        ca = u * pc.a - v * pc.b * n
        cb = u * pc.b + v * pc.a + v * pc.b * t
        N = pi.norm()
        keep &= ~((ca % N == 0) & (cb % N == 0))
    return keep


def residues_coprime(c: QuadInt) -> list[QuadInt]:
    """One representative per class of (O_K/(c))^*."""
    if c.is_zero():
        raise ValueError("modulus must be nonzero")
    if c.is_unit():
        return [QuadInt(0, 0, c.field)]
    uv = residue_grid(c)
    uv = uv[coprime_mask(uv, c)]
    return [QuadInt(int(a), int(b), c.field) for a, b in uv]


# -- zeta function -----------------------------------------------------------------------

# B_2, B_4, ..., B_16
_BERNOULLI = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
              Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510)]


def hurwitz_zeta2(q: float, terms: int = 30) -> float:
    """Hurwitz zeta(2, q) by Euler-Maclaurin summation."""
    k = np.arange(terms, dtype=float)
    head = float(np.sum(1.0 / (k + q) ** 2))
    N = terms + q
    tail = 1.0 / N + 0.5 / N**2
    # for s = 2 the EM corrections reduce to B_{2j} / N^{2j+1}
    for j, b in enumerate(_BERNOULLI, start=1):
        tail += float(b) / N ** (2 * j + 1)
    return head + tail


def zeta_K2(fld: FieldParams, precision: float = 1e-12) -> float:
    """Dedekind zeta value zeta_K(2) = zeta(2) * L(2, chi_{d_K})."""
    if precision < 1e-12:
        raise ValueError("precision below 1e-12 is not supported")
    D = -fld.d_K
    zeta2 = hurwitz_zeta2(1.0)
    L = sum(kronecker(fld.d_K, a) * hurwitz_zeta2(a / D) for a in range(1, D + 1)) / D**2
    return zeta2 * L


# -- dual lattice ------------------------------------------------------------------------

@dataclass(frozen=True)
class DualLatticeBasis:
    mu1: complex
    mu2: complex

    def element(self, m1: int, m2: int) -> complex:
        return m1 * self.mu1 + m2 * self.mu2


def pairing(mu: complex, lam: complex) -> float:
    return mu.real * lam.real + mu.imag * lam.imag


def dual_basis(fld: FieldParams) -> DualLatticeBasis:
    """Basis of the dual of O_K under the real inner product, dual to {1, w}."""
    w = fld.omega
    L = np.array([[1.0, w.real], [0.0, w.imag]])  # columns are 1 and w
    M = np.linalg.inv(L)  # rows are the dual vectors
    return DualLatticeBasis(complex(M[0, 0], M[0, 1]), complex(M[1, 0], M[1, 1]))


def smallest_dual_vectors(fld: FieldParams, count: int = 4) -> list[tuple[int, int]]:
    """Integer coordinates (m1, m2) of the `count` shortest nonzero dual vectors."""
    basis = dual_basis(fld)
    # the (1, w) basis is skewed by Re(w) = d_K / 2, so short vectors can have large coordinates
    R = abs(fld.d_K) + 4
    cands = [(m1, m2) for m1 in range(-R, R + 1) for m2 in range(-R, R + 1) if (m1, m2) != (0, 0)]
    cands.sort(key=lambda m: (round(abs(basis.element(*m)), 12), m))
    return cands[:count]
