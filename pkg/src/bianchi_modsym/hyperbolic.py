"""Upper half-space H^3, the PSL2(C) action, and cusps of Gamma_0(n)."""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .quadfield import (
    FieldParams,
    QuadInt,
    canonical,
    divisors,
    inverse_mod,
    is_squarefree,
    qi_gcd,
    units,
)


class UnsupportedLevelError(ValueError):
    pass


@dataclass(frozen=True)
class PointH3:
    z: complex
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"height must be positive, got {self.y}")


@dataclass(frozen=True)
class Mat2:
    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_quadints(cls, a: QuadInt, b: QuadInt, c: QuadInt, d: QuadInt) -> Mat2:
        return cls(complex(a), complex(b), complex(c), complex(d))

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def normalized(self) -> Mat2:
        det = self.det
        if abs(det) < 1e-300:
            raise ValueError("singular matrix")
        r = cmath.sqrt(det)
        return Mat2(self.a / r, self.b / r, self.c / r, self.d / r)

    def __matmul__(self, other: Mat2) -> Mat2:
        return Mat2(self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
                    self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)

    def cusp_image(self, r: complex | None) -> complex | None:
        """Action on the boundary C u {inf}; None encodes infinity."""
        if r is None:
            return None if self.c == 0 else self.a / self.c
        den = self.c * r + self.d
        if den == 0:
            return None
        return (self.a * r + self.b) / den


def act(g: Mat2, P: PointH3) -> PointH3:
    """g . P for P = z + y j."""
    g = g.normalized()
    z, y = P.z, P.y
    cz_d = g.c * z + g.d
    den = abs(cz_d) ** 2 + abs(g.c) ** 2 * y * y
    z_new = ((g.a * z + g.b) * cz_d.conjugate() + g.a * g.c.conjugate() * y * y) / den
    return PointH3(z_new, y / den)


def act_many(a, b, c, d, z: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized action of det-1 matrices (broadcasting entries) on points."""
    cz_d = c * z + d
    den = np.abs(cz_d) ** 2 + np.abs(c) ** 2 * y * y
    z_new = ((a * z + b) * np.conj(cz_d) + a * np.conj(c) * y * y) / den
    return z_new, y / den


# -- cusps -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Cusp:
    """p/q in lowest terms; q = 0 is the cusp at infinity (stored as 1/0)."""
    p: QuadInt
    q: QuadInt

    def __post_init__(self):
        if self.p.is_zero() and self.q.is_zero():
            raise ValueError("0/0 is not a cusp")
        if not qi_gcd(self.p, self.q).is_unit():
            raise ValueError(f"{self.p}/{self.q} is not in lowest terms")

    @classmethod
    def make(cls, p: QuadInt, q: QuadInt) -> Cusp:
        """Reduce p/q and normalize so that q is canonical (or p = 1 at infinity)."""
        g = qi_gcd(p, q)
        p, q = p.exact_div(g), q.exact_div(g)
        if q.is_zero():
            return cls(QuadInt(1, 0, p.field), q)
        cq = canonical(q)
        u = cq.exact_div(q)
        return cls(p * u, cq)

    @classmethod
    def infinity(cls, fld: FieldParams) -> Cusp:
        return cls(QuadInt(1, 0, fld), QuadInt(0, 0, fld))

    @property
    def is_infinity(self) -> bool:
        return self.q.is_zero()

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"

    @classmethod
    def parse(cls, text: str, fld: FieldParams) -> Cusp:
        p, _, q = text.partition("/")
        return cls.make(QuadInt.parse(p, fld), QuadInt.parse(q or "1", fld))

    def value(self) -> complex | None:
        return None if self.is_infinity else complex(self.p) / complex(self.q)


def _inverse_numerator(r: Cusp) -> QuadInt:
    """s with p*s = 1 mod (q); for q a unit any s works and we take 0."""
    if r.q.is_zero():
        return r.p.exact_div(r.p) if r.p.is_unit() else QuadInt(1, 0, r.p.field)
    return inverse_mod(r.p, r.q)


def cusp_equivalent(r1: Cusp, r2: Cusp, n: QuadInt) -> bool:
    """Gamma_0(n)-equivalence via the congruence s1 q2 = u^2 s2 q1 mod (q1 q2) + (n)."""
    s1 = _inverse_numerator(r1)
    s2 = _inverse_numerator(r2)
    modulus = qi_gcd(r1.q * r2.q, n) if not (r1.q * r2.q).is_zero() else canonical(n)
    lhs = s1 * r2.q
    for u in units(n.field):
        if modulus.divides(lhs - u * u * s2 * r1.q):
            return True
    return False


def inequivalent_cusps(n: QuadInt) -> list[Cusp]:
    """Representatives 1/d, one per ideal divisor (d) of the squarefree level (n)."""
    fld = n.field
    if n.is_zero():
        raise ValueError("level must be nonzero")
    if n.is_unit():
        return [Cusp.infinity(fld)]
    if not is_squarefree(n):
        raise UnsupportedLevelError(f"level {n} is not squarefree")
    one = QuadInt(1, 0, fld)
    return [Cusp(one, d) for d in divisors(n)]


def stabilizer_index(fld: FieldParams) -> int:
    """[Gamma_d : Gamma_d'] = |O_K^*| / 2."""
    return fld.unit_count // 2
