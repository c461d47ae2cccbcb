"""Hecke coefficient tables for plusforms.

A table maps the canonical generator of each ideal (alpha) to the integer
eigenvalue c(alpha).  Tables come from a file or from base change of a
rational elliptic curve, and are closed under multiplication by
`extend_multiplicative`.
"""
from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from pathlib import Path

import numba
import numpy as np
from sympy import primerange

from .quadfield import (
    FieldParams,
    QuadInt,
    canonical,
    canonical_array,
    factor,
    field,
    is_squarefree,
    mul_coords,
    split_type,
    units,
)


class BadReductionError(ValueError):
    pass


class IncompleteTableError(ValueError):
    pass


class TableParseError(ValueError):
    pass


class ConfigError(ValueError):
    pass


# -- elliptic curves over Q ------------------------------------------------------------

@dataclass(frozen=True)
class EllipticCurveQ:
    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    conductor_hint: int | None = None

    def __post_init__(self):
        if self.discriminant == 0:
            raise ValueError("singular Weierstrass equation")

    @classmethod
    def from_list(cls, coeffs, conductor_hint=None) -> EllipticCurveQ:
        a1, a2, a3, a4, a6 = (int(x) for x in coeffs)
        return cls(a1, a2, a3, a4, a6, conductor_hint)

    @property
    def b_invariants(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def discriminant(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def bad_primes(self) -> list[int]:
        if self.conductor_hint is not None:
            return sorted(p for p in _prime_factors(self.conductor_hint))
        return sorted(_prime_factors(abs(self.discriminant)))


def _prime_factors(n: int) -> set[int]:
    from sympy import factorint
    return set(factorint(n))


@numba.njit(cache=True)
def _legendre_sums(b2: int, b4: int, b6: int, primes: np.ndarray) -> np.ndarray:
    # a_p = -sum_x (f(x)/p) with f = 4x^3 + b2 x^2 + 2 b4 x + b6, for odd p.
    # f is stepped by finite differences so the inner loop has no divisions.
    out = np.zeros(primes.shape[0], dtype=np.int64)
    for k in range(primes.shape[0]):
        p = primes[k]
        chi = np.full(p, -1, dtype=np.int8)
        chi[0] = 0
        sq = 0
        for x in range(1, p):
            sq += 2 * x - 1
            if sq >= p:
                sq %= p
            chi[sq] = 1
        f = b6 % p
        d1 = (4 + b2 + 2 * b4) % p        # f(1) - f(0)
        d2 = (24 + 2 * b2) % p            # second difference at 0
        d3 = 24 % p
        total = 0
        for x in range(p):
            total += chi[f]
            f += d1
            f -= p * (f >= p)
            d1 += d2
            d1 -= p * (d1 >= p)
            d2 += d3
            d2 -= p * (d2 >= p)
        out[k] = -total
    return out


def _affine_count_small(E: EllipticCurveQ, p: int) -> int:
    count = 0
    for x in range(p):
        for y in range(p):
            lhs = y * y + E.a1 * x * y + E.a3 * y
            rhs = x**3 + E.a2 * x * x + E.a4 * x + E.a6
            count += (lhs - rhs) % p == 0
    return count


def local_ap(E: EllipticCurveQ, p: int) -> int:
    """p - #{affine points mod p}: the trace of Frobenius at good p, and 1 / -1 / 0
    for split multiplicative / non-split multiplicative / additive reduction."""
    if p == 2:
        return p - _affine_count_small(E, p)
    b2, b4, b6, _ = E.b_invariants
    return int(_legendre_sums(b2, b4, b6, np.array([p], dtype=np.int64))[0])


def ap_point_count(E: EllipticCurveQ, p: int) -> int:
    """a_p = p + 1 - #E(F_p) at a prime of good reduction."""
    if E.discriminant % p == 0:
        raise BadReductionError(f"E has bad reduction at p={p}")
    return local_ap(E, p)


def ap_many(E: EllipticCurveQ, primes) -> dict[int, int]:
    """local_ap for many primes at once."""
    primes = [int(p) for p in primes]
    out = {}
    odd = np.array([p for p in primes if p > 2], dtype=np.int64)
    if odd.size:
        b2, b4, b6, _ = E.b_invariants
        for p, a in zip(odd.tolist(), _legendre_sums(b2, b4, b6, odd).tolist()):
            out[p] = a
    if 2 in primes:
        out[2] = local_ap(E, 2)
    return out


# -- coefficient tables ----------------------------------------------------------------

@dataclass(frozen=True)
class ElementData:
    """Element-level view of a table: one row per alpha (all unit multiples),
    sorted by norm."""
    a: np.ndarray
    b: np.ndarray
    norm: np.ndarray
    coeff: np.ndarray

    def upto(self, norm_bound: float) -> ElementData:
        k = int(np.searchsorted(self.norm, norm_bound, side="right"))
        return ElementData(self.a[:k], self.b[:k], self.norm[:k], self.coeff[:k])

    def __len__(self) -> int:
        return len(self.norm)


@dataclass
class CoeffTable:
    fld: FieldParams
    level: QuadInt
    norm_bound: int
    coeffs: dict[tuple[int, int], int] = dc_field(default_factory=dict)

    def __getitem__(self, alpha: QuadInt) -> int:
        key = canonical(alpha).coords
        if key not in self.coeffs:
            raise KeyError(f"no coefficient for ({alpha}) in table (norm bound {self.norm_bound})")
        return self.coeffs[key]

    def __contains__(self, alpha: QuadInt) -> bool:
        return canonical(alpha).coords in self.coeffs

    def __len__(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other) -> bool:
        return (isinstance(other, CoeffTable) and self.fld == other.fld
                and self.level == other.level and self.norm_bound == other.norm_bound
                and self.coeffs == other.coeffs)

    def scaled(self, factor_: int) -> CoeffTable:
        """Table of factor * F (no longer normalized; used for linearity checks)."""
        return CoeffTable(self.fld, self.level, self.norm_bound,
                          {k: factor_ * v for k, v in self.coeffs.items()})

    @cached_property
    def elements(self) -> ElementData:
        keys = np.array(list(self.coeffs.keys()), dtype=np.int64).reshape(-1, 2)
        vals = np.array(list(self.coeffs.values()), dtype=float)
        all_a, all_b, all_c = [], [], []
        for u in units(self.fld):
            ua, ub = mul_coords(u.a, u.b, keys[:, 0], keys[:, 1], self.fld)
            all_a.append(ua)
            all_b.append(ub)
            all_c.append(vals)
        a = np.concatenate(all_a)
        b = np.concatenate(all_b)
        c = np.concatenate(all_c)
        t, n = self.fld.trace_w, self.fld.norm_w
        norm = a * a + t * a * b + n * b * b
        order = np.lexsort((b, a, norm))
        return ElementData(a[order], b[order], norm[order], c[order])

    def ramanujan_violations(self) -> list[tuple[QuadInt, int]]:
        """Good primes whose coefficient exceeds 2 sqrt(N(p))."""
        level_primes = {pi.coords for pi, _ in factor(self.level)} if not self.level.is_unit() else set()
        bad = []
        for (a, b), c in self.coeffs.items():
            g = QuadInt(a, b, self.fld)
            if g.coords in level_primes or not _is_prime_element(g):
                continue
            if c * c > 4 * g.norm():
                bad.append((g, c))
        return bad

    def absolute_series(self, sigma: float) -> float:
        """sum over ideals of |c| / N^sigma (truncated at the table's bound)."""
        el = self.elements
        return float(np.sum(np.abs(el.coeff) / el.norm.astype(float) ** sigma)) / self.fld.unit_count


def _is_prime_element(g: QuadInt) -> bool:
    n = g.norm()
    if n < 2:
        return False
    f = factor(g)
    return len(f) == 1 and f[0][1] == 1


def _prime_ideals_upto(fld: FieldParams, bound: int) -> list[tuple[int, QuadInt, str]]:
    """(rational prime p, canonical prime generator, kind) for prime ideals of norm <= bound."""
    out = []
    for p in primerange(2, bound + 1):
        st = split_type(int(p), fld)
        if st.kind == "inert":
            if p * p <= bound:
                out.append((int(p), st.primes[0], "inert"))
        else:
            for pi in st.primes:
                out.append((int(p), pi, st.kind))
    return out


def base_change_table(E: EllipticCurveQ, fld: FieldParams, norm_bound: int) -> CoeffTable:
    """Coefficients of the base change of E to K on all ideals of norm <= norm_bound.

    Supported: semistable E whose bad primes do not divide d_K.  The level is the
    product of the primes of K above the bad primes of E.
    """
    if norm_bound < 2:
        raise ValueError("norm_bound must be at least 2")
    bad = E.bad_primes()
    for p in bad:
        if fld.d_K % p == 0:
            raise ConfigError(f"bad prime {p} divides d_K={fld.d_K}: not supported")
    level = QuadInt(1, 0, fld)
    for p in bad:
        for pi in split_type(p, fld).primes:
            level = level * pi
    level = canonical(level)

    primes = _prime_ideals_upto(fld, norm_bound)
    aps = ap_many(E, sorted({p for p, _, _ in primes}))
    prime_coeffs = {}
    for p, pi, kind in primes:
        ap = aps[p]
        if p in bad:
            if ap == 0:
                raise ConfigError(f"additive reduction at p={p}: not supported")
            c = ap * ap if kind == "inert" else ap
        elif kind == "inert":
            c = ap * ap - 2 * p
        else:
            c = ap
        prime_coeffs[pi.coords] = c
    table = CoeffTable(fld, level, norm_bound, prime_coeffs)
    return extend_multiplicative(table, norm_bound)


def extend_multiplicative(table: CoeffTable, norm_bound: int) -> CoeffTable:
    """Close a table of prime coefficients under the Hecke relations up to norm_bound."""
    fld = table.fld
    level_primes = set() if table.level.is_unit() else {pi.coords for pi, _ in factor(table.level)}
    primes = []
    for p, pi, _ in _prime_ideals_upto(fld, norm_bound):
        if pi.coords not in table.coeffs:
            raise IncompleteTableError(f"missing coefficient for the prime ({pi}) of norm {pi.norm()}")
        chi = 0 if pi.coords in level_primes else 1
        primes.append((pi.norm(), pi.a, pi.b, table.coeffs[pi.coords], chi))
    primes.sort()
    t, n = fld.trace_w, fld.norm_w

    gens_a, gens_b, vals = [1], [0], [1]

    def walk(start, ga, gb, gn, gc):
        for i in range(start, len(primes)):
            pn, pa, pb, cp, chi = primes[i]
            if gn * pn > norm_bound:
                break
            # prime powers: c(p^{k+1}) = c(p) c(p^k) - chi N(p) c(p^{k-1})
            prev, cur = 1, cp
            qa, qb, qn = ga, gb, gn
            while qn * pn <= norm_bound:
                qa, qb = qa * pa - qb * pb * n, qa * pb + qb * pa + qb * pb * t
                qn *= pn
                gens_a.append(qa)
                gens_b.append(qb)
                vals.append(gc * cur)
                walk(i + 1, qa, qb, qn, gc * cur)
                prev, cur = cur, cp * cur - chi * pn * prev

    import sys
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10_000))
    try:
        walk(0, 1, 0, 1, 1)
    finally:
        sys.setrecursionlimit(limit)
    ca, cb = canonical_array(np.array(gens_a, dtype=np.int64), np.array(gens_b, dtype=np.int64), fld)
    coeffs = dict(zip(zip(ca.tolist(), cb.tolist()), vals))
    return CoeffTable(fld, table.level, norm_bound, coeffs)


# -- file formats ----------------------------------------------------------------------

def save_table(table: CoeffTable, path) -> None:
    path = Path(path)
    rows = sorted(table.coeffs.items(), key=lambda kv: (kv[0][0] ** 2 + kv[0][1] ** 2, kv[0]))
    with path.open("w") as fh:
        fh.write(f"# field={table.fld.d}\n# level={table.level}\n# norm_bound={table.norm_bound}\n")
        fh.write("gen_a,gen_b,coeff\n")
        for (a, b), c in rows:
            fh.write(f"{a},{b},{c}\n")


def load_table(path) -> CoeffTable:
    path = Path(path)
    meta = {}
    coeffs = {}
    header_seen = False
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
                continue
            if not header_seen:
                if line.replace(" ", "") != "gen_a,gen_b,coeff":
                    raise TableParseError(f"{path}:{lineno}: expected header 'gen_a,gen_b,coeff'")
                header_seen = True
                continue
            parts = line.split(",")
            try:
                a, b, c = (int(x) for x in parts)
            except ValueError:
                raise TableParseError(f"{path}:{lineno}: malformed row {line!r}") from None
            coeffs[(a, b)] = c
    for key in ("field", "level", "norm_bound"):
        if key not in meta:
            raise TableParseError(f"{path}: missing '# {key}=' header line")
    fld = field(int(meta["field"]))
    if coeffs.get((1, 0)) != 1:
        raise TableParseError(f"{path}: table must contain the row 1,0,1 for c(1)")
    # re-key by canonical generator in case the file used other associates
    keys = np.array(list(coeffs.keys()), dtype=np.int64).reshape(-1, 2)
    ca, cb = canonical_array(keys[:, 0], keys[:, 1], fld)
    coeffs = dict(zip(zip(ca.tolist(), cb.tolist()), coeffs.values()))
    table = CoeffTable(fld, QuadInt.parse(meta["level"], fld), int(meta["norm_bound"]), coeffs)
    bad = table.ramanujan_violations()
    if bad:
        g, c = bad[0]
        warnings.warn(f"{path}: {len(bad)} good prime(s) violate the Ramanujan bound, "
                      f"e.g. c({g}) = {c}", stacklevel=2)
    return table


def _write_npz(table: CoeffTable, path: Path) -> None:
    keys = np.array(list(table.coeffs.keys()), dtype=np.int64).reshape(-1, 2)
    vals = np.array(list(table.coeffs.values()), dtype=np.int64)
    np.savez(path, keys=keys, vals=vals, level=np.array(table.level.coords),
             norm_bound=np.array(table.norm_bound))


def _read_npz(path: Path, fld: FieldParams) -> CoeffTable:
    with np.load(path) as z:
        coeffs = dict(zip(map(tuple, z["keys"].tolist()), z["vals"].tolist()))
        level = QuadInt(int(z["level"][0]), int(z["level"][1]), fld)
        return CoeffTable(fld, level, int(z["norm_bound"]), coeffs)


@dataclass
class FormSpec:
    """A plusform: field, level, Atkin-Lehner signs and a coefficient source."""
    fld: FieldParams
    level: QuadInt
    w: dict[str, int]
    source: dict
    norm_bound: int
    table: CoeffTable | None = None

    def __post_init__(self):
        if not is_squarefree(self.level):
            raise ConfigError(f"level {self.level} is not squarefree")
        for k, v in self.w.items():
            if v not in (1, -1):
                raise ConfigError(f"Atkin-Lehner sign w[{k}] = {v} must be +1 or -1")

    @classmethod
    def from_dict(cls, data: dict) -> FormSpec:
        fld = field(int(data["field"]))
        level = canonical(QuadInt.parse(str(data["level"]), fld))
        w = {}
        for k, v in data.get("w", {}).items():
            w[str(canonical(QuadInt.parse(k, fld)))] = int(v)
        return cls(fld, level, w, dict(data.get("source", {})), int(data.get("norm_bound", 40000)))

    @classmethod
    def from_json(cls, path) -> FormSpec:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {"field": self.fld.d, "level": str(self.level), "w": dict(self.w),
                "source": self.source, "norm_bound": self.norm_bound}

    def w_sign(self, e: QuadInt) -> int:
        """Atkin-Lehner sign for the divisor (e) of the level; W_(1) is the identity."""
        e = canonical(e)
        if e.is_unit():
            return 1
        key = str(e)
        if key not in self.w:
            raise ConfigError(f"no Atkin-Lehner sign configured for the divisor ({e})")
        return self.w[key]

    def cache_key(self) -> str:
        blob = json.dumps({"field": self.fld.d, "level": str(self.level), "source": self.source,
                           "norm_bound": self.norm_bound}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def load(self, cache_dir=None) -> CoeffTable:
        """Build or read the coefficient table; with cache_dir, reuse a stored copy."""
        if self.table is not None and self.table.norm_bound >= self.norm_bound:
            return self.table
        cached = Path(cache_dir) / f"table-{self.cache_key()}.npz" if cache_dir else None
        if cached is not None and cached.exists():
            self.table = _read_npz(cached, self.fld)
            return self.table
        table = self._build()
        self.table = table
        if cached is not None:
            cached.parent.mkdir(parents=True, exist_ok=True)
            _write_npz(table, cached)
        return table

    def _build(self) -> CoeffTable:
        kind = self.source.get("type")
        if kind == "base_change":
            E = EllipticCurveQ.from_list(self.source["curve"], self.source.get("conductor"))
            table = base_change_table(E, self.fld, self.norm_bound)
        elif kind == "file":
            table = load_table(self.source["path"])
            if table.norm_bound < self.norm_bound:
                raise IncompleteTableError(
                    f"table {self.source['path']} covers norms <= {table.norm_bound}, "
                    f"but {self.norm_bound} were requested")
        else:
            raise ConfigError(f"unknown coefficient source {self.source!r}")
        if canonical(table.level) != self.level:
            raise ConfigError(f"table level {table.level} does not match form level {self.level}")
        return table

    def with_norm_bound(self, norm_bound: int) -> FormSpec:
        out = FormSpec(self.fld, self.level, dict(self.w), dict(self.source), norm_bound)
        if self.table is not None and self.table.norm_bound >= norm_bound:
            out.table = self.table
        return out

    def truncation_bound_needed(self, radius: float) -> int:
        return int(math.ceil(radius * radius))
