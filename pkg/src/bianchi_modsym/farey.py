"""The fraction sets Q_d(X): reduced a/c with (c) + (n) = d and 0 < |c| < X.

Denominators run over associate classes (one canonical c each), numerators
over (O_K/(c))^*, and each fraction is reduced so that a/c lies in the
half-open parallelogram [0,1) + [0,1) w.  Sets are held as numpy arrays.
"""
from __future__ import annotations

import glob
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .quadfield import (
    FieldParams,
    QuadInt,
    canonical,
    canonical_array,
    coprime_mask,
    euler_phi,
    factor,
    is_squarefree,
    mul_coords,
    pairing,
    dual_basis,
    residue_grid,
)

SHARD_SIZE = 1_000_000


class InvalidDivisorError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class CuspFraction:
    a: QuadInt
    c: QuadInt
    absc: float
    klass: QuadInt

    @property
    def value(self) -> complex:
        return complex(self.a) / complex(self.c)


@dataclass
class FareySet:
    """Q_d(X) as parallel arrays (one row per fraction, grouped by denominator)."""
    n: QuadInt
    divisor: QuadInt
    X: float
    a: np.ndarray      # (N, 2) int64 numerator coordinates
    c: np.ndarray      # (N, 2) int64 denominator coordinates
    absc: np.ndarray   # (N,) float

    @property
    def fld(self) -> FieldParams:
        return self.n.field

    def __len__(self) -> int:
        return len(self.absc)

    def __iter__(self) -> Iterator[CuspFraction]:
        fld = self.fld
        for (aa, ab), (ca, cb), r in zip(self.a.tolist(), self.c.tolist(), self.absc.tolist()):
            yield CuspFraction(QuadInt(aa, ab, fld), QuadInt(ca, cb, fld), r, self.divisor)

    def values(self) -> np.ndarray:
        w = self.fld.omega
        return (self.a[:, 0] + self.a[:, 1] * w) / (self.c[:, 0] + self.c[:, 1] * w)

    def restrict(self, X: float) -> FareySet:
        """The subset with |c| < X (rows are sorted by |c|)."""
        k = int(np.searchsorted(self.absc, X, side="left"))
        return FareySet(self.n, self.divisor, min(X, self.X), self.a[:k], self.c[:k], self.absc[:k])

    def denominator_groups(self) -> list[tuple[QuadInt, slice]]:
        """(c, row slice) for each denominator, in enumeration order."""
        if len(self) == 0:
            return []
        change = np.flatnonzero(np.any(self.c[1:] != self.c[:-1], axis=1)) + 1
        starts = np.concatenate([[0], change])
        ends = np.concatenate([change, [len(self)]])
        fld = self.fld
        return [(QuadInt(int(self.c[s, 0]), int(self.c[s, 1]), fld), slice(int(s), int(e)))
                for s, e in zip(starts, ends)]

    # -- CSV --------------------------------------------------------------------------
    def to_rows(self) -> Iterator[str]:
        klass = str(self.divisor)
        for (aa, ab), (ca, cb), r in zip(self.a.tolist(), self.c.tolist(), self.absc.tolist()):
            yield f"{_fmt(aa, ab)},{_fmt(ca, cb)},{r:.12g},{klass}\n"

    def write_csv(self, path, shard_size: int = SHARD_SIZE) -> list[Path]:
        """Write `a,c,absc,class`; above shard_size rows, write numbered shards."""
        path = Path(path)
        header = f"# field={self.fld.d} level={self.n} divisor={self.divisor} X={self.X}\n"
        if len(self) <= shard_size:
            with path.open("w") as fh:
                fh.write(header + "a,c,absc,class\n")
                fh.writelines(self.to_rows())
            return [path]
        paths = []
        rows = self.to_rows()
        for k in range(math.ceil(len(self) / shard_size)):
            shard = path.with_name(f"{path.stem}.{k:05d}{path.suffix}")
            with shard.open("w") as fh:
                fh.write(header + "a,c,absc,class\n")
                for _ in range(min(shard_size, len(self) - k * shard_size)):
                    fh.write(next(rows))
            paths.append(shard)
        return paths


def _fmt(a: int, b: int) -> str:
    return str(a) if b == 0 else f"{a}{b:+d}*w"


def read_csv(path, fld: FieldParams) -> FareySet:
    """Read a CSV written by `FareySet.write_csv` (a single file or its shards)."""
    path = Path(path)
    files = [path] if path.exists() else sorted(
        Path(p) for p in glob.glob(str(path.with_name(f"{path.stem}.*{path.suffix}"))))
    if not files:
        raise FileNotFoundError(path)
    meta = {}
    a_rows, c_rows, absc = [], [], []
    for f in files:
        with f.open() as fh:
            for line in fh:
                if line.startswith("#"):
                    for item in line[1:].split():
                        k, _, v = item.partition("=")
                        meta[k] = v
                    continue
                if line.startswith("a,"):
                    continue
                parts = line.rstrip("\n").split(",")
                a = QuadInt.parse(parts[0], fld)
                c = QuadInt.parse(parts[1], fld)
                a_rows.append(a.coords)
                c_rows.append(c.coords)
                absc.append(float(parts[2]))
    n = QuadInt.parse(meta.get("level", "1"), fld)
    d = QuadInt.parse(meta.get("divisor", "1"), fld)
    X = float(meta.get("X", max(absc, default=0.0)))
    return FareySet(n, d, X, np.array(a_rows, dtype=np.int64).reshape(-1, 2),
                    np.array(c_rows, dtype=np.int64).reshape(-1, 2), np.array(absc))


# -- enumeration -----------------------------------------------------------------------

def _check_divisor(n: QuadInt, d: QuadInt) -> QuadInt:
    if n.is_zero() or not is_squarefree(n):
        raise InvalidDivisorError(f"level {n} must be nonzero and squarefree")
    if d.is_zero() or not d.divides(n):
        raise InvalidDivisorError(f"({d}) does not divide the level ({n})")
    return canonical(d)


def admissible_denominators(n: QuadInt, d: QuadInt, X: float) -> np.ndarray:
    """Canonical c with 0 < |c| < X and (c) + (n) = (d), in enumeration order.

    Order: by |c|, then by (Re c, Im c).
    """
    fld = n.field
    d = _check_divisor(n, d)
    w = fld.omega
    bmax = int(math.ceil(X / w.imag)) + 1
    bs = np.arange(-bmax, bmax + 1)
    amax = int(math.ceil(X + abs(w.real) * bmax)) + 1
    aa, bb = np.meshgrid(np.arange(-amax, amax + 1), bs, indexing="ij")
    aa, bb = aa.ravel(), bb.ravel()
    t, nw = fld.trace_w, fld.norm_w
    norm = aa * aa + t * aa * bb + nw * bb * bb
    # compare |c| itself so the cut agrees with the stored absc values
    keep = (norm > 0) & (np.sqrt(norm) < X)
    aa, bb, norm = aa[keep], bb[keep], norm[keep]
    ca, cb = canonical_array(aa, bb, fld)
    sel = (ca == aa) & (cb == bb)
    aa, bb, norm = aa[sel], bb[sel], norm[sel]
    # (c) + (n) is the product of the level primes dividing c
    want = {pi.coords for pi, _ in factor(d)} if not d.is_unit() else set()
    ok = np.ones(len(aa), dtype=bool)
    for pi, _ in ([] if n.is_unit() else factor(n)):
        pc = pi.conj()
        xa, xb = mul_coords(aa, bb, pc.a, pc.b, fld)
        N = pi.norm()
        divisible = (xa % N == 0) & (xb % N == 0)
        ok &= divisible if pi.coords in want else ~divisible
    aa, bb, norm = aa[ok], bb[ok], norm[ok]
    re = aa + bb * w.real
    im = bb * w.imag
    order = np.lexsort((im, re, norm))
    return np.stack([aa[order], bb[order]], axis=1)


def reduce_numerators(uv: np.ndarray, c: QuadInt) -> np.ndarray:
    """Shift each numerator a by a multiple of c so that a/c lies in [0,1) + [0,1) w."""
    fld = c.field
    N = c.norm()
    cc = c.conj()
    p, q = mul_coords(uv[:, 0], uv[:, 1], cc.a, cc.b, fld)   # a * conj(c) = N * (a/c)
    p %= N
    q %= N
    ra, rb = mul_coords(p, q, c.a, c.b, fld)
    assert np.all(ra % N == 0) and np.all(rb % N == 0)
    return np.stack([ra // N, rb // N], axis=1)


def _numerators(c: QuadInt) -> np.ndarray:
    if c.is_unit():
        return np.zeros((1, 2), dtype=np.int64)
    uv = residue_grid(c)
    uv = uv[coprime_mask(uv, c)]
    out = reduce_numerators(uv, c)
    # sort by the reduced fraction's coordinates for deterministic order
    cc = c.conj()
    p, q = mul_coords(out[:, 0], out[:, 1], cc.a, cc.b, c.field)
    return out[np.lexsort((p, q))]


def enumerate_Q(n: QuadInt, d: QuadInt, X: float) -> FareySet:
    """Q_d(X) for the squarefree level n and a divisor d of n."""
    if not X > 0:
        raise ValueError("X must be positive")
    d = _check_divisor(n, d)
    dens = admissible_denominators(n, d, X)
    fld = n.field
    a_parts, c_parts, abs_parts = [], [], []
    for ca, cb in dens.tolist():
        c = QuadInt(ca, cb, fld)
        nums = _numerators(c)
        a_parts.append(nums)
        c_parts.append(np.tile([ca, cb], (len(nums), 1)))
        abs_parts.append(np.full(len(nums), abs(c)))
    if not a_parts:
        empty = np.zeros((0, 2), dtype=np.int64)
        return FareySet(canonical(n), d, X, empty, empty.copy(), np.zeros(0))
    return FareySet(canonical(n), d, X, np.concatenate(a_parts).astype(np.int64),
                    np.concatenate(c_parts).astype(np.int64), np.concatenate(abs_parts))


def count_Q(n: QuadInt, d: QuadInt, X: float) -> int:
    """|Q_d(X)| without materializing the set."""
    fld = n.field
    return sum(euler_phi(QuadInt(a, b, fld)) for a, b in admissible_denominators(n, d, X).tolist())


# -- diagnostics -----------------------------------------------------------------------

def _dual_coords(mu, fld: FieldParams) -> tuple[int, int]:
    if isinstance(mu, tuple):
        return int(mu[0]), int(mu[1])
    mu = complex(mu)
    m1 = pairing(mu, 1.0)
    m2 = pairing(mu, fld.omega)
    r1, r2 = round(m1), round(m2)
    if abs(m1 - r1) > 1e-9 or abs(m2 - r2) > 1e-9:
        raise ValueError(f"{mu} is not in the dual lattice")
    return int(r1), int(r2)


def weyl_sum(S: FareySet, mu) -> complex:
    """sum over r in S of e(<mu, r>), with mu a dual vector or its (m1, m2) coordinates."""
    m1, m2 = _dual_coords(mu, S.fld)
    if len(S) == 0:
        return 0j
    if m1 == 0 and m2 == 0:
        return complex(len(S))
    fld = S.fld
    # r = a/c = (p + q w) / N(c) exactly; <mu, r> = (m1 p + m2 q) / N(c)
    ca, cb = S.c[:, 0], S.c[:, 1]
    N = ca * ca + fld.trace_w * ca * cb + fld.norm_w * cb * cb
    cconj_a, cconj_b = ca + cb * fld.trace_w, -cb
    p, q = mul_coords(S.a[:, 0], S.a[:, 1], cconj_a, cconj_b, fld)
    phase = (m1 * p + m2 * q) % N
    return complex(np.sum(np.exp(2j * np.pi * phase / N)))


def count_fit(n: QuadInt, d: QuadInt, X_grid) -> float:
    """Least-squares slope of log |Q_d(X)| against log X."""
    grid = sorted(float(x) for x in X_grid)
    if len(set(grid)) < 3 or grid[-1] < 2 * grid[0]:
        raise InsufficientDataError("need at least 3 distinct X values spanning a factor of 2")
    counts = [count_Q(n, d, X) for X in grid]
    if min(counts) == 0:
        raise InsufficientDataError(f"empty fraction set in the grid: counts {counts}")
    slope, _ = np.polyfit(np.log(grid), np.log(counts), 1)
    return float(slope)


def dual_vector(fld: FieldParams, m1: int, m2: int) -> complex:
    return dual_basis(fld).element(m1, m2)
