"""Modular symbols <a/c> of weight-2 plusforms and the twisted completed L-values.

The symbol is the period of F along the vertical geodesic from a/c to infinity.
Splitting that geodesic at height Y and folding the lower part with the
Atkin-Lehner element W_e that swaps a/c with infinity gives

    <a/c> = tail(a/c, Y) - w_e * tail(x/c, Y'),    x = -(e a)^{-1} mod (c),
    Y * Y' = 1 / (|c|^2 |e|),

where tail(r, Y) = sum_alpha c(alpha) psi(alpha r / sqrt(d_K)) (Y/a) K1(a Y) with
a = 4 pi |alpha| / sqrt(|d_K|).  All numerators sharing a denominator are
evaluated together: the weights are binned by residue class mod (c) and one
FFT produces every additive twist at once.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .coeffs import FormSpec
from .farey import FareySet
from .quadfield import (
    FieldParams,
    QuadInt,
    canonical,
    euler_phi,
    hnf_basis,
    mul_coords,
    qi_gcd,
)
from .special import bessel_K0, bessel_k01, gamma_real

# quadrature of the Fourier series stops where a|alpha|y exceeds this
QUAD_CUTOFF = 34.0


class InsufficientCoverageError(ValueError):
    pass


@dataclass(frozen=True)
class SymbolValue:
    a: QuadInt
    c: QuadInt
    value: float
    err_estimate: float
    terms_used: int
    method: str
    imag: float = 0.0

    @property
    def fraction(self) -> str:
        return f"{self.a}/{self.c}"


@dataclass(frozen=True)
class TwistedLambda:
    s: float
    a: QuadInt
    c: QuadInt
    value: float
    scaled: bool


@dataclass
class SymbolBatch:
    """Symbols for every fraction of a FareySet, row-aligned with it."""
    fractions: FareySet
    values: np.ndarray
    errors: np.ndarray
    terms: np.ndarray
    imag: np.ndarray

    def write_csv(self, path, config_hash: str = "") -> None:
        S = self.fractions
        with open(path, "w") as fh:
            fh.write(f"# field={S.fld.d} level={S.n} divisor={S.divisor} X={S.X}"
                     + (f" config={config_hash}" if config_hash else "") + "\n")
            fh.write("a,c,absc,class,symbol,err,terms\n")
            for row, v, e, t in zip(S.to_rows(), self.values.tolist(), self.errors.tolist(),
                                    self.terms.tolist()):
                fh.write(f"{row.rstrip()},{v:.15g},{e:.3g},{t}\n")


def a_scale(fld: FieldParams) -> float:
    """a / |alpha| = 4 pi / sqrt(|d_K|)."""
    return 4 * math.pi / fld.sqrt_abs_dK


def level_data(form: FormSpec, c: QuadInt) -> tuple[QuadInt, int]:
    """(e, w_e) with (e) = (n) / ((c) + (n))."""
    n = form.level
    g = qi_gcd(c, n)
    e = canonical(n.exact_div(g))
    return e, form.w_sign(e)


def split_heights(c: QuadInt, e: QuadInt, split: float = 1.0) -> tuple[float, float]:
    """(Y, Y') with Y Y' = 1/(|c|^2 |e|); split = 1 is the fixed point of W_e."""
    y0 = 1.0 / (abs(c) * abs(e) ** 0.5)
    return y0 * split, y0 / split


# -- residue arithmetic mod (c), vectorized ---------------------------------------------

class Residues:
    """Arithmetic on coordinate arrays modulo (c) using the HNF (A, B, C) of c O_K."""

    def __init__(self, c: QuadInt):
        self.c = c
        self.fld = c.field
        self.N = c.norm()
        self.A, self.B, self.C = hnf_basis(c)

    def reduce(self, u, v):
        vr = v % self.C
        k = (v - vr) // self.C
        ur = (u - k * self.B) % self.A
        return ur, vr

    def mul(self, x, y):
        return self.reduce(*mul_coords(x[0], x[1], y[0], y[1], self.fld))

    def inverse(self, u, v):
        """Inverse of units mod (c) via x^(phi - 1)."""
        k = euler_phi(self.c) - 1
        result = (np.ones_like(u), np.zeros_like(v))
        base = self.reduce(u, v)
        result = self.reduce(*result)
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def character_params(self, u, v):
        """(l1, l2) = w-coefficients of a*conj(c) and w*a*conj(c), mod N.

        The additive twist by a/c sends alpha = s + t w to e((s l1 + t l2) / N).
        """
        cc = self.c.conj()
        p, q = mul_coords(u, v, cc.a, cc.b, self.fld)
        l1 = q % self.N
        wp, wq = mul_coords(np.zeros_like(p), np.ones_like(q), p, q, self.fld)
        l2 = wq % self.N
        return l1, l2


# -- the evaluator -------------------------------------------------------------------------

class SymbolEvaluator:
    """Evaluates symbols of one form to a fixed tolerance."""

    def __init__(self, form: FormSpec, tol: float = 1e-8, cache_dir=None):
        self.form = form
        self.fld = form.fld
        self.table = form.load(cache_dir)
        self.tol = float(tol)
        el = self.table.elements
        self.el = el
        self.unorm, self.rank = np.unique(el.norm, return_inverse=True)
        self.sqrt_unorm = np.sqrt(self.unorm.astype(float))
        self.ascale = a_scale(self.fld)
        mags = np.sqrt(el.norm.astype(float))
        # average |c(alpha)| / |alpha|, the mass per unit area entering the remainder bound
        self.kappa = float(np.mean(np.abs(el.coeff) / mags))

    # truncation ---------------------------------------------------------------------
    def remainder_bound(self, T: float, Y: float) -> float:
        """Estimate of sum_{a|alpha|Y > T} |c(alpha)| (Y/a) K1(a Y)."""
        a = self.ascale
        k0 = bessel_K0(T)
        return 2 * math.pi * self.kappa * (T + 1.0) * k0 / (self.fld.covol_P * a**3 * Y)

    def cutoff(self, Y: float, tol: float | None = None) -> float:
        tol = self.tol if tol is None else tol
        f = lambda T: math.log(self.remainder_bound(T, Y)) - math.log(tol)
        if f(1.0) <= 0:
            return 1.0
        return brentq(f, 1.0, 700.0, xtol=1e-6)

    def _prefix(self, Y: float, tol: float | None = None) -> tuple[int, float, float]:
        T = self.cutoff(Y, tol)
        radius = T / (self.ascale * Y)
        need = radius * radius
        if need > self.table.norm_bound:
            raise InsufficientCoverageError(
                f"height {Y:.4g} needs coefficients up to norm {math.ceil(need)}, "
                f"table covers {self.table.norm_bound}")
        k = int(np.searchsorted(self.el.norm, math.floor(need), side="right"))
        return k, T, self.remainder_bound(T, Y)

    def _weights(self, Y: float, k: int) -> np.ndarray:
        ku = int(self.rank[k - 1]) + 1 if k else 0
        x = self.ascale * self.sqrt_unorm[:ku] * Y
        _, k1 = bessel_k01(x)
        wu = Y / (self.ascale * self.sqrt_unorm[:ku]) * k1
        return self.el.coeff[:k] * wu[self.rank[:k]]

    # twisted tails ------------------------------------------------------------------
    def spectrum(self, res: Residues, Y: float, tol: float | None = None):
        """Binned FFT of the tail weights: S[j, v] = sum_{u} W[u, v] e(u j / A)."""
        k, _, err = self._prefix(Y, tol)
        w = self._weights(Y, k)
        ur, vr = res.reduce(self.el.a[:k], self.el.b[:k])
        W = np.bincount(ur * res.C + vr, weights=w, minlength=res.A * res.C)
        S = np.fft.ifft(W.reshape(res.A, res.C), axis=0) * res.A
        return S, k, err + 1e-15 * float(np.sum(np.abs(w)))

    @staticmethod
    def twists(S: np.ndarray, res: Residues, u, v) -> np.ndarray:
        """tail(a/c) for numerators a = u + v w, read off the spectrum."""
        l1, l2 = res.character_params(u, v)
        j = l1 // res.C
        cols = np.arange(res.C)
        phase = np.exp(2j * np.pi * np.outer(l2, cols) / res.N)
        return np.sum(S[j, :] * phase, axis=1)

    def tails(self, c: QuadInt, numerators: np.ndarray, Y: float) -> np.ndarray:
        res = Residues(c)
        S, _, _ = self.spectrum(res, Y)
        return self.twists(S, res, numerators[:, 0], numerators[:, 1])

    # symbols -------------------------------------------------------------------------
    def for_denominator(self, c: QuadInt, numerators: np.ndarray, split: float = 1.0,
                        w_override: int | None = None):
        """(values, errors, terms, imag) for all numerators over one denominator."""
        if c.is_zero():
            raise ValueError("c = 0: the cusp is infinity and its symbol is 0 by convention")
        e, w_e = level_data(self.form, c)
        if w_override is not None:
            w_e = w_override
        Y1, Y2 = split_heights(c, e, split)
        res = Residues(c)
        u, v = res.reduce(numerators[:, 0], numerators[:, 1])
        ea = res.mul((np.full_like(u, e.a), np.full_like(v, e.b)), (u, v))
        iu, iv = res.inverse(*ea)
        xu, xv = res.reduce(-iu, -iv)
        S1, k1, err1 = self.spectrum(res, Y1)
        t1 = self.twists(S1, res, u, v)
        if Y2 == Y1:
            S2, k2, err2 = S1, k1, err1
        else:
            S2, k2, err2 = self.spectrum(res, Y2)
        t2 = self.twists(S2, res, xu, xv)
        total = t1 - w_e * t2
        n = len(numerators)
        return (total.real, np.full(n, err1 + err2), np.full(n, k1 + k2, dtype=np.int64),
                total.imag)

    def eval_symbol(self, a: QuadInt, c: QuadInt, split: float = 1.0) -> SymbolValue:
        vals, errs, terms, imag = self.for_denominator(c, np.array([a.coords], dtype=np.int64), split)
        return SymbolValue(a, c, float(vals[0]), float(errs[0]), int(terms[0]), "two_tail",
                           float(imag[0]))

    def eval_set(self, S: FareySet, split: float = 1.0, progress=None,
                 threads: int = 1) -> SymbolBatch:
        """Symbols for a whole set; denominators are independent, so threads > 1
        spreads them over a pool (results do not depend on the thread count)."""
        n = len(S)
        vals, errs, imag = np.zeros(n), np.zeros(n), np.zeros(n)
        terms = np.zeros(n, dtype=np.int64)
        groups = S.denominator_groups()
        job = lambda g: self.for_denominator(g[0], S.a[g[1]], split)
        with ThreadPoolExecutor(max(1, threads)) as pool:
            for i, ((c, sl), out) in enumerate(zip(groups, pool.map(job, groups))):
                vals[sl], errs[sl], terms[sl], imag[sl] = out
                if progress is not None:
                    progress(i + 1, len(groups))
        return SymbolBatch(S, vals, errs, terms, imag)


def get_evaluator(form: FormSpec, tol: float = 1e-8, cache_dir=None) -> SymbolEvaluator:
    """Evaluator cached on the form object."""
    cache = form.__dict__.setdefault("_evaluators", {})
    if tol not in cache:
        cache[tol] = SymbolEvaluator(form, tol, cache_dir)
    return cache[tol]


def _as_fraction(r) -> tuple[QuadInt, QuadInt]:
    if hasattr(r, "a") and hasattr(r, "c"):
        return r.a, r.c
    a, c = r
    return a, c


def tail_sum(form: FormSpec, r, Y: float, tol: float = 1e-8) -> complex:
    """sum_alpha c(alpha) psi(alpha r / sqrt(d_K)) (Y/a) K1(a Y), truncated at tol."""
    a, c = _as_fraction(r)
    if not Y > 0:
        raise ValueError("Y must be positive")
    ev = get_evaluator(form, tol)
    return complex(ev.tails(c, np.array([a.coords], dtype=np.int64), Y)[0])


def eval_symbol(form: FormSpec, r, tol: float = 1e-8, split: float = 1.0) -> SymbolValue:
    a, c = _as_fraction(r)
    return get_evaluator(form, tol).eval_symbol(a, c, split)


def partner_numerator(form: FormSpec, a: QuadInt, c: QuadInt) -> QuadInt:
    """x = -(e a)^{-1} mod (c): the numerator paired with a by W_e."""
    e, _ = level_data(form, c)
    res = Residues(c)
    u, v = res.mul((np.array([e.a]), np.array([e.b])), (np.array([a.a]), np.array([a.b])))
    iu, iv = res.inverse(u, v)
    xu, xv = res.reduce(-iu, -iv)
    return QuadInt(int(xu[0]), int(xv[0]), c.field)


# -- quadrature oracle ----------------------------------------------------------------------

_GL = {m: np.polynomial.legendre.leggauss(m) for m in (6, 8, 12, 16, 24)}


class _ResidueBins:
    """Elements grouped by class mod (c), keyed by alpha * conj(c) mod N."""

    def __init__(self, ev: SymbolEvaluator, c: QuadInt, k: int):
        el = ev.el
        cc = c.conj()
        N = c.norm()
        p, q = mul_coords(el.a[:k], el.b[:k], cc.a, cc.b, c.field)
        keys = (p % N) * N + (q % N)
        self.reps, self.inverse = np.unique(keys, return_inverse=True)
        self.N = N
        self.c = c

    def phase_matrix(self, numerators: np.ndarray) -> np.ndarray:
        """E[i, k] = psi for numerator i on residue class k."""
        p, q = self.reps // self.N, self.reps % self.N
        fld = self.c.field
        out = np.empty((len(numerators), len(self.reps)), dtype=complex)
        for i, (na, nb) in enumerate(numerators.tolist()):
            _, b = mul_coords(p, q, na, nb, fld)  # w-coefficient of a * alpha * conj(c)
            out[i] = np.exp(2j * np.pi * (b % self.N) / self.N)
        return out


def _quad_tail(ev: SymbolEvaluator, c: QuadInt, numerators: np.ndarray, Y0: float,
               tol: float, panel: float = 1.0, order: int = 16, max_refine: int = 4):
    """int_{Y0}^inf F1(a/c, y) dy / y for each numerator, by composite Gauss-Legendre
    in t = log(y / Y0); returns (values, error estimate)."""
    a = ev.ascale
    t_max = math.log(QUAD_CUTOFF / (a * Y0)) if a * Y0 < QUAD_CUTOFF else 0.0
    if t_max <= 0:
        return np.zeros(len(numerators)), 0.0
    k_all = int(np.searchsorted(ev.el.norm, math.floor((QUAD_CUTOFF / (a * Y0)) ** 2), side="right"))
    if (QUAD_CUTOFF / (a * Y0)) ** 2 > ev.table.norm_bound:
        raise InsufficientCoverageError(
            f"quadrature at height {Y0:.4g} needs norms up to {(QUAD_CUTOFF / (a * Y0)) ** 2:.0f}")
    bins = _ResidueBins(ev, c, k_all)
    E = bins.phase_matrix(numerators)
    nbins = len(bins.reps)

    def integrate(h, m):
        nodes, weights = _GL[m]
        n_panels = max(1, math.ceil(t_max / h))
        h = t_max / n_panels
        total = np.zeros(len(numerators), dtype=complex)
        for p in range(n_panels):
            ts = p * h + (nodes + 1) * h / 2
            for t, wt in zip(ts, weights * h / 2):
                y = Y0 * math.exp(t)
                k = int(np.searchsorted(ev.el.norm, math.floor((QUAD_CUTOFF / (a * y)) ** 2),
                                        side="right"))
                if k == 0:
                    continue
                ku = int(ev.rank[k - 1]) + 1
                k0u = bessel_K0(a * ev.sqrt_unorm[:ku] * y)
                wts = ev.el.coeff[:k] * k0u[ev.rank[:k]] * (y * y)
                W = np.bincount(bins.inverse[:k], weights=wts, minlength=nbins)
                total += wt * (E @ W)
        return total

    h = panel
    coarse = integrate(h, order)
    for _ in range(max_refine):
        fine = integrate(h / 2, order)
        err = float(np.max(np.abs(fine - coarse)))
        coarse = fine
        h /= 2
        if err <= tol:
            break
    return coarse, err


def eval_symbols_quadrature(form: FormSpec, c: QuadInt, numerators: np.ndarray,
                            tol: float = 1e-8, height_factor: float = 1.5):
    """Slow path: integrate the Fourier series numerically above heights that differ
    from the two-tail split.  Returns (values, error estimates)."""
    ev = get_evaluator(form, tol)
    e, w_e = level_data(form, c)
    y_star, _ = split_heights(c, e)
    Y0 = height_factor * y_star
    Y1 = 1.0 / (abs(c) ** 2 * abs(e) * Y0)
    res = Residues(c)
    u, v = res.reduce(numerators[:, 0], numerators[:, 1])
    ea = res.mul((np.full_like(u, e.a), np.full_like(v, e.b)), (u, v))
    iu, iv = res.inverse(*ea)
    xu, xv = res.reduce(-iu, -iv)
    upper, err_u = _quad_tail(ev, c, np.stack([u, v], axis=1), Y0, tol / 4)
    lower, err_l = _quad_tail(ev, c, np.stack([xu, xv], axis=1), Y1, tol / 4)
    total = upper - w_e * lower
    return total.real, np.full(len(numerators), err_u + err_l), total.imag


def eval_symbol_quadrature(form: FormSpec, r, tol: float = 1e-8,
                           height_factor: float = 1.5) -> SymbolValue:
    a, c = _as_fraction(r)
    vals, errs, imag = eval_symbols_quadrature(form, c, np.array([a.coords], dtype=np.int64),
                                               tol, height_factor)
    return SymbolValue(a, c, float(vals[0]), float(errs[0]), 0, "quadrature", float(imag[0]))


# -- completed twisted L-function ------------------------------------------------------------

def _upper_moment(s: float, x: np.ndarray, cutoff: float = 40.0, panels: int = 40,
                  order: int = 16) -> np.ndarray:
    """G_s(x) = int_x^inf t^(2s-1) K0(t) dt for each x > 0 (composite Gauss-Legendre)."""
    nodes, weights = _GL[order]
    h = cutoff / panels
    u = (np.arange(panels)[:, None] * h + (nodes[None, :] + 1) * h / 2).ravel()
    wts = np.tile(weights * h / 2, panels)
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(0, len(x), 2048):
        t = x[i:i + 2048, None] + u[None, :]
        out[i:i + 2048] = np.sum(t ** (2 * s - 1) * bessel_K0(t.ravel()).reshape(t.shape) * wts,
                                 axis=1)
    return out


def _tail_s(ev: SymbolEvaluator, c: QuadInt, num: tuple[int, int], Y: float, s: float) -> complex:
    """sum c(alpha) psi int_Y^inf y^(2s-1) K0(a_alpha y) dy."""
    k, _, _ = ev._prefix(Y, ev.tol * 1e-2)
    ku = int(ev.rank[k - 1]) + 1
    au = ev.ascale * ev.sqrt_unorm[:ku]
    G = _upper_moment(s, au * Y) * au ** (-2 * s)
    w = ev.el.coeff[:k] * G[ev.rank[:k]]
    cc = c.conj()
    _, b = mul_coords(ev.el.a[:k], ev.el.b[:k], *mul_coords(num[0], num[1], cc.a, cc.b, c.field),
                      c.field)
    N = c.norm()
    return complex(np.sum(w * np.exp(2j * np.pi * (b % N) / N)))


def lambda_completed(form: FormSpec, s: float, r, tol: float = 1e-9, split: float = 1.0,
                     scaled: bool = False) -> TwistedLambda:
    """Lambda(F, s, a/c) = int_0^inf y^(2s-2) F1(a/c, y) dy/y by the two-tail formula.

    With scaled=True the value is multiplied by |c|^(2s), the normalization under
    which Gamma(s)^2 L(F, s, r) appears with the factor (|c| sqrt|d_K| / 2 pi)^(2s) / 4.
    At s = 1 and scaled=False this is the modular symbol.
    """
    a, c = _as_fraction(r)
    ev = get_evaluator(form, tol)
    e, w_e = level_data(form, c)
    Y1, Y2 = split_heights(c, e, split)
    x = partner_numerator(form, a, c)
    Q = abs(c) ** 2 * abs(e)
    val = _tail_s(ev, c, a.coords, Y1, s) - w_e * Q ** (2 - 2 * s) * _tail_s(ev, c, x.coords, Y2, 2 - s)
    value = val.real * (abs(c) ** (2 * s) if scaled else 1.0)
    return TwistedLambda(s, a, c, float(value), scaled)


def dirichlet_L(form: FormSpec, s: float, r, smooth: bool = True) -> float:
    """L(F, s, a/c) = sum over elements c(alpha) psi(alpha r / sqrt d_K) N(alpha)^(-s), s > 3/2.

    With smooth=True the terms carry the weight exp(-(N/B)^2).  Because the
    twisted L-function is entire, that sum equals
    L(s) - L(s-2) B^-2 + L(s-4) B^-4 / 2 - ..., and the first two corrections are
    removed by Richardson extrapolation over B0, B0/2, B0/4 with B0 = norm_bound/6.
    """
    if s <= 1.5:
        raise ValueError("the Dirichlet series converges absolutely only for s > 3/2")
    a, c = _as_fraction(r)
    table = form.load()
    el = table.elements
    nrm = el.norm.astype(float)
    cc = c.conj()
    _, b = mul_coords(el.a, el.b, *mul_coords(a.a, a.b, cc.a, cc.b, c.field), c.field)
    N = c.norm()
    base = el.coeff * nrm ** (-s) * np.cos(2 * np.pi * (b % N) / N)
    if not smooth:
        return float(np.sum(base))
    B0 = table.norm_bound / 6.0
    sums = [float(np.sum(base * np.exp(-(nrm / (B0 / 2**k)) ** 2))) for k in range(3)]
    # rows: S(B0 / 2^k) = L - K 4^k + M 16^k
    system = np.array([[1.0, -(4.0**k), 16.0**k] for k in range(3)])
    return float(np.linalg.solve(system, sums)[0])


def dirichlet_side(form: FormSpec, s: float, r) -> float:
    """(1/4) (|c| sqrt|d_K| / 2 pi)^(2s) Gamma(s)^2 L(F, s, r)."""
    a, c = _as_fraction(r)
    fld = form.fld
    pref = 0.25 * (abs(c) * fld.sqrt_abs_dK / (2 * math.pi)) ** (2 * s) * gamma_real(s) ** 2
    return pref * dirichlet_L(form, s, r)


# -- period lattice and Atkin-Lehner sign ------------------------------------------------------

class DegenerateLatticeError(ValueError):
    pass


def _approx_gcd(x: float, y: float, tol: float) -> float:
    x, y = abs(x), abs(y)
    while y > tol:
        x, y = y, x - round(x / y) * y
        y = abs(y)
    return x


def period_lattice_estimate(values, tol: float | None = None) -> tuple[float, float]:
    """Fit values to Omega Z; returns (Omega, max distance of a value to Omega Z).

    Omega comes from a Euclid-style approximate GCD of the values (noise below tol
    is treated as zero), then refined by least squares on the integer labels.
    """
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        raise DegenerateLatticeError("empty sample")
    scale = float(np.max(np.abs(v)))
    if tol is None:
        tol = 1e-6 * scale
    nz = v[np.abs(v) > tol]
    if len(nz) == 0:
        raise DegenerateLatticeError("all symbols vanish: no lattice to fit")
    g = 0.0
    for x in sorted(np.abs(nz))[::-1]:
        g = x if g == 0.0 else _approx_gcd(g, x, tol)
    k = np.round(v / g)
    omega = float(np.sum(k * v) / np.sum(k * k))
    resid = float(np.max(np.abs(v - np.round(v / omega) * omega)))
    return abs(omega), resid


def estimate_al_sign(form: FormSpec, c: QuadInt, numerators: np.ndarray, tol: float = 1e-8,
                     splits=(0.5, 2.0)) -> dict:
    """Decide w_e for the divisor paired with c by testing which sign makes the
    symbol independent of the split height (the Atkin-Lehner functional equation at
    two different heights).  Returns discrepancies for both signs and the pick."""
    ev = get_evaluator(form, tol)
    out = {}
    for sign in (1, -1):
        lo = ev.for_denominator(c, numerators, splits[0], w_override=sign)[0]
        hi = ev.for_denominator(c, numerators, splits[1], w_override=sign)[0]
        out[sign] = float(np.max(np.abs(lo - hi)))
    e, _ = level_data(form, c)
    best = min(out, key=out.get)
    return {"e": str(e), "discrepancy_plus": out[1], "discrepancy_minus": out[-1], "sign": best}


def symbol_bound_ratio(values: np.ndarray, absc: np.ndarray) -> tuple[float, int]:
    """max |<r>| / (log|c| + 1) and its index."""
    ratio = np.abs(values) / (np.log(absc) + 1.0)
    i = int(np.argmax(ratio))
    return float(ratio[i]), i
