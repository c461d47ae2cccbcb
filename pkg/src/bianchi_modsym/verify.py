"""Machine-checked acceptance criteria and the run configuration they share."""
from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import integrate, special

from . import constants as K
from .coeffs import ConfigError, FormSpec
from .farey import FareySet, count_Q, count_fit, enumerate_Q, weyl_sum
from .modsym import (eval_symbols_quadrature, get_evaluator, level_data, partner_numerator,
                     period_lattice_estimate)
from .quadfield import EUCLIDEAN_D, QuadInt, canonical, field as get_field, smallest_dual_vectors, zeta_K2
from .special import bessel_k01, tail_integral
from .stats import SymbolSample, StatsSummary, mgf_scan, moments, summarize

CACHE_ENV = "BIANCHI_CACHE"
DEFAULT_FORM = {"field": -1, "level": "11", "w": {"11": -1},
                "source": {"type": "base_change", "curve": [0, -1, 1, -10, -20]},
                "norm_bound": 200000}


def default_cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV, Path.home() / ".cache" / "bianchi_modsym"))


@dataclass
class RunConfig:
    form: dict = field(default_factory=lambda: dict(DEFAULT_FORM))
    divisors: list[str] = field(default_factory=lambda: ["1", "11"])
    X_grid: list[float] = field(default_factory=lambda: [10, 14, 20, 28, 40])
    tol: float = 1e-8
    seed: int = 0
    threads: int = 1
    cache_dir: str | None = None
    out_dir: str | None = None

    def __post_init__(self):
        if not isinstance(self.form, dict):
            raise ConfigError("config 'form' must be an object")
        d = int(self.form.get("field", 0))
        if d not in EUCLIDEAN_D:
            raise ConfigError(f"field d={d} is not supported: only the Euclidean fields "
                              f"{EUCLIDEAN_D} are implemented")
        grid = sorted(float(x) for x in self.X_grid)
        if len(grid) < 4 or grid[-1] < 4 * grid[0]:
            raise ConfigError("X_grid needs at least 4 values spanning a factor of 4")
        self.X_grid = grid
        if not (0 < self.tol < 1e-2):
            raise ConfigError(f"tolerance {self.tol} outside (0, 1e-2)")
        if not self.divisors:
            raise ConfigError("at least one divisor class is required")
        self.divisors = [str(x) for x in self.divisors]

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> RunConfig:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON ({exc})") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]

    @property
    def cache_path(self) -> Path:
        return Path(self.cache_dir) if self.cache_dir else default_cache_dir()


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.name}: {self.detail}"


# -- shared, lazily computed data ----------------------------------------------------------

class Context:
    """Everything the criteria need, computed once and cached on disk where costly."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.cache = config.cache_path
        self.cache.mkdir(parents=True, exist_ok=True)

    @cached_property
    def form(self) -> FormSpec:
        form = FormSpec.from_dict(self.config.form)
        form.load(self.cache)
        return form

    @property
    def fld(self):
        return self.form.fld

    @cached_property
    def evaluator(self):
        return get_evaluator(self.form, self.config.tol, self.cache)

    def divisor(self, label: str) -> QuadInt:
        return canonical(QuadInt.parse(label, self.fld))

    @property
    def X_max(self) -> float:
        return self.config.X_grid[-1]

    def fractions(self, label: str, X: float | None = None) -> FareySet:
        key = (label, X)
        store = self.__dict__.setdefault("_fractions", {})
        if key not in store:
            store[key] = enumerate_Q(self.form.level, self.divisor(label), X or self.X_max)
        return store[key]

    def split_fractions(self, label: str) -> FareySet:
        """Fractions whose heights stay inside the table when y* is halved: |c| < X_max/2."""
        return self.fractions(label).restrict(self.X_max / 2)

    def symbols(self, label: str) -> tuple[FareySet, np.ndarray, np.ndarray]:
        """(fractions, values, errors) at the largest X, cached as npz."""
        store = self.__dict__.setdefault("_symbols", {})
        if label in store:
            return store[label]
        S = self.fractions(label)
        path = self.cache / (f"symbols-{self.form.cache_key()}-{label}-{self.X_max:g}-"
                             f"{self.config.tol:g}.npz")
        if path.exists():
            z = np.load(path)
            if len(z["values"]) == len(S):
                store[label] = (S, z["values"], z["errors"])
                return store[label]
        batch = self.evaluator.eval_set(S, threads=self.config.threads)
        np.savez(path, values=batch.values, errors=batch.errors)
        store[label] = (S, batch.values, batch.errors)
        return store[label]

    def sample(self, label: str) -> SymbolSample:
        S, v, _ = self.symbols(label)
        return SymbolSample(v, S.absc, self.X_max, label, self.form.cache_key())

    @cached_property
    def summary(self) -> StatsSummary:
        return summarize(self.sample(self.config.divisors[0]), self.config.X_grid)

    @cached_property
    def petersson(self) -> tuple[float, float]:
        path = self.cache / f"petersson-{self.form.cache_key()}.json"
        if path.exists():
            d = json.loads(path.read_text())
            return d["estimate"], d["error"]
        est, err = K.petersson_norm(self.form, cache_dir=self.cache)
        path.write_text(json.dumps({"estimate": est, "error": err}))
        return est, err

    @cached_property
    def constants(self) -> K.ConstantsReport:
        return K.c_f(self.form, self.petersson, self.cache)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.config.seed)


# -- independent oracles ------------------------------------------------------------------

def bessel_quadrature(x: float) -> tuple[float, float]:
    """K0, K1 from K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt."""
    top = math.acosh(max(1.0, 800.0 / x))
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    k0 = integrate.quad(lambda t: math.exp(-x * math.cosh(t)), 0, top, **opts)[0]
    k1 = integrate.quad(lambda t: math.exp(-x * math.cosh(t)) * math.cosh(t), 0, top, **opts)[0]
    return k0, k1


def tail_integral_quadrature(a: float, Y: float) -> float:
    """int_Y^inf y K0(a y) dy with the library K0."""
    top = Y + 800.0 / a
    return integrate.quad(lambda y: y * special.k0(a * y), Y, top, epsabs=0.0, epsrel=1e-13,
                          limit=400)[0]


def zeta_K2_lattice(d: int) -> float:
    """zeta_K(2) = (1/|O_K^*|) sum over nonzero lattice points of N(x + y w)^-2.

    Rows of fixed y are summed in closed form: with N = A((x+u)^2 + v^2),
    sum_x ((x+u)^2+v^2)^-2 = g/(2v^2) - pi^2 (1 - cos(2 pi u) cosh(2 pi v)) / (v^2 (cosh(2 pi v) - cos(2 pi u))^2)
    where g = (pi/v) sinh(2 pi v)/(cosh(2 pi v) - cos(2 pi u)).  For v > 7 the row sum
    equals pi/(2 v^3) to double precision and the remaining rows form a Hurwitz zeta.
    """
    fld = get_field(d)
    A, Bq, C = 1, fld.trace_w, fld.norm_w  # N(x + y w) = x^2 + B x y + C y^2
    D = 4 * A * C - Bq * Bq
    total = 2 * special.zeta(4) / A**2
    y = 1
    while True:
        u = Bq * y / (2 * A)
        v = y * math.sqrt(D) / (2 * A)
        if v > 7.0:
            break
        ch, sh, c = math.cosh(2 * math.pi * v), math.sinh(2 * math.pi * v), math.cos(2 * math.pi * u)
        g = math.pi / v * sh / (ch - c)
        row = g / (2 * v * v) - math.pi**2 * (1 - c * ch) / (v * v * (ch - c) ** 2)
        total += 2 * row / A**2
        y += 1
    k = math.sqrt(D) / (2 * A)
    total += 2 / A**2 * (math.pi / 2) * special.zeta(3, y) / k**3
    return total / fld.unit_count


# -- criteria ---------------------------------------------------------------------------

def crit_special(ctx: Context) -> CriterionResult:
    xs = np.concatenate([np.logspace(-4, 2, 49), [1.999, 2.0, 2.001, 2.5, 3.7, 7.3, 55.5]])
    worst = 0.0
    for x in xs:
        q0, q1 = bessel_quadrature(float(x))
        k0, k1 = bessel_k01(float(x))
        worst = max(worst, abs(k0 - q0) / q0, abs(k1 - q1) / q1)
    tail_worst = 0.0
    for a, Y in [(2 * math.pi, 0.01), (2 * math.pi, 0.3), (5.0, 1.0), (1.0, 3.0), (12.0, 0.05)]:
        q = tail_integral_quadrature(a, Y)
        tail_worst = max(tail_worst, abs(tail_integral(a, Y) - q) / q)
    ok = worst <= 1e-10 and tail_worst <= 1e-10
    return CriterionResult(1, "special-function fidelity", ok,
                           f"max rel err K0/K1 {worst:.2e}, tail integral {tail_worst:.2e} (limit 1e-10)",
                           {"bessel": worst, "tail": tail_worst})


def _random_rows(S: FareySet, count: int, rng) -> np.ndarray:
    return np.sort(rng.choice(len(S), size=min(count, len(S)), replace=False))


def crit_symmetry(ctx: Context) -> CriterionResult:
    """<a/c> = -w_e <x/c> with x = -(e a)^-1 mod c, the two sides at different split heights."""
    ev, rng = ctx.evaluator, ctx.rng()
    worst, n = 0.0, 0
    for label in ctx.config.divisors:
        S = ctx.split_fractions(label)
        if len(S) == 0:
            continue
        for i in _random_rows(S, 50, rng):
            a = QuadInt(int(S.a[i, 0]), int(S.a[i, 1]), ctx.fld)
            c = QuadInt(int(S.c[i, 0]), int(S.c[i, 1]), ctx.fld)
            x = partner_numerator(ctx.form, a, c)
            va, ea, _, _ = ev.for_denominator(c, np.array([a.coords]), split=2.0)
            vx, ex, _, _ = ev.for_denominator(c, np.array([x.coords]), split=1.0)
            _, w = level_data(ctx.form, c)
            worst = max(worst, abs(va[0] + w * vx[0]) / (2 * (ea[0] + ex[0])))
            n += 1
    return CriterionResult(2, "functional-equation symmetry", worst <= 1.0,
                           f"{n} fractions, max |<a/c> + w<x/c>| / (2 err) = {worst:.3f} (limit 1)",
                           {"ratio": worst, "count": n})


def crit_oracle(ctx: Context, radius: float = 10.0) -> CriterionResult:
    start = time.perf_counter()
    worst, n = 0.0, 0
    ev = ctx.evaluator
    for label in ctx.config.divisors:
        S = ctx.fractions(label, radius * (1 + 1e-12))
        for c, sl in S.denominator_groups():
            nums = S.a[sl]
            fast = ev.for_denominator(c, nums)[0]
            slow = eval_symbols_quadrature(ctx.form, c, nums, ctx.config.tol)[0]
            worst = max(worst, float(np.max(np.abs(fast - slow))))
            n += len(nums)
    secs = time.perf_counter() - start
    ok = worst <= 1e-6 and secs <= 120 and n > 0
    return CriterionResult(3, "oracle equivalence", ok,
                           f"{n} fractions with |c| <= {radius:g}, max diff {worst:.2e} (limit 1e-6), "
                           f"{secs:.0f} s (limit 120)", {"max_diff": worst, "count": n, "seconds": secs})


def crit_split(ctx: Context) -> CriterionResult:
    ev, rng = ctx.evaluator, ctx.rng()
    worst, n = 0.0, 0
    for label in ctx.config.divisors:
        S = ctx.split_fractions(label)
        if len(S) == 0:
            continue
        rows = set(_random_rows(S, 300, rng).tolist())
        for c, sl in S.denominator_groups():
            idx = [i for i in range(sl.start, sl.stop) if i in rows]
            if not idx:
                continue
            nums = S.a[idx]
            vals = [ev.for_denominator(c, nums, split=f)[0] for f in (0.5, 1.0, 2.0)]
            worst = max(worst, float(np.max(np.ptp(np.array(vals), axis=0))))
            n += len(idx)
    limit = 2 * ctx.config.tol
    return CriterionResult(4, "split invariance", worst <= limit,
                           f"{n} fractions, max change {worst:.2e} (limit {limit:.0e})",
                           {"max_change": worst, "count": n})


def crit_period(ctx: Context) -> CriterionResult:
    n_label = str(ctx.form.level)
    if n_label not in ctx.config.divisors:
        return CriterionResult(5, "period lattice", False, f"class ({n_label}) not configured")
    S, v, _ = ctx.symbols(n_label)
    if len(v) < 20:
        return CriterionResult(5, "period lattice", False, f"only {len(v)} fractions with n | c")
    omega, resid = period_lattice_estimate(v)
    others = [lab for lab in ctx.config.divisors if lab != n_label]
    control = math.inf
    if others:
        _, w, _ = ctx.symbols(others[0])
        control = float(np.max(np.abs(w - np.round(w / omega) * omega))) / omega
    ok = resid <= 1e-4 * omega and control > 1e-4
    return CriterionResult(5, "period lattice", ok,
                           f"Omega = {omega:.10f} from {len(v)} symbols, max residual {resid / omega:.1e} Omega "
                           f"(limit 1e-4); control class max distance {control:.3f} Omega (must exceed 1e-4)",
                           {"omega": omega, "residual": resid, "control": control})


def crit_count(ctx: Context) -> CriterionResult:
    label = ctx.config.divisors[0]
    slope = count_fit(ctx.form.level, ctx.divisor(label), ctx.config.X_grid)
    counts = [count_Q(ctx.form.level, ctx.divisor(label), X) for X in ctx.config.X_grid]
    ok = 3.8 <= slope <= 4.2
    return CriterionResult(6, "counting", ok, f"class ({label}) log-log slope {slope:.3f} "
                           f"(range [3.8, 4.2]), counts {counts}", {"slope": slope, "counts": counts})


def crit_bound(ctx: Context) -> CriterionResult:
    rows = ctx.summary.rows
    ratio = rows[-1].bound_ratio / rows[0].bound_ratio
    return CriterionResult(7, "symbol bound", ratio <= 1.5,
                           "max |<r>|/(log|c|+1) " + ", ".join(f"{r.X:g}: {r.bound_ratio:.4f}" for r in rows)
                           + f"; last/first {ratio:.3f} (limit 1.5)", {"ratio": ratio})


def crit_variance(ctx: Context) -> CriterionResult:
    s = ctx.summary
    lo, hi = s.window_slopes
    spread = abs(lo - hi) / max(abs(lo), abs(hi))
    ok = s.r_squared >= 0.98 and spread <= 0.15
    return CriterionResult(8, "variance law", ok,
                           f"C_fit {s.C_fit:.5f}, D_fit {s.D_fit:.5f}, R^2 {s.r_squared:.4f} (limit 0.98); "
                           f"window slopes {lo:.5f} / {hi:.5f}, spread {spread:.1%} (limit 15%)",
                           {"C_fit": s.C_fit, "D_fit": s.D_fit, "r2": s.r_squared, "spread": spread})


def crit_constant(ctx: Context) -> CriterionResult:
    rep = ctx.constants
    C_fit = ctx.summary.C_fit
    gap = abs(rep.C_F - C_fit) / rep.C_F
    alt = ", ".join(f"{k} {v:.5f} (gap {abs(v - C_fit) / v:.0%})" for k, v in rep.alternative_assemblies.items())
    return CriterionResult(9, "constant cross-check", gap <= 0.25,
                           f"C_F {rep.C_F:.5f} ({rep.covolume_variant} covolume, ||F||^2 "
                           f"{rep.petersson_norm:.6f} +- {rep.petersson_error:.1e}) vs C_fit {C_fit:.5f}, "
                           f"gap {gap:.1%} (limit 25%); other assemblies: {alt}",
                           {"C_F": rep.C_F, "C_fit": C_fit, "gap": gap, **rep.alternative_assemblies})


def _doubling_pairs(grid):
    return [(a, b) for a in grid for b in grid if abs(b - 2 * a) < 1e-9 * b]


def crit_normality(ctx: Context) -> CriterionResult:
    s = ctx.summary
    ks = {r.X: r.ks for r in s.rows}
    final = s.rows[-1].ks
    growth = max((ks[b] / ks[a] for a, b in _doubling_pairs(list(ks))), default=0.0)
    ok = final <= 0.05 and growth <= 1.1
    return CriterionResult(10, "normality", ok,
                           "KS " + ", ".join(f"{X:g}: {v:.4f}" for X, v in ks.items())
                           + f" (X={s.rows[-1].X:g} limit 0.05); worst doubling ratio {growth:.3f} (limit 1.1)",
                           {"ks": final, "growth": growth})


def crit_equidistribution(ctx: Context) -> CriterionResult:
    label = ctx.config.divisors[0]
    S = ctx.fractions(label)
    mus = smallest_dual_vectors(ctx.fld, 4)
    table = {}
    for X in ctx.config.X_grid:
        T = S.restrict(X)
        table[X] = max(abs(weyl_sum(T, m)) / len(T) for m in mus)
    final = table[ctx.config.X_grid[-1]]
    pairs = _doubling_pairs(list(table))
    growth = max(((table[b] - table[a]) for a, b in pairs), default=0.0)
    ok = final <= 0.05 and table[ctx.config.X_grid[-1]] <= table[ctx.config.X_grid[0]] and growth <= 0
    return CriterionResult(11, "equidistribution", ok,
                           f"max |Weyl|/N over dual vectors {mus}: "
                           + ", ".join(f"{X:g}: {v:.2e}" for X, v in table.items())
                           + " (limit 0.05, non-increasing under doubling)",
                           {"final": final})


def crit_mgf(ctx: Context) -> CriterionResult:
    s = ctx.summary
    sample = ctx.sample(ctx.config.divisors[0]).restrict(ctx.X_max)
    rep = mgf_scan(sample, ctx.X_max, s.C_fit)
    _, var = moments(sample)
    target = -4 * math.pi ** 2 * var
    d2_err = abs(rep.second_difference - target) / abs(target)
    abs_dev = float(np.max(np.abs(rep.empirical - rep.predicted)))
    ok = d2_err <= 0.05 and rep.max_rel_dev <= 0.10
    return CriterionResult(12, "MGF consistency", ok,
                           f"second difference vs -4 pi^2 var off by {d2_err:.1e} (limit 5%); "
                           f"max relative MGF deviation {rep.max_rel_dev:.1%} (limit 10%), "
                           f"max absolute {abs_dev:.3f}",
                           {"d2_err": d2_err, "max_rel_dev": rep.max_rel_dev, "max_abs_dev": abs_dev})


def crit_zeta(ctx: Context) -> CriterionResult:
    worst = 0.0
    parts = []
    for d in EUCLIDEAN_D:
        a, b = zeta_K2(get_field(d)), zeta_K2_lattice(d)
        err = abs(a - b) / b
        worst = max(worst, err)
        parts.append(f"d={d}: {a:.12f}")
    return CriterionResult(13, "zeta_K(2)", worst <= 1e-9,
                           f"max rel diff vs lattice sum {worst:.1e} (limit 1e-9); " + ", ".join(parts),
                           {"max_rel": worst})


def crit_covolume(ctx: Context) -> CriterionResult:
    fld = get_field(-1)
    measured = K.fundamental_domain_volume(fld)
    lit = K.covolume(fld, "literature")
    pap = K.covolume(fld, "dk_squared")
    lit_err = abs(lit - measured) / measured
    ratio = pap / measured
    detected = abs(ratio - math.sqrt(abs(fld.d_K))) < 0.01 * ratio
    ok = lit_err <= 0.01 and detected
    return CriterionResult(14, "covolume oracle", ok,
                           f"fundamental domain {measured:.6f}, literature {lit:.6f} (rel err {lit_err:.1e}, "
                           f"limit 1%); |d_K|^2 variant {pap:.6f} = {ratio:.4f} x measured "
                           f"(|d_K|^(1/2) = {math.sqrt(abs(fld.d_K)):.4f}: discrepancy "
                           f"{'detected' if detected else 'NOT detected'})",
                           {"measured": measured, "literature": lit, "dk_squared": pap})


CRITERIA = [crit_special, crit_symmetry, crit_oracle, crit_split, crit_period, crit_count,
            crit_bound, crit_variance, crit_constant, crit_normality, crit_equidistribution,
            crit_mgf, crit_zeta, crit_covolume]


def run_criterion(ctx: Context, number: int) -> CriterionResult:
    fn = CRITERIA[number - 1]
    start = time.perf_counter()
    try:
        res = fn(ctx)
    except Exception as exc:  # a crash is reported as a failed criterion, with its cause
        res = CriterionResult(number, fn.__name__.removeprefix("crit_"), False,
                              f"error: {type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - start
    return res


def run_verify(config: RunConfig, only=None, echo=print) -> list[CriterionResult]:
    ctx = Context(config)
    results = []
    for k in only or range(1, len(CRITERIA) + 1):
        res = run_criterion(ctx, k)
        if echo:
            echo(res.line())
        results.append(res)
    return results
