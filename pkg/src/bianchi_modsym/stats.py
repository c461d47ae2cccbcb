"""Sample statistics of modular symbols: moments, the log X variance law, KS
distance to the normal law, moment generating functions and the size bound."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtr


class EmptySampleError(ValueError):
    pass


class InsufficientGridError(ValueError):
    pass


class DegenerateNormalizationError(ValueError):
    pass


@dataclass
class SymbolSample:
    """Symbol values with the |c| of each fraction; `labels` are optional "a/c" strings."""
    values: np.ndarray
    absc: np.ndarray
    X: float = math.inf
    divisor: str = ""
    form_id: str = ""
    labels: list[str] | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.absc = np.asarray(self.absc, dtype=float)
        if self.values.shape != self.absc.shape:
            raise ValueError("values and absc must have the same length")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sample contains non-finite symbol values")

    def __len__(self) -> int:
        return len(self.values)

    def restrict(self, X: float) -> SymbolSample:
        keep = self.absc < X
        labels = None if self.labels is None else [s for s, k in zip(self.labels, keep) if k]
        return SymbolSample(self.values[keep], self.absc[keep], X, self.divisor, self.form_id, labels)

    @classmethod
    def from_batch(cls, batch, divisor: str = "", form_id: str = "") -> SymbolSample:
        S = batch.fractions
        return cls(batch.values, S.absc, S.X, divisor or str(S.divisor), form_id)

    @classmethod
    def from_csv(cls, path, divisor: str | None = None) -> SymbolSample:
        """Read a symbol CSV (columns a,c,absc,class,symbol,...); '#' lines are metadata."""
        vals, absc, labels = [], [], []
        meta: dict[str, str] = {}
        with open(path) as fh:
            rows = []
            for line in fh:
                if line.startswith("#"):
                    for part in line[1:].split():
                        k, _, v = part.partition("=")
                        meta[k] = v
                else:
                    rows.append(line)
        for row in csv.DictReader(rows):
            if divisor is not None and row["class"] != divisor:
                continue
            vals.append(float(row["symbol"]))
            absc.append(float(row["absc"]))
            labels.append(f"{row['a']}/{row['c']}")
        X = float(meta.get("X", "inf"))
        return cls(np.array(vals), np.array(absc), X, divisor or meta.get("divisor", ""),
                   meta.get("form", ""), labels)


def _require(sample: SymbolSample) -> None:
    if len(sample) == 0:
        raise EmptySampleError(f"empty symbol sample (X={sample.X}, class {sample.divisor or '?'})")


# -- moments ------------------------------------------------------------------------------

def moments(sample: SymbolSample) -> tuple[float, float]:
    """Unweighted mean and (population) variance."""
    _require(sample)
    v = sample.values
    mean = float(np.mean(v))
    return mean, float(np.mean((v - mean) ** 2))


def second_moment(sample: SymbolSample) -> float:
    _require(sample)
    return float(np.mean(sample.values ** 2))


def variance_regression(X_grid, variances) -> tuple[float, float, float]:
    """Least squares of variance against log X: (slope C, intercept D, R^2)."""
    X = np.asarray(X_grid, dtype=float)
    v = np.asarray(variances, dtype=float)
    if len(np.unique(X)) < 4 or X.max() < 4 * X.min():
        raise InsufficientGridError("need at least 4 distinct X values spanning a factor of 4")
    L = np.log(X)
    C, D = np.polyfit(L, v, 1)
    resid = v - (C * L + D)
    ss_tot = float(np.sum((v - v.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(C), float(D), r2


def windowed_slopes(X_grid, variances) -> tuple[float, float]:
    """Slopes of variance vs log X on the lower and upper halves of the grid
    (the middle point belongs to both)."""
    order = np.argsort(X_grid)
    X = np.log(np.asarray(X_grid, dtype=float)[order])
    v = np.asarray(variances, dtype=float)[order]
    mid = len(X) // 2
    lo = np.polyfit(X[: mid + 1], v[: mid + 1], 1)[0]
    hi = np.polyfit(X[mid:], v[mid:], 1)[0]
    return float(lo), float(hi)


# -- normality ------------------------------------------------------------------------

def ks_distance(z) -> float:
    """sup |F_n - Phi| from the order statistics (ties handled by grouping)."""
    z = np.sort(np.asarray(z, dtype=float))
    n = len(z)
    if n == 0:
        raise EmptySampleError("KS distance of an empty sample")
    # empirical CDF just before and just after each distinct value
    uniq, first = np.unique(z, return_index=True)
    after = np.append(first[1:], n) / n
    before = first / n
    phi = ndtr(uniq)
    return float(max(np.max(after - phi), np.max(phi - before)))


def normalize(sample: SymbolSample, C: float, X: float | None = None, center: bool = False,
              per_c: bool = False) -> np.ndarray:
    """Symbols divided by sqrt(C log X), or by sqrt(C log |c|) per fraction with per_c."""
    if not C > 0:
        raise DegenerateNormalizationError(f"normalization constant must be positive, got {C}")
    v = sample.values - (np.mean(sample.values) if center else 0.0)
    if per_c:
        logs = np.log(np.maximum(sample.absc, math.e))
        return v / np.sqrt(C * logs)
    X = sample.X if X is None else X
    if not (X > 1 and math.isfinite(X)):
        raise DegenerateNormalizationError(f"need a finite X > 1, got {X}")
    return v / math.sqrt(C * math.log(X))


def ks_test(sample: SymbolSample, C: float, X: float | None = None, center: bool = False,
            per_c: bool = False) -> float:
    _require(sample)
    return ks_distance(normalize(sample, C, X, center, per_c))


# -- moment generating function ------------------------------------------------------------

@dataclass
class MGFReport:
    eps: np.ndarray
    empirical: np.ndarray
    predicted: np.ndarray
    max_rel_dev: float
    second_difference: float
    variance_target: float
    second_difference_rel_err: float

    def to_dict(self) -> dict:
        return {
            "eps": self.eps.tolist(),
            "empirical_re": self.empirical.real.tolist(),
            "empirical_im": self.empirical.imag.tolist(),
            "predicted": self.predicted.tolist(),
            "max_rel_dev": self.max_rel_dev,
            "second_difference": self.second_difference,
            "variance_target": self.variance_target,
            "second_difference_rel_err": self.second_difference_rel_err,
        }


def empirical_mgf(values: np.ndarray, eps) -> np.ndarray:
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    out = np.empty(len(eps), dtype=complex)
    for i, e in enumerate(eps):
        out[i] = 1.0 if e == 0 else np.mean(np.exp(2j * np.pi * e * values))
    return out


def small_eps_limit(C: float, X: float) -> float:
    return 0.5 / math.sqrt(C * math.log(X))


def mgf_scan(sample: SymbolSample, X: float, C: float, eps_grid=None, n_eps: int = 21) -> MGFReport:
    """Empirical mean of exp(2 pi i eps <r>) against exp(-2 pi^2 C eps^2 log X).

    The second central difference at eps = 0 (step 1e-3 / sqrt(C log X)) is
    compared with -(2 pi)^2 times the second moment, its exact Taylor coefficient.
    """
    _require(sample)
    if not C > 0:
        raise DegenerateNormalizationError(f"C must be positive, got {C}")
    scale = math.sqrt(C * math.log(X))
    if eps_grid is None:
        eps_grid = np.linspace(-0.5 / scale, 0.5 / scale, n_eps)
    eps = np.asarray(eps_grid, dtype=float)
    emp = empirical_mgf(sample.values, eps)
    pred = np.exp(-2 * math.pi ** 2 * C * eps ** 2 * math.log(X))
    max_dev = float(np.max(np.abs(emp - pred) / pred))
    h = 1e-3 / scale
    # M(h) + M(-h) - 2 = -4 mean(sin^2(pi h v)), free of cancellation
    d2 = float(-4.0 * np.mean(np.sin(math.pi * h * sample.values) ** 2) / (h * h))
    target = -(2 * math.pi) ** 2 * float(np.mean(sample.values ** 2))
    rel = abs(d2 - target) / abs(target) if target else abs(d2)
    return MGFReport(eps, emp, pred, max_dev, d2, target, rel)


# -- size bound -------------------------------------------------------------------------------

def bound_diagnostic(sample: SymbolSample) -> tuple[float, int]:
    """max |<r>| / (log|c| + 1) and the index of the maximizing fraction."""
    _require(sample)
    ratio = np.abs(sample.values) / (np.abs(np.log(sample.absc)) + 1.0)
    i = int(np.argmax(ratio))
    return float(ratio[i]), i


# -- grid summaries -------------------------------------------------------------------------

@dataclass
class GridRow:
    X: float
    size: int
    mean: float
    variance: float
    second_moment: float
    ks: float
    ks_centered: float
    bound_ratio: float


@dataclass
class StatsSummary:
    rows: list[GridRow]
    C_fit: float
    D_fit: float
    r_squared: float
    window_slopes: tuple[float, float]
    normalization_C: float
    divisor: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return self.rows[-1].mean

    @property
    def variance(self) -> float:
        return self.rows[-1].variance

    @property
    def ks_distance(self) -> float:
        return self.rows[-1].ks

    @property
    def size(self) -> int:
        return self.rows[-1].size

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window_slopes"] = list(self.window_slopes)
        return d

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["X", "size", "mean", "variance", "second_moment", "ks", "ks_centered",
                        "bound_ratio"])
            for r in self.rows:
                w.writerow([r.X, r.size, repr(r.mean), repr(r.variance), repr(r.second_moment),
                            repr(r.ks), repr(r.ks_centered), repr(r.bound_ratio)])


def summarize(sample: SymbolSample, X_grid, C: float | None = None) -> StatsSummary:
    """Statistics at every X of the grid; C=None normalizes by the fitted slope."""
    grid = sorted(float(x) for x in X_grid)
    subs = [sample.restrict(X) for X in grid]
    for X, s in zip(grid, subs):
        if len(s) == 0:
            raise EmptySampleError(f"no fractions with |c| < {X} in class {sample.divisor or '?'}")
    mv = [moments(s) for s in subs]
    variances = [v for _, v in mv]
    C_fit, D_fit, r2 = variance_regression(grid, variances)
    C_norm = C_fit if C is None else C
    rows = []
    for X, s, (m, v) in zip(grid, subs, mv):
        rows.append(GridRow(X, len(s), m, v, second_moment(s), ks_test(s, C_norm, X),
                            ks_test(s, C_norm, X, center=True), bound_diagnostic(s)[0]))
    return StatsSummary(rows, C_fit, D_fit, r2, windowed_slopes(grid, variances), C_norm,
                        sample.divisor)


def histogram_rows(sample: SymbolSample, C: float, X: float, bins: int = 60):
    """(left edge, right edge, empirical density, normal density) of normalized symbols."""
    z = normalize(sample, C, X)
    hist, edges = np.histogram(z, bins=bins, range=(-4, 4), density=True)
    mid = 0.5 * (edges[:-1] + edges[1:])
    normal = np.exp(-0.5 * mid * mid) / math.sqrt(2 * math.pi)
    return list(zip(edges[:-1].tolist(), edges[1:].tolist(), hist.tolist(), normal.tolist()))
