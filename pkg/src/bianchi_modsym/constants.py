"""Covolumes, the index of Gamma_0(n), the Petersson norm and the variance constant C_F."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .coeffs import FormSpec
from .hyperbolic import UnsupportedLevelError
from .modsym import Residues, a_scale
from .quadfield import FieldParams, QuadInt, UnsupportedFieldError, factor, is_squarefree, zeta_K2
from .special import bessel_k01

# Fourier terms are dropped once a |alpha| y exceeds this (K0, K1 < 1e-15 there)
FOURIER_CUTOFF = 36.0
FINE_MESH = (12, 24)
COARSE_MESH = (8, 16)


class QuadratureError(RuntimeError):
    pass


# -- covolume and index ------------------------------------------------------------------

def covolume(fld: FieldParams, variant: str = "literature") -> float:
    """vol(PSL2(O_K) \\ H^3).

    "literature" is Humbert's |d_K|^{3/2} zeta_K(2) / (4 pi^2); "dk_squared" replaces
    the exponent 3/2 by 2.  The two differ by the factor |d_K|^{1/2}.
    """
    z = zeta_K2(fld)
    dk = abs(fld.d_K)
    if variant == "literature":
        return dk ** 1.5 * z / (4 * math.pi ** 2)
    if variant == "dk_squared":
        return dk ** 2 * z / (4 * math.pi ** 2)
    raise ValueError(f"unknown covolume variant {variant!r} (use 'literature' or 'dk_squared')")


def _gauss(m: int):
    return np.polynomial.legendre.leggauss(m)


def _require_gaussian(fld: FieldParams) -> None:
    if fld.d != -1:
        raise UnsupportedFieldError(
            f"fundamental-domain quadrature is only implemented for d=-1, got d={fld.d}")


def fundamental_domain_volume(fld: FieldParams, order: int = 40) -> float:
    """Hyperbolic volume of {|Re z| <= 1/2, 0 <= Im z <= 1/2, |z|^2 + y^2 >= 1}.

    This is a fundamental domain of PSL2(Z[i]).  Integrating dy / y^3 from
    sqrt(1 - |z|^2) leaves the smooth area integral of 1 / (2 (1 - |z|^2)).
    """
    _require_gaussian(fld)
    g, w = _gauss(order)
    x1, w1 = g / 2, w / 2
    x2, w2 = (g + 1) / 4, w / 4
    r2 = x1[:, None] ** 2 + x2[None, :] ** 2
    return float(np.sum(w1[:, None] * w2[None, :] / (2 * (1 - r2))))


def index_gamma0(n: QuadInt) -> int:
    """[PSL2(O_K) : Gamma_0(n)] = prod over primes p | n of (N(p) + 1)."""
    if n.is_zero():
        raise ValueError("level must be nonzero")
    if n.is_unit():
        return 1
    if not is_squarefree(n):
        raise UnsupportedLevelError(f"level {n} is not squarefree")
    out = 1
    for p, _ in factor(n):
        out *= p.norm() + 1
    return out


# -- Petersson norm --------------------------------------------------------------------

def fundamental_domain_nodes(mesh: tuple[int, int]):
    """Gauss nodes (z, y, weight) for the PSL2(Z[i]) fundamental domain with weight dv.

    In u = 1/y^2 the measure dy / y^3 becomes du / 2 on [0, 1/(1 - |z|^2)].
    """
    m, my = mesh
    g, w = _gauss(m)
    x1, w1 = g / 2, w / 2
    x2, w2 = (g + 1) / 4, w / 4
    gy, wy = _gauss(my)
    Z, Y, W = [], [], []
    for i in range(m):
        for j in range(m):
            u0 = 1.0 / (1.0 - x1[i] ** 2 - x2[j] ** 2)
            u = (gy + 1) / 2 * u0
            Z.append(np.full(my, x1[i] + 1j * x2[j]))
            Y.append(1.0 / np.sqrt(u))
            W.append(w1[i] * w2[j] * wy / 2 * u0 / 2)
    return np.concatenate(Z), np.concatenate(Y), np.concatenate(W)


class _FourierData:
    def __init__(self, form: FormSpec, cache_dir=None):
        table = form.load(cache_dir)
        el = table.elements
        self.fld = form.fld
        self.el = el
        self.alpha = el.a + el.b * self.fld.omega
        self.unorm, self.rank = np.unique(el.norm, return_inverse=True)
        self.umag = np.sqrt(self.unorm.astype(float))
        self.ascale = a_scale(self.fld)
        self.norm_bound = table.norm_bound
        self.sqrt_dK = complex(0, self.fld.sqrt_abs_dK)

    def prefix(self, y: float) -> int:
        R = FOURIER_CUTOFF / (self.ascale * y)
        if R * R > self.norm_bound:
            raise QuadratureError(
                f"height {y:.3g} needs coefficients up to norm {math.ceil(R * R)}, "
                f"table covers {self.norm_bound}")
        return int(np.searchsorted(self.el.norm, math.floor(R * R), side="right"))


def _coset_sum(fd: _FourierData, z: np.ndarray, y: np.ndarray, pi: QuadInt | None,
               chunk: int = 64) -> np.ndarray:
    """Pointwise norm of F summed over a family of cosets.

    pi=None: the identity coset, f(z, y).  Otherwise the sum over t in O/(pi) of
    f((z + t)/pi, y/|pi|), which is N(pi) * sum over residues r mod (pi) of
    |S_r|^2, S_r running over alpha = r mod (pi) only (orthogonality of the
    additive characters of O/(pi)).
    """
    if pi is None:
        scale, mult, zz, yy = 1.0, 1.0, z, y
        keys_all = np.zeros(len(fd.el.norm), dtype=np.int64)
    else:
        scale = abs(complex(pi))
        mult = float(pi.norm())
        zz, yy = z / complex(pi), y / scale
        res = Residues(pi)
        ur, vr = res.reduce(fd.el.a, fd.el.b)
        keys_all = ur * res.C + vr
    out = np.empty(len(z))
    order = np.argsort(yy)
    for s in range(0, len(z), chunk):
        idx = order[s:s + chunk]
        k = fd.prefix(float(yy[idx].min()))
        if k == 0:
            out[idx] = 0.0
            continue
        ku = int(fd.rank[k - 1]) + 1
        x = np.minimum(fd.ascale * np.outer(yy[idx], fd.umag[:ku]), 700.0)
        k0u, k1u = bessel_k01(x.ravel())
        k0u, k1u = k0u.reshape(x.shape), k1u.reshape(x.shape)
        rank = fd.rank[:k]
        ph = np.exp(2j * np.pi * 2 * np.real(np.outer(zz[idx], fd.alpha[:k]) / fd.sqrt_dK))
        ph *= fd.el.coeff[:k]
        keys = keys_all[:k]
        perm = np.argsort(keys, kind="stable")
        starts = np.flatnonzero(np.r_[True, np.diff(keys[perm]) != 0])
        total = np.zeros(len(idx))
        for kk in (k0u, k1u):
            terms = (kk[:, rank] * ph)[:, perm]
            S = np.add.reduceat(terms, starts, axis=1)
            total += np.sum(np.abs(S) ** 2, axis=1)
        out[idx] = mult * yy[idx] ** 4 * total
    return out


def _coset_families(n: QuadInt) -> list[QuadInt | None]:
    """Coset families covering Gamma_0(n) \\ PSL2(O_K) for a prime level.

    P^1(O/(n)) = {(0:1)} u {(1:t)}.  The identity covers (0:1); the coset of
    [[0,-1],[1,t]] is moved by the Atkin-Lehner element [[0,-1],[n,0]] to
    z -> (z + t)/n, which keeps the evaluation heights above |n|^{-1}/sqrt(2).
    """
    if n.is_unit():
        return [None]
    fac = factor(n)
    if len(fac) != 1 or fac[0][1] != 1:
        raise UnsupportedLevelError(
            f"Petersson quadrature is implemented for prime levels only, got {n}")
    return [None, n]


def petersson_integral(form: FormSpec, mesh=FINE_MESH, cache_dir=None, _fd=None) -> float:
    """Integral over Gamma_0(n)\\H^3 of 2|F_0|^2 + |F_1|^2 + 2|F_2|^2 on one mesh."""
    _require_gaussian(form.fld)
    fd = _fd or _FourierData(form, cache_dir)
    z, y, w = fundamental_domain_nodes(mesh)
    total = 0.0
    for pi in _coset_families(form.level):
        total += float(np.sum(w * _coset_sum(fd, z, y, pi)))
    return total


def petersson_norm(form: FormSpec, fine=FINE_MESH, coarse=COARSE_MESH,
                   cache_dir=None) -> tuple[float, float]:
    """(estimate, error): the fine-mesh value and its distance to the coarse one."""
    _require_gaussian(form.fld)
    fd = _FourierData(form, cache_dir)
    hi = petersson_integral(form, fine, _fd=fd)
    lo = petersson_integral(form, coarse, _fd=fd)
    if not hi > 0:
        raise QuadratureError(f"non-positive Petersson estimate {hi}")
    err = abs(hi - lo)
    if err > 0.05 * hi:
        raise QuadratureError(f"Petersson quadrature not converged: {lo} vs {hi}")
    return hi, err


# -- C_F --------------------------------------------------------------------------------

@dataclass
class ConstantsReport:
    field: int
    level: str
    zeta_K2: float
    covolume_literature: float
    covolume_dk_squared: float
    fundamental_domain_volume: float | None
    covolume_variant: str
    index: int
    petersson_norm: float
    petersson_error: float
    C_F: float
    C_F_from_measured_volume: float | None
    alternative_assemblies: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def c_f_from(norm_sq: float, vol: float, index: int, numerator: float = 2.0) -> float:
    """C = numerator * ||F||^2 / (vol * index).

    numerator = 2 comes from the first-order shift 4 pi^2 eps^2 ||F||^2 / vol of
    the bottom eigenvalue of the twisted Laplacian, with lambda = s(2 - s).
    """
    if not (norm_sq > 0 and vol > 0 and index > 0):
        raise ValueError("C_F needs a positive norm, volume and index")
    return numerator * norm_sq / (vol * index)


def alternative_c_f_variants(norm_sq: float, fld: FieldParams, index: int) -> dict:
    """The alternative assemblies kept for comparison in reports."""
    z = zeta_K2(fld)
    dk = abs(fld.d_K)
    return {
        "4pi2_norm_over_dK2_zeta_index": 4 * math.pi ** 2 * norm_sq / (dk ** 2 * z * index),
        "4_norm_over_dk2_vol": c_f_from(norm_sq, covolume(fld, "dk_squared"), index, 4.0),
        "4_norm_over_literature_vol": c_f_from(norm_sq, covolume(fld, "literature"), index, 4.0),
        "2_norm_over_dk2_vol": c_f_from(norm_sq, covolume(fld, "dk_squared"), index, 2.0),
    }


def select_covolume_variant(fld: FieldParams, tol: float = 0.01) -> str:
    """The variant that matches the fundamental-domain oracle to within `tol`.

    Without an oracle (d != -1) the literature value is used.
    """
    if fld.d != -1:
        return "literature"
    measured = fundamental_domain_volume(fld)
    for variant in ("literature", "dk_squared"):
        if abs(covolume(fld, variant) - measured) <= tol * measured:
            return variant
    raise QuadratureError(f"no covolume variant matches the measured volume {measured}")


def c_f(form: FormSpec, norm: tuple[float, float] | None = None, cache_dir=None) -> ConstantsReport:
    fld = form.fld
    norm_sq, norm_err = norm if norm is not None else petersson_norm(form, cache_dir=cache_dir)
    idx = index_gamma0(form.level)
    variant = select_covolume_variant(fld)
    vol = covolume(fld, variant)
    measured = fundamental_domain_volume(fld) if fld.d == -1 else None
    return ConstantsReport(
        field=fld.d, level=str(form.level), zeta_K2=zeta_K2(fld),
        covolume_literature=covolume(fld, "literature"), covolume_dk_squared=covolume(fld, "dk_squared"),
        fundamental_domain_volume=measured, covolume_variant=variant, index=idx,
        petersson_norm=norm_sq, petersson_error=norm_err,
        C_F=c_f_from(norm_sq, vol, idx), C_F_from_measured_volume=None if measured is None else c_f_from(norm_sq, measured, idx),
        alternative_assemblies=alternative_c_f_variants(norm_sq, fld, idx))
