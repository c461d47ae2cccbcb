"""Modified Bessel functions K0, K1 and a few related real special functions.

K0 and K1 use the ascending series with the logarithmic term for x <= 2 and
Steed's continued fraction (Temme's CF2) above.  Both branches run element by
element in a compiled kernel; scalar input returns a Python float.
"""
from __future__ import annotations

import math

import numba
import numpy as np

EULER_GAMMA = 0.57721566490153286061
SERIES_CUTOFF = 2.0
# exp(-x) underflows shortly after this; K0, K1 return 0 beyond it
UNDERFLOW_X = 745.0

_SERIES_TERMS = 24
# (lower edge of x range, CF2 iterations reaching full double precision there)
_CF_SCHEDULE = ((2.0, 84), (3.0, 61), (5.0, 42), (10.0, 27), (20.0, 19), (40.0, 15), (100.0, 12))


class DomainError(ValueError):
    pass


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("K-Bessel functions need x > 0")
    return arr


@numba.njit(cache=True)
def _series(x: float):
    """K0, K1 from the ascending series (accurate for 0 < x <= 2)."""
    q = 0.25 * x * x
    lg = math.log(0.5 * x)
    # running terms t_k = q^k / (k!)^2 and u_k = q^k / (k! (k+1)!)
    t = 1.0
    u = 1.0
    i0 = i1s = s0 = s1 = 0.0
    h = 0.0  # harmonic number H_k
    for k in range(_SERIES_TERMS):
        if k:
            h += 1.0 / k
            t = t * q / (k * k)
            u = u * q / (k * (k + 1))
        i0 += t
        i1s += u
        s0 += t * h
        # psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
        s1 += u * (2.0 * h + 1.0 / (k + 1) - 2.0 * EULER_GAMMA)
    k0 = -(lg + EULER_GAMMA) * i0 + s0
    i1 = 0.5 * x * i1s
    k1 = 1.0 / x + lg * i1 - 0.25 * x * s1
    return k0, k1


@numba.njit(cache=True)
def _steed(x: float, iterations: int):
    """K0, K1 by Steed's method for the continued fraction CF2 (x >= 2).

    Runs a fixed number of iterations taken from ``_CF_SCHEDULE``; extra
    iterations only add terms below rounding level.
    """
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, iterations):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        s += q * delh
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


_EDGES = np.array([e for e, _ in _CF_SCHEDULE] + [UNDERFLOW_X])
_ITERS = np.array([n for _, n in _CF_SCHEDULE])


@numba.njit(cache=True)
def _k01_kernel(x, edges, iters, k0, k1):
    for j in range(x.size):
        v = x[j]
        if v <= SERIES_CUTOFF:
            k0[j], k1[j] = _series(v)
        elif v < UNDERFLOW_X:
            i = 0
            while v >= edges[i + 1]:
                i += 1
            k0[j], k1[j] = _steed(v, iters[i])
        else:
            k0[j] = 0.0
            k1[j] = 0.0


def bessel_k01(x):
    """Return (K0(x), K1(x)) for x > 0 (scalar or array)."""
    scalar = np.ndim(x) == 0
    arr = np.atleast_1d(_as_array(x))
    flat = np.ascontiguousarray(arr).ravel()
    k0 = np.empty_like(flat)
    k1 = np.empty_like(flat)
    _k01_kernel(flat, _EDGES, _ITERS, k0, k1)
    if scalar:
        return float(k0[0]), float(k1[0])
    return k0.reshape(arr.shape), k1.reshape(arr.shape)


def bessel_K0(x):
    return bessel_k01(x)[0]


def bessel_K1(x):
    return bessel_k01(x)[1]


def tail_integral(a, Y):
    """Closed form of the integral of y*K0(a*y) over [Y, inf): (Y/a) * K1(a*Y)."""
    a_arr = np.asarray(a, dtype=float)
    Y_arr = np.asarray(Y, dtype=float)
    if np.any(~(a_arr > 0)) or np.any(~(Y_arr > 0)):
        raise DomainError("tail_integral needs a > 0 and Y > 0")
    out = Y_arr / a_arr * bessel_K1(a_arr * Y_arr)
    return float(out) if np.ndim(out) == 0 else out


def gamma_real(s: float) -> float:
    """Gamma on the real axis (poles at the non-positive integers raise)."""
    if s <= 0 and float(s).is_integer():
        raise DomainError(f"Gamma has a pole at s={s}")
    return math.gamma(s)
