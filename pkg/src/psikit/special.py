"""Complex gamma-family functions and vector shorthand.

All scalar routines take and return Python ``complex``.  A parameter vector is
any sequence of numbers; :func:`as_vec` normalises it to a tuple of complex.
Products over an empty vector are 1 and sums are 0.

``log_gamma`` and ``gamma_ratio`` do their arithmetic in numpy ``longdouble``
internally and round once at the end, which keeps ``exp(log_gamma(z))``
within a few double ulps of Gamma(z) even when ``|log Gamma(z)|`` is several
hundred.
"""

from __future__ import annotations

import cmath
import math
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from .errors import PoleError

Number = Union[complex, float, int]
ParamVec = Tuple[complex, ...]

EPS_POLE = 1e-8

_LD = np.longdouble
_CLD = np.clongdouble
_PI_LD = _LD("3.14159265358979323846264338327950288")
_LOG_PI_LD = _LD("1.14472988584940017414342735135305871")
_HALF_LOG_2PI_LD = _LD("0.918938533204672741780329736405617640")
_TWO_PI = 2.0 * math.pi

# B_{2k} / (2k (2k-1)) for k = 1..8 (Stirling series through B_16)
_STIRLING = [
    _LD(1) / 12,
    _LD(-1) / 360,
    _LD(1) / 1260,
    _LD(-1) / 1680,
    _LD(1) / 1188,
    _LD(-691) / 360360,
    _LD(1) / 156,
    _LD(-3617) / 122400,
]
_SHIFT_TARGET = 10.0
_POCH_DIRECT_MAX = 64


def as_vec(v: Union[Iterable[Number], Number, None]) -> ParamVec:
    """Normalise ``v`` to a tuple of complex; scalars become 1-vectors."""
    if v is None:
        return ()
    if isinstance(v, (int, float, complex, np.number)):
        return (complex(v),)
    return tuple(complex(x) for x in v)


def distance_to_integer(z: Number) -> float:
    z = complex(z)
    return abs(z - round(z.real))


def is_nonpositive_integer(z: Number, eps: float = EPS_POLE) -> bool:
    z = complex(z)
    n = round(z.real)
    return n <= 0 and abs(z - n) < eps


# ---------------------------------------------------------------------------
# trigonometric helpers


def sin_pi(z: Number) -> complex:
    """sin(pi z) with the integer part of Re z reduced away first."""
    z = complex(z)
    n = round(z.real)
    r = z - n
    s = cmath.sin(math.pi * r)
    return -s if n % 2 else s


def cos_pi(z: Number) -> complex:
    z = complex(z)
    n = round(z.real)
    r = z - n
    c = cmath.cos(math.pi * r)
    return -c if n % 2 else c


def cot_pi(z: Number, eps_pole: float = EPS_POLE) -> complex:
    """cot(pi z); raises PoleError within ``eps_pole`` of an integer."""
    z = complex(z)
    n = round(z.real)
    r = z - n
    if abs(r) < eps_pole:
        raise PoleError(f"cot(pi z) has a pole at z={z}", z)
    if abs(r.real) >= 0.25:
        # cot x = tan(pi/2 - x); exact zero at r = 1/2
        c = 0.5 if r.real >= 0 else -0.5
        return cmath.tan(math.pi * (c - r))
    return 1.0 / cmath.tan(math.pi * r)


# ---------------------------------------------------------------------------
# log-gamma


def _stirling_ld(w):
    """Stirling series for log Gamma(w), Re w >= 10, in longdouble."""
    lw = np.log(w)
    inv = 1 / w
    inv2 = inv * inv
    acc = _CLD(0)
    powk = inv
    for c in _STIRLING:
        acc = acc + c * powk
        powk = powk * inv2
    return (w - _LD(0.5)) * lw - w + _HALF_LOG_2PI_LD + acc


def _log_gamma_right_ld(z: complex):
    """Principal log Gamma for Re z >= 0.5 via upward shift."""
    zl = _CLD(z)
    n = max(0, math.ceil(_SHIFT_TARGET - z.real))
    acc = _CLD(0)
    for k in range(n):
        acc = acc + np.log(zl + k)
    return _stirling_ld(zl + n) - acc


def _principal_imag(z: complex) -> float:
    """Im of the principal log Gamma for Im z != 0, by the shift formula."""
    n = max(0, math.ceil(_SHIFT_TARGET - z.real))
    arg = 0.0
    for k in range(n):
        w = z + k
        arg += math.atan2(w.imag, w.real)
    return float(_stirling_ld(_CLD(z + n)).imag) - arg


def _log_gamma_ld(z: complex, eps_pole: float):
    if is_nonpositive_integer(z, eps_pole):
        raise PoleError(f"Gamma has a pole at z={z}", z)
    if z.real >= 0.5:
        return _log_gamma_right_ld(z)
    # reflection: log G(z) = log pi - log sin(pi z) - log G(1 - z)
    n = round(z.real)
    r = _CLD(z - n)
    s = np.sin(_PI_LD * r)
    if n % 2:
        s = -s
    val = _LOG_PI_LD - np.log(s) - _log_gamma_right_ld(1 - z)
    if z.imag == 0.0:
        # on the cut: real log|Gamma| plus i*pi where Gamma < 0
        neg = float(s.real) < 0
        return _CLD(complex(float(val.real), math.pi if neg else 0.0))
    target = _principal_imag(z)
    k = round((target - float(val.imag)) / _TWO_PI)
    if k:
        val = val + _CLD(complex(0.0, _TWO_PI * k))
    return val


def log_gamma(z: Number, eps_pole: float = EPS_POLE) -> complex:
    """Principal-branch log Gamma(z).

    On the negative real axis (the branch cut) the imaginary part is 0 or pi
    so that ``exp`` still reproduces the sign of Gamma.
    """
    return complex(_log_gamma_ld(complex(z), eps_pole))


def gamma(z: Number, eps_pole: float = EPS_POLE) -> complex:
    return complex(np.exp(_log_gamma_ld(complex(z), eps_pole)))


# B_{2k} / (2k) for k = 1..8, as numerator / denominator
_DIGAMMA_ASYM_LD = [_LD(c) for c in ("1", "-1", "1", "-1", "1", "-691", "1", "-3617")]
_DIGAMMA_ASYM_DEN = [_LD(c) for c in ("12", "120", "252", "240", "132", "32760", "12", "8160")]


def _cot_pi_ld(z: complex):
    n = round(z.real)
    r = _CLD(z - n)
    return np.cos(_PI_LD * r) / np.sin(_PI_LD * r)


def _digamma_ld(z: complex, eps_pole: float):
    if is_nonpositive_integer(z, eps_pole):
        raise PoleError(f"digamma has a pole at z={z}", z)
    if z.real < 0.5:
        # psi(z) = psi(1 - z) - pi cot(pi z)
        return _digamma_ld(1 - z, eps_pole) - _PI_LD * _cot_pi_ld(z)
    zl = _CLD(z)
    acc = _CLD(0)
    while zl.real < _SHIFT_TARGET:
        acc = acc - 1 / zl
        zl = zl + 1
    inv2 = 1 / (zl * zl)
    tail = _CLD(0)
    powk = inv2
    for c, dn in zip(_DIGAMMA_ASYM_LD, _DIGAMMA_ASYM_DEN):
        tail = tail + c / dn * powk
        powk = powk * inv2
    return acc + np.log(zl) - _LD(0.5) / zl - tail


def digamma(z: Number, eps_pole: float = EPS_POLE) -> complex:
    """psi(z) = Gamma'(z)/Gamma(z), accumulated in longdouble."""
    return complex(_digamma_ld(complex(z), eps_pole))


def digamma_ld(z: Number, eps_pole: float = EPS_POLE):
    """digamma() without the final rounding to double."""
    return _digamma_ld(complex(z), eps_pole)


def psi_over_gamma_neg_int(n: int) -> float:
    """Limit of psi(z)/Gamma(z) at z = -n, which equals (-1)^(n+1) n!."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return float((-1) ** (n + 1) * math.factorial(n))


def pochhammer(a: Number, k: int) -> complex:
    """Rising factorial (a)_k = a (a+1) ... (a+k-1)."""
    a = complex(a)
    if k < 0:
        raise ValueError("k must be non-negative")
    if is_nonpositive_integer(a, 0.0) and -a.real < k:
        return 0j
    if k <= _POCH_DIRECT_MAX or is_nonpositive_integer(a, EPS_POLE):
        acc = 1 + 0j
        for j in range(k):
            acc *= a + j
        return acc
    return complex(np.exp(_log_gamma_ld(a + k, EPS_POLE) - _log_gamma_ld(a, EPS_POLE)))


# ---------------------------------------------------------------------------
# vector shorthand


def vec_gamma(v: Iterable[Number], eps_pole: float = EPS_POLE) -> complex:
    """log of prod Gamma(v_i), as a sum of principal logs."""
    acc = _CLD(0)
    for x in as_vec(v):
        acc = acc + _log_gamma_ld(x, eps_pole)
    return complex(acc)


def vec_pochhammer(v: Iterable[Number], k: int) -> complex:
    acc = 1 + 0j
    for x in as_vec(v):
        acc *= pochhammer(x, k)
    return acc


def vec_sin_pi(v: Iterable[Number]) -> complex:
    acc = 1 + 0j
    for x in as_vec(v):
        acc *= sin_pi(x)
    return acc


def vec_shift(v: Iterable[Number], beta: Number) -> ParamVec:
    beta = complex(beta)
    return tuple(x + beta for x in as_vec(v))


def vec_one_minus(v: Iterable[Number]) -> ParamVec:
    return tuple(1 - x for x in as_vec(v))


def vec_drop(v: Sequence[Number], k: int) -> ParamVec:
    """Remove entry ``k`` (1-based), keeping the order of the rest."""
    v = as_vec(v)
    if not 1 <= k <= len(v):
        raise IndexError(f"index {k} out of range for vector of length {len(v)}")
    return v[: k - 1] + v[k:]


def _flatten(groups) -> list:
    out = []
    for g in groups:
        out.extend(as_vec(g))
    return out


def gamma_ratio(num, den, eps_pole: float = EPS_POLE) -> complex:
    """prod Gamma(num entries) / prod Gamma(den entries).

    ``num`` and ``den`` are lists of vectors (scalars are accepted too).  Logs
    are summed without reducing the phase and exponentiated once.
    """
    acc = _CLD(0)
    for x in _flatten(num):
        acc = acc + _log_gamma_ld(x, eps_pole)
    for x in _flatten(den):
        try:
            acc = acc - _log_gamma_ld(x, eps_pole)
        except PoleError as exc:
            raise PoleError(f"denominator Gamma has a pole at {x}", x) from exc
    return complex(np.exp(acc))
