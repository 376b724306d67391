"""The identity catalogue.

Each identity is a (check, lhs, rhs) triple.  ``check`` enforces the
hypotheses of the underlying theorem and raises :class:`ConstraintError`
naming the first violated one; ``lhs`` and ``rhs`` take a case and a backend
and return one number each.  Formulas are written once against the backend
interface in :mod:`psikit.backends`, so the same code runs in double
precision (the series engine) and at 30+ digits (the mpmath oracle).

Vector conventions follow the usual shorthand: ``G([u, v], [w])`` is
``Gamma(u) Gamma(v) / Gamma(w)`` with vectors expanded entrywise,
``prod(v)`` is ``(v)_1``, and ``v[k]`` dropped from ``v`` is ``v_[k]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import series, special
from .backends import DoubleBackend, ExtendedBackend
from .errors import ConstraintError
from .series import DELTA_CONV, Sign, TruncationPolicy, as_sign
from .special import EPS_POLE, ParamVec, as_vec

TOL_IDENTITY = 1e-8
TOL_EXTENDED = 1e-20
NEAR_POLE_WARN = 1e-6


class IdentityId(str, Enum):
    FINAL_MAX_PLUS = "final_max_plus"
    FINAL_MAX_MINUS = "final_max_minus"
    FINAL_MIN = "final_min"
    FIRST_M = "first_m"
    SECOND_M = "second_m"
    FINAL_PLUS = "final_plus"
    FMULTITERM = "fmultiterm"
    THIRD = "third"
    ALT_MAX = "alt_max"
    NO_PSI = "no_psi"
    MMTRICK = "mmtrick"
    CKP_52 = "ckp_52"
    CKP_51 = "ckp_51"
    CKP_TH51 = "ckp_th51"
    GRADIENT_FORM = "gradient_form"
    KDF_FORM = "kdf_form"

    @classmethod
    def parse(cls, text) -> "IdentityId":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise ValueError(f"unknown identity {text!r}")


@dataclass(frozen=True)
class IdentityCase:
    """One parameter point for one identity.

    Vectors that an identity does not use stay empty.  The meaning of
    ``p`` (see :attr:`p`) follows the identity's own statement.  For
    CKP_52 the vector called w lives in ``a``.
    """

    id: IdentityId
    a: ParamVec = ()
    b: ParamVec = ()
    c: ParamVec = ()
    d: ParamVec = ()
    m: int = 0
    n: int = 0
    s: int = 0
    sign: Sign = Sign.PLUS

    def __post_init__(self):
        object.__setattr__(self, "id", IdentityId.parse(self.id))
        for name in "abcd":
            object.__setattr__(self, name, as_vec(getattr(self, name)))
        object.__setattr__(self, "sign", as_sign(self.sign))
        for name in ("m", "n", "s"):
            v = getattr(self, name)
            if int(v) != v:
                raise ValueError(f"{name} must be an integer")
            object.__setattr__(self, name, int(v))

    @property
    def p(self) -> int:
        i = self.id
        if i in (IdentityId.FIRST_M, IdentityId.SECOND_M, IdentityId.FMULTITERM, IdentityId.CKP_52):
            return len(self.d) + 1 if i != IdentityId.CKP_52 else len(self.b) - 1
        if i == IdentityId.FINAL_PLUS:
            return len(self.c)
        if i == IdentityId.MMTRICK:
            return len(self.d) + 1
        if i == IdentityId.CKP_51:
            return len(self.b)
        if i == IdentityId.CKP_TH51:
            return len(self.a) + len(self.c)
        return len(self.a)


@dataclass
class VerificationReport:
    lhs: complex
    rhs: complex
    residual: float
    passed: bool
    diagnostics: List[str] = field(default_factory=list)
    terms_lhs: int = 0
    terms_rhs: int = 0
    tol: float = TOL_IDENTITY

    @property
    def pass_(self) -> bool:
        return self.passed


def residual(lhs, rhs) -> float:
    """|lhs - rhs| / (1 + max(|lhs|, |rhs|))."""
    l, r = abs(lhs), abs(rhs)
    return float(abs(lhs - rhs) / (1 + max(l, r)))


# ---------------------------------------------------------------------------
# vector helpers (backend-agnostic arithmetic on tuples)


def _add(v, s):
    return tuple(x + s for x in v)


def _rsub(s, v):
    return tuple(s - x for x in v)


def _drop(v, k):
    return v[:k] + v[k + 1 :]


def _cot_sum(B, v):
    out = B.num(0)
    for x in v:
        out += B.cot(x)
    return out


# ---------------------------------------------------------------------------
# hypothesis checks


def _frac_dist(x) -> float:
    return special.distance_to_integer(complex(x))


def _need_len(case, name, want):
    got = len(getattr(case, name))
    if got != want:
        raise ConstraintError(
            f"{case.id.value}: vector {name} must have length {want}, got {got}",
            f"len({name}) = {want}",
        )


def _need_min_len(case, name, want):
    got = len(getattr(case, name))
    if got < want:
        raise ConstraintError(
            f"{case.id.value}: vector {name} must have length at least {want}, got {got}",
            f"len({name}) >= {want}",
        )


def _need_noninteger(case, name, v=None):
    v = getattr(case, name) if v is None else v
    for x in v:
        if _frac_dist(x) < EPS_POLE:
            raise ConstraintError(
                f"{case.id.value}: entry {complex(x)} of {name} must not be an integer",
                f"{name} in (C \\ Z)",
            )


def _need_distinct(case, name, v=None):
    v = getattr(case, name) if v is None else v
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            if _frac_dist(v[i] - v[j]) < EPS_POLE:
                raise ConstraintError(
                    f"{case.id.value}: entries {complex(v[i])} and {complex(v[j])} of {name} "
                    "must differ modulo integers",
                    f"{name} distinct mod Z",
                )


def _need_excess(case, value, bound, label):
    if not value > bound:
        raise ConstraintError(
            f"{case.id.value}: convergence requires {label} > {bound:g}, got {value:.6g}",
            f"{label} > {bound:g}",
        )


def _need_off_poles(case, values, label):
    for x in values:
        if special.is_nonpositive_integer(x, EPS_POLE):
            raise ConstraintError(
                f"{case.id.value}: {label} hits the Gamma pole at {complex(x)}", label
            )


def _excess(top, bottom) -> float:
    return (sum(bottom, 0j) - sum(top, 0j)).real


def _bound(sign) -> float:
    return DELTA_CONV if int(sign) > 0 else DELTA_CONV - 1


def _check_max_shape(case, sign):
    p = len(case.a)
    if p < 1:
        raise ConstraintError(f"{case.id.value}: a must be non-empty", "p >= 1")
    _need_len(case, "b", p - 1)
    _need_noninteger(case, "a")
    _need_noninteger(case, "b")
    _need_distinct(case, "b")
    _need_excess(case, _excess(case.a, case.b), _bound(sign), "Re(sum b - sum a)")


# ---------------------------------------------------------------------------
# Factor multiplying the b_k correction of the combined +-1 formula.  The
# printed display has [cos(pi b_k)]^(1 or 0); numerically the "+" case needs
# -cos(pi b_k) (which is also what the separately derived z=+1 formula
# gives) and the "-" case needs 1.

B_CORRECTION_FACTOR = {Sign.PLUS: lambda B, x: -B.cos(x), Sign.MINUS: lambda B, x: B.num(1)}


def _lhs_dseries_over_pi(case, B):
    a, b = B.vec(case.a), B.vec(case.b)
    return B.dseries(a, b, _sign_of(case)) / B.pi


def _sign_of(case) -> int:
    i = case.id
    if i == IdentityId.FINAL_MAX_PLUS or i == IdentityId.FINAL_MIN or i == IdentityId.NO_PSI:
        return 1
    if i in (IdentityId.FINAL_MAX_MINUS, IdentityId.ALT_MAX):
        return -1
    if i == IdentityId.THIRD:
        return (-1) ** (case.s - case.n)
    if i == IdentityId.CKP_TH51:
        return _th51_sign(case)
    if i in (IdentityId.GRADIENT_FORM, IdentityId.KDF_FORM):
        return int(case.sign)
    return 1


def effective_sign(case: IdentityCase) -> int:
    """The argument (+1 or -1) of the series in ``case``."""
    return _sign_of(case)


def _pochratio_term(B, a, b, z):
    """(1-b)_1 / (1-a)_1 * F(1, 1, 2-b; 2-a; z)."""
    return B.prod(_rsub(1, b)) / B.prod(_rsub(1, a)) * B.F((1, 1) + _rsub(2, b), _rsub(2, a), z)


def _b_correction(B, a, b, z, weight):
    """sum_k weight(b_k) G(1-a, b_k-1, b_k-b_[k]) / G(1-b, b_k-a) F(1-b_k+a; 2-b_k, 1-b_k+b_[k]; z)."""
    total = B.num(0)
    for k, bk in enumerate(b):
        br = _drop(b, k)
        g = B.G([_rsub(1, a), bk - 1, _rsub(bk, br)], [_rsub(1, b), _rsub(bk, a)])
        w = weight(bk) * g
        f = B.F(_add(a, 1 - bk), (2 - bk,) + _add(br, 1 - bk), z, scale=abs(w))
        total += w * f
    return total


def _a_correction(B, a, b, z):
    """sum_k G(b, a_k, a_[k]-a_k) / (sin(pi a_k) G(a, b-a_k)) F(a_k, 1-b+a_k; 1-a_[k]+a_k; z)."""
    total = B.num(0)
    for k, ak in enumerate(a):
        ar = _drop(a, k)
        g = B.G([b, ak, _add(ar, -ak)], [a, _add(b, -ak)])
        w = g / B.sin(ak)
        f = B.F((ak,) + tuple(1 - x + ak for x in b), tuple(1 - x + ak for x in ar), z, scale=abs(w))
        total += w * f
    return total


# FINAL_MAX (both signs)


def _check_final_max(case):
    _check_max_shape(case, _sign_of(case))


def _rhs_final_max(case, B):
    a, b = B.vec(case.a), B.vec(case.b)
    z = _sign_of(case)
    factor = B_CORRECTION_FACTOR[Sign(z)]
    t1 = (_cot_sum(B, a) - _cot_sum(B, b)) * B.F(a, b, z)
    t2 = -z * _pochratio_term(B, a, b, z) / B.pi
    t3 = _b_correction(B, a, b, z, lambda bk: factor(B, bk) / B.sin(bk))
    return t1 + t2 + t3


# FINAL_MIN


def _check_final_min(case):
    _check_max_shape(case, 1)
    _need_distinct(case, "a")


def _lhs_final_min(case, B):
    return B.dseries(B.vec(case.a), B.vec(case.b), 1)


def _rhs_final_min(case, B):
    a, b = B.vec(case.a), B.vec(case.b)
    return B.pi * _a_correction(B, a, b, 1) - _pochratio_term(B, a, b, 1)


# FIRST_M / SECOND_M


def _check_m_shape(case):
    _need_min_len(case, "d", 1)
    _need_len(case, "c", len(case.d) + 2)
    if case.m < 0:
        raise ConstraintError(f"{case.id.value}: m must be non-negative", "m >= 0")
    _need_noninteger(case, "c")
    _need_noninteger(case, "d")
    _need_distinct(case, "d")
    _need_excess(case, _excess(case.c, case.d), DELTA_CONV - case.m - 1, "Re(sum d - sum c)")


def _check_first_m(case):
    _check_m_shape(case)


def _check_second_m(case):
    _check_m_shape(case)
    c, d = case.c, case.d
    c1, d1 = c[0], d[0]
    _need_off_poles(case, [c1, d1] + [1 - x + c1 for x in d[1:]], "Gamma(c1) Gamma(d1) Gamma(1-d_[1]+c1)")
    for x in d[1:]:
        if _frac_dist(x - c1) < EPS_POLE:
            raise ConstraintError(
                f"{case.id.value}: sin(pi(d_k - c1)) vanishes for d_k={complex(x)}",
                "d_k - c1 not an integer",
            )


def _lhs_m(case, B):
    return B.dseries_m(B.vec(case.c), B.vec(case.d), case.m)


def _mm_term(B, c, d, m):
    """(1-d)_1 / ((1-c)_1 (m-1)!) F(1-m, 2-d, 1, 1; 2-c); zero for m = 0."""
    if m == 0:
        return B.num(0)
    f = B.F((1 - m,) + _rsub(2, d) + (1, 1), _rsub(2, c), 1)
    return B.prod(_rsub(1, d)) / (B.prod(_rsub(1, c)) * B.factorial(m - 1)) * f


def _d_term(B, c, d, m, k):
    """G(1-c, d_k-m, d_k, d_k-d_[k]) / G(1-d, d_k-c) / ((d_k-m-1)(d_k-1)) F(1+c-d_k; 2-d_k, 2-d_k+m, 1+d_[k]-d_k)."""
    dk = d[k]
    dr = _drop(d, k)
    g = B.G([_rsub(1, c), dk - m, dk, _rsub(dk, dr)], [_rsub(1, d), _rsub(dk, c)])
    w = g / ((dk - m - 1) * (dk - 1))
    return w * B.F(_add(c, 1 - dk), (2 - dk, 2 - dk + m) + _add(dr, 1 - dk), 1, scale=abs(w))


def _rhs_first_m(case, B):
    c, d, m = B.vec(case.c), B.vec(case.d), case.m
    t1 = B.pi / B.factorial(m) * (_cot_sum(B, c) - _cot_sum(B, d)) * B.F(c, (1 + m,) + d, 1)
    t2 = _mm_term(B, c, d, m)
    t3 = B.num(0)
    for k in range(len(d)):
        t3 += _d_term(B, c, d, m, k)
    return t1 + t2 - (-1) ** m * t3


def _rhs_second_m(case, B):
    c, d, m = B.vec(case.c), B.vec(case.d), case.m
    c1, d1 = c[0], d[0]
    cr, dr = c[1:], d[1:]
    t1 = B.pi / B.factorial(m) * (_cot_sum(B, cr) - _cot_sum(B, dr)) * B.F(c, (1 + m,) + d, 1)
    t2 = _mm_term(B, c, d, m)
    g = B.G([c1, d1, _rsub(1, cr), _add(_rsub(1, dr), c1)], [d1 - c1, _add(_rsub(1, cr), c1), _rsub(1, dr)])
    w = g / B.poch((1 - c1,), m)
    t3 = w * B.F((c1, c1 - m) + _add(_rsub(1, d), c1), _add(_rsub(1, cr), c1), 1, scale=abs(w))
    t4 = B.num(0)
    for k in range(1, len(d)):
        dk = d[k]
        t4 += _d_term(B, c, d, m, k) * B.sin(dk - d1) / B.sin(dk - c1)
    t4 *= (-1) ** m * B.sin(c1) / B.sin(d1)
    return t1 + t2 + t3 - t4


# FINAL_PLUS


def _check_final_plus(case):
    p = len(case.c)
    if p < 1:
        raise ConstraintError(f"{case.id.value}: c must be non-empty", "p >= 1")
    _need_len(case, "d", p - 1)
    _need_noninteger(case, "c")
    _need_noninteger(case, "d")
    _need_distinct(case, "d")
    _need_excess(case, _excess(case.c, case.d), DELTA_CONV, "Re(sum d - sum c)")


def _lhs_final_plus(case, B):
    return B.dseries(B.vec(case.c), B.vec(case.d), 1)


def _rhs_final_plus(case, B):
    c, d = B.vec(case.c), B.vec(case.d)
    t1 = B.pi * (_cot_sum(B, c) - _cot_sum(B, d)) * B.F(c, d, 1)
    t2 = _pochratio_term(B, c, d, 1)
    t3 = _b_correction(B, c, d, 1, lambda dk: B.cot(dk))
    return t1 - t2 - B.pi * t3


# FMULTITERM


def _check_fmultiterm(case):
    _need_min_len(case, "d", 1)
    _need_len(case, "a", len(case.d) + 2)
    if case.m < 1:
        raise ConstraintError(f"{case.id.value}: m must be a positive integer", "m >= 1")
    a1 = case.a[0]
    if not special.is_nonpositive_integer(a1, 1e-12):
        raise ConstraintError(
            f"{case.id.value}: the series must terminate; a1 = {a1} is not a nonpositive integer",
            "hypergeometric series involved finite (a1 in Z<=0)",
        )
    _need_noninteger(case, "d")
    _need_noninteger(case, "a[2:]", case.a[1:])
    _need_distinct(case, "d")
    for x in case.d:
        if _frac_dist(x - a1) < EPS_POLE:
            raise ConstraintError(f"{case.id.value}: d_k - a1 must not be an integer", "d_k - a1 not in Z")


def _lhs_fmultiterm(case, B):
    a, d, m = B.vec(case.a), B.vec(case.d), case.m
    a1, ar = a[0], a[1:]
    t1 = -B.G([_rsub(1, d)], [_rsub(1, a)]) / B.factorial(m) * B.F(a, (1 + m,) + d, 1)
    # sin(pi a1) Gamma(a1) / pi = 1 / Gamma(1 - a1), finite at a1 in Z<=0
    g = B.G([_add(_rsub(1, d), a1)], [1 - a1, 1 - a1 + m, _add(_rsub(1, ar), a1)])
    t2 = g * B.F((a1, a1 - m) + _add(_rsub(1, d), a1), _add(_rsub(1, ar), a1), 1)
    return t1 + t2


def _rhs_fmultiterm(case, B):
    a, d, m = B.vec(case.a), B.vec(case.d), case.m
    a1 = a[0]
    s1 = B.sin(a1)
    if s1 == 0:
        # every term carries sin(pi a1)
        return B.num(0)
    total = B.num(0)
    for k, dk in enumerate(d):
        dr = _drop(d, k)
        g = B.G([dk - m - 1, _rsub(dk, dr)], [2 - dk, _rsub(dk, a)])
        f = B.F(_add(a, 1 - dk), (2 - dk, 2 - dk + m) + _add(dr, 1 - dk), 1)
        total += g * s1 / B.sin(dk - a1) * f
    return (-1) ** m * total


# THIRD / ALT_MAX


def _check_third(case):
    p = len(case.a)
    _check_max_shape(case, (-1) ** (case.s - case.n))
    if not (0 <= case.n <= p):
        raise ConstraintError(f"{case.id.value}: need 0 <= n <= p", "0 <= n <= p")
    if not (0 <= case.s <= p - 1):
        raise ConstraintError(f"{case.id.value}: need 0 <= s <= p-1", "0 <= s <= p-1")
    if case.s - case.n < -2:
        raise ConstraintError(f"{case.id.value}: kappa = s - n must be >= -2", "kappa >= -2")
    a2 = case.a[case.n :]
    _need_distinct(case, "a2", a2)
    _need_distinct(case, "b1", case.b[: case.s])


def _rhs_third(case, B):
    a, b = B.vec(case.a), B.vec(case.b)
    n, s = case.n, case.s
    a1, a2, b1, b2 = a[:n], a[n:], b[:s], b[s:]
    z = (-1) ** (s - n)
    t1 = (_cot_sum(B, a1) - _cot_sum(B, b1)) * B.F(a, b, z)
    t2 = -z * _pochratio_term(B, a, b, z) / B.pi
    t3 = B.num(0)
    for k, ak in enumerate(a2):
        j = n + k
        g = B.G(
            [_rsub(1, a1), b2, ak, _add(_drop(a2, k), -ak), _add(_rsub(1, b1), ak)],
            [_rsub(1, b1), a2, _add(b2, -ak), _add(_rsub(1, a1), ak)],
        )
        w = g / B.sin(ak)
        t3 += w * B.F((ak,) + _add(_rsub(1, b), ak), _add(_rsub(1, _drop(a, j)), ak), z, scale=abs(w))
    t4 = B.num(0)
    for k, bk in enumerate(b1):
        g = B.G(
            [_rsub(1, a1), b2, bk - 1, _rsub(bk, _drop(b1, k)), _add(a2, 1 - bk)],
            [_rsub(1, b1), a2, _rsub(bk, a1), _add(b2, 1 - bk)],
        )
        w = g / B.sin(bk)
        t4 += w * B.F(_add(a, 1 - bk), (2 - bk,) + _add(_drop(b, k), 1 - bk), z, scale=abs(w))
    return t1 + t2 + t3 + t4


def _check_alt_max(case):
    _check_max_shape(case, -1)


def _rhs_alt_max(case, B):
    a, b = B.vec(case.a), B.vec(case.b)
    t1 = (_cot_sum(B, a) - _cot_sum(B, b)) * B.F(a, b, -1)
    t2 = _pochratio_term(B, a, b, -1) / B.pi
    t3 = _b_correction(B, a, b, -1, lambda bk: 1 / B.sin(bk))
    return t1 + t2 + t3


# NO_PSI


def _check_no_psi(case):
    _check_max_shape(case, 1)
    _need_distinct(case, "a")


def _lhs_no_psi(case, B):
    a, b = B.vec(case.a), B.vec(case.b)
    return (_cot_sum(B, a) - _cot_sum(B, b)) * B.F(a, b, 1)


def _rhs_no_psi(case, B):
    a, b = B.vec(case.a), B.vec(case.b)
    return _a_correction(B, a, b, 1) + _b_correction(B, a, b, 1, lambda bk: B.cot(bk))


# MMTRICK


def _check_mmtrick(case):
    if case.m < 1:
        raise ConstraintError(f"{case.id.value}: m must be a positive integer", "m >= 1")
    _need_len(case, "c", len(case.d) + 2)
    m = case.m
    for x in case.c:
        _need_off_poles(case, [1 - x + j for j in range(m)] + [2 - x + j for j in range(m)], "(1-c)_m and (2-c)_j nonzero")
    for x in case.d:
        _need_off_poles(case, [x - m + j for j in range(m)], "(d-m)_k nonzero")


def mmtrick_forms(case, B):
    """The three finite expressions of the m-sum relation, in order."""
    c, d, m = B.vec(case.c), B.vec(case.d), case.m
    lhs = B.num(0)
    for k in range(m):
        lhs += B.factorial(m - k - 1) * B.poch(_add(c, -m), k) / (
            (-1) ** (m - k) * B.poch(_add(d, -m), k) * B.factorial(k)
        )
    lhs *= B.poch(_rsub(1, d), m) / B.poch(_rsub(1, c), m)
    mid = B.num(0)
    for j in range(m):
        mid += (-1) ** (j + 1) * B.poch(_rsub(2, d), j) * B.factorial(j) / (
            B.poch(_rsub(2, c), j) * B.factorial(m - 1 - j)
        )
    mid *= B.prod(_rsub(1, d)) / B.prod(_rsub(1, c))
    rhs = -_mm_term(B, c, d, m)
    return lhs, mid, rhs


def _lhs_mmtrick(case, B):
    return mmtrick_forms(case, B)[0]


def _rhs_mmtrick(case, B):
    return mmtrick_forms(case, B)[2]


# CKP_52 (w stored in case.a)


def _check_ckp_52(case):
    _need_min_len(case, "b", 3)
    _need_len(case, "a", len(case.b))
    _need_distinct(case, "b")
    _need_excess(case, _excess(case.b, case.a) - 1, DELTA_CONV, "Re(sum w - sum b) - 1")
    for k, bk in enumerate(case.b):
        _need_off_poles(case, [x - bk for x in _drop(case.b, k)], "Gamma(b_[k] - b_k)")


def _ckp52_term(B, b, w, k):
    bk = b[k]
    br = _drop(b, k)
    g = B.G([_add(br, -bk)], [_add(w, -bk)])
    return g * B.F(_add(_rsub(1, w), bk), _add(_rsub(1, br), bk), 1, scale=abs(g))


def _lhs_ckp_52(case, B):
    b, w = B.vec(case.b), B.vec(case.a)
    return _ckp52_term(B, b, w, 0) + _ckp52_term(B, b, w, 1)


def _rhs_ckp_52(case, B):
    b, w = B.vec(case.b), B.vec(case.a)
    total = B.num(0)
    for k in range(2, len(b)):
        total += _ckp52_term(B, b, w, k)
    return -total


# CKP_51


def _check_ckp_51(case):
    _need_min_len(case, "b", 2)
    _need_len(case, "a", len(case.b) + 1)
    _need_distinct(case, "a[2:]", case.a[1:])
    _need_excess(case, _excess(case.a, case.b), DELTA_CONV, "Re(sum b - sum a)")
    a = case.a
    _need_off_poles(case, a[1:], "Gamma(a_k)")
    for k in range(1, len(a)):
        _need_off_poles(case, [x - a[k] for x in _drop(a, k)[1:]], "Gamma(a_[1,k] - a_k)")


def _ckp51_term(B, a, b, k):
    ak = a[k]
    ar = _drop(a, k)
    g = B.G([ak, _add(ar[1:], -ak)], [1 - a[0] + ak, _add(b, -ak)])
    return g * B.F((ak,) + _add(_rsub(1, b), ak), _add(_rsub(1, ar), ak), 1, scale=abs(g))


def _lhs_ckp_51(case, B):
    a, b = B.vec(case.a), B.vec(case.b)
    return _ckp51_term(B, a, b, 1) + _ckp51_term(B, a, b, 2)


def _rhs_ckp_51(case, B):
    a, b = B.vec(case.a), B.vec(case.b)
    g = B.G([a[1:]], [1 - a[0], b])
    total = g * B.F(a, b, 1, scale=abs(g))
    for k in range(3, len(a)):
        total -= _ckp51_term(B, a, b, k)
    return total


# CKP_TH51: a (n entries), b (s), c (p-n), d (p-s)


def _th51_sign(case) -> int:
    return (-1) ** (len(case.c) - len(case.b))


def _check_ckp_th51(case):
    n, s = len(case.a), len(case.b)
    p = n + len(case.c)
    if p < 1:
        raise ConstraintError(f"{case.id.value}: p must be positive", "p >= 1")
    if len(case.d) != p - s or s > p:
        raise ConstraintError(f"{case.id.value}: need |b| + |d| = |a| + |c|", "s <= p, |d| = p - s")
    if s + n < p:
        raise ConstraintError(f"{case.id.value}: need s + n >= p", "s + n >= p")
    e = (sum(case.a, 0j) + sum(case.c, 0j) - sum(case.b, 0j) - sum(case.d, 0j)).real
    _need_excess(case, e, DELTA_CONV, "Re(sum a + sum c - sum b - sum d)")
    a, b = case.a, case.b
    for k, bk in enumerate(b):
        _need_off_poles(case, [x - bk for x in _drop(b, k)] + [1 - x + bk for x in a], "numerator Gamma in A_k")
        _need_off_poles(case, [bk], "b_k")
    for k, ak in enumerate(a):
        _need_off_poles(case, [ak - x for x in _drop(a, k)] + [1 + x - ak for x in b], "numerator Gamma in B_k")
        if abs(1 - ak) < EPS_POLE:
            raise ConstraintError(f"{case.id.value}: a_k = 1 makes 1/(1-a_k) infinite", "a_k != 1")
    _need_off_poles(case, [1 - x for x in a] + list(b), "Gamma(1-a) Gamma(b)")


def _lhs_ckp_th51(case, B):
    a, b, c, d = (B.vec(v) for v in (case.a, case.b, case.c, case.d))
    z = _th51_sign(case)
    total = B.num(0)
    for k, bk in enumerate(b):
        br = _drop(b, k)
        A = B.G([_add(br, -bk), _add(_rsub(1, a), bk)], [_add(c, -bk), _add(_rsub(1, d), bk)])
        f = B.F(_add(_rsub(1, a), bk) + _add(_rsub(1, c), bk) + (bk,), _add(_rsub(1, br), bk) + _add(_rsub(1, d), bk) + (bk + 1,), z, scale=abs(A / bk))
        total += A / bk * f
    for k, ak in enumerate(a):
        ar = _drop(a, k)
        Bk = B.G([_rsub(ak, ar), _add(b, 1 - ak)], [_rsub(ak, d), _add(c, 1 - ak)])
        f = B.F(_add(b, 1 - ak) + _add(d, 1 - ak) + (1 - ak,), _add(ar, 1 - ak) + _add(c, 1 - ak) + (2 - ak,), z, scale=abs(Bk / (1 - ak)))
        total += Bk / (1 - ak) * f
    return total


def _rhs_ckp_th51(case, B):
    a, b, c, d = (B.vec(v) for v in (case.a, case.b, case.c, case.d))
    return B.G([_rsub(1, a), b], [c, _rsub(1, d)])


# GRADIENT_FORM / KDF_FORM are dispatched to their own checks in verify()


def _check_rewriting(case):
    _check_max_shape(case, int(case.sign))


@dataclass(frozen=True)
class Identity:
    check: Callable
    lhs: Callable
    rhs: Callable


CATALOGUE: Dict[IdentityId, Identity] = {
    IdentityId.FINAL_MAX_PLUS: Identity(_check_final_max, _lhs_dseries_over_pi, _rhs_final_max),
    IdentityId.FINAL_MAX_MINUS: Identity(_check_final_max, _lhs_dseries_over_pi, _rhs_final_max),
    IdentityId.FINAL_MIN: Identity(_check_final_min, _lhs_final_min, _rhs_final_min),
    IdentityId.FIRST_M: Identity(_check_first_m, _lhs_m, _rhs_first_m),
    IdentityId.SECOND_M: Identity(_check_second_m, _lhs_m, _rhs_second_m),
    IdentityId.FINAL_PLUS: Identity(_check_final_plus, _lhs_final_plus, _rhs_final_plus),
    IdentityId.FMULTITERM: Identity(_check_fmultiterm, _lhs_fmultiterm, _rhs_fmultiterm),
    IdentityId.THIRD: Identity(_check_third, _lhs_dseries_over_pi, _rhs_third),
    IdentityId.ALT_MAX: Identity(_check_alt_max, _lhs_dseries_over_pi, _rhs_alt_max),
    IdentityId.NO_PSI: Identity(_check_no_psi, _lhs_no_psi, _rhs_no_psi),
    IdentityId.MMTRICK: Identity(_check_mmtrick, _lhs_mmtrick, _rhs_mmtrick),
    IdentityId.CKP_52: Identity(_check_ckp_52, _lhs_ckp_52, _rhs_ckp_52),
    IdentityId.CKP_51: Identity(_check_ckp_51, _lhs_ckp_51, _rhs_ckp_51),
    IdentityId.CKP_TH51: Identity(_check_ckp_th51, _lhs_ckp_th51, _rhs_ckp_th51),
}


def check_case(case: IdentityCase) -> None:
    """Raise ConstraintError if ``case`` violates its theorem's hypotheses."""
    if case.id in (IdentityId.GRADIENT_FORM, IdentityId.KDF_FORM):
        _check_rewriting(case)
        return
    CATALOGUE[case.id].check(case)


def evaluate(case: IdentityCase, backend=None) -> Tuple[complex, complex]:
    """(lhs, rhs) of the case's identity; hypotheses are checked first."""
    check_case(case)
    B = backend or DoubleBackend()
    ident = CATALOGUE[case.id]
    with B.context():
        return ident.lhs(case, B), ident.rhs(case, B)


def _make_eval(tag):
    def fn(case: IdentityCase, backend=None):
        if case.id != tag:
            raise ValueError(f"expected a {tag.value} case, got {case.id.value}")
        return evaluate(case, backend)

    fn.__name__ = f"eval_{tag.value}"
    fn.__doc__ = f"(lhs, rhs) for {tag.name}."
    return fn


eval_final_max = lambda case, backend=None: evaluate(case, backend)  # noqa: E731
eval_final_min = _make_eval(IdentityId.FINAL_MIN)
eval_first_m = _make_eval(IdentityId.FIRST_M)
eval_second_m = _make_eval(IdentityId.SECOND_M)
eval_final_plus = _make_eval(IdentityId.FINAL_PLUS)
eval_fmultiterm = _make_eval(IdentityId.FMULTITERM)
eval_third = _make_eval(IdentityId.THIRD)
eval_alt_max = _make_eval(IdentityId.ALT_MAX)
eval_no_psi = _make_eval(IdentityId.NO_PSI)
eval_ckp_52 = _make_eval(IdentityId.CKP_52)
eval_ckp_51 = _make_eval(IdentityId.CKP_51)
eval_ckp_th51 = _make_eval(IdentityId.CKP_TH51)


def eval_mmtrick(m: int, c, d, backend=None):
    """(lhs, mid, rhs) of the m-sum relation."""
    case = IdentityCase(IdentityId.MMTRICK, c=c, d=d, m=m)
    check_case(case)
    B = backend or DoubleBackend()
    with B.context():
        return mmtrick_forms(case, B)


# ---------------------------------------------------------------------------
# verification


def _case_params(case) -> List[complex]:
    return list(case.a) + list(case.b) + list(case.c) + list(case.d)


def _near_pole_warnings(case) -> List[str]:
    out = []
    vals = _case_params(case)
    if case.id == IdentityId.FMULTITERM:
        vals = vals[1:]  # a1 is an integer by hypothesis
    if vals:
        dmin = min(_frac_dist(x) for x in vals)
        if dmin < NEAR_POLE_WARN:
            out.append(f"near-pole: parameter within {dmin:.3g} of an integer")
    for name in "abcd":
        v = getattr(case, name)
        for i in range(len(v)):
            for j in range(i + 1, len(v)):
                dist = _frac_dist(v[i] - v[j])
                if dist < NEAR_POLE_WARN:
                    out.append(f"near-pole: {name} entries {i + 1},{j + 1} within {dist:.3g} mod Z")
    return out


def _method_summary(log) -> Optional[str]:
    methods = {}
    for r in log:
        key = getattr(getattr(r, "method", None), "value", None)
        if key:
            methods[key] = methods.get(key, 0) + 1
    if not methods:
        return None
    parts = ",".join(f"{k}x{v}" for k, v in sorted(methods.items()))
    return f"summation: {parts}"


def verify(case: IdentityCase, tol_identity: Optional[float] = None, extended: bool = False,
           policy: TruncationPolicy = series.DEFAULT_POLICY) -> VerificationReport:
    """Evaluate both sides of ``case`` and compare.

    Hypotheses are checked first; a violation raises ConstraintError (the
    caller decides how to record it).  ``extended`` switches to the mpmath
    backend with a 1e-20 default tolerance.
    """
    if case.id == IdentityId.GRADIENT_FORM:
        return gradient_form_check(case.a, case.b, case.sign, 1e-5, tol=tol_identity)
    if case.id == IdentityId.KDF_FORM:
        return kdf_form_check(case.a, case.b, case.sign, tol=tol_identity, extended=extended)
    check_case(case)
    B = ExtendedBackend() if extended else DoubleBackend(policy)
    tol = tol_identity if tol_identity is not None else B.tol
    ident = CATALOGUE[case.id]
    diags = _near_pole_warnings(case)
    with B.context():
        B.reset()
        lhs = ident.lhs(case, B)
        log_l, terms_l = list(B.log), B.terms
        B.reset()
        rhs = ident.rhs(case, B)
        log_r, terms_r = list(B.log), B.terms
        extra = None
        if case.id == IdentityId.MMTRICK:
            _, mid, _ = mmtrick_forms(case, B)
            extra = mid
        res = residual(lhs, rhs)
        if extra is not None:
            res = max(res, residual(lhs, extra), residual(extra, rhs))
            diags.append(f"middle form: {complex(extra)!r}")
    summary = _method_summary(log_l + log_r)
    if summary:
        diags.append(summary)
    unconverged = sum(1 for r in log_l + log_r if getattr(r, "converged", True) is False)
    if unconverged:
        diags.append(f"{unconverged} series did not meet the convergence tolerance")
    if log_l + log_r:
        big = max(abs(complex(r.value)) for r in log_l + log_r)
        diags.append(f"largest series magnitude: {big:.3g}")
    return VerificationReport(
        lhs=complex(lhs),
        rhs=complex(rhs),
        residual=float(res),
        passed=bool(res <= tol),
        diagnostics=diags,
        terms_lhs=terms_l,
        terms_rhs=terms_r,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# rewritings of the digamma series and the two differentiation rules


def gradient_form_check(a, b, sign=Sign.PLUS, h: float = 1e-5, tol: Optional[float] = None) -> VerificationReport:
    """Digamma series versus the parameter-gradient expression.

    The gradient of F(a, 1; b, beta; z) at beta = 1, summed over every
    entry of a, b and beta, is taken by central differences of the series
    engine.  The differences are formed from the longdouble values with a
    fixed acceleration plan, so the only visible error is the O(h^2)
    truncation of the difference scheme.
    """
    if not (1e-6 <= h <= 1e-4):
        raise ValueError(f"step h={h} outside [1e-6, 1e-4]")
    a, b = as_vec(a), as_vec(b)
    z = int(as_sign(sign))
    case = IdentityCase(IdentityId.GRADIENT_FORM, a=a, b=b, sign=z)
    check_case(case)
    num0, den0 = a + (1 + 0j,), b + (1 + 0j,)
    plan = series.default_plan(num0, den0)
    pol = TruncationPolicy(plan=plan)
    lhs_r = series.digamma_series(a, b, z)

    def F(num, den):
        return series.pfq_unit(num, den, z, pol).value_ld

    grad = 0
    terms = 0
    n_a = len(a)
    for i in range(n_a + len(den0)):
        up, dn = list(num0), list(num0)
        upd, dnd = list(den0), list(den0)
        # divide by the step actually taken: x + h is rounded
        if i < n_a:
            up[i] += h
            dn[i] -= h
            step = (up[i] - dn[i]).real
        else:
            upd[i - n_a] += h
            dnd[i - n_a] -= h
            step = (upd[i - n_a] - dnd[i - n_a]).real
        grad = grad + (F(up, upd) - F(dn, dnd)) / np.longdouble(step)
        terms += 2 * plan[0] * 2 ** plan[1]
    base = series.pfq_unit(a, b, z)
    bracket = sum((special.digamma(x) for x in b), 0j) + special.digamma(1) - sum(
        (special.digamma(x) for x in a), 0j
    )
    rhs = complex(-grad) + bracket * base.value
    lhs = lhs_r.value
    res = residual(lhs, rhs)
    t = tol if tol is not None else 1e4 * h * h
    return VerificationReport(lhs, rhs, res, res <= t, [f"finite-difference step h={h:g}"],
                              lhs_r.terms_used, terms + base.terms_used, t)


def kdf_form_check(a, b, sign=Sign.PLUS, tol: Optional[float] = None, extended: bool = False) -> VerificationReport:
    """Digamma series versus its double-series rewriting."""
    a, b = as_vec(a), as_vec(b)
    z = int(as_sign(sign))
    case = IdentityCase(IdentityId.KDF_FORM, a=a, b=b, sign=z)
    check_case(case)
    B = ExtendedBackend() if extended else DoubleBackend()
    t = tol if tol is not None else B.tol
    with B.context():
        av, bv = B.vec(a), B.vec(b)
        B.reset()
        lhs = B.dseries(av, bv, z)
        tl = B.terms
        B.reset()
        pref = z * B.prod(av) / B.prod(bv)
        acc = B.num(0)
        for x in bv + (B.num(1),):
            acc += B.kdf(av, bv, x, z) / x
        for x in av:
            acc -= B.kdf(av, bv, x, z) / x
        bracket = B.num(0)
        for x in bv + (B.num(1),):
            bracket += B.psi(x)
        for x in av:
            bracket -= B.psi(x)
        rhs = pref * acc + bracket * B.F(av, bv, z)
        tr = B.terms
        res = residual(lhs, rhs)
    return VerificationReport(complex(lhs), complex(rhs), float(res), res <= t, [], tl, tr, t)


def _fd(f, eps):
    return (f(eps) - f(-eps)) / (2 * eps)


def dsin_rule_check(a, d, eps0: float = 1e-5, tol: Optional[float] = None) -> VerificationReport:
    """d/de [sin(pi(a+e)) / sin(pi(d+e))] at e = 0 versus pi * ratio * (sum cot - sum cot)."""
    a, d = as_vec(a), as_vec(d)

    def ratio(e):
        return special.vec_sin_pi([x + e for x in a]) / special.vec_sin_pi([x + e for x in d])

    lhs = _fd(ratio, eps0)
    cots = sum((special.cot_pi(x) for x in a), 0j) - sum((special.cot_pi(x) for x in d), 0j)
    rhs = math.pi * ratio(0.0) * cots
    res = residual(lhs, rhs)
    t = tol if tol is not None else 1e4 * eps0 * eps0
    return VerificationReport(lhs, rhs, res, res <= t, [], 2, 0, t)


def dgamma_rule_check(a, d, k: int = 0, eps0: float = 1e-5, tol: Optional[float] = None) -> VerificationReport:
    """d/de [Gamma(a+e+k) / Gamma(d+e+k)] at e = 0 versus ratio * (sum psi - sum psi)."""
    a, d = as_vec(a), as_vec(d)

    def ratio(e):
        return special.gamma_ratio([[x + e + k for x in a]], [[x + e + k for x in d]])

    lhs = _fd(ratio, eps0)
    psis = sum((special.digamma(x + k) for x in a), 0j) - sum((special.digamma(x + k) for x in d), 0j)
    rhs = ratio(0.0) * psis
    res = residual(lhs, rhs)
    t = tol if tol is not None else 1e4 * eps0 * eps0
    return VerificationReport(lhs, rhs, res, res <= t, [], 2, 0, t)
