"""Extended-precision reference values for the unit-argument series.

This is deliberately a separate code path from :mod:`psikit.series`: the
terms are summed directly in mpmath for the first ``N`` indices, and the
tail is taken from the Euler-Maclaurin formula applied to the analytic
continuation of the term in ``k`` (log-gamma differences, ``mpmath.psi``
brackets).  Alternating tails are paired first, ``f(2j) - f(2j+1)``, which
makes them smooth and monotone.  The error bound is the disagreement between
two cutoffs plus the working-precision floor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import mpmath as mp

from .errors import DivergentError, PoleError
from .series import DELTA_CONV, EPS_TERMINATE, Sign, as_sign

KINDS = ("pfq", "phi", "psi_series", "psi_series_m", "kdf")


@dataclass(frozen=True)
class SeriesRequest:
    """One series to evaluate.

    ``num``/``den`` are the parameter vectors (``a``/``b`` for the digamma
    series, ``c``/``d`` for the ``m`` variant).  ``x`` is the inner
    parameter of the double series.
    """

    kind: str
    num: Tuple[complex, ...]
    den: Tuple[complex, ...] = ()
    sign: Sign = Sign.PLUS
    m: int = 0
    x: Optional[complex] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown series kind {self.kind!r}")
        object.__setattr__(self, "num", tuple(complex(v) for v in self.num))
        object.__setattr__(self, "den", tuple(complex(v) for v in self.den))
        object.__setattr__(self, "sign", as_sign(self.sign))


@dataclass(frozen=True)
class OracleValue:
    value: mp.mpc
    err_bound: mp.mpf
    digits: int
    terms: int = field(default=0, compare=False)

    def __complex__(self):
        return complex(self.value)


def _mpvec(v):
    return tuple(x if isinstance(x, (mp.mpc, mp.mpf)) else mp.mpc(x) for x in v)


@dataclass
class _Shape:
    num: tuple
    den: tuple
    z: int
    t0: object
    plus: tuple = ()
    minus: tuple = ()
    inner: object = None

    def weight_at(self, k):
        w = mp.mpf(1)
        if self.plus or self.minus:
            w = mp.fsum(mp.psi(0, x + k) for x in self.plus) - mp.fsum(
                mp.psi(0, x + k) for x in self.minus
            )
        if self.inner is not None:
            w *= self.inner * (mp.psi(0, self.inner + k + 1) - mp.psi(0, self.inner))
        return w

    def weight_seq(self, n):
        """Weights at 0..n-1 by recurrence (exact at integer k)."""
        out = []
        if self.plus or self.minus:
            br = mp.fsum(mp.psi(0, x) for x in self.plus) - mp.fsum(mp.psi(0, x) for x in self.minus)
        else:
            br = None
        inner = mp.mpf(0)
        for k in range(n):
            w = mp.mpf(1) if br is None else br
            if self.inner is not None:
                inner += self.inner / (self.inner + k)
                w = w * inner
            out.append(w)
            if br is not None:
                br += mp.fsum(1 / (x + k) for x in self.plus) - mp.fsum(1 / (x + k) for x in self.minus)
        return out

    def excess(self):
        return mp.re(mp.fsum(self.den) - mp.fsum(self.num))


def _head(sh: _Shape, n: int):
    t = sh.t0
    ws = sh.weight_seq(n)
    terms = []
    for k in range(n):
        terms.append(t * ws[k] * (sh.z ** k))
        r = mp.mpf(1)
        for a in sh.num:
            r *= a + k
        for b in sh.den:
            r /= b + k
        t = t * r / (k + 1)
    return terms


def _analytic_term(sh: _Shape) -> Callable:
    lg0 = mp.fsum(mp.loggamma(b) for b in sh.den) - mp.fsum(mp.loggamma(a) for a in sh.num)

    def f(k):
        # the log-gammas grow like k log k and cancel; keep enough digits
        extra = int(mp.log10(abs(k) + 10)) + 5
        with mp.extradps(extra):
            lg = (
                lg0
                + mp.fsum(mp.loggamma(a + k) for a in sh.num)
                - mp.fsum(mp.loggamma(b + k) for b in sh.den)
                - mp.loggamma(k + 1)
            )
            v = sh.t0 * mp.exp(lg) * sh.weight_at(k)
        return +v

    return f


_EM_ORDER = 6


def _em_tail(f, n: int):
    """sum_{k>=n} f(k) by Euler-Maclaurin; returns (value, remainder estimate)."""
    pts = [n, 2 * n, 4 * n, 16 * n, 256 * n, mp.inf]
    integral, qerr = mp.quad(f, pts, error=True)
    ds = mp.diffs(f, n, 2 * _EM_ORDER)
    ds = list(ds)
    corr = ds[0] / 2
    last = mp.mpf(0)
    for j in range(1, _EM_ORDER + 1):
        last = mp.bernoulli(2 * j) / mp.factorial(2 * j) * ds[2 * j - 1]
        corr -= last
    return integral + corr, 10 * abs(last) + qerr


def _tail(sh: _Shape, n: int):
    f = _analytic_term(sh)
    if sh.z > 0:
        return _em_tail(f, n)
    # n is even, so the pairs start with a positive sign
    return _em_tail(lambda j: f(2 * j) - f(2 * j + 1), n // 2)


def _terminating_index(num):
    idx = None
    for a in num:
        r = int(mp.nint(mp.re(a)))
        if r <= 0 and abs(a - r) <= EPS_TERMINATE:
            idx = -r if idx is None else min(idx, -r)
    return idx


def _check_den(den, upto):
    for b in den:
        r = int(mp.nint(mp.re(b)))
        if r <= 0 and abs(b - r) < 1e-8 and (upto is None or -r < upto):
            raise PoleError(f"denominator parameter {b} is a nonpositive integer", complex(b))


def _sum_shape(sh: _Shape, digits: int, weighted: bool) -> OracleValue:
    floor = mp.mpf(10) ** (-digits)
    n_term = None if weighted else _terminating_index(sh.num)
    if n_term is not None:
        _check_den(sh.den, n_term)
        num = tuple(mp.mpf(int(mp.nint(mp.re(a)))) if abs(a - mp.nint(mp.re(a))) <= EPS_TERMINATE
                    and mp.nint(mp.re(a)) <= 0 else a for a in sh.num)
        sh = _Shape(num, sh.den, sh.z, sh.t0, sh.plus, sh.minus, sh.inner)
        terms = _head(sh, n_term + 1)
        v = mp.fsum(terms)
        return OracleValue(mp.mpc(v), floor * (1 + mp.fsum(abs(t) for t in terms)), digits, n_term + 1)
    _check_den(sh.den, None)
    p, q = len(sh.num), len(sh.den)
    if p <= q:
        terms = []
        n = 64
        while True:
            terms = _head(sh, n)
            s = mp.fsum(terms)
            if all(abs(t) <= floor * floor * (1 + abs(s)) for t in terms[-4:]):
                break
            n *= 2
            if n > 10 ** 6:
                raise DivergentError("entire series did not settle within 10^6 terms")
        return OracleValue(mp.mpc(s), floor * (1 + mp.fsum(abs(t) for t in terms)), digits, n)
    if p > q + 1:
        raise DivergentError(f"series with {p} numerator and {q} denominator parameters diverges")
    ex = sh.excess()
    bound = DELTA_CONV if sh.z > 0 else DELTA_CONV - 1
    if not ex > bound:
        raise DivergentError(f"parametric excess {mp.nstr(ex, 6)} must exceed {bound}")
    scale = max([1] + [abs(x) for x in sh.num + sh.den])
    n = int(max(200, 40 * scale))
    n += n % 2
    head = mp.fsum(_head(sh, n))
    tail, rem = _tail(sh, n)
    value = head + tail
    err = rem + floor * (1 + abs(value))
    return OracleValue(mp.mpc(value), err, digits, n)


def oracle_series(req: SeriesRequest, digits: int = 30) -> OracleValue:
    """Reference value of ``req`` at ``digits`` significant digits."""
    return evaluate_mp(req.kind, req.num, req.den, int(req.sign), req.m, req.x, digits)


def evaluate_mp(kind, num, den, z=1, m=0, x=None, digits: int = 30) -> OracleValue:
    """Same as :func:`oracle_series` but parameters may already be mpmath numbers."""
    if digits < 30:
        raise ValueError("oracle precision must be at least 30 digits")
    if kind not in KINDS:
        raise ValueError(f"unknown series kind {kind!r}")
    z = int(as_sign(z))
    with mp.workdps(digits + 10):
        num, den = _mpvec(num), _mpvec(den)
        if kind == "pfq":
            out = _sum_shape(_Shape(num, den, z, mp.mpf(1)), digits, False)
        elif kind == "phi":
            for b in den:
                r = int(mp.nint(mp.re(b)))
                if r <= 0 and abs(b - r) < 1e-8:
                    raise PoleError(f"denominator Gamma has a pole at {b}", complex(b))
            base = _sum_shape(_Shape(num, den, z, mp.mpf(1)), digits, False)
            ratio = mp.fprod(mp.gamma(a) for a in num) / mp.fprod(mp.gamma(b) for b in den)
            out = OracleValue(base.value * ratio, base.err_bound * abs(ratio), digits, base.terms)
        elif kind == "psi_series":
            plus = den + (mp.mpf(1),)
            if _same_multiset(plus, num):
                return OracleValue(mp.mpc(0), mp.mpf(0), digits, 0)
            out = _sum_shape(_Shape(num, den, z, mp.mpf(1), plus, num), digits, True)
        elif kind == "psi_series_m":
            m = int(m)
            plus = den + (mp.mpf(1), mp.mpf(1 + m))
            if _same_multiset(plus, num):
                return OracleValue(mp.mpc(0), mp.mpf(0), digits, 0)
            sh = _Shape(num, den + (mp.mpf(1 + m),), 1, 1 / mp.factorial(m), plus, num)
            out = _sum_shape(sh, digits, True)
        else:
            xv = mp.mpc(x)
            sh = _Shape(
                tuple(a + 1 for a in num) + (mp.mpf(1),),
                tuple(b + 1 for b in den) + (mp.mpf(2),),
                z,
                mp.mpf(1),
                inner=xv,
            )
            out = _sum_shape(sh, digits, True)
    return out


def _same_multiset(top, bottom) -> bool:
    return sorted(map(complex, top), key=lambda c: (c.real, c.imag)) == sorted(
        map(complex, bottom), key=lambda c: (c.real, c.imag)
    )
