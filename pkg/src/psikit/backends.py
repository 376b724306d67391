"""Arithmetic backends the identity evaluators are written against.

An evaluator only needs a handful of primitives (hypergeometric series at
+-1, the digamma-weighted series, gamma ratios, trigonometric functions of
pi*z).  ``DoubleBackend`` maps them onto the double-precision engine;
``ExtendedBackend`` maps them onto the mpmath oracle so that the same
formulas can be checked at 30+ digits.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import replace
from typing import List

import mpmath as mp

from . import series, special
from .errors import PoleError
from .oracle import evaluate_mp
from .series import DEFAULT_POLICY, SeriesResult, TruncationPolicy


SCALED_TOL_FLOOR = 1e-14


class DoubleBackend:
    tol = 1e-8
    name = "double"

    def __init__(self, policy: TruncationPolicy = DEFAULT_POLICY):
        self.policy = policy
        self.log: List[SeriesResult] = []
        self.pi = math.pi

    def reset(self):
        self.log = []

    def context(self):
        return contextlib.nullcontext()

    def vec(self, v):
        return tuple(complex(x) for x in v)

    def num(self, x):
        return complex(x)

    def _keep(self, r: SeriesResult) -> complex:
        self.log.append(r)
        return r.value

    def F(self, num, den, z=1, scale=1.0):
        # scale is the size of the factor the value gets multiplied by; the
        # series then has to be that much more accurate, down to what double
        # precision can deliver
        policy = self.policy
        if scale > 1:
            policy = replace(policy, accept_tol=max(policy.accept_tol / scale, SCALED_TOL_FLOOR))
        return self._keep(series.pfq_unit(num, den, z, policy))

    def dseries(self, a, b, z=1):
        return self._keep(series.digamma_series(a, b, z, self.policy))

    def dseries_m(self, c, d, m):
        return self._keep(series.digamma_series_m(c, d, m, self.policy))

    def kdf(self, a, b, x, z=1):
        return self._keep(series.kdf_series(a, b, x, z, self.policy))

    def G(self, num, den):
        return special.gamma_ratio(num, den)

    def sin(self, x):
        return special.sin_pi(x)

    def cos(self, x):
        return special.cos_pi(x)

    def cot(self, x):
        return special.cot_pi(x)

    def psi(self, x):
        return special.digamma(x)

    def prod(self, v):
        out = 1 + 0j
        for x in v:
            out *= x
        return out

    def poch(self, v, k: int):
        return special.vec_pochhammer(v, k)

    def factorial(self, n: int):
        return float(math.factorial(n))

    @property
    def terms(self) -> int:
        return sum(r.terms_used for r in self.log)


class ExtendedBackend:
    """Backend on the mpmath oracle; parameter arithmetic is done in mpmath too."""

    tol = 1e-20
    name = "extended"

    def __init__(self, digits: int = 30):
        self.digits = digits
        self.log = []
        self.pi = mp.pi

    def reset(self):
        self.log = []

    def context(self):
        """Working precision for the parameter arithmetic of one evaluation."""
        return mp.workdps(self.digits + 10)

    def vec(self, v):
        return tuple(mp.mpc(x) for x in v)

    def num(self, x):
        return mp.mpc(x)

    def _keep(self, out):
        self.log.append(out)
        return out.value

    def F(self, num, den, z=1, scale=1.0):
        return self._keep(evaluate_mp("pfq", num, den, z, digits=self.digits))

    def dseries(self, a, b, z=1):
        return self._keep(evaluate_mp("psi_series", a, b, z, digits=self.digits))

    def dseries_m(self, c, d, m):
        return self._keep(evaluate_mp("psi_series_m", c, d, 1, m=m, digits=self.digits))

    def kdf(self, a, b, x, z=1):
        return self._keep(evaluate_mp("kdf", a, b, z, x=x, digits=self.digits))

    def G(self, num, den):
        with mp.workdps(self.digits + 10):
            acc = mp.mpc(0)
            for grp in num:
                for x in _as_seq(grp):
                    _pole_check(x)
                    acc += mp.loggamma(x)
            for grp in den:
                for x in _as_seq(grp):
                    _pole_check(x)
                    acc -= mp.loggamma(x)
            return mp.exp(acc)

    def sin(self, x):
        return mp.sinpi(x)

    def cos(self, x):
        return mp.cospi(x)

    def cot(self, x):
        _pole_check(x, allow_positive=False)
        return mp.cospi(x) / mp.sinpi(x)

    def psi(self, x):
        _pole_check(x)
        return mp.psi(0, x)

    def prod(self, v):
        return mp.fprod(v) if len(v) else mp.mpf(1)

    def poch(self, v, k: int):
        return mp.fprod(mp.rf(x, k) for x in v) if len(v) else mp.mpf(1)

    def factorial(self, n: int):
        return mp.factorial(n)

    @property
    def terms(self) -> int:
        return sum(r.terms for r in self.log)


def _as_seq(g):
    if isinstance(g, (tuple, list)):
        return g
    return (g,)


def _pole_check(x, allow_positive=True):
    r = int(mp.nint(mp.re(x)))
    if abs(x - r) < special.EPS_POLE and (r <= 0 or not allow_positive):
        raise PoleError(f"pole at {complex(x)}", complex(x))
