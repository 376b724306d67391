"""Unit-argument hypergeometric-type series.

Every series handled here has terms

    t_k = t_0 * prod_j (num_j)_k / prod_j (den_j)_k / k! * z**k * w_k,    z = +1 or -1,

where ``w_k`` is an optional slowly varying weight (a digamma bracket or a
cached inner sum).  Terms are generated as a cumulative product of term ratios
in ``clongdouble``.

How the sum is taken depends on the shape:

* a numerator entry equal to ``-N`` cuts the series at exactly ``N+1`` terms;
* ``len(num) <= len(den)``: terms decay factorially, summed directly;
* ``len(num) == len(den) + 1`` and ``z = +1``: the partial sums behave like
  ``S - sum_j c_j N**(-lam - j)`` with known ``lam``, so partial sums at
  ``N0, 2 N0, 4 N0, ...`` are combined by Richardson elimination;
* ``len(num) == len(den) + 1`` and ``z = -1``: Euler transformation by
  iterated averaging of consecutive partial sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import special
from .errors import DivergentError, NoConvergence, PoleError
from .special import EPS_POLE, ParamVec, as_vec

_LD = np.longdouble
_CLD = np.clongdouble
_EPS_LD = float(np.finfo(np.longdouble).eps)
_EPS = float(np.finfo(float).eps)

DELTA_CONV = 0.05
# a numerator this close to -N is treated as the integer -N
EPS_TERMINATE = 1e-12


class Sign(IntEnum):
    """The argument z of a unit-argument series."""

    PLUS = 1
    MINUS = -1


def as_sign(s) -> Sign:
    if isinstance(s, Sign):
        return s
    if isinstance(s, str):
        key = s.strip().lower()
        if key in ("+", "+1", "1", "plus", "plus_one"):
            return Sign.PLUS
        if key in ("-", "-1", "minus", "minus_one"):
            return Sign.MINUS
        raise ValueError(f"bad sign {s!r}")
    v = int(s)
    if v not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {s!r}")
    return Sign(v)


class Method(str, Enum):
    DIRECT = "direct"
    EULER = "euler_accelerated"
    TERMINATING = "terminating"
    RICHARDSON = "richardson"


@dataclass(frozen=True)
class TruncationPolicy:
    """Knobs for series summation.

    ``rel_tol``, ``consecutive_small``, ``k_min`` and ``k_max`` drive the
    direct-summation stopping rule.  ``accept_tol`` is the bound that
    ``err_estimate / (1 + |value|)`` must meet for ``converged`` to be set.
    ``plan`` pins the acceleration schedule ``(N0, levels, euler_depth)``
    so that results vary smoothly with the parameters (used by
    finite-difference checks); ``None`` picks it from the parameters.
    ``method="direct"`` forces plain summation on unit-radius series.
    """

    rel_tol: float = 1e-16
    consecutive_small: int = 3
    k_min: int = 20
    k_max: int = 200000
    accept_tol: float = 1e-10
    delta_conv: float = DELTA_CONV
    plan: Optional[Tuple[int, int, int]] = None
    method: str = "auto"

    def __post_init__(self):
        if not self.k_min < self.k_max:
            raise ValueError("k_min must be below k_max")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.method not in ("auto", "direct"):
            raise ValueError(f"unknown method {self.method!r}")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class SeriesResult:
    value: complex
    err_estimate: float
    terms_used: int
    method: Method
    converged: bool
    # the same value before rounding to double
    value_ld: object = field(default=None, repr=False, compare=False)

    def scaled(self, factor: complex) -> "SeriesResult":
        f = complex(factor)
        v = self.value_ld if self.value_ld is not None else _CLD(self.value)
        v = v * _CLD(f)
        return replace(
            self,
            value=complex(v),
            err_estimate=self.err_estimate * abs(f) + _EPS * abs(complex(v)),
            value_ld=v,
        )


@dataclass
class _Series:
    num: ParamVec
    den: ParamVec
    z: int
    t0: complex = 1.0
    # weight(N) -> clongdouble array of w_0..w_{N-1}
    weight: Optional[Callable[[int], np.ndarray]] = None
    # tail exponent shift from the weight (1 when the weight is O(1/k))
    lam_shift: int = 0
    # the weight grows like log k: each exponent appears twice
    log_weight: bool = False

    @property
    def excess(self) -> complex:
        return sum(self.den, 0j) - sum(self.num, 0j)


# ---------------------------------------------------------------------------
# term generation


def _ratios(num, den, z, stop: int) -> np.ndarray:
    """r_j = t_{j+1}/t_j for j = 0..stop-1 (without weights)."""
    j = np.arange(stop, dtype=_LD)
    r = np.full(stop, _CLD(z))
    for a in num:
        r *= _CLD(a) + j
    for b in den:
        r /= _CLD(b) + j
    r /= j + 1
    return r


def _terms(s: _Series, n: int) -> np.ndarray:
    if n <= 0:
        return np.zeros(0, dtype=_CLD)
    t = np.empty(n, dtype=_CLD)
    t[0] = 1
    if n > 1:
        t[1:] = np.cumprod(_ratios(s.num, s.den, s.z, n - 1))
    t *= _CLD(s.t0)
    if s.weight is not None:
        t *= s.weight(n)
    return t


def _terminating_index(num: ParamVec) -> Optional[int]:
    idx = None
    for a in num:
        n = round(a.real)
        if n <= 0 and abs(a - n) <= EPS_TERMINATE:
            idx = -n if idx is None else min(idx, -n)
    return idx


def _check_den_poles(den: ParamVec, upto: Optional[int]):
    """Denominator entries -M reached before index ``upto`` are poles."""
    for b in den:
        if special.is_nonpositive_integer(b, EPS_POLE):
            m = -round(b.real)
            if upto is None or m < upto:
                raise PoleError(f"denominator parameter {b} is a nonpositive integer", b)


# ---------------------------------------------------------------------------
# summation strategies


def _result(value, err, terms, method, policy) -> SeriesResult:
    v = complex(value)
    err = float(err) + _EPS * abs(v)
    ok = bool(np.isfinite(v.real) and np.isfinite(v.imag))
    conv = ok and err <= policy.accept_tol * (1 + abs(v))
    return SeriesResult(v, err, int(terms), method, conv, value_ld=_CLD(value))


def _sum_terminating(s: _Series, n_terms: int, policy) -> SeriesResult:
    t = _terms(s, n_terms)
    total = np.sum(t)
    err = _EPS_LD * float(np.sum(np.abs(t))) * (n_terms + 1)
    return _result(total, err, n_terms, Method.TERMINATING, policy)


def _sum_direct(s: _Series, policy, unit_radius: bool) -> SeriesResult:
    """Plain summation with the consecutive-small-terms stopping rule."""
    n = max(policy.k_min + policy.consecutive_small + 1, 64)
    while True:
        n = min(n, policy.k_max)
        t = _terms(s, n)
        partial = np.cumsum(t)
        small = np.abs(t) <= policy.rel_tol * np.abs(partial)
        stop = _first_run(small, policy.k_min, policy.consecutive_small)
        if stop is not None or n >= policy.k_max:
            k = stop if stop is not None else n - 1
            value = partial[k]
            last = float(abs(t[k]))
            if unit_radius:
                ex = max(s.excess.real, 1e-3)
                tail = last * (k + 1) / ex
                if s.z < 0:
                    tail = last
            else:
                tail = last
            err = tail + _EPS_LD * float(np.sum(np.abs(t[: k + 1]))) * (k + 1)
            res = _result(value, err, k + 1, Method.DIRECT, policy)
            if stop is None:
                raise NoConvergence(
                    f"stopping rule not met within k_max={policy.k_max} terms", partial=res
                )
            return res
        n *= 4


def _first_run(flags: np.ndarray, start: int, length: int) -> Optional[int]:
    """Index ending the first run of ``length`` true flags at or after ``start``."""
    f = flags[start:].astype(np.int64)
    if len(f) < length:
        return None
    c = np.concatenate([[0], np.cumsum(f)])
    hits = np.nonzero(c[length:] - c[:-length] == length)[0]
    if len(hits) == 0:
        return None
    return start + int(hits[0]) + length - 1


def _block_nodes(t: np.ndarray, nodes: Sequence[int]) -> List:
    """Partial sums S_{N_i} = sum t[:N_i] taken as sums of blocks."""
    out = []
    acc = _CLD(0)
    prev = 0
    for n in nodes:
        acc = acc + np.sum(t[prev:n])
        out.append(acc)
        prev = n
    return out


def _exponents(s: _Series, count: int) -> List[complex]:
    lam = complex(s.excess) + s.lam_shift
    out = []
    j = 0
    while len(out) < count:
        out.append(lam + j)
        if s.log_weight and len(out) < count:
            out.append(lam + j)
        j += 1
    return out


def _richardson_table(nodes, exps):
    """Columns of the elimination table; column j has len(nodes)-j entries."""
    cols = [list(nodes)]
    for j, lam in enumerate(exps):
        f = _CLD(2.0 ** lam)
        prev = cols[-1]
        cur = [(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)]
        cols.append(cur)
        if len(cur) == 1:
            break
    return cols


def _default_plan(s: _Series, policy) -> Tuple[int, int, int]:
    scale = max([1.0] + [abs(x) for x in s.num + s.den])
    n0 = max(32, 2 ** math.ceil(math.log2(4 * scale * scale)))
    levels = 10 if s.log_weight else 6
    while n0 * 2 ** levels > policy.k_max and levels > 2:
        levels -= 1
    return n0, levels, 40


def default_plan(num, den, log_weight: bool = False, policy: TruncationPolicy = DEFAULT_POLICY):
    """The (n0, levels, depth) plan the engine would pick for these parameters.

    Pinning it through ``TruncationPolicy(plan=...)`` makes the value a
    smooth function of the parameters, which finite differences need.
    """
    s = _Series(as_vec(num), as_vec(den), 1, log_weight=log_weight)
    return _default_plan(s, policy)


def _sum_richardson(s: _Series, policy, plan=None) -> SeriesResult:
    n0, levels, _ = (plan or policy.plan or _default_plan(s, policy))[:3]
    if n0 * 2 ** levels > policy.k_max:
        raise NoConvergence(f"acceleration plan needs more than k_max={policy.k_max} terms")
    nodes = [n0 * 2 ** i for i in range(levels + 1)]
    t = _terms(s, nodes[-1])
    sums = _block_nodes(t, nodes)
    exps = _exponents(s, levels)
    cols = _richardson_table(sums, exps)
    # roundoff in every node, amplified by the elimination weights
    abs_cum = np.cumsum(np.abs(t).astype(_LD))
    node_err = [float(abs_cum[n - 1]) * _EPS_LD * 4 for n in nodes]
    amp_cols = _richardson_table(node_err, [abs(complex(e)) for e in exps])
    best = None
    for j in range(2, len(cols)):
        v = cols[j][-1]
        d = float(abs(v - cols[j - 1][-1]))
        ro = float(abs(amp_cols[j][-1])) * _amp_factor(exps[:j])
        if best is None or d + ro < best[1]:
            best = (v, d + ro)
    value, err = best
    return _result(value, err, nodes[-1], Method.RICHARDSON, policy)


def _amp_factor(exps) -> float:
    """Bound on sum |w_i| / sum w_i for the elimination weights."""
    a = 1.0
    for lam in exps:
        f = abs(2.0 ** complex(lam))
        a *= (f + 1) / max(abs(2.0 ** complex(lam) - 1), 1e-300)
    return a


def _sum_euler(s: _Series, policy, plan=None) -> SeriesResult:
    n0, _, depth = (plan or policy.plan or _default_plan(s, policy))[:3]
    start = n0
    while True:
        stop = start + depth + 2
        if stop > policy.k_max:
            raise NoConvergence("alternating terms never became monotone within k_max")
        t = _terms(s, stop)
        mag = np.abs(t[start:stop])
        if policy.plan is not None or np.all(np.diff(mag) <= 0):
            break
        start *= 2
    base = np.sum(t[:start])
    level = base + np.cumsum(t[start : start + depth + 1])
    prev_pair = level[:2]
    for _ in range(depth):
        prev_pair = level[:2]
        level = (level[:-1] + level[1:]) / 2
    value = level[0]
    trunc = float(abs(prev_pair[1] - prev_pair[0])) / 2
    ro = _EPS_LD * float(np.sum(np.abs(t[: start + depth + 1]))) * 8
    return _result(value, trunc + ro, start + depth + 1, Method.EULER, policy)


def _evaluate(s: _Series, policy: TruncationPolicy) -> SeriesResult:
    if not np.isfinite(complex(s.t0)):
        raise PoleError("series prefactor is not finite", s.t0)
    p, q = len(s.num), len(s.den)
    n_term = _terminating_index(s.num) if s.weight is None else None
    if n_term is not None:
        _check_den_poles(s.den, n_term)
        snapped = tuple(
            complex(round(a.real)) if abs(a - round(a.real)) <= EPS_TERMINATE and round(a.real) <= 0 else a
            for a in s.num
        )
        return _sum_terminating(replace(s, num=snapped), n_term + 1, policy)
    _check_den_poles(s.den, None)
    if p <= q:
        return _sum_direct(s, policy, unit_radius=False)
    if p > q + 1:
        raise DivergentError(
            f"series with {p} numerator and {q} denominator parameters diverges at z={s.z}"
        )
    ex = s.excess.real
    bound = policy.delta_conv if s.z > 0 else policy.delta_conv - 1
    if not ex > bound:
        raise DivergentError(
            f"parametric excess {ex:.6g} must exceed {bound:.6g} for convergence at z={s.z}"
        )
    if policy.method == "direct":
        return _sum_direct(s, policy, unit_radius=True)
    return _accelerate(s, policy, _sum_richardson if s.z > 0 else _sum_euler)


def _accelerate(s: _Series, policy: TruncationPolicy, method) -> SeriesResult:
    """Run ``method`` on the default plan, starting 4x later while the error
    estimate misses the acceptance bound (large complex parameters delay the
    asymptotic regime).  A pinned plan is used as given."""
    if policy.plan is not None:
        return method(s, policy)
    n0, levels, depth = _default_plan(s, policy)
    best = method(s, policy)
    while not best.converged and 4 * n0 * 2 ** levels <= policy.k_max:
        n0 *= 4
        try:
            r = method(s, policy, (n0, levels, depth))
        except NoConvergence:
            break
        if r.err_estimate < best.err_estimate:
            best = r
    return best


# ---------------------------------------------------------------------------
# public operations


def pfq_unit(num, den, sign=Sign.PLUS, policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesResult:
    """sum_k (num)_k / ((den)_k k!) z**k at z = sign."""
    s = _Series(as_vec(num), as_vec(den), int(as_sign(sign)))
    return _evaluate(s, policy)


def phi_unit(num, den, sign=Sign.PLUS, policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesResult:
    """Gamma(num)/Gamma(den) times the hypergeometric series."""
    num, den = as_vec(num), as_vec(den)
    ratio = special.gamma_ratio([num], [den])
    return pfq_unit(num, den, sign, policy).scaled(ratio)


def _is_cancelling(top: Sequence[complex], bottom: Sequence[complex]) -> bool:
    return sorted(top, key=lambda x: (x.real, x.imag)) == sorted(
        bottom, key=lambda x: (x.real, x.imag)
    )


def _zero_result() -> SeriesResult:
    return SeriesResult(0j, 0.0, 0, Method.DIRECT, True, value_ld=_CLD(0))


def _bracket_weight(plus: Sequence[complex], minus: Sequence[complex]):
    """w_k = sum psi(plus + k) - sum psi(minus + k), seeded once per entry.

    The per-step increments are combined before accumulating, so the
    logarithmic growth of the individual digammas never enters the sum.
    """
    seed = _CLD(0)
    for x in plus:
        seed = seed + special.digamma_ld(x)
    for x in minus:
        seed = seed - special.digamma_ld(x)

    def weight(n: int) -> np.ndarray:
        j = np.arange(n - 1, dtype=_LD)
        inc = np.zeros(n - 1, dtype=_CLD)
        for x in plus:
            inc += 1 / (_CLD(x) + j)
        for x in minus:
            inc -= 1 / (_CLD(x) + j)
        w = np.empty(n, dtype=_CLD)
        w[0] = seed
        w[1:] = seed + np.cumsum(inc)
        return w

    return weight


def _check_psi_args(vecs):
    for v in vecs:
        for x in v:
            if special.is_nonpositive_integer(x, EPS_POLE):
                raise PoleError(f"digamma argument {x} is a nonpositive integer", x)


def digamma_series(a, b, sign=Sign.PLUS, policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesResult:
    """sum_k (a)_k z**k / ((b)_k k!) [sum psi(b+k) + psi(1+k) - sum psi(a+k)]."""
    a, b = as_vec(a), as_vec(b)
    if _is_cancelling(list(b) + [1 + 0j], list(a)):
        return _zero_result()
    _check_psi_args([a, b])
    s = _Series(
        a,
        b,
        int(as_sign(sign)),
        weight=_bracket_weight(list(b) + [1 + 0j], a),
        lam_shift=1 if len(a) == len(b) + 1 else 0,
    )
    return _evaluate(s, policy)


def digamma_series_m(c, d, m: int, policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesResult:
    """sum_k (c)_k / ((d)_k (m+k)! k!) {sum psi(d+k) + psi(k+1) + psi(1+m+k) - sum psi(c+k)}."""
    c, d = as_vec(c), as_vec(d)
    if m < 0 or int(m) != m:
        raise ValueError("m must be a non-negative integer")
    m = int(m)
    plus = list(d) + [1 + 0j, complex(1 + m)]
    if _is_cancelling(plus, list(c)):
        return _zero_result()
    _check_psi_args([c, d])
    s = _Series(
        c,
        d + (complex(1 + m),),
        1,
        t0=1.0 / math.factorial(m),
        weight=_bracket_weight(plus, c),
        lam_shift=1 if len(c) == len(d) + 2 else 0,
    )
    return _evaluate(s, policy)


def _inner_weight(x: complex):
    """I_n = sum_{r<=n} x/(x+r), the cached inner sum of the double series."""
    if special.is_nonpositive_integer(x, EPS_POLE):
        raise PoleError(f"inner parameter {x} is a nonpositive integer", x)

    def weight(n: int) -> np.ndarray:
        r = np.arange(n, dtype=_LD)
        return np.cumsum(_CLD(x) / (_CLD(x) + r))

    return weight


def kdf_series(a, b, inner_num, sign=Sign.PLUS, policy: TruncationPolicy = DEFAULT_POLICY) -> SeriesResult:
    """Two-variable series F^{p:2:1}_{p:1:0}(a+1 : x,1 : 1; b+1,2 : x+1 : - | z, z).

    Collapsing the double sum along n = r + s gives
    sum_n (a+1)_n/((b+1)_n (2)_n) z**n sum_{r<=n} x/(x+r), summed with the
    inner sum carried forward from one n to the next.
    """
    a, b = as_vec(a), as_vec(b)
    x = complex(inner_num)
    num = tuple(v + 1 for v in a) + (1 + 0j,)
    den = tuple(v + 1 for v in b) + (2 + 0j,)
    s = _Series(num, den, int(as_sign(sign)), weight=_inner_weight(x), log_weight=True)
    return _evaluate(s, policy)


def kdf_series_naive(a, b, inner_num, sign, n_max: int) -> complex:
    """Literal O(n_max^2) double loop over (r, s) with r + s < n_max."""
    a, b = as_vec(a), as_vec(b)
    x = complex(inner_num)
    z = int(as_sign(sign))
    total = 0j
    u = 1 + 0j
    for n in range(n_max):
        if n:
            u *= z * special.vec_pochhammer([v + n for v in a], 1) / (
                special.vec_pochhammer([v + n for v in b], 1) * (n + 1)
            )
        v = 1 + 0j
        for r in range(n + 1):
            if r:
                v *= (x + r - 1) / (x + r)
            total += u * v
    return total
