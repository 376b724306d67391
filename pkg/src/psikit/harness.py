"""Seeded random sweeps over the identity catalogue.

Parameters are drawn uniformly from a box in the complex plane and kept only
if the theorem's hypotheses hold with margin: every parameter (and every
pairwise difference) stays ``min_pole_distance`` away from the integers, and
the convergence excess exceeds its bound by ``min_excess``.  Each case index
gets its own counter-based generator keyed by (seed, identity, index), so a
failing case can be replayed from its index alone.
"""

from __future__ import annotations

import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from . import identities as ids
from .errors import ConstraintError, ExhaustedError, PsiKitError
from .identities import IdentityCase, IdentityId, VerificationReport
from .oracle import OracleValue, SeriesRequest, oracle_series
from .series import DELTA_CONV
from .special import distance_to_integer

__all__ = [
    "SampleSpec", "SweepStats", "sample_case", "sweep", "shrink", "run_case", "admissible",
    "excess_margin", "oracle_series", "SeriesRequest", "OracleValue",
]

MAX_ATTEMPTS = 10_000

_TERMINATING = (IdentityId.FMULTITERM, IdentityId.MMTRICK)


@dataclass(frozen=True)
class SampleSpec:
    """Where and how to draw cases for one identity.

    ``n`` and ``s`` pin the split sizes of THIRD and CKP_TH51 (drawn per
    case when None); ``sign`` pins the argument of GRADIENT_FORM and
    KDF_FORM (drawn per case when None).
    """

    identity: IdentityId
    p: int = 2
    m_range: Optional[Tuple[int, int]] = None
    re_range: Tuple[float, float] = (-2.0, 3.0)
    im_range: Tuple[float, float] = (-2.0, 2.0)
    min_excess: float = 0.3
    min_pole_distance: float = 1e-2
    seed: int = 0
    n: Optional[int] = None
    s: Optional[int] = None
    sign: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "identity", IdentityId.parse(self.identity))
        if self.m_range is None:
            lo = 1 if self.identity in (IdentityId.FMULTITERM, IdentityId.MMTRICK) else 0
            hi = 8 if self.identity in _TERMINATING else 3
            object.__setattr__(self, "m_range", (lo, hi))
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if self.min_excess < DELTA_CONV:
            raise ValueError(f"min_excess must be at least {DELTA_CONV}")
        for name in ("m_range", "re_range", "im_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty")
        if self.m_range[0] < 0:
            raise ValueError("m_range must be non-negative")


@dataclass
class SweepStats:
    total: int = 0
    passed: int = 0
    worst_residual: float = 0.0
    failures: List[Tuple[IdentityCase, VerificationReport]] = field(default_factory=list)
    wall_time: float = 0.0
    cases: List[IdentityCase] = field(default_factory=list)
    reports: List[VerificationReport] = field(default_factory=list)

    def merge(self, other: "SweepStats") -> "SweepStats":
        return SweepStats(
            self.total + other.total,
            self.passed + other.passed,
            max(self.worst_residual, other.worst_residual),
            self.failures + other.failures,
            self.wall_time + other.wall_time,
            self.cases + other.cases,
            self.reports + other.reports,
        )


def _generator(spec: SampleSpec, index: int) -> np.random.Generator:
    key = [spec.seed & 0xFFFFFFFF, (spec.seed >> 32) & 0xFFFFFFFF,
           zlib.crc32(spec.identity.value.encode()), spec.p, index]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _vec(rng, spec, n) -> tuple:
    re = rng.uniform(*spec.re_range, size=n)
    im = rng.uniform(*spec.im_range, size=n)
    return tuple(complex(x, y) for x, y in zip(re, im))


def _sum(v):
    return sum(v, 0j).real


def excess_margin(case: IdentityCase) -> Optional[float]:
    """How far the convergence excess sits above the level where the series
    stops converging (None for identities with only finite sums)."""
    i = case.id
    if i in _TERMINATING:
        return None
    if i in (IdentityId.FIRST_M, IdentityId.SECOND_M):
        return _sum(case.d) - _sum(case.c) + case.m + 1
    if i == IdentityId.FINAL_PLUS:
        return _sum(case.d) - _sum(case.c)
    if i == IdentityId.CKP_52:
        return _sum(case.a) - _sum(case.b) - 1
    if i == IdentityId.CKP_51:
        return _sum(case.b) - _sum(case.a)
    if i == IdentityId.CKP_TH51:
        return _sum(case.a) + _sum(case.c) - _sum(case.b) - _sum(case.d)
    e = _sum(case.b) - _sum(case.a)
    return e if ids.effective_sign(case) > 0 else e + 1


def _well_separated(case: IdentityCase, dist: float) -> bool:
    vals = list(case.a) + list(case.b) + list(case.c) + list(case.d)
    if case.id == IdentityId.FMULTITERM:
        vals = vals[1:]  # a1 is a nonpositive integer on purpose
    for x in vals:
        if distance_to_integer(x) < dist:
            return False
    for i in range(len(vals)):
        for j in range(i + 1, len(vals)):
            if distance_to_integer(vals[i] - vals[j]) < dist:
                return False
    return True


def _draw(rng, spec: SampleSpec) -> IdentityCase:
    i, p = spec.identity, spec.p
    m = int(rng.integers(spec.m_range[0], spec.m_range[1] + 1))
    sign = spec.sign if spec.sign is not None else int(rng.choice([1, -1]))
    v = lambda n: _vec(rng, spec, n)  # noqa: E731
    if i in (IdentityId.FIRST_M, IdentityId.SECOND_M, IdentityId.MMTRICK):
        return IdentityCase(i, c=v(p + 1), d=v(p - 1), m=m)
    if i == IdentityId.FINAL_PLUS:
        return IdentityCase(i, c=v(p), d=v(p - 1))
    if i == IdentityId.FMULTITERM:
        a1 = -int(rng.integers(0, 7))
        return IdentityCase(i, a=(complex(a1),) + v(p), d=v(p - 1), m=max(m, 1))
    if i == IdentityId.CKP_52:
        return IdentityCase(i, b=v(p + 1), a=v(p + 1))
    if i == IdentityId.CKP_51:
        return IdentityCase(i, a=v(p + 1), b=v(p))
    if i == IdentityId.CKP_TH51:
        n = spec.n if spec.n is not None else int(rng.integers(0, p + 1))
        s = spec.s if spec.s is not None else int(rng.integers(max(p - n, 0), p + 1))
        return IdentityCase(i, a=v(n), b=v(s), c=v(p - n), d=v(p - s))
    if i == IdentityId.THIRD:
        n = spec.n if spec.n is not None else int(rng.integers(0, p + 1))
        lo = max(0, n - 2)
        s = spec.s if spec.s is not None else int(rng.integers(lo, p))
        return IdentityCase(i, a=v(p), b=v(p - 1), n=n, s=s)
    kw = {}
    if i in (IdentityId.GRADIENT_FORM, IdentityId.KDF_FORM):
        kw["sign"] = sign
    return IdentityCase(i, a=v(p), b=v(p - 1), **kw)


def admissible(case: IdentityCase, spec: SampleSpec) -> bool:
    """True when ``case`` satisfies its hypotheses with the spec's margins."""
    try:
        ids.check_case(case)
    except ConstraintError:
        return False
    if not _well_separated(case, spec.min_pole_distance):
        return False
    margin = excess_margin(case)
    return margin is None or margin >= spec.min_excess


def sample_case(spec: SampleSpec, index: int = 0) -> IdentityCase:
    """The ``index``-th admissible case of ``spec`` (deterministic)."""
    rng = _generator(spec, index)
    for _ in range(MAX_ATTEMPTS):
        case = _draw(rng, spec)
        if admissible(case, spec):
            return case
    raise ExhaustedError(
        f"no admissible {spec.identity.value} case in {MAX_ATTEMPTS} draws; widen the ranges or lower min_excess"
    )


def _error_report(case, exc) -> VerificationReport:
    return VerificationReport(
        lhs=complex("nan"), rhs=complex("nan"), residual=float("inf"), passed=False,
        diagnostics=[f"{type(exc).__name__}: {exc}"],
    )


def run_case(case: IdentityCase, tol: Optional[float] = None, extended: bool = False) -> VerificationReport:
    """verify() with evaluation errors turned into failed reports."""
    try:
        return ids.verify(case, tol, extended=extended)
    except PsiKitError as exc:
        return _error_report(case, exc)


def _threads() -> int:
    raw = os.environ.get("PSI_KIT_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def sweep(spec: SampleSpec, count: int, tol: Optional[float] = None, extended: bool = False,
          threads: Optional[int] = None) -> SweepStats:
    """Sample ``count`` cases and verify each.

    Results are collected in index order regardless of the thread count, so
    the case and report lists are reproducible from (spec, count).
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    t0 = time.perf_counter()
    cases = [sample_case(spec, k) for k in range(count)]
    workers = threads or _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda c: run_case(c, tol, extended), cases))
    else:
        reports = [run_case(c, tol, extended) for c in cases]
    stats = SweepStats(cases=cases, reports=reports, total=count)
    for c, r in zip(cases, reports):
        if r.passed:
            stats.passed += 1
        else:
            stats.failures.append((c, r))
        stats.worst_residual = max(stats.worst_residual, r.residual)
    stats.wall_time = time.perf_counter() - t0
    return stats


def shrink(case: IdentityCase, fails: Callable[[IdentityCase], bool],
           spec: Optional[SampleSpec] = None, max_steps: int = 60) -> IdentityCase:
    """Simplify a failing case while ``fails`` keeps returning True.

    The moves are: dropping every imaginary part, halving every imaginary
    part, and pulling every real part halfway toward the midpoint of the
    real sampling interval.
    Candidates that break the identity's hypotheses are skipped.
    """
    spec = spec or SampleSpec(case.id)
    mid = 0.5 * (spec.re_range[0] + spec.re_range[1])
    keep_first = case.id == IdentityId.FMULTITERM

    def mapped(fn):
        out = {}
        for name in "abcd":
            v = getattr(case_now, name)
            new = tuple(fn(x) for x in v)
            if keep_first and name == "a" and v:
                new = (v[0],) + new[1:]
            out[name] = new
        return replace(case_now, **out)

    moves = [
        lambda x: complex(x.real, 0.0),
        lambda x: complex(x.real, x.imag / 2),
        lambda x: complex((x.real + mid) / 2, x.imag),
    ]
    case_now = case
    for _ in range(max_steps):
        progressed = False
        for mv in moves:
            cand = mapped(mv)
            if cand == case_now:
                continue
            try:
                ids.check_case(cand)
            except ConstraintError:
                continue
            if fails(cand):
                case_now = cand
                progressed = True
        if not progressed:
            break
    return case_now
