"""Shared helpers: fixture loading, engine dispatch and the seeded draws
used by the engine-level property tests."""

import json
from pathlib import Path

import mpmath as mp
import numpy as np

from psikit import series
from psikit.harness import SampleSpec, admissible, sample_case
from psikit.identities import IdentityCase
from psikit.special import distance_to_integer

mp.mp.dps = 34

FIXTURES = Path(__file__).parent / "fixtures" / "oracle_fixtures.json"


def _c(pair):
    return complex(pair[0], pair[1])


def load_fixtures():
    with open(FIXTURES, encoding="utf-8") as fh:
        data = json.load(fh)
    for s in data["series"]:
        s["num"] = tuple(_c(v) for v in s["num"])
        s["den"] = tuple(_c(v) for v in s["den"])
        s["x"] = _c(s["x"]) if s["x"] is not None else None
        s["value"] = mp.mpc(mp.mpf(s["value"][0]), mp.mpf(s["value"][1]))
        s["err_bound"] = float(s["err_bound"])
    for d in data["identities"]:
        for k in "abcd":
            d["case"][k] = tuple(_c(v) for v in d["case"][k])
        d["lhs"] = mp.mpc(*map(mp.mpf, d["lhs"]))
        d["rhs"] = mp.mpc(*map(mp.mpf, d["rhs"]))
    return data


def engine(kind, num, den, sign=1, m=0, x=None, policy=series.DEFAULT_POLICY):
    if kind == "pfq":
        return series.pfq_unit(num, den, sign, policy)
    if kind == "phi":
        return series.phi_unit(num, den, sign, policy)
    if kind == "psi_series":
        return series.digamma_series(num, den, sign, policy)
    if kind == "psi_series_m":
        return series.digamma_series_m(num, den, m, policy)
    if kind == "kdf":
        return series.kdf_series(num, den, x, sign, policy)
    raise ValueError(kind)


def mpc(z):
    z = complex(z)
    return mp.mpc(z.real, z.imag)


def rng(seed):
    return np.random.default_rng(seed)


def cvec(g, n, re=(-1.5, 2.5), im=(-1.5, 1.5)):
    return tuple(complex(x, y) for x, y in zip(g.uniform(*re, n), g.uniform(*im, n)))


def gauss_draws(count, seed=11, min_excess=0.1):
    """(a, b, c) with Re(c - a - b) >= min_excess, off the gamma poles."""
    g = rng(seed)
    out = []
    while len(out) < count:
        a, b = cvec(g, 2)
        c = a + b + complex(g.uniform(min_excess, 2.5), g.uniform(-1.5, 1.5))
        args = (c, c - a - b, c - a, c - b)
        if min(distance_to_integer(z) for z in args) > 1e-2:
            out.append((a, b, c))
    return out


def kummer_draws(count, seed=12, min_excess=0.1):
    """(a, b) with Re(1 - 2b) > -1 + min_excess, i.e. convergent at z = -1."""
    g = rng(seed)
    out = []
    while len(out) < count:
        a = complex(g.uniform(-1.5, 2.5), g.uniform(-1.5, 1.5))
        b = complex(g.uniform(-1.5, 1 - min_excess / 2), g.uniform(-1.5, 1.5))
        args = (1 + a - b, 1 + a / 2, 1 + a, 1 + a / 2 - b)
        if min(distance_to_integer(z) for z in args) > 1e-2:
            out.append((a, b))
    return out


def gauss_closed_form(a, b, c):
    a, b, c = mpc(a), mpc(b), mpc(c)
    return mp.gamma(c) * mp.gamma(c - a - b) / (mp.gamma(c - a) * mp.gamma(c - b))


def kummer_closed_form(a, b):
    a, b = mpc(a), mpc(b)
    return mp.gamma(1 + a - b) * mp.gamma(1 + a / 2) / (mp.gamma(1 + a) * mp.gamma(1 + a / 2 - b))


def relerr(x, ref):
    ref = complex(ref)
    return abs(complex(x) - ref) / abs(ref)


# -- shared draws for cross-representation checks ---------------------------


def recast(ident, **kw):
    """A function turning a case into the same draw for ``ident``.

    String values name a field of the source case, so
    ``recast("final_plus", a=(), b=(), c="a", d="b")`` moves a, b into c, d.
    """

    def fn(case):
        fields = {k: getattr(case, k) for k in ("a", "b", "c", "d", "m", "n", "s")}
        fields.update({k: (getattr(case, v) if isinstance(v, str) else v) for k, v in kw.items()})
        return IdentityCase(ident, sign=case.sign, **fields)

    return fn


def shared_draws(base, others, count, p=2, seed=99, max_tries=5000, **spec_kw):
    """``count`` admissible draws of ``base``, each also recast by the
    functions in ``others`` and kept only if admissible for all of them."""
    spec = SampleSpec(base, p=p, seed=seed, **spec_kw)
    out = []
    for k in range(max_tries):
        case = sample_case(spec, k)
        group = {"base": case}
        group.update({name: fn(case) for name, fn in others.items()})
        if all(admissible(c, SampleSpec(c.id, p=p, **spec_kw)) for c in group.values()):
            out.append(group)
            if len(out) == count:
                return out
    raise RuntimeError(f"only {len(out)} shared draws in {max_tries} tries")


# -- acceptance report ------------------------------------------------------

AC_LINES = {}


def record(ac, ok, text):
    """Remember the one-line verdict for acceptance criterion ``ac``."""
    AC_LINES[ac] = f"AC{ac} {'PASS' if ok else 'FAIL'}  {text}"
    print(AC_LINES[ac])
    return ok
