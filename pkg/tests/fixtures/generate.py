"""Regenerate oracle_fixtures.json (slow: a few minutes).

    python tests/fixtures/generate.py
"""

import json
import os

import mpmath as mp

from psikit.backends import ExtendedBackend
from psikit.harness import SampleSpec, sample_case
from psikit.identities import CATALOGUE
from psikit.oracle import SeriesRequest, oracle_series

DIGITS = 32

SERIES = [
    ("gauss", SeriesRequest("pfq", (0.5, 0.25), (2,), 1)),
    ("gauss_complex", SeriesRequest("pfq", (0.3 + 0.1j, -0.45), (1.7 - 0.2j,), 1)),
    ("f32_plus", SeriesRequest("pfq", (0.3 + 0.2j, -0.6, 1.1), (1.45, 0.9 - 0.3j), 1)),
    ("f32_minus_slow", SeriesRequest("pfq", (0.8 + 0.2j, 1.3, -0.25), (1.35, 0.8 - 0.1j), -1)),
    ("kummer_minus", SeriesRequest("pfq", (0.7, 0.2 + 0.3j), (1.5 - 0.3j,), -1)),
    ("terminating", SeriesRequest("pfq", (-3,), (1.5,), 1)),
    ("terminating_f32", SeriesRequest("pfq", (-5, 0.3 + 0.4j, 1.2), (0.7, -0.45 + 0.1j), -1)),
    ("phi_2_3", SeriesRequest("phi", (2,), (3,), 1)),
    ("phi_f21", SeriesRequest("phi", (0.4, 0.25 + 0.5j), (1.9,), 1)),
    ("psi_basic_plus", SeriesRequest("psi_series", (0.25, 0.35), (1.4,), 1)),
    ("psi_basic_minus", SeriesRequest("psi_series", (0.25, 0.35), (1.4,), -1)),
    ("psi_p1", SeriesRequest("psi_series", (-0.4 + 0.3j,), (), 1)),
    ("psi_p3_plus", SeriesRequest("psi_series", (0.3 + 0.5j, -0.7, 1.2), (1.1 - 0.4j, 0.95), 1)),
    ("psi_p3_minus", SeriesRequest("psi_series", (0.3 + 0.5j, 0.7, 1.2), (1.1 - 0.4j, 0.95), -1)),
    ("psi_m0", SeriesRequest("psi_series_m", (0.25, 0.35, 1.1), (1.4,), 1, m=0)),
    ("psi_m1", SeriesRequest("psi_series_m", (0.25 + 0.2j, 0.35, 1.6), (0.4,), 1, m=1)),
    ("psi_m3", SeriesRequest("psi_series_m", (1.25, 0.65 - 0.3j, 1.6), (0.4,), 1, m=3)),
    ("kdf_plus_b", SeriesRequest("kdf", (0.25, 0.35), (1.4,), 1, x=1.4)),
    ("kdf_plus_1", SeriesRequest("kdf", (0.25, 0.35), (1.4,), 1, x=1)),
    ("kdf_minus_a", SeriesRequest("kdf", (0.25 + 0.1j, 0.35), (1.4,), -1, x=0.25 + 0.1j)),
]

IDENTITY_DRAWS = [
    ("final_max_minus", 3, 0),
    ("final_max_plus", 2, 0),
    ("final_min", 3, 0),
    ("first_m", 2, 0),
    ("ckp_th51", 2, 0),
]


def cstr(z):
    return [mp.nstr(z.real, DIGITS + 3), mp.nstr(z.imag, DIGITS + 3)]


def main():
    mp.mp.dps = DIGITS + 10
    out = {"digits": DIGITS, "series": [], "identities": []}
    for name, req in SERIES:
        v = oracle_series(req, DIGITS)
        out["series"].append({
            "name": name, "kind": req.kind,
            "num": [[x.real, x.imag] for x in req.num], "den": [[x.real, x.imag] for x in req.den],
            "sign": int(req.sign), "m": req.m,
            "x": None if req.x is None else [complex(req.x).real, complex(req.x).imag],
            "value": cstr(v.value), "err_bound": mp.nstr(v.err_bound, 5),
        })
        print(name, mp.nstr(v.value, 20))
    B = ExtendedBackend(DIGITS)
    for iid, p, idx in IDENTITY_DRAWS:
        case = sample_case(SampleSpec(iid, p=p, seed=2024), idx)
        ident = CATALOGUE[case.id]
        with B.context():
            lhs, rhs = ident.lhs(case, B), ident.rhs(case, B)
        out["identities"].append({
            "identity": iid, "p": p, "seed": 2024, "index": idx,
            "case": {k: [[z.real, z.imag] for z in getattr(case, k)] for k in "abcd"}
            | {"m": case.m, "n": case.n, "s": case.s, "sign": int(case.sign)},
            "lhs": cstr(lhs), "rhs": cstr(rhs),
        })
        print(iid, mp.nstr(lhs, 20), mp.nstr(abs(lhs - rhs), 3))
    path = os.path.join(os.path.dirname(__file__), "oracle_fixtures.json")
    with open(path, "w") as fh:
        json.dump(out, fh, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    main()
