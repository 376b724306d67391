"""Acceptance criteria 1-8, one verdict line each.

Run with ``pytest tests/test_acceptance.py``; the verdicts are printed in
the terminal summary (and inline with ``-s``).
"""

import filecmp
import math
import os
import subprocess
import sys
import time

import mpmath as mp
import numpy as np
import pytest

from common import (
    engine,
    gauss_closed_form,
    gauss_draws,
    kummer_closed_form,
    kummer_draws,
    load_fixtures,
    recast,
    record,
    relerr,
    shared_draws,
)
from psikit import identities as ids
from psikit import series
from psikit.harness import SampleSpec, sample_case, sweep
from psikit.identities import residual
from psikit.special import distance_to_integer


def test_ac1_engine_validation():
    t0 = time.perf_counter()
    wg = max(relerr(series.pfq_unit((a, b), (c,)).value, gauss_closed_form(a, b, c))
             for a, b, c in gauss_draws(100))
    wk = max(relerr(series.pfq_unit((a, b), (1 + a - b,), -1).value, kummer_closed_form(a, b))
             for a, b in kummer_draws(100))
    dt = time.perf_counter() - t0
    ok = wg <= 1e-11 and wk <= 1e-10 and dt < 5
    record(1, ok, f"engine validation: Gauss worst rel {wg:.2e} (<= 1e-11), "
                  f"Kummer worst rel {wk:.2e} (<= 1e-10), {dt:.2f} s (< 5 s)")
    assert ok


def _ac2_sweeps():
    plain = ["final_max_plus", "final_max_minus", "final_min", "second_m", "final_plus",
             "alt_max", "no_psi", "ckp_52", "ckp_51", "ckp_th51"]
    for ident in plain:
        yield ident, [dict(p=p) for p in (2, 3)]
    yield "first_m", [dict(p=p, m_range=(m, m)) for p in (2, 3) for m in (0, 1, 3)]
    yield "third", [dict(p=p, n=n, s=s) for p in (2, 3) for n, s in ((0, 0), (p, p - 1), (p - 1, p - 2))]


def test_ac2_identity_sweeps():
    worst, slowest, bad = 0.0, 0.0, []
    for ident, variants in _ac2_sweeps():
        t0 = time.perf_counter()
        for kw in variants:
            stats = sweep(SampleSpec(ident, seed=2, min_excess=0.3, **kw), 200, 1e-8)
            worst = max(worst, stats.worst_residual)
            if stats.passed != stats.total:
                bad.append(f"{ident} {kw}: {stats.passed}/{stats.total}")
        dt = time.perf_counter() - t0
        slowest = max(slowest, dt)
        if dt >= 60:
            bad.append(f"{ident} took {dt:.1f} s")
    ok = not bad
    record(2, ok, f"identity sweeps: 12 identities, p in {{2,3}}, 200 draws per variant, "
                  f"worst residual {worst:.2e} (<= 1e-8), slowest identity {slowest:.1f} s (< 60 s)"
                  + ("" if ok else "; " + "; ".join(bad)))
    assert ok, bad


def test_ac3_terminating():
    t0 = time.perf_counter()
    worst, passed, total = 0.0, 0, 0
    for ident in ("fmultiterm", "mmtrick"):
        for p in (2, 3):
            stats = sweep(SampleSpec(ident, p=p, seed=3, m_range=(1, 8)), 200, 1e-11)
            worst = max(worst, stats.worst_residual)
            passed += stats.passed
            total += stats.total
    dt = time.perf_counter() - t0
    ok = passed == total and worst <= 1e-11 and dt < 10
    record(3, ok, f"terminating identities: FMULTITERM and MMTRICK, m <= 8, {passed}/{total} passed, "
                  f"worst residual {worst:.2e} (<= 1e-11), {dt:.2f} s (< 10 s)")
    assert ok


def test_ac4_cross_representation():
    w_fs = w_third = w_np = 0.0
    for g in shared_draws("first_m", {"s": recast("second_m")}, 50, seed=4):
        w_fs = max(w_fs, residual(ids.evaluate(g["base"])[1], ids.evaluate(g["s"])[1]))
    for p in (2, 3):
        for g in shared_draws("alt_max", {"t": recast("third", n=p, s=p - 1)}, 50, p=p, seed=4):
            w_third = max(w_third, residual(ids.evaluate(g["base"])[1], ids.evaluate(g["t"])[1]))
        for g in shared_draws("final_min", {"t": recast("third", n=0, s=0)}, 50, p=p, seed=4):
            # THIRD carries a 1/pi normalization that FINAL_MIN does not
            w_third = max(w_third, residual(ids.evaluate(g["base"])[1], math.pi * ids.evaluate(g["t"])[1]))
    others = {"plus": recast("final_plus", a=(), b=(), c="a", d="b"), "min": recast("final_min")}
    for g in shared_draws("no_psi", others, 50, seed=4):
        lhs, rhs = ids.evaluate(g["base"])
        diff = ids.evaluate(g["plus"])[1] - ids.evaluate(g["min"])[1]
        w_np = max(w_np, residual(math.pi * (lhs - rhs), diff))
    ok = w_fs <= 1e-8 and w_third <= 1e-10 and w_np <= 1e-8
    record(4, ok, f"cross-representation on 50 shared draws: FIRST_M vs SECOND_M {w_fs:.2e} (<= 1e-8), "
                  f"THIRD reductions {w_third:.2e} (<= 1e-10), NO_PSI vs FINAL_PLUS - FINAL_MIN {w_np:.2e} (<= 1e-8)")
    assert ok


def test_ac5_rewritings():
    grad_worst, ratios = 0.0, []
    for k in range(20):
        case = sample_case(SampleSpec("gradient_form", p=2, seed=5), k)
        rep = ids.gradient_form_check(case.a, case.b, case.sign, h=1e-5)
        grad_worst = max(grad_worst, rep.residual)
        r1 = ids.gradient_form_check(case.a, case.b, case.sign, h=1e-4).residual
        r2 = ids.gradient_form_check(case.a, case.b, case.sign, h=5e-5).residual
        ratios.append(r1 / r2)
    kdf_worst = 0.0
    for sign in (1, -1):
        for k in range(50):
            case = sample_case(SampleSpec("kdf_form", p=2, seed=5, sign=sign), k)
            kdf_worst = max(kdf_worst, ids.kdf_form_check(case.a, case.b, sign).residual)
    lo, hi = min(ratios), max(ratios)
    ok = grad_worst <= 1e-6 and 3.5 <= lo and hi <= 4.5 and kdf_worst <= 1e-8
    record(5, ok, f"rewritings: gradient form worst {grad_worst:.2e} at h=1e-5 (<= 1e-6), "
                  f"halving ratio h=1e-4 -> 5e-5 in [{lo:.3f}, {hi:.3f}] (within [3.5, 4.5]) on 20 draws, "
                  f"two-variable form worst {kdf_worst:.2e} (<= 1e-8) on 50 draws per sign")
    assert ok


def _off_pole_vec(g, n):
    out = []
    while len(out) < n:
        z = complex(g.uniform(-2, 3), g.uniform(-1, 1))
        if distance_to_integer(z) > 0.05:
            out.append(z)
    return tuple(out)


def test_ac6_differentiation_rules():
    g = np.random.default_rng(6)
    ws = wg = 0.0
    for _ in range(50):
        a, d = _off_pole_vec(g, int(g.integers(1, 4))), _off_pole_vec(g, int(g.integers(1, 4)))
        ws = max(ws, ids.dsin_rule_check(a, d, 1e-5).residual)
        wg = max(wg, ids.dgamma_rule_check(a, d, int(g.integers(0, 4)), 1e-5).residual)
    ok = ws <= 1e-6 and wg <= 1e-6
    record(6, ok, f"differentiation rules on 50 draws at eps0=1e-5: sine ratio {ws:.2e}, "
                  f"gamma ratio {wg:.2e} (both <= 1e-6)")
    assert ok


def test_ac7_oracle_honesty():
    data = load_fixtures()
    worst, bad = 0.0, []
    for fx in data["series"]:
        r = engine(fx["kind"], fx["num"], fx["den"], fx["sign"], fx["m"], fx["x"])
        diff = float(abs(mp.mpc(r.value) - fx["value"]))
        worst = max(worst, diff / r.err_estimate)
        if not diff <= r.err_estimate:
            bad.append(fx["name"])
    ok = not bad and data["digits"] >= 30
    record(7, ok, f"oracle honesty: {len(data['series']) - len(bad)}/{len(data['series'])} fixtures within "
                  f"err_estimate (worst |engine - oracle| / err_estimate = {worst:.2f}), oracle at {data['digits']} digits")
    assert ok, bad


def test_ac8_determinism(tmp_path):
    outs = []
    for k, threads in enumerate(("1", "1", "3")):
        path = tmp_path / f"run{k}.csv"
        env = dict(os.environ, PSI_KIT_THREADS=threads)
        subprocess.run(
            [sys.executable, "-m", "psikit", "sweep", "--identity", "final_min", "--p", "2",
             "--count", "200", "--seed", "7", "--out", str(path)],
            check=True, env=env, capture_output=True,
        )
        outs.append(path)
    same = all(filecmp.cmp(outs[0], p, shallow=False) for p in outs[1:])
    size = outs[0].stat().st_size
    record(8, same, f"determinism: three sweep runs (seed 7, 200 draws, 1 and 3 threads) "
                    f"give byte-identical CSV ({size} bytes)")
    assert same


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
