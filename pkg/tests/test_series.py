import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from common import (
    cvec,
    engine,
    gauss_closed_form,
    gauss_draws,
    kummer_closed_form,
    kummer_draws,
    load_fixtures,
    relerr,
    rng,
)
from psikit import series, special
from psikit.errors import DivergentError, NoConvergence, PoleError
from psikit.oracle import SeriesRequest, oracle_series
from psikit.series import Method, TruncationPolicy

FIX = load_fixtures()


@pytest.mark.parametrize("fx", FIX["series"], ids=lambda f: f["name"])
def test_fixture_within_err_estimate(fx):
    r = engine(fx["kind"], fx["num"], fx["den"], fx["sign"], fx["m"], fx["x"])
    assert r.converged
    diff = abs(mp.mpc(r.value) - fx["value"])
    assert diff <= r.err_estimate
    assert fx["err_bound"] < 1e-25


def test_gauss_example():
    r = series.pfq_unit((0.5, 0.25), (2,))
    ref = math.gamma(2) * math.gamma(1.25) / (math.gamma(1.5) * math.gamma(1.75))
    assert relerr(r.value, ref) < 1e-12
    assert r.method == Method.RICHARDSON


def test_terminating_example():
    r = series.pfq_unit((-3,), (1.5,))
    hand = sum(special.pochhammer(-3, k) / (special.pochhammer(1.5, k) * math.factorial(k)) for k in range(4))
    assert r.method == Method.TERMINATING and r.terms_used == 4
    assert abs(r.value - hand) < 1e-15


def test_no_symbolic_cancellation():
    r = series.pfq_unit((0.7,), (0.7,))
    assert abs(r.value - math.e) < 1e-14
    assert r.terms_used > 1


def test_phi_examples():
    assert abs(series.phi_unit((1,), (1,)).value - math.e) < 1e-14
    assert abs(series.phi_unit((), ()).value - math.e) < 1e-14
    # sum 1/((k+2) k!) = 1
    ref = mp.nsum(lambda k: 1 / ((k + 2) * mp.factorial(k)), [0, mp.inf])
    assert abs(series.phi_unit((2,), (3,)).value - complex(ref)) < 1e-14


def test_errors():
    with pytest.raises(DivergentError):
        series.pfq_unit((0.5, 0.5, 0.5), (1.2,))
    with pytest.raises(DivergentError):
        series.pfq_unit((0.5, 0.5), (1.02,))  # excess 0.02 below the margin
    with pytest.raises(DivergentError):
        series.pfq_unit((0.5, 0.5), (0.02,), -1)  # excess -0.98
    with pytest.raises(PoleError):
        series.pfq_unit((0.5, 0.5), (-2,))
    with pytest.raises(NoConvergence) as info:
        series.pfq_unit((0.5, 0.5), (2.5,), policy=TruncationPolicy(method="direct", k_max=100))
    assert info.value.partial.terms_used == 100


def test_policy_validation():
    with pytest.raises(ValueError):
        TruncationPolicy(k_min=10, k_max=10)
    with pytest.raises(ValueError):
        TruncationPolicy(rel_tol=0)


def test_pq_lower_order():
    # 1F1(1; 2; 1) = e - 1
    r = series.pfq_unit((1,), (2,))
    assert r.method == Method.DIRECT
    assert abs(r.value - (math.e - 1)) < 1e-15


def test_gauss_oracle_100():
    for a, b, c in gauss_draws(100):
        r = series.pfq_unit((a, b), (c,))
        assert relerr(r.value, gauss_closed_form(a, b, c)) <= 1e-11


def test_kummer_oracle_100():
    for a, b in kummer_draws(100):
        r = series.pfq_unit((a, b), (1 + a - b,), -1)
        assert relerr(r.value, kummer_closed_form(a, b)) <= 1e-10


def test_euler_matches_direct():
    g = rng(5)
    for _ in range(100):
        a = cvec(g, 2)
        e = g.uniform(0.6, 2.0)
        b = (a[0] + a[1] - 1 + complex(e, g.uniform(-1, 1)),)
        if special.distance_to_integer(b[0]) < 1e-2:
            continue
        fast = series.pfq_unit(a, b, -1)
        assert fast.method == Method.EULER
        try:
            slow = series.pfq_unit(a, b, -1, TruncationPolicy(method="direct"))
        except NoConvergence as exc:
            slow = exc.partial
        assert abs(fast.value - slow.value) <= 1e-11 + slow.err_estimate


def test_phi_scaling_200():
    for a, b, c in gauss_draws(200, seed=3):
        phi = series.phi_unit((a, b), (c,)).value
        ratio = special.gamma_ratio([(a, b)], [(c,)])
        ref = ratio * series.pfq_unit((a, b), (c,)).value
        assert relerr(phi, ref) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, 40),
    st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
    st.floats(0.3, 4.0),
    st.sampled_from([1, -1]),
)
def test_termination_index(n, a2, b_re, sign):
    if special.distance_to_integer(a2) < 1e-3:
        a2 += 0.5  # keep -n the only terminating entry
    b = complex(b_re, 0.5)
    r = series.pfq_unit((-n, a2), (b,), sign)
    assert r.method == Method.TERMINATING
    assert r.terms_used == n + 1
    ref = mp.hyp2f1(-n, mp.mpc(a2.real, a2.imag), mp.mpc(b.real, b.imag), sign)
    assert abs(mp.mpc(r.value) - ref) <= r.err_estimate


@settings(max_examples=40, deadline=None)
@given(st.permutations([0.21 + 0.3j, -0.4 + 0.1j, 0.65 - 0.2j]), st.sampled_from([1, -1]))
def test_permutation_symmetry(a, sign):
    b = (1.9 + 0.1j, 1.3 - 0.4j)
    base = series.pfq_unit((0.21 + 0.3j, -0.4 + 0.1j, 0.65 - 0.2j), b, sign).value
    assert abs(series.pfq_unit(a, b, sign).value - base) <= 1e-12 * abs(base)
    base = series.digamma_series((0.21 + 0.3j, -0.4 + 0.1j, 0.65 - 0.2j), b, sign).value
    assert abs(series.digamma_series(a, b, sign).value - base) <= 1e-12 * max(1.0, abs(base))


# -- digamma-weighted series -----------------------------------------------


def test_digamma_series_cancels():
    c = 0.3 + 0.2j
    r = series.digamma_series((1, c), (c,))
    assert r.value == 0 and r.converged
    r = series.digamma_series((c, 1), (c,), -1)
    assert r.value == 0 and r.converged


def test_digamma_series_m_cancels():
    d1 = 0.45 - 0.3j
    for m in (0, 2, 5):
        r = series.digamma_series_m((d1, 1, 1 + m), (d1,), m)
        assert r.value == 0 and r.converged


def test_digamma_series_m2_matches_oracle():
    c, d = (0.3 + 0.2j, -0.4 - 0.1j, 0.85 + 0.5j), (1.35 - 0.3j,)
    ref = oracle_series(SeriesRequest("psi_series_m", c, d, 1, m=2), digits=30)
    r = series.digamma_series_m(c, d, 2)
    assert abs(r.value - complex(ref.value)) <= 1e-12
    assert abs(r.value - complex(ref.value)) <= r.err_estimate


def test_digamma_series_pole():
    with pytest.raises(PoleError):
        series.digamma_series((0.3, -2), (1.4,))


def test_digamma_series_m_rejects_negative_m():
    with pytest.raises(ValueError):
        series.digamma_series_m((0.1, 0.2, 0.3), (1.2,), -1)


# -- two-variable rewriting ------------------------------------------------


def test_inner_sum_identity():
    b, k = 0.7, 25
    lhs = sum(special.pochhammer(b, j) / special.pochhammer(b + 1, j) for j in range(k)) / b
    assert abs(lhs - (special.digamma(b + k) - special.digamma(b))) < 1e-13


def test_kdf_smallest_case_matches_naive():
    a, b, x = (-7.5 + 0.3j,), (), 0.6 + 0.2j
    r = series.kdf_series(a, b, x, 1)
    naive = series.kdf_series_naive(a, b, x, 1, 400)
    assert relerr(r.value, naive) <= 1e-12


def test_kdf_alternating_matches_naive():
    a, b, x = (0.3 + 0.1j, -0.6), (2.9 - 0.2j,), 1.4
    r = series.kdf_series(a, b, x, -1)
    naive = series.kdf_series_naive(a, b, x, -1, 300)
    assert relerr(r.value, naive) <= 1e-9


def test_default_plan_shape():
    n0, levels, depth = series.default_plan((0.5, 0.25), (2,))
    assert n0 >= 32 and n0 & (n0 - 1) == 0
    assert levels == 6 and depth > 0
    assert series.default_plan((0.5, 0.25), (2,), log_weight=True)[1] == 10
