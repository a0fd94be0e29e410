import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primerace.coeffs import (
    PRESET_CURVES,
    BadReductionError,
    EllipticCurve,
    cornacchia,
    dirichlet_pair_coeff,
    dirichlet_pair_source,
    ec_ap,
    ec_pair_source,
    ec_source,
    gauss_angle_source,
    kronecker,
    lambda_ec_pair,
    lambda_gauss,
    lambda_sum2sq,
    parse_curve,
    qr_race_coeff,
    qr_race_source,
    sqrt_mod,
    sum2sq_source,
    zeta_source,
)
from primerace.coeffs import _ap_exhaustive, _ap_legendre, _group_order
from primerace.primes import sieve_primes

PRIMES_1E4 = sieve_primes(10_000)


# --- modular helpers -------------------------------------------------------

def test_kronecker_matches_legendre():
    for p in (3, 5, 7, 11, 13, 101):
        for a in range(1, p):
            euler = pow(a, (p - 1) // 2, p)
            want = 1 if euler == 1 else -1
            assert kronecker(a, p) == want
        assert kronecker(p, p) == 0


def test_kronecker_chi4_periodicity():
    # the character mod 4 used all over: 1 on 1 mod 4, -1 on 3 mod 4
    for n in range(1, 50, 2):
        assert kronecker(-4, n) == (1 if n % 4 == 1 else -1)
    assert kronecker(-4, 2) == 0


@settings(max_examples=200, deadline=None)
@given(st.integers(-400, 400), st.integers(-400, 400), st.integers(1, 60))
def test_kronecker_multiplicative_in_top(a, b, n):
    assert kronecker(a * b, n) == kronecker(a, n) * kronecker(b, n)


def test_sqrt_mod_roundtrip():
    for p in sieve_primes(200).tolist():
        for n in range(p):
            r = sqrt_mod(n, p)
            if r is None:
                assert pow(n, (p - 1) // 2, p) == p - 1
            else:
                assert r * r % p == n % p


# --- cornacchia ------------------------------------------------------------

def test_cornacchia_stated_cases():
    assert cornacchia(5, 4) == (1, 1)
    assert cornacchia(13, 4) == (3, 1)
    assert cornacchia(3, 4) is None
    with pytest.raises(ValueError):
        cornacchia(2, 4)
    with pytest.raises(ValueError):
        cornacchia(3, 3)


def exhaustive_representations(limit: int, d: int) -> set[int]:
    reachable = set()
    b = 1
    while d * b * b < limit:
        a = 0
        while a * a + d * b * b < limit:
            reachable.add(a * a + d * b * b)
            a += 1
        b += 1
    return reachable


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_cornacchia_against_exhaustive_search(d):
    representable = exhaustive_representations(20_000, d)
    for p in sieve_primes(20_000).tolist():
        if (2 * d) % p == 0:
            continue
        got = cornacchia(p, d)
        assert (got is not None) == (p in representable), (p, d)
        if got is not None:
            a, b = got
            assert a * a + d * b * b == p
            assert a >= 0 and b > 0
            if d == 1:
                assert a < b


# --- closed-form coefficients ----------------------------------------------

def test_lambda_sum2sq_values():
    assert lambda_sum2sq(13, 4, with_factor2=True) == pytest.approx(10 / 13, abs=1e-15)
    assert lambda_sum2sq(5, 4, with_factor2=True) == pytest.approx(-6 / 5, abs=1e-15)
    assert lambda_sum2sq(3, 4) == 0.0
    assert lambda_sum2sq(13, 4) == pytest.approx(5 / 13, abs=1e-15)


def test_lambda_gauss_values():
    assert lambda_gauss(5) == pytest.approx(-7 / 25, abs=1e-15)
    assert lambda_gauss(13) == pytest.approx(-119 / 169, abs=1e-15)
    assert lambda_gauss(7) == 0.0
    assert lambda_gauss(2) == 0.0


def test_lambda_gauss_swap_symmetry():
    # the rational function is symmetric in (a, b); evaluate both orders
    for p in (5, 13, 17, 29, 97, 101):
        a, b = cornacchia(p, 1)
        f = lambda u, v: Fraction(u**4 + v**4 - 6 * u * u * v * v, p * p)
        assert f(a, b) == f(b, a)
        assert lambda_gauss(p) == pytest.approx(float(f(a, b)), abs=1e-15)


def test_dirichlet_pair_values():
    assert dirichlet_pair_coeff(4, 3, 1, 7) == 1.0
    assert dirichlet_pair_coeff(4, 3, 1, 5) == -1.0
    assert dirichlet_pair_coeff(4, 3, 1, 2) == 0.0
    with pytest.raises(ValueError):
        dirichlet_pair_coeff(4, 2, 1, 7)
    with pytest.raises(ValueError):
        dirichlet_pair_coeff(4, 3, 3, 7)


def test_qr_race_values():
    # squares mod 5 are {1, 4}; rho(5) = 2
    assert qr_race_coeff(5, 11) == pytest.approx(0.5)
    assert qr_race_coeff(5, 2) == pytest.approx(-0.5)
    assert qr_race_coeff(5, 5) == 0.0
    with pytest.raises(ValueError):
        qr_race_coeff(2, 7)


# --- elliptic curves --------------------------------------------------------

def test_preset_discriminants():
    assert PRESET_CURVES["E1"].discriminant == 37
    assert PRESET_CURVES["E2"].discriminant == 389
    assert PRESET_CURVES["E0"].discriminant == -11
    assert PRESET_CURVES["E0prime"].discriminant == -19


def test_singular_curve_rejected():
    with pytest.raises(ValueError):
        EllipticCurve(0, 0, 0, 0, 0)


def test_parse_curve():
    assert parse_curve("E1") is PRESET_CURVES["E1"]
    c = parse_curve("0,0,1,-1,0")
    assert c == EllipticCurve(0, 0, 1, -1, 0)
    with pytest.raises(ValueError):
        parse_curve("1,2,3")


def test_ec_ap_small_primes_against_enumeration():
    e1 = PRESET_CURVES["E1"]
    for p in (2, 3, 5, 7, 11, 13):
        assert ec_ap(e1, p) == _ap_exhaustive(e1, p)
    for name in ("E2", "E0", "E0prime"):
        c = PRESET_CURVES[name]
        for p in (5, 7, 13):
            if p not in c.conductor_primes:
                assert ec_ap(c, p) == _ap_exhaustive(c, p)


def test_ec_ap_bad_reduction():
    with pytest.raises(BadReductionError):
        ec_ap(PRESET_CURVES["E1"], 37)


def test_ec_ap_hasse_at_10007():
    ap = ec_ap(PRESET_CURVES["E1"], 10007)
    assert ap * ap <= 4 * 10007


def test_ec_ap_legendre_equals_bsgs_band():
    # the switchover consistency check, small band (full band in acceptance)
    e1 = PRESET_CURVES["E1"]
    ps = sieve_primes(67_000)
    band = ps[ps >= 65_400].tolist()
    assert band, "band should not be empty"
    for p in band:
        assert _ap_legendre(e1, p) == p + 1 - _group_order(e1, p)


def test_lambda_ec_pair():
    e1, e2 = PRESET_CURVES["E1"], PRESET_CURVES["E2"]
    assert lambda_ec_pair(e1, e2, 5) == pytest.approx(
        _ap_exhaustive(e1, 5) * _ap_exhaustive(e2, 5) / 5
    )
    assert lambda_ec_pair(e1, e2, 7) == lambda_ec_pair(e2, e1, 7)
    assert lambda_ec_pair(e1, e2, 37) == 0.0  # bad for E1


def test_coefficient_maps_are_pure():
    e1 = PRESET_CURVES["E1"]
    for p in (65537, 65539):
        assert ec_ap(e1, p) == ec_ap(e1, p)
    assert lambda_gauss(100003) == lambda_gauss(100003)
    assert cornacchia(99989, 2) == cornacchia(99989, 2)


# --- coefficient sources ----------------------------------------------------

def test_source_values_match_scalar_maps():
    ps = sieve_primes(500)
    src = sum2sq_source(4)
    want = [0.0 if (8 % p == 0) else lambda_sum2sq(int(p), 4) for p in ps]
    assert np.allclose(src.values(ps), want)

    src = gauss_angle_source()
    assert np.allclose(src.values(ps), [lambda_gauss(int(p)) for p in ps])

    src = dirichlet_pair_source(4, 3, 1)
    assert np.allclose(src.values(ps), [dirichlet_pair_coeff(4, 3, 1, int(p)) for p in ps])

    src = qr_race_source(5)
    assert np.allclose(src.values(ps), [qr_race_coeff(5, int(p)) for p in ps])

    assert np.all(zeta_source().values(ps) == 1.0)


def test_source_values_bounded_by_degree():
    ps = sieve_primes(2000)
    for src in (
        zeta_source(),
        dirichlet_pair_source(4, 3, 1),
        sum2sq_source(2),
        sum2sq_source(3, with_factor2=True),
        gauss_angle_source(),
        ec_source(PRESET_CURVES["E1"]),
        ec_pair_source(PRESET_CURVES["E1"], PRESET_CURVES["E2"]),
    ):
        vals = src.values(ps)
        assert np.all(np.abs(vals) <= src.degree + 1e-12), src.label


def test_predicted_means():
    assert zeta_source().predicted_mean_rh() == -1.0
    assert dirichlet_pair_source(4, 3, 1).predicted_mean_rh() == 2.0
    assert dirichlet_pair_source(4, 1, 3).predicted_mean_rh() == -2.0
    assert qr_race_source(5).predicted_mean_rh() == pytest.approx(-0.5)
    assert ec_source(PRESET_CURVES["E1"]).predicted_mean_rh() == -1.0
    assert ec_source(PRESET_CURVES["E2"]).predicted_mean_rh() == -3.0
    assert ec_source(PRESET_CURVES["E0"]).predicted_mean_rh() == 1.0
    assert sum2sq_source(2).predicted_mean_rh() == -1.0
    assert ec_pair_source(PRESET_CURVES["E1"], PRESET_CURVES["E2"]).predicted_mean_rh() == -1.0


def test_hasse_bound_on_sample():
    e1 = PRESET_CURVES["E1"]
    for p in PRIMES_1E4[::97]:
        p = int(p)
        if p in e1.conductor_primes:
            continue
        ap = ec_ap(e1, p)
        assert ap * ap < 4 * p + 4 * math.isqrt(p) + 1
