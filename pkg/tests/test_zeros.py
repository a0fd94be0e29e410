import math

import mpmath
import numpy as np
import pytest

from primerace.zeros import (
    ComponentMeta,
    CriticalLineEvaluator,
    ZeroSet,
    find_zeros,
    load_zero_file,
    save_zero_file,
    zero_count_main_term,
)

mpmath.mp.dps = 30

EV = CriticalLineEvaluator("zeta")
EV_FINE = CriticalLineEvaluator("zeta", em_terms=32)
EV4 = CriticalLineEvaluator("dirichlet", q=4)

# first ten ordinates of the zeta zeros, as published everywhere
ZETA_ZEROS_10 = [
    14.134725142,
    21.022039639,
    25.010857580,
    30.424876126,
    32.935061588,
    37.586178159,
    40.918719012,
    43.327073281,
    48.005150881,
    49.773832478,
]


def mpmath_l4(s):
    return complex(
        (mpmath.zeta(s, mpmath.mpf(1) / 4) - mpmath.zeta(s, mpmath.mpf(3) / 4))
        * mpmath.power(4, -s)
    )


# --- evaluation --------------------------------------------------------------

def test_zeta_half_against_doubled_term_oracle():
    coarse = CriticalLineEvaluator("zeta", em_terms=12)
    assert abs(coarse.evaluate(0.0) - EV_FINE.evaluate(0.0)) < 1e-10


def test_zeta_at_two_closed_form():
    assert abs(EV.evaluate_s(2.0 + 0j) - math.pi**2 / 6) < 1e-12


def test_conjugate_symmetry():
    for ev in (EV, EV4):
        for t in (3.7, 14.1, 55.0):
            assert abs(ev.evaluate(-t) - ev.evaluate(t).conjugate()) < 1e-12


def test_against_mpmath():
    for t in (0.5, 14.0, 151.0, 977.3):
        ref = complex(mpmath.zeta(mpmath.mpc(0.5, t)))
        assert abs(EV.evaluate(t) - ref) < 1e-10
        ref4 = mpmath_l4(mpmath.mpc(0.5, t))
        assert abs(EV4.evaluate(t) - ref4) < 1e-10


def test_range_and_config_validation():
    with pytest.raises(ValueError):
        EV.evaluate(2e5)
    with pytest.raises(ValueError):
        CriticalLineEvaluator("dirichlet", q=6)  # no real primitive character
    with pytest.raises(ValueError):
        CriticalLineEvaluator("dirichlet", q=4, character_index=1)
    with pytest.raises(ValueError):
        CriticalLineEvaluator("nosuch")
    with pytest.raises(ValueError):
        CriticalLineEvaluator("zeta", em_terms=2)


def test_remainder_bound_below_target():
    for t in (10.0, 500.0, 2000.0):
        assert EV.remainder_bound(t) < EV.precision_target


def test_z_is_real_rotation():
    # |Z| must equal |L(1/2+it)|
    for t in (5.0, 14.0, 40.0):
        assert abs(abs(EV.z(t)) - abs(EV.evaluate(t))) < 1e-10


# --- zero finding -------------------------------------------------------------

def test_first_zeta_zero_against_independent_config():
    got = find_zeros(EV, 0, 15)
    assert got.size == 1
    # independent oracle: bisection on a second evaluator configuration
    fine = find_zeros(EV_FINE, 14.0, 14.3, step=0.01, refine_tol=1e-10)
    assert abs(got[0] - fine[0]) < 1e-6
    assert abs(got[0] - 14.134725) < 1e-6


def test_first_ten_zeta_zeros():
    got = find_zeros(EV, 0, 50)
    assert got.size == 10
    assert np.allclose(got, ZETA_ZEROS_10, atol=1e-6)
    main = zero_count_main_term(1, 50)
    assert abs(got.size - main) <= 2


def test_zero_count_consistency_to_500():
    found = find_zeros(EV, 0, 500)
    main = zero_count_main_term(1, 500)
    assert abs(found.size - main) <= 2


def test_empty_interval():
    assert find_zeros(EV, 20.0, 20.0).size == 0
    with pytest.raises(ValueError):
        find_zeros(EV, -1.0, 10.0)


def test_found_zeros_validate_at_higher_precision():
    for g in find_zeros(EV, 0, 100):
        assert abs(EV_FINE.evaluate(float(g))) < 1e-6


def test_chi4_first_zero_against_mpmath_bisection():
    got = find_zeros(EV4, 0, 10)
    assert got.size == 1
    lo, hi = mpmath.mpf(6.0), mpmath.mpf(6.05)

    def z4(t):
        val = mpmath_l4(mpmath.mpc(0.5, t))
        theta = float(
            mpmath.im(mpmath.loggamma(mpmath.mpc(0.75, 0.5 * float(t))))
            + 0.5 * float(t) * mpmath.log(4 / mpmath.pi)
        )
        return (complex(val) * complex(math.cos(theta), math.sin(theta))).real

    flo = z4(lo)
    for _ in range(40):
        mid = (lo + hi) / 2
        if z4(mid) * flo > 0:
            lo = mid
        else:
            hi = mid
    assert abs(got[0] - float((lo + hi) / 2)) < 1e-6


def test_zero_count_warning_on_mismatch(recwarn):
    # scanning [40, 50] with a coarse step still finds both zeros; force a
    # mismatch by lying about the window
    import warnings

    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        find_zeros(EV, 0.0, 13.0)  # no zeros below 13, main term ~ 0.8: fine
        find_zeros(EV, 30.0, 50.0, step=10.0)  # giant step misses zeros
    assert any("zero count sanity" in str(x.message) for x in w)


# --- zero sets ----------------------------------------------------------------

def small_zeroset():
    meta = {
        "plus": ComponentMeta(weight=1.0, central_order=0, second_moment_pole=-1),
        "minus": ComponentMeta(weight=-1.0, central_order=0, second_moment_pole=-1),
    }
    entries = [(1.0, "plus", 1), (1.0, "minus", 1), (2.5, "plus", 3)]
    return ZeroSet.from_entries(0.5, entries, meta)


def test_big_m_cases():
    zs = small_zeroset()
    assert zs.big_m(1.0) == 0.0  # +1 and -1 cancel
    assert zs.big_m(2.5) == 3.0  # weight 1, multiplicity 3
    assert zs.big_m(99.0) == 0.0  # absent ordinate

    single = ZeroSet.from_entries(
        0.5, [(2.0, "c", 3)], {"c": ComponentMeta(weight=2.0)}
    )
    assert single.big_m(2.0) == 6.0

    mod4 = ZeroSet.from_entries(
        0.5, [(6.02, "chi4", 1)], {"chi4": ComponentMeta(weight=-2.0)}
    )
    assert mod4.big_m(6.02) == -2.0


def test_predicted_mean_paper_values():
    zeta = ZeroSet.from_entries(
        0.5, [(14.13, "z", 1)], {"z": ComponentMeta(1.0, 0, -1)}
    )
    assert zeta.predicted_mean() == -1.0

    for rank in (0, 1, 2):
        ec = ZeroSet.from_entries(
            0.5, [(1.0, "e", 1)], {"e": ComponentMeta(1.0, rank, 1)}
        )
        assert ec.predicted_mean() == -2 * rank + 1

    mod4 = ZeroSet.from_entries(
        0.5, [(6.02, "chi4", 1)], {"chi4": ComponentMeta(-2.0, 0, -1)}
    )
    assert mod4.predicted_mean() == 2.0

    # off the half-line the second-moment term drops out
    off = ZeroSet.from_entries(
        0.8, [(1.0, "c", 1)], {"c": ComponentMeta(1.0, 1, -1)}
    )
    assert off.predicted_mean() == pytest.approx(-1 / 0.8)


def test_variance_cases():
    single = ZeroSet.from_entries(0.5, [(1.0, "c", 1)], {"c": ComponentMeta(1.0)})
    assert single.variance(10.0) == pytest.approx(2 / (0.25 + 1.0))  # = 1.6
    assert single.variance(0.5) == 0.0

    zs = small_zeroset()
    caps = [0.5, 1.5, 3.0, 10.0]
    vals = [zs.variance(t) for t in caps]
    assert vals == sorted(vals)  # monotone nondecreasing in T


def test_variance_weight_scaling():
    zs = small_zeroset()
    scaled = zs.scaled(3.0)
    assert scaled.variance(10.0) == pytest.approx(9.0 * zs.variance(10.0))
    assert scaled.big_m(2.5) == 3.0 * zs.big_m(2.5)


def test_g_trig_cases():
    zs = small_zeroset()
    # truncation below the smallest ordinate: constant mean
    assert np.all(zs.g_trig(7.0, 0.5, np.array([2.0, 10.0, 1e5])) == 7.0)

    single = ZeroSet.from_entries(0.5, [(3.0, "c", 1)], {"c": ComponentMeta(1.0)})
    y = np.array([1.0, 2.0, 5.0])
    period = 2 * math.pi / 3.0
    a = single.g_trig_y(0.0, 10.0, y)
    b = single.g_trig_y(0.0, 10.0, y + period)
    assert np.allclose(a, b, atol=1e-12)

    empty = ZeroSet.from_entries(0.5, [], {"c": ComponentMeta(1.0)})
    assert np.all(empty.g_trig(-1.0, 100.0, np.array([2.0, 50.0])) == -1.0)

    with pytest.raises(ValueError):
        zs.g_trig(0.0, 10.0, 1.0)


def test_zeroset_validation():
    with pytest.raises(ValueError):
        ZeroSet.from_entries(0.5, [(-1.0, "c", 1)], {"c": ComponentMeta(1.0)})
    with pytest.raises(ValueError):
        ZeroSet.from_entries(0.5, [(1.0, "c", 0)], {"c": ComponentMeta(1.0)})


# --- files --------------------------------------------------------------------

def test_zero_file_roundtrip(tmp_path):
    zs = small_zeroset()
    path = tmp_path / "z.csv"
    save_zero_file(zs, path)
    back = load_zero_file(path)
    assert back.beta0 == zs.beta0
    assert np.array_equal(back.gammas, zs.gammas)
    assert np.array_equal(back.multiplicities, zs.multiplicities)
    assert back.labels == zs.labels
    assert back.meta == zs.meta
    # second write is byte-identical
    path2 = tmp_path / "z2.csv"
    save_zero_file(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_zero_file_rejects_bad_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# beta0=0.5\n# component=c weight=1\n-3.0,c,1\n")
    with pytest.raises(ValueError, match="bad.csv:3"):
        load_zero_file(path)
    path.write_text("# component=c weight=1\n1.0,c\n")
    with pytest.raises(ValueError, match="bad.csv:2"):
        load_zero_file(path)


def test_lmfdb_style_plain_list(tmp_path):
    path = tmp_path / "plain.txt"
    path.write_text("\n".join(f"{g:.9f}" for g in ZETA_ZEROS_10) + "\n")
    with pytest.raises(ValueError):
        load_zero_file(path)  # needs the default-component flag
    zs = load_zero_file(
        path, plain_component=("zeta", ComponentMeta(1.0, 0, -1))
    )
    assert zs.n_entries() == 10
    assert zs.labels == ("zeta",)
    # ingest and re-emit unchanged at the ZeroSet level
    out = tmp_path / "full.csv"
    save_zero_file(zs, out)
    again = load_zero_file(out)
    assert np.array_equal(again.gammas, zs.gammas)
    assert again.meta == zs.meta
