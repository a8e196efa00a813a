"""Interval products over primes, tail control, and the degree sandwich."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import primerange

from tamagawa.certify import certificate_lines
from tamagawa.global_series import (BTooSmall, Interval, bernoulli,
                                    degree_bounds, global_report,
                                    l_tam_average, p_tam_coefficients,
                                    p_tam_trivial, pi_interval,
                                    zeta_even_ratio)
from tamagawa.number_field import (splitting_for_quadratic,
                                   splitting_for_rationals)

B4 = 10 ** 4
PRIMES_B4 = list(primerange(2, B4 + 1))


@pytest.fixture(scope="module")
def gauss_report():
    return global_report(splitting_for_quadratic(-1, PRIMES_B4), B4)


@pytest.fixture(scope="module")
def sqrt_m7_report():
    return global_report(splitting_for_quadratic(-7, PRIMES_B4), B4)


# ---------------------------------------------------------------- intervals

def test_interval_rejects_reversed_endpoints():
    with pytest.raises(ValueError):
        Interval(Fraction(1, 2), Fraction(1, 3))


def test_interval_contains_endpoints_and_strings():
    box = Interval(Fraction(1, 3), Fraction(1, 2))
    assert box.contains(Fraction(1, 3))
    assert box.contains("0.4")
    assert box.contains(Fraction(17, 50))
    assert not box.contains(Fraction(33, 100))
    assert not box.contains(Fraction(51, 100))


def test_interval_width_and_midpoint():
    box = Interval(Fraction(1, 4), Fraction(3, 4))
    assert box.width == Fraction(1, 2)
    assert box.midpoint == Fraction(1, 2)


def test_covers_printed_allows_one_final_ulp():
    box = Interval(Fraction(1, 3), Fraction(1, 2))
    assert box.covers_printed("0.4")
    assert box.covers_printed("0.33")      # 0.33 + 0.01 reaches 1/3
    assert box.covers_printed("0.51")      # 0.51 - 0.01 reaches 1/2
    assert not box.covers_printed("0.32")
    assert not box.covers_printed("0.52")
    assert box.covers_printed("0.3")       # coarse print, wide ulp
    assert not box.covers_printed("0.2")


def test_decimals_round_outward_both_signs():
    assert Interval(Fraction(1, 3), Fraction(2, 3)).decimals(4) \
        == ("0.3333", "0.6667")
    assert Interval(Fraction(-2, 3), Fraction(-1, 3)).decimals(2) \
        == ("-0.67", "-0.33")
    assert Interval(Fraction(5), Fraction(5)).decimals(0) == ("5", "5")


def test_interval_products_and_powers():
    a = Interval(Fraction(1, 2), Fraction(2, 3))
    b = Interval(Fraction(3), Fraction(4))
    assert a * b == Interval(Fraction(3, 2), Fraction(8, 3))
    assert 2 * a == Interval(Fraction(1), Fraction(4, 3))
    assert a ** 2 == Interval(Fraction(1, 4), Fraction(4, 9))
    with pytest.raises(ValueError):
        a * Interval(Fraction(-1), Fraction(1))
    with pytest.raises(ValueError):
        a * Fraction(-2)
    with pytest.raises(ValueError):
        a ** 0
    with pytest.raises(ValueError):
        Interval(Fraction(-1), Fraction(1)) ** 2


rationals = st.fractions(min_value=0, max_value=8,
                         max_denominator=10 ** 6)


@settings(max_examples=150, deadline=None)
@given(a=rationals, b=rationals, c=rationals, d=rationals,
       x=st.fractions(min_value=0, max_value=1, max_denominator=997),
       y=st.fractions(min_value=0, max_value=1, max_denominator=991))
def test_interval_product_contains_member_products(a, b, c, d, x, y):
    first = Interval(min(a, b), max(a, b))
    second = Interval(min(c, d), max(c, d))
    u = first.lo + x * first.width
    v = second.lo + y * second.width
    assert (first * second).contains(u * v)


@settings(max_examples=100, deadline=None)
@given(a=rationals, b=rationals, places=st.integers(0, 8))
def test_decimals_enclose_the_interval(a, b, places):
    box = Interval(min(a, b), max(a, b))
    lo_s, hi_s = box.decimals(places)
    assert Fraction(lo_s) <= box.lo
    assert Fraction(hi_s) >= box.hi
    assert Fraction(hi_s) - Fraction(lo_s) <= box.width + 2 * Fraction(
        1, 10 ** places)


# ------------------------------------------------------- analytic constants

def test_bernoulli_values():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(4) == Fraction(-1, 30)
    assert bernoulli(12) == Fraction(-691, 2730)
    assert bernoulli(7) == 0
    with pytest.raises(ValueError):
        bernoulli(-1)


def test_zeta_even_ratio_small_cases():
    assert zeta_even_ratio(1) == Fraction(1, 6)    # zeta(2) = pi^2/6
    assert zeta_even_ratio(2) == Fraction(1, 90)   # zeta(4) = pi^4/90
    assert zeta_even_ratio(3) == Fraction(1, 945)
    with pytest.raises(ValueError):
        zeta_even_ratio(0)


def test_pi_interval_is_tight_around_pi():
    box = pi_interval()
    assert box.covers_printed(
        "3.14159265358979323846264338327950288419716939937510")
    assert box.contains(Fraction(
        "3.1415926535897932384626433832795028841971693993751058209749"))
    assert box.width < Fraction(1, 10 ** 50)


def test_degree_bounds_degree_one_pins():
    bounds = degree_bounds(1, B4)
    assert bounds.p_hi.covers_printed("0.6079")   # 6 / pi^2
    assert bounds.l_lo.covers_printed("1.5198")   # 15 / pi^2
    assert bounds.p_lo.covers_printed("0.5054")
    assert bounds.l_hi.contains("1.8187")


def test_degree_bounds_close_onto_one():
    rows = [degree_bounds(d, 2000) for d in (1, 2, 4)]
    for tight, loose in zip(rows[1:], rows):
        assert tight.p_hi.lo > loose.p_hi.hi      # 1/zeta(2d) climbs to 1
        assert tight.l_lo.hi < loose.l_lo.lo      # zeta(2d)/zeta(4d) falls
    assert rows[-1].p_hi.hi < 1
    assert rows[-1].l_lo.lo > 1
    with pytest.raises(ValueError):
        degree_bounds(0)


# ------------------------------------------------------------ certificates

def test_certificate_suite_passes():
    lines = list(certificate_lines())
    assert len(lines) >= 8
    assert all(line.startswith(("PASS", "NOTE")) for line in lines)
    assert any("crossover" in line for line in lines)


# ------------------------------------------------------------- assemblies

def test_rational_report_structure():
    splitting = splitting_for_rationals(primerange(2, 2001))
    report = global_report(splitting, 2000, m_max=8)
    assert report.label == "Q"
    assert report.degree == 1
    assert report.p_trivial is report.coefficients[0]
    assert report.p_trivial.covers_printed("0.5054")
    assert all(c.lo >= 0 for c in report.coefficients)
    assert sum(c.midpoint for c in report.coefficients) <= Fraction(101, 100)
    # the first few coefficients dominate: half the mass is at m = 1
    assert report.coefficients[0].lo > report.coefficients[1].hi


def test_rational_average_exceeds_every_partial():
    splitting = splitting_for_rationals(primerange(2, 2001))
    average = l_tam_average(splitting, 2000)
    assert average.lo > Fraction("1.818")
    assert average.hi < Fraction("1.830")


def test_gaussian_field_report(gauss_report):
    assert gauss_report.p_trivial.covers_printed("0.529")
    assert gauss_report.average.covers_printed("1.678")
    assert gauss_report.coefficients[1].covers_printed("0.378")


def test_sqrt_minus_seven_report(sqrt_m7_report):
    assert sqrt_m7_report.p_trivial.covers_printed("0.349")
    assert sqrt_m7_report.average.covers_printed("2.376")
    assert sqrt_m7_report.coefficients[1].covers_printed("0.370")
    assert sqrt_m7_report.coefficients[2].covers_printed("0.082")


def test_trivial_routes_agree_to_reporting_precision(sqrt_m7_report):
    # the standalone product caps reduced per-prime values, the report
    # route caps convolution vectors; they may differ past digit 55
    solo = p_tam_trivial(splitting_for_quadratic(-7, PRIMES_B4), B4)
    tol = Fraction(1, 10 ** 55)
    assert abs(solo.lo - sqrt_m7_report.p_trivial.lo) <= tol
    assert abs(solo.hi - sqrt_m7_report.p_trivial.hi) <= tol


def test_intervals_nest_as_the_bound_grows():
    for build in (p_tam_trivial, l_tam_average):
        coarse = build(splitting_for_quadratic(17, primerange(2, 1001)), 1000)
        fine = build(splitting_for_quadratic(17, PRIMES_B4), B4)
        assert coarse.lo <= fine.lo <= fine.hi <= coarse.hi
        assert fine.width < coarse.width


def test_sandwich_is_strict_at_degree_two(gauss_report):
    bounds = degree_bounds(2, B4)
    assert bounds.p_lo.hi < gauss_report.p_trivial.lo
    assert gauss_report.p_trivial.hi < bounds.p_hi.lo
    assert bounds.l_lo.hi < gauss_report.average.lo
    assert gauss_report.average.hi < bounds.l_hi.lo


def test_small_bounds_are_rejected():
    splitting = splitting_for_rationals(primerange(2, 101))
    with pytest.raises(BTooSmall):
        p_tam_trivial(splitting, 2)
    with pytest.raises(BTooSmall):
        l_tam_average(splitting, 12)
    quartic = splitting_for_quadratic(17, primerange(2, 101))
    with pytest.raises(BTooSmall):
        l_tam_average(quartic, 24)
    with pytest.raises(ValueError):
        p_tam_coefficients(splitting, 0, 100)


def test_short_splitting_data_is_reported():
    splitting = splitting_for_quadratic(17, primerange(2, 50))
    with pytest.raises(ValueError, match="stops before prime"):
        p_tam_trivial(splitting, 100)
