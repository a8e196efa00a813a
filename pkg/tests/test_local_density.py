from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamagawa.local_density import (
    NoExactFormula,
    PrimeLocalProfile,
    delta,
    delta_reference,
    local_factor_truncated,
    local_mean,
)
from tamagawa.step_tables import PrimeClass

EXACT_BRANCH_PROFILES = (
    [PrimeLocalProfile(p, f) for p, f in
     [(5, 1), (7, 1), (11, 1), (13, 1), (5, 2), (7, 2)]]
    + [PrimeLocalProfile(3, f) for f in (1, 2, 3)]
    + [PrimeLocalProfile(2, f, e) for f in (1, 2, 3, 4) for e in (1, 2)]
)


def test_profile_fields_and_class():
    pr = PrimeLocalProfile(2, 3, 4)
    assert pr.q == 8
    assert pr.prime_class is PrimeClass.ABOVE_2
    assert PrimeLocalProfile(3).q == 3
    assert PrimeLocalProfile(49 // 7, 2).prime_class is PrimeClass.NOT_ABOVE_6


@pytest.mark.parametrize("bad", [(4, 1, 1), (1, 1, 1), (9, 1, 1), (91, 1, 1),
                                 (5, 0, 1), (5, 1, 0), (-7, 1, 1)])
def test_profile_rejects_invalid(bad):
    with pytest.raises(ValueError):
        PrimeLocalProfile(*bad)


def test_delta_is_memoized_by_residue_data():
    a = delta(PrimeLocalProfile(7, 1, 1))
    b = delta(PrimeLocalProfile(7, 1, 1))
    assert a is b


def test_delta_known_values():
    q = Fraction(7)
    num = q * (6 * q ** 7 + 9 * q ** 6 + 9 * q ** 5 + 7 * q ** 4
               + 8 * q ** 3 + 7 * q ** 2 + 9 * q + 6)
    den = 6 * (q + 1) ** 2 * (q ** 8 + q ** 6 + q ** 4 + q ** 2 + 1)
    assert delta(PrimeLocalProfile(7)).delta(1) == 1 - num / den
    assert delta(PrimeLocalProfile(2)).delta(1) == Fraction(241, 396)
    assert delta(PrimeLocalProfile(3, 2)).total() == 1


@pytest.mark.parametrize("profile", EXACT_BRANCH_PROFILES,
                         ids=lambda p: f"p{p.p}f{p.f}e{p.e}")
def test_delta_matches_reference_on_exact_branches(profile):
    spec = delta(profile)
    for c in range(1, 13):
        assert spec.delta(c) == delta_reference(profile, c), f"c={c}"


def test_reference_covers_ramified_short_places():
    # places above 5 with e > 1 reduce the same way as unramified ones
    wild = PrimeLocalProfile(5, 1, 4)
    spec = delta(wild)
    for c in (1, 2, 5):
        assert spec.delta(c) == delta_reference(wild, c)


@pytest.mark.parametrize("profile", [PrimeLocalProfile(3, 1, 2),
                                     PrimeLocalProfile(3, 2, 5),
                                     PrimeLocalProfile(2, 1, 3),
                                     PrimeLocalProfile(2, 4, 6)])
def test_reference_refuses_deep_branches(profile):
    with pytest.raises(NoExactFormula):
        delta_reference(profile, 1)
    assert delta(profile).total() == 1


def test_mean_known_bound():
    assert local_mean(delta(PrimeLocalProfile(2))) > Fraction(149, 100)


@pytest.mark.parametrize("profile", EXACT_BRANCH_PROFILES
                         + [PrimeLocalProfile(3, 1, e) for e in (2, 3, 4)]
                         + [PrimeLocalProfile(2, 1, e) for e in (3, 4, 5)],
                         ids=lambda p: f"p{p.p}f{p.f}e{p.e}")
def test_mean_sandwich(profile):
    spec = delta(profile)
    d1 = spec.delta(1)
    mean = local_mean(spec)
    assert 2 - d1 <= mean
    assert mean <= 5 - 4 * d1 + (1 - d1) / (profile.q - 1)


@pytest.mark.parametrize("profile",
                         [PrimeLocalProfile(p, f) for p, f in
                          [(5, 1), (7, 1), (11, 1), (13, 1), (5, 2), (7, 2),
                           (23, 1), (5, 3)]],
                         ids=lambda p: f"q{p.q}")
def test_short_place_tail_bounds(profile):
    spec = delta(profile)
    q = profile.q
    assert 1 - spec.delta(1) <= Fraction(2, q * q)
    assert local_mean(spec) < 1 + Fraction(12, q * q)


def test_truncated_factor_smallest_cut():
    spec = delta(PrimeLocalProfile(2))
    coeffs, rest = local_factor_truncated(spec, 1)
    assert coeffs == (Fraction(241, 396),)
    assert rest == 1 - Fraction(241, 396)


def test_truncated_factor_four_terms_above5():
    pr = PrimeLocalProfile(5)
    spec = delta(pr)
    coeffs, rest = local_factor_truncated(spec, 4)
    assert coeffs == tuple(delta_reference(pr, c) for c in (1, 2, 3, 4))
    q = Fraction(5)
    geom = spec.tail * q ** -4 / (q - 1)
    assert rest == geom
    assert rest == 1 - sum(coeffs)


def test_truncated_factor_rejects_zero():
    with pytest.raises(ValueError):
        local_factor_truncated(delta(PrimeLocalProfile(5)), 0)


@settings(max_examples=30, deadline=None)
@given(p=st.sampled_from([2, 3, 5, 7, 11]), f=st.integers(1, 3),
       e=st.integers(1, 4), m=st.integers(1, 12))
def test_truncated_factor_mass_accounting(p, f, e, m):
    spec = delta(PrimeLocalProfile(p, f, e))
    coeffs, rest = local_factor_truncated(spec, m)
    assert len(coeffs) == m
    assert sum(coeffs) + rest == 1
    assert rest > 0
