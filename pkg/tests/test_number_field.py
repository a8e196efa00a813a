import pytest

from tamagawa.number_field import (
    IndexDivisor,
    NotSquarefree,
    Provenance,
    RamifiedUnsupported,
    cyclotomic_splitting,
    factor_prime,
    field_from_poly,
    multiquadratic_splitting,
    parse_overrides,
    quadratic_field,
    splitting_for_cyclotomic,
    splitting_for_field,
    splitting_for_multiquadratic,
)

PRIMES_TO_100 = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]


def squarefree(n):
    n = abs(n)
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def quadratic_symbol_law(D, p):
    """Brute-force splitting law for Q(sqrt(D)): ramified iff p divides
    the discriminant, split iff disc is a nonzero square mod p.  At p=2
    squares mod 2 see nothing, so use the mod-8 law directly."""
    if p == 2:
        if D % 4 != 1:
            return [(2, 1)]
        return [(1, 1), (1, 1)] if D % 8 == 1 else [(1, 2)]
    disc = D if D % 4 == 1 else 4 * D
    if disc % p == 0:
        return [(2, 1)]
    if any((x * x - disc) % p == 0 for x in range(p)):
        return [(1, 1), (1, 1)]
    return [(1, 2)]


def test_field_from_poly_text():
    f = field_from_poly("x^4+5x^2-6x+3")
    assert f.coeffs == (1, 0, 5, -6, 3)
    assert f.degree == 4
    g = field_from_poly([1, 0, 1], label="gauss")
    assert g.label == "gauss"


def test_field_rejects_bad_polys():
    with pytest.raises(ValueError):
        field_from_poly("x^2-1")
    with pytest.raises(ValueError):
        field_from_poly([2, 0, 1])
    with pytest.raises(ValueError):
        field_from_poly([1])


def test_quadratic_field_polynomials():
    assert quadratic_field(-1).coeffs == (1, 0, 1)
    assert quadratic_field(17).coeffs == (1, -1, -4)
    assert quadratic_field(-7).coeffs == (1, -1, 2)
    assert quadratic_field(-2).coeffs == (1, 0, 2)


@pytest.mark.parametrize("D", [0, 1, 12, -4, 50, 98])
def test_quadratic_field_rejects(D):
    with pytest.raises(NotSquarefree):
        quadratic_field(D)


def test_factor_prime_examples():
    gauss = quadratic_field(-1)
    assert factor_prime(gauss, 5) == [(1, 1), (1, 1)]
    assert factor_prime(gauss, 2) == [(2, 1)]
    assert factor_prime(quadratic_field(17), 2) == [(1, 1), (1, 1)]


def test_factor_prime_rejects_composite():
    with pytest.raises(ValueError):
        factor_prime(quadratic_field(-1), 6)


def test_index_divisor_detected():
    # 2 always divides the index of Z[x]/(x^3 - x^2 - 2x - 8)
    f = field_from_poly("x^3-x^2-2x-8")
    with pytest.raises(IndexDivisor) as exc:
        factor_prime(f, 2)
    assert exc.value.p == 2
    assert factor_prime(f, 3) == [(1, 3)]


def test_quadratic_agrees_with_symbol_law():
    for D in range(-200, 201):
        if D in (0, 1) or not squarefree(D):
            continue
        f = quadratic_field(D)
        for p in PRIMES_TO_100:
            assert factor_prime(f, p) == quadratic_symbol_law(D, p), (D, p)


def test_cyclotomic_splitting_examples():
    assert cyclotomic_splitting(5, 5) == [(4, 1)]
    assert cyclotomic_splitting(5, 2) == [(1, 4)]
    assert cyclotomic_splitting(7, 2) == [(1, 3), (1, 3)]
    with pytest.raises(ValueError):
        cyclotomic_splitting(2, 3)
    with pytest.raises(ValueError):
        cyclotomic_splitting(9, 3)


@pytest.mark.parametrize("a", [3, 5, 7, 11, 13, 31])
@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
def test_cyclotomic_inertia_degree_by_powering(a, p):
    pairs = cyclotomic_splitting(a, p)
    assert sum(e * f for e, f in pairs) == a - 1
    if p != a:
        f = pairs[0][1]
        assert pow(p, f, a) == 1
        assert all(pow(p, j, a) != 1 for j in range(1, f))


def test_multiquadratic_examples():
    assert multiquadratic_splitting([17], 2) == [(1, 1), (1, 1)]
    assert multiquadratic_splitting([17, 41], 2) == [(1, 1)] * 4
    assert multiquadratic_splitting([17], 3) == [(1, 2)]
    assert multiquadratic_splitting([17], 17) == [(2, 1)]
    assert multiquadratic_splitting([17, 41], 17) == [(2, 2)]


def test_multiquadratic_matches_quadratic_subfield():
    for p in PRIMES_TO_100:
        assert multiquadratic_splitting([17], p) == \
            factor_prime(quadratic_field(17), p), p


@pytest.mark.parametrize("p", PRIMES_TO_100)
def test_multiquadratic_degree_sum(p):
    for ps in ([17], [17, 41], [17, 41, 89], [17, 41, 89, 97]):
        pairs = multiquadratic_splitting(ps, p)
        assert sum(e * f for e, f in pairs) == 2 ** len(ps)


def test_multiquadratic_rejects_wrong_residue_class():
    with pytest.raises(RamifiedUnsupported):
        multiquadratic_splitting([5], 3)
    with pytest.raises(ValueError):
        multiquadratic_splitting([], 3)
    with pytest.raises(ValueError):
        multiquadratic_splitting([17, 17], 3)


def test_parse_overrides():
    got = parse_overrides('{"2": [[1, 2], [2, 1]], "3": [[1, 4]]}')
    assert got == {2: ((1, 2), (2, 1)), 3: ((1, 4),)}
    with pytest.raises(ValueError):
        parse_overrides('{"4": [[1, 1]]}')
    with pytest.raises(ValueError):
        parse_overrides('{"5": []}')
    with pytest.raises(ValueError):
        parse_overrides('[1, 2]')


def test_splitting_for_field_with_override():
    f = field_from_poly("x^3-x^2-2x-8")
    with pytest.raises(IndexDivisor):
        splitting_for_field(f, [2, 3, 5])
    data = splitting_for_field(f, [2, 3, 5],
                               overrides={2: ((1, 1), (1, 1), (1, 1))})
    assert data.pairs(2) == ((1, 1), (1, 1), (1, 1))
    assert data.provenance[2] is Provenance.USER_OVERRIDE
    assert data.provenance[3] is Provenance.DEDEKIND
    assert 5 in data and 7 not in data


def test_splitting_data_validates_degree_sum():
    f = quadratic_field(-1)
    data = splitting_for_field(f, [3, 5])
    with pytest.raises(ValueError):
        data.put(7, [(1, 1)], Provenance.USER_OVERRIDE)
    with pytest.raises(ValueError):
        data.put(7, [(1, 0), (1, 1)], Provenance.USER_OVERRIDE)


def test_analytic_builders():
    cyc = splitting_for_cyclotomic(5, [2, 3, 5])
    assert cyc.degree == 4 and cyc.pairs(5) == ((4, 1),)
    assert cyc.provenance[2] is Provenance.ANALYTIC
    mq = splitting_for_multiquadratic([17, 41], [2, 17])
    assert mq.degree == 4
    assert mq.pairs(2) == ((1, 1), (1, 1), (1, 1), (1, 1))
    assert mq.pairs(17) == ((2, 2),)
