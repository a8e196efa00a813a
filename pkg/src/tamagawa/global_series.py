"""Global Dirichlet assembly of the local component-number spectra.

Everything is interval arithmetic over rationals: exact products of local
data run over the primes up to a bound B, and the places beyond B are
enclosed by the certified tail factors (``certify`` holds the machine
checks behind the constants).  Decimal output happens only at the edge,
rounded outward.  Per-prime factors whose denominators outgrow the
reporting precision are themselves rounded outward at 60 digits before
entering the product, so a degree-126 field costs no more than a
quadratic one; the slack this adds is below 1e-55 and is absorbed by the
interval.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Sequence, Tuple, Union

from sympy import primerange

from .local_density import PrimeLocalProfile, delta, local_factor_truncated
from .number_field import SplittingData, splitting_for_rationals

__all__ = [
    "BTooSmall",
    "Interval",
    "GlobalReport",
    "DegreeBounds",
    "p_tam_trivial",
    "l_tam_average",
    "p_tam_coefficients",
    "global_report",
    "degree_bounds",
    "bernoulli",
    "zeta_even_ratio",
    "pi_interval",
]

# Per-place tail facts, proved in certify for every norm q >= 5:
#   1 - delta(1)       <= TRIVIAL_TAIL_NUM / q**2
#   mean - 1           <= MEAN_TAIL_NUM / q**2
# and per rational prime p > B the c >= 2 coefficient mass is charged
# COEFF_TAIL_NUM * degree / p**2, which dominates the at most `degree`
# places each holding no more than 2/p**2.
TRIVIAL_TAIL_NUM = 2
MEAN_TAIL_NUM = 12
COEFF_TAIL_NUM = 3

_REPORT_DIGITS = 60
_CAP = 10 ** _REPORT_DIGITS
_LEAK_DEN = 10 ** 40

Rationalish = Union[Fraction, int, str]


class BTooSmall(ValueError):
    """The prime bound cannot support the requested tail estimate."""


def _frac_digits(text: str) -> int:
    t = text.strip()
    return len(t.split(".", 1)[1]) if "." in t else 0


def _dec(x: Fraction, places: int, up: bool) -> str:
    scale = 10 ** places
    q, r = divmod(x.numerator * scale, x.denominator)
    if up and r:
        q += 1
    sign = "-" if q < 0 else ""
    q = abs(q)
    if places == 0:
        return f"{sign}{q}"
    return f"{sign}{q // scale}.{q % scale:0{places}d}"


@dataclass(frozen=True)
class Interval:
    """Closed rational interval certified to contain the target value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval: {self.lo} > {self.hi}")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, value: Rationalish) -> bool:
        v = Fraction(value)
        return self.lo <= v <= self.hi

    def covers_printed(self, text: str) -> bool:
        """True when the printed decimal lies in the interval widened by
        one unit in its last digit."""
        ulp = Fraction(1, 10 ** _frac_digits(text))
        v = Fraction(text)
        return self.lo - ulp <= v <= self.hi + ulp

    def decimals(self, places: int) -> Tuple[str, str]:
        """Outward-rounded decimal bounds."""
        return _dec(self.lo, places, up=False), _dec(self.hi, places, up=True)

    def __mul__(self, other: Union["Interval", Rationalish]) -> "Interval":
        if isinstance(other, Interval):
            if self.lo < 0 or other.lo < 0:
                raise ValueError("interval product needs nonnegative operands")
            return Interval(self.lo * other.lo, self.hi * other.hi)
        r = Fraction(other)
        if r < 0:
            raise ValueError("scaling by a negative factor flips the interval")
        return Interval(self.lo * r, self.hi * r)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Interval":
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"integer power >= 1 required, got {n}")
        if self.lo < 0:
            raise ValueError("interval power needs a nonnegative interval")
        return Interval(self.lo ** n, self.hi ** n)


@dataclass(frozen=True)
class GlobalReport:
    """One field's assembled quantities at a fixed prime bound."""

    label: str
    degree: int
    prime_bound: int
    m_max: int
    p_trivial: Interval
    coefficients: Tuple[Interval, ...]
    average: Interval


def _round_frac(num: int, den: int, up: bool) -> Fraction:
    q, r = divmod(num * _CAP, den)
    if up and r:
        q += 1
    return Fraction(q, _CAP)


def _cap_value(x: Fraction) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """Outward (lo, hi) numerator/denominator pairs, rounded only when the
    exact denominator exceeds the working precision."""
    if x.denominator <= _CAP:
        pair = (x.numerator, x.denominator)
        return pair, pair
    lo, r = divmod(x.numerator * _CAP, x.denominator)
    return (lo, _CAP), (lo + (1 if r else 0), _CAP)


def _cap_vector(nums: Sequence[int], den: int,
                ) -> Tuple[int, List[int], List[int]]:
    if den <= _CAP:
        return den, list(nums), list(nums)
    lo, hi = [], []
    for n in nums:
        q, r = divmod(n * _CAP, den)
        lo.append(q)
        hi.append(q + (1 if r else 0))
    return _CAP, lo, hi


def _product(values: Sequence[int]) -> int:
    """Balanced product; order-independent and subquadratic overall."""
    items = list(values)
    if not items:
        return 1
    while len(items) > 1:
        nxt = [items[i] * items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def _convolve(a: Sequence[int], b: Sequence[int], m_max: int) -> List[int]:
    """Dirichlet convolution of coefficient vectors indexed 1..m_max."""
    out = [0] * m_max
    for i, ai in enumerate(a, start=1):
        if not ai:
            continue
        for j in range(1, m_max // i + 1):
            bj = b[j - 1]
            if bj:
                out[i * j - 1] += ai * bj
    return out


@dataclass
class _Survey:
    """Raw accumulation over all primes up to the bound: outward numerator
    and denominator pairs for the trivial product and the mean product,
    the interval coefficient vector, and the rounded-up truncation leak."""

    m_max: int
    triv: Tuple[Tuple[int, int], Tuple[int, int]]
    mean: Tuple[Tuple[int, int], Tuple[int, int]]
    vec: Tuple[int, List[int], List[int]]
    leak_num: int


def _check_bound(prime_bound: int) -> None:
    if not isinstance(prime_bound, int) or prime_bound < 3:
        raise BTooSmall(
            f"prime bound must be an integer >= 3, got {prime_bound!r}")


def _survey(splitting: SplittingData, prime_bound: int, m_max: int) -> _Survey:
    _check_bound(prime_bound)
    if not isinstance(m_max, int) or m_max < 1:
        raise ValueError(f"m_max must be an integer >= 1, got {m_max!r}")
    triv_pairs, mean_pairs, vec_entries = [], [], []
    leak = 0
    for p in primerange(2, prime_bound + 1):
        if p not in splitting:
            raise ValueError(
                f"splitting data for {splitting.label} stops before prime "
                f"{p}; extend it to the requested bound")
        ptriv = Fraction(1)
        pmean = Fraction(1)
        pden, pnums = 1, [1] + [0] * (m_max - 1)
        for (e, f), g in Counter(splitting.pairs(p)).items():
            profile = PrimeLocalProfile(p, f, e if p in (2, 3) else 1)
            spectrum = delta(profile)
            coeffs, tail_mass = local_factor_truncated(spectrum, m_max)
            ptriv *= coeffs[0] ** g
            pmean *= spectrum.mean() ** g
            leak += g * (-(-tail_mass.numerator * _LEAK_DEN
                           // tail_mass.denominator))
            den = math.lcm(*(c.denominator for c in coeffs))
            nums = [c.numerator * (den // c.denominator) for c in coeffs]
            for _ in range(g):
                pnums = _convolve(pnums, nums, m_max)
                pden *= den
        triv_pairs.append(_cap_value(ptriv))
        mean_pairs.append(_cap_value(pmean))
        vec_entries.append(_cap_vector(pnums, pden))

    def reduce_pairs(pairs):
        lo = (_product([n for (n, _), _ in pairs]),
              _product([d for (_, d), _ in pairs]))
        hi = (_product([n for _, (n, _) in pairs]),
              _product([d for _, (_, d) in pairs]))
        return lo, hi

    while len(vec_entries) > 1:
        nxt = []
        for i in range(0, len(vec_entries) - 1, 2):
            (d1, l1, h1), (d2, l2, h2) = vec_entries[i], vec_entries[i + 1]
            nxt.append((d1 * d2, _convolve(l1, l2, m_max),
                        _convolve(h1, h2, m_max)))
        if len(vec_entries) % 2:
            nxt.append(vec_entries[-1])
        vec_entries = nxt

    return _Survey(m_max, reduce_pairs(triv_pairs), reduce_pairs(mean_pairs),
                   vec_entries[0], leak)


def _trivial_tail(degree: int, prime_bound: int) -> Fraction:
    return Fraction(max(0, prime_bound - TRIVIAL_TAIL_NUM * degree),
                    prime_bound)


def _trivial_from(s: _Survey, degree: int, prime_bound: int) -> Interval:
    t = _trivial_tail(degree, prime_bound)
    (ln, ld), (hn, hd) = s.triv
    return Interval(_round_frac(ln * t.numerator, ld * t.denominator, False),
                    _round_frac(hn, hd, True))


def _average_from(s: _Survey, degree: int, prime_bound: int) -> Interval:
    if MEAN_TAIL_NUM * degree >= prime_bound:
        raise BTooSmall(
            f"prime bound {prime_bound} cannot control the mean tail at "
            f"degree {degree}; need more than {MEAN_TAIL_NUM * degree}")
    (ln, ld), (hn, hd) = s.mean
    return Interval(
        _round_frac(ln, ld, False),
        _round_frac(hn * prime_bound,
                    hd * (prime_bound - MEAN_TAIL_NUM * degree), True))


def _coefficients_from(s: _Survey, degree: int,
                       prime_bound: int) -> List[Interval]:
    den, lo_vec, hi_vec = s.vec
    t = _trivial_tail(degree, prime_bound)
    slack = (Fraction(s.leak_num, _LEAK_DEN)
             + Fraction(COEFF_TAIL_NUM * degree, prime_bound))
    out = []
    for m in range(1, s.m_max + 1):
        lo = _round_frac(lo_vec[m - 1] * t.numerator,
                         den * t.denominator, False)
        hi = _round_frac(hi_vec[m - 1], den, True)
        if m >= 2:
            hi += slack
        out.append(Interval(lo, hi))
    return out


def p_tam_trivial(splitting: SplittingData, prime_bound: int) -> Interval:
    """Probability that every place has a single component: the exact
    product of delta(1) up to the bound times the certified tail."""
    return _trivial_from(_survey(splitting, prime_bound, 1),
                         splitting.degree, prime_bound)


def l_tam_average(splitting: SplittingData, prime_bound: int) -> Interval:
    """Mean product-of-component-numbers: exact local means up to the
    bound, tail between 1 and the certified excess factor."""
    return _average_from(_survey(splitting, prime_bound, 1),
                         splitting.degree, prime_bound)


def p_tam_coefficients(splitting: SplittingData, m_max: int,
                       prime_bound: int) -> List[Interval]:
    """Dirichlet coefficients for m = 1..m_max.  The m=1 entry carries
    only the trivial tail; higher entries also absorb the truncation leak
    below the bound and the certified above-bound contribution."""
    return _coefficients_from(_survey(splitting, prime_bound, m_max),
                              splitting.degree, prime_bound)


def global_report(splitting: SplittingData, prime_bound: int = 10 ** 4,
                  m_max: int = 4) -> GlobalReport:
    """All assembled quantities for one field in a single pass over the
    primes up to the bound."""
    d = splitting.degree
    if MEAN_TAIL_NUM * d >= prime_bound:
        raise BTooSmall(
            f"prime bound {prime_bound} cannot control the mean tail at "
            f"degree {d}; need more than {MEAN_TAIL_NUM * d}")
    s = _survey(splitting, prime_bound, m_max)
    coeffs = _coefficients_from(s, d, prime_bound)
    return GlobalReport(splitting.label, d, prime_bound, m_max,
                        coeffs[0], tuple(coeffs),
                        _average_from(s, d, prime_bound))


_BERNOULLIS: List[Fraction] = [Fraction(1)]


def bernoulli(index: int) -> Fraction:
    """Bernoulli number by the binomial recurrence (B_1 = -1/2 flavor)."""
    if not isinstance(index, int) or index < 0:
        raise ValueError(f"index must be an integer >= 0, got {index!r}")
    while len(_BERNOULLIS) <= index:
        m = len(_BERNOULLIS)
        acc = sum(math.comb(m + 1, k) * bk
                  for k, bk in enumerate(_BERNOULLIS))
        _BERNOULLIS.append(Fraction(-acc, m + 1))
    return _BERNOULLIS[index]


def zeta_even_ratio(n: int) -> Fraction:
    """zeta(2n) / pi**(2n) as an exact rational."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"need an integer n >= 1, got {n!r}")
    r = bernoulli(2 * n) * Fraction(4 ** n, 2 * math.factorial(2 * n))
    return r if n % 2 == 1 else -r


@lru_cache(maxsize=1)
def pi_interval() -> Interval:
    from mpmath import mp
    with mp.workdps(_REPORT_DIGITS + 20):
        text = mp.nstr(mp.pi, _REPORT_DIGITS + 10)
    center = Fraction(text)
    pad = Fraction(1, 10 ** (_REPORT_DIGITS - 5))
    return Interval(center - pad, center + pad)


@dataclass(frozen=True)
class DegreeBounds:
    """Degree-uniform sandwich: p_lo < trivial coefficient < p_hi and
    l_lo < average < l_hi for every field of this degree."""

    degree: int
    p_lo: Interval
    p_hi: Interval
    l_lo: Interval
    l_hi: Interval


@lru_cache(maxsize=None)
def _rational_baselines(prime_bound: int) -> Tuple[Interval, Interval]:
    splitting = splitting_for_rationals(primerange(2, prime_bound + 1))
    return (p_tam_trivial(splitting, prime_bound),
            l_tam_average(splitting, prime_bound))


@lru_cache(maxsize=None)
def degree_bounds(degree: int, prime_bound: int = 10 ** 4) -> DegreeBounds:
    """The four bounding quantities at a given degree: powers of the
    rational-field values below, even-zeta values above."""
    if not isinstance(degree, int) or degree < 1:
        raise ValueError(f"degree must be an integer >= 1, got {degree!r}")
    base_p, base_l = _rational_baselines(prime_bound)
    z2 = zeta_even_ratio(degree)
    z4 = zeta_even_ratio(2 * degree)
    pipow = pi_interval() ** (2 * degree)
    return DegreeBounds(
        degree,
        p_lo=base_p ** degree,
        p_hi=Interval(1 / (z2 * pipow.hi), 1 / (z2 * pipow.lo)),
        l_lo=Interval((z2 / z4) / pipow.hi, (z2 / z4) / pipow.lo),
        l_hi=base_l ** degree,
    )
