"""Local component-number densities at one finite place.

``delta`` is the canonical route: the chain-generated spectrum, exact and
memoized.  ``delta_reference`` evaluates independent closed forms on the
branches that have them, for cross-validation only.  The moment helpers
extract what the global Dirichlet assembly needs: leading coefficients,
residual mass, and the exact mean.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Dict, Tuple

from .markov import DensitySpectrum, delta_spectrum
from .step_tables import PrimeClass

__all__ = [
    "NoExactFormula",
    "PrimeLocalProfile",
    "delta",
    "delta_reference",
    "local_mean",
    "local_factor_truncated",
]


class NoExactFormula(ValueError):
    """The requested branch has no exact closed form to evaluate."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0 or n % 3 == 0:
        return False
    d = 5
    top = isqrt(n)
    while d <= top:
        if n % d == 0 or n % (d + 2) == 0:
            return False
        d += 6
    return True


@dataclass(frozen=True)
class PrimeLocalProfile:
    """One place of a number field: residue characteristic p, inertia
    degree f, ramification index e.  The residue field has q = p**f
    elements."""

    p: int
    f: int = 1
    e: int = 1

    def __post_init__(self) -> None:
        if not _is_prime(self.p):
            raise ValueError(f"residue characteristic {self.p} is not prime")
        if self.f < 1 or self.e < 1:
            raise ValueError(f"need f >= 1 and e >= 1, got f={self.f} e={self.e}")

    @property
    def q(self) -> int:
        return self.p ** self.f

    @property
    def prime_class(self) -> PrimeClass:
        return PrimeClass.of_prime(self.p)


_MEMO: Dict[Tuple[int, int, PrimeClass], DensitySpectrum] = {}
_MEMO_LOCK = threading.Lock()

# Above this norm the one-node chain is folded via the closed forms
# instead: same exact values (equality is pinned at the crossover by the
# test suite), but no q**30-sized gcd churn and no memo entry for norms
# that never repeat.
_CLOSED_FORM_MIN_Q = 10 ** 6


def _short_spectrum_closed(q: int, c_cut: int = 8) -> DensitySpectrum:
    qf = Fraction(q)
    finite = {c: _ref_short(qf, c) for c in range(1, c_cut + 1)}
    tail = qf ** 8 * (qf - 1) ** 2 / (2 * (qf ** 10 - 1))
    return DensitySpectrum(q=qf, c_cut=c_cut, finite=finite, tail=tail)


def delta(profile: PrimeLocalProfile) -> DensitySpectrum:
    """Canonical spectrum for the place; exact for every c (the finite
    block directly, the geometric tail beyond it)."""
    key = (profile.q, profile.e, profile.prime_class)
    if key[2] is PrimeClass.NOT_ABOVE_6 and key[0] > _CLOSED_FORM_MIN_Q:
        return _short_spectrum_closed(key[0])
    with _MEMO_LOCK:
        spec = _MEMO.get(key)
    if spec is None:
        spec = delta_spectrum(key[0], key[1], key[2])
        with _MEMO_LOCK:
            _MEMO.setdefault(key, spec)
    return spec


def local_mean(spectrum: DensitySpectrum) -> Fraction:
    """Exact Sum of c * delta(c) over all c >= 1."""
    return spectrum.mean()


def local_factor_truncated(spectrum: DensitySpectrum,
                           m_max: int) -> Tuple[Tuple[Fraction, ...], Fraction]:
    """Leading coefficients (delta(1), ..., delta(m_max)) and the exact
    mass remaining above m_max."""
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}")
    coeffs = tuple(spectrum.delta(c) for c in range(1, m_max + 1))
    return coeffs, spectrum.mass_above(m_max)


def delta_reference(profile: PrimeLocalProfile, c: int) -> Fraction:
    """Closed-form density, available away from 2 and 3 for every e, above
    3 for e=1, and above 2 for e in {1, 2}.  Raises NoExactFormula on any
    other branch."""
    if c < 1:
        return Fraction(0)
    q = Fraction(profile.q)
    pc, e = profile.prime_class, profile.e
    if pc is PrimeClass.NOT_ABOVE_6:
        return _ref_short(q, c)
    if pc is PrimeClass.ABOVE_3 and e == 1:
        return _ref_above3_e1(q, c)
    if pc is PrimeClass.ABOVE_2 and e == 1:
        return _ref_above2_e1(q, c)
    if pc is PrimeClass.ABOVE_2 and e == 2:
        return _ref_above2_e2(q, c)
    raise NoExactFormula(
        f"no closed form for p={profile.p}, e={e}; use delta() instead")


def _ref_short(q: Fraction, c: int) -> Fraction:
    D = (q + 1) ** 2 * (q ** 8 + q ** 6 + q ** 4 + q ** 2 + 1)
    if c == 1:
        num = q * (6 * q ** 7 + 9 * q ** 6 + 9 * q ** 5 + 7 * q ** 4
                   + 8 * q ** 3 + 7 * q ** 2 + 9 * q + 6)
        return 1 - num / (6 * D)
    if c == 2:
        num = q * (2 * q ** 7 + 2 * q ** 6 + q ** 5 + q ** 4 + 2 * q ** 3
                   + q ** 2 + 2 * q + 2)
        return num / (2 * D)
    if c == 3:
        return q ** 2 * (q ** 4 + 1) / (
            2 * (q + 1) * (q ** 8 + q ** 6 + q ** 4 + q ** 2 + 1))
    if c == 4:
        # numerator 3q^2 - 2q + 1: the -2q - 1 variant misses total mass
        # one by exactly q^3 (q-1) / (3 (q^10 - 1))
        return q ** 3 * (3 * q ** 2 - 2 * q + 1) / (
            6 * (q + 1) * (q ** 8 + q ** 6 + q ** 4 + q ** 2 + 1))
    return (q ** 10 - 2 * q ** 9 + q ** 8) / (2 * q ** c * (q ** 10 - 1))


def _ref_above3_e1(q: Fraction, c: int) -> Fraction:
    if c == 1:
        # the 6q^4 term is forced: dropping it pushes the branch total
        # above one by q^4 (q-1)^2 / (q^2 (q+1) (q^10 - 1))
        num = (q - 1) * (6 * q ** 10 + 9 * q ** 9 + 7 * q ** 8 + 8 * q ** 7
                         + 7 * q ** 6 + 9 * q ** 5 + 6 * q ** 4 + 6 * q + 3)
        return 1 - num / (6 * q ** 2 * (q + 1) * (q ** 10 - 1))
    if c == 2:
        num = (q - 1) * (2 * q ** 11 + 2 * q ** 10 + q ** 9 + 2 * q ** 8
                         + q ** 7 + 2 * q ** 6 + 2 * q ** 5 + 2 * q ** 2 - 1)
        return num / (2 * q ** 3 * (q + 1) * (q ** 10 - 1))
    if c == 3:
        return (q - 1) * (q ** 10 + q ** 7 + q - 1) / (2 * q ** 4 * (q ** 10 - 1))
    if c == 4:
        return (q - 1) * (q ** 10 + q ** 9 + 3 * q - 3) / (6 * q ** 5 * (q ** 10 - 1))
    return (q - 1) ** 2 / (2 * q ** (c + 1) * (q ** 10 - 1))


def _ref_above2_e1(q: Fraction, c: int) -> Fraction:
    if c == 1:
        num = (q - 1) * (6 * q ** 10 + 9 * q ** 9 + 7 * q ** 8 + 8 * q ** 7
                         + 7 * q ** 6 + 9 * q ** 5 + 6 * q ** 4 + 6 * q + 3)
        return 1 - num / (6 * q * (q + 1) * (q ** 10 - 1))
    if c == 2:
        num = (q - 1) * (2 * q ** 11 + 2 * q ** 10 + q ** 9 + 2 * q ** 8
                         + q ** 7 + 2 * q ** 6 + 2 * q ** 5 + 2 * q ** 2 - 1)
        return num / (2 * q ** 2 * (q + 1) * (q ** 10 - 1))
    if c == 3:
        return (q - 1) * (q ** 10 + q ** 7 + q - 1) / (2 * q ** 3 * (q ** 10 - 1))
    if c == 4:
        return (q - 1) * (q ** 10 + q ** 9 + 3 * q - 3) / (6 * q ** 4 * (q ** 10 - 1))
    return (q - 1) ** 2 / (2 * q ** c * (q ** 10 - 1))


def _ref_above2_e2(q: Fraction, c: int) -> Fraction:
    if c == 1:
        a = (q - 1) * (6 * q ** 18 + 10 * q ** 17 + 8 * q ** 16 + 7 * q ** 15
                       + 9 * q ** 14 + 6 * q ** 13 + 6 * q ** 10 + 9 * q ** 9)
        b = (q - 1) * (q ** 8 - 2 * q ** 7 - q ** 6 + 2 * q ** 5 - 3 * q ** 4
                       - 6 * q ** 3 + 6 * q + 3)
        return 1 - (a + b) / (6 * q ** 9 * (q + 1) * (q ** 10 - 1))
    if c == 2:
        a = (q - 1) * (2 * q ** 19 + 3 * q ** 18 + 2 * q ** 17 + q ** 16
                       + 2 * q ** 15 + 2 * q ** 14 + 2 * q ** 11 + 2 * q ** 10)
        b = (q - 1) * (q ** 9 + q ** 8 + q ** 7 - q ** 6 + 2 * q ** 4
                       - 2 * q ** 2 + 1)
        return (a - b) / (2 * q ** 10 * (q + 1) * (q ** 10 - 1))
    if c == 3:
        return (q - 1) * (q ** 2 + 1) * (q ** 4 - q ** 2 + 1) * \
            (q ** 10 + q - 1) / (2 * q ** 11 * (q ** 10 - 1))
    if c == 4:
        return (q - 1) * (q ** 19 + q ** 18 + q ** 10 - q ** 8 + 3 * q - 3) / \
            (6 * q ** 12 * (q ** 10 - 1))
    return (q - 1) ** 2 / (2 * q ** (8 + c) * (q ** 10 - 1))
