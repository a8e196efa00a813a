"""Exact first-iteration outcome densities over local Weierstrass families.

For a finite place with residue field size q, the density of each
(reduction type, component number) outcome among integral Weierstrass
models is an explicit rational function of q.  Which function applies
depends on the residue characteristic and, for characteristic 2 and 3, on
the valuation class of the coefficients a1, a3 (char 2) or a2 (char 3),
because those coefficients cannot be absorbed by completing the square or
cube.  This module stores the full catalogue of those densities:

* ``phi_column(q)``: residue characteristic at least 5 (one family).
* ``chi_column(q, e, family)``: residue characteristic 3, families keyed
  by the valuation class of a2 (two classes when e = 1, three when e >= 2).
* ``psi_column(q, e, family)``: residue characteristic 2, families keyed
  by the joint valuation class of (a1, a3) (three, five or seven classes
  for e = 1, e = 2, e >= 3).

Each column records the density of every terminal outcome plus the mass
of models that are non-minimal and re-enter the family system after one
rescaling step; the total is exactly 1.  Rows indexed by n (the I_n and
I_n* series) are stored as symbolic geometric rows, never materialized,
so normalization and moment sums stay exact.

Component-number conventions: split multiplicative reduction at level n
has n components; nonsplit has 1 for odd n and 2 for even n.  The I_n*
rows put equal mass on 2 and 4 components.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional, Tuple, Union

__all__ = [
    "InvalidType",
    "InconsistentFamily",
    "PrimeClass",
    "FamilyClass",
    "GeometricRow",
    "StepColumn",
    "epsilon",
    "parse_kodaira",
    "phi_column",
    "chi_column",
    "psi_column",
    "phi",
    "chi",
    "psi",
    "nonminimal_mass",
    "families_for",
    "SHORT_FAMILY",
]


class InvalidType(ValueError):
    """Raised for strings that do not name a reduction type."""


class InconsistentFamily(ValueError):
    """Raised when a family descriptor does not exist at the given (e, class)."""


class PrimeClass(enum.Enum):
    """Coarse residue-characteristic split governing which table applies."""

    NOT_ABOVE_6 = "pnot6"
    ABOVE_3 = "p3"
    ABOVE_2 = "p2"

    @classmethod
    def of_prime(cls, p: int) -> "PrimeClass":
        if p == 2:
            return cls.ABOVE_2
        if p == 3:
            return cls.ABOVE_3
        return cls.NOT_ABOVE_6


SHORT_FAMILY = "short"

# Family descriptors per (prime class, e).  Strings name the valuation
# constraints on the non-absorbable coefficients.
_CHI_FAMILIES: Dict[int, Tuple[str, ...]] = {
    1: ("a2=0", "a2>=1"),
    2: ("a2=0", "a2=1", "a2>=2"),
}
_PSI_FAMILIES: Dict[int, Tuple[str, ...]] = {
    1: ("a1=0", "a1>=1,a3=0", "a1>=1,a3>=1"),
    2: ("a1=0", "a1>=1,a3=0", "a1=1,a3>=1", "a1>=2,a3=1", "a1>=2,a3>=2"),
    3: ("a1=0", "a1>=1,a3=0", "a1=1,a3>=1", "a1>=2,a3=1", "a1=2,a3>=2",
        "a1>=3,a3=2", "a1>=3,a3>=3"),
}


def epsilon(n: int) -> int:
    """Component count of nonsplit multiplicative reduction at level n."""
    return 1 if n % 2 else 2


@dataclass(frozen=True)
class FamilyClass:
    """A coefficient family at one finite place.

    ``descriptor`` is a family string such as ``"a2>=1"`` or
    ``"a1>=2,a3=1"``; the NOT_ABOVE_6 class has the single descriptor
    ``"short"``.
    """

    prime_class: PrimeClass
    e: int
    descriptor: str

    def __post_init__(self) -> None:
        if self.e < 1:
            raise InconsistentFamily(f"ramification index {self.e} < 1")
        families_for(self.prime_class, self.e, _validate=self.descriptor)

    def column(self, q: Union[int, Fraction]) -> "StepColumn":
        if self.prime_class is PrimeClass.NOT_ABOVE_6:
            return phi_column(q)
        if self.prime_class is PrimeClass.ABOVE_3:
            return chi_column(q, self.e, self.descriptor)
        return psi_column(q, self.e, self.descriptor)


@dataclass(frozen=True)
class GeometricRow:
    """An n-indexed row family: entry(n) = coeff * q**-(n + shift), n >= start."""

    coeff: Fraction
    shift: int
    start: int

    def term(self, q: Fraction, n: int) -> Fraction:
        if n < self.start:
            return Fraction(0)
        return self.coeff * q ** -(n + self.shift)

    def total(self, q: Fraction) -> Fraction:
        """Sum of entry(n) over all n >= start."""
        x = 1 / q
        return self.coeff * q ** -self.shift * x ** self.start / (1 - x)


@dataclass(frozen=True)
class StepColumn:
    """All outcome densities for one family, as exact rationals.

    ``fixed`` holds the n-independent rows keyed by (type label, c).
    ``mult`` is the I_n row for n >= 3: each of c = n (split) and
    c = epsilon(n) (nonsplit) carries one ``mult`` term; I_1 and I_2 live
    in ``fixed``.  ``additive`` is the I_n* row for n >= 1: each of c = 2
    and c = 4 carries one term.  ``nonminimal`` is the mass continuing to
    the next model in the family system.
    """

    q: Fraction
    fixed: Mapping[Tuple[str, int], Fraction]
    mult: Optional[GeometricRow]
    additive: Optional[GeometricRow]
    nonminimal: Fraction

    def total(self) -> Fraction:
        tot = sum(self.fixed.values(), Fraction(0)) + self.nonminimal
        if self.mult is not None:
            tot += 2 * self.mult.total(self.q)
        if self.additive is not None:
            tot += 2 * self.additive.total(self.q)
        return tot

    def value(self, kind: str, n: int, c: int) -> Fraction:
        """Density of the (type, c) outcome; 0 for pairs with no mass."""
        if c < 1:
            return Fraction(0)
        if kind == "In":
            if n >= 3:
                if self.mult is None:
                    return Fraction(0)
                term = self.mult.term(self.q, n)
                hits = (c == n) + (c == epsilon(n))
                return term * hits
            return self.fixed.get((f"I{n}", c), Fraction(0))
        if kind == "In*":
            if self.additive is None or c not in (2, 4):
                return Fraction(0)
            return self.additive.term(self.q, n)
        return self.fixed.get((kind, c), Fraction(0))


_STAR_FIXED = {"I0*", "IV*", "III*", "II*"}
_PLAIN = {"I0", "II", "III", "IV"}
_LABEL_RE = re.compile(r"^I(\d+)(\*?)$")


def parse_kodaira(label: object) -> Tuple[str, int]:
    """Normalize a reduction-type name to (kind, n).

    Accepts strings such as ``"I0"``, ``"I17"``, ``"IV"``, ``"I3*"``,
    ``"IVstar"``, or any object with ``kind``/``n`` attributes (the
    reduction engine's type values).  Returns kinds from the set
    {I0, In, II, III, IV, I0*, In*, IV*, III*, II*} with n meaningful
    only for In and In*.
    """
    kind = getattr(label, "kind", None)
    if kind is not None:
        n = getattr(label, "n", 0)
        if kind in _PLAIN or kind in _STAR_FIXED or kind in ("In", "In*"):
            return kind, n
        raise InvalidType(f"not a reduction type: {label!r}")
    if not isinstance(label, str):
        raise InvalidType(f"not a reduction type: {label!r}")
    text = label.strip().replace("star", "*")
    if text in _PLAIN or text in _STAR_FIXED:
        return text, 0
    m = _LABEL_RE.match(text)
    if m is None:
        raise InvalidType(f"not a reduction type: {label!r}")
    n = int(m.group(1))
    if m.group(2):
        return ("I0*", 0) if n == 0 else ("In*", n)
    return ("I0", 0) if n == 0 else ("In", n)


def _as_q(q: Union[int, Fraction]) -> Fraction:
    qf = Fraction(q)
    if qf.denominator != 1 or qf < 2:
        raise ValueError(f"residue field size must be an integer >= 2, got {q}")
    return qf


def phi_column(q: Union[int, Fraction]) -> StepColumn:
    """Outcome densities for residue characteristic >= 5."""
    q = _as_q(q)
    fixed = {
        ("I0", 1): (q - 1) / q,
        ("I1", 1): (q - 1) ** 2 / q ** 3,
        ("I2", 2): (q - 1) ** 2 / q ** 4,
        ("II", 1): (q - 1) / q ** 3,
        ("III", 2): (q - 1) / q ** 4,
        ("IV", 1): (q - 1) / (2 * q ** 5),
        ("IV", 3): (q - 1) / (2 * q ** 5),
        ("I0*", 1): (q * q - 1) / (3 * q ** 7),
        ("I0*", 2): (q - 1) / (2 * q ** 6),
        ("I0*", 4): (q - 1) * (q - 2) / (6 * q ** 7),
        ("IV*", 1): (q - 1) / (2 * q ** 8),
        ("IV*", 3): (q - 1) / (2 * q ** 8),
        ("III*", 2): (q - 1) / q ** 9,
        ("II*", 1): (q - 1) / q ** 10,
    }
    return StepColumn(
        q=q,
        fixed=fixed,
        mult=GeometricRow((q - 1) ** 2 / 2, 2, 3),
        additive=GeometricRow((q - 1) ** 2 / 2, 7, 1),
        nonminimal=Fraction(1) / q ** 10,
    )


def _check_family(families: Tuple[str, ...], family: str) -> str:
    token = family.replace(" ", "")
    if token not in families:
        raise InconsistentFamily(
            f"family {family!r} not among {families}")
    return token


def chi_column(q: Union[int, Fraction], e: int, family: str) -> StepColumn:
    """Outcome densities for residue characteristic 3, one a2-class."""
    q = _as_q(q)
    if e < 1:
        raise InconsistentFamily(f"ramification index {e} < 1")
    token = _check_family(_CHI_FAMILIES[min(e, 2)], family)
    if token == "a2=0":
        fixed = {
            ("I0", 1): (q - 1) / q,
            ("I1", 1): (q - 1) / q ** 2,
            ("I2", 2): (q - 1) / q ** 3,
        }
        return StepColumn(q, fixed, GeometricRow((q - 1) / 2, 1, 3), None,
                          Fraction(0))
    if token == "a2>=1":
        fixed = {
            ("I0", 1): (q - 1) / q,
            ("II", 1): (q - 1) / q ** 2,
            ("III", 2): (q - 1) / q ** 3,
            ("IV", 1): (q - 1) / (2 * q ** 4),
            ("IV", 3): (q - 1) / (2 * q ** 4),
            ("I0*", 1): (q * q - 1) / (3 * q ** 6),
            ("I0*", 2): (q - 1) / (2 * q ** 5),
            ("I0*", 4): (q - 1) * (q - 2) / (6 * q ** 6),
            ("IV*", 1): (q - 1) / (2 * q ** 7),
            ("IV*", 3): (q - 1) / (2 * q ** 7),
            ("III*", 2): (q - 1) / q ** 8,
            ("II*", 1): (q - 1) / q ** 9,
        }
        return StepColumn(q, fixed, None,
                          GeometricRow((q - 1) ** 2 / 2, 6, 1),
                          Fraction(1) / q ** 9)
    if token == "a2=1":
        # The pi-exact a2 class: the quartic residue split of the I0*
        # subcase depends only on a cubic with one forced root, giving the
        # {1/3, 1/2, 1/6}-type trio below (independently confirmed by
        # exhaustive residue enumeration at q = 3).
        fixed = {
            ("I0", 1): (q - 1) / q,
            ("II", 1): (q - 1) / q ** 2,
            ("III", 2): (q - 1) / q ** 3,
            ("IV", 1): (q - 1) / (2 * q ** 4),
            ("IV", 3): (q - 1) / (2 * q ** 4),
            ("I0*", 1): Fraction(1) / (3 * q ** 4),
            ("I0*", 2): (q - 1) / (2 * q ** 5),
            ("I0*", 4): (q - 3) / (6 * q ** 5),
        }
        return StepColumn(q, fixed, None,
                          GeometricRow((q - 1) / 2, 5, 1), Fraction(0))
    # a2 >= 2
    fixed = {
        ("I0", 1): (q - 1) / q,
        ("II", 1): (q - 1) / q ** 2,
        ("III", 2): (q - 1) / q ** 3,
        ("IV", 1): (q - 1) / (2 * q ** 4),
        ("IV", 3): (q - 1) / (2 * q ** 4),
        ("I0*", 1): (q - 1) / (3 * q ** 5),
        ("I0*", 2): (q - 1) / (2 * q ** 5),
        ("I0*", 4): (q - 1) / (6 * q ** 5),
        ("IV*", 1): (q - 1) / (2 * q ** 6),
        ("IV*", 3): (q - 1) / (2 * q ** 6),
        ("III*", 2): (q - 1) / q ** 7,
        ("II*", 1): (q - 1) / q ** 8,
    }
    return StepColumn(q, fixed, None, None, Fraction(1) / q ** 8)


def psi_column(q: Union[int, Fraction], e: int, family: str) -> StepColumn:
    """Outcome densities for residue characteristic 2, one (a1, a3)-class."""
    q = _as_q(q)
    if e < 1:
        raise InconsistentFamily(f"ramification index {e} < 1")
    token = _check_family(_PSI_FAMILIES[min(e, 3)], family)
    if token == "a1=0":
        fixed = {
            ("I0", 1): (q - 1) / q,
            ("I1", 1): (q - 1) / q ** 2,
            ("I2", 2): (q - 1) / q ** 3,
        }
        return StepColumn(q, fixed, GeometricRow((q - 1) / 2, 1, 3), None,
                          Fraction(0))
    if token == "a1>=1,a3=0":
        # a1 noninvertible but a3 a unit: the singular-point and
        # smoothness tests force good reduction.
        return StepColumn(q, {("I0", 1): Fraction(1)}, None, None,
                          Fraction(0))
    if token in ("a1>=1,a3>=1", "a1=1,a3>=1"):
        fixed = {
            ("II", 1): (q - 1) / q,
            ("III", 2): (q - 1) / q ** 2,
            ("IV", 1): (q - 1) / (2 * q ** 3),
            ("IV", 3): (q - 1) / (2 * q ** 3),
            ("I0*", 1): (q * q - 1) / (3 * q ** 5),
            ("I0*", 2): (q - 1) / (2 * q ** 4),
            ("I0*", 4): (q - 1) * (q - 2) / (6 * q ** 5),
            ("IV*", 1): (q - 1) / (2 * q ** 6),
            ("IV*", 3): (q - 1) / (2 * q ** 6),
            ("III*", 2): (q - 1) / q ** 7,
            ("II*", 1): (q - 1) / q ** 8,
        }
        return StepColumn(q, fixed, None,
                          GeometricRow((q - 1) ** 2 / 2, 5, 1),
                          Fraction(1) / q ** 8)
    if token == "a1>=2,a3=1":
        fixed = {
            ("II", 1): (q - 1) / q,
            ("III", 2): (q - 1) / q ** 2,
            ("IV", 1): Fraction(1) / (2 * q ** 2),
            ("IV", 3): Fraction(1) / (2 * q ** 2),
        }
        return StepColumn(q, fixed, None, None, Fraction(0))
    deep = {
        ("II", 1): (q - 1) / q,
        ("III", 2): (q - 1) / q ** 2,
        ("I0*", 1): (q * q - 1) / (3 * q ** 4),
        ("I0*", 2): (q - 1) / (2 * q ** 3),
        ("I0*", 4): (q - 1) * (q - 2) / (6 * q ** 4),
    }
    star = GeometricRow((q - 1) ** 2 / 2, 4, 1)
    if token in ("a1>=2,a3>=2", "a1=2,a3>=2"):
        fixed = dict(deep)
        fixed.update({
            ("IV*", 1): (q - 1) / (2 * q ** 5),
            ("IV*", 3): (q - 1) / (2 * q ** 5),
            ("III*", 2): (q - 1) / q ** 6,
            ("II*", 1): (q - 1) / q ** 7,
        })
        return StepColumn(q, fixed, None, star, Fraction(1) / q ** 7)
    if token == "a1>=3,a3=2":
        fixed = dict(deep)
        fixed.update({
            ("IV*", 1): Fraction(1) / (2 * q ** 4),
            ("IV*", 3): Fraction(1) / (2 * q ** 4),
        })
        return StepColumn(q, fixed, None, star, Fraction(0))
    # a1 >= 3, a3 >= 3
    fixed = dict(deep)
    fixed.update({
        ("III*", 2): (q - 1) / q ** 5,
        ("II*", 1): (q - 1) / q ** 6,
    })
    return StepColumn(q, fixed, None, star, Fraction(1) / q ** 6)


def families_for(prime_class: PrimeClass, e: int,
                 _validate: Optional[str] = None) -> Tuple[str, ...]:
    """Family descriptors available at (prime_class, e).

    With ``_validate`` set, additionally checks membership and raises
    InconsistentFamily (used by FamilyClass construction).
    """
    if e < 1:
        raise InconsistentFamily(f"ramification index {e} < 1")
    if prime_class is PrimeClass.NOT_ABOVE_6:
        out: Tuple[str, ...] = (SHORT_FAMILY,)
    elif prime_class is PrimeClass.ABOVE_3:
        out = _CHI_FAMILIES[min(e, 2)]
    else:
        out = _PSI_FAMILIES[min(e, 3)]
    if _validate is not None and _validate.replace(" ", "") not in out:
        raise InconsistentFamily(
            f"family {_validate!r} not among {out}")
    return out


def phi(q: Union[int, Fraction], kodaira_type: object, c: int) -> Fraction:
    """Density of (type, c) among short-form models, char >= 5."""
    kind, n = parse_kodaira(kodaira_type)
    return phi_column(q).value(kind, n, c)


def chi(q: Union[int, Fraction], e: int, family: str, kodaira_type: object,
        c: int) -> Fraction:
    """Density of (type, c) in one a2-class, residue characteristic 3."""
    kind, n = parse_kodaira(kodaira_type)
    return chi_column(q, e, family).value(kind, n, c)


def psi(q: Union[int, Fraction], e: int, family: str, kodaira_type: object,
        c: int) -> Fraction:
    """Density of (type, c) in one (a1, a3)-class, residue characteristic 2."""
    kind, n = parse_kodaira(kodaira_type)
    return psi_column(q, e, family).value(kind, n, c)


def nonminimal_mass(q: Union[int, Fraction], e: int, family: str) -> Fraction:
    """Mass of non-minimal models in the family (0 if it always terminates)."""
    token = family.replace(" ", "")
    if token == SHORT_FAMILY:
        return phi_column(q).nonminimal
    if token.startswith("a2"):
        return chi_column(q, e, token).nonminimal
    if token.startswith("a1"):
        return psi_column(q, e, token).nonminimal
    raise InconsistentFamily(f"unknown family {family!r}")
