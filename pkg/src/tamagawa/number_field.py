"""Splitting data for rational primes in a number field.

A field is described by a monic irreducible integer polynomial; splitting
of a prime p comes from factoring that polynomial mod p, guarded by the
Dedekind index criterion so a wrong answer is never returned silently.
Quadratic, prime-cyclotomic, and multiquadratic fields get closed-form
constructors, and any prime's data can be overridden from a JSON object
(for fields whose index is divisible by an awkward prime).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import Poly, Symbol, gcd as poly_gcd, isprime, legendre_symbol
from sympy.ntheory import factorint, n_order
from sympy.parsing.sympy_parser import (
    implicit_multiplication_application,
    parse_expr,
    standard_transformations,
)

__all__ = [
    "IndexDivisor",
    "NotSquarefree",
    "RamifiedUnsupported",
    "Provenance",
    "NumberFieldSpec",
    "SplittingData",
    "field_from_poly",
    "quadratic_field",
    "factor_prime",
    "cyclotomic_splitting",
    "multiquadratic_splitting",
    "quadratic_splitting",
    "parse_overrides",
    "splitting_for_field",
    "splitting_for_cyclotomic",
    "splitting_for_multiquadratic",
    "splitting_for_quadratic",
    "splitting_for_rationals",
]

_X = Symbol("x")

Pairs = Tuple[Tuple[int, int], ...]


class IndexDivisor(ArithmeticError):
    """p divides the index [O_K : Z[theta]]; the mod-p factorization does
    not describe the splitting.  Supply override data for this prime."""

    def __init__(self, p: int, label: str = ""):
        self.p = p
        where = f" in {label}" if label else ""
        super().__init__(
            f"prime {p} divides the polynomial index{where}; "
            f"provide a splitting override for it")


class NotSquarefree(ValueError):
    """Quadratic-field discriminant parameter must be squarefree."""


class RamifiedUnsupported(ValueError):
    """Splitting of this ramified prime is not computed; override it."""


class Provenance(str, Enum):
    DEDEKIND = "dedekind"
    ANALYTIC = "analytic"
    USER_OVERRIDE = "override"


@dataclass(frozen=True)
class NumberFieldSpec:
    """Monic irreducible integer polynomial defining the field, stored as
    descending coefficients, plus a display label."""

    coeffs: Tuple[int, ...]
    label: str

    def __post_init__(self) -> None:
        if len(self.coeffs) < 2 or self.coeffs[0] != 1:
            raise ValueError("defining polynomial must be monic of degree >= 1")
        if any(not isinstance(c, int) for c in self.coeffs):
            raise ValueError("defining polynomial must have integer coefficients")
        if not Poly(self.coeffs, _X, domain="ZZ").is_irreducible:
            raise ValueError(
                f"{self.poly_text()} is reducible over the rationals")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def poly_text(self) -> str:
        return str(Poly(self.coeffs, _X, domain="ZZ").as_expr())


def field_from_poly(poly: Union[str, Sequence[int]],
                    label: Optional[str] = None) -> NumberFieldSpec:
    """Build a field spec from polynomial text like "x^4+5x^2-6x+3" or a
    descending coefficient list."""
    if isinstance(poly, str):
        expr = parse_expr(
            poly.replace("^", "**"), local_dict={"x": _X},
            transformations=standard_transformations
            + (implicit_multiplication_application,))
        coeffs = [int(c) for c in Poly(expr, _X).all_coeffs()]
    else:
        coeffs = [int(c) for c in poly]
    spec = NumberFieldSpec(tuple(coeffs), label or "")
    if not spec.label:
        spec = NumberFieldSpec(spec.coeffs, f"Q[x]/({spec.poly_text()})")
    return spec


def _require_squarefree(D: int) -> None:
    if D in (0, 1):
        raise NotSquarefree(f"D={D} does not define a quadratic field")
    if any(m > 1 for m in factorint(abs(D)).values()):
        raise NotSquarefree(f"D={D} is not squarefree")


def quadratic_field(D: int) -> NumberFieldSpec:
    """Q(sqrt(D)) with its full ring of integers as Z[theta], so the
    Dedekind criterion never rejects a prime."""
    _require_squarefree(D)
    if D % 4 == 1:
        coeffs = (1, -1, (1 - D) // 4)
    else:
        coeffs = (1, 0, -D)
    return NumberFieldSpec(coeffs, f"Q(sqrt({D}))")


def _quad_pairs(D: int, p: int) -> List[Tuple[int, int]]:
    if p == 2:
        if D % 4 != 1:
            return [(2, 1)]
        return [(1, 1), (1, 1)] if D % 8 == 1 else [(1, 2)]
    if D % p == 0:
        return [(2, 1)]
    split = legendre_symbol(D % p, p) == 1
    return [(1, 1), (1, 1)] if split else [(1, 2)]


def quadratic_splitting(D: int, p: int) -> List[Tuple[int, int]]:
    """Splitting of p in Q(sqrt(D)) by the classical quadratic-residue
    law; agrees with factor_prime on quadratic_field(D) everywhere."""
    _require_squarefree(D)
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    return _quad_pairs(D, p)


def factor_prime(spec: NumberFieldSpec, p: int) -> List[Tuple[int, int]]:
    """(e, f) pairs of the primes above p, from the mod-p factorization of
    the defining polynomial.  Valid only when p does not divide the index;
    otherwise raises IndexDivisor."""
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    fbar = Poly(spec.coeffs, _X, modulus=p)
    factors = fbar.factor_list()[1]
    if any(mult > 1 for _, mult in factors):
        _dedekind_gate(spec, p, fbar, factors)
    return sorted((mult, g.degree()) for g, mult in factors)


def _dedekind_gate(spec: NumberFieldSpec, p: int, fbar: Poly,
                   factors) -> None:
    """Raise IndexDivisor unless gcd(T, g, h) = 1 mod p, where g is the
    radical of fbar, h = fbar/g, and T = (g~ h~ - f)/p for any lifts."""
    gbar = reduce(lambda a, b: a * b, (g for g, _ in factors))
    hbar = fbar.exquo(gbar)
    g_lift = Poly([int(c) for c in gbar.all_coeffs()], _X, domain="ZZ")
    h_lift = Poly([int(c) for c in hbar.all_coeffs()], _X, domain="ZZ")
    f_z = Poly(spec.coeffs, _X, domain="ZZ")
    diff = (g_lift * h_lift - f_z).all_coeffs()
    assert all(c % p == 0 for c in diff)
    tbar = Poly([c // p for c in diff] or [0], _X, modulus=p)
    d = poly_gcd(poly_gcd(tbar, gbar), hbar)
    if d.degree() > 0:
        raise IndexDivisor(p, spec.label)


def cyclotomic_splitting(a: int, p: int) -> List[Tuple[int, int]]:
    """Splitting of p in the degree a-1 field of a-th roots of unity,
    a an odd prime: totally ramified at a, else inert of degree ord_a(p)."""
    if not isprime(a) or a == 2:
        raise ValueError(f"need an odd prime, got a={a}")
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    if p == a:
        return [(a - 1, 1)]
    f = n_order(p, a)
    return [(1, f)] * ((a - 1) // f)


def multiquadratic_splitting(primes: Sequence[int],
                             p: int) -> List[Tuple[int, int]]:
    """Splitting of p in Q(sqrt(p1), ..., sqrt(pk)) for distinct primes
    pi = 1 mod 8.  Frobenius is the vector of quadratic characters; a
    ramified p (one of the pi) contributes tame e=2 with the character
    vector restricted to the other generators."""
    ps = list(primes)
    if len(set(ps)) != len(ps) or not ps:
        raise ValueError("need a nonempty list of distinct primes")
    for pi in ps:
        if not isprime(pi) or pi % 8 != 1:
            raise RamifiedUnsupported(
                f"{pi} is not a prime = 1 mod 8; splitting rules not available")
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    k = len(ps)
    if p == 2:
        # every generator square root exists 2-adically when pi = 1 mod 8
        return [(1, 1)] * (2 ** k)
    if p in ps:
        others = [pi for pi in ps if pi != p]
        f = 1 if all(legendre_symbol(pi, p) == 1 for pi in others) else 2
        return [(2, f)] * (2 ** (k - 1) // f)
    f = 1 if all(legendre_symbol(pi, p) == 1 for pi in ps) else 2
    return [(1, f)] * (2 ** k // f)


@dataclass
class SplittingData:
    """Splitting shapes per rational prime for one field."""

    degree: int
    label: str
    entries: Dict[int, Pairs] = field(default_factory=dict)
    provenance: Dict[int, Provenance] = field(default_factory=dict)

    def put(self, p: int, pairs: Iterable[Tuple[int, int]],
            origin: Provenance) -> None:
        shaped = tuple(sorted((int(e), int(f)) for e, f in pairs))
        if any(e < 1 or f < 1 for e, f in shaped):
            raise ValueError(f"invalid (e, f) pairs at p={p}: {shaped}")
        if sum(e * f for e, f in shaped) != self.degree:
            raise ValueError(
                f"splitting at p={p} sums to {sum(e * f for e, f in shaped)}, "
                f"expected the degree {self.degree}")
        self.entries[p] = shaped
        self.provenance[p] = origin

    def pairs(self, p: int) -> Pairs:
        return self.entries[p]

    def __contains__(self, p: int) -> bool:
        return p in self.entries


def parse_overrides(source: Union[str, Mapping]) -> Dict[int, Pairs]:
    """JSON object {"p": [[e, f], ...], ...} with integer entries."""
    obj = json.loads(source) if isinstance(source, str) else source
    if not isinstance(obj, Mapping):
        raise ValueError("override data must be a JSON object")
    out: Dict[int, Pairs] = {}
    for key, rows in obj.items():
        p = int(key)
        if not isprime(p):
            raise ValueError(f"override key {key!r} is not prime")
        pairs = tuple(sorted((int(e), int(f)) for e, f in rows))
        if not pairs or any(e < 1 or f < 1 for e, f in pairs):
            raise ValueError(f"invalid override rows for p={p}")
        out[p] = pairs
    return out


def splitting_for_field(spec: NumberFieldSpec, primes: Iterable[int],
                        overrides: Optional[Mapping[int, Pairs]] = None,
                        ) -> SplittingData:
    data = SplittingData(spec.degree, spec.label)
    overrides = overrides or {}
    for p in primes:
        if p in overrides:
            data.put(p, overrides[p], Provenance.USER_OVERRIDE)
        else:
            data.put(p, factor_prime(spec, p), Provenance.DEDEKIND)
    return data


def splitting_for_cyclotomic(a: int, primes: Iterable[int]) -> SplittingData:
    data = SplittingData(a - 1, f"Q(zeta_{a})")
    for p in primes:
        data.put(p, cyclotomic_splitting(a, p), Provenance.ANALYTIC)
    return data


def splitting_for_multiquadratic(ps: Sequence[int], primes: Iterable[int],
                                 ) -> SplittingData:
    label = "Q(" + ", ".join(f"sqrt({pi})" for pi in ps) + ")"
    data = SplittingData(2 ** len(ps), label)
    for p in primes:
        data.put(p, multiquadratic_splitting(ps, p), Provenance.ANALYTIC)
    return data


def splitting_for_quadratic(D: int, primes: Iterable[int]) -> SplittingData:
    """Like splitting_for_field(quadratic_field(D), ...) but via the
    residue-symbol law, with no per-prime polynomial factorization."""
    _require_squarefree(D)
    data = SplittingData(2, f"Q(sqrt({D}))")
    for p in primes:
        data.put(p, _quad_pairs(D, p), Provenance.ANALYTIC)
    return data


def splitting_for_rationals(primes: Iterable[int]) -> SplittingData:
    data = SplittingData(1, "Q")
    for p in primes:
        data.put(p, ((1, 1),), Provenance.ANALYTIC)
    return data
