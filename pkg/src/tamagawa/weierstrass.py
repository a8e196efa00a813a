"""Weierstrass models over a truncated local ring and a precision-aware
run of Tate's algorithm.

The driver works with completely general coefficients (a1, a2, a3, a4, a6)
so that it stays valid through Step-11 rescalings in residue
characteristics 2 and 3, where y-completion cannot remove a1 and a3.
Every residue-digit read goes through the trusted-precision guard of
LocalElem; when a branch would depend on an unknown digit the run raises
InsufficientPrecision instead of guessing, which is what makes the
Monte-Carlo "undecided" bucket sound.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .local_ring import AtLeastN, LocalElem, LocalRing, PrecisionExceeded
from .residue_field import CubicShape, fq_cubic_profile

__all__ = [
    "InsufficientPrecision",
    "ThreeNotInvertible",
    "Kodaira",
    "ReductionOutcome",
    "WeierstrassModel",
    "TateMode",
    "tate_run",
    "is_minimal",
    "shift_eliminate_a2",
]


class InsufficientPrecision(ValueError):
    """The truncated digits cannot decide a branch of the algorithm."""


class ThreeNotInvertible(ValueError):
    """shift_eliminate_a2 requires 3 to be a unit."""


@dataclass(frozen=True)
class Kodaira:
    """Reduction type; ``n`` is meaningful for kinds "In" and "In*"."""

    kind: str
    n: int = 0

    def label(self) -> str:
        if self.kind == "In":
            return f"I{self.n}"
        if self.kind == "In*":
            return f"I{self.n}*"
        return self.kind


@dataclass(frozen=True)
class ReductionOutcome:
    kodaira: Kodaira
    c: int
    iterations: int
    v_delta_minimal: Optional[int]


class TateMode(enum.Enum):
    FULL = "full"
    FIRST_ITERATION = "first_iteration"


NONMINIMAL = Kodaira("nonminimal")


class WeierstrassModel:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over a LocalRing."""

    __slots__ = ("ring", "a1", "a2", "a3", "a4", "a6")

    def __init__(self, a1: LocalElem, a2: LocalElem, a3: LocalElem,
                 a4: LocalElem, a6: LocalElem):
        self.ring = a1.ring
        self.a1, self.a2, self.a3, self.a4, self.a6 = a1, a2, a3, a4, a6

    @classmethod
    def of(cls, ring: LocalRing, a1, a2, a3, a4, a6) -> "WeierstrassModel":
        conv = lambda v: ring.from_int(v) if isinstance(v, int) else v
        return cls(conv(a1), conv(a2), conv(a3), conv(a4), conv(a6))

    @classmethod
    def short(cls, ring: LocalRing, a4, a6) -> "WeierstrassModel":
        return cls.of(ring, 0, 0, 0, a4, a6)

    # -- standard invariants --

    def b_invariants(self) -> Tuple[LocalElem, LocalElem, LocalElem, LocalElem]:
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * (a2 * a6) - a1 * a3 * a4 + a2 * (a3 * a3) - a4 * a4
        return b2, b4, b6, b8

    def discriminant(self) -> LocalElem:
        b2, b4, b6, b8 = self.b_invariants()
        return -(b2 * b2 * b8) - 8 * (b4 * b4 * b4) - 27 * (b6 * b6) + 9 * (b2 * b4 * b6)

    # -- admissible substitutions --

    def translate_x(self, r: LocalElem) -> "WeierstrassModel":
        """x -> x + r."""
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        return WeierstrassModel(
            a1,
            a2 + 3 * r,
            a3 + a1 * r,
            a4 + 2 * (a2 * r) + 3 * (r * r),
            a6 + a4 * r + a2 * (r * r) + r * r * r,
        )

    def translate_y(self, t: LocalElem) -> "WeierstrassModel":
        """y -> y + t."""
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        return WeierstrassModel(a1, a2, a3 + 2 * t, a4 - a1 * t, a6 - t * t - a3 * t)

    def shear_y(self, s: LocalElem) -> "WeierstrassModel":
        """y -> y + s*x."""
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        return WeierstrassModel(a1 + 2 * s, a2 - s * a1 - s * s, a3, a4 - s * a3, a6)

    def scale_unit(self, u: LocalElem) -> "WeierstrassModel":
        """(x, y) -> (u^2 x, u^3 y) for a unit u; a_i -> a_i / u^i."""
        iu = _invert_unit(u)
        iu2 = iu * iu
        iu3 = iu2 * iu
        iu4 = iu2 * iu2
        return WeierstrassModel(self.a1 * iu, self.a2 * iu2, self.a3 * iu3,
                                self.a4 * iu4, self.a6 * (iu3 * iu3))

    def rescale_step11(self) -> "WeierstrassModel":
        return WeierstrassModel(
            self.a1.shift_down(1), self.a2.shift_down(2), self.a3.shift_down(3),
            self.a4.shift_down(4), self.a6.shift_down(6))


def _invert_unit(u: LocalElem) -> LocalElem:
    """Newton inverse of a unit, good to u.prec digits."""
    ring = u.ring
    fld = ring.field
    z = ring.from_digits([fld.inv(u.digit(0))], prec=ring.N)
    known = 1
    while known < min(u.prec, ring.N):
        z = z * (2 - u * z)
        known *= 2
    return z


def shift_eliminate_a2(model: WeierstrassModel) -> WeierstrassModel:
    """Translate x so that a2 = 0 (needs 3 invertible, i.e. p != 3)."""
    ring = model.ring
    if ring.p == 3:
        raise ThreeNotInvertible("cannot divide by 3 in residue characteristic 3")
    inv3 = pow(3, -1, ring._mods[0])
    return model.translate_x(-(model.a2 * inv3))


# -- digit-level predicates ----------------------------------------------


def _v_lt(x: LocalElem, k: int) -> bool:
    """True iff v(x) < k, reading only trusted digits."""
    for i in range(k):
        if x.digit(i) != 0:
            return True
    return False


def _digit_after(x: LocalElem, k: int) -> int:
    """Digit k of x, asserting the k leading digits vanish."""
    for i in range(k):
        if x.digit(i) != 0:  # pragma: no cover - normalization theorem
            raise RuntimeError(f"expected v >= {k}, found digit at {i}")
    return x.digit(k)


def _exact_val(x: LocalElem) -> int:
    v = x.val
    if isinstance(v, AtLeastN):
        raise PrecisionExceeded(f"valuation not visible below precision {v.bound}")
    return v


def _quadratic(field, A: int, B: int, C: int):
    """Analyze A Y^2 + B Y + C over F_q (A a unit).

    Returns (distinct, split, double_root): whether the roots are distinct,
    whether they lie in F_q (None when distinct is False), and the double
    root when there is one (None otherwise).
    """
    mul, add, sub = field.mul, field.add, field.sub
    disc = sub(mul(B, B), mul(field.scalar(4), mul(A, C)))
    if field.p != 2:
        if disc == 0:
            dr = field.neg(mul(B, field.inv(mul(field.scalar(2), A))))
            return False, None, dr
        return True, field.is_square(disc), None
    # characteristic 2: distinct iff B != 0; split via Artin-Schreier trace
    if B == 0:
        dr = field.sqrt(mul(C, field.inv(A)))
        return False, None, dr
    ib = field.inv(B)
    w = mul(mul(A, C), mul(ib, ib))
    return True, field.absolute_trace(w) == 0, None


def _singular_point(model: WeierstrassModel) -> Tuple[int, int]:
    """The unique singular point of the reduced curve, as residue digits."""
    fld = model.ring.field
    a1 = model.a1.digit(0)
    a2 = model.a2.digit(0)
    a3 = model.a3.digit(0)
    a4 = model.a4.digit(0)
    a6 = model.a6.digit(0)
    add, mul, sub, neg = fld.add, fld.mul, fld.sub, fld.neg

    def F(x, y):
        lhs = add(mul(y, y), add(mul(a1, mul(x, y)), mul(a3, y)))
        x2 = mul(x, x)
        rhs = add(add(mul(x2, x), mul(a2, x2)), add(mul(a4, x), a6))
        return sub(lhs, rhs)

    def Fx(x, y):
        t = add(mul(fld.scalar(3), mul(x, x)), add(mul(fld.scalar(2), mul(a2, x)), a4))
        return sub(mul(a1, y), t)

    if fld.p != 2:
        inv2 = fld.inv(fld.scalar(2))
        for x in fld.elements():
            y = neg(mul(add(mul(a1, x), a3), inv2))
            if Fx(x, y) == 0 and F(x, y) == 0:
                return x, y
        raise RuntimeError("no singular point found on a singular reduction")
    # characteristic 2: F_y = a1 x + a3
    if a1 != 0:
        x = mul(a3, fld.inv(a1))
        x2 = mul(x, x)
        rhs = add(add(mul(x2, x), mul(a2, x2)), add(mul(a4, x), a6))
        y = fld.sqrt(rhs)
        if Fx(x, y) == 0 and F(x, y) == 0:
            return x, y
        raise RuntimeError("no singular point found on a singular reduction")
    if a3 != 0:
        raise RuntimeError("no singular point found on a singular reduction")
    x = fld.sqrt(a4)
    x2 = mul(x, x)
    rhs = add(add(mul(x2, x), mul(a2, x2)), add(mul(a4, x), a6))
    y = fld.sqrt(rhs)
    return x, y


# -- one pass of the algorithm -------------------------------------------


def _lift(ring: LocalRing, d: int, shift: int = 0) -> LocalElem:
    return ring.from_digits([0] * shift + [d], prec=ring.N)


def _run_once(model: WeierstrassModel):
    """Steps 1-11 on one model.  Returns ("terminal", Kodaira, c, v_delta)
    with v_delta an int or None, or ("rescale", next_model)."""
    ring = model.ring
    fld = ring.field
    char2 = fld.p == 2

    delta = model.discriminant()
    vdelta = delta.val
    if isinstance(vdelta, AtLeastN):
        if vdelta.bound < 1:
            raise PrecisionExceeded("discriminant unknown at precision 0")
        vd: Optional[int] = None
    else:
        vd = vdelta
        if vd == 0:
            return "terminal", Kodaira("I0"), 1, 0

    # Step 2: move the singular point to the origin.
    x0, y0 = _singular_point(model)
    m = model.translate_x(_lift(ring, x0)).translate_y(_lift(ring, y0))

    b2 = m.a1 * m.a1 + 4 * m.a2
    if b2.digit(0) != 0:
        # multiplicative: In with n = v(delta)
        if vd is None:
            raise PrecisionExceeded("v(delta) needed for In is out of reach")
        _, split, _ = _quadratic(fld, 1, m.a1.digit(0), fld.neg(m.a2.digit(0)))
        c = vd if split else (2 if vd % 2 == 0 else 1)
        return "terminal", Kodaira("In", vd), c, vd

    # additive: shear so the tangent cone is a double line y = 0
    if char2:
        s = _lift(ring, fld.sqrt(m.a2.digit(0)))
    else:
        inv2 = pow(2, -1, ring._mods[0])
        s = -(m.a1 * inv2)
    m = m.shear_y(s)

    # Step 3
    if _v_lt(m.a6, 2):
        return "terminal", Kodaira("II"), 1, vd

    # Step 4
    _, _, _, b8 = m.b_invariants()
    if _v_lt(b8, 3):
        return "terminal", Kodaira("III"), 2, vd

    # Step 5
    b6 = m.a3 * m.a3 + 4 * m.a6
    if _v_lt(b6, 3):
        c3, c6 = m.a3.digit(1), m.a6.digit(2)
        _, split, _ = _quadratic(fld, 1, c3, fld.neg(c6))
        return "terminal", Kodaira("IV"), 3 if split else 1, vd

    # normalize for Step 6: pi | a1, a2; pi^2 | a3, a4; pi^3 | a6
    if char2:
        # v(a3) >= 2 is automatic here; clear the pi^2 digit of a6
        t = _lift(ring, fld.sqrt(m.a6.digit(2)), shift=1)
        m = m.translate_y(t)
    else:
        inv2 = pow(2, -1, ring._mods[0])
        m = m.translate_y(-(m.a3 * inv2))

    p_t = (_digit_after(m.a6, 3), _digit_after(m.a4, 2), _digit_after(m.a2, 1))
    profile = fq_cubic_profile(fld, p_t)

    if profile.shape is CubicShape.THREE_DISTINCT_ALL_RATIONAL:
        return "terminal", Kodaira("I0*"), 4, vd
    if profile.shape is CubicShape.THREE_DISTINCT_ONE_RATIONAL:
        return "terminal", Kodaira("I0*"), 2, vd
    if profile.shape is CubicShape.THREE_DISTINCT_IRREDUCIBLE:
        return "terminal", Kodaira("I0*"), 1, vd

    if profile.shape is CubicShape.DOUBLE_ROOT:
        m = m.translate_x(_lift(ring, profile.roots[0], shift=1))
        return _instar_loop(m, vd)

    # triple root: Steps 8-10
    m = m.translate_x(_lift(ring, profile.roots[0], shift=1))
    c3, c6 = _digit_after(m.a3, 2), _digit_after(m.a6, 4)
    distinct, split, droot = _quadratic(fld, 1, c3, fld.neg(c6))
    if distinct:
        return "terminal", Kodaira("IV*"), 3 if split else 1, vd
    m = m.translate_y(_lift(ring, droot, shift=2))

    if _v_lt(m.a4, 4):
        return "terminal", Kodaira("III*"), 2, vd
    if _v_lt(m.a6, 6):
        return "terminal", Kodaira("II*"), 1, vd

    return "rescale", m.rescale_step11()


def _instar_loop(m: WeierstrassModel, vd: Optional[int]):
    """Step 7 sub-algorithm; m is in Step-6 form with P(T) double root at 0,
    i.e. v(a2) = 1, v(a3) >= 2, v(a4) >= 3, v(a6) >= 4."""
    ring = m.ring
    fld = ring.field
    c2 = m.a2.digit(1)
    n = 1
    while True:
        if n % 2 == 1:
            k = (n + 3) // 2
            c3 = m.a3.digit(k)
            c6 = m.a6.digit(n + 3)
            distinct, split, droot = _quadratic(fld, 1, c3, fld.neg(c6))
            if distinct:
                return "terminal", Kodaira("In*", n), 4 if split else 2, vd
            m = m.translate_y(_lift(ring, droot, shift=k))
        else:
            k = (n + 4) // 2
            c4 = m.a4.digit(k)
            c6 = m.a6.digit(n + 3)
            distinct, split, droot = _quadratic(fld, c2, c4, c6)
            if distinct:
                return "terminal", Kodaira("In*", n), 4 if split else 2, vd
            m = m.translate_x(_lift(ring, droot, shift=k - 1))
        n += 1
        if n > 4 * ring.N:  # pragma: no cover
            raise RuntimeError("runaway In* loop")


def tate_run(model: WeierstrassModel, mode: TateMode = TateMode.FULL) -> ReductionOutcome:
    """Run the algorithm to a ReductionOutcome.

    FULL iterates Step-11 rescalings to the minimal model.
    FIRST_ITERATION reports the first pass only, mapping a Step-11 hit to
    the sentinel kind "nonminimal" (c = 0).
    """
    iterations = 0
    m = model
    try:
        while True:
            res = _run_once(m)
            if res[0] == "terminal":
                _, kod, c, vd = res
                return ReductionOutcome(kod, c, iterations, vd)
            if mode is TateMode.FIRST_ITERATION:
                return ReductionOutcome(NONMINIMAL, 0, 0, None)
            m = res[1]
            iterations += 1
    except PrecisionExceeded as exc:
        raise InsufficientPrecision(str(exc)) from exc


def is_minimal(model: WeierstrassModel) -> bool:
    """True iff Tate's algorithm never reaches Step 11 on this model."""
    try:
        delta = model.discriminant()
        if _v_lt(delta, min(12, delta.prec)):
            return True  # v(delta) < 12 rules out a Step-11 rescale
        res = _run_once(model)
    except PrecisionExceeded as exc:
        raise InsufficientPrecision(str(exc)) from exc
    return res[0] == "terminal"
