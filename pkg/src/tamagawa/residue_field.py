"""Finite-field arithmetic and the cubic-counting helpers behind the
local reduction-type densities.

Elements of F_q (q = p^f) are packed into plain ints in [0, q): the base-p
digits of the int are the coefficients of the residue polynomial, constant
term first.  Packing keeps the hot loops allocation-free; ``coeffs`` and
``from_coeffs`` convert at the boundary.  Fields up to q = 256 carry full
lookup tables, larger ones fall back to digit arithmetic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

__all__ = [
    "NonPrimeP",
    "ReducibleModulus",
    "FqField",
    "CubicShape",
    "CubicProfile",
    "fq_make",
    "fq_is_square",
    "fq_cubic_profile",
    "fq_count_traceless_cubics",
]

_TABLE_LIMIT = 256

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class NonPrimeP(ValueError):
    """Raised when the requested characteristic is not prime."""


class ReducibleModulus(ValueError):
    """Raised when a supplied modulus polynomial is unusable."""


def is_prime(n: int) -> bool:
    """Deterministic primality check (Miller-Rabin, exact for n < 3.3e24)."""
    if n < 2:
        return False
    for d in _MR_WITNESSES:
        if n % d == 0:
            return n == d
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# -- dense polynomial helpers over F_p (little-endian coefficient lists) --


def _pmul(a: list, b: list, p: int) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return out


def _pmod(a: list, g: list, p: int) -> list:
    """Remainder of a by monic g; result padded to deg(g) coefficients."""
    a = list(a)
    dg = len(g) - 1
    for i in range(len(a) - 1, dg - 1, -1):
        c = a[i]
        if c:
            for j in range(dg + 1):
                a[i - dg + j] = (a[i - dg + j] - c * g[j]) % p
    a = a[:dg]
    a.extend([0] * (dg - len(a)))
    return a


def _ppow_p(h: list, g: list, p: int) -> list:
    """h^p mod g via square-and-multiply on the exponent p."""
    result = [1] + [0] * (len(g) - 2)
    base = list(h)
    e = p
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), g, p)
        base = _pmod(_pmul(base, base, p), g, p)
        e >>= 1
    return result


def _pdeg(a: list) -> int:
    for i in range(len(a) - 1, -1, -1):
        if a[i]:
            return i
    return -1


def _pgcd_is_one(a: list, b: list, p: int) -> bool:
    a, b = list(a), list(b)
    while _pdeg(b) >= 0:
        db = _pdeg(b)
        inv = pow(b[db], p - 2, p)
        bm = [c * inv % p for c in b[: db + 1]]
        a, b = b, _pmod(a, bm, p)
    return _pdeg(a) == 0


def _poly_irreducible(g: list, p: int) -> bool:
    """Rabin test: g (monic, degree f) is irreducible over F_p."""
    f = len(g) - 1
    if f == 0:
        return False
    x = _pmod([0, 1], g, p)
    # iterated Frobenius images x^(p^k) mod g
    frob = [x]
    for _ in range(f):
        frob.append(_ppow_p(frob[-1], g, p))
    xq = frob[f]
    if _pdeg([(xq[i] - x[i]) % p for i in range(f)]) >= 0:
        return False
    ell = 2
    m = f
    while m > 1:
        if m % ell == 0:
            diff = [(frob[f // ell][i] - x[i]) % p for i in range(f)]
            if not _pgcd_is_one(g, diff, p):
                return False
            while m % ell == 0:
                m //= ell
        ell += 1
    return True


class FqField:
    """Immutable F_q with packed-int elements and closure-bound arithmetic.

    Public callables (installed per instance for speed): ``add``, ``sub``,
    ``neg``, ``mul``, ``inv``, ``div``, ``pow``, ``frobenius``, ``sqrt``,
    ``is_square``, ``absolute_trace``.
    """

    def __init__(self, p: int, f: int, modulus: Sequence[int]):
        self.p = p
        self.f = f
        self.q = p**f
        self.modulus = tuple(int(c) % p for c in modulus)
        self.zero = 0
        self.one = 1
        self._install_ops()

    def __repr__(self):  # pragma: no cover
        return f"FqField(q={self.q})"

    def scalar(self, n: int) -> int:
        """Embed an integer into the prime subfield."""
        return n % self.p

    def coeffs(self, a: int) -> tuple:
        out = []
        for _ in range(self.f):
            a, r = divmod(a, self.p)
            out.append(r)
        return tuple(out)

    def from_coeffs(self, cs: Iterable[int]) -> int:
        a = 0
        for c in reversed([c % self.p for c in cs]):
            a = a * self.p + c
        return a

    def elements(self) -> range:
        return range(self.q)

    # -- arithmetic installation --

    def _install_ops(self):
        p, f, q = self.p, self.f, self.q
        if f == 1:
            add = lambda a, b: (a + b) % p
            sub = lambda a, b: (a - b) % p
            neg = lambda a: -a % p
            mul = lambda a, b: a * b % p

            def inv(a):
                if a == 0:
                    raise ZeroDivisionError("inverse of zero in F_q")
                return pow(a, p - 2, p)

        else:
            g = list(self.modulus)

            def unpack(a):
                out = []
                for _ in range(f):
                    a, r = divmod(a, p)
                    out.append(r)
                return out

            def pack(cs):
                a = 0
                for c in reversed(cs):
                    a = a * p + c
                return a

            def add(a, b):
                return pack([(x + y) % p for x, y in zip(unpack(a), unpack(b))])

            def sub(a, b):
                return pack([(x - y) % p for x, y in zip(unpack(a), unpack(b))])

            def neg(a):
                return pack([-x % p for x in unpack(a)])

            def mul(a, b):
                return pack(_pmod(_pmul(unpack(a), unpack(b), p), g, p))

            def inv(a):
                if a == 0:
                    raise ZeroDivisionError("inverse of zero in F_q")
                return powe(a, q - 2)

        def powe(a, n):
            if n < 0:
                a, n = inv(a), -n
            r, base = 1, a
            while n:
                if n & 1:
                    r = mul(r, base)
                base = mul(base, base)
                n >>= 1
            return r

        self.add, self.sub, self.neg, self.mul, self.inv = add, sub, neg, mul, inv
        self.pow = powe
        self.div = lambda a, b: mul(a, inv(b))
        self.frobenius = lambda a: powe(a, p)

        def absolute_trace(a):
            t, x = 0, a
            for _ in range(f):
                t = add(t, x)
                x = powe(x, p)
            return t

        self.absolute_trace = absolute_trace

        if q <= _TABLE_LIMIT:
            self._install_tables()
        else:
            if p == 2:
                self.sqrt = lambda a: powe(a, q // 2)
                self.is_square = lambda a: True
            else:
                self.is_square = lambda a: a == 0 or powe(a, (q - 1) // 2) == 1
                self.sqrt = self._sqrt_tonelli

    def _install_tables(self):
        q = self.q
        add, sub, neg, mul, inv = self.add, self.sub, self.neg, self.mul, self.inv
        t_add = [add(a, b) for a in range(q) for b in range(q)]
        t_sub = [sub(a, b) for a in range(q) for b in range(q)]
        t_mul = [mul(a, b) for a in range(q) for b in range(q)]
        t_neg = [neg(a) for a in range(q)]
        t_inv = [0] * q
        for a in range(1, q):
            t_inv[a] = t_mul[a * q : (a + 1) * q].index(1)
        t_sqrt = [-1] * q
        for b in range(q):
            s = t_mul[b * q + b]
            if t_sqrt[s] < 0:
                t_sqrt[s] = b
        t_frob = [self.pow(a, self.p) for a in range(q)]
        t_tr = [self.absolute_trace(a) for a in range(q)]

        self.add = lambda a, b: t_add[a * q + b]
        self.sub = lambda a, b: t_sub[a * q + b]
        self.mul = lambda a, b: t_mul[a * q + b]
        self.neg = lambda a: t_neg[a]

        def inv_t(a):
            if a == 0:
                raise ZeroDivisionError("inverse of zero in F_q")
            return t_inv[a]

        self.inv = inv_t
        self.div = lambda a, b: t_mul[a * q + inv_t(b)]
        self.frobenius = lambda a: t_frob[a]
        self.absolute_trace = lambda a: t_tr[a]
        self.is_square = lambda a: t_sqrt[a] >= 0
        self.sqrt = lambda a: (t_sqrt[a] if t_sqrt[a] >= 0 else None)

        mul_raw = lambda a, b: t_mul[a * q + b]

        def powe(a, n):
            if n < 0:
                a, n = inv_t(a), -n
            r, base = 1, a
            while n:
                if n & 1:
                    r = mul_raw(r, base)
                base = mul_raw(base, base)
                n >>= 1
            return r

        self.pow = powe

    def _sqrt_tonelli(self, a: int) -> Optional[int]:
        """Deterministic Tonelli-Shanks for odd q above the table limit."""
        if a == 0:
            return 0
        if not self.is_square(a):
            return None
        q, mul, powe = self.q, self.mul, self.pow
        t, s = q - 1, 0
        while t % 2 == 0:
            t //= 2
            s += 1
        z = next(c for c in range(2, q) if not self.is_square(c))
        m, c = s, powe(z, t)
        u, r = powe(a, t), powe(a, (t + 1) // 2)
        while u != 1:
            d, i = mul(u, u), 1
            while d != 1:
                d = mul(d, d)
                i += 1
            b = powe(c, 1 << (m - i - 1))
            m, c = i, mul(b, b)
            u, r = mul(u, c), mul(r, b)
        return r


def fq_make(p: int, f: int, modulus: Optional[Sequence[int]] = None) -> FqField:
    """Build F_{p^f}.

    Without an explicit modulus the lexicographically smallest monic
    irreducible polynomial of degree f over F_p is selected, so repeated
    calls agree across runs (F_4 always gets x^2+x+1).
    """
    key = (p, f, None if modulus is None else tuple(int(c) for c in modulus))
    field = _FIELD_CACHE.get(key)
    if field is None:
        field = _fq_make_uncached(*key)
        _FIELD_CACHE[key] = field
    return field


_FIELD_CACHE: dict = {}


def _fq_make_uncached(p: int, f: int, modulus) -> FqField:
    if not is_prime(p):
        raise NonPrimeP(f"{p} is not prime")
    if f < 1:
        raise ValueError("extension degree must be >= 1")
    if modulus is not None:
        g = [c % p for c in modulus]
        if len(g) != f + 1 or g[-1] != 1:
            raise ReducibleModulus("modulus must be monic of degree f")
        if f > 1 and not _poly_irreducible(g, p):
            raise ReducibleModulus("modulus is reducible over F_p")
        return FqField(p, f, g)
    if f == 1:
        return FqField(p, 1, [0, 1])
    for n in range(p**f):
        g = []
        m = n
        for _ in range(f):
            m, r = divmod(m, p)
            g.append(r)
        g.append(1)
        if _poly_irreducible(g, p):
            return FqField(p, f, g)
    raise ReducibleModulus("no irreducible polynomial found")  # unreachable


def fq_is_square(field: FqField, a: int) -> bool:
    """True iff a is a square in F_q (zero included)."""
    return field.is_square(a)


class CubicShape(enum.Enum):
    THREE_DISTINCT_ALL_RATIONAL = "three_distinct_all_rational"
    THREE_DISTINCT_ONE_RATIONAL = "three_distinct_one_rational"
    THREE_DISTINCT_IRREDUCIBLE = "three_distinct_irreducible"
    DOUBLE_ROOT = "double_root"
    TRIPLE_ROOT = "triple_root"


@dataclass(frozen=True)
class CubicProfile:
    """Factorization shape of a monic cubic, with its rational roots.

    ``roots`` holds: all three roots (all-rational case), the unique
    rational root (one-rational case), nothing (irreducible case), the
    repeated root then the simple root (double-root case), or the single
    repeated root (triple-root case).
    """

    shape: CubicShape
    roots: tuple


def _cubic_eval(field: FqField, cubic: Sequence[int], x: int) -> int:
    c0, c1, c2 = cubic
    r = field.add(x, c2)
    r = field.add(field.mul(r, x), c1)
    return field.add(field.mul(r, x), c0)


def _deflate(field: FqField, cubic: Sequence[int], r: int):
    """Divide T^3 + c2 T^2 + c1 T + c0 by (T - r); returns (b0, b1) of the
    monic quadratic quotient."""
    c0, c1, c2 = cubic
    b1 = field.add(c2, r)
    b0 = field.add(c1, field.mul(b1, r))
    return b0, b1


def _rational_roots(field: FqField, cubic: Sequence[int]) -> list:
    if field.q <= 1 << 16:
        return [x for x in range(field.q) if _cubic_eval(field, cubic, x) == 0]
    return sorted(_roots_by_splitting(field, list(cubic) + [1]))


def _roots_by_splitting(field: FqField, poly: list) -> list:
    """Distinct rational roots of a low-degree monic poly over a large F_q,
    via x^q reduction and deterministic equal-degree splitting."""
    q, p = field.q, field.p

    def pmulq(a, b):
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] = field.add(out[i + j], field.mul(ai, bj))
        return out

    def pmodq(a, g):
        a = list(a)
        dg = len(g) - 1
        for i in range(len(a) - 1, dg - 1, -1):
            c = a[i]
            if c:
                for j in range(dg + 1):
                    a[i - dg + j] = field.sub(a[i - dg + j], field.mul(c, g[j]))
        a = a[:dg]
        a.extend([0] * (dg - len(a)))
        return a

    def ppow(h, n, g):
        r = [1] + [0] * (len(g) - 2)
        base = list(h)
        while n:
            if n & 1:
                r = pmodq(pmulq(r, base), g)
            base = pmodq(pmulq(base, base), g)
            n >>= 1
        return r

    def pgcd(a, b):
        a, b = list(a), list(b)
        while _pdeg(b) >= 0:
            db = _pdeg(b)
            bm = [field.div(c, b[db]) for c in b[: db + 1]]
            if _pdeg(a) >= db:
                a = pmodq(a, bm)
            a, b = b, a
        da = _pdeg(a)
        return [field.div(c, a[da]) for c in a[: da + 1]] if da >= 0 else [0]

    # linear-factor part: gcd(x^q - x, poly)
    xq = ppow([0, 1], q, poly)
    xq_minus_x = list(xq)
    while len(xq_minus_x) < 2:
        xq_minus_x.append(0)
    xq_minus_x[1] = field.sub(xq_minus_x[1], 1)
    lin = pgcd(poly, xq_minus_x)

    roots: list = []

    def split(g):
        d = _pdeg(g)
        if d == 0:
            return
        if d == 1:
            roots.append(field.neg(g[0]))
            return
        for s in range(1, q):
            if p == 2:
                # absolute-trace map of s*x: sum of its 2^i-th powers;
                # Tr(s*(r1-r2)) is nonzero for some s, so roots separate
                tr = [0] * d
                powv = pmodq([0, s], g)
                for _ in range(field.f):
                    for i_, cv in enumerate(powv):
                        tr[i_] = field.add(tr[i_], cv)
                    powv = pmodq(pmulq(powv, powv), g)
                cand = pgcd(g, tr)
            else:
                h = ppow([s % q, 1], (q - 1) // 2, g)
                h[0] = field.sub(h[0], 1)
                cand = pgcd(g, h)
            dc = _pdeg(cand)
            if 0 < dc < d:
                rest = cand
                quot = pmodq_divide(g, cand)
                split(rest)
                split(quot)
                return
        raise RuntimeError("splitting failed")  # pragma: no cover

    def pmodq_divide(a, b):
        # exact division of monic a by monic b
        a = list(a)
        db = _pdeg(b)
        out = [0] * (len(a) - db)
        for i in range(len(a) - 1, db - 1, -1):
            c = a[i]
            if c:
                out[i - db] = c
                for j in range(db + 1):
                    a[i - db + j] = field.sub(a[i - db + j], field.mul(c, b[j]))
        return out

    split(lin)
    return roots


def fq_cubic_profile(field: FqField, cubic: Sequence[int]) -> CubicProfile:
    """Classify the monic cubic T^3 + c2 T^2 + c1 T + c0.

    ``cubic`` is the coefficient triple (c0, c1, c2) of packed elements.
    """
    cubic = tuple(cubic)
    roots = _rational_roots(field, cubic)
    if len(roots) == 3:
        return CubicProfile(CubicShape.THREE_DISTINCT_ALL_RATIONAL, tuple(roots))
    if len(roots) == 2:
        # one of them is a double root
        b0, b1 = _deflate(field, cubic, roots[0])
        quad_has_r0 = field.add(field.mul(roots[0], field.add(roots[0], b1)), b0) == 0
        double = roots[0] if quad_has_r0 else roots[1]
        simple = roots[1] if quad_has_r0 else roots[0]
        return CubicProfile(CubicShape.DOUBLE_ROOT, (double, simple))
    if len(roots) == 1:
        r = roots[0]
        b0, b1 = _deflate(field, cubic, r)
        if field.add(field.mul(r, field.add(r, b1)), b0) == 0:
            return CubicProfile(CubicShape.TRIPLE_ROOT, (r,))
        return CubicProfile(CubicShape.THREE_DISTINCT_ONE_RATIONAL, (r,))
    return CubicProfile(CubicShape.THREE_DISTINCT_IRREDUCIBLE, ())


def fq_count_traceless_cubics(field: FqField) -> dict:
    """Count monic separable cubics T^3 + c1 T + c0 by factorization type.

    Returns {"split", "one_root", "irreducible"}.  Away from characteristic
    3 the counts match (q-1)(q-2)/6, (q^2-q)/2 and (q^2-1)/3; the counting
    here is a direct O(q^2) sweep, independent of those closed forms.
    """
    q, add, mul, neg = field.q, field.add, field.mul, field.neg
    three = field.scalar(3)
    two = field.scalar(2)
    root_count = [0] * (q * q)
    for x in range(q):
        x2 = mul(x, x)
        x3 = mul(x2, x)
        for c1 in range(q):
            c0 = neg(add(x3, mul(c1, x)))
            root_count[c1 * q + c0] += 1
    inseparable = [False] * (q * q)
    for r in range(q):
        r2 = mul(r, r)
        c1 = neg(mul(three, r2))
        c0 = mul(two, mul(r2, r))
        inseparable[c1 * q + c0] = True
    split = one_root = irreducible = 0
    for idx in range(q * q):
        if inseparable[idx]:
            continue
        n = root_count[idx]
        if n == 3:
            split += 1
        elif n == 1:
            one_root += 1
        else:
            irreducible += 1
    return {"split": split, "one_root": one_root, "irreducible": irreducible}
