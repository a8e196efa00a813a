"""Truncated pi-adic arithmetic in O = W(F_q)[pi]/(pi^e - p).

Elements live over the Z_p-basis {x^k pi^j : k < f, j < e} as integer
coefficient vectors, reduced so that the truncation modulo pi^N is
canonical.  The pi-adic digit expansion (packed F_q ints, naive section)
is derived lazily.  Every element carries ``prec``, the number of trusted
leading digits: arithmetic degrades it by the usual ultrametric rules and
digit reads beyond it raise, so downstream consumers can never silently
use digits that were not really known.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence, Union

from .residue_field import FqField, NonPrimeP, fq_make, is_prime

__all__ = [
    "AtLeastN",
    "PrecisionExceeded",
    "ZeroToPrecision",
    "LocalRing",
    "LocalElem",
    "ring_make",
    "val",
    "unit_part",
    "sample_uniform",
    "enumerate_residues",
]


class PrecisionExceeded(ValueError):
    """A digit or residue beyond the trusted precision was requested."""


class ZeroToPrecision(ValueError):
    """unit_part of an element that vanishes to its full precision."""


@dataclass(frozen=True)
class AtLeastN:
    """Valuation lower bound for an element with no visible nonzero digit."""

    bound: int


class LocalRing:
    """Fixed-precision model of the ring of integers of a local field with
    residue field F_q = F_{p^f} and ramification index e (pi^e = p)."""

    def __init__(self, p: int, f: int, e: int, N: int):
        if not is_prime(p):
            raise NonPrimeP(f"{p} is not prime")
        if f < 1 or e < 1:
            raise ValueError("f and e must be >= 1")
        if N <= e:
            raise ValueError("precision N must exceed e")
        self.p, self.f, self.e, self.N = p, f, e, N
        self.field: FqField = fq_make(p, f)
        self.q = p**f
        self.rank = f * e
        # coefficient of x^k pi^j is canonical modulo p^ceil((N-j)/e)
        self._mods = tuple(p ** (-(-(N - j) // e)) for j in range(e))
        self._mods_flat = tuple(self._mods[u // f] for u in range(self.rank))
        if f > 1:
            ghat = [int(c) for c in self.field.modulus[:-1]]
            rows = [[-c for c in ghat]]  # x^f mod ghat
            for _ in range(f - 2):
                prev = rows[-1]
                nxt = [0] * f
                for k in range(f - 1):
                    nxt[k + 1] = prev[k]
                lead = prev[f - 1]
                if lead:
                    for k in range(f):
                        nxt[k] += lead * -ghat[k]
                rows.append(nxt)
            self._xrows = rows
        else:
            self._xrows = []
        self.zero = LocalElem(self, (0,) * self.rank, N)
        self.one = self.from_int(1)
        self.pi = self.pi_pow(1)

    def __repr__(self):  # pragma: no cover
        return f"LocalRing(p={self.p}, f={self.f}, e={self.e}, N={self.N})"

    # -- construction --

    def from_int(self, n: int) -> "LocalElem":
        co = [0] * self.rank
        co[0] = n % self._mods[0]
        return LocalElem(self, tuple(co), self.N)

    def from_digits(self, digits: Sequence[int], prec: Optional[int] = None) -> "LocalElem":
        """Element with the given leading pi-adic digits (packed F_q ints).

        ``prec`` defaults to len(digits): only what was supplied is trusted.
        Pass prec=N to assert the remaining digits are exactly zero.
        """
        if len(digits) > self.N:
            raise PrecisionExceeded("more digits than working precision")
        f, e, p = self.f, self.e, self.p
        co = [0] * self.rank
        for i, d in enumerate(digits):
            m, j = divmod(i, e)
            pm = p**m
            cs = self.field.coeffs(d)
            for k in range(f):
                if cs[k]:
                    co[j * f + k] += cs[k] * pm
        co = [c % self._mods_flat[u] for u, c in enumerate(co)]
        return LocalElem(self, tuple(co), len(digits) if prec is None else min(prec, self.N))

    def pi_pow(self, k: int) -> "LocalElem":
        if k >= self.N:
            return LocalElem(self, (0,) * self.rank, self.N)
        return self.from_digits([0] * k + [1], prec=self.N)

    # -- kernels on coefficient vectors --

    def _add_co(self, A, B):
        mf = self._mods_flat
        return tuple((a + b) % mf[u] for u, (a, b) in enumerate(zip(A, B)))

    def _sub_co(self, A, B):
        mf = self._mods_flat
        return tuple((a - b) % mf[u] for u, (a, b) in enumerate(zip(A, B)))

    def _neg_co(self, A):
        mf = self._mods_flat
        return tuple(-a % mf[u] for u, a in enumerate(A))

    def _scale_co(self, A, c: int):
        mf = self._mods_flat
        return tuple(a * c % mf[u] for u, a in enumerate(A))

    def _mul_co(self, A, B):
        f, e, p = self.f, self.e, self.p
        if f == 1 and e == 1:
            return (A[0] * B[0] % self._mods[0],)
        rows = [[0] * (2 * f - 1) for _ in range(2 * e - 1)]
        for j1 in range(e):
            b1 = j1 * f
            for k1 in range(f):
                a = A[b1 + k1]
                if a:
                    for j2 in range(e):
                        row = rows[j1 + j2]
                        b2 = j2 * f
                        for k2 in range(f):
                            b = B[b2 + k2]
                            if b:
                                row[k1 + k2] += a * b
        if f > 1:
            for row in rows:
                for t in range(2 * f - 2, f - 1, -1):
                    c = row[t]
                    if c:
                        row[t] = 0
                        red = self._xrows[t - f]
                        for k in range(f):
                            if red[k]:
                                row[k] += c * red[k]
        for j in range(2 * e - 2, e - 1, -1):
            src, tgt = rows[j], rows[j - e]
            for k in range(f):
                if src[k]:
                    tgt[k] += p * src[k]
        out = [0] * self.rank
        for j in range(e):
            m = self._mods[j]
            row = rows[j]
            for k in range(f):
                out[j * f + k] = row[k] % m
        return tuple(out)

    def _digits_of(self, co) -> tuple:
        p, f = self.p, self.f
        fld = self.field
        cur = list(co)
        digs = []
        for _ in range(self.N):
            dc = [cur[k] % p for k in range(f)]
            digs.append(fld.from_coeffs(dc))
            head = [(cur[k] - dc[k]) // p for k in range(f)]
            cur = cur[f:] + head
        return tuple(digs)


class LocalElem:
    """One ring element, known modulo pi^prec."""

    __slots__ = ("ring", "co", "prec", "_digits", "_val")

    def __init__(self, ring: LocalRing, co: tuple, prec: int):
        self.ring = ring
        self.co = co
        self.prec = prec
        self._digits = None
        self._val = None

    # -- digit access --

    def digits(self) -> tuple:
        if self._digits is None:
            self._digits = self.ring._digits_of(self.co)
        return self._digits

    def digit(self, i: int) -> int:
        if i >= self.prec:
            raise PrecisionExceeded(f"digit {i} beyond trusted precision {self.prec}")
        return self.digits()[i]

    @property
    def val(self) -> Union[int, AtLeastN]:
        if self._val is None:
            limit = min(self.prec, self.ring.N)
            digs = self.digits()
            v: Union[int, AtLeastN] = AtLeastN(self.prec)
            for i in range(limit):
                if digs[i]:
                    v = i
                    break
            self._val = v
        return self._val

    def _val_floor(self) -> int:
        v = self._val
        if isinstance(v, int):
            return v
        return 0

    def unit_part(self) -> int:
        v = self.val
        if isinstance(v, AtLeastN):
            raise ZeroToPrecision(f"element vanishes to precision {v.bound}")
        return self.digits()[v]

    def is_zero_to_prec(self) -> bool:
        return isinstance(self.val, AtLeastN)

    # -- arithmetic --

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return LocalElem(self.ring, self.ring._add_co(self.co, other.co),
                         min(self.prec, other.prec))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return LocalElem(self.ring, self.ring._sub_co(self.co, other.co),
                         min(self.prec, other.prec))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return LocalElem(self.ring, self.ring._neg_co(self.co), self.prec)

    def __mul__(self, other):
        if isinstance(other, int):
            # a p-divisible scalar pushes the untrusted tail up with it
            if other == 0:
                return self.ring.from_int(0)
            prec = self.prec
            if other % self.ring.p == 0:
                k = abs(other)
                while k % self.ring.p == 0 and prec < self.ring.N:
                    k //= self.ring.p
                    prec = min(prec + self.ring.e, self.ring.N)
            return LocalElem(self.ring, self.ring._scale_co(self.co, other), prec)
        N = self.ring.N
        prec = min(self._val_floor() + other.prec, other._val_floor() + self.prec, N)
        return LocalElem(self.ring, self.ring._mul_co(self.co, other.co), prec)

    __rmul__ = __mul__

    def square(self):
        return self * self

    def shift_down(self, k: int) -> "LocalElem":
        """Exact division by pi^k; requires val >= k (checked on digits)."""
        if k == 0:
            return self
        digs = self.digits()
        if any(digs[i] for i in range(min(k, self.ring.N))):
            raise ValueError("element not divisible by pi^k")
        out = self.ring.from_digits(digs[k:], prec=self.ring.N)
        return LocalElem(out.ring, out.co, max(self.prec - k, 0))

    def shift_up(self, k: int) -> "LocalElem":
        """Multiplication by pi^k."""
        if k == 0:
            return self
        digs = self.digits()
        out = self.ring.from_digits([0] * k + list(digs[: self.ring.N - k]), prec=self.ring.N)
        return LocalElem(out.ring, out.co, min(self.prec + k, self.ring.N))

    # -- comparisons: residue equality modulo pi^N --

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.from_int(other)
        return self.ring is other.ring and self.co == other.co

    def __hash__(self):
        return hash(self.co)

    def __repr__(self):  # pragma: no cover
        shown = ",".join(str(d) for d in self.digits()[: min(self.prec, 8)])
        return f"<pi-adic [{shown}...] prec={self.prec}>"


_RING_CACHE: dict = {}


def ring_make(p: int, f: int, e: int, N: int) -> LocalRing:
    """Build (and cache) the truncated local ring with pi^e = p."""
    key = (p, f, e, N)
    ring = _RING_CACHE.get(key)
    if ring is None:
        ring = LocalRing(p, f, e, N)
        _RING_CACHE[key] = ring
    return ring


def val(x: LocalElem) -> Union[int, AtLeastN]:
    return x.val


def unit_part(x: LocalElem) -> int:
    return x.unit_part()


def sample_uniform(ring: LocalRing, rng) -> LocalElem:
    """Uniform residue modulo pi^N (coefficient-wise uniform is digit-wise
    uniform: the basis change is a bijection)."""
    co = tuple(rng.randrange(m) for m in ring._mods_flat)
    return LocalElem(ring, co, ring.N)


def enumerate_residues(ring: LocalRing, k: int) -> Iterator[LocalElem]:
    """All q^k residues modulo pi^k in lexicographic digit order; yielded
    elements are trusted to exactly k digits."""
    if k > ring.N:
        raise PrecisionExceeded(f"k={k} exceeds working precision {ring.N}")
    for digs in product(range(ring.q), repeat=k):
        yield ring.from_digits(digs)
