"""Independent checks on the reduction engine and the step densities.

Three oracle routes, each avoiding the machinery it is meant to check:

* Monte-Carlo: run the full algorithm on uniformly sampled short models
  and tally component numbers (`monte_carlo_delta`), or run single
  iterations on models drawn from one coefficient family and tally
  outcome types (`monte_carlo_first_step`).
* Exhaustive enumeration: run one iteration on every residue pair
  (a4, a6) mod pi^k and count outcomes exactly
  (`enumerate_first_iteration`).
* Non-minimal classes: count the short classes mod pi^6 that fail
  minimality, either by testing every representative or through the
  explicit two/three-parameter description (`count_nonminimal`,
  `parametrize_nonminimal`).

Exhaustive routes are budget-gated and raise BudgetExceeded rather than
silently degrading to sampling.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from statistics import NormalDist
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Tuple, Union

from .local_density import PrimeLocalProfile
from .local_ring import LocalElem, LocalRing, enumerate_residues, ring_make
from .step_tables import PrimeClass, SHORT_FAMILY, families_for
from .weierstrass import (
    InsufficientPrecision,
    TateMode,
    WeierstrassModel,
    is_minimal,
    tate_run,
)

__all__ = [
    "BudgetExceeded",
    "EmpiricalSpectrum",
    "OutcomeTally",
    "ResidueEnumeration",
    "count_nonminimal",
    "enumerate_first_iteration",
    "exhaustive_nonminimal_classes",
    "monte_carlo_delta",
    "monte_carlo_first_step",
    "parametrize_nonminimal",
    "parametrized_nonminimal_classes",
    "z_for_level",
]

DEFAULT_BUDGET = 10 ** 8

OutcomeKey = Tuple[str, Optional[int], int]


class BudgetExceeded(RuntimeError):
    """An exhaustive route would exceed the configured work budget."""


def z_for_level(level: float) -> float:
    """Two-sided normal quantile: z_for_level(0.9973...) is about 3."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must lie in (0, 1), got {level}")
    return NormalDist().inv_cdf((1.0 + level) / 2.0)


def _outcome_key(kodaira, c: int) -> OutcomeKey:
    if kodaira.kind in ("In", "In*"):
        return (kodaira.kind, kodaira.n, c)
    return (kodaira.kind, None, c)


@dataclass(frozen=True)
class EmpiricalSpectrum:
    """Observed component-number counts from sampled reduction runs.

    ``counts[c]`` is the number of decided samples with c components;
    ``undecided`` is the number of runs the engine aborted for lack of
    precision.  Together they account for every sample.
    """

    samples: int
    counts: Mapping[int, int]
    undecided: int

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("need at least one sample")
        if self.undecided < 0:
            raise ValueError("negative undecided count")
        if any(c < 1 or k < 0 for c, k in self.counts.items()):
            raise ValueError("component numbers start at 1 and counts at 0")
        if sum(self.counts.values()) + self.undecided != self.samples:
            raise ValueError("counts plus undecided must equal samples")

    def delta_hat(self, c: int) -> Fraction:
        """Observed frequency of c components."""
        return Fraction(self.counts.get(c, 0), self.samples)

    def wilson(self, c: int, z: float = 3.0) -> Tuple[float, float]:
        """Wilson score interval for delta(c) at z normal units."""
        if z <= 0:
            raise ValueError("z must be positive")
        n = self.samples
        ph = self.counts.get(c, 0) / n
        zz = z * z / n
        centre = (ph + zz / 2.0) / (1.0 + zz)
        half = z * math.sqrt(ph * (1.0 - ph) / n + zz / (4.0 * n)) / (1.0 + zz)
        return (max(0.0, centre - half), min(1.0, centre + half))

    def z_score(self, c: int, expected: Union[Fraction, float]) -> float:
        """Standardised deviation of the observed frequency of c."""
        exp = float(expected)
        if not 0.0 < exp < 1.0:
            raise ValueError("expected density must lie strictly in (0, 1)")
        sd = math.sqrt(exp * (1.0 - exp) / self.samples)
        return (float(self.delta_hat(c)) - exp) / sd


@dataclass(frozen=True)
class OutcomeTally:
    """Observed first-iteration outcome counts keyed (kind, n, c).

    ``n`` is None except for the multiplicative and additive ladders;
    the key ("nonminimal", None, 0) collects runs that hit the rescaling
    case.
    """

    samples: int
    counts: Mapping[OutcomeKey, int]
    undecided: int

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError("need at least one sample")
        if sum(self.counts.values()) + self.undecided != self.samples:
            raise ValueError("counts plus undecided must equal samples")

    def frequency(self, key: OutcomeKey) -> Fraction:
        return Fraction(self.counts.get(key, 0), self.samples)

    def z_score(self, key: OutcomeKey, expected: Union[Fraction, float]) -> float:
        exp = float(expected)
        if not 0.0 < exp < 1.0:
            raise ValueError("expected density must lie strictly in (0, 1)")
        sd = math.sqrt(exp * (1.0 - exp) / self.samples)
        return (float(self.frequency(key)) - exp) / sd


# ---------------------------------------------------------------------------
# Monte-Carlo over uniform short models


_BLOCK = 1 << 15

# Residue-prefix memo: a run that decides using only the first k digits
# of (a4, a6) gives the same answer for every extension of those digits,
# so its outcome can be cached under the k-digit prefix.  Slot values:
# 0 unvisited, -1 undecided at the prefix depth, c > 0 decided.
_TABLE_SLOT_BUDGET = 1 << 17
_MC_TABLES: Dict[Tuple[int, int, int, int, int], List[int]] = {}


def _table_depth(q: int, precision: int) -> int:
    depth = 1
    while q ** (2 * (depth + 1)) <= _TABLE_SLOT_BUDGET and depth + 1 < precision:
        depth += 1
    return depth


def _digits_of(n: int, q: int, k: int) -> Tuple[int, ...]:
    digs = []
    for _ in range(k):
        n, d = divmod(n, q)
        digs.append(d)
    return tuple(digs)


def _run_c(ring: LocalRing, n4: int, n6: int, k: int) -> int:
    """Component count for the short model with the given digit prefixes,
    or -1 when precision k cannot settle it."""
    q = ring.q
    a4 = ring.from_digits(_digits_of(n4, q, k))
    a6 = ring.from_digits(_digits_of(n6, q, k))
    try:
        return tate_run(WeierstrassModel.short(ring, a4, a6)).c
    except InsufficientPrecision:
        return -1


def monte_carlo_delta(
    profile: PrimeLocalProfile,
    samples: int,
    precision: int = 14,
    seed: int = 0,
    table_depth: Optional[int] = None,
) -> EmpiricalSpectrum:
    """Spectrum estimate from uniform short models mod pi^precision.

    Draws (a4, a6) coefficient digits uniformly, runs the full algorithm
    on each short model and tallies component numbers; runs aborted by
    the engine land in ``undecided``.  Deterministic in ``seed``: samples
    are drawn in fixed blocks with one PRNG per block, so results do not
    depend on scheduling or on memo state.

    ``table_depth`` tunes the residue-prefix memo (None picks a depth
    from q, 0 disables it).  The memo is a pure speed-up: a decision
    reached on a digit prefix is valid for every extension.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if precision < 12:
        raise ValueError("precision below 12 cannot settle the step ladder")
    p, f, e = profile.p, profile.f, profile.e
    q = profile.q
    ring = ring_make(p, f, e, precision)
    depth = _table_depth(q, precision) if table_depth is None else table_depth
    if not 0 <= depth < precision:
        raise ValueError(f"table depth must lie in [0, {precision})")

    table: Optional[List[int]] = None
    chunk = q ** depth
    if depth > 0:
        tkey = (p, f, e, precision, depth)
        table = _MC_TABLES.get(tkey)
        if table is None:
            table = _MC_TABLES.setdefault(tkey, [0] * (chunk * chunk))

    span = q ** precision
    counts: Dict[int, int] = {}
    undecided = 0
    for start in range(0, samples, _BLOCK):
        rng = random.Random(f"{seed}:{start // _BLOCK}")
        for _ in range(min(_BLOCK, samples - start)):
            n4 = rng.randrange(span)
            n6 = rng.randrange(span)
            c = 0
            if table is not None:
                idx = (n4 % chunk) * chunk + (n6 % chunk)
                c = table[idx]
                if c == 0:
                    c = _run_c(ring, n4 % chunk, n6 % chunk, depth)
                    table[idx] = c
            if c <= 0:
                c = _run_c(ring, n4, n6, precision)
            if c > 0:
                counts[c] = counts.get(c, 0) + 1
            else:
                undecided += 1
    return EmpiricalSpectrum(samples, counts, undecided)


# ---------------------------------------------------------------------------
# Monte-Carlo over one coefficient family


def _parse_pattern(token: str) -> Tuple[str, int, bool]:
    """Split a descriptor token into (name, valuation, is_exact)."""
    name, sep, rest = token.partition(">=")
    if sep:
        return name, int(rest), False
    name, _, rest = token.partition("=")
    return name, int(rest), True


def _sample_pattern(
    ring: LocalRing, rng: random.Random, k: int, exact: bool
) -> LocalElem:
    """Uniform element with v = k (exact) or v >= k, rejection-free."""
    q, n = ring.q, ring.N
    digs = [0] * min(k, n)
    if exact:
        if k >= n:
            raise ValueError(f"cannot fix valuation {k} at precision {n}")
        digs.append(rng.randrange(1, q))
    while len(digs) < n:
        digs.append(rng.randrange(q))
    return ring.from_digits(digs)


def monte_carlo_first_step(
    profile: PrimeLocalProfile,
    family: str,
    samples: int,
    precision: int = 14,
    seed: int = 0,
) -> OutcomeTally:
    """First-iteration outcome tally over one coefficient family.

    The family descriptor fixes valuation classes of the odd (a1, a3)
    or even (a2) coefficients; everything else is uniform, with no
    rejection (fixed valuations are built digit by digit).  Coefficients
    the family system eliminates are exactly zero.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if precision < 12:
        raise ValueError("precision below 12 cannot settle the step ladder")
    pc = profile.prime_class
    if family not in families_for(pc, profile.e):
        raise ValueError(f"{family!r} is not a family at (p={profile.p}, e={profile.e})")
    ring = ring_make(profile.p, profile.f, profile.e, precision)
    patterns = {}
    if family != SHORT_FAMILY:
        for token in family.split(","):
            name, k, exact = _parse_pattern(token)
            patterns[name] = (k, exact)

    counts: Dict[OutcomeKey, int] = {}
    undecided = 0
    zero = ring.from_int(0)
    for start in range(0, samples, _BLOCK):
        rng = random.Random(f"{seed}:{start // _BLOCK}")
        for _ in range(min(_BLOCK, samples - start)):
            coeff = {"a1": zero, "a2": zero, "a3": zero}
            for name, (k, exact) in patterns.items():
                coeff[name] = _sample_pattern(ring, rng, k, exact)
            a4 = _sample_pattern(ring, rng, 0, False)
            a6 = _sample_pattern(ring, rng, 0, False)
            model = WeierstrassModel.of(
                ring, coeff["a1"], coeff["a2"], coeff["a3"], a4, a6
            )
            try:
                out = tate_run(model, TateMode.FIRST_ITERATION)
            except InsufficientPrecision:
                undecided += 1
                continue
            key = _outcome_key(out.kodaira, out.c)
            counts[key] = counts.get(key, 0) + 1
    return OutcomeTally(samples, counts, undecided)


# ---------------------------------------------------------------------------
# Exhaustive residue enumeration


@dataclass(frozen=True)
class ResidueEnumeration:
    """Exact outcome counts over all (a4, a6) mod pi^modulus.

    For any outcome density d from the step tables, the sandwich
    counts[key] <= d * q**(2 * modulus) <= counts[key] + undecided
    must hold; outcomes fully decidable at this modulus meet it with
    equality on the left.
    """

    q: int
    modulus: int
    counts: Mapping[OutcomeKey, int]
    undecided: int

    def __post_init__(self) -> None:
        if sum(self.counts.values()) + self.undecided != self.total():
            raise ValueError("counts plus undecided must cover every residue pair")

    def total(self) -> int:
        return self.q ** (2 * self.modulus)

    def brackets(self, key: OutcomeKey) -> Tuple[int, int]:
        """Smallest and largest count consistent with the undecided pool."""
        got = self.counts.get(key, 0)
        return got, got + self.undecided


def enumerate_first_iteration(
    profile: PrimeLocalProfile, k: int, budget: int = DEFAULT_BUDGET
) -> ResidueEnumeration:
    """Run one iteration on every short residue pair mod pi^k and count
    outcomes exactly; pairs the engine cannot settle at k digits are
    reported undecided."""
    if k < 1:
        raise ValueError("modulus exponent must be at least 1")
    q = profile.q
    if q ** (2 * k) > budget:
        raise BudgetExceeded(
            f"{q ** (2 * k)} residue pairs exceed the budget of {budget}"
        )
    ring = ring_make(profile.p, profile.f, profile.e, max(k, profile.e + 1))
    residues = list(enumerate_residues(ring, k))
    counts: Dict[OutcomeKey, int] = {}
    undecided = 0
    for a4 in residues:
        for a6 in residues:
            try:
                out = tate_run(
                    WeierstrassModel.short(ring, a4, a6), TateMode.FIRST_ITERATION
                )
            except InsufficientPrecision:
                undecided += 1
                continue
            key = _outcome_key(out.kodaira, out.c)
            counts[key] = counts.get(key, 0) + 1
    return ResidueEnumeration(q, k, counts, undecided)


# ---------------------------------------------------------------------------
# Non-minimal classes mod pi^6


_CLASS_DIGITS = 6
ClassKey = Tuple[Tuple[int, ...], Tuple[int, ...]]


def _require_wild(profile: PrimeLocalProfile) -> None:
    if profile.p not in (2, 3):
        raise ValueError("class counting is implemented for p in {2, 3} only")


def _class_verdict(
    ring: LocalRing, cube4, a4: LocalElem, d6: Tuple[int, ...]
) -> bool:
    """True when the generic member of the class (a4, d6) is minimal.

    Zero-padding the class digits can land on a singular model (zero
    discriminant), where minimality is meaningless, so representatives
    vary in the free digits beyond pi^6 until the discriminant valuation
    is visible.  Two independent representatives must agree; since the
    non-minimal locus is a union of classes away from the singular set,
    a disagreement means an engine defect and is raised, not masked.
    """
    q = ring.q
    verdicts = []
    for t in range(min(q ** 4, 32)):
        a6 = ring.from_digits(d6 + _digits_of(t, q, 4), prec=ring.N)
        disc = -16 * (cube4 + 27 * a6.square())
        if disc.is_zero_to_prec():
            continue
        if disc.val < 12:
            # certain for this member; a minimal member settles the class
            if not verdicts:
                return True
            verdicts.append(True)
        else:
            try:
                verdicts.append(is_minimal(WeierstrassModel.short(ring, a4, a6)))
            except InsufficientPrecision:
                continue
        if verdicts[0] or len(verdicts) == 2:
            break
    if not verdicts:
        raise RuntimeError(f"no usable representative for class a6 = {d6}")
    if len(verdicts) == 2 and verdicts[0] != verdicts[1]:
        raise RuntimeError(f"minimality not constant on class a6 = {d6}")
    return verdicts[0]


@lru_cache(maxsize=None)
def exhaustive_nonminimal_classes(
    profile: PrimeLocalProfile, budget: int = DEFAULT_BUDGET
) -> FrozenSet[ClassKey]:
    """Digit pairs (a4, a6) mod pi^6 whose short models are non-minimal,
    found by testing two well-posed representatives of every class.

    A representative with v(disc) < 12 is minimal outright, so the
    expensive minimality ladder only runs on the thin residue set where
    the discriminant valuation reaches 12.
    """
    _require_wild(profile)
    q = profile.q
    if q > 4:
        raise BudgetExceeded(f"exhaustive route covers q <= 4, got q = {q}")
    if q ** (2 * _CLASS_DIGITS) > budget:
        raise BudgetExceeded(
            f"{q ** (2 * _CLASS_DIGITS)} classes exceed the budget of {budget}"
        )
    # integer constants in the discriminant carry valuation growing with
    # e, so representatives need headroom beyond v = 12 to stay visible
    depth = 18 + (4 if profile.p == 2 else 3) * profile.e
    ring = ring_make(profile.p, profile.f, profile.e, depth)
    grid = list(product(range(q), repeat=_CLASS_DIGITS))
    out = set()
    for d4 in grid:
        a4 = ring.from_digits(d4, prec=depth)
        cube4 = 4 * (a4.square() * a4)
        for d6 in grid:
            if not _class_verdict(ring, cube4, a4, d6):
                out.add((d4, d6))
    return frozenset(out)


def parametrize_nonminimal(
    profile: PrimeLocalProfile,
    params: Tuple[Union[int, LocalElem], ...],
) -> Tuple[LocalElem, LocalElem]:
    """Short class (a4, a6) mod pi^6 attached to one parameter tuple.

    p = 3 takes (r, w) with r mod pi^min(2,e) and w mod pi^2;
    p = 2 takes (u, v, w) with u mod pi^min(3,e), v mod pi, w mod pi^2.
    Parameters are read modulo their stated power (ints accepted) and
    the returned coefficients are exact residues mod pi^6.
    """
    _require_wild(profile)
    e = profile.e
    ring = ring_make(profile.p, profile.f, e, max(_CLASS_DIGITS, e + 1))

    def canon(x: Union[int, LocalElem], k: int) -> LocalElem:
        if isinstance(x, LocalElem):
            src = (x.ring.p, x.ring.f, x.ring.e)
            if src != (profile.p, profile.f, e):
                raise ValueError(f"parameter from ring {src}, expected "
                                 f"({profile.p}, {profile.f}, {e})")
            el = x
        else:
            el = ring.from_int(x)
        return ring.from_digits(el.digits()[:k], prec=ring.N)

    if profile.p == 3:
        if len(params) != 2:
            raise ValueError("p = 3 takes two parameters (r, w)")
        r = canon(params[0], min(2, e))
        w = canon(params[1], 2)
        a4 = (-3 * r.square()).shift_up(max(0, 4 - 2 * e)) + w.shift_up(4)
        a6 = (2 * (r.square() * r)).shift_up(max(0, 6 - 3 * e)) - (
            r * w
        ).shift_up(max(4, 6 - e))
        return a4, a6

    if len(params) != 3:
        raise ValueError("p = 2 takes three parameters (u, v, w)")
    u = canon(params[0], min(3, e))
    v = canon(params[1], 1)
    w = canon(params[2], 2)
    # a6 carries + signs: the translated-model conditions give
    # a6 = U^2 - R^3 - a4*R with R = -v^2, so the cubes flip sign
    v2 = v.square()
    a4 = (2 * (u * v)).shift_up(max(0, 3 - e)) - 3 * (v2.square()) + w.shift_up(4)
    a6 = u.square().shift_up(max(0, 6 - 2 * e)) + v2.square() * v2 + a4 * v2
    return a4, a6


def _parameter_grid(profile: PrimeLocalProfile) -> Iterator[Tuple[LocalElem, ...]]:
    e = profile.e
    ring = ring_make(profile.p, profile.f, e, max(_CLASS_DIGITS, e + 1))
    if profile.p == 3:
        return product(
            enumerate_residues(ring, min(2, e)), enumerate_residues(ring, 2)
        )
    return product(
        enumerate_residues(ring, min(3, e)),
        enumerate_residues(ring, 1),
        enumerate_residues(ring, 2),
    )


@lru_cache(maxsize=None)
def parametrized_nonminimal_classes(profile: PrimeLocalProfile) -> FrozenSet[ClassKey]:
    """Image of the parameter grid: every class the description reaches."""
    _require_wild(profile)
    out = set()
    for params in _parameter_grid(profile):
        a4, a6 = parametrize_nonminimal(profile, params)
        out.add((a4.digits()[:_CLASS_DIGITS], a6.digits()[:_CLASS_DIGITS]))
    return frozenset(out)


def count_nonminimal(profile: PrimeLocalProfile, budget: int = DEFAULT_BUDGET) -> int:
    """Number of non-minimal short classes mod pi^6.

    Small residue fields (q <= 4) are counted by exhaustive minimality
    testing; larger ones through the parametrized image, whose size the
    exhaustive route confirms on the small grid.
    """
    _require_wild(profile)
    if profile.q <= 4:
        return len(exhaustive_nonminimal_classes(profile, budget))
    return len(parametrized_nonminimal_classes(profile))
