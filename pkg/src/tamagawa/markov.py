"""Family-system chains over the rescaling step, and local spectra.

A non-minimal model rescales to a new integral model whose coefficient
valuations drop by (1, 2, 3, 4, 6).  Within a coefficient family this
induces a transition kernel on valuation classes: the non-minimal mass of
the family redistributes over the classes of the image family, with an
exact valuation i above the image floor m carrying measure
(q-1)/q^(i-m+1) and the residual tail carrying 1/q^(i-m).  Iterating
gives a chain whose only cycle is the start family's self-loop, so
expected visit counts are exact rationals computed by one topological
sweep, and the local density of each component number c is the
visit-weighted sum of step-table densities.

Component counts above the finite cutoff come from split multiplicative
rows only (every other unbounded row stops at c <= 4), so the spectrum
tail is a single geometric coefficient: delta(c) = tail * q**-c for
c > c_cut.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from .step_tables import (
    PrimeClass,
    SHORT_FAMILY,
    StepColumn,
    chi_column,
    phi_column,
    psi_column,
)

__all__ = [
    "UnsupportedClass",
    "CoeffClass",
    "ChainNode",
    "FamilyChain",
    "DensitySpectrum",
    "TERMINATE",
    "build_chain",
    "visit_probabilities",
    "delta_spectrum",
    "type_spectrum",
]


class UnsupportedClass(ValueError):
    """Raised for a (q, e, prime class) combination with no chain."""


TERMINATE = "terminate"


@dataclass(frozen=True)
class CoeffClass:
    """Valuation class of one coefficient: v = bound exactly, or v >= bound."""

    bound: int
    exact: bool

    def __str__(self) -> str:
        return f"={self.bound}" if self.exact else f">={self.bound}"

    @property
    def rank(self) -> Fraction:
        return Fraction(2 * self.bound + (0 if self.exact else 1), 2)


@dataclass(frozen=True)
class ChainNode:
    """A family of models grouped by coefficient valuation classes.

    Fields are None when the coefficient is unconstrained: the short-form
    system uses no classes, the characteristic-3 system classes a2, the
    characteristic-2 system classes a1 and a3.
    """

    a1: Optional[CoeffClass] = None
    a2: Optional[CoeffClass] = None
    a3: Optional[CoeffClass] = None

    def describe(self) -> str:
        parts = [f"{name}{cc}" for name, cc in
                 (("a1", self.a1), ("a2", self.a2), ("a3", self.a3))
                 if cc is not None]
        return ",".join(parts) if parts else SHORT_FAMILY

    def rank(self) -> Fraction:
        return sum((cc.rank for cc in (self.a1, self.a2, self.a3)
                    if cc is not None), Fraction(0))


@dataclass(frozen=True)
class FamilyChain:
    """Chain of coefficient families under the rescaling step.

    ``nodes`` is topologically ordered (start first, rank decreasing).
    ``edges`` maps (source, target) to exact transition mass; targets are
    ChainNodes or the TERMINATE sentinel, and each source's out-weights
    sum to 1.  ``columns`` gives each node's step-table column, whose
    ``nonminimal`` equals the node's total continuation mass.
    """

    q: Fraction
    e: int
    prime_class: PrimeClass
    start: ChainNode
    nodes: Tuple[ChainNode, ...]
    edges: Mapping[Tuple[ChainNode, object], Fraction]
    columns: Mapping[ChainNode, StepColumn]
    families: Mapping[ChainNode, str]

    def out_edges(self, node: ChainNode) -> List[Tuple[object, Fraction]]:
        return [(dst, w) for (src, dst), w in self.edges.items()
                if src == node]

    def terminate_weight(self, node: ChainNode) -> Fraction:
        return self.edges[(node, TERMINATE)]


def _resolve_class(prime_class: Union[PrimeClass, str]) -> PrimeClass:
    if isinstance(prime_class, PrimeClass):
        return prime_class
    try:
        return PrimeClass(prime_class)
    except ValueError:
        raise UnsupportedClass(f"unknown prime class {prime_class!r}") from None


def _exact_split(q: Fraction, floor: int, cap: int) -> List[Tuple[CoeffClass, Fraction]]:
    """Decompose the class {v >= floor} into exact values below cap plus
    the residual {v >= cap}: P(v = floor + i) = (q-1)/q^(i+1)."""
    out: List[Tuple[CoeffClass, Fraction]] = []
    pool = Fraction(1)
    for i in range(floor, cap):
        w = (q - 1) / q ** (i - floor + 1)
        out.append((CoeffClass(i, True), w))
        pool -= w
    out.append((CoeffClass(cap, False), pool))
    return out


def _p3_family(node: ChainNode, e: int) -> str:
    cc = node.a2
    if cc.exact and cc.bound == 0:
        return "a2=0"
    if e == 1:
        return "a2>=1"
    if cc.exact and cc.bound == 1:
        return "a2=1"
    return "a2>=2"


def _p2_family(node: ChainNode, e: int) -> str:
    c1, c3 = node.a1, node.a3
    if c1.exact and c1.bound == 0:
        return "a1=0"
    if c3.exact and c3.bound == 0:
        return "a1>=1,a3=0"
    if e == 1:
        return "a1>=1,a3>=1"
    if c1.exact and c1.bound == 1:
        return "a1=1,a3>=1"
    if c3.exact and c3.bound == 1:
        return "a1>=2,a3=1"
    if e == 2:
        return "a1>=2,a3>=2"
    if c1.exact and c1.bound == 2:
        return "a1=2,a3>=2"
    if c3.exact and c3.bound == 2:
        return "a1>=3,a3=2"
    return "a1>=3,a3>=3"


def _p2_node_mass(q: Fraction, node: ChainNode) -> Fraction:
    """Continuation mass straight from the valuation classes: the model is
    non-minimal iff a4, a6 vanish to order 6 (mass q^-6) and a1, a3 to
    orders 1 and 3."""
    def p_at_least(cc: CoeffClass, threshold: int) -> Fraction:
        if cc.exact:
            return Fraction(1 if cc.bound >= threshold else 0)
        return Fraction(1) / q ** max(0, threshold - cc.bound)

    return p_at_least(node.a1, 1) * p_at_least(node.a3, 3) / q ** 6


def build_chain(q: Union[int, Fraction], e: int,
                prime_class: Union[PrimeClass, str]) -> FamilyChain:
    """Generate the family chain for one (q, e, prime class)."""
    pc = _resolve_class(prime_class)
    if not isinstance(e, int) or e < 1:
        raise UnsupportedClass(f"ramification index {e!r} must be an integer >= 1")
    qf = Fraction(q)
    if qf.denominator != 1 or qf < 2:
        raise UnsupportedClass(f"residue field size {q!r} must be an integer >= 2")

    if pc is PrimeClass.NOT_ABOVE_6:
        start = ChainNode()
        col = phi_column(qf)
        edges = {
            (start, start): col.nonminimal,
            (start, TERMINATE): 1 - col.nonminimal,
        }
        return FamilyChain(qf, e, pc, start, (start,), edges,
                           {start: col}, {start: SHORT_FAMILY})

    if pc is PrimeClass.ABOVE_3:
        return _build_p3(qf, e)
    return _build_p2(qf, e)


def _build_p3(q: Fraction, e: int) -> FamilyChain:
    start = ChainNode(a2=CoeffClass(e, False))
    nodes = [start] + [ChainNode(a2=CoeffClass(j, True))
                       for j in range(e - 1, -1, -1)]
    families = {n: _p3_family(n, e) for n in nodes}
    columns = {n: chi_column(q, e, families[n]) for n in nodes}
    edges: Dict[Tuple[ChainNode, object], Fraction] = {}
    for node in nodes:
        mass = columns[node].nonminimal
        edges[(node, TERMINATE)] = 1 - mass
        if mass == 0:
            continue
        cc = node.a2
        if cc.exact:
            # image class is again exact, two levels down
            edges[(node, ChainNode(a2=CoeffClass(cc.bound - 2, True)))] = mass
            continue
        floor = 0 if e == 1 else cc.bound - 2
        for target, w in _exact_split(q, floor, e):
            edges[(node, ChainNode(a2=target))] = mass * w
    return FamilyChain(q, e, PrimeClass.ABOVE_3, start, tuple(nodes), edges,
                       columns, families)


def _build_p2(q: Fraction, e: int) -> FamilyChain:
    start = ChainNode(a1=CoeffClass(e, False), a3=CoeffClass(e, False))

    def branches(node: ChainNode) -> List[Tuple[ChainNode, Fraction]]:
        out: List[Tuple[ChainNode, Fraction]] = []
        c1, c3 = node.a1, node.a3
        if c1.exact:
            b1s = [(CoeffClass(c1.bound - 1, True), Fraction(1))]
        else:
            b1s = _exact_split(q, c1.bound - 1, e)
        for b1, w1 in b1s:
            if c3.exact:
                b3s = [(CoeffClass(c3.bound - 3, True), Fraction(1))]
            else:
                # the alpha3 class never needs refining past the alpha1
                # level, so the image tail is capped at the branch level
                floor = max(c3.bound, 3) - 3
                b3s = _exact_split(q, floor, b1.bound)
            for b3, w3 in b3s:
                out.append((ChainNode(a1=b1, a3=b3), w1 * w3))
        return out

    nodes_set = {start}
    frontier = [start]
    edges: Dict[Tuple[ChainNode, object], Fraction] = {}
    masses: Dict[ChainNode, Fraction] = {}
    while frontier:
        node = frontier.pop()
        mass = _p2_node_mass(q, node)
        masses[node] = mass
        if mass == 0:
            continue
        for dst, w in branches(node):
            if dst != node and dst.rank() >= node.rank():
                raise AssertionError(f"rank must drop: {node} -> {dst}")
            edges[(node, dst)] = edges.get((node, dst), Fraction(0)) + mass * w
            if dst not in nodes_set:
                nodes_set.add(dst)
                frontier.append(dst)

    nodes = sorted(nodes_set, key=lambda n: n.rank(), reverse=True)
    assert nodes[0] == start
    families = {n: _p2_family(n, e) for n in nodes}
    columns = {n: psi_column(q, e, families[n]) for n in nodes}
    for n in nodes:
        # the family token must carry the same continuation mass as the
        # node's own valuation classes
        if columns[n].nonminimal != masses[n]:
            raise AssertionError(
                f"column mass mismatch at {n.describe()}: "
                f"{columns[n].nonminimal} != {masses[n]}")
        edges[(n, TERMINATE)] = 1 - masses[n]
    return FamilyChain(q, e, PrimeClass.ABOVE_2, start, tuple(nodes), edges,
                       columns, families)


def visit_probabilities(chain: FamilyChain) -> Dict[ChainNode, Fraction]:
    """Expected visits per node from one start, resumming the self-loop."""
    self_w = chain.edges.get((chain.start, chain.start), Fraction(0))
    visits: Dict[ChainNode, Fraction] = {n: Fraction(0) for n in chain.nodes}
    visits[chain.start] = 1 / (1 - self_w)
    for node in chain.nodes:
        v = visits[node]
        if v == 0:
            continue
        for dst, w in chain.out_edges(node):
            if dst is TERMINATE or dst == node:
                continue
            visits[dst] += v * w
    return visits


@dataclass(frozen=True)
class DensitySpectrum:
    """Local component-number distribution at one place.

    ``finite[c]`` is exact for 1 <= c <= c_cut; beyond the cutoff
    delta(c) = tail * q**-c.
    """

    q: Fraction
    c_cut: int
    finite: Mapping[int, Fraction]
    tail: Fraction

    def delta(self, c: int) -> Fraction:
        if c < 1:
            return Fraction(0)
        if c <= self.c_cut:
            return self.finite.get(c, Fraction(0))
        return self.tail * self.q ** -c

    def mass_above(self, m: int) -> Fraction:
        """Exact Sum of delta(c) over c > m."""
        if m >= self.c_cut:
            return self.tail * self.q ** -m / (self.q - 1)
        head = sum(v for c, v in self.finite.items() if c > m)
        return head + self.tail * self.q ** -self.c_cut / (self.q - 1)

    def total(self) -> Fraction:
        return sum(self.finite.values(), Fraction(0)) + self.mass_above(self.c_cut)

    def mean(self) -> Fraction:
        """Sum of c * delta(c), exact (tail summed in closed form)."""
        head = sum(c * v for c, v in self.finite.items())
        x = 1 / self.q
        m = self.c_cut + 1
        tail_sum = x ** m * (m - (m - 1) * x) / (1 - x) ** 2
        return head + self.tail * tail_sum


def _fold_column(col: StepColumn, weight: Fraction, finite: Dict[int, Fraction],
                 c_cut: int) -> Fraction:
    """Add one visit-weighted column to the finite spectrum; return the
    tail-coefficient contribution."""
    q = col.q
    x = 1 / q
    for (_, c), val in col.fixed.items():
        finite[c] += weight * val
    tail = Fraction(0)
    if col.mult is not None:
        row = col.mult
        assert row.start == 3
        base = weight * row.coeff * q ** -row.shift
        # nonsplit halves: odd n >= 3 at c = 1, even n >= 4 at c = 2
        finite[1] += base * x ** 3 / (1 - x * x)
        finite[2] += base * x ** 4 / (1 - x * x)
        for c in range(3, c_cut + 1):
            finite[c] += weight * row.term(q, c)
        tail += base
    if col.additive is not None:
        row = col.additive
        assert row.start == 1
        base = weight * row.coeff * q ** -row.shift
        finite[2] += base * x / (1 - x)
        finite[4] += base * x / (1 - x)
    return tail


def delta_spectrum(q: Union[int, Fraction], e: int,
                   prime_class: Union[PrimeClass, str],
                   m_max: int = 8,
                   include_rescaling: bool = True) -> DensitySpectrum:
    """Exact local spectrum delta(c) for c <= max(m_max, 4) plus tail.

    With ``include_rescaling`` false the chain is cut at its start node
    (continuation mass discarded), leaving the raw one-step spectrum of
    the start family; the result then totals 1 - nonminimal mass.
    """
    chain = build_chain(q, e, prime_class)
    c_cut = max(m_max, 4)
    if include_rescaling:
        visits = visit_probabilities(chain)
    else:
        visits = {chain.start: Fraction(1)}
    finite = {c: Fraction(0) for c in range(1, c_cut + 1)}
    tail = Fraction(0)
    for node, v in visits.items():
        if v == 0:
            continue
        tail += _fold_column(chain.columns[node], v, finite, c_cut)
    return DensitySpectrum(chain.q, c_cut, finite, tail)


def type_spectrum(q: Union[int, Fraction], e: int,
                  prime_class: Union[PrimeClass, str],
                  n_max: int = 8) -> Dict[Tuple[str, Optional[int], int], Fraction]:
    """Per-type local densities, n-indexed rows expanded up to n_max.

    Keys are (kind, n, c) with n None for n-independent types.
    """
    chain = build_chain(q, e, prime_class)
    visits = visit_probabilities(chain)
    out: Dict[Tuple[str, Optional[int], int], Fraction] = {}

    def add(key: Tuple[str, Optional[int], int], val: Fraction) -> None:
        out[key] = out.get(key, Fraction(0)) + val

    for node, v in visits.items():
        if v == 0:
            continue
        col = chain.columns[node]
        for (label, c), val in col.fixed.items():
            add((label, None, c), v * val)
        if col.mult is not None:
            for n in range(3, n_max + 1):
                t = v * col.mult.term(col.q, n)
                add(("In", n, n), t)
                add(("In", n, 1 if n % 2 else 2), t)
        if col.additive is not None:
            for n in range(1, n_max + 1):
                t = v * col.additive.term(col.q, n)
                add(("In*", n, 2), t)
                add(("In*", n, 4), t)
    return out
