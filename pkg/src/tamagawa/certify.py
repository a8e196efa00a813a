"""Machine-checkable certificates for the global-assembly tail bounds.

The interval products in :mod:`tamagawa.global_series` control everything
above the prime bound with three elementary per-place inequalities, valid
for every residue size q >= 5 away from 2 and 3:

* trivial column:      1 - delta(1)       <=  2 / q**2
* average column:      mean - 1           <=  12 / q**2
* coefficient leak:    mass on c >= 2     <=  3 / q**2

together with ``sum_{p > B} 1/p**2 < 1/B``.  Running this module
re-derives the one-node spectrum symbolically, proves each inequality by
exhibiting nonnegative polynomial coefficients after the shift
``q = t + 5``, and pins the chain solver against the closed forms both on
the small-q grid and at the crossover where :func:`~tamagawa.local_density.delta`
switches to the closed forms.

Residue sizes 2, 3 and 4 never appear above a bound ``B >= 3``, so the
q >= 5 range is exactly what the tails consume.

Run it directly::

    python -m tamagawa.certify
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Tuple

import sympy
from sympy import Poly, Rational, Symbol, fraction, oo, simplify, together

from .local_density import _ref_short, _short_spectrum_closed
from .global_series import COEFF_TAIL_NUM, MEAN_TAIL_NUM, TRIVIAL_TAIL_NUM
from .markov import delta_spectrum
from .step_tables import PrimeClass

__all__ = ["certificate_lines", "main"]

_GRID_Q = (5, 7, 11, 13, 25, 49)
_CROSSOVER_Q = 1000003


def _require(ok: bool, label: str) -> None:
    if not ok:
        raise RuntimeError(f"certificate failed: {label}")


def _spectrum_exprs(q: Symbol) -> Tuple[list, object]:
    """Closed-form densities delta(1..8) and the geometric tail weight."""
    finite = [_ref_short(q, c) for c in range(1, 9)]
    tail = q ** 8 * (q - 1) ** 2 / (2 * (q ** 10 - 1))
    return finite, tail


def _shifted_nonneg(expr: object, q: Symbol) -> bool:
    """True when expr >= 0 for all real q >= 5.

    Writes expr = num/den, shifts q = t + 5, and demands that both
    polynomials have only nonnegative coefficients (after a common sign
    flip if together() chose a negative denominator).  Nonnegative
    coefficients at t >= 0 give nonnegative values, and the denominator is
    checked to be strictly positive at t = 0.
    """
    t = Symbol("t", nonnegative=True)
    num, den = fraction(together(expr))
    pn = Poly(sympy.expand(num.subs(q, t + 5)), t)
    pd = Poly(sympy.expand(den.subs(q, t + 5)), t)
    if all(c <= 0 for c in pd.all_coeffs()):
        pn, pd = -pn, -pd
    if not all(c >= 0 for c in pd.all_coeffs()) or pd.eval(0) <= 0:
        return False
    return all(c >= 0 for c in pn.all_coeffs())


def _closed_mean(q: Symbol) -> object:
    finite, tail = _spectrum_exprs(q)
    x = 1 / q
    # sum_{c >= 9} c x^c = x^9 (9 - 8x) / (1 - x)^2
    tail_mean = tail * x ** 9 * (9 - 8 * x) / (1 - x) ** 2
    return sum(c * d for c, d in enumerate(finite, start=1)) + tail_mean


def certificate_lines() -> Iterator[str]:
    """Yield one PASS/NOTE line per certified fact; raise on any failure."""
    q = Symbol("q", positive=True)
    finite, tail = _spectrum_exprs(q)

    total = sum(finite) + tail / (q ** 8 * (q - 1))
    _require(simplify(total - 1) == 0, "densities sum to 1")
    yield "PASS total mass: sum_c delta(c) == 1 identically in q"

    mean = _closed_mean(q)
    for qv in _GRID_Q:
        sp = delta_spectrum(qv, 1, PrimeClass.NOT_ABOVE_6)
        _require(sp.mean() == Fraction(str(Rational(mean.subs(q, qv)))),
                 f"mean formula at q={qv}")
    yield "PASS mean formula: symbolic mean matches chain mean on the grid"

    margin_triv = Rational(TRIVIAL_TAIL_NUM) / q ** 2 - (1 - finite[0])
    _require(_shifted_nonneg(margin_triv, q), "trivial tail constant")
    yield (f"PASS trivial tail: 1 - delta(1) <= {TRIVIAL_TAIL_NUM}/q^2 "
           "for q >= 5 (shifted coefficients nonnegative)")

    margin_mean = Rational(MEAN_TAIL_NUM) / q ** 2 - (mean - 1)
    _require(_shifted_nonneg(margin_mean, q), "mean tail constant")
    yield (f"PASS mean tail: mean - 1 <= {MEAN_TAIL_NUM}/q^2 "
           "for q >= 5 (shifted coefficients nonnegative)")

    _require(COEFF_TAIL_NUM >= TRIVIAL_TAIL_NUM, "coefficient tail constant")
    yield (f"PASS coefficient leak: mass on c >= 2 is 1 - delta(1) "
           f"<= {TRIVIAL_TAIL_NUM}/q^2 <= {COEFF_TAIL_NUM}/q^2")

    n, b = Symbol("n", positive=True), Symbol("b", positive=True)
    tele = sympy.Sum(1 / (n * (n - 1)), (n, b + 1, oo)).doit()
    _require(simplify(tele - 1 / b) == 0, "telescoping prime tail")
    _require(simplify(n ** 2 - n * (n - 1) - n) == 0, "1/n^2 comparison")
    yield ("PASS prime tail: sum_{n>B} 1/n^2 < sum_{n>B} 1/(n(n-1)) == 1/B "
           "(telescoping)")

    x = Symbol("x", positive=True)
    _require(simplify(sympy.diff(sympy.exp(x) * (1 - x), x)
                      + x * sympy.exp(x)) == 0, "exp envelope derivative")
    yield ("NOTE product envelopes: prod(1+a_i) <= exp(sum a_i) <= "
           "1/(1 - sum a_i) since e^x (1-x) falls from 1, and "
           "prod(1-a_i) >= 1 - sum a_i term by term")

    for qv in _GRID_Q:
        qf = Fraction(qv)
        sp = delta_spectrum(qv, 1, PrimeClass.NOT_ABOVE_6)
        for c in range(1, 9):
            _require(sp.delta(c) == _ref_short(qf, c),
                     f"grid spectrum q={qv} c={c}")
        _require(sp.delta(12) == _ref_short(qf, 12),
                 f"grid tail q={qv}")
        for e in (2, 3):
            _require(delta_spectrum(qv, e, PrimeClass.NOT_ABOVE_6).finite
                     == sp.finite, f"ramification independence q={qv} e={e}")
    yield ("PASS grid: chain spectra equal the closed forms for q in "
           f"{_GRID_Q}, independent of ramification")

    sp_chain = delta_spectrum(_CROSSOVER_Q, 1, PrimeClass.NOT_ABOVE_6)
    sp_closed = _short_spectrum_closed(_CROSSOVER_Q)
    _require(sp_chain.finite == sp_closed.finite
             and sp_chain.tail == sp_closed.tail
             and sp_chain.mean() == sp_closed.mean(),
             "crossover spectrum")
    yield (f"PASS crossover: chain and closed spectra agree exactly at "
           f"q = {_CROSSOVER_Q}")


def main() -> int:
    for line in certificate_lines():
        print(line)
    print("certificate complete")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
