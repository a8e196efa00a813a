import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import exact_references as ref
from tamagawa.markov import (
    TERMINATE,
    ChainNode,
    CoeffClass,
    UnsupportedClass,
    build_chain,
    delta_spectrum,
    type_spectrum,
    visit_probabilities,
)

P2_Q = [2, 4, 8, 16]
P3_Q = [3, 9, 27]
PNOT6_Q = [5, 7, 11, 13, 25, 49]

GRID = ([("pnot6", q, 1) for q in PNOT6_Q]
        + [("p3", q, e) for q in P3_Q for e in range(1, 7)]
        + [("p2", q, e) for q in P2_Q for e in range(1, 7)])

ORACLE = json.loads(
    (Path(__file__).parent / "data" / "spectra_oracle.json").read_text())


def family_masses(chain):
    vis = visit_probabilities(chain)
    out = {}
    for node, v in vis.items():
        fam = chain.families[node]
        out[fam] = out.get(fam, Fraction(0)) + v
    return out


@pytest.mark.parametrize("q", PNOT6_Q)
def test_short_chain_is_one_self_loop(q):
    chain = build_chain(q, 1, "pnot6")
    s = chain.start
    assert chain.nodes == (s,)
    assert chain.edges == {
        (s, s): Fraction(1, q ** 10),
        (s, TERMINATE): 1 - Fraction(1, q ** 10),
    }


@pytest.mark.parametrize("q", P3_Q)
def test_ramified3_e1_edges(q):
    chain = build_chain(q, 1, "p3")
    s = chain.start
    f0 = ChainNode(a2=CoeffClass(0, True))
    assert chain.edges[(s, s)] == Fraction(1, q ** 10)
    assert chain.edges[(s, f0)] == Fraction(q - 1, q ** 10)
    assert chain.edges[(s, TERMINATE)] == 1 - Fraction(1, q ** 9)
    assert chain.edges[(f0, TERMINATE)] == 1
    assert set(chain.nodes) == {s, f0}


@pytest.mark.parametrize("q", P2_Q)
def test_ramified2_e1_edges(q):
    chain = build_chain(q, 1, "p2")
    s = chain.start
    deep0 = ChainNode(a1=CoeffClass(1, False), a3=CoeffClass(0, True))
    shallow = ChainNode(a1=CoeffClass(0, True), a3=CoeffClass(0, False))
    assert chain.edges[(s, s)] == Fraction(1, q ** 10)
    assert chain.edges[(s, deep0)] == Fraction(q - 1, q ** 10)
    assert chain.edges[(s, shallow)] == Fraction(q - 1, q ** 9)
    assert chain.edges[(s, TERMINATE)] == 1 - Fraction(1, q ** 8)
    assert chain.families[deep0] == "a1>=1,a3=0"
    assert chain.families[shallow] == "a1=0"


@pytest.mark.parametrize("pclass,q,e", GRID)
def test_out_weights_sum_to_one(pclass, q, e):
    chain = build_chain(q, e, pclass)
    for node in chain.nodes:
        assert sum(w for _, w in chain.out_edges(node)) == 1


@pytest.mark.parametrize("pclass,q,e", GRID)
def test_only_cycle_is_start_self_loop(pclass, q, e):
    chain = build_chain(q, e, pclass)
    for (src, dst), w in chain.edges.items():
        if dst is TERMINATE or w == 0:
            continue
        if dst == src:
            assert src == chain.start
        else:
            assert dst.rank() < src.rank()


@pytest.mark.parametrize("pclass,q,e", GRID)
def test_visits_start_and_normalization(pclass, q, e):
    chain = build_chain(q, e, pclass)
    vis = visit_probabilities(chain)
    assert vis[chain.start] == Fraction(q ** 10, q ** 10 - 1)
    assert sum(vis[n] * chain.terminate_weight(n) for n in chain.nodes) == 1


@pytest.mark.parametrize("q", P3_Q)
def test_ramified3_e1_leaf_visits(q):
    chain = build_chain(q, 1, "p3")
    vis = visit_probabilities(chain)
    v0 = Fraction(q ** 10, q ** 10 - 1)
    assert vis[ChainNode(a2=CoeffClass(0, True))] == v0 * (q - 1) / q ** 10


@pytest.mark.parametrize("key", sorted(ORACLE))
def test_spectrum_matches_frozen_oracle(key):
    pclass, q, e = key.split(",")
    spec = delta_spectrum(int(q), int(e), pclass, m_max=8)
    expected = ORACLE[key]
    for c in range(1, 9):
        assert spec.delta(c) == Fraction(expected[str(c)]), f"c={c}"
    assert spec.tail == Fraction(expected["tail"])


def test_known_point_densities():
    assert delta_spectrum(2, 1, "p2").delta(1) == Fraction(241, 396)
    assert delta_spectrum(5, 1, "pnot6").delta(3) == Fraction(7825, 2441406)


@pytest.mark.parametrize("pclass,q,e", GRID)
def test_spectrum_total_is_one(pclass, q, e):
    assert delta_spectrum(q, e, pclass).total() == 1


@pytest.mark.parametrize("q", P3_Q)
def test_ramified3_e1_tail_coefficient(q):
    spec = delta_spectrum(q, 1, "p3")
    assert spec.tail == Fraction((q - 1) ** 2, 2 * q * (q ** 10 - 1))
    # beyond the cutoff the density is a pure geometric term
    c = spec.c_cut + 3
    assert spec.delta(c) == Fraction((q - 1) ** 2,
                                     2 * q ** (c + 1) * (q ** 10 - 1))


def test_cutoff_choice_does_not_change_values():
    lo = delta_spectrum(7, 1, "pnot6", m_max=4)
    hi = delta_spectrum(7, 1, "pnot6", m_max=11)
    for c in range(1, 20):
        assert lo.delta(c) == hi.delta(c)
    assert lo.total() == hi.total() == 1
    assert lo.mean() == hi.mean()


@pytest.mark.parametrize("pclass,q,e", [("pnot6", 5, 1), ("p3", 3, 2),
                                        ("p2", 2, 3)])
def test_degenerate_spectrum_omits_continuation(pclass, q, e):
    chain = build_chain(q, e, pclass)
    cut = delta_spectrum(q, e, pclass, include_rescaling=False)
    assert cut.total() == 1 - chain.columns[chain.start].nonminimal


@pytest.mark.parametrize("q", PNOT6_Q)
def test_short_chain_spectrum_is_scaled_one_step(q):
    # a single self-looping family: iterating just multiplies by V0
    full = delta_spectrum(q, 1, "pnot6")
    cut = delta_spectrum(q, 1, "pnot6", include_rescaling=False)
    v0 = Fraction(q ** 10, q ** 10 - 1)
    for c in range(1, 12):
        assert full.delta(c) == v0 * cut.delta(c)
    assert full.tail == v0 * cut.tail


@pytest.mark.parametrize("pclass,q,e", [("pnot6", 7, 1), ("p3", 9, 3),
                                        ("p2", 4, 2)])
def test_type_spectrum_refines_delta(pclass, q, e):
    spec = delta_spectrum(q, e, pclass, m_max=8)
    types = type_spectrum(q, e, pclass, n_max=8)
    # c=3 and c=5..8 receive no contributions from unbounded-n rows other
    # than the split multiplicative one, so the per-type split is complete
    assert spec.delta(3) == (types.get(("In", 3, 3), 0)
                             + types.get(("IV", None, 3), 0)
                             + types.get(("IV*", None, 3), 0))
    for c in (5, 6, 7, 8):
        assert spec.delta(c) == types.get(("In", c, c), 0)


@pytest.mark.parametrize("q", PNOT6_Q)
@pytest.mark.parametrize("n", [3, 4, 7])
def test_per_type_short_form(q, n):
    types = type_spectrum(q, 1, "pnot6", n_max=n)
    for key, val in ref.unramified_types(q, n).items():
        assert types[key] == val, key


@pytest.mark.parametrize("q", P3_Q)
@pytest.mark.parametrize("n", [3, 5, 8])
def test_per_type_ramified3_e1(q, n):
    types = type_spectrum(q, 1, "p3", n_max=n)
    for key, val in ref.ramified3_e1_types(q, n).items():
        assert types[key] == val, key


@pytest.mark.parametrize("q", P2_Q)
@pytest.mark.parametrize("e", [1, 2])
@pytest.mark.parametrize("n", [3, 6])
def test_per_type_ramified2(q, e, n):
    types = type_spectrum(q, e, "p2", n_max=n)
    for key, val in ref.ramified2_types(q, e, n).items():
        assert types[key] == val, key


@pytest.mark.parametrize("q", P3_Q)
@pytest.mark.parametrize("e", [2, 3, 4, 5, 6])
def test_per_type_ramified3_deep(q, e):
    types = type_spectrum(q, e, "p3", n_max=6)
    for key, val in ref.ramified3_deep_types(q, e, 6).items():
        assert types[key] == val, key


@pytest.mark.parametrize("q", P2_Q)
@pytest.mark.parametrize("e", [3, 4, 5, 6])
def test_deep_ramified2_visit_masses(q, e):
    masses = family_masses(build_chain(q, e, "p2"))
    assert masses["a1=0"] == ref.accum_a(q, e)
    assert masses["a1=1,a3>=1"] * (1 - Fraction(q) ** -8) == ref.accum_c(q, e)
    assert masses["a1=2,a3>=2"] * (1 - Fraction(q) ** -7) == ref.accum_e(q, e)
    if e in (3, 5):
        assert masses["a1>=1,a3=0"] == ref.accum_b(q, e)
    if e in (3, 4):
        assert masses["a1>=2,a3=1"] == ref.accum_d(q, e)
    if e in (4, 5):
        assert masses["a1>=3,a3=2"] == ref.accum_f(q, e)


def test_build_chain_rejects_bad_input():
    with pytest.raises(UnsupportedClass):
        build_chain(5, 1, "p5")
    with pytest.raises(UnsupportedClass):
        build_chain(5, 0, "pnot6")
    with pytest.raises(UnsupportedClass):
        build_chain(1, 1, "pnot6")
    with pytest.raises(UnsupportedClass):
        build_chain(Fraction(5, 2), 1, "pnot6")


@settings(max_examples=40, deadline=None)
@given(q=st.integers(2, 32), e=st.integers(1, 5),
       pclass=st.sampled_from(["pnot6", "p3", "p2"]),
       m_max=st.integers(1, 10))
def test_spectrum_is_a_distribution(q, e, pclass, m_max):
    spec = delta_spectrum(q, e, pclass, m_max=m_max)
    assert spec.c_cut == max(m_max, 4)
    assert all(v >= 0 for v in spec.finite.values())
    assert spec.tail >= 0
    assert spec.total() == 1
    assert spec.mean() > 1
