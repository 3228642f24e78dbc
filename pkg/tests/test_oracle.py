import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import sample_below_w4
from scatord.ordinals import ONE, OMEGA, ZERO, add, nat, omega_pow, parse_ordinal as P
from scatord.oracle import (
    Atom, D, DefSet, WitnessError, RectUnion, compare_with_engine, def_derive, def_derive_iter,
    fundamental, is_limit_point, lemma3_witness, oracle_rank, rect_derive, rect_derive_iter, rect_probes,
)
from scatord.spaces import parse_expr


def test_derive_examples():
    d = def_derive(D(0, 0, P("w*2")))
    assert d.members() == [OMEGA, P("w*2")]
    assert def_derive(DefSet.finite([nat(1), nat(4), OMEGA])).empty
    assert def_derive_iter(D(0, 0, ONE), ZERO).members() == [ZERO, ONE]
    for xi in range(1, 4):
        assert def_derive_iter(D(0, 0, omega_pow(nat(xi))), nat(xi)).members() == [omega_pow(nat(xi))]


def test_transfinite_iteration():
    s = def_derive_iter(D(0, 0, P("w^w*2")), OMEGA)
    assert s.members() == [P("w^w"), P("w^w*2")]


def test_atom_membership():
    t = Atom(nat(1), P("w"), P("w^2"), lo_open=True, hi_open=True)
    assert P("w*2") in t and OMEGA not in t and P("w^2") not in t and P("w+1") not in t
    assert Atom(ZERO, ZERO, nat(3)).first_after(None) == ZERO


def test_fundamental_sequences():
    assert fundamental(P("w^2"), 3) == P("w*3")
    assert fundamental(P("w^w"), 2) == P("w^2")
    assert fundamental(P("w*3"), 5) == P("w*2+5")


def test_limit_point_probe_matches_derivative():
    s = D(0, 0, P("w^3"))
    d = def_derive(s)
    for b in s.probes():
        assert is_limit_point(s, b) == (b in d), b


def test_rect_examples():
    r = RectUnion(((D(0, 0, OMEGA), D(0, 0, OMEGA)),))
    d1 = rect_derive(r)
    for x, y in rect_probes(r):
        if x <= OMEGA and y <= OMEGA:
            assert ((x, y) in d1) == (x == OMEGA or y == OMEGA)
    assert [p for p in rect_probes(r) if p in rect_derive_iter(r, 2)] == [(OMEGA, OMEGA)]
    one = RectUnion(((DefSet.finite([nat(2)]), DefSet.finite([nat(3)])),))
    assert rect_derive(one).empty


def test_box_in_three_dimensions():
    z = D(0, 0, OMEGA)
    r = RectUnion(((z, z, z),))
    assert [p for p in rect_probes(r) if p in rect_derive_iter(r, 3)] == [(OMEGA, OMEGA, OMEGA)]
    assert rect_derive_iter(r, 4).empty


def test_witness_examples():
    A = DefSet.of(Atom(ONE, OMEGA, P("w^2"), hi_open=True))        # {w*n : 1 <= n < w}
    assert lemma3_witness(A, 1, P("w^2"))
    assert lemma3_witness(A, 0, P("w^2"))
    assert not lemma3_witness(DefSet.finite([nat(1), nat(2), nat(3)]), 1, nat(3))
    with pytest.raises(WitnessError):
        lemma3_witness(A, 1, P("w^3"))


def test_witness_coarse_atoms():
    A = DefSet.of(Atom(nat(2), ZERO, P("w^3"), lo_open=True, hi_open=True))   # {w^2*n}
    assert lemma3_witness(A, 1, P("w^3"))


def test_oracle_rank():
    assert oracle_rank(P("w^3"), P("w^2*2")) == 2
    assert oracle_rank(P("w^3"), P("w*5+1")) == 0


@pytest.mark.parametrize("text", ["ord[w^3*2+w+1]", "ord[w^w]", "ord[w..w^2*2]", "ord[w^2[",
                                  "prod(ord[w],ord[w^2+3])", "prod(z,z)", "prod(ord[w*3],ord[w])",
                                  "prod(ord[w*2],prod(ord[w],ord[w^2+1]))", "prod(prod(ord[w],ord[3]),ord[w*3])"])
def test_compare_with_engine(text):
    c = compare_with_engine(parse_expr(text))
    assert c.ok, c.divergence
    assert c.checked > 0


def test_compare_rejects_other_shapes():
    from scatord.spaces import ValidationError
    with pytest.raises(ValidationError):
        compare_with_engine(parse_expr("hedge((z,w),(z,w))"))


SAMPLE = sample_below_w4(random.Random(11), 60)


def _subset_pairs():
    small = st.sampled_from(SAMPLE)
    return st.tuples(small, small, small, st.integers(0, 2))


@given(_subset_pairs())
@settings(max_examples=80, deadline=None)
def test_derivative_monotone_and_closed(params):
    a, b, c, xi = params
    lo, hi = min(a, b), max(a, b)
    s = DefSet.of(Atom(nat(xi), lo, hi))
    t = DefSet.of(Atom(nat(xi), min(lo, c), max(hi, c)))         # s is a subset of t
    ds, dt = def_derive(s), def_derive(t)
    for p in s.probes() + t.probes():
        if p in s:
            assert p in t
        if p in ds:
            assert p in dt
        if p in def_derive(ds):
            assert p in ds


def test_algebra_closed_under_derivative():
    for th in SAMPLE[:20]:
        s = D(0, 0, th)
        for _ in range(5):
            s = def_derive(s)
            assert all(isinstance(t, Atom) for t in s.atoms)
