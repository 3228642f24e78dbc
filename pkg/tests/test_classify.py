import itertools
import json
import random

import pytest

from conftest import sample_below_w4
from corpus import COMPACT, CORPUS
from scatord.classify import (
    CONCAT_NOTE, Certificate, ClassifyError, Inconclusive, MSCharacteristic, NotCompact,
    NotCountable, homeomorphic, ms_characteristic, pairwise_distinct,
)
from scatord.families import prop2_space, thm1_space
from scatord.ordinals import ONE, OMEGA, ZERO, add, aleph, degree, leading_coefficient, nat, parse_ordinal as P
from scatord.oracle import D, def_derive_iter
from scatord.spaces import Concat, OrdInterval, Reverse, parse_expr


def _oracle_char(theta):
    """Last nonempty oracle stage and its size, by iterating the definable-set derivative."""
    s, k = D(0, 0, theta), 0
    while True:
        nxt = def_derive_iter(s, ONE)
        if nxt.empty:
            return k, len(s.members())
        s, k = nxt, k + 1


def test_examples():
    assert tuple(ms_characteristic(OrdInterval(P("w^2*3+w*7+4")))) == (nat(2), 3)
    assert tuple(ms_characteristic(OrdInterval(ZERO))) == (ZERO, 1)


def test_characteristic_vs_oracle_sample():
    for th in sample_below_w4(random.Random(17), 60):
        c = ms_characteristic(OrdInterval(th))
        if th.is_finite:
            assert (c.alpha, c.n) == (ZERO, int(th) + 1)
        else:
            assert (c.alpha, c.n) == (degree(th), leading_coefficient(th))
            assert (int(c.alpha), c.n) == _oracle_char(th)


def test_model_is_homeomorphic():
    for t in COMPACT:
        c = ms_characteristic(parse_expr(t))
        assert ms_characteristic(OrdInterval(c.model())) == c


def test_errors():
    with pytest.raises(NotCompact):
        ms_characteristic(parse_expr("ladder(2)"))
    with pytest.raises(NotCompact):
        ms_characteristic(parse_expr("ord[w["))
    with pytest.raises(NotCountable):
        ms_characteristic(parse_expr("ord[o(aleph_1)]"))


def test_homeomorphic_examples():
    c = homeomorphic(OrdInterval(P("w*2")), OrdInterval(P("w*2+5")))
    assert c.verdict == "homeomorphic" and c.left == c.right == MSCharacteristic(ONE, 2)
    a, b = prop2_space([2, 5]), prop2_space([2, 7])
    c = homeomorphic(a, b)
    assert (c.verdict, c.invariant, c.left, c.right) == ("distinct", "sigma", {2, 5}, {2, 7})
    assert c.recheck(a, b)
    x = parse_expr("concat(ord[w^2],ladder(2))")
    with pytest.raises(Inconclusive):
        homeomorphic(x, x)


def test_concat_note_recorded():
    c = homeomorphic(parse_expr("concat(ord[w],ord[w])"), OrdInterval(P("w*2")))
    assert CONCAT_NOTE in c.notes
    assert c.verdict == "homeomorphic"
    assert CONCAT_NOTE not in homeomorphic(OrdInterval(OMEGA), OrdInterval(OMEGA)).notes


def test_never_claims_homeomorphic_outside_fragment():
    for t in CORPUS:
        x = parse_expr(t)
        try:
            ms_characteristic(x)
            continue
        except ClassifyError:
            pass
        try:
            c = homeomorphic(x, x)
        except Inconclusive:
            continue
        pytest.fail(f"{t}: verdict {c.verdict} outside the countable compact fragment")


def test_equivalence_on_corpus():
    xs = [parse_expr(t) for t in COMPACT]
    v = {}
    for i, j in itertools.product(range(len(xs)), repeat=2):
        v[i, j] = homeomorphic(xs[i], xs[j]).verdict == "homeomorphic"
    for i in range(len(xs)):
        assert v[i, i]
    for i, j in v:
        assert v[i, j] == v[j, i]
    for i, j, k in itertools.product(range(len(xs)), repeat=3):
        if v[i, j] and v[j, k]:
            assert v[i, k]


def _predicted(a, b):
    """Characteristic of [0, ta] followed by [0, tb], read off the ordinal ta + 1 + tb."""
    t = add(add(a.model(), ONE), b.model())
    if t.is_finite:
        return (ZERO, int(t) + 1)
    return (degree(t), leading_coefficient(t))


def test_concat_absorption_mirrors_addition():
    rng = random.Random(4)
    sample = sample_below_w4(rng, 40)
    pairs = [(rng.choice(sample), rng.choice(sample)) for _ in range(50)]
    for ta, tb in pairs:
        a, b = OrdInterval(ta), OrdInterval(tb)
        got = ms_characteristic(Concat((a, b)))
        assert tuple(got) == _predicted(ms_characteristic(a), ms_characteristic(b))


def test_reverse_keeps_characteristic():
    for t in COMPACT:
        x = parse_expr(t)
        if x.ordered:
            assert ms_characteristic(Reverse(x)) == ms_characteristic(x)


def test_pairwise_distinct():
    fam = [prop2_space(S) for S in ([2], [3], [2, 3], [4, 9])]
    m = pairwise_distinct(fam)
    assert m.all_distinct and len(m.entries) == 6
    fam = [thm1_space([P(a)], aleph(1)) for a in ("w", "w+1", "w*2")]
    m = pairwise_distinct(fam, kappas=[aleph(1)])
    assert m.all_distinct
    assert all(c.invariant == "sigma_kappa[aleph_1]" for c in m.entries.values())
    same = pairwise_distinct([prop2_space([2]), prop2_space([2])])
    assert not same.all_distinct


def test_pairwise_needs_two():
    with pytest.raises(ClassifyError):
        pairwise_distinct([OrdInterval(OMEGA)])


def test_certificate_json():
    c = homeomorphic(prop2_space([2, 5]), prop2_space([2, 7]))
    j = json.loads(json.dumps(c.to_json()))
    assert j["verdict"] == "distinct" and j["invariant"] == "sigma"
    assert j["left"] == ["2", "5"] and j["right"] == ["2", "7"]
    assert isinstance(c, Certificate)


def test_invariant_selector():
    a, b = thm1_space([OMEGA], aleph(1)), thm1_space([P("w*2")], aleph(1))
    c = homeomorphic(a, b, only=["height"])
    assert c.invariant == "height" and c.recheck(a, b)
