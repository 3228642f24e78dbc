import pytest

from scatord import cbengine as cb
from scatord.classify import homeomorphic, ms_characteristic
from scatord.families import (
    VARIANTS, FamilyParams, ParameterError, build, k_block, prop2_closure, prop2_order_variant,
    prop2_space, prop3_Y, prop4_Z, thm1_hedgehog, thm1_space, thm2_G, thm2_H,
)
from scatord.invariants import condensation_points, psi, sigma, sigma_kappa, singular_recovery
from scatord.ordinals import (
    OMEGA, ONE, ZERO, add, aleph, initial, nat, parse_cardinal, parse_ordinal as P,
)
from scatord.spaces import Concat, PuncturedLadder, designated_point

A1, A2, AW = aleph(1), aleph(2), parse_cardinal("aleph_w")


def test_prop2_examples():
    assert sigma(prop2_space([2, 5])) == {2, 5}
    for n in (2, 3, 4):
        block = Concat((k_block(n), PuncturedLadder(n, closed=True)))
        assert tuple(ms_characteristic(block)) == (nat(n), 1)


@pytest.mark.parametrize("S", [[2], [2, 5], [3, 4, 7]])
def test_closure_and_order_variant_homeomorphic(S):
    c = homeomorphic(prop2_closure(S), prop2_order_variant(S))
    assert c.verdict == "homeomorphic"


def test_prop2_parameter_errors():
    with pytest.raises(ParameterError):
        prop2_space([])
    with pytest.raises(ParameterError):
        prop2_space([1, 3])


def test_prop3_Y():
    y = prop3_Y(A1)
    assert cb.rank_of_point(y, ("o",)) == ONE
    assert condensation_points(y, A1) == {("o",)}
    assert cb.height(y) == nat(2)
    with pytest.raises(ParameterError):
        prop3_Y(aleph(0))


@pytest.mark.parametrize("alpha", ["1", "2", "3", "4", "5", "w", "w+1", "w*2", "w^2"])
def test_prop4_final_stage(alpha):
    a = P(alpha)
    z = prop4_Z(a)
    assert cb.height(z) == add(a, ONE)
    assert cb.count_stage(z, a) == 1
    assert cb.rank_of_point(z, designated_point(z)) == a


def test_prop4_errors():
    with pytest.raises(ParameterError):
        prop4_Z(ZERO)


def test_thm1_examples():
    assert sigma_kappa(thm1_space([OMEGA], A1), A1) == {OMEGA}
    L = {OMEGA, P("w*2"), P("w^2")}
    assert sigma_kappa(thm1_space(sorted(L), A2), A2) == L
    for a in ("w", "w+5", "w^3"):
        assert cb.rank_of_point(thm1_hedgehog(P(a), A1), ("o",)) == P(a)


def test_thm1_errors():
    with pytest.raises(ParameterError):
        thm1_space([nat(5)], A1)
    with pytest.raises(ParameterError):
        thm1_space([], A1)


def test_thm2_examples():
    assert psi(thm2_H([P("w+1")], A1), A1) - {ZERO, initial(A1)} == {P("w+1")}
    S = {P("w+1"), P("w^2+1")}
    assert singular_recovery(thm2_G(sorted(S), AW), AW) == S
    ok, h = cb.is_scattered(thm2_H([P("w+1"), P("w*3+1")], A2))
    assert ok and h == add(initial(A2), ONE)


@pytest.mark.parametrize("bad", ["w", "w+2", "5", "w*2"])
def test_thm2_rejects_non_successor_of_limit(bad):
    with pytest.raises(ParameterError):
        thm2_H([P(bad)], A1)


def test_thm2_regularity_checks():
    with pytest.raises(ParameterError):
        thm2_H([P("w+1")], AW)
    with pytest.raises(ParameterError):
        thm2_G([P("w+1")], A1)


def test_build_dispatch():
    assert set(VARIANTS) >= {"prop2", "prop3", "prop4", "thm1", "thm2_regular", "thm2_singular"}
    assert build(FamilyParams("prop2", (2, 3))) == prop2_space([2, 3])
    assert build(FamilyParams("prop4", alpha=nat(2))) == prop4_Z(nat(2))
    with pytest.raises(ParameterError):
        build(FamilyParams("nope"))
