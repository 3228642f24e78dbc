"""Timed acceptance runs; each test prints one PASS/FAIL line (visible with ``pytest -s`` or in the summary)."""

import itertools
import random
import time
from contextlib import contextmanager

import pytest

from conftest import sample_below_w4
from corpus import COMPACT
from scatord import cbengine as cb
from scatord.classify import homeomorphic, ms_characteristic, pairwise_distinct
from scatord.families import k_block, prop2_space, prop4_Z, thm1_space, thm2_G, thm2_H
from scatord.invariants import psi, regular_below, sigma, sigma_kappa, singular_recovery
from scatord.ordinals import (
    OMEGA, ONE, ZERO, add, aleph, is_limit, initial, mul, nat, omega_pow, parse_cardinal, parse_ordinal as P,
)
from scatord.oracle import D, DefSet, compare_with_engine, def_derive_iter, oracle_rank
from scatord.spaces import Concat, OrdInterval, Product, PuncturedLadder, parse_expr, z_atom
from scatord.ultrametric import (
    fast_check, prop1_order, random_hedgehog, random_ultra, spine_isometry_failures, validate_ultra,
    verify_interval_property,
)

A1, A2, AW = aleph(1), aleph(2), parse_cardinal("aleph_w")


@contextmanager
def criterion(capsys, number: int, label: str, limit: float):
    t0 = time.perf_counter()
    ok, detail = False, ""
    try:
        yield
        ok = True
    except AssertionError as e:
        detail = f" ({str(e).splitlines()[0][:120]})" if str(e) else ""
        raise
    finally:
        dt = time.perf_counter() - t0
        ok = ok and dt < limit
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {label} [{dt:.2f}s, limit {limit:g}s]{detail}")
    assert dt < limit, f"criterion {number} took {dt:.2f}s"


def _ordinal(rng, lo_exp: int, hi_exp: int, terms: int = 3, tail: bool = False):
    exps = sorted({rng.randint(lo_exp, hi_exp) for _ in range(rng.randint(1, terms))}, reverse=True)
    out = ZERO
    for e in exps:
        out = add(out, mul(omega_pow(nat(e)), nat(rng.randint(1, 4))))
    if tail and rng.random() < 0.4:
        out = add(out, nat(rng.randint(1, 9)))
    return out


def _distinct_sets(rng, draw, count: int, max_size: int = 4):
    seen = set()
    while len(seen) < count:
        seen.add(frozenset(draw() for _ in range(rng.randint(1, max_size))))
    return sorted(seen, key=lambda s: sorted(s))


def _limit_successor(rng):
    lam = _ordinal(rng, 1, 5)
    return add(lam, ONE)


# ---------------------------------------------------------------- 1

def test_c01_prop2_sigma(capsys):
    rng = random.Random(101)
    sets = set()
    while len(sets) < 200:
        sets.add(frozenset(rng.sample(range(2, 13), rng.randint(1, 6))))
    with criterion(capsys, 1, "sigma(prop2_space(S)) = S for 200 sets S in {2..12}", 10):
        for S in sets:
            assert sigma(prop2_space(sorted(S))) == S, sorted(S)


# ---------------------------------------------------------------- 2

def test_c02_thm1_sigma_kappa(capsys):
    rng = random.Random(102)
    sets = _distinct_sets(rng, lambda: _ordinal(rng, 1, 6, tail=True), 100)
    with criterion(capsys, 2, "sigma_kappa(thm1_space(L, k), k) = L, 100 sets, k in {aleph_1, aleph_2}", 10):
        for L in sets:
            for k in (A1, A2):
                assert sigma_kappa(thm1_space(sorted(L), k), k) == L, sorted(map(str, L))


# ---------------------------------------------------------------- 3

def test_c03_thm2_regular(capsys):
    rng = random.Random(103)
    sets = _distinct_sets(rng, lambda: _limit_successor(rng), 100)
    with criterion(capsys, 3, "psi(thm2_H(S, k), k) minus {0, o(k)} = S, 100 sets; [0, o(aleph_1)*w] case", 10):
        for S in sets:
            for k in (A1, A2):
                assert psi(thm2_H(sorted(S), k), k) - {ZERO, initial(k)} == S, sorted(map(str, S))
        assert psi(OrdInterval(mul(initial(A1), OMEGA)), A1) == {ZERO, initial(A1)}


# ---------------------------------------------------------------- 4

def test_c04_thm2_singular(capsys):
    rng = random.Random(104)
    sets = _distinct_sets(rng, lambda: _limit_successor(rng), 50)
    with criterion(capsys, 4, "union of psi over regular lambda < aleph_w, minus limits, = S for 50 sets", 10):
        for S in sets:
            g = thm2_G(sorted(S), AW)
            union = set()
            for lam in regular_below(AW, g):
                union |= psi(g, lam)
            assert {v for v in union if v != ZERO and not is_limit(v)} == S
            assert singular_recovery(g, AW) == S


# ---------------------------------------------------------------- 5

def test_c05_prop4_tower(capsys):
    alphas = [nat(k) for k in range(1, 6)] + [OMEGA, P("w+1"), P("w*2"), P("w^2")]
    with criterion(capsys, 5, "prop4_Z(alpha) has a singleton final stage at alpha; boxes oracle for alpha <= 3", 5):
        for a in alphas:
            z = prop4_Z(a)
            assert cb.height(z) == add(a, ONE), str(a)
            assert cb.count_stage(z, a) == 1, str(a)
        for a in (1, 2, 3):
            c = compare_with_engine(prop4_Z(nat(a)))
            assert c.ok, str(c.divergence)


# ---------------------------------------------------------------- 6

def test_c06_point_rank_oracle(capsys):
    thetas = sample_below_w4(random.Random(106), 100)
    with criterion(capsys, 6, "engine point rank = oracle iteration count, 100 theta <= w^4", 10):
        checked = 0
        for th in thetas:
            x = OrdInterval(th)
            for b in D(0, 0, th).probes():
                if b <= th:
                    assert cb.rank_of_point(x, (b,)) == nat(oracle_rank(th, b)), (str(th), str(b))
                    checked += 1
        assert checked > 500


# ---------------------------------------------------------------- 7

def test_c07_product_oracle(capsys):
    rng = random.Random(107)
    seen = set()
    while len(seen) < 50:
        seen.add(_ordinal(rng, 0, 3) if rng.random() > 0.05 else omega_pow(nat(3)))
    with criterion(capsys, 7, "Product(z, ord[theta]) stages = box oracle iterates, 50 theta <= w^3", 10):
        for th in sorted(seen):
            c = compare_with_engine(Product(z_atom(), OrdInterval(th)))
            assert c.ok, (str(th), str(c.divergence))


# ---------------------------------------------------------------- 8

def test_c08_order_at_scale(capsys):
    rng = random.Random(108)
    spaces = [random_ultra(rng.randint(1, 64), rng) for _ in range(500)]
    with criterion(capsys, 8, "500 random ultrametric spaces: balls are intervals, order is strict total", 30):
        for m in spaces:
            validate_ultra(m)
            r = prop1_order(m)
            assert len(set(r.order)) == m.n == len(r.order)
            assert verify_interval_property(m, r).ok
            assert fast_check(m, r) == (0, 0)


# ---------------------------------------------------------------- 9

def test_c09_hedgehog_metric(capsys):
    rng = random.Random(109)
    with criterion(capsys, 9, "100 random hedgehogs valid and isometric on every spine", 10):
        sizes = []
        for _ in range(100):
            h, spines = random_hedgehog(rng, max_points=200)
            assert h.n <= 200
            validate_ultra(h)
            assert not spine_isometry_failures(h, spines)
            sizes.append(h.n)
        assert max(sizes) > 50


# ---------------------------------------------------------------- 10

def _oracle_characteristic(th):
    base = D(0, 0, th)
    k = 0
    while not def_derive_iter(base, nat(k + 1)).empty:
        k += 1
    return nat(k), len(def_derive_iter(base, nat(k)).members())


def test_c10_classifier(capsys):
    thetas = sample_below_w4(random.Random(110), 100)
    exprs = [parse_expr(t) for t in COMPACT]
    with criterion(capsys, 10, "characteristic vs oracle on 100 samples; zipper n=2,3,4; equivalence on corpus", 10):
        for th in thetas:
            assert tuple(ms_characteristic(OrdInterval(th))) == _oracle_characteristic(th), str(th)
        for n in (2, 3, 4):
            block = Concat((k_block(n), PuncturedLadder(n, closed=True)))
            assert tuple(ms_characteristic(block)) == (nat(n), 1)
        same = {(i, j): homeomorphic(a, b).verdict == "homeomorphic"
                for (i, a), (j, b) in itertools.product(enumerate(exprs), repeat=2)}
        idx = range(len(exprs))
        assert all(same[i, i] for i in idx)
        assert all(same[i, j] == same[j, i] for i in idx for j in idx)
        for i, j, k in itertools.product(idx, repeat=3):
            if same[i, j] and same[j, k]:
                assert same[i, k]


# ---------------------------------------------------------------- 11

def test_c11_distinctness(capsys):
    rng = random.Random(111)
    p2 = set()
    while len(p2) < 20:
        p2.add(frozenset(rng.sample(range(2, 13), rng.randint(1, 4))))
    fams = {
        "prop2": [prop2_space(sorted(S)) for S in p2],
        "thm1": [thm1_space(sorted(L), A1) for L in _distinct_sets(rng, lambda: _ordinal(rng, 1, 5, tail=True), 20, 3)],
        "thm2": [thm2_H(sorted(S), A1) for S in _distinct_sets(rng, lambda: _limit_successor(rng), 20, 3)],
    }
    with criterion(capsys, 11, "pairwise_distinct on 20 prop2, 20 thm1, 20 thm2 spaces; certificates recheck", 30):
        for name, fam in fams.items():
            mat = pairwise_distinct(fam)
            assert mat.all_distinct, name
            for (i, j), cert in mat.entries.items():
                assert cert.recheck(fam[i], fam[j]), (name, i, j, cert.invariant)
