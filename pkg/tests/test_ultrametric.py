import itertools
import json
import random
from fractions import Fraction as F

import numpy as np
import pytest

from scatord import _kernels
from scatord.ultrametric import (
    TriangleViolation, UltraError, ZeroOffDiagonal, ball_tree, de_order, fast_check, hedgehog_metric,
    load, make_ultra, prop1_order, random_hedgehog, random_ultra, read_csv, read_json,
    spine_isometry_failures, to_json, validate_ultra, verify_interval_property, write_csv,
)

Q = F(1, 4)
H = F(1, 2)


@pytest.fixture
def abc():
    return make_ultra("abc", [[0, Q, H], [Q, 0, H], [H, H, 0]])


def test_valid_isosceles(abc):
    assert validate_ultra(abc) is abc


def test_triangle_violation_lists_triples():
    m = make_ultra("abc", [[0, 1, Q], [1, 0, Q], [Q, Q, 0]])
    with pytest.raises(TriangleViolation) as e:
        validate_ultra(m)
    assert ("a", "c", "b") in e.value.triples


def test_bad_inputs():
    with pytest.raises(ZeroOffDiagonal):
        validate_ultra(make_ultra("ab", [[0, 0], [0, 0]]))
    with pytest.raises(UltraError):
        validate_ultra(make_ultra("ab", [[0, 1], [H, 0]]))
    with pytest.raises(UltraError):
        validate_ultra(make_ultra("ab", [[0, -1], [-1, 0]]))
    with pytest.raises(UltraError):
        validate_ultra(make_ultra("", []))


def test_single_point():
    m = validate_ultra(make_ultra("x", [[0]]))
    assert ball_tree(m).levels == ((("x",),),)
    assert prop1_order(m).order == ("x",)


def test_ball_tree_example(abc):
    t = ball_tree(abc)
    assert t.levels == ((("a", "b"), ("c",)), (("a",), ("b",), ("c",)))


def test_ball_tree_literal_definition():
    # with distances already powers of 1/2 the quantized levels coincide with the literal balls
    m = make_ultra("abcd", [[0, F(1, 4), F(1, 2), F(1, 2)], [F(1, 4), 0, F(1, 2), F(1, 2)],
                            [F(1, 2), F(1, 2), 0, F(1, 4)], [F(1, 2), F(1, 2), F(1, 4), 0]])
    t = ball_tree(m)
    for n, level in enumerate(t.levels, 1):
        literal = {frozenset(y for y in m.points if m.d(x, y) < F(1, 2 ** n)) for x in m.points}
        assert set(map(frozenset, level)) == literal


def test_uniform_distances_single_level():
    m = make_ultra("pqr", [[0 if i == j else 1 for j in range(3)] for i in range(3)])
    t = ball_tree(m)
    assert t.levels == ((("p",), ("q",), ("r",)),)
    assert prop1_order(m).order == ("p", "q", "r")


def test_refinement(rng):
    for _ in range(30):
        t = ball_tree(random_ultra(rng.randint(1, 20), rng))
        for fine, coarse in zip(t.levels[1:], t.levels):
            for b in fine:
                assert any(set(b) <= set(c) for c in coarse)
        assert all(len(b) == 1 for b in t.levels[-1])


def test_de_order():
    assert de_order(["B1", "B2", "B3"]) == ["B1", "B2", "B3"]
    assert de_order(["B"]) == ["B"]
    with pytest.raises(UltraError):
        de_order([])


def test_order_examples(abc):
    assert prop1_order(abc).order == ("a", "b", "c")
    m = make_ultra("abcd", [[0, Q, H, H], [Q, 0, H, H], [H, H, 0, Q], [H, H, Q, 0]])
    r = prop1_order(m)
    assert r.order == ("a", "b", "c", "d")
    assert r.deciding_level("b", "c") == 1 and r.deciding_level("a", "b") == 2


def test_order_respects_input():
    m = make_ultra("dcba", [[0, Q, H, H], [Q, 0, H, H], [H, H, 0, Q], [H, H, Q, 0]])
    assert prop1_order(m).order == ("d", "c", "b", "a")


def _brute_total(r):
    pts = r.order
    for x, y in itertools.permutations(pts, 2):
        assert r.less(x, y) != r.less(y, x)
        lv = r.deciding_level(x, y)
        assert lv is not None
        bx, by = r.tree.block_of(lv, x), r.tree.block_of(lv, y)
        lo = [b for b in r.level_orders[lv - 1]]
        assert (lo.index(bx) < lo.index(by)) == r.less(x, y)
    for x, y, z in itertools.permutations(pts[:8], 3):
        if r.less(x, y) and r.less(y, z):
            assert r.less(x, z)


def test_order_random_brute_force(rng):
    for _ in range(40):
        m = validate_ultra(random_ultra(rng.randint(1, 16), rng))
        r = prop1_order(m)
        assert verify_interval_property(m, r).ok
        _brute_total(r)
        assert fast_check(m, r) == (0, 0)


def test_interval_report_catches_shuffled_order(abc):
    r = prop1_order(abc)
    r.order = ("a", "c", "b")
    rep = verify_interval_property(abc, r)
    assert not rep.ok and rep.counterexamples == [(1, ("a", "b"))]
    assert fast_check(abc, r)[0] == 1


def test_incomplete_space_negative_example():
    """A Cauchy sequence x_0, x_1, ... without a limit, plus a far point a.

    The order places a directly after the tail of the sequence, so in the infinite space a
    would be an order limit of the x_n while staying metrically isolated.  Truncations show it:
    the order neighbour of a is always the last x_K, at metric distance 1.
    """
    for k in (3, 6, 12):
        pts = [f"x{i}" for i in range(k)] + ["a"]
        dist = [[F(0)] * (k + 1) for _ in range(k + 1)]
        for i in range(k):
            for j in range(k):
                if i != j:
                    dist[i][j] = F(1, 2 ** (min(i, j) + 1))
            dist[i][k] = dist[k][i] = F(1)
        m = validate_ultra(make_ultra(pts, dist))
        order = prop1_order(m).order
        assert order[-2:] == (f"x{k - 1}", "a")
        assert m.d("a", order[-2]) == 1


# ---------------------------------------------------------------- hedgehogs

def _z_spine():
    # base w at distance 1/2^n from n
    pts = ["w", "0", "1", "2"]
    d = lambda x, y: F(0) if x == y else (F(1, 2 ** int(y if x == "w" else x)) if "w" in (x, y)
                                           else max(F(1, 2 ** int(x)), F(1, 2 ** int(y))))
    return make_ultra(pts, [[d(x, y) for y in pts] for x in pts])


def test_hedgehog_examples():
    s1 = make_ultra(["b", "x"], [[0, H], [H, 0]])
    s2 = make_ultra(["b", "y"], [[0, Q], [Q, 0]])
    h = validate_ultra(hedgehog_metric([(s1, "b"), (s2, "b")]))
    assert h.points == ("o", "0:x", "1:y")
    assert h.d("0:x", "1:y") == H
    assert h.d("o", "0:x") == H and h.d("o", "1:y") == Q
    z = validate_ultra(_z_spine())
    hz = hedgehog_metric([(z, "w"), (z, "w")])
    assert hz.d("0:1", "0:2") == z.d("1", "2")
    assert hz.d("0:1", "1:2") == max(z.d("w", "1"), z.d("w", "2"))
    validate_ultra(hz)
    assert spine_isometry_failures(hz, [(z, "w"), (z, "w")]) == []


def test_hedgehog_bad_basepoint():
    with pytest.raises(UltraError):
        hedgehog_metric([(_z_spine(), "nope")])


def test_random_hedgehogs(rng):
    for _ in range(30):
        h, spines = random_hedgehog(rng)
        validate_ultra(h)
        assert not spine_isometry_failures(h, spines)


# ---------------------------------------------------------------- IO

def test_csv_roundtrip(abc, tmp_path):
    text = write_csv(abc)
    assert read_csv(text) == abc
    p = tmp_path / "m.csv"
    p.write_text(text)
    assert load(str(p)) == abc


def test_csv_with_label_column():
    text = "a,b\na,0,1/3\nb,1/3,0\n"
    assert read_csv(text).d("a", "b") == F(1, 3)


def test_csv_rejects_floats():
    with pytest.raises(UltraError):
        read_csv("a,b\n0,0.5\n0.5,0\n")
    with pytest.raises(UltraError):
        read_csv("a,b\n0,1e-1\n1e-1,0\n")


def test_json_roundtrip(abc, tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(to_json(abc)))
    assert load(str(p)) == abc
    with pytest.raises(UltraError):
        read_json('{"points": ["a"]}')


# ---------------------------------------------------------------- kernels

@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable or disabled")
def test_numba_numpy_parity(rng):
    for _ in range(40):
        m = random_ultra(rng.randint(1, 40), rng)
        R, vals = m.ranks()
        lv = max(1, len(vals))
        assert np.array_equal(_kernels.level_labels(R, lv, True), _kernels.level_labels(R, lv, False))
        r = prop1_order(m, use_numba=False)
        assert fast_check(m, r, True) == fast_check(m, r, False) == (0, 0)
        bad = R.copy()
        i, j = 0, m.n - 1
        if i != j:
            bad[i, j] = bad[j, i] = 1 if R[i, j] > 1 else R[i, j]
        a = _kernels.triangle_violations(bad, True)
        b = _kernels.triangle_violations(bad, False)
        assert sorted(map(tuple, a.tolist())) == sorted(map(tuple, b.tolist()))


def test_kernel_request_without_numba(monkeypatch):
    monkeypatch.setattr(_kernels, "HAVE_NUMBA", False)
    with pytest.raises(RuntimeError):
        _kernels.triangle_violations(np.zeros((1, 1), dtype=np.int64), True)
    assert len(_kernels.triangle_violations(np.full((1, 1), 2, dtype=np.int64))) == 0
