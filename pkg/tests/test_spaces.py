import json

import pytest

from corpus import CORPUS
from scatord.cbengine import derive_full
from scatord.ordinals import OMEGA, parse_ordinal as P
from scatord.spaces import (
    Concat, DSLSyntaxError, Hedgehog, LexSum, MetricSum, OrdInterval, Product, PuncturedLadder,
    Reverse, Spine, TowerSpines, ValidationError, designated_point, expr_from_json, expr_to_json,
    parse_expr, parse_point, point_text, points_of_truncation, to_text, z_atom,
)


def test_parse_examples():
    assert parse_expr("ord[w^2]") == OrdInterval(P("w^2"))
    c = parse_expr("concat(ord[w], rev(ord[w]))")
    assert isinstance(c, Concat) and c.parts[1] == Reverse(OrdInterval(OMEGA))
    h = parse_expr("hedge((ord[w],w),(ord[w],w))")
    assert isinstance(h, Hedgehog) and len(h.spines) == 2
    assert all(s.base == (OMEGA,) for s in h.spines)


def test_corpus_covers_every_constructor():
    kinds = set()

    def walk(x):
        kinds.add(type(x).__name__)
        for attr in ("inner", "left", "right"):
            if hasattr(x, attr):
                walk(getattr(x, attr))
        for p in getattr(x, "parts", ()):
            walk(p)
        for s in getattr(x, "spines", ()):
            kinds.add(type(s).__name__)
            if isinstance(s, Spine):
                walk(s.expr)
        if isinstance(x, LexSum):
            kinds.update("Run" for _ in x.runs)
            for _, b in x.blocks:
                walk(b)

    for t in CORPUS:
        walk(parse_expr(t))
    assert len(CORPUS) >= 50
    assert {"OrdInterval", "Reverse", "Concat", "LexSum", "Product", "Hedgehog", "MetricSum",
            "PuncturedLadder", "Spine", "TowerSpines", "Run"} <= kinds


@pytest.mark.parametrize("text", CORPUS)
def test_parse_print_identity(text):
    x = parse_expr(text)
    assert parse_expr(to_text(x)) == x
    assert to_text(parse_expr(to_text(x))) == to_text(x)


@pytest.mark.parametrize("text", CORPUS)
def test_json_roundtrip(text):
    x = parse_expr(text)
    doc = expr_to_json(x)
    assert doc["schema"] == 1
    assert expr_from_json(json.dumps(doc)) == x


def test_whitespace_insensitive():
    assert parse_expr(" concat( ord[ w^2 ] ,\n ladder( 2 ) ) ") == parse_expr("concat(ord[w^2],ladder(2))")


@pytest.mark.parametrize("bad", ["ord[w", "concat()", "foo(1)", "hedge(", "ord[w]]", "prod(z)"])
def test_syntax_errors_carry_position(bad):
    with pytest.raises(DSLSyntaxError, match="position"):
        parse_expr(bad)


@pytest.mark.parametrize("bad", ["prod(ord[w^2],ord[w])", "ladder(0)", "hedge((z,w*2))"])
def test_validation_errors(bad):
    with pytest.raises(ValidationError):
        parse_expr(bad)


def test_z_atom():
    z = z_atom()
    assert z == OrdInterval(OMEGA, tag="z") and designated_point(z) == (OMEGA,)
    t = derive_full(z)
    assert t.stage(P("1")).points == ((OMEGA,),)
    assert t.stage(P("2")).empty


def test_points_of_truncation_examples():
    assert points_of_truncation(OrdInterval(OMEGA), 3) == [(P(s),) for s in ("0", "1", "2", "3", "w")]
    fwd = points_of_truncation(OrdInterval(OMEGA), 2)
    assert points_of_truncation(Reverse(OrdInterval(OMEGA)), 2) == fwd[::-1]
    h = parse_expr("hedge((z,w),(z,w))")
    pts = points_of_truncation(h, 2)
    assert pts[0] == ("o",) and len(pts) == 1 + 2 * 2


def test_points_of_truncation_deterministic_and_resolvable():
    from scatord.cbengine import point_info
    for t in CORPUS:
        x = parse_expr(t)
        a, b = points_of_truncation(x, 2), points_of_truncation(x, 2)
        assert a == b
        for p in a[:40]:
            point_info(x, p)


def test_point_syntax():
    x = parse_expr("prod(z,ord[w^2])")
    p = parse_point(x, "[w;w^2]")
    assert point_text(p) == "[w;w^2]"
    assert parse_point(parse_expr("concat(ord[w],ord[w])"), "1/w") == (1, OMEGA)


def test_half_open_successor_normalizes():
    assert OrdInterval(P("w+1"), closed=False) == OrdInterval(OMEGA)
