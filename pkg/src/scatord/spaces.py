"""Expression trees for scattered linearly ordered spaces and their text syntax.

Grammar (whitespace-insensitive)::

    expr  := "ord[" ord "]" | "ord[" ord "[" | "ord[" ord ".." ord "]" | "ord[" ord ".." ord "["
           | "rev(" expr ")" | "concat(" expr ("," expr)* ")" | "prod(" expr "," expr ")"
           | "hedge(" spine ("," spine)* ")" | "msum(" expr ("," expr)* ")"
           | "ladder(" nat ")" | "cladder(" nat ")" | "z"
           | "lex(" ord ".." ord ("," item)* ")"
    spine := "(" expr "," point ")" | "(" expr "," point "," cardinal ")" | "tower(" ord ")"
    item  := ord ":" expr | "run(" ord "," ord "," expr ")"

``ord[t[`` is the half-open interval [0, t[.  Points are ``/``-separated
coordinates; a product point is written ``[left;right]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

from .ordinals import (
    OMEGA,
    ONE,
    ZERO,
    Cardinal,
    Ordinal,
    OrdinalSyntaxError,
    add,
    is_limit,
    is_successor,
    mul,
    nat,
    parse_cardinal,
    parse_ordinal,
    predecessor,
)

SCHEMA_VERSION = 1

Coord = Union[Ordinal, int, str, tuple]
PointName = tuple


class DSLSyntaxError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at position {pos}: {text[max(0, pos - 20):pos]}<-HERE->{text[pos:pos + 20]}")
        self.pos = pos


class ValidationError(ValueError):
    """An expression violates a constructor invariant."""


class SpaceExpr:
    """Base class of all space expressions."""

    ordered = True

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class OrdInterval(SpaceExpr):
    hi: Ordinal
    lo: Ordinal = ZERO
    closed: bool = True
    tag: str | None = None

    def __post_init__(self):
        if self.hi < self.lo or (not self.closed and self.hi == self.lo):
            raise ValidationError(f"empty interval [{self.lo}, {self.hi}{']' if self.closed else '['}")
        if not self.closed and is_successor(self.hi):
            # [lo, b+1[ is [lo, b]
            object.__setattr__(self, "hi", predecessor(self.hi))
            object.__setattr__(self, "closed", True)


@dataclass(frozen=True)
class Reverse(SpaceExpr):
    inner: SpaceExpr

    @property
    def ordered(self):
        return self.inner.ordered


@dataclass(frozen=True)
class Concat(SpaceExpr):
    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ValidationError("concat needs at least one part")
        for p in self.parts:
            if not p.ordered:
                raise ValidationError(f"concat parts must be ordered spaces, got {to_text(p)}")


@dataclass(frozen=True)
class Run:
    """Blocks at xi_n = start + step*n + 1 (n < w): [0, w^xi_n] then ``tail`` at xi_n + 1."""

    start: Ordinal
    step: Ordinal
    tail: SpaceExpr

    def alpha(self, n: int) -> Ordinal:
        return add(self.start, mul(self.step, nat(n)))

    @property
    def sup(self) -> Ordinal:
        return add(self.start, mul(self.step, OMEGA))


@dataclass(frozen=True)
class LexSum(SpaceExpr):
    """Index interval [lo, hi] with selected index points replaced by blocks."""

    lo: Ordinal
    hi: Ordinal
    blocks: tuple = ()      # ((index, SpaceExpr), ...) sorted by index
    runs: tuple = ()        # (Run, ...)

    def __post_init__(self):
        idx = [i for i, _ in self.blocks]
        if idx != sorted(idx) or len(set(idx)) != len(idx):
            raise ValidationError("lex blocks must be listed by strictly increasing index")
        for i, b in self.blocks:
            if not (self.lo <= i <= self.hi):
                raise ValidationError(f"block index {i} outside [{self.lo}, {self.hi}]")
            if not b.ordered:
                raise ValidationError("lex blocks must be ordered spaces")
        for r in self.runs:
            if not (is_limit(r.start) and is_limit(r.step)):
                raise ValidationError("run start and step must be limit ordinals")
            if not (self.lo <= r.start and r.sup <= self.hi):
                raise ValidationError("run must lie inside the index interval")
            for i in idx:
                if r.start <= i < r.sup:
                    raise ValidationError("run overlaps an explicit block")


@dataclass(frozen=True)
class Product(SpaceExpr):
    left: SpaceExpr
    right: SpaceExpr
    ordered = False


@dataclass(frozen=True)
class Spine:
    expr: SpaceExpr
    base: PointName
    mult: Union[int, Cardinal] = 1


@dataclass(frozen=True)
class TowerSpines:
    """The spines (Z_a, z_a) for 1 <= a < lam of the Z-tower."""

    lam: Ordinal

    def __post_init__(self):
        if not is_limit(self.lam):
            raise ValidationError("tower spines need a limit ordinal")


@dataclass(frozen=True)
class Hedgehog(SpaceExpr):
    spines: tuple
    ordered = False

    def __post_init__(self):
        if not self.spines:
            raise ValidationError("a hedgehog needs at least one spine")


@dataclass(frozen=True)
class MetricSum(SpaceExpr):
    parts: tuple
    ordered = False

    def __post_init__(self):
        if not self.parts:
            raise ValidationError("msum needs at least one part")


@dataclass(frozen=True)
class PuncturedLadder(SpaceExpr):
    n: int
    closed: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("ladder index must be positive")


def z_atom() -> OrdInterval:
    """[0, w] with basepoint w (the point 0 of {0} u {2^-n})."""
    return OrdInterval(OMEGA, tag="z")


Z_BASE: PointName = (OMEGA,)


# ---------------------------------------------------------------- printing

def point_text(p: PointName) -> str:
    return "/".join(_coord_text(c) for c in p)


def _coord_text(c) -> str:
    if isinstance(c, tuple):
        return f"[{point_text(c[0])};{point_text(c[1])}]"
    return str(c)


def to_text(x: SpaceExpr) -> str:
    if isinstance(x, OrdInterval):
        if x.tag == "z":
            return "z"
        lo = "" if x.lo == ZERO else f"{x.lo}.."
        return f"ord[{lo}{x.hi}{']' if x.closed else '['}"
    if isinstance(x, Reverse):
        return f"rev({to_text(x.inner)})"
    if isinstance(x, Concat):
        return "concat(" + ",".join(map(to_text, x.parts)) + ")"
    if isinstance(x, MetricSum):
        return "msum(" + ",".join(map(to_text, x.parts)) + ")"
    if isinstance(x, Product):
        return f"prod({to_text(x.left)},{to_text(x.right)})"
    if isinstance(x, PuncturedLadder):
        return f"{'c' if x.closed else ''}ladder({x.n})"
    if isinstance(x, Hedgehog):
        out = []
        for s in x.spines:
            if isinstance(s, TowerSpines):
                out.append(f"tower({s.lam})")
            elif s.mult == 1:
                out.append(f"({to_text(s.expr)},{point_text(s.base)})")
            else:
                out.append(f"({to_text(s.expr)},{point_text(s.base)},{s.mult})")
        return "hedge(" + ",".join(out) + ")"
    if isinstance(x, LexSum):
        items = [f"{i}:{to_text(b)}" for i, b in x.blocks]
        items += [f"run({r.start},{r.step},{to_text(r.tail)})" for r in x.runs]
        return f"lex({x.lo}..{x.hi}" + "".join("," + s for s in items) + ")"
    raise TypeError(f"not a space expression: {x!r}")


# ---------------------------------------------------------------- parsing

class _DSL:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def ws(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def at(self, s: str) -> bool:
        self.ws()
        return self.text.startswith(s, self.i)

    def eat(self, s: str):
        if not self.at(s):
            raise DSLSyntaxError(f"expected {s!r}", self.text, self.i)
        self.i += len(s)

    def chunk(self, stops: str, allow_dots=False) -> tuple[str, int]:
        """Raw text up to a top-level stop character (or '..')."""
        self.ws()
        start = self.i
        depth = 0
        while self.i < len(self.text):
            ch = self.text[self.i]
            if depth == 0 and (ch in stops or (allow_dots and self.text.startswith("..", self.i))):
                break
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth -= 1
            self.i += 1
        return self.text[start:self.i].strip(), start

    def ordinal(self, stops: str, allow_dots=False) -> Ordinal:
        s, pos = self.chunk(stops, allow_dots)
        try:
            return parse_ordinal(s)
        except OrdinalSyntaxError as e:
            raise DSLSyntaxError(f"bad ordinal ({e})", self.text, pos + e.pos) from None

    def nat(self) -> int:
        s, pos = self.chunk(")")
        if not s.isdigit():
            raise DSLSyntaxError("expected a natural number", self.text, pos)
        return int(s)

    def expr(self) -> SpaceExpr:
        self.ws()
        pos = self.i
        try:
            return self._expr()
        except ValidationError as e:
            raise ValidationError(f"{e} (expression at position {pos})") from None

    def _expr(self) -> SpaceExpr:
        if self.at("ord["):
            self.eat("ord[")
            first = self.ordinal("][", allow_dots=True)
            lo = ZERO
            if self.at(".."):
                self.eat("..")
                lo, first = first, self.ordinal("][")
            if self.at("]"):
                self.eat("]")
                return OrdInterval(first, lo, True)
            self.eat("[")
            return OrdInterval(first, lo, False)
        if self.at("rev("):
            self.eat("rev(")
            inner = self.expr()
            self.eat(")")
            return Reverse(inner)
        for kw, cls in (("concat(", Concat), ("msum(", MetricSum)):
            if self.at(kw):
                self.eat(kw)
                parts = [self.expr()]
                while self.at(","):
                    self.eat(",")
                    parts.append(self.expr())
                self.eat(")")
                return cls(tuple(parts))
        if self.at("prod("):
            self.eat("prod(")
            a = self.expr()
            self.eat(",")
            b = self.expr()
            self.eat(")")
            return Product(a, b)
        if self.at("ladder(") or self.at("cladder("):
            closed = self.at("cladder(")
            self.eat("cladder(" if closed else "ladder(")
            n = self.nat()
            self.eat(")")
            return PuncturedLadder(n, closed)
        if self.at("hedge("):
            self.eat("hedge(")
            spines = [self.spine()]
            while self.at(","):
                self.eat(",")
                spines.append(self.spine())
            self.eat(")")
            return Hedgehog(tuple(spines))
        if self.at("lex("):
            return self.lex()
        if self.at("z"):
            self.eat("z")
            return z_atom()
        raise DSLSyntaxError("expected an expression", self.text, self.i)

    def spine(self):
        if self.at("tower("):
            self.eat("tower(")
            lam = self.ordinal(")")
            self.eat(")")
            return TowerSpines(lam)
        self.eat("(")
        e = self.expr()
        self.eat(",")
        s, pos = self.chunk(",)")
        try:
            base = parse_point(e, s)
        except ValueError as err:
            raise DSLSyntaxError(f"bad basepoint ({err})", self.text, pos) from None
        mult: Union[int, Cardinal] = 1
        if self.at(","):
            self.eat(",")
            s, pos = self.chunk(")")
            try:
                mult = int(s) if s.isdigit() else parse_cardinal(s)
            except OrdinalSyntaxError:
                raise DSLSyntaxError("bad spine multiplicity", self.text, pos) from None
        self.eat(")")
        return Spine(e, base, mult)

    def lex(self):
        self.eat("lex(")
        lo = self.ordinal(",)", allow_dots=True)
        self.eat("..")
        hi = self.ordinal(",)")
        blocks, runs = [], []
        while self.at(","):
            self.eat(",")
            if self.at("run("):
                self.eat("run(")
                start = self.ordinal(",")
                self.eat(",")
                step = self.ordinal(",")
                self.eat(",")
                tail = self.expr()
                self.eat(")")
                runs.append(Run(start, step, tail))
            else:
                idx = self.ordinal(":")
                self.eat(":")
                blocks.append((idx, self.expr()))
        self.eat(")")
        return LexSum(lo, hi, tuple(blocks), tuple(runs))

    def done(self):
        self.ws()
        if self.i != len(self.text):
            raise DSLSyntaxError("trailing input", self.text, self.i)


def parse_expr(text: str) -> SpaceExpr:
    """Parse DSL text; structural invariants are checked by the engine."""
    p = _DSL(text)
    x = p.expr()
    p.done()
    from .cbengine import validate
    validate(x)
    return x


def _split_top(s: str, sep: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in s:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == sep and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return [c.strip() for c in out]


def parse_point(x: SpaceExpr, text: str) -> PointName:
    """Parse a ``/``-separated point name relative to expression ``x``."""
    coords = _split_top(text.strip(), "/") if text.strip() else []
    return tuple(_parse_coords(x, coords))


def _parse_coords(x: SpaceExpr, coords: list[str]):
    if isinstance(x, OrdInterval):
        if len(coords) != 1:
            raise ValueError("an interval point is a single ordinal")
        return [parse_ordinal(coords[0])]
    if isinstance(x, Reverse):
        return _parse_coords(x.inner, coords)
    if isinstance(x, PuncturedLadder):
        if x.closed:
            return _parse_coords(ladder_model(x), coords)
        return [int(c) for c in coords]
    if isinstance(x, (Concat, MetricSum)):
        i = int(coords[0])
        return [i] + _parse_coords(x.parts[i], coords[1:])
    if isinstance(x, Product):
        if len(coords) != 1 or not coords[0].startswith("["):
            raise ValueError("a product point is written [left;right]")
        left, right = _split_top(coords[0][1:-1], ";")
        return [(parse_point(x.left, left), parse_point(x.right, right))]
    if isinstance(x, Hedgehog):
        if coords == ["o"]:
            return ["o"]
        i = int(coords[0])
        s = x.spines[i]
        if isinstance(s, TowerSpines):
            beta = parse_ordinal(coords[1])
            from .families import prop4_Z
            return [i, beta] + _parse_coords(prop4_Z(beta), coords[2:])
        if s.mult != 1:
            return [i, int(coords[1])] + _parse_coords(s.expr, coords[2:])
        return [i] + _parse_coords(s.expr, coords[1:])
    if isinstance(x, LexSum):
        idx = parse_ordinal(coords[0])
        for i, b in x.blocks:
            if i == idx:
                return [idx] + _parse_coords(b, coords[1:])
        for r in x.runs:
            if r.start <= idx < r.sup:
                if len(coords) > 1 and not _run_index_point(r, idx):
                    return [idx] + _parse_coords(_run_block(r, idx), coords[1:])
        return [idx] + [parse_ordinal(c) for c in coords[1:]]
    raise TypeError(x)


def ladder_model(x: PuncturedLadder) -> SpaceExpr:
    """The closed ladder is order-isomorphic and homeomorphic to ]w^2, 0] reversed."""
    return Reverse(OrdInterval(mul(OMEGA, OMEGA), closed=False))


def _run_index_point(r: Run, idx: Ordinal) -> bool:
    return _run_block_kind(r, idx) is None


def _run_block_kind(r: Run, idx: Ordinal):
    # idx = alpha_n + 1 -> "head", alpha_n + 2 -> "tail"
    for k, kind in ((1, "head"), (2, "tail")):
        try:
            a = idx
            for _ in range(k):
                a = predecessor(a)
        except ValueError:
            return None
        n = _run_n(r, a)
        if n is not None:
            return kind, n
    return None


def _run_n(r: Run, alpha: Ordinal):
    if alpha < r.start or alpha >= r.sup:
        return None
    n = 0
    a = r.start
    while a < alpha:
        a = add(a, r.step)
        n += 1
    return n if a == alpha else None


def _run_block(r: Run, idx: Ordinal) -> SpaceExpr:
    kind, n = _run_block_kind(r, idx)
    if kind == "head":
        from .ordinals import omega_pow
        return OrdInterval(omega_pow(add(r.alpha(n), ONE)))
    return r.tail


# ---------------------------------------------------------------- JSON

def _node_json(x: SpaceExpr) -> dict:
    if isinstance(x, OrdInterval):
        return {"type": "ord", "lo": str(x.lo), "hi": str(x.hi), "closed": x.closed, "tag": x.tag}
    if isinstance(x, Reverse):
        return {"type": "rev", "inner": _node_json(x.inner)}
    if isinstance(x, (Concat, MetricSum)):
        return {"type": "concat" if isinstance(x, Concat) else "msum",
                "parts": [_node_json(p) for p in x.parts]}
    if isinstance(x, Product):
        return {"type": "prod", "left": _node_json(x.left), "right": _node_json(x.right)}
    if isinstance(x, PuncturedLadder):
        return {"type": "ladder", "n": x.n, "closed": x.closed}
    if isinstance(x, Hedgehog):
        spines = []
        for s in x.spines:
            if isinstance(s, TowerSpines):
                spines.append({"tower": str(s.lam)})
            else:
                spines.append({"expr": _node_json(s.expr), "base": point_text(s.base), "mult": str(s.mult)})
        return {"type": "hedge", "spines": spines}
    if isinstance(x, LexSum):
        return {"type": "lex", "lo": str(x.lo), "hi": str(x.hi),
                "blocks": [{"at": str(i), "expr": _node_json(b)} for i, b in x.blocks],
                "runs": [{"start": str(r.start), "step": str(r.step), "tail": _node_json(r.tail)}
                         for r in x.runs]}
    raise TypeError(x)


def _node_from(d: dict) -> SpaceExpr:
    t = d["type"]
    if t == "ord":
        return OrdInterval(parse_ordinal(d["hi"]), parse_ordinal(d["lo"]), d["closed"], d.get("tag"))
    if t == "rev":
        return Reverse(_node_from(d["inner"]))
    if t == "concat":
        return Concat(tuple(_node_from(p) for p in d["parts"]))
    if t == "msum":
        return MetricSum(tuple(_node_from(p) for p in d["parts"]))
    if t == "prod":
        return Product(_node_from(d["left"]), _node_from(d["right"]))
    if t == "ladder":
        return PuncturedLadder(d["n"], d["closed"])
    if t == "hedge":
        spines = []
        for s in d["spines"]:
            if "tower" in s:
                spines.append(TowerSpines(parse_ordinal(s["tower"])))
            else:
                e = _node_from(s["expr"])
                m = s["mult"]
                spines.append(Spine(e, parse_point(e, s["base"]), int(m) if m.isdigit() else parse_cardinal(m)))
        return Hedgehog(tuple(spines))
    if t == "lex":
        return LexSum(parse_ordinal(d["lo"]), parse_ordinal(d["hi"]),
                      tuple((parse_ordinal(b["at"]), _node_from(b["expr"])) for b in d["blocks"]),
                      tuple(Run(parse_ordinal(r["start"]), parse_ordinal(r["step"]), _node_from(r["tail"]))
                            for r in d["runs"]))
    raise ValueError(f"unknown node type {t!r}")


def expr_to_json(x: SpaceExpr) -> dict:
    return {"schema": SCHEMA_VERSION, "expr": _node_json(x)}


def expr_from_json(d: dict | str) -> SpaceExpr:
    if isinstance(d, str):
        d = json.loads(d)
    if d.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {d.get('schema')!r}")
    return _node_from(d["expr"])


# ---------------------------------------------------------------- sampling

def _ordinal_sample(lo: Ordinal, hi: Ordinal, closed: bool, depth: int) -> list[Ordinal]:
    from .ordinals import degree, omega_pow
    exps = {nat(i) for i in range(depth + 1)} | set(_exps_of(hi))
    exps = sorted((e for e in exps if e <= degree(hi)), reverse=True)
    monos = [(e, mul(omega_pow(e), nat(c))) for e in exps for c in range(1, depth + 1)]
    cands = {lo, hi} | {m for _, m in monos}
    for ea, a in monos:
        for eb, b in monos:
            if eb < ea:
                cands.add(add(a, b))
    for t in _truncations(hi):
        cands.add(t)
    cands |= {add(lo, v) for v in list(cands)}
    return sorted(v for v in cands if lo <= v and (v <= hi if closed else v < hi))


def _exps_of(a: Ordinal):
    from .ordinals import Cardinal as _C
    for e, _ in a.terms:
        if isinstance(e, _C):
            continue
        yield e


def _truncations(a: Ordinal):
    for k in range(1, len(a.terms) + 1):
        yield Ordinal(a.terms[:k])


def points_of_truncation(x: SpaceExpr, depth: int) -> list[PointName]:
    """Deterministic finite sample of the points of ``x``, in order."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if isinstance(x, OrdInterval):
        from .ordinals import has_atoms
        if has_atoms(x.hi):
            pts = [x.lo] + ([x.hi] if x.closed else [])
            return [(p,) for p in pts]
        return [(p,) for p in _ordinal_sample(x.lo, x.hi, x.closed, depth)]
    if isinstance(x, Reverse):
        return list(reversed(points_of_truncation(x.inner, depth)))
    if isinstance(x, (Concat, MetricSum)):
        return [(i,) + p for i, part in enumerate(x.parts) for p in points_of_truncation(part, depth)]
    if isinstance(x, PuncturedLadder):
        if x.closed:
            return points_of_truncation(ladder_model(x), depth)
        return [(m, k) for m in range(depth, 0, -1) for k in range(depth, 0, -1)]
    if isinstance(x, Product):
        return [((a, b),) for a in points_of_truncation(x.left, depth)
                for b in points_of_truncation(x.right, depth)]
    if isinstance(x, Hedgehog):
        out = [("o",)]
        depth = max(depth - 1, 0)   # the body is the first level
        for i, s in enumerate(x.spines):
            if isinstance(s, TowerSpines):
                from .families import prop4_Z
                for b in range(1, depth + 1):
                    z = prop4_Z(nat(b))
                    base = designated_point(z)
                    out += [(i, nat(b)) + p for p in points_of_truncation(z, depth) if p != base]
                continue
            copies = [()] if s.mult == 1 else [(0,), (1,)]
            for c in copies:
                out += [(i,) + c + p for p in points_of_truncation(s.expr, depth) if p != s.base]
        return out
    if isinstance(x, LexSum):
        from .cbengine import flatten_lex
        out = []
        for part, to_lex in flatten_lex(x, depth):
            out += [to_lex(p) for p in points_of_truncation(part, depth)]
        return out
    raise TypeError(x)


def designated_point(x: SpaceExpr) -> PointName:
    """The distinguished top point of a tower or atom expression (z_a, or the hedgehog body)."""
    if isinstance(x, OrdInterval):
        return (x.hi,)
    if isinstance(x, Product):
        return ((designated_point(x.left), designated_point(x.right)),)
    if isinstance(x, Hedgehog):
        return ("o",)
    raise ValueError(f"no designated point for {to_text(x)}")
