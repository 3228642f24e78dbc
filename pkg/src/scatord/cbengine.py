"""Cantor-Bendixson analysis of space expressions.

Every point is described locally by its *sides*: the ways in which other
points accumulate at it.  A side records

* ``rank``: sup{g + 1 : stage g accumulates at the point from this side},
* ``card``: the cardinality of small one-sided neighbourhoods,
* ``cf``: the cofinality of the approach,
* ``noncompact``: whether the approach lives in a set without compact closure,
* ``mult``: how many identical copies of the side meet at the point.

The rank of a point is the maximum of its side ranks.  Uncountable intervals
are never enumerated: points are grouped into finitely many classes with a
representative, and stages are described by parametric regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Union

from .ordinals import (
    ALEPH_0,
    OMEGA,
    ONE,
    ZERO,
    Cardinal,
    Ordinal,
    add,
    card_of_omega_pow,
    cardinality_of,
    cofinality,
    initial,
    is_limit,
    is_successor,
    last_exponent,
    mul,
    nat,
    omega_pow,
    predecessor,
    round_up,
)
from .spaces import (
    Concat,
    Hedgehog,
    LexSum,
    MetricSum,
    OrdInterval,
    Product,
    PuncturedLadder,
    Reverse,
    Run,
    SpaceExpr,
    Spine,
    TowerSpines,
    ValidationError,
    designated_point,
    ladder_model,
    point_text,
    points_of_truncation,
    to_text,
)

INF = math.inf
Card = Union[int, Cardinal]


class UnsupportedProduct(ValidationError):
    """The left factor of a product has a nonempty second derivative."""


class UnsupportedHedgehog(ValidationError):
    """Infinitely many spines attain the body rank and the answer depends on the metric."""


class UnsupportedShape(ValidationError):
    """The expression lies outside the rule system."""


class UnresolvedPoint(ValueError):
    pass


class NonScattered(ValueError):
    pass


# ---------------------------------------------------------------- cardinal helpers

def cmax(a: Card, b: Card) -> Card:
    if isinstance(a, Cardinal) and isinstance(b, Cardinal):
        return a if a >= b else b
    if isinstance(a, Cardinal):
        return a
    if isinstance(b, Cardinal):
        return b
    return max(a, b)


def cadd(a: Card, b: Card) -> Card:
    if isinstance(a, int) and isinstance(b, int):
        return a + b
    return cmax(a, b)


def cmul(a: Card, b: Card) -> Card:
    if a == 0 or b == 0:
        return 0
    if isinstance(a, int) and isinstance(b, int):
        return a * b
    return cmax(a, b)


def clt(a: Card, b: Card) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return a < b
    if isinstance(a, int):
        return True
    if isinstance(b, int):
        return False
    return a < b


def _count_mul(c, m: Card):
    if c == 0:
        return 0
    if isinstance(m, Cardinal):
        return INF
    return c * m


# ---------------------------------------------------------------- local data

@dataclass(frozen=True)
class ProgressionValue:
    """The family of ordinals base + step*n + offset for n < w."""

    base: Ordinal
    step: Ordinal
    offset: Ordinal = ONE

    def at(self, n: int) -> Ordinal:
        return add(add(self.base, mul(self.step, nat(n))), self.offset)

    def __str__(self):
        return f"{{{self.base}+({self.step})*n+{self.offset} : n<w}}"


@dataclass(frozen=True)
class Side:
    rank: Ordinal
    card: Card
    cf: Card
    noncompact: bool = False
    mult: Card = 1

    def small(self, kappa: Cardinal) -> Ordinal:
        if clt(self.card, kappa):
            return self.rank
        if isinstance(self.cf, Cardinal) and self.cf < kappa:
            return initial(kappa)
        return ZERO


@dataclass(frozen=True)
class PointInfo:
    """A point, or a class of points sharing one local description."""

    path: tuple
    sides: tuple = ()
    own_gamma: bool = False
    count: object = 1
    span: tuple | None = None          # (lo, hi, hi_inclusive) ranks covered by the class
    small_value: object = None
    key: object = None

    @property
    def rank(self) -> Ordinal:
        return max((s.rank for s in self.sides), default=ZERO)

    @property
    def card(self) -> Card:
        c: Card = 1
        for s in self.sides:
            c = cmax(c, cmax(s.card, s.mult))
        return c

    @property
    def gamma(self) -> bool:
        return self.own_gamma or any(s.noncompact for s in self.sides)

    def small(self, kappa: Cardinal):
        if self.small_value is not None:
            return self.small_value
        return max((s.small(kappa) for s in self.sides), default=ZERO)

    def under(self, *prefix) -> "PointInfo":
        key = self.key if self.key is not None else self.path
        return replace(self, path=tuple(prefix) + self.path, key=(prefix, key))

    def plus(self, *sides) -> "PointInfo":
        return replace(self, sides=self.sides + tuple(s for s in sides if s is not None))

    @property
    def label(self) -> str:
        return point_text(self.path)


@dataclass(frozen=True)
class Profile:
    min: PointInfo | None
    max: PointInfo | None
    left_tail: Side | None
    right_tail: Side | None
    core_compact: bool
    size: Card
    height: Ordinal


def _approach(b: Ordinal) -> Side:
    e = last_exponent(b)
    return Side(e, card_of_omega_pow(e), cofinality(b))


# ---------------------------------------------------------------- intervals

def _max_rank(lo: Ordinal, hi: Ordinal, closed: bool):
    """(sup of ranks of points in ]lo, hi] or ]lo, hi[, attained?) or None if empty."""
    best = None

    def offer(v, att):
        nonlocal best
        if best is None or v > best[0] or (v == best[0] and att and not best[1]):
            best = (v, att)

    terms = hi.terms
    for k in range(1, len(terms)):
        t = Ordinal(terms[:k])
        if t > lo:
            offer(last_exponent(t), True)
    if terms:
        e = last_exponent(hi)
        if closed:
            if hi > lo:
                offer(e, True)
        else:
            c = terms[-1][1]
            base = add(Ordinal(terms[:-1]), mul(omega_pow(e), nat(c - 1)))
            if c > 1 and base > lo:
                offer(e, True)
            if is_successor(e):
                offer(predecessor(e), True)
            else:
                offer(e, False)
    return best


def _interior_max_rank(x: OrdInterval):
    if x.closed and is_successor(x.hi):
        p = predecessor(x.hi)
        return _max_rank(x.lo, p, True) if p > x.lo else None
    if x.closed and x.hi == x.lo:
        return None
    return _max_rank(x.lo, x.hi, False)


def _interval_size(x: OrdInterval) -> Card:
    if x.hi.is_finite:
        return int(x.hi) - int(x.lo) + (1 if x.closed else 0)
    return cardinality_of(x.hi)


def _interval_classes(x: OrdInterval, kappa: Cardinal | None) -> list:
    if kappa is None:
        return []
    mr = _interior_max_rank(x)
    if mr is None:
        return []
    o = initial(kappa)
    m, att = mr
    if m < o or (m == o and not att):
        return []
    cap = initial(kappa.successor())
    out = []
    for tag, eta in (("C0", o), ("C1", add(o, ONE))):
        p = round_up(x.lo, eta)
        if p < x.hi:
            out.append(PointInfo((p,), (_approach(p),), count=INF, key=("eta", tag)))
    if out:
        span = (o, m, att) if m < cap else (o, cap, False)
        out[0] = replace(out[0], span=span)
    return [c for c in out if c.card == kappa]


# ---------------------------------------------------------------- lexicographic sums

@dataclass(frozen=True)
class RunNode(SpaceExpr):
    """Internal: the infinite chain of units of a run; local paths are lex paths."""

    run: Run

    def lo(self, n: int) -> Ordinal:
        return self.run.start if n == 0 else add(self.run.alpha(n - 1), nat(3))

    def unit(self, n: int) -> Concat:
        a = self.run.alpha(n)
        return Concat((OrdInterval(a, self.lo(n)), OrdInterval(omega_pow(add(a, ONE))), self.run.tail))

    def to_lex(self, n: int, p: tuple) -> tuple:
        j, rest = p[0], p[1:]
        a = self.run.alpha(n)
        if j == 0:
            return (rest[0], ZERO)
        return (add(a, nat(j)),) + rest

    def from_lex(self, path: tuple) -> tuple[int, tuple]:
        idx = path[0]
        n = 0
        while self.run.alpha(n) < idx and add(self.run.alpha(n), nat(2)) < idx:
            n += 1
            if n > 10_000:
                raise UnresolvedPoint(f"index {idx} not in run")
        a = self.run.alpha(n)
        if idx <= a:
            if path[1:] not in ((), (ZERO,)):
                raise UnresolvedPoint(f"index point {idx} has no inner coordinates")
            return n, (0, idx)
        if idx == add(a, ONE):
            return n, (1,) + path[1:]
        return n, (2,) + path[1:]


def _flatten(x: LexSum, expand: int | None = None) -> list:
    """(part, path map into lex paths, kind) for the ordered sum a lex expression denotes."""
    items = [(i, b) for i, b in x.blocks] + [(r.start, r) for r in x.runs]
    items.sort(key=lambda t: t[0])
    out = []

    def seg(lo, hi, closed):
        out.append((OrdInterval(hi, lo, closed), lambda p: (p[0], ZERO), ("seg",)))

    cur = x.lo
    for pos, item in items:
        if cur < pos:
            if is_successor(pos):
                seg(cur, predecessor(pos), True)
            else:
                seg(cur, pos, False)
        if isinstance(item, Run):
            node = RunNode(item)
            if expand is None:
                out.append((node, lambda p: p, ("run",)))
            else:
                for n in range(max(expand, 1)):
                    for j, part in enumerate(node.unit(n).parts):
                        f = (lambda n_, j_: lambda p: node.to_lex(n_, (j_,) + p))(n, j)
                        out.append((part, f, ("unit",)))
            cur = item.sup
        else:
            out.append((item, (lambda i_: lambda p: (i_,) + p)(pos), ("block", pos)))
            cur = add(pos, ONE)
    if cur <= x.hi:
        seg(cur, x.hi, True)
    return out


def flatten_lex(x: LexSum, expand: int | None = None) -> list:
    return [(part, f) for part, f, _ in _flatten(x, expand)]


@lru_cache(maxsize=None)
def _lex_flat(x: LexSum):
    parts = _flatten(x)
    return (Concat(tuple(p for p, _, _ in parts)), tuple(f for _, f, _ in parts),
            tuple(k for _, _, k in parts))


def _lex_to(x: LexSum, path: tuple) -> tuple:
    return _lex_flat(x)[1][path[0]](path[1:])


def _lex_from(x: LexSum, path: tuple) -> tuple:
    flat, _, kinds = _lex_flat(x)
    if not path:
        raise UnresolvedPoint("empty lex path")
    idx = path[0]
    for i, (part, kind) in enumerate(zip(flat.parts, kinds)):
        if kind[0] == "block" and kind[1] == idx:
            return (i,) + path[1:]
        if kind[0] == "run" and part.run.start <= idx < part.run.sup:
            return (i,) + path
        if kind[0] == "seg" and part.lo <= idx and (idx <= part.hi if part.closed else idx < part.hi):
            if path[1:] not in ((), (ZERO,)):
                raise UnresolvedPoint(f"index point {idx} has no inner coordinates")
            return (i, idx)
    raise UnresolvedPoint(f"no lex coordinate {idx}")


def _lex_info(x: LexSum, info: PointInfo) -> PointInfo:
    return replace(info, path=_lex_to(x, info.path))


# ---------------------------------------------------------------- profiles

@lru_cache(maxsize=None)
def profile(x: SpaceExpr) -> Profile:
    if isinstance(x, OrdInterval):
        mn = PointInfo((x.lo,), key="min")
        mx = None
        if x.closed:
            sides = (_approach(x.hi),) if x.hi > x.lo and is_limit(x.hi) else ()
            mx = PointInfo((x.hi,), sides, key="max")
        mr = _max_rank(x.lo, x.hi, x.closed)
        h = ONE if mr is None else max(ONE, add(mr[0], ONE) if mr[1] else mr[0])
        return Profile(mn, mx, None, None if x.closed else _approach(x.hi), True, _interval_size(x), h)
    if isinstance(x, Reverse):
        p = profile(x.inner)
        return Profile(p.max, p.min, p.right_tail, p.left_tail, p.core_compact, p.size, p.height)
    if isinstance(x, Concat):
        profs, fixed, ends = _junctions(x)
        first, last = profs[0], profs[-1]
        size: Card = 0
        for p in profs:
            size = cadd(size, p.size)
        h = max(p.height for p in profs)
        for f in fixed.values():
            h = max(h, add(f.rank, ONE))
        for f in ends.values():
            h = max(h, add(f.rank, ONE))
        return Profile(ends.get("min"), ends.get("max"), first.left_tail, last.right_tail,
                       all(p.core_compact for p in profs), size, h)
    if isinstance(x, PuncturedLadder):
        if x.closed:
            return profile(ladder_model(x))
        tail = Side(ONE, ALEPH_0, ALEPH_0, noncompact=True)
        return Profile(None, PointInfo((1, 1), key="max"), tail, None, False, ALEPH_0, ONE)
    if isinstance(x, LexSum):
        p = profile(_lex_flat(x)[0])
        fix = lambda i: _lex_info(x, i) if i is not None else None
        return replace(p, min=fix(p.min), max=fix(p.max))
    if isinstance(x, RunNode):
        return _run_profile(x)
    if isinstance(x, MetricSum):
        profs = [profile(p) for p in x.parts]
        size = 0
        for p in profs:
            size = cadd(size, p.size)
        return Profile(None, None, None, None, all(is_compact(p) for p in x.parts), size,
                       max(p.height for p in profs))
    if isinstance(x, Product):
        return _product_profile(x)
    if isinstance(x, Hedgehog):
        return _hedgehog_profile(x)
    raise TypeError(f"not a space expression: {x!r}")


def is_compact(x: SpaceExpr) -> bool:
    p = profile(x)
    if not p.core_compact:
        return False
    return not x.ordered or (p.min is not None and p.max is not None)


def height(x: SpaceExpr) -> Ordinal:
    return profile(x).height


def size(x: SpaceExpr) -> Card:
    return profile(x).size


def _extras(profs, i: int, roles: set) -> tuple:
    """Sides that neighbours of part i contribute to its endpoint(s) named by ``roles``."""
    out = []
    if "min" in roles and i > 0 and profs[i - 1].max is None:
        out.append(profs[i - 1].right_tail)
    if "max" in roles and i < len(profs) - 1 and profs[i + 1].min is None:
        out.append(profs[i + 1].left_tail)
    return tuple(out)


def _roles(p: Profile, which: str) -> set:
    if p.min is not None and p.max is not None and p.min.path == p.max.path:
        return {"min", "max"}
    return {which}


@lru_cache(maxsize=None)
def _junctions(x: Concat):
    profs = [profile(p) for p in x.parts]
    last = len(profs) - 1
    for i in range(last):
        if profs[i].max is None and profs[i + 1].min is None:
            raise ValidationError(
                f"concat leaves a gap between {to_text(x.parts[i])} and {to_text(x.parts[i + 1])}")
    fixed, ends = {}, {}
    for i, p in enumerate(profs):
        for which, e in (("min", p.min), ("max", p.max)):
            if e is None:
                continue
            roles = _roles(p, which)
            info = e.under(i).plus(*_extras(profs, i, roles))
            outer = False
            if i == 0 and "min" in roles:
                ends["min"] = info
                outer = True
            if i == last and "max" in roles:
                ends["max"] = info
                outer = True
            if not outer:
                fixed[info.path] = info
    return profs, fixed, ends


# ---------------------------------------------------------------- point classes

@lru_cache(maxsize=None)
def classes(x: SpaceExpr, kappa: Cardinal | None = None) -> tuple:
    """Interior point classes: every explicit point plus the classes relevant for ``kappa``.

    Endpoints of ordered expressions are excluded; the parent decides their sides.
    """
    if isinstance(x, OrdInterval):
        return tuple(_interval_classes(x, kappa))
    if isinstance(x, Reverse):
        return classes(x.inner, kappa)
    if isinstance(x, Concat):
        _, fixed, _ = _junctions(x)
        out = [c.under(i) for i, p in enumerate(x.parts) for c in classes(p, kappa)]
        return tuple(out) + tuple(fixed.values())
    if isinstance(x, PuncturedLadder):
        return classes(ladder_model(x), kappa) if x.closed else ()
    if isinstance(x, LexSum):
        return tuple(_lex_info(x, c) for c in classes(_lex_flat(x)[0], kappa))
    if isinstance(x, RunNode):
        return _run_classes(x, kappa)
    if isinstance(x, MetricSum):
        return tuple(c.under(i) for i, p in enumerate(x.parts) for c in all_classes(p, kappa))
    if isinstance(x, Product):
        return _product_classes(x, kappa)
    if isinstance(x, Hedgehog):
        return _hedgehog_classes(x, kappa)
    raise TypeError(x)


def all_classes(x: SpaceExpr, kappa: Cardinal | None = None) -> tuple:
    p = profile(x)
    ends = tuple(e for e in (p.min, p.max) if e is not None)
    if p.min is not None and p.max is not None and p.min.path == p.max.path:
        ends = (p.min,)
    return classes(x, kappa) + ends


# ---------------------------------------------------------------- point lookup

def locate(x: SpaceExpr, path: tuple):
    """(PointInfo, role) with role in {"min", "max", None}; sides are local to x."""
    path = tuple(path)
    if isinstance(x, OrdInterval):
        if len(path) != 1 or not isinstance(path[0], Ordinal):
            raise UnresolvedPoint(f"{point_text(path)} is not a point of {to_text(x)}")
        b = path[0]
        if not (x.lo <= b and (b <= x.hi if x.closed else b < x.hi)):
            raise UnresolvedPoint(f"{b} is outside {to_text(x)}")
        sides = (_approach(b),) if b > x.lo and is_limit(b) else ()
        role = "min" if b == x.lo else ("max" if x.closed and b == x.hi else None)
        if x.lo == x.hi:
            role = "both"
        return PointInfo(path, sides), role
    if isinstance(x, Reverse):
        info, role = locate(x.inner, path)
        return info, {"min": "max", "max": "min"}.get(role, role)
    if isinstance(x, Concat):
        if not path or not isinstance(path[0], int) or not 0 <= path[0] < len(x.parts):
            raise UnresolvedPoint(f"bad concat coordinate in {point_text(path)}")
        i = path[0]
        info, role = locate(x.parts[i], path[1:])
        info = info.under(i)
        profs = _junctions(x)[0]
        roles = {"min", "max"} if role == "both" else ({role} if role else set())
        info = info.plus(*_extras(profs, i, roles))
        out = set()
        if "min" in roles and i == 0:
            out.add("min")
        if "max" in roles and i == len(x.parts) - 1:
            out.add("max")
        role = "both" if len(out) == 2 else (out.pop() if out else None)
        return info, role
    if isinstance(x, PuncturedLadder):
        if x.closed:
            return locate(ladder_model(x), path)
        if len(path) != 2 or not all(isinstance(c, int) and c >= 1 for c in path):
            raise UnresolvedPoint(f"{point_text(path)} is not a ladder point")
        return PointInfo(path), ("max" if path == (1, 1) else None)
    if isinstance(x, LexSum):
        flat = _lex_flat(x)[0]
        info, role = locate(flat, _lex_from(x, path))
        return replace(info, path=path), role
    if isinstance(x, RunNode):
        n, upath = x.from_lex(path)
        info, role = locate(x.unit(n), upath)
        role = role if (role == "min" and n == 0) else None
        return replace(info, path=path), role
    if isinstance(x, MetricSum):
        if not path or not isinstance(path[0], int) or not 0 <= path[0] < len(x.parts):
            raise UnresolvedPoint(f"bad summand coordinate in {point_text(path)}")
        return point_info(x.parts[path[0]], path[1:]).under(path[0]), None
    if isinstance(x, Product):
        if len(path) != 1 or not isinstance(path[0], tuple) or len(path[0]) != 2:
            raise UnresolvedPoint(f"{point_text(path)} is not a product point")
        pl, pr = path[0]
        return _combine(point_info(x.left, pl), point_info(x.right, pr)), None
    if isinstance(x, Hedgehog):
        return _hedgehog_locate(x, path), None
    raise TypeError(x)


def point_info(x: SpaceExpr, path: tuple) -> PointInfo:
    return locate(x, path)[0]


def rank_of_point(x: SpaceExpr, p: tuple) -> Ordinal:
    return point_info(x, p).rank


# ---------------------------------------------------------------- runs

def _run_height(x: RunNode) -> Ordinal:
    h0, h1 = height(x.unit(0)), height(x.unit(1))
    sup = x.run.sup
    if h0 == h1:
        return max(h0, sup)
    if h0 < sup and h1 < sup:
        return sup
    raise UnsupportedShape(f"unit heights of run {to_text(x.run.tail)} do not settle")


def _run_profile(x: RunNode) -> Profile:
    u0, u1 = profile(x.unit(0)), profile(x.unit(1))
    h = _run_height(x)
    card = cmax(ALEPH_0, cmax(u0.size, u1.size))
    mn = replace(u0.min, path=x.to_lex(0, u0.min.path)) if u0.min else None
    tail = Side(h, card, ALEPH_0, noncompact=not (u0.core_compact and u1.core_compact))
    return Profile(mn, None, None, tail, u0.core_compact and u1.core_compact, card, h)


def _unit_classes(x: RunNode, n: int, kappa) -> dict:
    u = x.unit(n)
    p = profile(u)
    found = list(classes(u, kappa))
    if p.max is not None:
        found.append(replace(p.max, key="unit-max"))
    if n > 0 and p.min is not None:
        found.append(replace(p.min, key="unit-min"))
    return {c.key: c for c in found}


def _run_classes(x: RunNode, kappa) -> tuple:
    c0, c1 = _unit_classes(x, 0, kappa), _unit_classes(x, 1, kappa)
    xi = ProgressionValue(x.run.start, x.run.step, ONE)
    out = []
    for key, a in c0.items():
        b = c1.get(key)
        info = replace(a, path=x.to_lex(0, a.path))
        if b is None:
            out.append(info)
            continue
        info = replace(info, count=INF)
        if b.rank != a.rank:
            info = replace(info, span=(a.rank, x.run.sup, False))
        if kappa is not None and a.small(kappa) != b.small(kappa):
            if a.small(kappa) == xi.at(0) and b.small(kappa) == xi.at(1):
                info = replace(info, small_value=xi)
            else:
                raise UnsupportedShape("run units differ in a way the rules do not track")
        out.append(info)
    for key, b in c1.items():
        if key not in c0:
            out.append(replace(b, path=x.to_lex(1, b.path), count=INF))
    return tuple(out)


# ---------------------------------------------------------------- products

def _z_kinds(z: SpaceExpr) -> list:
    """Representatives of the isolated and the limit points of a factor with empty second derivative."""
    kinds = {}
    for p in all_classes(z) + tuple(PointInfo(q) for q in points_of_truncation(z, 2)):
        info = point_info(z, p.path)
        r = info.rank
        if r not in kinds:
            kinds[r] = replace(info, count=INF if r == ZERO else count_stage(z, ONE))
    return [kinds[r] for r in sorted(kinds)]


def _combine(zi: PointInfo, hi: PointInfo) -> PointInfo:
    if zi.rank == ZERO:
        sides = hi.sides
    else:
        zc = zi.card
        sides = tuple(Side(add(s.rank, ONE), cmax(s.card, zc), s.cf, s.noncompact, s.mult) for s in hi.sides)
        sides += zi.sides
    span = None
    if hi.span is not None:
        lo, top, inc = hi.span
        span = (add(lo, zi.rank), add(top, zi.rank), inc)
    small = hi.small_value if zi.rank == ZERO else None
    key = (zi.key if zi.key is not None else zi.path, hi.key if hi.key is not None else hi.path)
    return PointInfo(((zi.path, hi.path),), sides, zi.gamma or hi.gamma,
                     _count_mul(zi.count, 1) if hi.count == 1 else INF, span, small, key)


def _check_product(x: Product):
    if height(x.left) > nat(2):
        raise UnsupportedProduct(
            f"left factor {to_text(x.left)} has a nonempty second derivative; the product rule needs it empty")


def _product_profile(x: Product) -> Profile:
    _check_product(x)
    hl, hr = profile(x.left), profile(x.right)
    h = hr.height
    if count_stage(x.left, ONE) and is_successor(h):
        h = add(h, ONE)
    return Profile(None, None, None, None, is_compact(x.left) and is_compact(x.right),
                   cmul(hl.size, hr.size), h)


def _product_classes(x: Product, kappa) -> tuple:
    _check_product(x)
    return tuple(_combine(zk, hc) for zk in _z_kinds(x.left) for hc in all_classes(x.right, kappa))


# ---------------------------------------------------------------- hedgehogs

def _tower_member(beta: Ordinal) -> SpaceExpr:
    from .families import prop4_Z
    return prop4_Z(beta)


@lru_cache(maxsize=None)
def _body(x: Hedgehog) -> PointInfo:
    sides, gamma = [], False
    for s in x.spines:
        if isinstance(s, TowerSpines):
            sides.append(Side(s.lam, ALEPH_0, cofinality(s.lam), mult=ALEPH_0))
            gamma = True
            continue
        b = point_info(s.expr, s.base)
        for side in b.sides:
            sides.append(replace(side, mult=cmul(side.mult, s.mult)))
        gamma = gamma or b.gamma
        if isinstance(s.mult, Cardinal):
            if profile(s.expr).size != 1:
                gamma = True
            if b.rank >= ONE and count_stage(s.expr, b.rank) > 1:
                raise UnsupportedHedgehog(
                    f"infinitely many copies of {to_text(s.expr)} attain the body rank {b.rank} while the spine "
                    "has other points of that rank; the body's rank then depends on the spine metric")
    return PointInfo(("o",), tuple(sides), gamma, key="body")


def _hedgehog_profile(x: Hedgehog) -> Profile:
    body = _body(x)
    h = add(body.rank, ONE)
    total: Card = 1
    compact = True
    for s in x.spines:
        if isinstance(s, TowerSpines):
            h = max(h, s.lam)
            total = cmax(total, ALEPH_0)
            compact = False
            continue
        p = profile(s.expr)
        h = max(h, p.height)
        rest = p.size - 1 if isinstance(p.size, int) else p.size
        total = cadd(total, cmul(rest, s.mult))
        if not is_compact(s.expr) or (isinstance(s.mult, Cardinal) and p.size != 1):
            compact = False
    return Profile(None, None, None, None, compact, total, h)


def _hedgehog_classes(x: Hedgehog, kappa) -> tuple:
    out = [_body(x)]
    for i, s in enumerate(x.spines):
        if isinstance(s, TowerSpines):
            beyond = add(OMEGA, ONE)
            if kappa is None and s.lam > beyond:
                rep = (i, beyond, ((ZERO,), ("o",)))
                out.append(PointInfo(rep, (Side(OMEGA, ALEPH_0, ALEPH_0),), True, INF,
                                     (OMEGA, s.lam, False), key=(i, "tower")))
            continue
        copy = () if s.mult == 1 else (0,)
        for c in all_classes(s.expr, kappa):
            if c.path == s.base:
                continue
            c = c.under(i, *copy)
            if s.mult != 1:
                c = replace(c, count=INF)
            out.append(c)
    return tuple(out)


def _hedgehog_locate(x: Hedgehog, path: tuple) -> PointInfo:
    if path == ("o",):
        return _body(x)
    if not path or not isinstance(path[0], int) or not 0 <= path[0] < len(x.spines):
        raise UnresolvedPoint(f"bad spine coordinate in {point_text(path)}")
    i, s = path[0], x.spines[path[0]]
    if isinstance(s, TowerSpines):
        beta = path[1] if len(path) > 1 else None
        if not isinstance(beta, Ordinal) or not (ONE <= beta < s.lam):
            raise UnresolvedPoint(f"bad tower index in {point_text(path)}")
        z = _tower_member(beta)
        rest = path[2:]
        if rest == designated_point(z):
            raise UnresolvedPoint("a spine basepoint is the body o")
        return point_info(z, rest).under(i, beta)
    if s.mult != 1:
        if len(path) < 2 or not isinstance(path[1], int):
            raise UnresolvedPoint(f"missing copy index in {point_text(path)}")
        pre, rest = path[:2], path[2:]
    else:
        pre, rest = path[:1], path[1:]
    if rest == s.base:
        raise UnresolvedPoint("a spine basepoint is the body o")
    return point_info(s.expr, rest).under(*pre)


# ---------------------------------------------------------------- stage sizes

def _interval_count(x: OrdInterval, g: Ordinal):
    if g == ZERO:
        s = _interval_size(x)
        return s if isinstance(s, int) else INF
    first = round_up(x.lo, g)
    if not (first < x.hi or (x.closed and first == x.hi)):
        return 0
    top = x.hi
    if not x.closed:
        if last_exponent(top) > g:
            return INF
        # top is itself a multiple of w^g; the largest one below it drops a coefficient
        terms = list(top.terms)
        e, c = terms[-1]
        top = Ordinal(terms[:-1] + ([(e, c - 1)] if c > 1 else []))
        if top < first:
            return 0
    from .ordinals import truncate_below
    top = truncate_below(top, g)
    hp, hc = _split(top, g)
    fp, fc = _split(first, g)
    if hp != fp:
        return INF
    return max(hc - fc + 1, 0)


def _times(a, b):
    return 0 if a == 0 or b == 0 else a * b


def _split(a: Ordinal, g: Ordinal):
    """a = P + w^g * c with the terms of P above g."""
    terms = a.terms
    if terms and last_exponent(a) == g:
        return Ordinal(terms[:-1]), terms[-1][1]
    return a, 0


@lru_cache(maxsize=None)
def count_stage(x: SpaceExpr, g: Ordinal):
    """Number of points of rank >= g (``math.inf`` when infinite)."""
    if isinstance(x, OrdInterval):
        return _interval_count(x, g)
    if isinstance(x, Reverse):
        return count_stage(x.inner, g)
    if isinstance(x, Concat):
        profs, fixed, ends = _junctions(x)
        total = sum(count_stage(p, g) for p in x.parts)
        for info in list(fixed.values()) + list(ends.values()):
            inner = point_info(x.parts[info.path[0]], info.path[1:]).rank
            total += (info.rank >= g) - (inner >= g)
        return total
    if isinstance(x, PuncturedLadder):
        if x.closed:
            return count_stage(ladder_model(x), g)
        return INF if g == ZERO else 0
    if isinstance(x, LexSum):
        return count_stage(_lex_flat(x)[0], g)
    if isinstance(x, RunNode):
        if count_stage(x.unit(1), g) or count_stage(x.unit(2), g):
            return INF
        return count_stage(x.unit(0), g)
    if isinstance(x, MetricSum):
        return sum(count_stage(p, g) for p in x.parts)
    if isinstance(x, Product):
        _check_product(x)
        z0, z1 = count_stage(x.left, ZERO), count_stage(x.left, ONE)
        if g == ZERO:
            return _times(z0, count_stage(x.right, ZERO))
        if is_limit(g):
            return _times(z0, count_stage(x.right, g))
        iso = z0 - z1 if z0 != INF else INF
        return _times(z1, count_stage(x.right, predecessor(g))) + _times(iso, count_stage(x.right, g))
    if isinstance(x, Hedgehog):
        total = 1 if _body(x).rank >= g else 0
        for s in x.spines:
            if isinstance(s, TowerSpines):
                total += INF if g < s.lam else 0
                continue
            c = count_stage(s.expr, g) - (1 if rank_of_point(s.expr, s.base) >= g else 0)
            total += _count_mul(c, s.mult)
        return total
    raise TypeError(x)


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class Region:
    prefix: tuple = ()

    def contains(self, path: tuple) -> bool:
        n = len(self.prefix)
        return tuple(path[:n]) == self.prefix and self._has(tuple(path[n:]))

    def shifted(self, *pre) -> "Region":
        return replace(self, prefix=tuple(pre) + self.prefix)

    def enumerate(self, limit: int):
        inner = self._enum(limit)
        return None if inner is None else [self.prefix + p for p in inner]

    def _enum(self, limit):
        return None

    def to_json(self) -> dict:
        d = {"kind": type(self).__name__.replace("Region", "").lower(), "at": point_text(self.prefix)}
        d.update(self._json())
        return d

    def _json(self) -> dict:
        return {}


@dataclass(frozen=True)
class MultRegion(Region):
    """Points b of [lo, hi] (or [lo, hi[) with b > lo and w^g dividing b; all points when g = 0."""

    lo: Ordinal = ZERO
    hi: Ordinal = ZERO
    closed: bool = True
    g: Ordinal = ZERO

    def _has(self, p):
        if len(p) != 1 or not isinstance(p[0], Ordinal):
            return False
        b = p[0]
        if not (self.lo <= b and (b <= self.hi if self.closed else b < self.hi)):
            return False
        return self.g == ZERO or (b > self.lo and last_exponent(b) >= self.g)

    def _enum(self, limit):
        iv = OrdInterval(self.hi, self.lo, self.closed)
        c = _interval_count(iv, self.g)
        if c == INF or c > limit:
            return None
        step = omega_pow(self.g)
        v = self.lo if self.g == ZERO else round_up(self.lo, self.g)
        out = []
        while len(out) < c:
            out.append((v,))
            v = add(v, step)
        return out

    def _json(self):
        return {"from": str(self.lo), "to": str(self.hi), "closed": self.closed, "multiples_of": f"w^{self.g}"}


@dataclass(frozen=True)
class PointRegion(Region):
    def _has(self, p):
        return p == ()

    def _enum(self, limit):
        return [()]


@dataclass(frozen=True)
class AllRegion(Region):
    def _has(self, p):
        return True


@dataclass(frozen=True)
class RectRegion(Region):
    left: tuple = ()
    right: tuple = ()

    def _has(self, p):
        if len(p) != 1 or not isinstance(p[0], tuple) or len(p[0]) != 2:
            return False
        a, b = p[0]
        return any(r.contains(a) for r in self.left) and any(r.contains(b) for r in self.right)

    def _enum(self, limit):
        ls, rs = _enum_all(self.left, limit), _enum_all(self.right, limit)
        if ls is None or rs is None or len(ls) * len(rs) > limit:
            return None
        return [((a, b),) for a in ls for b in rs]

    def _json(self):
        return {"left": [r.to_json() for r in self.left], "right": [r.to_json() for r in self.right]}


@dataclass(frozen=True)
class SpineRegion(Region):
    inner: tuple = ()
    base: tuple = ()
    copies: bool = False

    def _has(self, p):
        if self.copies:
            if not p or not isinstance(p[0], int):
                return False
            p = p[1:]
        return p != self.base and any(r.contains(p) for r in self.inner)

    def _enum(self, limit):
        if self.copies:
            return None
        got = _enum_all(self.inner, limit)
        return None if got is None else [q for q in got if q != self.base]

    def _json(self):
        return {"without": point_text(self.base), "copies": self.copies,
                "regions": [r.to_json() for r in self.inner]}


@dataclass(frozen=True)
class TowerRegion(Region):
    lam: Ordinal = OMEGA
    g: Ordinal = ZERO

    def _has(self, p):
        if not p or not isinstance(p[0], Ordinal) or not (ONE <= p[0] < self.lam):
            return False
        z = _tower_member(p[0])
        if p[1:] == designated_point(z):
            return False
        try:
            return rank_of_point(z, p[1:]) >= self.g
        except (UnresolvedPoint, TypeError):
            return False

    def _json(self):
        return {"spines": f"Z_b for 1 <= b < {self.lam}", "rank_at_least": str(self.g)}


@dataclass(frozen=True)
class RankRegion(Region):
    """Points of a sub-expression whose rank is at least g (used where no closed form is kept)."""

    node: SpaceExpr = None
    g: Ordinal = ZERO

    def _has(self, p):
        try:
            return rank_of_point(self.node, p) >= self.g
        except (UnresolvedPoint, TypeError, IndexError):
            return False

    def _json(self):
        return {"rank_at_least": str(self.g)}


@dataclass(frozen=True)
class LexRegion(Region):
    node: SpaceExpr = None
    inner: tuple = ()

    def _has(self, p):
        try:
            q = _lex_from(self.node, p)
        except (UnresolvedPoint, TypeError, IndexError):
            return False
        return any(r.contains(q) for r in self.inner)

    def _enum(self, limit):
        got = _enum_all(self.inner, limit)
        return None if got is None else [_lex_to(self.node, q) for q in got]

    def _json(self):
        return {"regions": [r.to_json() for r in self.inner]}


def _enum_all(regions, limit):
    seen = []
    for r in regions:
        got = r.enumerate(limit)
        if got is None:
            return None
        for q in got:
            if q not in seen:
                seen.append(q)
        if len(seen) > limit:
            return None
    return seen


@lru_cache(maxsize=None)
def stage_regions(x: SpaceExpr, g: Ordinal) -> tuple:
    if isinstance(x, OrdInterval):
        if count_stage(x, g) == 0:
            return ()
        return (MultRegion((), x.lo, x.hi, x.closed, g),)
    if isinstance(x, Reverse):
        return stage_regions(x.inner, g)
    if isinstance(x, Concat):
        out = [r.shifted(i) for i, p in enumerate(x.parts) for r in stage_regions(p, g)]
        _, fixed, ends = _junctions(x)
        for info in list(fixed.values()) + list(ends.values()):
            inner = point_info(x.parts[info.path[0]], info.path[1:]).rank
            if info.rank >= g > inner:
                out.append(PointRegion(info.path))
        return tuple(out)
    if isinstance(x, PuncturedLadder):
        if x.closed:
            return stage_regions(ladder_model(x), g)
        return (AllRegion(),) if g == ZERO else ()
    if isinstance(x, LexSum):
        inner = stage_regions(_lex_flat(x)[0], g)
        return (LexRegion((), x, inner),) if inner else ()
    if isinstance(x, RunNode):
        return (RankRegion((), x, g),) if count_stage(x, g) else ()
    if isinstance(x, MetricSum):
        return tuple(r.shifted(i) for i, p in enumerate(x.parts) for r in stage_regions(p, g))
    if isinstance(x, Product):
        if count_stage(x, g) == 0:
            return ()
        whole = (AllRegion(),)
        if g == ZERO:
            return (RectRegion((), whole, whole),)
        out = []
        if is_successor(g):
            zl, hp = stage_regions(x.left, ONE), stage_regions(x.right, predecessor(g))
            if zl and hp:
                out.append(RectRegion((), zl, hp))
        hg = stage_regions(x.right, g)
        if hg:
            out.append(RectRegion((), whole, hg))
        return tuple(out)
    if isinstance(x, Hedgehog):
        out = [PointRegion(("o",))] if _body(x).rank >= g else []
        for i, s in enumerate(x.spines):
            if isinstance(s, TowerSpines):
                if g < s.lam:
                    out.append(TowerRegion((i,), s.lam, g))
                continue
            inner = stage_regions(s.expr, g)
            if inner:
                out.append(SpineRegion((i,), inner, s.base, s.mult != 1))
        return tuple(out)
    raise TypeError(x)


# ---------------------------------------------------------------- traces

@lru_cache(maxsize=None)
def breakpoints(x: SpaceExpr) -> frozenset:
    """Stage ordinals at which the region formulas of ``x`` change."""
    out = {ZERO, ONE, height(x)}
    if isinstance(x, OrdInterval):
        for e, _ in x.hi.terms:
            e = last_exponent(Ordinal(((e, 1),)))
            out |= {e, add(e, ONE)}
    elif isinstance(x, Reverse):
        out |= breakpoints(x.inner)
    elif isinstance(x, (Concat, MetricSum)):
        for p in x.parts:
            out |= breakpoints(p)
        if isinstance(x, Concat):
            _, fixed, ends = _junctions(x)
            for info in list(fixed.values()) + list(ends.values()):
                out |= {info.rank, add(info.rank, ONE)}
    elif isinstance(x, PuncturedLadder) and x.closed:
        out |= breakpoints(ladder_model(x))
    elif isinstance(x, LexSum):
        out |= breakpoints(_lex_flat(x)[0])
    elif isinstance(x, RunNode):
        out |= breakpoints(x.unit(0)) | {x.run.sup}
    elif isinstance(x, Product):
        for b in breakpoints(x.right):
            out |= {b, add(b, ONE)}
    elif isinstance(x, Hedgehog):
        r = _body(x).rank
        out |= {r, add(r, ONE)}
        for s in x.spines:
            if isinstance(s, TowerSpines):
                out |= {s.lam, add(s.lam, ONE)}
            else:
                out |= breakpoints(s.expr)
    h = height(x)
    return frozenset(b for b in out if b <= h)


@dataclass(frozen=True)
class StageDesc:
    gamma: Ordinal
    regions: tuple
    count: object
    points: tuple | None

    @property
    def empty(self) -> bool:
        return self.count == 0

    def contains(self, path: tuple) -> bool:
        return any(r.contains(tuple(path)) for r in self.regions)

    def to_json(self) -> dict:
        return {
            "stage_ordinal": str(self.gamma),
            "size": "infinite" if self.count == INF else self.count,
            "regions": [r.to_json() for r in self.regions],
            "points": None if self.points is None else [point_text(p) for p in self.points],
        }


ENUM_LIMIT = 64


def stage(x: SpaceExpr, g: Ordinal) -> StageDesc:
    regions = stage_regions(x, g)
    count = count_stage(x, g)
    pts = None
    if count != INF and count <= ENUM_LIMIT:
        got = _enum_all(regions, ENUM_LIMIT)
        if got is not None and len(got) == count:
            pts = tuple(got)
    return StageDesc(g, regions if count else (), count, pts)


@dataclass(frozen=True)
class DerivTrace:
    expr: SpaceExpr
    height: Ordinal
    entries: tuple

    def stage(self, g: Ordinal) -> StageDesc:
        return stage(self.expr, g)

    def to_json(self) -> dict:
        return {"expr": to_text(self.expr), "height": str(self.height),
                "stages": [e.to_json() for e in self.entries]}


def derive_full(x: SpaceExpr) -> DerivTrace:
    validate(x)
    h = height(x)
    entries = tuple(stage(x, g) for g in sorted(breakpoints(x)))
    if not entries[-1].empty:
        raise NonScattered(f"no empty stage found for {to_text(x)}")
    return DerivTrace(x, h, entries)


def is_scattered(x: SpaceExpr) -> tuple[bool, Ordinal]:
    t = derive_full(x)
    return True, t.height


def validate(x: SpaceExpr) -> None:
    """Check the structural invariants the rules rely on; raises a ValidationError subclass."""
    if isinstance(x, Reverse):
        validate(x.inner)
    elif isinstance(x, (Concat, MetricSum)):
        for p in x.parts:
            validate(p)
    elif isinstance(x, Product):
        validate(x.left)
        validate(x.right)
        _check_product(x)
    elif isinstance(x, Hedgehog):
        for s in x.spines:
            if isinstance(s, Spine):
                validate(s.expr)
                try:
                    point_info(s.expr, s.base)
                except UnresolvedPoint as e:
                    raise ValidationError(f"hedgehog basepoint {point_text(s.base)} is not a point of its spine: {e}")
        _body(x)
    elif isinstance(x, LexSum):
        for _, b in x.blocks:
            validate(b)
        for r in x.runs:
            validate(r.tail)
    profile(x)
