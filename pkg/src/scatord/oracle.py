"""Brute-force derivatives over a small decidable algebra of ordinal sets.

An atom is ``{b in [a, e] : xi = 0 or (b > 0 and w^xi divides b)}`` with either
end optionally open.  Finite unions of atoms (``DefSet``) and finite unions of
boxes of them (``RectUnion``) are closed under taking limit points, and
membership is a CNF test.  The derivatives never consult the rule engine;
only ``compare_with_engine`` imports it, to report disagreements.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as _cartesian

from .ordinals import (
    ONE,
    ZERO,
    Ordinal,
    add,
    is_limit,
    is_successor,
    last_exponent,
    mul,
    nat,
    omega_pow,
    predecessor,
    round_up,
    truncate_below,
)


@dataclass(frozen=True, order=False)
class Atom:
    xi: Ordinal
    a: Ordinal
    b: Ordinal
    lo_open: bool = False
    hi_open: bool = False

    def __contains__(self, beta: Ordinal) -> bool:
        if beta < self.a or (self.lo_open and beta == self.a):
            return False
        if beta > self.b or (self.hi_open and beta == self.b):
            return False
        return self.xi == ZERO or (beta > ZERO and last_exponent(beta) >= self.xi)

    def first_after(self, g: Ordinal | None) -> Ordinal | None:
        """Least member strictly above g (or the least member when g is None)."""
        if g is None or g < self.a:
            if self.a in self:
                return self.a
            g = self.a
        cand = round_up(g, self.xi)
        return cand if cand in self else None

    @property
    def empty(self) -> bool:
        return self.first_after(None) is None

    def __str__(self):
        return f"D({self.xi}, {'(' if self.lo_open else '['}{self.a}, {self.b}{')' if self.hi_open else ']'})"


@dataclass(frozen=True)
class Comb:
    """Copies of an inner set placed at each member of a base atom.

    Members are ``m + d`` with ``m`` in ``base`` (multiples of ``w^base.xi``) and
    ``d`` in ``inner``, a DefSet inside ``[0, w^base.xi[``.
    """

    base: Atom
    inner: "DefSet"

    def _split(self, beta: Ordinal):
        m = truncate_below(beta, self.base.xi)
        rest = Ordinal(tuple(t for t in beta.terms if t[0] < self.base.xi))
        return m, rest

    def __contains__(self, beta: Ordinal) -> bool:
        m, d = self._split(beta)
        return m in self.base and d in self.inner

    def first_after(self, g: Ordinal | None) -> Ordinal | None:
        start = self.inner.first_after(None)
        if start is None:
            return None
        if g is None:
            m = self.base.first_after(None)
        else:
            m, d = self._split(g)
            if m in self.base and (nxt := self.inner.first_after(d)) is not None:
                return add(m, nxt)
            m = self.base.first_after(m)
        return None if m is None else add(m, start)

    @property
    def empty(self) -> bool:
        return self.base.empty or self.inner.empty

    def derive(self) -> list:
        out = [Comb(self.base, def_derive(self.inner))]
        if self.base.xi > ZERO:
            out.append(Atom(add(self.base.xi, ONE), self.base.a, self.base.b, True, False))
        return out

    def __str__(self):
        return f"{self.base} + ({self.inner})"


def D(xi, a, b) -> "DefSet":
    cv = lambda v: nat(v) if isinstance(v, int) else v
    return DefSet.of(Atom(cv(xi), cv(a), cv(b)))


@dataclass(frozen=True)
class DefSet:
    atoms: tuple = ()

    @staticmethod
    def of(*atoms: Atom) -> "DefSet":
        keep = []
        for t in atoms:
            if t.empty or t in keep:
                continue
            keep.append(t)
        return DefSet(tuple(keep))

    @staticmethod
    def finite(values) -> "DefSet":
        return DefSet.of(*(Atom(ZERO, v, v) for v in values))

    def __contains__(self, beta: Ordinal) -> bool:
        return any(beta in t for t in self.atoms)

    def __or__(self, other: "DefSet") -> "DefSet":
        return DefSet.of(*(self.atoms + other.atoms))

    @property
    def empty(self) -> bool:
        return not self.atoms

    def first_after(self, g: Ordinal | None) -> Ordinal | None:
        found = [m for t in self.atoms if (m := t.first_after(g)) is not None]
        return min(found) if found else None

    def endpoints(self) -> list[Ordinal]:
        pts = set()
        for t in self.atoms:
            pts |= {t.a, t.b}
        return sorted(pts)

    def probes(self, extra: int = 3) -> list[Ordinal]:
        """Atom endpoints, small offsets, and points of fundamental sequences below each endpoint."""
        pts = set()
        for e in self.endpoints():
            pts.add(e)
            for k in range(1, extra + 1):
                pts.add(add(e, nat(k)))
            if is_limit(e):
                pts.update(fundamental(e, n) for n in range(1, extra + 1))
        return sorted(pts)

    def members(self, limit: int = 10_000) -> list[Ordinal] | None:
        """All members if there are at most ``limit`` of them."""
        out = []
        for t in self.atoms:
            v = t.first_after(None)
            while v is not None:
                if v not in out:
                    out.append(v)
                if len(out) > limit:
                    return None
                v = t.first_after(v)
        return sorted(out)

    def sup(self) -> Ordinal | None:
        best = None
        for t in self.atoms:
            s = t.b if (t.b in t or _is_limit_of(t, t.b)) else _last_member(t)
            if best is None or s > best:
                best = s
        return best

    def __str__(self):
        return " u ".join(map(str, self.atoms)) or "{}"


def _last_member(t: Atom) -> Ordinal:
    v = t.first_after(None)
    while True:
        n = t.first_after(v)
        if n is None:
            return v
        v = n


def fundamental(beta: Ordinal, n: int) -> Ordinal:
    """The n-th term of the standard fundamental sequence of a limit ordinal."""
    terms = beta.terms
    e, c = terms[-1]
    e = last_exponent(beta)
    head = add(Ordinal(terms[:-1]), mul(omega_pow(e), nat(c - 1)))
    if is_successor(e):
        return add(head, mul(omega_pow(predecessor(e)), nat(n)))
    return add(head, omega_pow(fundamental(e, n)))


def _is_limit_of(t: Atom, beta: Ordinal) -> bool:
    """beta is a limit point of atom t: limit ordinal with members cofinal below it."""
    if beta == ZERO or not is_limit(beta) or beta > t.b or beta <= t.a:
        return False
    return t.xi == ZERO or last_exponent(beta) > t.xi


def is_limit_point(s: DefSet, beta: Ordinal, probes: int = 6) -> bool:
    """Probe the definition: members of s in ]g_n, beta[ along a fundamental sequence g_n -> beta."""
    if beta == ZERO or not is_limit(beta):
        return False
    for n in range(1, probes + 1):
        g = fundamental(beta, n)
        if not any((m := t.first_after(g)) is not None and m < beta for t in s.atoms):
            return False
    return True


def def_derive(s: DefSet) -> DefSet:
    """Limit points of s: beta is one iff beta is a limit ordinal and sup(s n [0, beta[) = beta."""
    out = []
    for t in s.atoms:
        if isinstance(t, Comb):
            out += t.derive()
            continue
        # members of t are the multiples of w^xi in the bounds; such multiples are cofinal
        # below beta > a exactly when w^(xi+1) divides beta
        out.append(Atom(add(t.xi, ONE), t.a, t.b, True, False))
    return DefSet.of(*out)


def def_derive_iter(s: DefSet, g: Ordinal) -> DefSet:
    if g.is_finite or any(isinstance(t, Comb) for t in s.atoms):
        if not g.is_finite:
            raise ValueError("transfinite iteration of shifted atoms is not supported")
        for _ in range(int(g)):
            s = def_derive(s)
        return s
    # the stages of one atom decrease, so a limit stage is the atom with the summed exponent
    return DefSet.of(*(Atom(add(t.xi, g), t.a, t.b, True, False) for t in s.atoms))


def oracle_rank(theta: Ordinal, beta: Ordinal, cap: int = 64) -> int:
    """Number of derivative iterations of [0, theta] that keep beta."""
    s = D(0, 0, theta)
    if beta not in s:
        raise ValueError(f"{beta} is not in [0, {theta}]")
    k = 0
    while True:
        s = def_derive(s)
        if beta not in s:
            return k
        k += 1
        if k > cap:
            raise ValueError("rank exceeds the oracle's iteration cap")


@dataclass(frozen=True)
class RectUnion:
    rects: tuple = ()     # boxes: tuples of DefSets, all of one dimension

    def __contains__(self, pt) -> bool:
        return any(all(c in a for c, a in zip(pt, box)) for box in self.rects)

    @property
    def empty(self) -> bool:
        return all(any(a.empty for a in box) for box in self.rects)

    def normalized(self) -> "RectUnion":
        return RectUnion(tuple(box for box in self.rects if not any(a.empty for a in box)))


def rect_derive(r: RectUnion) -> RectUnion:
    """(x_1, ..., x_k) survives iff it is not isolated in r.

    In a box of closed sets a point is isolated iff every coordinate is isolated
    in its factor, so the box's derivative is the union over i of the boxes with
    factor i replaced by its derivative.  Derivatives commute with finite unions.
    """
    out = []
    for box in r.rects:
        for i, a in enumerate(box):
            out.append(box[:i] + (def_derive(a),) + box[i + 1:])
    return RectUnion(tuple(out)).normalized()


def rect_derive_iter(r: RectUnion, n: int) -> RectUnion:
    for _ in range(n):
        r = rect_derive(r)
    return r


def rect_probes(r: RectUnion) -> list:
    if not r.rects:
        return []
    axes = [set() for _ in r.rects[0]]
    for box in r.rects:
        for ax, a in zip(axes, box):
            ax.update(a.probes())
    return list(_cartesian(*map(sorted, axes)))


class WitnessError(ValueError):
    pass


def lemma3_witness(A: DefSet, xi: Ordinal, gamma: Ordinal) -> bool:
    """Does gamma survive xi derivatives of the closure of U = union of [a, a + w^xi] over a in A?"""
    if isinstance(xi, int):
        xi = nat(xi)
    if A.sup() != gamma:
        raise WitnessError(f"sup A = {A.sup()} differs from gamma = {gamma}")
    width = omega_pow(xi)
    atoms = []
    for t in A.atoms:
        finite = DefSet.of(t).members(limit=256)
        if finite is not None:
            atoms += [Atom(ZERO, a, add(a, width)) for a in finite]
        elif t.xi <= xi:
            # consecutive members are at most w^xi apart, so the intervals tile one block
            first = t.first_after(None)
            top = add(t.b, width) if t.b in t else t.b
            atoms.append(Atom(ZERO, first, top, hi_open=not (t.b in t) and not _is_limit_of(t, t.b)))
        else:
            # disjoint copies of [0, w^xi], one per member
            atoms.append(Comb(t, D(ZERO, ZERO, width)))
    U = DefSet.of(*atoms)
    U = U | def_derive(U)           # closure
    return gamma in def_derive_iter(U, xi)


# ---------------------------------------------------------------- engine comparison

@dataclass(frozen=True)
class Divergence:
    stage: Ordinal
    point: tuple
    engine: bool
    oracle: bool

    def __str__(self):
        return f"stage {self.stage}, point {self.point}: engine {self.engine}, oracle {self.oracle}"


@dataclass(frozen=True)
class Comparison:
    checked: int
    divergence: Divergence | None

    @property
    def ok(self) -> bool:
        return self.divergence is None


def _as_defset(x) -> DefSet:
    return DefSet.of(Atom(ZERO, x.lo, x.hi, hi_open=not x.closed))


def _factors(x):
    """The interval factors of a right- or left-nested product, or None."""
    from .spaces import OrdInterval, Product
    if isinstance(x, OrdInterval):
        return [x]
    if isinstance(x, Product):
        a, b = _factors(x.left), _factors(x.right)
        return None if a is None or b is None else a + b
    return None


def _product_path(x, coords: tuple) -> tuple:
    from .spaces import Product
    if not isinstance(x, Product):
        return (coords[0],)
    k = len(_factors(x.left))
    return ((_product_path(x.left, coords[:k]), _product_path(x.right, coords[k:])),)


def compare_with_engine(x) -> Comparison:
    """Run the engine and the oracle side by side on an interval or on a product of intervals."""
    from . import cbengine
    from .spaces import OrdInterval, Product, ValidationError

    h = cbengine.height(x)
    stages = [nat(k) for k in range(int(h) + 1)] if h.is_finite else sorted(cbengine.breakpoints(x))
    checked = 0
    if isinstance(x, OrdInterval):
        base = _as_defset(x)
        pts = [b for b in base.probes() if b in base]
        for g in stages:
            st, od = cbengine.stage(x, g), def_derive_iter(base, g)
            for b in pts:
                checked += 1
                e, o = st.contains((b,)), b in od
                if e != o:
                    return Comparison(checked, Divergence(g, (b,), e, o))
        return Comparison(checked, None)
    factors = _factors(x)
    if isinstance(x, Product) and factors is not None:
        if not h.is_finite:
            raise ValidationError("the rectangle oracle iterates finitely many stages only")
        box = tuple(map(_as_defset, factors))
        r = RectUnion((box,))
        pts = [p for p in rect_probes(r) if p in r]
        for k, g in enumerate(stages):
            st, od = cbengine.stage(x, g), rect_derive_iter(r, k)
            for p in pts:
                checked += 1
                e, o = st.contains(_product_path(x, p)), p in od
                if e != o:
                    return Comparison(checked, Divergence(g, p, e, o))
        return Comparison(checked, None)
    raise ValidationError("the oracle covers ordinal intervals and products of intervals")
