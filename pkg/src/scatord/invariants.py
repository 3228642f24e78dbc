"""Homeomorphism invariants: Gamma, Sigma, condensation points, Omega sups, Sigma[kappa] and Psi."""

from __future__ import annotations

from dataclasses import dataclass, field

from .cbengine import (
    INF,
    PointInfo,
    ProgressionValue,
    all_classes,
    point_info,
)
from .ordinals import (
    ALEPH_0,
    ONE,
    ZERO,
    Cardinal,
    Ordinal,
    UndecidableError,
    add,
    is_limit,
    nat,
    _atoms,
)
from .spaces import SpaceExpr, point_text, to_text


class InvariantError(ValueError):
    pass


class Undecidable(InvariantError):
    """A cardinality question that ZFC alone does not settle for the symbols involved."""


class NotCondensation(InvariantError):
    pass


def _guard(fn):
    def wrapped(*a, **k):
        try:
            return fn(*a, **k)
        except UndecidableError as e:
            raise Undecidable(f"undecidable under ZFC-neutral assumptions: {e}") from None
    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


@dataclass(frozen=True)
class OrdRange:
    """Ranks lo..hi (hi included when ``closed``) carried by one class of points."""

    lo: Ordinal
    hi: Ordinal
    closed: bool

    def __str__(self):
        return f"[{self.lo}, {self.hi}{']' if self.closed else '['}"


def _finite_gap(a: Ordinal, b: Ordinal):
    """n with b = a + n, or None."""
    if b < a:
        return None
    ia = Ordinal(tuple(t for t in a.terms if t[0] != ZERO))
    ib = Ordinal(tuple(t for t in b.terms if t[0] != ZERO))
    if ia != ib:
        return None
    fa = a.terms[-1][1] if a.terms and a.terms[-1][0] == ZERO else 0
    fb = b.terms[-1][1] if b.terms and b.terms[-1][0] == ZERO else 0
    return fb - fa


def _ranks(c: PointInfo) -> set:
    if c.span is None:
        return {c.rank}
    lo, hi, closed = c.span
    n = _finite_gap(lo, hi)
    if n is None:
        return {OrdRange(lo, hi, closed)}
    top = n + (1 if closed else 0)
    return {add(lo, nat(k)) for k in range(top)} | {c.rank}


@_guard
def gamma_classes(x: SpaceExpr) -> list[PointInfo]:
    return [c for c in all_classes(x) if c.gamma]


def gamma(x: SpaceExpr) -> frozenset:
    """Points (representatives for classes) without a compact neighbourhood."""
    return frozenset(c.path for c in gamma_classes(x))


def sigma(x: SpaceExpr) -> frozenset:
    """Finite positive ranks met by Gamma."""
    out = set()
    for c in gamma_classes(x):
        for r in _ranks(c):
            if isinstance(r, Ordinal) and r.is_finite and r >= ONE:
                out.add(int(r))
    return frozenset(out)


def _check_kappa(kappa: Cardinal) -> Cardinal:
    if not isinstance(kappa, Cardinal) or (not kappa.is_continuum and kappa.index == ZERO):
        raise InvariantError(f"{kappa} must be an uncountable cardinal")
    return kappa


def _same_card(card, kappa: Cardinal) -> bool:
    if not isinstance(card, Cardinal) or card == ALEPH_0:
        return False
    if card.is_continuum != kappa.is_continuum:
        # c = aleph_n is independent of ZFC for every uncountable aleph
        raise Undecidable(f"whether {card} = {kappa} is not settled without extra axioms")
    return card == kappa


@_guard
def condensation_classes(x: SpaceExpr, kappa: Cardinal) -> list[PointInfo]:
    _check_kappa(kappa)
    return [c for c in all_classes(x, kappa) if _same_card(c.card, kappa)]


def condensation_points(x: SpaceExpr, kappa: Cardinal) -> frozenset:
    return frozenset(c.path for c in condensation_classes(x, kappa))


@_guard
def omega_kappa_sup(x: SpaceExpr, p: tuple, kappa: Cardinal):
    _check_kappa(kappa)
    if not kappa.regular:
        raise InvariantError(f"{kappa} is singular; Omega sups are only defined for regular cardinals")
    for c in condensation_classes(x, kappa):
        if c.path == tuple(p):
            return c.small(kappa)
    info = point_info(x, tuple(p))
    if not _same_card(info.card, kappa):
        raise NotCondensation(f"{point_text(tuple(p))} is not a {kappa}-condensation point of {to_text(x)}")
    return info.small(kappa)


@_guard
def psi(x: SpaceExpr, kappa: Cardinal) -> frozenset:
    _check_kappa(kappa)
    if not kappa.regular:
        raise InvariantError(f"{kappa} is singular; Psi is only defined for regular cardinals")
    return frozenset(c.small(kappa) for c in condensation_classes(x, kappa))


@_guard
def sigma_kappa(x: SpaceExpr, kappa: Cardinal) -> frozenset:
    out = set()
    for c in condensation_classes(x, kappa):
        out |= {r for r in _ranks(c) if not (isinstance(r, Ordinal) and r == ZERO)}
    return frozenset(out)


def regular_below(kappa: Cardinal, x: SpaceExpr | None = None, extra: int = 2) -> list[Cardinal]:
    """Uncountable successor alephs below a singular kappa, truncated past the largest aleph in x.

    Cardinalities of neighbourhoods in x are bounded by the alephs it mentions, so
    larger regular cardinals carry no condensation points.
    """
    if kappa.is_continuum:
        raise Undecidable("the regular cardinals below c are not determined")
    top = 1
    if x is not None:
        for k in _expr_atoms(x):
            if k.is_continuum:
                raise Undecidable("expression mentions c")
            if not k.index.is_finite:
                if k < kappa:
                    raise InvariantError(f"{k} lies below {kappa} with an infinite index; enumeration unsupported")
                continue
            top = max(top, int(k.index))
    out = []
    i = 1
    while len(out) < top + extra:
        c = Cardinal(nat(i))
        if not c < kappa:
            break
        out.append(c)
        i += 1
    return out


def _expr_atoms(x: SpaceExpr):
    from .spaces import Hedgehog, LexSum, OrdInterval, Product, Reverse, Spine
    if isinstance(x, OrdInterval):
        yield from _atoms(x.hi)
        yield from _atoms(x.lo)
    elif isinstance(x, Reverse):
        yield from _expr_atoms(x.inner)
    elif isinstance(x, Product):
        yield from _expr_atoms(x.left)
        yield from _expr_atoms(x.right)
    elif isinstance(x, Hedgehog):
        for s in x.spines:
            if isinstance(s, Spine):
                yield from _expr_atoms(s.expr)
                if isinstance(s.mult, Cardinal):
                    yield s.mult
    elif isinstance(x, LexSum):
        yield from _atoms(x.hi)
        for i, b in x.blocks:
            yield from _atoms(i)
            yield from _expr_atoms(b)
        for r in x.runs:
            yield from _expr_atoms(r.tail)
    elif hasattr(x, "parts"):
        for p in x.parts:
            yield from _expr_atoms(p)


def is_limit_value(v) -> bool:
    if isinstance(v, ProgressionValue):
        return v.offset == ZERO
    return v == ZERO or is_limit(v)


def singular_recovery(x: SpaceExpr, kappa: Cardinal) -> frozenset:
    """Union of Psi over the regular cardinals below kappa, minus limit ordinals (and 0)."""
    vals = set()
    for lam in regular_below(kappa, x):
        vals |= psi(x, lam)
    return frozenset(v for v in vals if not is_limit_value(v))


@dataclass
class SignatureReport:
    space: SpaceExpr
    sigma: frozenset
    sigma_kappa: dict = field(default_factory=dict)
    psi: dict = field(default_factory=dict)
    gamma_points: frozenset = frozenset()
    condensation_points: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "space": to_text(self.space),
            "sigma": sorted(self.sigma),
            "sigma_kappa": {str(k): sorted(map(str, v)) for k, v in self.sigma_kappa.items()},
            "psi": {str(k): sorted(map(str, v)) for k, v in self.psi.items()},
            "gamma_points": sorted(point_text(p) for p in self.gamma_points),
            "condensation_points": {str(k): sorted(point_text(p) for p in v)
                                    for k, v in self.condensation_points.items()},
        }


def signature(x: SpaceExpr, kappas=()) -> SignatureReport:
    rep = SignatureReport(x, sigma(x), gamma_points=gamma(x))
    for k in kappas:
        rep.sigma_kappa[k] = sigma_kappa(x, k)
        rep.condensation_points[k] = condensation_points(x, k)
        if k.regular:
            rep.psi[k] = psi(x, k)
    return rep
