"""Generators for the named families of spaces, with their designated points."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .ordinals import (
    ALEPH_0,
    OMEGA,
    ONE,
    Cardinal,
    Ordinal,
    add,
    cardinality_of,
    has_atoms,
    initial,
    is_limit,
    is_successor,
    nat,
    omega_pow,
    predecessor,
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
    Z_BASE,
    designated_point,
    z_atom,
)


class ParameterError(ValidationError):
    pass


VARIANTS = ("prop2", "prop2_closure", "prop2_order", "prop3", "prop4", "thm1", "thm2_regular", "thm2_singular")


def _naturals(S: Iterable[int]) -> list[int]:
    S = sorted(set(S))
    if not S:
        raise ParameterError("the index set must be nonempty")
    for n in S:
        if not isinstance(n, int) or n < 2:
            raise ParameterError(f"{n} is not a natural number >= 2")
    return S


def k_block(n: int) -> OrdInterval:
    """K_n, order type w^n + 1."""
    return OrdInterval(omega_pow(nat(n)))


def prop2_space(S: Iterable[int]) -> MetricSum:
    """Metric sum over n in S of K_n followed by its punctured ladder; Gamma = {max K_n}."""
    return MetricSum(tuple(Concat((k_block(n), PuncturedLadder(n))) for n in _naturals(S)))


def prop2_closure(S: Iterable[int]) -> MetricSum:
    return MetricSum(tuple(Concat((k_block(n), PuncturedLadder(n, closed=True))) for n in _naturals(S)))


def prop2_order_variant(S: Iterable[int]) -> Concat:
    parts = []
    for n in _naturals(S):
        parts += [k_block(n), PuncturedLadder(n, closed=True)]
    return Concat(tuple(parts))


def _uncountable(kappa: Cardinal) -> Cardinal:
    if not isinstance(kappa, Cardinal) or kappa.is_continuum or kappa.index == Ordinal():
        raise ParameterError(f"{kappa} must be an uncountable aleph")
    return kappa


def prop3_Y(kappa: Cardinal) -> Hedgehog:
    """kappa copies of z glued at their limit points; the body is the only condensation point."""
    return Hedgehog((Spine(z_atom(), Z_BASE, _uncountable(kappa)),))


@lru_cache(maxsize=None)
def prop4_Z(alpha: Ordinal) -> SpaceExpr:
    """Z_1 = z, Z_(a+1) = z x Z_a, Z_lam = hedgehog of the Z_b (b < lam); rank of z_alpha is alpha."""
    if isinstance(alpha, int):
        alpha = nat(alpha)
    if alpha < ONE or has_atoms(alpha):
        raise ParameterError(f"prop4 needs a plain ordinal >= 1, got {alpha}")
    if alpha == ONE:
        return z_atom()
    if is_successor(alpha):
        return Product(z_atom(), prop4_Z(predecessor(alpha)))
    return Hedgehog((TowerSpines(alpha),))


def thm1_hedgehog(alpha: Ordinal, kappa: Cardinal) -> Hedgehog:
    z = prop4_Z(alpha)
    return Hedgehog((Spine(prop3_Y(kappa), ("o",)), Spine(z, designated_point(z))))


def thm1_space(L: Iterable[Ordinal], kappa: Cardinal) -> MetricSum:
    _uncountable(kappa)
    L = sorted(set(L))
    if not L:
        raise ParameterError("L must be nonempty")
    for a in L:
        if has_atoms(a) or a < OMEGA:
            raise ParameterError(f"{a} is not a plain ordinal in [w, o({kappa})[")
    return MetricSum(tuple(thm1_hedgehog(a, kappa) for a in L))


def _check_xi(xi, kappa: Cardinal) -> None:
    from .cbengine import ProgressionValue
    if isinstance(xi, ProgressionValue):
        if xi.offset != ONE or not (is_limit(xi.base) and is_limit(xi.step)):
            raise ParameterError(f"{xi} is not a run of successors of limit ordinals")
        if xi.base < OMEGA:
            raise ParameterError(f"{xi} starts below w")
        return
    if not is_successor(xi):
        raise ParameterError(f"{xi} is not a successor ordinal")
    a = predecessor(xi)
    if not is_limit(a) or a < OMEGA:
        raise ParameterError(f"{xi} is not the successor of a limit ordinal >= w")
    if not xi < initial(kappa):
        raise ParameterError(f"{xi} is not below o({kappa})")


def _thm2(S, kappa: Cardinal, tail_for) -> LexSum:
    from .cbengine import ProgressionValue
    S = list(S)
    if not S:
        raise ParameterError("S must be nonempty")
    for xi in S:
        _check_xi(xi, kappa)
    plain = sorted(x for x in S if not isinstance(x, ProgressionValue))
    runs = [x for x in S if isinstance(x, ProgressionValue)]
    blocks = []
    for xi in plain:
        blocks.append((xi, OrdInterval(omega_pow(xi))))
        blocks.append((add(xi, ONE), tail_for(xi)))
    return LexSum(OMEGA, initial(kappa), tuple(blocks),
                  tuple(Run(r.base, r.step, tail_for(r.at(0))) for r in runs))


def thm2_H(S, kappa: Cardinal) -> LexSum:
    """Index [w, o(kappa)]; xi in S becomes [0, w^xi] and xi+1 becomes ]o(kappa), 0] reversed."""
    _uncountable(kappa)
    if not kappa.regular:
        raise ParameterError(f"{kappa} is singular; use thm2_G")
    tail = Reverse(OrdInterval(initial(kappa), closed=False))
    return _thm2(S, kappa, lambda xi: tail)


def thm2_G(S, kappa: Cardinal) -> LexSum:
    _uncountable(kappa)
    if kappa.regular:
        raise ParameterError(f"{kappa} is regular; use thm2_H")

    def tail(xi):
        c = cardinality_of(xi)
        lam = (ALEPH_0 if not isinstance(c, Cardinal) else c).successor()
        if not lam < kappa:
            raise ParameterError(f"|{xi}|^+ is not below {kappa}")
        return Reverse(OrdInterval(initial(lam), closed=False))

    return _thm2(S, kappa, tail)


@dataclass(frozen=True)
class FamilyParams:
    variant: str
    params: tuple = ()
    kappa: Cardinal | None = None
    alpha: Ordinal | None = None


def build(p: FamilyParams) -> SpaceExpr:
    v = p.variant
    if v == "prop2":
        return prop2_space(p.params)
    if v == "prop2_closure":
        return prop2_closure(p.params)
    if v == "prop2_order":
        return prop2_order_variant(p.params)
    if v == "prop3":
        return prop3_Y(p.kappa)
    if v == "prop4":
        return prop4_Z(p.alpha)
    if v == "thm1":
        return thm1_space(p.params, p.kappa)
    if v == "thm2_regular":
        return thm2_H(p.params, p.kappa)
    if v == "thm2_singular":
        return thm2_G(p.params, p.kappa)
    raise ParameterError(f"unknown family {v!r}; choose from {', '.join(VARIANTS)}")
