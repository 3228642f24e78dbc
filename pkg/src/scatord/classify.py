"""Classification of countable compact scattered spaces and homeomorphism certificates.

A countable compact scattered space is determined up to homeomorphism by the
pair (alpha, n) with X^(alpha) of size n and X^(alpha+1) empty: it is then
homeomorphic to the ordinal space w^alpha * n + 1.  Outside that fragment only
refutations are issued, by comparing invariants cheapest first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .cbengine import INF, count_stage, height, is_compact, size
from .invariants import InvariantError, psi, sigma, sigma_kappa
from .ordinals import (
    ALEPH_0, ZERO, Cardinal, Ordinal, aleph, is_successor, mul, nat, omega_pow, parse_cardinal, predecessor,
)
from .spaces import Concat, Hedgehog, LexSum, MetricSum, Product, Reverse, SpaceExpr, Spine, to_text


class ClassifyError(ValueError):
    pass


class NotCompact(ClassifyError):
    pass


class NotCountable(ClassifyError):
    pass


class Inconclusive(ClassifyError):
    """Every computed invariant agrees but no classification theorem applies."""

    def __init__(self, msg: str, compared: list[str]):
        super().__init__(msg)
        self.compared = compared


CONCAT_NOTE = ("Concat glues consecutive parts as an ordered sum; an end point missing in one part "
               "is supplied as a limit by its neighbour, never duplicated")

DEFAULT_KAPPAS = (aleph(1), aleph(2))


@dataclass(frozen=True)
class MSCharacteristic:
    alpha: Ordinal
    n: int

    def model(self) -> Ordinal:
        """theta with the space homeomorphic to [0, theta]."""
        if self.alpha == ZERO:
            return nat(self.n - 1)
        return mul(omega_pow(self.alpha), nat(self.n))

    def to_json(self) -> dict:
        return {"alpha": str(self.alpha), "n": self.n, "model": f"ord[{self.model()}]"}

    def __iter__(self):
        return iter((self.alpha, self.n))


def _countable(x: SpaceExpr) -> bool:
    s = size(x)
    return isinstance(s, int) or s == ALEPH_0


def ms_characteristic(x: SpaceExpr) -> MSCharacteristic:
    if not _countable(x):
        raise NotCountable(f"{to_text(x)} has cardinality {size(x)}")
    if not is_compact(x):
        raise NotCompact(f"{to_text(x)} is not compact")
    h = height(x)
    if not is_successor(h):
        raise NotCompact(f"{to_text(x)} has limit height {h}")
    alpha = predecessor(h)
    n = count_stage(x, alpha)
    if n == INF or n == 0:
        raise NotCompact(f"stage {alpha} of {to_text(x)} has {n} points")
    return MSCharacteristic(alpha, int(n))


def _mentions_concat(x: SpaceExpr) -> bool:
    if isinstance(x, Concat):
        return True
    if isinstance(x, Reverse):
        return _mentions_concat(x.inner)
    if isinstance(x, MetricSum):
        return any(_mentions_concat(p) for p in x.parts)
    if isinstance(x, Product):
        return _mentions_concat(x.left) or _mentions_concat(x.right)
    if isinstance(x, LexSum):
        return True
    if isinstance(x, Hedgehog):
        return any(isinstance(s, Spine) and _mentions_concat(s.expr) for s in x.spines)
    return False


def _render(v) -> list | str:
    if isinstance(v, MSCharacteristic):
        return v.to_json()
    if isinstance(v, (frozenset, set)):
        return sorted(map(str, v))
    return str(v)


@dataclass
class Certificate:
    verdict: str                        # "homeomorphic" | "distinct"
    invariant: str                      # "characteristic", "sigma", "sigma_kappa[k]", "psi[k]", "height", "compactness"
    left: object
    right: object
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"schema": 1, "verdict": self.verdict, "invariant": self.invariant,
                "left": _render(self.left), "right": _render(self.right), "notes": list(self.notes),
                "recheck": f"evaluate {self.invariant} on both spaces and compare"}

    def recheck(self, a: SpaceExpr, b: SpaceExpr) -> bool:
        """Recompute the named invariant; true when the recorded values come back."""
        fn = _invariant_by_name(self.invariant)
        va, vb = fn(a), fn(b)
        if (va, vb) != (self.left, self.right):
            return False
        return (va == vb) == (self.verdict == "homeomorphic")


def _invariant_by_name(name: str) -> Callable:
    if name == "characteristic":
        return ms_characteristic
    if name == "sigma":
        return sigma
    if name == "height":
        return height
    if name == "compactness":
        return is_compact
    head, _, arg = name.partition("[")
    k = parse_cardinal(arg.rstrip("]"))
    if head == "sigma_kappa":
        return lambda x: sigma_kappa(x, k)
    if head == "psi":
        return lambda x: psi(x, k)
    raise KeyError(name)


def _refuters(kappas) -> list[tuple[str, Callable]]:
    out = [("sigma", sigma)]
    for k in kappas:
        out.append((f"sigma_kappa[{k}]", lambda x, k=k: sigma_kappa(x, k)))
    for k in kappas:
        if k.regular:
            out.append((f"psi[{k}]", lambda x, k=k: psi(x, k)))
    out += [("height", height), ("compactness", is_compact)]
    return out


def _kappa_ok(k: Cardinal) -> bool:
    return isinstance(k, Cardinal) and not k.is_continuum and k.index.is_finite and k.index > Ordinal()


def homeomorphic(a: SpaceExpr, b: SpaceExpr, kappas: Sequence[Cardinal] = DEFAULT_KAPPAS,
                 only: Sequence[str] | None = None) -> Certificate:
    """Decide homeomorphism on the countable compact fragment; elsewhere refute or raise Inconclusive.

    ``only`` restricts the refutation to invariants whose names start with one of the prefixes.
    """
    notes = [CONCAT_NOTE] if _mentions_concat(a) or _mentions_concat(b) else []
    for k in kappas:
        if not _kappa_ok(k):
            raise ClassifyError(f"{k} is not a usable aleph with a finite index")
    if only is None or any(o.startswith("char") for o in only):
        try:
            ca, cb_ = ms_characteristic(a), ms_characteristic(b)
        except ClassifyError:
            pass
        else:
            verdict = "homeomorphic" if ca == cb_ else "distinct"
            return Certificate(verdict, "characteristic", ca, cb_, notes)
    compared = []
    for name, fn in _refuters(kappas):
        if only is not None and not any(name.startswith(o) for o in only):
            continue
        try:
            va, vb = fn(a), fn(b)
        except (InvariantError, ValueError) as e:
            notes.append(f"{name} skipped: {e}")
            continue
        compared.append(name)
        if va != vb:
            return Certificate("distinct", name, va, vb, notes)
    raise Inconclusive(f"{to_text(a)} and {to_text(b)} agree on {', '.join(compared) or 'nothing computable'}",
                       compared)


@dataclass
class DistinctnessMatrix:
    size: int
    entries: dict                       # (i, j) with i < j -> Certificate | Inconclusive

    @property
    def all_distinct(self) -> bool:
        return all(isinstance(c, Certificate) and c.verdict == "distinct" for c in self.entries.values())

    def to_json(self) -> dict:
        rows = []
        for (i, j), c in sorted(self.entries.items()):
            body = c.to_json() if isinstance(c, Certificate) else {"inconclusive": str(c)}
            rows.append({"i": i, "j": j, **body})
        return {"schema": 1, "size": self.size, "all_distinct": self.all_distinct, "pairs": rows}


def pairwise_distinct(family: Sequence[SpaceExpr], invariant: Sequence[str] | None = None,
                      kappas: Sequence[Cardinal] = DEFAULT_KAPPAS) -> DistinctnessMatrix:
    family = list(family)
    if len(family) < 2:
        raise ClassifyError("pairwise comparison needs at least two spaces")
    out = {}
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            try:
                out[(i, j)] = homeomorphic(family[i], family[j], kappas, invariant)
            except Inconclusive as e:
                out[(i, j)] = e
    return DistinctnessMatrix(len(family), out)
