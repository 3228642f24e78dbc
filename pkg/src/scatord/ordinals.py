"""Ordinals below epsilon_0 in Cantor normal form, with symbolic initial ordinals.

An :class:`Ordinal` is a tuple of ``(exponent, coefficient)`` terms with strictly
decreasing exponents.  An exponent is either another :class:`Ordinal` or a
:class:`Cardinal`; the term ``(k, c)`` with a cardinal exponent denotes
``o(k) * c`` (initial ordinals satisfy ``w^o(k) = o(k)``).

Text syntax: ``0``, naturals, ``w``, ``w^E``, ``*`` with a natural on the right,
``+`` between terms, and ``o(aleph_1)`` for initial ordinals, e.g.
``w^2*3+w*5+1`` or ``o(aleph_1)*w``.
"""

from __future__ import annotations

import enum
import re
from functools import total_ordering
from typing import Union

__all__ = [
    "Cmp",
    "Cardinal",
    "Ordinal",
    "OrdinalSyntaxError",
    "SymbolicAtomError",
    "UndecidableError",
    "ZERO",
    "ONE",
    "OMEGA",
    "aleph",
    "ALEPH_0",
    "CONTINUUM",
    "add",
    "mul",
    "compare",
    "omega_pow",
    "initial",
    "nat",
    "point_rank",
    "degree",
    "last_exponent",
    "leading_coefficient",
    "cardinality_of",
    "card_of_omega_pow",
    "cofinality",
    "is_limit",
    "is_successor",
    "predecessor",
    "truncate_below",
    "round_up",
    "has_atoms",
    "parse_ordinal",
    "parse_cardinal",
]


class Cmp(enum.IntEnum):
    LT = -1
    EQ = 0
    GT = 1


class OrdinalSyntaxError(ValueError):
    """Malformed ordinal or cardinal text."""

    def __init__(self, msg: str, text: str = "", pos: int = 0):
        super().__init__(f"{msg} at position {pos} in {text!r}" if text else msg)
        self.pos = pos


class SymbolicAtomError(ValueError):
    """Raised for products or powers of two symbolic atoms."""


class UndecidableError(ValueError):
    """Raised when a comparison involves the continuum beyond c > aleph_0."""


class Cardinal:
    """Symbolic infinite cardinal aleph_index, or the opaque continuum ``c``."""

    __slots__ = ("index", "regular", "_hash")

    def __init__(self, index: "Ordinal | None", regular: bool | None = None):
        if index is not None:
            if not isinstance(index, Ordinal):
                index = nat(index)
            if has_atoms(index):
                raise SymbolicAtomError("aleph index must be a plain ordinal")
        if regular is None:
            regular = True if index is None else (index == ZERO or is_successor(index))
        self.index = index
        self.regular = regular
        self._hash = hash(("card", index, regular))

    @property
    def is_continuum(self) -> bool:
        return self.index is None

    def successor(self) -> "Cardinal":
        if self.index is None:
            raise UndecidableError("the successor of c is not used")
        return Cardinal(add(self.index, ONE))

    def __eq__(self, other):
        if not isinstance(other, Cardinal):
            return NotImplemented
        return self.index == other.index and self.regular == other.regular

    def __hash__(self):
        return self._hash

    def cmp(self, other: "Cardinal") -> Cmp:
        if self.index is None or other.index is None:
            if self.index is None and other.index is None:
                return Cmp.EQ
            plain = other if self.index is None else self
            if plain.index == ZERO:
                return Cmp.GT if self.index is None else Cmp.LT
            raise UndecidableError("c is only known to exceed aleph_0")
        return compare(self.index, other.index)

    def __lt__(self, other):
        return self.cmp(other) < 0

    def __le__(self, other):
        return self.cmp(other) <= 0

    def __gt__(self, other):
        return self.cmp(other) > 0

    def __ge__(self, other):
        return self.cmp(other) >= 0

    def __str__(self):
        if self.index is None:
            return "c"
        s = str(self.index)
        return "aleph_" + (s if _simple(s) else f"({s})")

    def __repr__(self):
        return f"Cardinal({self})"


def _simple(s: str) -> bool:
    return s.isdigit() or s == "w" or (s.startswith("o(") and s.endswith(")") and s.count("(") == 1)


Exponent = Union["Ordinal", Cardinal]


@total_ordering
class Ordinal:
    """Immutable ordinal in Cantor normal form."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=()):
        out = []
        for e, c in terms:
            if not isinstance(c, int) or c < 1:
                raise ValueError(f"coefficient must be a positive integer, got {c!r}")
            if isinstance(e, int):
                e = nat(e)
            if isinstance(e, Ordinal) and len(e.terms) == 1 and isinstance(e.terms[0][0], Cardinal) \
                    and e.terms[0][1] == 1:
                # w^o(k) = o(k)
                e = e.terms[0][0]
            if isinstance(e, Ordinal):
                _check_exponent(e)
            if out and _cmp_exp(out[-1][0], e) <= 0:
                raise ValueError("exponents must be strictly decreasing")
            out.append((e, c))
        self.terms = tuple(out)
        self._hash = hash(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = nat(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        if isinstance(other, int):
            other = nat(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return _cmp(self, other) < 0

    def __add__(self, other):
        return add(self, other if isinstance(other, Ordinal) else nat(other))

    def __radd__(self, other):
        return add(nat(other), self)

    def __mul__(self, other):
        return mul(self, other if isinstance(other, Ordinal) else nat(other))

    def __rmul__(self, other):
        return mul(nat(other), self)

    def __bool__(self):
        return bool(self.terms)

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == ZERO)

    def __int__(self):
        if not self.is_finite:
            raise ValueError(f"{self} is not finite")
        return self.terms[0][1] if self.terms else 0

    def __str__(self):
        if not self.terms:
            return "0"
        return "+".join(_term_str(e, c) for e, c in self.terms)

    def __repr__(self):
        return f"Ordinal({self})"


def _check_exponent(e: Ordinal) -> None:
    # an exponent may carry an atom only as o(k) + plain tail
    for i, (ee, cc) in enumerate(e.terms):
        if isinstance(ee, Cardinal):
            if i != 0 or cc != 1:
                raise SymbolicAtomError("products of symbolic atoms are not supported")
        elif has_atoms(ee):
            raise SymbolicAtomError("products of symbolic atoms are not supported")


def _term_str(e, c) -> str:
    if isinstance(e, Cardinal):
        base = f"o({e})"
    elif e == ZERO:
        return str(c)
    elif e == ONE:
        base = "w"
    else:
        s = str(e)
        base = "w^" + (s if _simple(s) else f"({s})")
    return base if c == 1 else f"{base}*{c}"


def has_atoms(a: Ordinal) -> bool:
    return any(isinstance(e, Cardinal) or has_atoms(e) for e, _ in a.terms)


def _as_ord(e: Exponent) -> "Ordinal":
    return Ordinal(((e, 1),)) if isinstance(e, Cardinal) else e


def _cmp_exp(x: Exponent, y: Exponent) -> int:
    if isinstance(x, Cardinal) and isinstance(y, Cardinal):
        return int(x.cmp(y))
    if isinstance(x, Cardinal):
        return _cmp(Ordinal(((x, 1),)), y)
    if isinstance(y, Cardinal):
        return _cmp(x, Ordinal(((y, 1),)))
    return _cmp(x, y)


def _cmp(a: Ordinal, b: Ordinal) -> int:
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        k = _cmp_exp(ea, eb)
        if k:
            return k
        if ca != cb:
            return -1 if ca < cb else 1
    la, lb = len(a.terms), len(b.terms)
    return (la > lb) - (la < lb)


ZERO = Ordinal()
_NAT_CACHE: dict[int, Ordinal] = {0: ZERO}


def nat(n: int) -> Ordinal:
    if n < 0:
        raise ValueError("ordinals are nonnegative")
    o = _NAT_CACHE.get(n)
    if o is None:
        o = _NAT_CACHE[n] = Ordinal(((ZERO, n),))
    return o


ONE = nat(1)
OMEGA = Ordinal(((ONE, 1),))
ALEPH_0 = Cardinal(ZERO)
CONTINUUM = Cardinal(None)


def aleph(index, regular: bool | None = None) -> Cardinal:
    return Cardinal(index if isinstance(index, Ordinal) else nat(index), regular)


def initial(k: Cardinal) -> Ordinal:
    """o(k): the least ordinal of cardinality k."""
    if k == ALEPH_0 or (k.index is not None and k.index == ZERO):
        return OMEGA
    return Ordinal(((k, 1),))


def compare(a: Ordinal, b: Ordinal) -> Cmp:
    return Cmp(_cmp(a, b))


def add(a: Ordinal, b: Ordinal) -> Ordinal:
    if not b.terms:
        return a
    if not a.terms:
        return b
    lead, lc = b.terms[0]
    kept = []
    for e, c in a.terms:
        k = _cmp_exp(e, lead)
        if k > 0:
            kept.append((e, c))
        elif k == 0:
            kept.append((e, c + lc))
            return Ordinal(kept + list(b.terms[1:]))
        else:
            break
    return Ordinal(kept + list(b.terms))


def _exp_add(x: Exponent, y: Exponent) -> Ordinal:
    return add(_as_ord(x), _as_ord(y))


def mul(a: Ordinal, b: Ordinal) -> Ordinal:
    if not a.terms or not b.terms:
        return ZERO
    da, ca = a.terms[0]
    out = []
    tail = 0
    for e, c in b.terms:
        if isinstance(e, Ordinal) and e == ZERO:
            tail = c
        else:
            out.append((_exp_add(da, e), c))
    if tail:
        out.append((da, ca * tail))
        out.extend(a.terms[1:])
    return Ordinal(out)


def omega_pow(e: Ordinal) -> Ordinal:
    return Ordinal(((e, 1),))


def degree(a: Ordinal) -> Ordinal:
    return _as_ord(a.terms[0][0]) if a.terms else ZERO


def last_exponent(a: Ordinal) -> Ordinal:
    return _as_ord(a.terms[-1][0]) if a.terms else ZERO


def leading_coefficient(a: Ordinal) -> int:
    return a.terms[0][1] if a.terms else 0


def point_rank(b: Ordinal) -> Ordinal:
    """Cantor-Bendixson rank of b in any interval [0, t] with t >= b."""
    return last_exponent(b)


def is_successor(a: Ordinal) -> bool:
    return bool(a.terms) and _cmp_exp(a.terms[-1][0], ZERO) == 0


def is_limit(a: Ordinal) -> bool:
    return bool(a.terms) and not is_successor(a)


def predecessor(a: Ordinal) -> Ordinal:
    if not is_successor(a):
        raise ValueError(f"{a} has no predecessor")
    *head, (e, c) = a.terms
    return Ordinal(head + ([(e, c - 1)] if c > 1 else []))


def truncate_below(a: Ordinal, e: Ordinal) -> Ordinal:
    """Drop the terms of a whose exponent is below e (the largest multiple of w^e <= a)."""
    return Ordinal([(x, c) for x, c in a.terms if _cmp_exp(x, e) >= 0])


def round_up(a: Ordinal, e: Ordinal) -> Ordinal:
    """Least multiple of w^e strictly greater than a."""
    return add(truncate_below(a, e), omega_pow(e))


def cardinality_of(a: Ordinal) -> Union[int, Cardinal]:
    """|a| = |[0, a[|: an int for finite a, otherwise a Cardinal."""
    if a.is_finite:
        return int(a)
    best = ALEPH_0
    for k in _atoms(a):
        if k > best:
            best = k
    return best


def _atoms(a: Ordinal):
    for e, _ in a.terms:
        if isinstance(e, Cardinal):
            yield e
        else:
            yield from _atoms(e)


def card_of_omega_pow(e: Ordinal) -> Union[int, Cardinal]:
    """|w^e|."""
    if e == ZERO:
        return 1
    if e.is_finite:
        return ALEPH_0
    return cardinality_of(e)


def _cf_card(k: Cardinal) -> Cardinal:
    if k.is_continuum:
        raise UndecidableError("the cofinality of c is not decided")
    if k.regular:
        return k
    cf = cofinality(k.index)
    return cf if isinstance(cf, Cardinal) else ALEPH_0


def cofinality(a: Ordinal) -> Union[int, Cardinal]:
    """cf(a): 0 for zero, 1 for successors, otherwise a regular Cardinal."""
    if not a.terms:
        return 0
    e = a.terms[-1][0]
    if isinstance(e, Cardinal):
        return _cf_card(e)
    if e == ZERO:
        return 1
    if is_successor(e):
        return ALEPH_0
    return cofinality(e)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|(aleph_)|(w)|(o)\s*(?=\()|(c)\b|([()^*+]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise OrdinalSyntaxError("unexpected character", text, pos)
        kind = m.lastindex
        out.append((("num", "aleph", "w", "o", "c", "op")[kind - 1], m.group(kind), m.start(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            want = repr(value) if value else "a token"
            raise OrdinalSyntaxError(f"expected {want}", self.text, tok[2])
        self.i += 1
        return tok

    def sum(self) -> Ordinal:
        acc = self.prod()
        while self.peek()[1] == "+":
            self.take()
            acc = add(acc, self.prod())
        return acc

    def prod(self) -> Ordinal:
        acc = self.power()
        while self.peek()[1] == "*":
            self.take()
            acc = mul(acc, self.power())
        return acc

    def power(self) -> Ordinal:
        start = self.peek()[2]
        base = self.primary()
        if self.peek()[1] == "^":
            self.take()
            if base != OMEGA:
                raise OrdinalSyntaxError("only w may be raised to a power", self.text, start)
            return omega_pow(self.power())
        return base

    def primary(self) -> Ordinal:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return nat(int(val))
        if kind == "w":
            self.take()
            return OMEGA
        if kind == "o":
            self.take()
            self.take("(")
            k = self.cardinal()
            self.take(")")
            return initial(k)
        if val == "(":
            self.take()
            v = self.sum()
            self.take(")")
            return v
        raise OrdinalSyntaxError("expected an ordinal", self.text, pos)

    def cardinal(self) -> Cardinal:
        kind, val, pos = self.peek()
        if kind == "c":
            self.take()
            return CONTINUUM
        if kind != "aleph":
            raise OrdinalSyntaxError("expected a cardinal", self.text, pos)
        self.take()
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return aleph(int(val))
        if kind == "w":
            self.take()
            return aleph(OMEGA)
        if val == "(":
            self.take()
            idx = self.sum()
            self.take(")")
            return aleph(idx)
        raise OrdinalSyntaxError("expected an aleph index", self.text, pos)

    def done(self):
        tok = self.peek()
        if tok[0] is not None:
            raise OrdinalSyntaxError("trailing input", self.text, tok[2])


def parse_ordinal(text: str) -> Ordinal:
    p = _Parser(text)
    v = p.sum()
    p.done()
    return v


def parse_cardinal(text: str) -> Cardinal:
    p = _Parser(text)
    v = p.cardinal()
    p.done()
    return v
