"""Finite ultrametric spaces, their ball partitions, and a linear order realizing the topology.

Distances are exact ``Fraction`` values.  For the partition machinery the
distinct positive distances are quantized by rank: the k-th largest becomes
``2^-k``.  Balls only depend on the order of distances, so this keeps every
partition intact, while the original values stay available for isometry checks.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels


class UltraError(ValueError):
    pass


class TriangleViolation(UltraError):
    def __init__(self, triples: list[tuple[str, str, str]]):
        self.triples = triples
        shown = ", ".join("(" + ", ".join(t) + ")" for t in triples[:10])
        more = f" and {len(triples) - 10} more" if len(triples) > 10 else ""
        super().__init__(f"strong triangle inequality fails for {len(triples)} triples: {shown}{more}")


class ZeroOffDiagonal(UltraError):
    pass


@dataclass(frozen=True)
class FiniteUltra:
    points: tuple
    dist: tuple                        # square tuple of tuples of Fraction

    @property
    def n(self) -> int:
        return len(self.points)

    def d(self, x, y) -> Fraction:
        i, j = self.index(x), self.index(y)
        return self.dist[i][j]

    def index(self, label) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise UltraError(f"no point {label!r}") from None

    def ranks(self) -> tuple[np.ndarray, list[Fraction]]:
        """Rank matrix (1 = largest distance, diagonal = levels + 1) and the distinct values, largest first."""
        vals = sorted({v for row in self.dist for v in row if v > 0}, reverse=True)
        rank = {v: i + 1 for i, v in enumerate(vals)}
        top = max(len(vals), 1) + 1
        R = np.array([[rank.get(v, top) for v in row] for row in self.dist], dtype=np.int64).reshape(self.n, self.n)
        return R, vals


def make_ultra(points: Sequence, dist) -> FiniteUltra:
    return FiniteUltra(tuple(points), tuple(tuple(Fraction(v) for v in row) for row in dist))


def validate_ultra(m: FiniteUltra, use_numba: bool | None = None) -> FiniteUltra:
    n = m.n
    if n == 0:
        raise UltraError("the point set is empty")
    if len(set(m.points)) != n:
        raise UltraError("point labels must be distinct")
    if len(m.dist) != n or any(len(r) != n for r in m.dist):
        raise UltraError(f"distance matrix must be {n}x{n}")
    for i in range(n):
        if m.dist[i][i] != 0:
            raise UltraError(f"d({m.points[i]}, {m.points[i]}) = {m.dist[i][i]} is not 0")
        for j in range(n):
            v = m.dist[i][j]
            if v < 0:
                raise UltraError(f"negative distance between {m.points[i]} and {m.points[j]}")
            if v != m.dist[j][i]:
                raise UltraError(f"asymmetric distance between {m.points[i]} and {m.points[j]}")
            if i != j and v == 0:
                raise ZeroOffDiagonal(f"d({m.points[i]}, {m.points[j]}) = 0 for distinct points")
    R, _ = m.ranks()
    bad = _kernels.triangle_violations(R, use_numba)
    if len(bad):
        raise TriangleViolation([tuple(m.points[k] for k in t) for t in bad.tolist()])
    return m


# ---------------------------------------------------------------- ball partitions

@dataclass(frozen=True)
class BallTree:
    points: tuple
    levels: tuple                      # levels[n-1] = P_n as a tuple of blocks (tuples of labels)
    labels: np.ndarray = field(compare=False, repr=False)
    radii: tuple = ()                  # the original distance quantized to 2^-n at each level

    @property
    def depth(self) -> int:
        return len(self.levels)

    def block_of(self, level: int, x) -> tuple:
        for b in self.levels[level - 1]:
            if x in b:
                return b
        raise UltraError(f"{x!r} not found")


def ball_tree(m: FiniteUltra, use_numba: bool | None = None) -> BallTree:
    """P_n = {{x : d(x, a) < 2^-n} : a in X} after rank quantization, for n = 1..N."""
    R, vals = m.ranks()
    depth = max(1, len(vals))
    labels = _kernels.level_labels(R, depth, use_numba)
    levels = []
    for row in labels:
        blocks = {}
        for i, a in enumerate(row.tolist()):
            blocks.setdefault(a, []).append(m.points[i])
        levels.append(tuple(tuple(blocks[a]) for a in sorted(blocks)))
    return BallTree(m.points, tuple(levels), labels, tuple(vals))


def de_order(blocks: Sequence) -> list:
    """On a finite set every linear order is a DE-ordering; keep the given order."""
    blocks = list(blocks)
    if not blocks:
        raise UltraError("cannot order an empty family")
    return blocks


@dataclass
class LinearOrderResult:
    order: tuple                       # labels, least first
    level_orders: tuple                # per level, the blocks in their order
    provenance: tuple                  # (x, y, level) for consecutive x < y: the first level separating them
    tree: BallTree = field(repr=False)

    def position(self) -> dict:
        return {x: i for i, x in enumerate(self.order)}

    def less(self, x, y) -> bool:
        p = self.position()
        return p[x] < p[y]

    def deciding_level(self, x, y) -> int | None:
        i, j = self.tree.points.index(x), self.tree.points.index(y)
        for lv, row in enumerate(self.tree.labels, 1):
            if row[i] != row[j]:
                return lv
        return None

    def to_json(self) -> dict:
        return {"schema": 1, "order": list(map(str, self.order)),
                "levels": [[list(map(str, b)) for b in lv] for lv in self.level_orders],
                "provenance": [{"x": str(x), "y": str(y), "level": lv} for x, y, lv in self.provenance]}


def prop1_order(m: FiniteUltra, use_numba: bool | None = None) -> LinearOrderResult:
    """Order blocks level by level: children of one parent in DE order, parents' order inherited."""
    tree = ball_tree(m, use_numba)
    # a block's key at level n is the chain of first members of its ancestors; input order is
    # the DE choice, so sorting by these chains realizes the inductive order
    idx = np.lexsort(tree.labels[::-1]) if tree.depth else np.arange(m.n)
    order = tuple(m.points[i] for i in idx.tolist())
    pos = {x: i for i, x in enumerate(order)}
    level_orders = tuple(tuple(sorted(lv, key=lambda b: pos[b[0]])) for lv in tree.levels)
    prov = []
    for a, b in zip(idx.tolist(), idx.tolist()[1:]):
        lv = next((k + 1 for k, row in enumerate(tree.labels) if row[a] != row[b]), None)
        prov.append((m.points[a], m.points[b], lv))
    return LinearOrderResult(order, level_orders, tuple(prov), tree)


@dataclass
class IntervalReport:
    ok: bool
    blocks: list                       # (level, first, last, size)
    counterexamples: list

    def to_json(self) -> dict:
        return {"ok": self.ok,
                "blocks": [{"level": lv, "first": str(a), "last": str(b), "size": s} for lv, a, b, s in self.blocks],
                "counterexamples": [{"level": lv, "block": list(map(str, blk))} for lv, blk in self.counterexamples]}


def verify_interval_property(m: FiniteUltra, r: LinearOrderResult) -> IntervalReport:
    pos = r.position()
    blocks, bad = [], []
    for lv, level in enumerate(r.tree.levels, 1):
        for blk in level:
            ps = sorted(pos[x] for x in blk)
            if ps[-1] - ps[0] + 1 != len(ps):
                bad.append((lv, blk))
            blocks.append((lv, r.order[ps[0]], r.order[ps[-1]], len(ps)))
    return IntervalReport(not bad, blocks, bad)


def fast_check(m: FiniteUltra, r: LinearOrderResult, use_numba: bool | None = None) -> tuple[int, int]:
    """(interval failures, order failures) via the array kernels."""
    pos_of = r.position()
    pos = np.array([pos_of[x] for x in m.points], dtype=np.int64)
    lab = np.ascontiguousarray(r.tree.labels)
    return (_kernels.interval_failures(lab, pos, use_numba), _kernels.order_failures(lab, pos, use_numba))


# ---------------------------------------------------------------- hedgehogs

def hedgehog_metric(spines: Sequence[tuple[FiniteUltra, object]]) -> FiniteUltra:
    """Glue the spines at their base points; the body is labelled ``o`` and spine i's x is ``i:x``."""
    pts = [("o", None, None)]
    for i, (sp, b) in enumerate(spines):
        sp.index(b)
        pts += [(f"{i}:{x}", i, x) for x in sp.points if x != b]

    def base_dist(i, x):
        sp, b = spines[i]
        return sp.d(b, x)

    n = len(pts)
    dist = [[Fraction(0)] * n for _ in range(n)]
    for p in range(n):
        for q in range(p + 1, n):
            _, i, x = pts[p]
            _, j, y = pts[q]
            if i is None:
                v = base_dist(j, y)
            elif i == j:
                v = spines[i][0].d(x, y)
            else:
                v = max(base_dist(i, x), base_dist(j, y))
            dist[p][q] = dist[q][p] = v
    return FiniteUltra(tuple(p[0] for p in pts), tuple(map(tuple, dist)))


def spine_isometry_failures(h: FiniteUltra, spines: Sequence[tuple[FiniteUltra, object]]) -> list:
    """Pairs where the copy of spine i inside h disagrees with the spine's own metric."""
    bad = []
    for i, (sp, b) in enumerate(spines):
        name = {x: ("o" if x == b else f"{i}:{x}") for x in sp.points}
        for x in sp.points:
            for y in sp.points:
                if h.d(name[x], name[y]) != sp.d(x, y):
                    bad.append((i, x, y))
    return bad


# ---------------------------------------------------------------- random instances

def random_ultra(n: int, rng: random.Random, prefix: str = "p", ties: bool = True) -> FiniteUltra:
    """Merge clusters at nondecreasing heights; the merge height is the distance."""
    if n < 1:
        raise UltraError("need at least one point")
    clusters = [[i] for i in range(n)]
    dist = [[Fraction(0)] * n for _ in range(n)]
    h = Fraction(rng.randint(1, 8), 64)
    while len(clusters) > 1:
        a, b = rng.sample(range(len(clusters)), 2)
        if not ties or rng.random() < 0.6:
            h += Fraction(rng.randint(1, 16), rng.choice((16, 32, 48)))
        for x in clusters[a]:
            for y in clusters[b]:
                dist[x][y] = dist[y][x] = h
        clusters[a] += clusters[b]
        del clusters[b]
    return FiniteUltra(tuple(f"{prefix}{i}" for i in range(n)), tuple(map(tuple, dist)))


def random_hedgehog(rng: random.Random, max_points: int = 200) -> tuple[FiniteUltra, list]:
    spines = []
    total = 1
    for i in range(rng.randint(1, 8)):
        k = rng.randint(1, 25)
        if total + k - 1 > max_points:
            break
        sp = random_ultra(k, rng, prefix=f"s{i}_")
        spines.append((sp, rng.choice(sp.points)))
        total += k - 1
    return hedgehog_metric(spines), spines


# ---------------------------------------------------------------- IO

def _frac(s: str) -> Fraction:
    s = s.strip()
    if any(c in s for c in "eE") or "." in s:
        raise UltraError(f"{s!r}: distances must be integers or p/q rationals")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise UltraError(f"{s!r} is not a rational number") from None


def read_csv(text: str) -> FiniteUltra:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise UltraError("empty CSV")
    labels = [c.strip() for c in rows[0]]
    body = rows[1:]
    # an optional leading label column is allowed
    if body and len(body[0]) == len(labels) + 1:
        body = [r[1:] for r in body]
    if len(body) != len(labels):
        raise UltraError(f"expected {len(labels)} rows, got {len(body)}")
    return FiniteUltra(tuple(labels), tuple(tuple(_frac(c) for c in r) for r in body))


def write_csv(m: FiniteUltra) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(m.points)
    for row in m.dist:
        w.writerow([str(v) for v in row])
    return out.getvalue()


def read_json(text: str) -> FiniteUltra:
    d = json.loads(text)
    try:
        pts, dist = d["points"], d["dist"]
    except (KeyError, TypeError):
        raise UltraError('JSON input needs "points" and "dist"') from None
    return FiniteUltra(tuple(map(str, pts)), tuple(tuple(_frac(str(v)) for v in r) for r in dist))


def to_json(m: FiniteUltra) -> dict:
    return {"points": list(m.points), "dist": [[str(v) for v in r] for r in m.dist]}


def load(path: str) -> FiniteUltra:
    with open(path, encoding="utf-8") as f:
        text = f.read()
    return read_json(text) if path.endswith(".json") else read_csv(text)
