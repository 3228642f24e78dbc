"""Command-line front end.

Every command prints a human-readable summary and builds a JSON report.  The
report goes to ``--report PATH`` or, when ``SCATORD_REPORT_DIR`` is set, to
``<dir>/<command>.json``.  Exit status: 0 on success, 1 on a domain error, 2 on
a usage error.  Reports are only written after the command succeeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .ordinals import Cardinal, parse_cardinal, parse_ordinal

REPORT_ENV = "SCATORD_REPORT_DIR"
SCHEMA = 1


def _kappas(values) -> list[Cardinal]:
    return [parse_cardinal(v) for v in (values or [])]


def _expr(text: str):
    from .spaces import parse_expr
    return parse_expr(text)


def _ordinal_param(text: str):
    from .cbengine import ProgressionValue
    t = text.strip()
    if t.startswith("run(") and t.endswith(")"):
        base, step = (parse_ordinal(s) for s in t[4:-1].split(","))
        return ProgressionValue(base, step)
    return parse_ordinal(t)


# ---------------------------------------------------------------- commands

def cmd_derive(a):
    from .cbengine import derive_full
    t = derive_full(_expr(a.expr))
    lines = [f"height {t.height}"]
    for e in t.entries:
        d = e.to_json()
        if e.empty:
            lines.append(f"stage {e.gamma}: empty")
            continue
        what = d["points"] if d["points"] is not None else d["regions"]
        lines.append(f"stage {e.gamma}: {d['size']} point(s) {json.dumps(what, ensure_ascii=False)}")
    return t.to_json(), "\n".join(lines)


def cmd_rank(a):
    from .cbengine import rank_of_point
    from .spaces import parse_point
    x = _expr(a.expr)
    p = parse_point(x, a.point)
    r = rank_of_point(x, p)
    return {"expr": a.expr, "point": a.point, "rank": str(r)}, str(r)


def cmd_classify(a):
    from .classify import ms_characteristic
    c = ms_characteristic(_expr(a.expr))
    return {"expr": a.expr, **c.to_json()}, f"({c.alpha}, {c.n}), homeomorphic to ord[{c.model()}]"


def cmd_homeo(a):
    from .classify import DEFAULT_KAPPAS, homeomorphic
    ks = _kappas(a.kappa) or list(DEFAULT_KAPPAS)
    c = homeomorphic(_expr(a.left), _expr(a.right), ks)
    j = c.to_json()
    text = f"{c.verdict} via {c.invariant}: {j['left']} vs {j['right']}"
    return j, text


def cmd_signature(a):
    from .invariants import signature
    rep = signature(_expr(a.expr), _kappas(a.kappa))
    j = rep.to_json()
    lines = [f"sigma: {j['sigma']}"]
    lines += [f"sigma[{k}]: {v}" for k, v in j["sigma_kappa"].items()]
    lines += [f"psi[{k}]: {v}" for k, v in j["psi"].items()]
    return j, "\n".join(lines)


def cmd_psi(a):
    from .invariants import psi, singular_recovery
    x, k = _expr(a.expr), parse_cardinal(a.kappa)
    if k.regular:
        vals = sorted(map(str, psi(x, k)))
        return {"expr": a.expr, "kappa": str(k), "psi": vals}, "{" + ", ".join(vals) + "}"
    vals = sorted(map(str, singular_recovery(x, k)))
    return ({"expr": a.expr, "kappa": str(k), "recovered": vals},
            "recovered {" + ", ".join(vals) + "}")


def cmd_family(a):
    from .families import FamilyParams, build
    from .invariants import signature
    from .spaces import designated_point, expr_to_json, point_text, to_text
    raw = list(a.params) + [t for chunk in (a.set or []) for t in chunk.split(",") if t.strip()]
    if a.variant.startswith("prop2"):
        params = tuple(int(s) for s in raw)
    else:
        params = tuple(_ordinal_param(s) for s in raw)
    kappa = parse_cardinal(a.kappa) if a.kappa else None
    p = FamilyParams(a.variant, params, kappa, parse_ordinal(a.alpha) if a.alpha else None)
    x = build(p)
    text = to_text(x)
    try:
        designated = [point_text(designated_point(x))]
    except (ValueError, TypeError):
        designated = []
    entry = {"variant": a.variant, "text": text, "expr": expr_to_json(x), "designated": designated,
             "signature": signature(x, [kappa] if kappa else []).to_json()}
    if a.emit:
        Path(a.emit).write_text(_dump({"schema": SCHEMA, "catalog": [entry]}), encoding="utf-8")
    sig = entry["signature"]
    lines = [text, f"sigma: {sig['sigma']}"] + [f"sigma[{k}]: {v}" for k, v in sig["sigma_kappa"].items()]
    if designated:
        lines.append(f"designated: {designated[0]}")
    return entry, "\n".join(lines)


def cmd_ultra(a):
    from . import ultrametric as um
    m = um.validate_ultra(um.load(a.input))
    if a.action == "validate":
        return {"valid": True, "points": len(m.points)}, f"valid ultrametric on {m.n} points"
    if a.action == "tree":
        t = um.ball_tree(m)
        lv = [[list(b) for b in level] for level in t.levels]
        return {"levels": lv}, "\n".join(f"P_{i}: {level}" for i, level in enumerate(lv, 1))
    r = um.prop1_order(m)
    rep = um.verify_interval_property(m, r)
    if not rep.ok:
        raise um.UltraError(f"interval property fails: {rep.counterexamples}")
    j = {**r.to_json(), "intervals": rep.to_json()}
    return j, " < ".join(map(str, r.order)) + f"\nall {len(rep.blocks)} balls are intervals"


def cmd_oracle(a):
    from .oracle import compare_with_engine
    c = compare_with_engine(_expr(a.expr))
    d = None if c.ok else {"stage": str(c.divergence.stage), "point": [str(v) for v in c.divergence.point],
                           "engine": c.divergence.engine, "oracle": c.divergence.oracle}
    j = {"expr": a.expr, "checked": c.checked, "agree": c.ok, "divergence": d}
    if not c.ok:
        raise DomainFailure(f"first divergence: {c.divergence}", j)
    return j, f"engine and oracle agree on {c.checked} probes"


class DomainFailure(Exception):
    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    def common(parser, default):
        # the shared flags work before or after the subcommand; the subcommand copies
        # suppress their defaults so they never overwrite a value given up front
        kw = {} if default else {"default": argparse.SUPPRESS}
        parser.add_argument("--report", help="write the JSON report to this path", **kw)
        parser.add_argument("--json", action="store_true", help="print the JSON report instead of the summary", **kw)
        parser.add_argument("--seed", type=int, help="seed recorded in the manifest", **({"default": 0} if default else kw))
        return parser

    p = common(argparse.ArgumentParser(prog="scatord", description="Cantor-Bendixson workbench for scattered ordered spaces."), True)
    p.add_argument("--version", action="version", version=f"scatord {__version__}")
    shared = common(argparse.ArgumentParser(add_help=False), False)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[shared], **k)

    s = sub.add_parser("derive", help="Cantor-Bendixson trace of an expression")
    s.add_argument("expr")
    s.set_defaults(fn=cmd_derive)

    s = sub.add_parser("rank", help="rank of one point")
    s.add_argument("expr")
    s.add_argument("point")
    s.set_defaults(fn=cmd_rank)

    s = sub.add_parser("classify", help="(alpha, n) of a countable compact space")
    s.add_argument("expr")
    s.set_defaults(fn=cmd_classify)

    s = sub.add_parser("homeo", help="decide or refute homeomorphism")
    s.add_argument("left")
    s.add_argument("right")
    s.add_argument("--kappa", action="append", help="cardinal to test (repeatable; default aleph_1, aleph_2)")
    s.set_defaults(fn=cmd_homeo)

    s = sub.add_parser("signature", help="Sigma, Sigma[kappa], Psi")
    s.add_argument("expr")
    s.add_argument("--kappa", action="append")
    s.set_defaults(fn=cmd_signature)

    s = sub.add_parser("psi", help="Psi at a regular cardinal, or the recovered set at a singular one")
    s.add_argument("expr")
    s.add_argument("--kappa", required=True)
    s.set_defaults(fn=cmd_psi)

    s = sub.add_parser("family", help="build a named family member")
    s.add_argument("variant")
    s.add_argument("params", nargs="*", help="index set elements")
    s.add_argument("--set", action="append", help="comma-separated index set, e.g. 2,5,7")
    s.add_argument("--emit", help="write a catalog JSON with the expression and its signature")
    s.add_argument("--kappa")
    s.add_argument("--alpha")
    s.set_defaults(fn=cmd_family)

    s = sub.add_parser("ultra", help="finite ultrametric spaces")
    s.add_argument("action", choices=("validate", "tree", "order"))
    s.add_argument("--in", dest="input", required=True, help="CSV matrix with a header row, or JSON {points, dist}")
    s.set_defaults(fn=cmd_ultra)

    s = sub.add_parser("oracle", help="compare the engine against the brute-force oracle")
    s.add_argument("action", choices=("check",))
    s.add_argument("expr")
    s.set_defaults(fn=cmd_oracle)
    return p


def _manifest(a, argv) -> dict:
    exprs = [getattr(a, k) for k in ("expr", "left", "right") if getattr(a, k, None)]
    kap = getattr(a, "kappa", None)
    kap = kap if isinstance(kap, list) else ([kap] if kap else [])
    cards = []
    for k in kap:
        c = parse_cardinal(k)
        cards.append({"cardinal": str(c), "regular": c.regular})
    return {"command": a.command, "argv": list(argv), "inputs": [a.input] if getattr(a, "input", None) else [],
            "expressions": exprs, "cardinals": cards, "seed": a.seed, "version": __version__}


def _report_path(a) -> Path | None:
    if a.report:
        return Path(a.report)
    d = os.environ.get(REPORT_ENV)
    return Path(d) / f"{a.command}.json" if d else None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        body, text = a.fn(a)
    except DomainFailure as e:
        print(f"scatord {a.command}: {e}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, KeyError, OSError) as e:
        print(f"scatord {a.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    report = {"schema": SCHEMA, "manifest": _manifest(a, argv), "result": body}
    out = _dump(report)
    path = _report_path(a)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(out, encoding="utf-8")
        tmp.replace(path)
    print(out if a.json else text, end="" if a.json else "\n")
    return 0


if __name__ == "__main__":            # pragma: no cover
    sys.exit(main())
