"""JSON serialization of BvExpr trees, IR statements and whole programs.

The format is documented in ``docs/ir-schema.md``; :func:`program_from_json`
inverts :func:`program_to_json` exactly.
"""

from __future__ import annotations

import json

from ..bitvec import BvExpr
from .ir import Assert, Assign, Assume, CombGroup, Havoc, If, Loop, SwNetlistProgram

SCHEMA_VERSION = 1


def expr_to_json(e: BvExpr, memo: dict | None = None):
    d = {"op": e.op, "width": e.width}
    if e.op == "var":
        d["name"], d["version"] = e.params
        return d
    if e.op == "const":
        d["value"] = e.params[0]
        return d
    if e.params:
        d["params"] = list(e.params)
    d["args"] = [expr_to_json(a) for a in e.args]
    return d


def expr_from_json(d) -> BvExpr:
    op = d["op"]
    if op == "var":
        return BvExpr("var", (), d["width"], (d["name"], d.get("version", 0)))
    if op == "const":
        return BvExpr("const", (), d["width"], (d["value"],))
    args = tuple(expr_from_json(a) for a in d["args"])
    return BvExpr(op, args, d["width"], tuple(d.get("params", ())))


def stmt_to_json(s) -> dict:
    if isinstance(s, Assign):
        return {"kind": "assign", "target": s.target, "expr": expr_to_json(s.expr)}
    if isinstance(s, Havoc):
        return {"kind": "havoc", "target": s.target, "width": s.width, "tag": s.tag, "site": s.site}
    if isinstance(s, Assume):
        return {"kind": "assume", "cond": expr_to_json(s.cond), "label": s.label}
    if isinstance(s, Assert):
        return {"kind": "assert", "label": s.label, "cond": expr_to_json(s.cond)}
    if isinstance(s, If):
        return {"kind": "if", "cond": expr_to_json(s.cond),
                "then": [stmt_to_json(x) for x in s.then],
                "else": [stmt_to_json(x) for x in s.orelse]}
    if isinstance(s, Loop):
        return {"kind": "loop", "cond": expr_to_json(s.cond), "cycle": s.cycle, "label": s.label,
                "body": [stmt_to_json(x) for x in s.body]}
    raise TypeError(f"not a statement: {s!r}")


def stmt_from_json(d):
    k = d["kind"]
    if k == "assign":
        return Assign(d["target"], expr_from_json(d["expr"]))
    if k == "havoc":
        return Havoc(d["target"], d["width"], d.get("tag", "input"), d.get("site", ""))
    if k == "assume":
        return Assume(expr_from_json(d["cond"]), d.get("label", ""))
    if k == "assert":
        return Assert(d["label"], expr_from_json(d["cond"]))
    if k == "if":
        return If(expr_from_json(d["cond"]), tuple(stmt_from_json(x) for x in d["then"]),
                  tuple(stmt_from_json(x) for x in d["else"]))
    if k == "loop":
        return Loop(expr_from_json(d["cond"]), tuple(stmt_from_json(x) for x in d["body"]),
                    d.get("cycle", False), d.get("label", ""))
    raise ValueError(f"unknown statement kind {k!r}")


def program_to_json(p: SwNetlistProgram) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "top": p.top,
        "clock": p.clock,
        "state_vars": [[n, w] for n, w in p.state_vars],
        "inputs": [[n, w] for n, w in p.inputs],
        "outputs": [[n, w] for n, w in p.outputs],
        "signals": dict(p.signals),
        "shadows": dict(p.shadows),
        "reg_init": dict(p.reg_init),
        "init": [stmt_to_json(s) for s in p.init],
        "step": [stmt_to_json(s) for s in p.step],
        "comb_groups": [
            {"name": g.name, "members": [[n, w] for n, w in g.members],
             "equalities": [{"target": t, "expr": expr_to_json(v)} for t, v in g.equalities]}
            for g in p.comb_groups],
        "asserts": [{"label": lbl, "cond": expr_to_json(c)} for lbl, c in p.asserts],
    }


def program_from_json(d: dict) -> SwNetlistProgram:
    if d.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported IR schema {d.get('schema')!r}")
    return SwNetlistProgram(
        top=d["top"], clock=d["clock"],
        state_vars=[tuple(x) for x in d["state_vars"]],
        inputs=[tuple(x) for x in d["inputs"]],
        outputs=[tuple(x) for x in d["outputs"]],
        signals=dict(d["signals"]),
        init=[stmt_from_json(s) for s in d["init"]],
        step=[stmt_from_json(s) for s in d["step"]],
        comb_groups=[CombGroup(g["name"], [tuple(m) for m in g["members"]],
                               [(q["target"], expr_from_json(q["expr"])) for q in g["equalities"]])
                     for g in d["comb_groups"]],
        asserts=[(a["label"], expr_from_json(a["cond"])) for a in d["asserts"]],
        reg_init=dict(d["reg_init"]),
        shadows=dict(d["shadows"]),
    )


def dumps(p: SwNetlistProgram) -> str:
    return json.dumps(program_to_json(p), indent=1, sort_keys=True)


def loads(text: str) -> SwNetlistProgram:
    return program_from_json(json.loads(text))
