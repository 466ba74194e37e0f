"""Render a software netlist program as C99 source.

Layout: a struct of state-holding elements per instance (nested along the
hierarchy), an ``initial_block`` routine, the per-cycle ``<top>()``
function, one ``<top>_comb`` function per combinational feedback group,
and a ``main`` that drives the inputs nondeterministically inside an
unbounded loop.  Only the layout is fixed; bounds come from the verifier.
"""

from __future__ import annotations

from ..bitvec import BvExpr, var_names
from .ir import Assert, Assign, Assume, Havoc, If, Loop, SwNetlistProgram


def c_type(width: int) -> str:
    if width == 1:
        return "_Bool"
    if width <= 8:
        return "unsigned char"
    if width <= 16:
        return "unsigned short"
    if width <= 32:
        return "unsigned int"
    return "unsigned long long"


def _native(width: int) -> bool:
    return width in (1, 8, 16, 32, 64)


def _mask(width: int) -> str:
    return f"0x{(1 << width) - 1:x}ULL" if width > 32 else f"0x{(1 << width) - 1:x}u"


class _Names:
    def __init__(self, prog: SwNetlistProgram):
        self.prog = prog
        self.top = prog.top
        self.regs = {r for r, _ in prog.state_vars}
        self.shadow_of = {s: r for r, s in prog.shadows.items()}
        self.overrides: dict = {}

    def flat(self, name: str) -> str:
        rel = name[len(self.top) + 1:] if name.startswith(self.top + ".") else name
        return rel.replace(".", "__").replace("$", "_").replace("[", "_").replace("]", "")

    def ref(self, name: str) -> str:
        if name in self.overrides:
            return self.overrides[name]
        if name in self.regs:
            return "u1." + name[len(self.top) + 1:]
        if name in self.shadow_of:
            return self.flat(self.shadow_of[name]) + "_old"
        return self.flat(name)


def expr_c(e: BvExpr, names: _Names) -> str:
    """C expression computing ``e`` (value already reduced to its width)."""
    op, w = e.op, e.width
    if op == "var":
        return names.ref(e.params[0])
    if op == "const":
        v = e.params[0]
        return str(v) if v < 10 else (f"0x{v:x}ULL" if w > 32 else f"0x{v:x}u")
    a = [expr_c(x, names) for x in e.args]

    def fit(s: str) -> str:
        return s if _native(w) and w != 1 else f"(({s}) & {_mask(w)})"

    wide = "(unsigned long long)" if w > 32 else ""
    if op == "not":
        return f"(!{a[0]})" if w == 1 else fit(f"~{a[0]}")
    if op == "neg":
        return fit(f"-{wide}{a[0]}") if w > 1 else a[0]
    if op in ("and", "or", "xor"):
        sym = {"and": "&", "or": "|", "xor": "^"}[op]
        return f"({a[0]} {sym} {a[1]})"
    if op in ("add", "sub", "mul"):
        sym = {"add": "+", "sub": "-", "mul": "*"}[op]
        if w == 1:
            return f"(({a[0]} {sym} {a[1]}) & 1u)"
        return fit(f"{wide}{a[0]} {sym} {a[1]}")
    if op in ("shl", "lshr"):
        sym = "<<" if op == "shl" else ">>"
        body = f"{wide}{a[0]} {sym} {a[1]}"
        return f"(({a[1]}) >= {w} ? 0 : {fit(body) if op == 'shl' else '(' + body + ')'})"
    if op in ("eq", "ult", "ule"):
        sym = {"eq": "==", "ult": "<", "ule": "<="}[op]
        return f"({a[0]} {sym} {a[1]})"
    if op == "slt":
        aw = e.args[0].width
        sa = f"(long long)(({a[0]} ^ (1ULL << {aw - 1})))"
        sb = f"(long long)(({a[1]} ^ (1ULL << {aw - 1})))"
        return f"({sa} < {sb})"
    if op == "ite":
        return f"({a[0]} ? {a[1]} : {a[2]})"
    if op == "extract":
        hi, lo = e.params
        shifted = f"({a[0]} >> {lo})" if lo else a[0]
        return f"(({shifted}) & {_mask(hi - lo + 1)})"
    if op == "concat":
        lw = e.args[1].width
        return f"(({wide}{a[0]} << {lw}) | {a[1]})"
    if op == "zext":
        return a[0]
    if op == "sext":
        aw = e.args[0].width
        return fit(f"({a[0]} & (1ULL << {aw - 1})) ? ({a[0]} | ~{_mask(aw)}) : {a[0]}")
    if op == "redor":
        return f"({a[0]} != 0)"
    if op == "redand":
        return f"({a[0]} == {_mask(e.args[0].width)})"
    if op == "redxor":
        return f"(__builtin_parityll({a[0]}) != 0)"
    raise ValueError(f"cannot render operator {op}")


class _Emitter:
    def __init__(self, prog: SwNetlistProgram):
        self.p = prog
        self.n = _Names(prog)
        self.lines: list = []
        self.groups = {g.name: (i, g) for i, g in enumerate(prog.comb_groups)}

    def out(self, s: str = "", ind: int = 0) -> None:
        self.lines.append("  " * ind + s)

    # -- state struct
    def structs(self) -> None:
        top = self.p.top
        tree: dict = {}
        for r, w in self.p.state_vars:
            parts = r[len(top) + 1:].split(".")
            node = tree
            for p in parts[:-1]:
                node = node.setdefault(p, {})
            node[parts[-1]] = w

        def emit(node: dict, tag: str) -> None:
            for k, v in node.items():
                if isinstance(v, dict):
                    emit(v, f"{tag}__{k}")
            self.out(f"struct state_elements_{tag} {{")
            if not node:
                self.out("char _empty;", 1)
            for k, v in node.items():
                if isinstance(v, dict):
                    self.out(f"struct state_elements_{tag}__{k} {k};", 1)
                else:
                    self.out(f"{c_type(v)} {k};", 1)
            self.out("};")
        emit(tree, top)
        self.out(f"struct state_elements_{top} u1;")
        self.out()

    def globals(self) -> None:
        skip = set(self.n.regs) | set(self.p.shadows.values())
        names = sorted(n for n in self.p.signals if n not in skip and not n.startswith("__"))
        self.out("/* combinational signals and primary inputs */")
        for n in names:
            self.out(f"static {c_type(self.p.signals[n])} {self.n.flat(n)};")
        self.out()

    # -- statements
    def stmts(self, stmts, ind: int) -> None:
        pending_havoc = []
        for s in stmts:
            if isinstance(s, Havoc) and s.tag == "comb":
                pending_havoc.append(s)
                continue
            if isinstance(s, Assume) and s.label in self.groups:
                i, g = self.groups[s.label]
                args = self.group_args(g, s)
                self.out(f"{self.p.top}_comb{i if len(self.groups) > 1 else ''}({', '.join(args)});", ind)
                pending_havoc = []
                continue
            for h in pending_havoc:
                self.havoc(h, ind)
            pending_havoc = []
            self.stmt(s, ind)
        for h in pending_havoc:
            self.havoc(h, ind)

    def havoc(self, h: Havoc, ind: int) -> None:
        self.out(f"{self.n.ref(h.target)} = ({c_type(h.width)})(nondet() & {_mask(h.width)});", ind)

    def stmt(self, s, ind: int) -> None:
        n = self.n
        if isinstance(s, Assign):
            if s.target.startswith("__"):
                return
            if s.target in n.shadow_of:
                self.out(f"{c_type(s.width)} {n.ref(s.target)} = {expr_c(s.expr, n)};", ind)
                return
            self.out(f"{n.ref(s.target)} = {expr_c(s.expr, n)};", ind)
        elif isinstance(s, Havoc):
            self.havoc(s, ind)
        elif isinstance(s, Assume):
            self.out(f"assume({expr_c(s.cond, n)});", ind)
        elif isinstance(s, Assert):
            self.out(f"assert({expr_c(s.cond, n)}); /* {s.label} */", ind)
        elif isinstance(s, If):
            self.out(f"if ({expr_c(s.cond, n)}) {{", ind)
            self.stmts(s.then, ind + 1)
            if s.orelse:
                self.out("} else {", ind)
                self.stmts(s.orelse, ind + 1)
            self.out("}", ind)
        elif isinstance(s, Loop):
            self.out(f"while ({expr_c(s.cond, n)}) {{", ind)
            self.stmts(s.body, ind + 1)
            self.out("}", ind)

    # -- comb groups
    def group_regs(self, g) -> list:
        regs = set()
        for _, v in g.equalities:
            regs |= var_names(v) & self.n.regs
        return sorted(regs)

    def group_args(self, g, assume: Assume) -> list:
        used = var_names(assume.cond)
        out = []
        for r in self.group_regs(g):
            sh = self.p.shadows.get(r)
            out.append(self.n.ref(sh) if sh in used else self.n.ref(r))
        return out

    def comb_functions(self) -> None:
        for name, (i, g) in self.groups.items():
            regs = self.group_regs(g)
            params = ", ".join(f"{c_type(self.p.signals[r])} {self.n.flat(r)}_v" for r in regs) or "void"
            self.out(f"/* {name} */")
            self.out(f"void {self.p.top}_comb{i if len(self.groups) > 1 else ''}({params}) {{")
            self.n.overrides = {r: f"{self.n.flat(r)}_v" for r in regs}
            for t, w in g.members:
                self.out(f"{self.n.ref(t)} = ({c_type(w)})(nondet() & {_mask(w)});", 1)
            conj = " && ".join(f"({self.n.ref(t)} == {expr_c(v, self.n)})" for t, v in g.equalities)
            self.out(f"assume({conj or '1'});", 1)
            self.n.overrides = {}
            self.out("}")
            self.out()

    def emit(self) -> str:
        p = self.p
        self.out("/* software netlist */")
        self.out("extern unsigned long long nondet(void);")
        self.out("extern void assume(_Bool cond);")
        self.out("extern void assert(_Bool cond);")
        self.out()
        self.structs()
        self.globals()
        self.comb_functions()          # initial_block may settle combinational groups too
        self.out("void initial_block(void) {")
        self.stmts(p.init, 1)
        self.out("}")
        self.out()
        params = [f"{c_type(w)} {self.n.flat(n)}_in" for n, w in p.inputs]
        self.out(f"void {p.top}({', '.join(params) or 'void'}) {{")
        for n, _ in p.inputs:
            self.out(f"{self.n.flat(n)} = {self.n.flat(n)}_in;", 1)
        self.stmts(p.step, 1)
        self.out("}")
        self.out()
        self.out("int main(void) {")
        self.out("initial_block();", 1)
        args = []
        for n, w in p.inputs:
            self.out(f"{c_type(w)} {self.n.flat(n)}_nd;", 1)
            args.append(f"{self.n.flat(n)}_nd")
        self.out("while (1) {", 1)
        for n, w in p.inputs:
            self.out(f"{self.n.flat(n)}_nd = ({c_type(w)})(nondet() & {_mask(w)}); /* nondeterministic input */", 2)
        self.out(f"{p.top}({', '.join(args)});", 2)
        self.out("}", 1)
        self.out("return 0;", 1)
        self.out("}")
        return "\n".join(self.lines) + "\n"


def emit_c(program: SwNetlistProgram) -> str:
    """Deterministic C99 rendering of ``program``."""
    return _Emitter(program).emit()
