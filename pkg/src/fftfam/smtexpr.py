"""A small hash-consed bitvector expression language.

One expression DAG serves three backends: rendering to SMT-LIB 2 (QF_BV),
concrete evaluation under a variable assignment, and Tseitin bit-blasting to
DIMACS CNF.  Keeping a single source of truth lets the encoder, the concrete
cost recount, and the bundled SAT back end agree by construction.

Widths are explicit everywhere; booleans are a separate sort (width None).
Construction order is topological, so every backend is a single linear pass.
"""

from __future__ import annotations

from dataclasses import dataclass

BOOL = None


@dataclass(frozen=True)
class Expr:
    ctx: "Ctx"
    id: int
    width: int | None

    def __add__(self, other):
        return self.ctx.add(self, other)

    def __sub__(self, other):
        return self.ctx.sub(self, other)

    def eq(self, other):
        return self.ctx.eq(self, other)

    def ule(self, other):
        return self.ctx.ule(self, other)


class Ctx:
    """Expression arena with structural sharing."""

    def __init__(self):
        self.ops: list[str] = []
        self.widths: list[int | None] = []
        self.args: list[tuple[int, ...]] = []
        self.payload: list = []
        self.memo: dict = {}
        self.vars: list[int] = []
        self._var_names: dict[str, int] = {}

    def _node(self, op: str, width: int | None, args: tuple[int, ...],
              payload=None) -> Expr:
        key = (op, width, args, payload)
        hit = self.memo.get(key)
        if hit is not None:
            return Expr(self, hit, width)
        i = len(self.ops)
        self.ops.append(op)
        self.widths.append(width)
        self.args.append(args)
        self.payload.append(payload)
        self.memo[key] = i
        return Expr(self, i, width)

    # -- leaves ------------------------------------------------------------

    def var(self, name: str, width: int) -> Expr:
        if width < 1:
            raise ValueError("variable %s needs positive width" % name)
        prior = self._var_names.get(name)
        if prior is not None:
            if self.widths[prior] != width:
                raise ValueError("variable %s redeclared at new width" % name)
            return Expr(self, prior, width)
        e = self._node("var", width, (), name)
        self._var_names[name] = e.id
        self.vars.append(e.id)
        return e

    def const(self, value: int, width: int) -> Expr:
        if width < 1:
            raise ValueError("constant needs positive width")
        return self._node("const", width, (), int(value) % (1 << width))

    def true(self) -> Expr:
        return self._node("true", BOOL, ())

    def false(self) -> Expr:
        return self._node("false", BOOL, ())

    # -- bitvector arithmetic ----------------------------------------------

    def _bv2(self, op, a: Expr, b: Expr) -> Expr:
        if a.width != b.width or a.width is BOOL:
            raise ValueError("width mismatch in %s" % op)
        return self._node(op, a.width, (a.id, b.id))

    def add(self, a: Expr, b: Expr) -> Expr:
        return self._bv2("add", a, b)

    def sub(self, a: Expr, b: Expr) -> Expr:
        return self._bv2("sub", a, b)

    def extract(self, a: Expr, hi: int, lo: int) -> Expr:
        if not (0 <= lo <= hi < a.width):
            raise ValueError("bad extract range")
        if lo == 0 and hi == a.width - 1:
            return a
        return self._node("extract", hi - lo + 1, (a.id,), (hi, lo))

    def zext(self, a: Expr, extra: int) -> Expr:
        if extra < 0:
            raise ValueError("negative extension")
        if extra == 0:
            return a
        return self._node("zext", a.width + extra, (a.id,), extra)

    def concat(self, hi: Expr, lo: Expr) -> Expr:
        return self._node("concat", hi.width + lo.width, (hi.id, lo.id))

    # -- predicates and connectives ------------------------------------------

    def eq(self, a: Expr, b: Expr) -> Expr:
        if a.width != b.width:
            raise ValueError("width mismatch in eq")
        return self._node("eq", BOOL, (a.id, b.id))

    def ule(self, a: Expr, b: Expr) -> Expr:
        if a.width != b.width or a.width is BOOL:
            raise ValueError("width mismatch in ule")
        return self._node("ule", BOOL, (a.id, b.id))

    def and_(self, *xs: Expr) -> Expr:
        if any(self.ops[x.id] == "false" for x in xs):
            return self.false()
        xs = [x for x in xs if self.ops[x.id] != "true"]
        if not xs:
            return self.true()
        if len(xs) == 1:
            return xs[0]
        return self._node("and", BOOL, tuple(x.id for x in xs))

    def or_(self, *xs: Expr) -> Expr:
        if any(self.ops[x.id] == "true" for x in xs):
            return self.true()
        xs = [x for x in xs if self.ops[x.id] != "false"]
        if not xs:
            return self.false()
        if len(xs) == 1:
            return xs[0]
        return self._node("or", BOOL, tuple(x.id for x in xs))

    def not_(self, a: Expr) -> Expr:
        return self._node("not", BOOL, (a.id,))

    def ite(self, c: Expr, a: Expr, b: Expr) -> Expr:
        if a.width != b.width:
            raise ValueError("ite arms differ in width")
        return self._node("ite", a.width, (c.id, a.id, b.id))

    def name_of(self, e: Expr) -> str:
        if self.ops[e.id] != "var":
            raise ValueError("not a variable")
        return self.payload[e.id]


# -- SMT-LIB rendering -------------------------------------------------------


def _sort(width: int | None) -> str:
    return "Bool" if width is BOOL else "(_ BitVec %d)" % width


class Script:
    """An assertion set over one Ctx, renderable and solvable three ways."""

    def __init__(self, ctx: Ctx, logic: str = "QF_BV"):
        self.ctx = ctx
        self.logic = logic
        self.asserts: list[int] = []
        self.model_vars: list[str] = []

    def assert_(self, e: Expr) -> None:
        if e.width is not BOOL:
            raise ValueError("can only assert booleans")
        self.asserts.append(e.id)

    def want_value(self, e: Expr) -> None:
        name = self.ctx.name_of(e)
        if name not in self.model_vars:
            self.model_vars.append(name)

    def _reachable(self) -> list[int]:
        ctx = self.ctx
        seen = [False] * len(ctx.ops)
        stack = list(self.asserts)
        want = set(self.model_vars)
        for i in ctx.vars:
            if ctx.payload[i] in want:
                stack.append(i)
        while stack:
            i = stack.pop()
            if seen[i]:
                continue
            seen[i] = True
            stack.extend(ctx.args[i])
        return [i for i in range(len(ctx.ops)) if seen[i]]

    def to_smt2(self, get_values: bool = True) -> str:
        ctx = self.ctx
        order = self._reachable()
        out = ["(set-option :produce-models true)", "(set-logic %s)" % self.logic]
        ref: dict[int, str] = {}
        body = []
        for i in order:
            op = ctx.ops[i]
            w = ctx.widths[i]
            if op == "var":
                ref[i] = ctx.payload[i]
                out.append("(declare-fun %s () %s)" % (ref[i], _sort(w)))
                continue
            if op == "const":
                ref[i] = "#b" + format(ctx.payload[i], "0%db" % w)
                continue
            if op == "true":
                ref[i] = "true"
                continue
            if op == "false":
                ref[i] = "false"
                continue
            a = [ref[j] for j in ctx.args[i]]
            if op == "add":
                s = "(bvadd %s %s)" % (a[0], a[1])
            elif op == "sub":
                s = "(bvsub %s %s)" % (a[0], a[1])
            elif op == "extract":
                hi, lo = ctx.payload[i]
                s = "((_ extract %d %d) %s)" % (hi, lo, a[0])
            elif op == "zext":
                s = "((_ zero_extend %d) %s)" % (ctx.payload[i], a[0])
            elif op == "concat":
                s = "(concat %s %s)" % (a[0], a[1])
            elif op == "eq":
                s = "(= %s %s)" % (a[0], a[1])
            elif op == "ule":
                s = "(bvule %s %s)" % (a[0], a[1])
            elif op == "and":
                s = "(and %s)" % " ".join(a)
            elif op == "or":
                s = "(or %s)" % " ".join(a)
            elif op == "not":
                s = "(not %s)" % a[0]
            elif op == "ite":
                s = "(ite %s %s %s)" % (a[0], a[1], a[2])
            else:
                raise ValueError("unknown op %s" % op)
            name = "t%d" % i
            body.append("(define-fun %s () %s %s)" % (name, _sort(w), s))
            ref[i] = name
        out.extend(body)
        for i in self.asserts:
            out.append("(assert %s)" % ref[i])
        out.append("(check-sat)")
        if get_values and self.model_vars:
            out.append("(get-value (%s))" % " ".join(self.model_vars))
        return "\n".join(out) + "\n"


# -- concrete evaluation -------------------------------------------------


def evaluate(ctx: Ctx, roots: list[Expr], assignment: dict[str, int]) -> list:
    """Evaluate expressions under name->int variable values."""
    vals: dict[int, int | bool] = {}
    need = [False] * len(ctx.ops)
    stack = [r.id for r in roots]
    while stack:
        i = stack.pop()
        if need[i]:
            continue
        need[i] = True
        stack.extend(ctx.args[i])
    for i in range(len(ctx.ops)):
        if not need[i]:
            continue
        op = ctx.ops[i]
        w = ctx.widths[i]
        arg = ctx.args[i]
        if op == "var":
            name = ctx.payload[i]
            if name not in assignment:
                raise KeyError("no value for variable %s" % name)
            vals[i] = assignment[name] % (1 << w)
        elif op == "const":
            vals[i] = ctx.payload[i]
        elif op == "true":
            vals[i] = True
        elif op == "false":
            vals[i] = False
        elif op == "add":
            vals[i] = (vals[arg[0]] + vals[arg[1]]) % (1 << w)
        elif op == "sub":
            vals[i] = (vals[arg[0]] - vals[arg[1]]) % (1 << w)
        elif op == "extract":
            hi, lo = ctx.payload[i]
            vals[i] = (vals[arg[0]] >> lo) & ((1 << (hi - lo + 1)) - 1)
        elif op == "zext":
            vals[i] = vals[arg[0]]
        elif op == "concat":
            lo_w = ctx.widths[arg[1]]
            vals[i] = (vals[arg[0]] << lo_w) | vals[arg[1]]
        elif op == "eq":
            vals[i] = vals[arg[0]] == vals[arg[1]]
        elif op == "ule":
            vals[i] = vals[arg[0]] <= vals[arg[1]]
        elif op == "and":
            vals[i] = all(vals[j] for j in arg)
        elif op == "or":
            vals[i] = any(vals[j] for j in arg)
        elif op == "not":
            vals[i] = not vals[arg[0]]
        elif op == "ite":
            vals[i] = vals[arg[1]] if vals[arg[0]] else vals[arg[2]]
        else:
            raise ValueError("unknown op %s" % op)
    return [vals[r.id] for r in roots]


# -- Tseitin bit-blasting --------------------------------------------------


class CnfBuilder:
    """Bit-level Tseitin encoder with literal-level constant folding.

    Variable 1 is pinned true so constants are plain literals.  Booleans are
    single literals; bitvectors are LSB-first literal lists.
    """

    def __init__(self):
        self.nvars = 1
        self.clauses: list[tuple[int, ...]] = [(1,)]
        self.TRUE = 1
        self.FALSE = -1
        self._and_memo: dict[tuple[int, int], int] = {}
        self._xor_memo: dict[tuple[int, int], int] = {}
        self._maj_memo: dict[tuple[int, int, int], int] = {}

    def fresh(self) -> int:
        self.nvars += 1
        return self.nvars

    def add_clause(self, *lits: int) -> None:
        self.clauses.append(tuple(lits))

    def mk_and(self, a: int, b: int) -> int:
        if a == self.FALSE or b == self.FALSE or a == -b:
            return self.FALSE
        if a == self.TRUE:
            return b
        if b == self.TRUE or a == b:
            return a
        key = (min(a, b), max(a, b))
        hit = self._and_memo.get(key)
        if hit is not None:
            return hit
        o = self.fresh()
        self.add_clause(-o, a)
        self.add_clause(-o, b)
        self.add_clause(o, -a, -b)
        self._and_memo[key] = o
        return o

    def mk_or(self, a: int, b: int) -> int:
        return -self.mk_and(-a, -b)

    def mk_xor(self, a: int, b: int) -> int:
        if a == self.FALSE:
            return b
        if b == self.FALSE:
            return a
        if a == self.TRUE:
            return -b
        if b == self.TRUE:
            return -a
        if a == b:
            return self.FALSE
        if a == -b:
            return self.TRUE
        key = (min(a, b), max(a, b))
        hit = self._xor_memo.get(key)
        if hit is not None:
            return hit
        o = self.fresh()
        self.add_clause(-o, a, b)
        self.add_clause(-o, -a, -b)
        self.add_clause(o, -a, b)
        self.add_clause(o, a, -b)
        self._xor_memo[key] = o
        return o

    def mk_maj(self, a: int, b: int, c: int) -> int:
        for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
            if x == self.TRUE:
                return self.mk_or(y, z)
            if x == self.FALSE:
                return self.mk_and(y, z)
            if x == y:
                return x
            if x == -y:
                return z
        key = tuple(sorted((a, b, c)))
        hit = self._maj_memo.get(key)
        if hit is not None:
            return hit
        o = self.fresh()
        self.add_clause(-o, a, b)
        self.add_clause(-o, a, c)
        self.add_clause(-o, b, c)
        self.add_clause(o, -a, -b)
        self.add_clause(o, -a, -c)
        self.add_clause(o, -b, -c)
        self._maj_memo[key] = o
        return o

    def mk_mux(self, c: int, a: int, b: int) -> int:
        # c ? a : b
        if c == self.TRUE:
            return a
        if c == self.FALSE:
            return b
        if a == b:
            return a
        return self.mk_or(self.mk_and(c, a), self.mk_and(-c, b))

    def mk_and_list(self, xs: list[int]) -> int:
        out = self.TRUE
        for x in xs:
            out = self.mk_and(out, x)
        return out

    def mk_or_list(self, xs: list[int]) -> int:
        out = self.FALSE
        for x in xs:
            out = self.mk_or(out, x)
        return out

    def ripple_add(self, a: list[int], b: list[int], carry: int) -> list[int]:
        out = []
        for x, y in zip(a, b):
            out.append(self.mk_xor(self.mk_xor(x, y), carry))
            carry = self.mk_maj(x, y, carry)
        return out


def bitblast(script: Script) -> tuple[CnfBuilder, dict[str, list[int]]]:
    """Blast a script to CNF; returns the builder and name -> bit literals."""
    ctx = script.ctx
    cb = CnfBuilder()
    order = script._reachable()
    bits: dict[int, list[int] | int] = {}
    var_bits: dict[str, list[int]] = {}
    for i in order:
        op = ctx.ops[i]
        w = ctx.widths[i]
        arg = ctx.args[i]
        if op == "var":
            bs = [cb.fresh() for _ in range(w)]
            bits[i] = bs
            var_bits[ctx.payload[i]] = bs
        elif op == "const":
            v = ctx.payload[i]
            bits[i] = [cb.TRUE if (v >> k) & 1 else cb.FALSE for k in range(w)]
        elif op == "true":
            bits[i] = cb.TRUE
        elif op == "false":
            bits[i] = cb.FALSE
        elif op == "add":
            bits[i] = cb.ripple_add(bits[arg[0]], bits[arg[1]], cb.FALSE)
        elif op == "sub":
            nb = [-x for x in bits[arg[1]]]
            bits[i] = cb.ripple_add(bits[arg[0]], nb, cb.TRUE)
        elif op == "extract":
            hi, lo = ctx.payload[i]
            bits[i] = bits[arg[0]][lo:hi + 1]
        elif op == "zext":
            bits[i] = bits[arg[0]] + [cb.FALSE] * ctx.payload[i]
        elif op == "concat":
            bits[i] = bits[arg[1]] + bits[arg[0]]
        elif op == "eq":
            if ctx.widths[arg[0]] is BOOL:
                bits[i] = -cb.mk_xor(bits[arg[0]], bits[arg[1]])
            else:
                xs = [-cb.mk_xor(x, y)
                      for x, y in zip(bits[arg[0]], bits[arg[1]])]
                bits[i] = cb.mk_and_list(xs)
        elif op == "ule":
            # a <= b iff the subtraction b - a produces no borrow.
            carry = cb.TRUE
            for x, y in zip(bits[arg[0]], bits[arg[1]]):
                carry = cb.mk_maj(-x, y, carry)
            bits[i] = carry
        elif op == "and":
            bits[i] = cb.mk_and_list([bits[j] for j in arg])
        elif op == "or":
            bits[i] = cb.mk_or_list([bits[j] for j in arg])
        elif op == "not":
            bits[i] = -bits[arg[0]]
        elif op == "ite":
            c = bits[arg[0]]
            if w is BOOL:
                bits[i] = cb.mk_mux(c, bits[arg[1]], bits[arg[2]])
            else:
                bits[i] = [cb.mk_mux(c, x, y)
                           for x, y in zip(bits[arg[1]], bits[arg[2]])]
        else:
            raise ValueError("unknown op %s" % op)
    for i in script.asserts:
        cb.add_clause(bits[i])
    return cb, var_bits


def to_dimacs(cb: CnfBuilder) -> str:
    lines = ["p cnf %d %d" % (cb.nvars, len(cb.clauses))]
    for cl in cb.clauses:
        lines.append(" ".join(str(x) for x in cl) + " 0")
    return "\n".join(lines) + "\n"
