"""Bounded-cost constraint models over the weight family.

A model asks: is there a weight assignment whose multiplication count is at
most a given budget?  Variables are rotation residues, by default one per
sibling pair (both nodes of a bottom pair carry the same weight) and reduced
mod n/4 (quadrants never change a rotation's grade).  In that default
encoding every node's two outgoing rotations agree mod n/4, so each node
contributes a single graded leaf and the conjugate discount never fires;
the general encoding keeps two rotations per node and the full pairing rule.

All costs are even, so the model sums half-costs: leaves are 0, 2, 3 (and 4
for a conjugate pair) and the budget is floor(bound/2).  Three summation
shapes are available: binary adder trees ("balanced", "by_subtree") and a
truncated sorted-unary counter ("totalizer").  The counter costs more
clauses but propagates the bound much harder, which is what large budget
questions need.

Emitted scripts are plain QF_BV over add/sub/extract/ite with #b constants,
solvable by the bundled back end or any SMT-LIB solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fftfam.cost import cost_member
from fftfam.family import Member, derive_twiddles
from fftfam.flowgraph import Flowgraph
from fftfam.smtexpr import Ctx, Expr, Script, evaluate


@dataclass(frozen=True)
class ModelOptions:
    shared_twiddles: bool = True
    psi_only: bool = True
    sym_3node: bool = False
    sym_equal_pair: bool = False
    conjugate_pairs_required: bool = False
    allowed_twiddles: tuple[int, ...] | None = None
    free_twiddle_slots: int = 0
    cap_partial_sums: bool = True
    adder_tree: str = "balanced"

    def validate(self, n: int) -> None:
        if n < 8:
            raise ValueError("constraint models need n >= 8; enumerate instead")
        if self.adder_tree not in ("balanced", "by_subtree", "totalizer"):
            raise ValueError(
                "adder_tree must be 'balanced', 'by_subtree' or 'totalizer'")
        needs_shared = (self.sym_3node or self.sym_equal_pair
                        or self.conjugate_pairs_required)
        if needs_shared and not self.shared_twiddles:
            raise ValueError("pair constraints require shared_twiddles")
        if self.allowed_twiddles is not None and self.free_twiddle_slots:
            raise ValueError("allowed_twiddles and free_twiddle_slots conflict")
        if self.allowed_twiddles is not None:
            for s in self.allowed_twiddles:
                if not 0 < s < n // 4:
                    raise ValueError("allowed residue %d out of range" % s)


def psi_width(n: int) -> int:
    return n.bit_length() - 3


def _var_name(fg: Flowgraph, node_id: int) -> str:
    s, b, w = fg.nodes[node_id].label
    return "Wb_%d_%d_%d" % (s, b, w)


class _Summer:
    """Width-minimal accumulation with optional partial-sum capping.

    Capping is a pure strengthening: costs are non-negative, so every
    partial sum of a within-budget assignment is itself within budget.
    """

    def __init__(self, ctx: Ctx, script: Script, cap: int | None):
        self.ctx = ctx
        self.script = script
        self.cap = cap

    def add(self, a: tuple[Expr, int], b: tuple[Expr, int]) -> tuple[Expr, int]:
        ea, ma = a
        eb, mb = b
        top = ma + mb
        w = max(top.bit_length(), ea.width, eb.width, 1)
        s = self.ctx.add(self.ctx.zext(ea, w - ea.width),
                         self.ctx.zext(eb, w - eb.width))
        if self.cap is not None and top > self.cap:
            self.script.assert_(s.ule(self.ctx.const(self.cap, w)))
            top = self.cap
        return s, top

    def balanced(self, items: list[tuple[Expr, int]]) -> tuple[Expr, int]:
        if not items:
            return self.ctx.const(0, 1), 0
        while len(items) > 1:
            nxt = [self.add(items[i], items[i + 1])
                   for i in range(0, len(items) - 1, 2)]
            if len(items) % 2:
                nxt.append(items[-1])
            items = nxt
        return items[0]


def _unary_of_bv(ctx: Ctx, e: Expr, top: int) -> list[Expr]:
    """Threshold bits [e >= 1, ..., e >= top], a sorted unary view of e."""
    w = e.width
    return [ctx.not_(ctx.ule(e, ctx.const(k - 1, w))) for k in range(1, top + 1)]


def _unary_merge(ctx: Ctx, u: list[Expr], v: list[Expr],
                 limit: int) -> list[Expr]:
    """Merge two sorted unary counters, keeping at most limit+1 bits.

    Bit k-1 of the result means "sum >= k".  With both inputs sorted the
    plain diagonal disjunction stays exact even after truncation: any pair
    witnessing sum >= k can be slid down to a pair on the k diagonal.
    """
    out = []
    for k in range(1, min(len(u) + len(v), limit + 1) + 1):
        terms = []
        for i in range(max(0, k - len(v)), min(k, len(u)) + 1):
            j = k - i
            if i == 0:
                terms.append(v[j - 1])
            elif j == 0:
                terms.append(u[i - 1])
            else:
                terms.append(ctx.and_(u[i - 1], v[j - 1]))
        out.append(ctx.or_(*terms))
    return out


def _unary_budget(ctx: Ctx, script: Script, vecs: list[list[Expr]],
                  budget: int) -> None:
    """Assert that the summed counters stay within budget.

    Every counter, input or merged, is clipped to budget bits right away:
    its budget+1 bit is asserted false and dropped.  That plants the bound
    at every level of the tree instead of only at the root.
    """
    def clip(v: list[Expr]) -> list[Expr]:
        if len(v) > budget:
            script.assert_(ctx.not_(v[budget]))
            del v[budget:]
        return v

    vecs = [clip(v) for v in vecs]
    while len(vecs) > 1:
        nxt = [clip(_unary_merge(ctx, vecs[i], vecs[i + 1], budget))
               for i in range(0, len(vecs) - 1, 2)]
        if len(vecs) % 2:
            nxt.append(vecs[-1])
        vecs = nxt
    script.assert_(ctx.true())


class BoundModel:
    """A rendered budget question plus enough structure to decode answers."""

    def __init__(self, fg: Flowgraph, mult_bound: int, opts: ModelOptions,
                 ctx: Ctx, script: Script, var_names: list[str],
                 eval_terms: list[tuple[Expr, int]]):
        self.fg = fg
        self.n = fg.n
        self.mult_bound = mult_bound
        self.opts = opts
        self.ctx = ctx
        self.script = script
        self.var_names = var_names
        self.eval_terms = eval_terms

    def to_smt2(self) -> str:
        return self.script.to_smt2()

    def eval_mult(self, values: dict[str, int]) -> int:
        vals = evaluate(self.ctx, [e for e, _ in self.eval_terms], values)
        return 2 * sum(w * v for (_, w), v in zip(self.eval_terms, vals))

    def decode(self, values: dict[str, int], seed: int = 0) -> Member:
        """Lift solver values to a full member; recount and cross-check."""
        fg = self.fg
        n = self.n
        q = n // 4
        rng = np.random.default_rng(seed)
        wb = [0] * len(fg.nodes)
        if self.opts.shared_twiddles:
            for pr in fg.pairs:
                v = values[_var_name(fg, pr.a)]
                if self.opts.psi_only:
                    v += q * int(rng.integers(0, 4))
                wb[pr.a] = wb[pr.b] = v % n
        else:
            for nd in fg.nodes:
                if nd.row == 0:
                    continue
                v = values[_var_name(fg, nd.id)]
                if self.opts.psi_only:
                    v += q * int(rng.integers(0, 4))
                wb[nd.id] = v % n
        member = derive_twiddles(fg, wb, {
            "kind": "decoded",
            "mult_bound": self.mult_bound,
            "quadrant_seed": seed,
        })
        claimed = self.eval_mult(values)
        recount = cost_member(member).mult
        if recount != claimed:
            raise RuntimeError(
                "decode mismatch: model claims %d multiplications, member "
                "recounts %d" % (claimed, recount))
        if recount > self.mult_bound:
            raise RuntimeError("decoded member exceeds the budget")
        return member


def build_bound_model(fg: Flowgraph, mult_bound: int,
                      opts: ModelOptions = ModelOptions()) -> BoundModel:
    n = fg.n
    opts.validate(n)
    if mult_bound < 0:
        raise ValueError("negative budget")
    m = fg.m
    q = n // 4
    wv = psi_width(n) if opts.psi_only else m
    ctx = Ctx()
    script = Script(ctx)
    zero = ctx.const(0, wv)
    n8 = ctx.const(n // 8 % (1 << wv), wv)
    wpsi = psi_width(n)

    def psi(x: int) -> int:
        return x % q if opts.psi_only else x % n

    def proj(t: Expr) -> Expr:
        # The rotation's grading residue.
        return t if opts.psi_only else ctx.extract(t, wpsi - 1, 0)

    def c0(t: Expr) -> Expr:
        return proj(t).eq(ctx.const(0, wpsi) if not opts.psi_only else zero)

    def c4(t: Expr) -> Expr:
        return proj(t).eq(ctx.const(n // 8, wpsi) if not opts.psi_only else n8)

    def c6(t: Expr) -> Expr:
        return ctx.and_(ctx.not_(c0(t)), ctx.not_(c4(t)))

    def half_leaf(t: Expr) -> Expr:
        two = ctx.const(2, 2)
        three = ctx.const(3, 2)
        return ctx.ite(c0(t), ctx.const(0, 2), ctx.ite(c4(t), two, three))

    # Weight expression per node.
    var_names: list[str] = []
    wexpr: list[Expr] = [None] * len(fg.nodes)
    zero_w = ctx.const(0, wv)
    if opts.shared_twiddles:
        for pr in fg.pairs:
            v = ctx.var(_var_name(fg, pr.a), wv)
            if ctx.name_of(v) not in var_names:
                var_names.append(ctx.name_of(v))
            wexpr[pr.a] = v
            wexpr[pr.b] = v
    else:
        for nd in fg.nodes:
            if nd.row > 0:
                v = ctx.var(_var_name(fg, nd.id), wv)
                var_names.append(ctx.name_of(v))
                wexpr[nd.id] = v
    for i in fg.rows[0]:
        wexpr[i] = zero_w

    # Counted rotations.  node_t holds each node's left-edge rotation (its
    # only one, in the shared encoding); node_tr the right edge when kept.
    node_t: list[Expr] = [None] * len(fg.nodes)
    node_tr: list[Expr | None] = [None] * len(fg.nodes)
    for nd in fg.nodes:
        if nd.lc is None:
            node_t[nd.id] = ctx.sub(zero_w, wexpr[nd.id])
            continue
        lc = fg.nodes[nd.lc]
        rc = fg.nodes[nd.rc]
        lp_role = lc.lp == nd.id
        adj_l = 0 if lp_role else psi(lc.ws)
        adj_r = 0 if lp_role else psi(rc.ws)
        tl = ctx.sub(ctx.add(wexpr[nd.lc], ctx.const(adj_l, wv)), wexpr[nd.id])
        node_t[nd.id] = tl
        if opts.shared_twiddles and opts.psi_only:
            continue
        tr = ctx.sub(ctx.add(wexpr[nd.rc], ctx.const(adj_r, wv)), wexpr[nd.id])
        node_tr[nd.id] = tr

    # Cost leaves.  The counter encoding keeps them as sorted unary bit
    # lists (half-cost 0/2/3 becomes [g, g, s] for graded g and sharp s);
    # the adder encodings keep (expr, max value) pairs in half-flops.
    reduced = opts.shared_twiddles and opts.psi_only
    unary = opts.adder_tree == "totalizer"
    summands: list[tuple[Expr, int, int]] = []
    uvecs: list[list[Expr]] = []
    uterms: list[tuple[Expr, int]] = []
    folded_away: set[int] = set()
    if reduced:
        # Row-0 siblings and terminal pairs share their rotation expression;
        # count it once, doubled.
        for j in range(n // 2):
            folded_away.add(j + n // 2)
        for pr in fg.pairs:
            if fg.nodes[pr.a].row == m:
                folded_away.add(pr.b)

    def unary_single(t: Expr, d: int) -> None:
        g = ctx.not_(c0(t))
        s = c6(t)
        uvecs.append([g] * 2 * d + [s] * d)
        uterms.append((g, 2 * d))
        uterms.append((s, d))

    for nd in fg.nodes:
        i = nd.id
        if reduced:
            if i in folded_away:
                continue
            d = 2 if (nd.row == 0 or nd.row == m) else 1
            if unary:
                unary_single(node_t[i], d)
            elif d == 2:
                leaf = half_leaf(node_t[i])
                summands.append((ctx.concat(leaf, ctx.const(0, 1)), 6, i))
            else:
                summands.append((ctx.zext(half_leaf(node_t[i]), 1), 3, i))
            continue
        if node_tr[i] is None:
            if unary:
                unary_single(node_t[i], 1)
            else:
                summands.append((ctx.zext(half_leaf(node_t[i]), 1), 3, i))
            continue
        tl, tr = node_t[i], node_tr[i]
        pl, pr_ = proj(tl), proj(tr)
        shared = pl.eq(pr_)
        conj = ctx.and_(ctx.add(pl, pr_).eq(ctx.const(0, wpsi) if not
                                            opts.psi_only else zero),
                        c6(tl), c6(tr))
        both = ctx.add(ctx.zext(half_leaf(tl), 1), ctx.zext(half_leaf(tr), 1))
        cost = ctx.ite(shared, ctx.zext(half_leaf(tl), 1),
                       ctx.ite(conj, ctx.const(4, 3), both))
        if unary:
            bits = _unary_of_bv(ctx, cost, 6)
            uvecs.append(bits)
            uterms.extend((b, 1) for b in bits)
        else:
            summands.append((cost, 6, i))

    # Optional structural constraints, stated on pair neighborhoods.
    if opts.sym_3node or opts.sym_equal_pair or opts.conjugate_pairs_required:
        for pr in fg.pairs:
            n00, n01, n10, n11 = pr.lp, pr.rp, pr.a, pr.b
            if opts.sym_3node:
                others = [(n00, n01), (n00, n11), (n01, n11)]
                two_more = ctx.or_(*[ctx.and_(c6(node_t[x]), c6(node_t[y]))
                                     for x, y in others])
                script.assert_(ctx.not_(ctx.and_(c6(node_t[n10]), two_more)))
            if opts.sym_equal_pair:
                same = proj(node_t[n10]).eq(proj(node_t[n11]))
                script.assert_(ctx.not_(ctx.and_(ctx.not_(c0(node_t[n10])),
                                                 same)))
            if opts.conjugate_pairs_required:
                z = ctx.const(0, wpsi) if not opts.psi_only else zero
                top = ctx.add(proj(node_t[n00]), proj(node_t[n01])).eq(z)
                bot = ctx.add(proj(node_t[n10]), proj(node_t[n11])).eq(z)
                script.assert_(ctx.or_(top, bot))

    # Residue whitelists.
    whitelist: list[Expr] | None = None
    if opts.allowed_twiddles is not None:
        whitelist = [ctx.const(s, wpsi) for s in opts.allowed_twiddles]
    elif opts.free_twiddle_slots:
        whitelist = []
        prev = None
        for k in range(opts.free_twiddle_slots):
            s = ctx.var("slot%d" % (k + 1), wpsi)
            var_names.append("slot%d" % (k + 1))
            script.assert_(ctx.not_(s.eq(ctx.const(0, wpsi))))
            if prev is not None:
                script.assert_(ctx.and_(prev.ule(s),
                                        ctx.not_(prev.eq(s))))
            whitelist.append(s)
            prev = s
    if whitelist is not None:
        seen: set[int] = set()
        zp = ctx.const(0, wpsi)
        for i in range(len(fg.nodes)):
            for t in (node_t[i], node_tr[i]):
                if t is None or t.id in seen:
                    continue
                seen.add(t.id)
                p = proj(t)
                script.assert_(ctx.or_(p.eq(zp),
                                       *[p.eq(s) for s in whitelist]))

    # Total and budget.
    budget = mult_bound // 2
    if unary:
        _unary_budget(ctx, script, uvecs, budget)
        eval_terms = uterms
    else:
        cap = budget if opts.cap_partial_sums else None
        summer = _Summer(ctx, script, cap)
        if opts.adder_tree == "balanced":
            half_total, top = summer.balanced(
                [(e, mx) for e, mx, _ in summands])
        else:
            by_node = {i: (e, mx) for e, mx, i in summands}

            def subtree(r: int, bi: int) -> list[tuple[Expr, int]]:
                own = [by_node[i] for i in fg.blocks[r][bi][2] if i in by_node]
                if r < m:
                    parts = [summer.balanced(subtree(r + 1, 2 * bi)
                                             + subtree(r + 1, 2 * bi + 1))]
                else:
                    parts = []
                return own + parts

            half_total, top = summer.balanced(subtree(0, 0))
        wtot = half_total.width
        if budget >= (1 << wtot):
            script.assert_(ctx.true())
        else:
            script.assert_(half_total.ule(ctx.const(budget, wtot)))
        eval_terms = [(half_total, 1)]

    model = BoundModel(fg, mult_bound, opts, ctx, script, var_names, eval_terms)
    for name in var_names:
        script.model_vars.append(name)
    return model


MITER_THEOREMS = ("shared_twiddles", "original_butterfly",
                  "terminal_butterfly")


class MiterModel:
    """A can-one-side-ever-win question between two butterfly forms."""

    def __init__(self, n: int, theorem: str, ctx: Ctx, script: Script,
                 var_names: list[str]):
        self.n = n
        self.theorem = theorem
        self.ctx = ctx
        self.script = script
        self.var_names = var_names

    def to_smt2(self) -> str:
        return self.script.to_smt2()


def emit_theorem_miter(n: int, theorem: str,
                       allow_tie: bool = False) -> MiterModel:
    """Build the refutation model for one of the rewrite guarantees.

    Each model pits a fully general butterfly (bf1) against the rewritten
    form the reduction relies on (bf2) and asks for an assignment where
    bf1 is strictly cheaper (with allow_tie, at most as expensive; ties
    exist, so that variant doubles as a sanity check on the encoding).
    Unsatisfiable means the rewrite never loses, so the corresponding
    model reduction is cost-free:

    - shared_twiddles: a two-input butterfly with separate left/right
      rotations per input against the three single-rotation variants that
      pin the rewritten input rotation to 0, the left or the right one.
    - original_butterfly: a size-4 butterfly fed by raw inputs against
      rotating each of its four outputs once, directly.
    - terminal_butterfly: a size-4 butterfly producing final outputs
      against rotating each of its four inputs once, directly.
    """
    for full in MITER_THEOREMS:
        if theorem == full or full.startswith(theorem):
            theorem = full
            break
    else:
        raise ValueError("theorem must be one of %s" % (MITER_THEOREMS,))
    if n < 8 or n & (n - 1):
        raise ValueError("miters need a power of two, n >= 8")

    q = n // 4
    wv = psi_width(n)
    ctx = Ctx()
    script = Script(ctx)
    zero = ctx.const(0, wv)
    n8 = ctx.const(n // 8 % q, wv)
    var_names: list[str] = []

    def var(name: str) -> Expr:
        # "m" prefix keeps the names clear of the t<N> gensym space, so
        # the textual form round-trips through the reader unambiguously.
        name = "m" + name
        var_names.append(name)
        return ctx.var(name, wv)

    def c6(t: Expr) -> Expr:
        return ctx.and_(ctx.not_(t.eq(zero)), ctx.not_(t.eq(n8)))

    def cls(t: Expr) -> tuple[Expr, int]:
        e = ctx.ite(t.eq(zero), ctx.const(0, 3),
                    ctx.ite(t.eq(n8), ctx.const(4, 3), ctx.const(6, 3)))
        return e, 6

    def pair_cost(l: Expr, r: Expr) -> tuple[Expr, int]:
        # One node's two rotations under the full pairing rule.
        el, _ = cls(l)
        er, _ = cls(r)
        shared = l.eq(r)
        conj = ctx.and_(ctx.add(l, r).eq(zero), c6(l), c6(r))
        both = ctx.add(ctx.zext(el, 1), ctx.zext(er, 1))
        return ctx.ite(shared, ctx.zext(el, 1),
                       ctx.ite(conj, ctx.const(8, 4), both)), 12

    def add(*es: Expr) -> Expr:
        out = es[0]
        for e in es[1:]:
            out = ctx.add(out, e)
        return out

    def sub(a: Expr, b: Expr) -> Expr:
        return ctx.sub(a, b)

    summer = _Summer(ctx, script, None)

    def cheaper(bf1: tuple[Expr, int], bf2: tuple[Expr, int]) -> Expr:
        e1, e2 = bf1[0], bf2[0]
        w = max(e1.width, e2.width)
        e1 = ctx.zext(e1, w - e1.width)
        e2 = ctx.zext(e2, w - e2.width)
        return e1.ule(e2) if allow_tie else ctx.not_(e2.ule(e1))

    if theorem == "shared_twiddles":
        wb0, wb1, ws1 = var("wb0"), var("wb1"), var("ws1")
        w10, w11 = var("w10"), var("w11")
        t10, t11 = var("t10"), var("t11")
        bf1 = summer.balanced([
            pair_cost(sub(w10, wb0), sub(w11, wb0)),
            pair_cost(sub(add(w10, ws1), wb1), sub(add(w11, ws1), wb1)),
            cls(t10), cls(t11),
        ])
        wins = []
        for w1p in (wb0, w10, w11):
            bf2 = summer.balanced([
                cls(sub(w1p, wb0)),
                cls(sub(add(w1p, ws1), wb1)),
                cls(sub(add(w10, t10), w1p)),
                cls(sub(add(w11, t11), w1p)),
            ])
            wins.append(cheaper(bf1, bf2))
        script.assert_(ctx.and_(*wins))
    else:
        # The size-4 butterfly: inputs 0..3, middle pairs (10, 11) over
        # inputs (0, 2) and (13, 14) over (1, 3), output pairs (20, 21)
        # over middles (10, 11) and (23, 24) over (13, 14).  A path's
        # rotations sum with -ws1 behind a right-edge input and -ws2
        # behind a right-edge middle.
        if theorem == "original_butterfly":
            t00, t01 = var("t00"), var("t01")
            t02, t03 = t00, t01
            mids = {k: var("t1%d" % k) for k in (0, 1, 3, 4)}
            outs = {k: var("t2%d" % k) for k in (0, 1, 3, 4)}
            script.assert_(add(mids[0], t00).eq(add(mids[1], t01)))
            script.assert_(add(mids[3], t00).eq(add(mids[4], t01)))
            bf1 = summer.balanced(
                [cls(t) for t in (t00, t01, t02, t03)]
                + [cls(t) for t in mids.values()]
                + [cls(t) for t in outs.values()])
            bf2 = summer.balanced([
                cls(add(outs[k], mids[mk], t00))
                for k, mk in ((0, 0), (1, 0), (3, 3), (4, 3))
            ])
            script.assert_(cheaper(bf1, bf2))
        else:
            wb = [var("wb%d" % c) for c in range(4)]
            ws1, ws2 = var("ws1"), var("ws2")
            tin = [var("t0%d" % c) for c in range(4)]
            mids = {k: var("t1%d" % k) for k in (0, 1, 3, 4)}
            outs = {k: var("t2%d" % k) for k in (0, 1, 3, 4)}
            for k, (ml, mr) in ((0, (0, 1)), (1, (0, 1)),
                                (3, (3, 4)), (4, (3, 4))):
                arrive = outs[k]
                paths = [
                    add(arrive, mids[ml], tin[0], wb[0]),
                    sub(add(arrive, mids[ml], tin[2], wb[2]), ws1),
                    sub(add(arrive, mids[mr], tin[1], wb[1]), ws2),
                    sub(add(arrive, mids[mr], tin[3], wb[3]),
                        add(ws1, ws2)),
                ]
                for p in paths:
                    script.assert_(p.eq(zero))
            bf1 = summer.balanced(
                [cls(t) for t in tin]
                + [cls(t) for t in mids.values()]
                + [cls(t) for t in outs.values()])
            bf2 = summer.balanced([
                cls(sub(zero, wb[0])),
                cls(sub(ws1, wb[2])),
                cls(sub(ws2, wb[1])),
                cls(sub(add(ws1, ws2), wb[3])),
            ])
            script.assert_(cheaper(bf1, bf2))

    model = MiterModel(n, theorem, ctx, script, var_names)
    for name in var_names:
        script.model_vars.append(name)
    return model
