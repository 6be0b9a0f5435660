"""Decomposition of a budget question into independent per-region models.

The first two and last two rows of the graph can always be made cost-free
(the miter models prove both rewrites), and the lineage of the w = 0 and
w = n/2 blocks extends that: every spine edge has a grading-free stride,
so weight 0 (mod n/4) can be delivered to the roots of each w = n/4 and
w = 3n/4 block subtree without spending anything.  Those subtrees are the
regions.  They share no weight variables, so the family minimum splits
into a sum of per-region minima plus one fixed "shell" corner, the two
grade-4 rotations feeding the size-2 regions (8 flops for every n >= 16).

A region of size s spans rows r0 = log2(n/s) .. m.  Its root-row weights
are the delivered zeros, its last two rows are pinned by output
consistency (terminal pairs 0; next-to-last pairs 0 or psi(w/4) by
position), and everything between is free.  Regions of size 16 and up
become bounded-cost models like the monolithic ones; size 8 splits into
four independent single-variable terms and is enumerated; size 4 has no
free weights at all and always costs 16.

Sibling regions are mirror images (w -> n - w, weights negated), so only
the w = n/4 representative is solved and the sibling's witness is decoded
through the mirror map.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from fftfam.backsolver import run_solver
from fftfam.cost import cost_member, twiddle_class
from fftfam.family import Member, derive_twiddles
from fftfam.flowgraph import Flowgraph
from fftfam.smtexpr import Ctx, Expr, Script, evaluate
from fftfam.smtgen import ModelOptions, _Summer, _unary_budget, psi_width

SHELL_MULT = 8


@dataclass(frozen=True)
class Region:
    name: str
    size: int
    w: int
    row: int
    kind: str          # "model", "enumerated" or "forced"
    multiplicity: int = 2


@dataclass
class PartitionPlan:
    n: int
    regions: list[Region]
    shell_mult: int = SHELL_MULT

    def to_obj(self) -> dict:
        return {
            "n": self.n,
            "regions": [vars(r) for r in self.regions],
            "shell": {"name": "shell", "mult": self.shell_mult},
        }

    def by_name(self, name: str) -> Region:
        for r in self.regions:
            if r.name == name:
                return r
        raise KeyError("no region named %r" % name)


def enumerate_partitions(fg: Flowgraph) -> PartitionPlan:
    n = fg.n
    if n < 16:
        raise ValueError("partitioning needs n >= 16")
    regions = []
    s = n // 4
    while s >= 4:
        kind = "model" if s >= 16 else ("enumerated" if s == 8 else "forced")
        regions.append(Region(name="x%d-i" % s, size=s, w=n // 4,
                              row=(n // s).bit_length() - 1, kind=kind))
        s //= 2
    return PartitionPlan(n=n, regions=regions)


# -- region geometry ----------------------------------------------------------


def _block_pos(fg: Flowgraph):
    """node id -> (row, block w, position inside the block)."""
    out = {}
    for r, row in enumerate(fg.blocks):
        for _, w, ids in row:
            for j, i in enumerate(ids):
                out[i] = (r, w, j)
    return out


def region_node_ids(fg: Flowgraph, region: Region) -> list[int]:
    n = fg.n
    out = []
    for r in range(region.row, fg.m + 1):
        shift = r - region.row
        for i in fg.rows[r]:
            if (fg.nodes[i].ws << shift) % n == region.w:
                out.append(i)
    return out


def _forced_pair_psi(fg: Flowgraph, pr, pos_of) -> int | None:
    """The pinned value of a bottom-two-row pair, None when the pair is free."""
    q = fg.n // 4
    row = pos_of[pr.a][0]
    if row == fg.m:
        return 0
    if row == fg.m - 1:
        j = pos_of[pr.a][2]
        w4 = fg.nodes[pr.lp].ws
        return 0 if j == 0 else (w4 // 4) % q


# -- concrete regional cost ---------------------------------------------------


def _pair_by_member(fg: Flowgraph):
    out = {}
    for k, pr in enumerate(fg.pairs):
        out[pr.a] = k
        out[pr.b] = k
    return out


def region_cost(fg: Flowgraph, region: Region,
                assign: dict[int, int]) -> int:
    """Recount a region's multiplication flops from free-pair psi values.

    `assign` maps each free pair's a-node id to its residue; root-row
    weights are 0 and the bottom two rows take their pinned values.
    """
    n = fg.n
    q = n // 4
    pos_of = _block_pos(fg)
    member_pair = _pair_by_member(fg)

    def value(i: int) -> int:
        if pos_of[i][0] == region.row:
            return 0
        pr = fg.pairs[member_pair[i]]
        forced = _forced_pair_psi(fg, pr, pos_of)
        return forced if forced is not None else assign[pr.a]

    total = 0
    for i in region_node_ids(fg, region):
        nd = fg.nodes[i]
        if nd.row == fg.m:
            continue
        lc = fg.nodes[nd.lc]
        adj = 0 if lc.lp == i else lc.ws % q
        t = (value(nd.lc) + adj - value(i)) % q
        total += twiddle_class(t, n)
    return total


# -- region models ------------------------------------------------------------


class RegionModel:
    def __init__(self, fg, region, mult_bound, ctx, script, var_names,
                 var_pairs, eval_terms):
        self.fg = fg
        self.region = region
        self.mult_bound = mult_bound
        self.ctx = ctx
        self.script = script
        self.var_names = var_names
        self.var_pairs = var_pairs
        self.eval_terms = eval_terms

    def to_smt2(self) -> str:
        return self.script.to_smt2()

    def eval_mult(self, values: dict[str, int]) -> int:
        vals = evaluate(self.ctx, [e for e, _ in self.eval_terms], values)
        return 2 * sum(w * v for (_, w), v in zip(self.eval_terms, vals))

    def decode(self, values: dict[str, int]) -> dict[int, int]:
        assign = {a: values[name] for name, a in self.var_pairs.items()}
        recount = region_cost(self.fg, self.region, assign)
        if recount != self.eval_mult(values):
            raise RuntimeError("region decode mismatch")
        if recount > self.mult_bound:
            raise RuntimeError("decoded region exceeds the budget")
        return assign


def build_region_model(fg: Flowgraph, region: Region, mult_bound: int,
                       opts: ModelOptions = ModelOptions(
                           adder_tree="totalizer")) -> RegionModel:
    if mult_bound < 0:
        raise ValueError("negative budget")
    n = fg.n
    q = n // 4
    wv = psi_width(n)
    pos_of = _block_pos(fg)
    member_pair = _pair_by_member(fg)
    ids = region_node_ids(fg, region)
    inside = set(ids)

    ctx = Ctx()
    script = Script(ctx)
    zero = ctx.const(0, wv)
    n8 = ctx.const(n // 8 % q, wv)
    var_names: list[str] = []
    var_pairs: dict[str, int] = {}

    wexpr: dict[int, Expr] = {}
    for i in ids:
        if pos_of[i][0] == region.row:
            wexpr[i] = zero
            continue
        pr = fg.pairs[member_pair[i]]
        forced = _forced_pair_psi(fg, pr, pos_of)
        if forced is not None:
            wexpr[i] = ctx.const(forced, wv)
            continue
        s, b, w = fg.nodes[pr.a].label
        name = "Wb_%d_%d_%d" % (s, b, w)
        if name not in var_pairs:
            var_names.append(name)
            var_pairs[name] = pr.a
        wexpr[i] = ctx.var(name, wv)

    def c0(t: Expr) -> Expr:
        return t.eq(zero)

    def c6(t: Expr) -> Expr:
        return ctx.and_(ctx.not_(c0(t)), ctx.not_(t.eq(n8)))

    unary = opts.adder_tree == "totalizer"
    uvecs: list[list[Expr]] = []
    eval_terms: list[tuple[Expr, int]] = []
    summands: list[tuple[Expr, int]] = []
    for i in ids:
        nd = fg.nodes[i]
        if nd.row == fg.m:
            continue
        lc = fg.nodes[nd.lc]
        adj = 0 if lc.lp == i else lc.ws % q
        t = ctx.sub(ctx.add(wexpr[nd.lc], ctx.const(adj, wv)), wexpr[i])
        if unary:
            g = ctx.not_(c0(t))
            sharp = c6(t)
            uvecs.append([g, g, sharp])
            eval_terms.append((g, 2))
            eval_terms.append((sharp, 1))
        else:
            leaf = ctx.ite(c0(t), ctx.const(0, 2),
                           ctx.ite(t.eq(n8), ctx.const(2, 2),
                                   ctx.const(3, 2)))
            summands.append((ctx.zext(leaf, 1), 3))

    budget = mult_bound // 2
    if unary:
        _unary_budget(ctx, script, uvecs, budget)
    else:
        summer = _Summer(ctx, script, budget if opts.cap_partial_sums
                         else None)
        half_total, _ = summer.balanced(summands)
        if budget >= (1 << half_total.width):
            script.assert_(ctx.true())
        else:
            script.assert_(half_total.ule(
                ctx.const(budget, half_total.width)))
        eval_terms = [(half_total, 1)]

    model = RegionModel(fg, region, mult_bound, ctx, script, var_names,
                        var_pairs, eval_terms)
    for name in var_names:
        script.model_vars.append(name)
    return model


# -- per-size solving ---------------------------------------------------------


def _free_pairs(fg: Flowgraph, region: Region) -> list[int]:
    pos_of = _block_pos(fg)
    member_pair = _pair_by_member(fg)
    out = []
    seen = set()
    for i in region_node_ids(fg, region):
        if pos_of[i][0] == region.row:
            continue
        pr = fg.pairs[member_pair[i]]
        if pr.a in seen or _forced_pair_psi(fg, pr, pos_of) is not None:
            continue
        seen.add(pr.a)
        out.append(pr.a)
    return out


def _enumerate_region8(fg: Flowgraph, region: Region) -> tuple[int, dict]:
    # The four free pairs touch disjoint node sets, so each residue can be
    # minimized on its own against the cost delta it induces.
    q = fg.n // 4
    frees = _free_pairs(fg, region)
    assign = {a: 0 for a in frees}
    base = {a: 0 for a in frees}
    for a in frees:
        best, best_v = None, 0
        for v in range(q):
            trial = dict(base)
            trial[a] = v
            c = region_cost(fg, region, trial)
            if best is None or c < best:
                best, best_v = c, v
        assign[a] = best_v
    zero_cost = region_cost(fg, region, base)
    parts = []
    for a in frees:
        trial = dict(base)
        trial[a] = assign[a]
        parts.append(region_cost(fg, region, trial) - zero_cost)
    total = zero_cost + sum(parts)
    if total != region_cost(fg, region, assign):
        raise RuntimeError("separability broke for %s" % region.name)
    return total, assign


def solve_region_min(fg: Flowgraph, region: Region,
                     opts: ModelOptions = ModelOptions(
                         adder_tree="totalizer"),
                     solver_cmd: str | None = None,
                     probe_timeout: float | None = None,
                     log=None) -> tuple[int, dict, bool, list]:
    """Minimize one region.  Returns (mult, assignment, proven, probes)."""
    from fftfam.search import Probe

    if region.kind == "forced":
        mult = region_cost(fg, region, {})
        return mult, {}, True, []
    if region.kind == "enumerated":
        mult, assign = _enumerate_region8(fg, region)
        return mult, assign, True, []

    zeros = {a: 0 for a in _free_pairs(fg, region)}
    hi = region_cost(fg, region, zeros)
    witness = zeros
    lo, proven_lo = 0, 0
    probes: list[Probe] = []
    while lo < hi:
        p = (lo + hi) // 2
        budget = p // 2
        cached = log.lookup(region.name, budget) if log else None
        if cached is not None:
            verdict, wobj = cached
            dt = 0.0
            assign = ({int(k): v for k, v in wobj.items()}
                      if wobj else None)
        else:
            model = build_region_model(fg, region, p, opts)
            t0 = time.perf_counter()
            verdict, values = run_solver(model.to_smt2(), solver_cmd,
                                         probe_timeout)
            dt = time.perf_counter() - t0
            assign = model.decode(values) if verdict == "sat" else None
            if log:
                log.record(region.name, budget, p, verdict, dt,
                           {str(k): v for k, v in assign.items()}
                           if assign else None)
        pr = Probe(bound=p, verdict=verdict, seconds=dt)
        if verdict == "sat":
            witness = assign
            pr.witness_mult = region_cost(fg, region, assign)
            hi = pr.witness_mult
        else:
            lo = 2 * (p // 2) + 2
            if verdict == "unsat":
                proven_lo = max(proven_lo, lo)
            else:
                pr.genuine = False
        probes.append(pr)
    return hi, witness, proven_lo >= hi, probes


# -- sibling mirroring and witness assembly -----------------------------------


def mirror_assignment(fg: Flowgraph, assign: dict[int, int]) -> dict[int, int]:
    """Map a region's free-pair residues onto its w -> n-w sibling.

    Mirroring a parent block swaps its two child blocks, so the sibling
    pair's first member sits at the mirror of the original pair's second
    member: block w maps to n/2 - w, position is kept, weights negate.
    """
    n = fg.n
    q = n // 4
    pos_of = _block_pos(fg)
    ids_at = {}
    for r, row in enumerate(fg.blocks):
        for _, w, ids in row:
            ids_at[(r, w)] = ids
    out = {}
    for a, v in assign.items():
        r, w, j = pos_of[a]
        out[ids_at[(r, (n // 2 - w) % n)][j]] = (q - v) % q
    return out


def assemble_member(fg: Flowgraph, plan: PartitionPlan,
                    solutions: dict[str, dict[int, int]],
                    seed: int = 0) -> Member:
    """Stitch per-region residues into a full member and cross-check it."""
    n = fg.n
    q = n // 4
    pos_of = _block_pos(fg)
    rng = np.random.default_rng(seed)

    psi_pair: dict[int, int] = {}
    for pr in fg.pairs:
        forced = _forced_pair_psi(fg, pr, pos_of)
        psi_pair[pr.a] = forced if forced is not None else 0
    for region in plan.regions:
        rep = solutions[region.name]
        for a, v in rep.items():
            psi_pair[a] = v % q
        for a, v in mirror_assignment(fg, rep).items():
            psi_pair[a] = v % q

    wb = [0] * len(fg.nodes)
    for pr in fg.pairs:
        v = psi_pair[pr.a] + q * int(rng.integers(0, 4))
        wb[pr.a] = wb[pr.b] = v % n
    member = derive_twiddles(fg, wb, {
        "kind": "partitioned",
        "quadrant_seed": seed,
    })
    expected = plan.shell_mult + 2 * sum(
        region_cost(fg, r, solutions[r.name]) for r in plan.regions)
    recount = cost_member(member).mult
    if recount != expected:
        raise RuntimeError(
            "assembled member recounts %d multiplications, regions plus "
            "shell say %d" % (recount, expected))
    return member


# -- the partitioned search ---------------------------------------------------


def search_partitioned(fg: Flowgraph,
                       opts: ModelOptions = ModelOptions(
                           adder_tree="totalizer"),
                       solver_cmd: str | None = None,
                       probe_timeout: float | None = None,
                       log=None, jobs: int = 1):
    from fftfam.search import SearchResult, addition_count

    plan = enumerate_partitions(fg)

    def solve(region):
        return region, solve_region_min(fg, region, opts, solver_cmd,
                                        probe_timeout, log)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(solve, plan.regions))
    else:
        done = [solve(r) for r in plan.regions]

    solutions = {}
    probes = []
    proven = True
    total = plan.shell_mult
    for region, (mult, assign, ok, region_probes) in done:
        solutions[region.name] = assign
        probes.extend(region_probes)
        proven = proven and ok
        total += region.multiplicity * mult
    witness = assemble_member(fg, plan, solutions)
    return SearchResult(
        fg.n, "partitioned", total, total + addition_count(fg.n),
        proven, witness, probes,
        assumptions=["regional minima add up: zero-cost boundary rows and "
                     "the delivered zero root weights are loss-free, as "
                     "cross-checked against whole-graph search at small "
                     "sizes"])
