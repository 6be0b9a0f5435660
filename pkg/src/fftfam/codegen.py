"""Straight-line code emission for a verified member.

A member unrolls into one pass of single-assignment real arithmetic: a
value temporary per node, an edge temporary per outgoing rotation, two
real additions per gathering node.  Rotations spend exactly what the cost
model grades them: powers of i are free sign and component swaps, odd
eighth roots cost 2 mul + 2 add, anything else the full 4 mul + 2 add,
a conjugate pair shares its four products, and a node's second edge is a
free quadrant fixup whenever both rotations agree mod n/4.  The builder
recounts its own operations against the cost report and refuses to emit
on any disagreement, so the printed tally is trustworthy by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from fftfam.cost import cost_member, node_mult_cost
from fftfam.family import Member
from fftfam.flowgraph import Flowgraph
from fftfam.numeric import verify_member

SQRT1_2 = math.sqrt(0.5)


@dataclass
class Program:
    """Ops are ("mul", dst, const, a), ("add"/"sub", dst, a, b),
    ("neg"/"copy", dst, a).  Only mul/add/sub count as flops."""

    n: int
    ops: list[tuple] = field(default_factory=list)
    rotation_flops: int = 0
    gather_adds: int = 0

    def flop_counts(self) -> tuple[int, int, int]:
        muls = sum(op[0] == "mul" for op in self.ops)
        adds = sum(op[0] in ("add", "sub") for op in self.ops)
        return muls, adds, muls + adds


class _Emit:
    def __init__(self, prog: Program, n: int):
        self.prog = prog
        self.n = n
        self.tmp = 0

    def fresh(self, stem: str) -> str:
        self.tmp += 1
        return "%s%d" % (stem, self.tmp)

    def op(self, *parts) -> str:
        self.prog.ops.append(parts)
        return parts[1]

    def quadrant(self, re: str, im: str, k: int) -> tuple[str, str]:
        """Multiply (re, im) by (-i)^k with sign and swap ops only."""
        k %= 4
        if k == 0:
            return re, im
        if k == 1:
            return im, self.op("neg", self.fresh("s"), re)
        if k == 2:
            return (self.op("neg", self.fresh("s"), re),
                    self.op("neg", self.fresh("s"), im))
        return self.op("neg", self.fresh("s"), im), re

    def rotate(self, re: str, im: str, t: int) -> tuple[str, str]:
        """Apply omega^t; spends exactly twiddle_class(t, n) flops."""
        n = self.n
        q = n // 4
        t %= n
        g = t % q
        if g == 0:
            return self.quadrant(re, im, t // q)
        if g == n // 8:
            # omega^(n/8) = sqrt(1/2) * (1 - i), then the quadrant fixup.
            s1 = self.op("add", self.fresh("s"), re, im)
            s2 = self.op("sub", self.fresh("s"), im, re)
            outr = self.op("mul", self.fresh("p"), SQRT1_2, s1)
            outi = self.op("mul", self.fresh("p"), SQRT1_2, s2)
            return self.quadrant(outr, outi, t // q)
        wr = math.cos(2.0 * math.pi * t / n)
        wi = -math.sin(2.0 * math.pi * t / n)
        p1 = self.op("mul", self.fresh("p"), wr, re)
        p2 = self.op("mul", self.fresh("p"), wi, im)
        p3 = self.op("mul", self.fresh("p"), wi, re)
        p4 = self.op("mul", self.fresh("p"), wr, im)
        return (self.op("sub", self.fresh("e"), p1, p2),
                self.op("add", self.fresh("e"), p3, p4))

    def rotate_conjugate_pair(self, re: str, im: str, lt: int,
                              rt: int) -> tuple[tuple[str, str],
                                                tuple[str, str]]:
        """Both edges of a conjugate node from four shared products."""
        n = self.n
        wr = math.cos(2.0 * math.pi * lt / n)
        wi = -math.sin(2.0 * math.pi * lt / n)
        p1 = self.op("mul", self.fresh("p"), wr, re)
        p2 = self.op("mul", self.fresh("p"), wi, im)
        p3 = self.op("mul", self.fresh("p"), wi, re)
        p4 = self.op("mul", self.fresh("p"), wr, im)
        left = (self.op("sub", self.fresh("e"), p1, p2),
                self.op("add", self.fresh("e"), p3, p4))
        conj = (self.op("add", self.fresh("e"), p1, p2),
                self.op("sub", self.fresh("e"), p4, p3))
        # omega^rt = conj(omega^lt) * (-i)^k with k from the mod-n/4 drift.
        k = ((lt + rt) % n) // (n // 4)
        return left, self.quadrant(conj[0], conj[1], k)


def build_program(fg: Flowgraph, member: Member) -> Program:
    """Unroll a member into single-assignment ops and check the tally."""
    n = fg.n
    report = cost_member(member)
    prog = Program(n=n)
    em = _Emit(prog, n)

    val: dict[int, tuple[str, str]] = {}
    for j in range(n):
        val[j] = ("xr[%d]" % j, "xi[%d]" % j)

    edge: dict[tuple[int, int], tuple[str, str]] = {}
    for r, row in enumerate(fg.rows):
        if r > 0:
            for i in row:
                nd = fg.nodes[i]
                (ar, ai) = edge[(nd.lp, i)]
                (br, bi) = edge[(nd.rp, i)]
                val[i] = (em.op("add", em.fresh("v"), ar, br),
                          em.op("add", em.fresh("v"), ai, bi))
                prog.gather_adds += 2
        for i in row:
            nd = fg.nodes[i]
            if nd.lc is None:
                continue
            before = prog.flop_counts()[2]
            re, im = val[i]
            lt, rt = member.ltfp[i], member.rtfp[i]
            cost, kind, _ = node_mult_cost(lt, rt, n)
            if kind == "shared":
                left = em.rotate(re, im, lt)
                k = ((rt - lt) % n) // (n // 4)
                right = em.quadrant(left[0], left[1], k)
            elif kind == "conjugate":
                left, right = em.rotate_conjugate_pair(re, im, lt, rt)
            else:
                left = em.rotate(re, im, lt)
                right = em.rotate(re, im, rt)
            edge[(i, nd.lc)] = left
            edge[(i, nd.rc)] = right
            spent = prog.flop_counts()[2] - before
            if spent != cost:
                raise RuntimeError("node %d emitted %d flops, graded %d"
                                   % (i, spent, cost))
            prog.rotation_flops += spent

    for k, i in enumerate(fg.output_node):
        before = prog.flop_counts()[2]
        re, im = em.rotate(*val[i], member.ltfp[i])
        spent = prog.flop_counts()[2] - before
        if spent != node_mult_cost(member.ltfp[i], None, n)[0]:
            raise RuntimeError("output %d tally mismatch" % k)
        prog.rotation_flops += spent
        prog.ops.append(("copy", "yr[%d]" % k, re))
        prog.ops.append(("copy", "yi[%d]" % k, im))

    if (prog.rotation_flops != report.mult
            or prog.gather_adds != report.additions
            or sum(prog.flop_counts()[:2]) != report.total):
        raise RuntimeError("program tally disagrees with the cost report")
    return prog


def run_program(prog: Program, xr, xi) -> tuple[list[float], list[float]]:
    """Interpret the ops; the reference for differential testing."""
    n = prog.n
    env: dict[str, float] = {}
    for j in range(n):
        env["xr[%d]" % j] = float(xr[j])
        env["xi[%d]" % j] = float(xi[j])
    for op in prog.ops:
        tag, dst = op[0], op[1]
        if tag == "mul":
            env[dst] = op[2] * env[op[3]]
        elif tag == "add":
            env[dst] = env[op[2]] + env[op[3]]
        elif tag == "sub":
            env[dst] = env[op[2]] - env[op[3]]
        elif tag == "neg":
            env[dst] = -env[op[2]]
        else:
            env[dst] = env[op[2]]
    return ([env["yr[%d]" % k] for k in range(n)],
            [env["yi[%d]" % k] for k in range(n)])


def emit_c(fg: Flowgraph, member: Member, func_name: str | None = None,
           trials: int = 3) -> str:
    """Render a verified member as a self-contained C routine."""
    check = verify_member(fg, member, trials=trials)
    if not check.ok:
        raise ValueError("member failed numeric verification "
                         "(max rel err %.3g)" % check.max_rel_err)
    n = fg.n
    prog = build_program(fg, member)
    muls, adds, total = prog.flop_counts()
    name = func_name or ("fft%d" % n)

    lines = [
        "/* size-%d transform, unrolled from a flowgraph member." % n,
        " * real ops: %d multiplications + %d additions = %d flops"
        % (muls, adds, total),
        " *           (%d rotation flops, %d gathering additions)"
        % (prog.rotation_flops, prog.gather_adds),
        " * verified against the defining sum, max rel err %.3g */"
        % check.max_rel_err,
        "void %s(const double xr[%d], const double xi[%d],"
        % (name, n, n),
        "         double yr[%d], double yi[%d])" % (n, n),
        "{",
    ]
    for op in prog.ops:
        tag, dst = op[0], op[1]
        store = dst.startswith("yr[") or dst.startswith("yi[")
        decl = "" if store else "const double "
        if tag == "mul":
            rhs = "%.17g * %s" % (op[2], op[3])
        elif tag == "add":
            rhs = "%s + %s" % (op[2], op[3])
        elif tag == "sub":
            rhs = "%s - %s" % (op[2], op[3])
        elif tag == "neg":
            rhs = "-%s" % op[2]
        else:
            rhs = op[2]
        lines.append("    %s%s = %s;" % (decl, dst, rhs))
    lines.append("}")
    return "\n".join(lines) + "\n"
