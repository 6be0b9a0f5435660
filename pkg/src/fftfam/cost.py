"""Real-arithmetic cost of a family member.

Every two-input node contributes one complex addition (2 real flops), giving
a fixed 2*n*lg(n) addition baseline.  Multiplications come from the twiddle
rotations on a node's outgoing edges and are graded by the rotation's residue
mod n/4 (a power of i is a free sign/component swap):

    class 0   rotation by a power of i                     0 flops
    class 4   odd multiple of the eighth root              2 mul + 2 add
    class 6   anything else                                4 mul + 2 add

A node multiplies its value at most twice (once per outgoing edge).  If both
rotations agree mod n/4 the second output is a free quadrant fixup of the
first; if both are class 6 and the rotations are conjugate mod n/4 the four
real products are shared and the pair costs 8 instead of 12.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from fftfam.family import Member

ADD_PER_NODE = 2


def twiddle_class(t: int, n: int) -> int:
    """Flop cost of one rotation by omega^t, graded mod n/4."""
    q = n // 4
    if q == 0:
        return 0
    g = t % q
    if g == 0:
        return 0
    if n >= 8 and g == n // 8:
        return 4
    return 6


def node_mult_cost(ltfp, rtfp, n: int) -> tuple[int, str, tuple[int, ...]]:
    """Cost of one node's outgoing rotations.

    Returns (flops, kind, per_edge) where per_edge grades each outgoing edge
    so that sum(per_edge) == flops exactly.
    """
    if ltfp is None:
        return 0, "none", ()
    if rtfp is None:
        c = twiddle_class(ltfp, n)
        return c, "single", (c,)
    q = n // 4
    cl = twiddle_class(ltfp, n)
    cr = twiddle_class(rtfp, n)
    if q and (ltfp - rtfp) % q == 0:
        return cl, "shared", (cl, 0)
    if cl == 6 and cr == 6 and (ltfp + rtfp) % q == 0:
        return 8, "conjugate", (6, 2)
    return cl + cr, "distinct", (cl, cr)


@dataclass
class NodeCost:
    node: int
    ltfp: int | None
    rtfp: int | None
    mult: int
    kind: str
    per_edge: tuple[int, ...]


@dataclass
class CostReport:
    n: int
    additions: int
    mult: int
    total: int
    per_node: list[NodeCost] = field(repr=False)
    class_counts: dict[str, int]

    def __str__(self) -> str:
        hist = " ".join("%s=%d" % (k, self.class_counts[k])
                        for k in ("c0", "c2", "c4", "c6"))
        return "n=%d total=%d (add=%d mult=%d) classes: %s" % (
            self.n, self.total, self.additions, self.mult, hist)


def cost_member(member: Member) -> CostReport:
    """Grade every node of a member and total the real-flop count."""
    n = member.n
    m = n.bit_length() - 1
    per_node = []
    counts = Counter({"c0": 0, "c2": 0, "c4": 0, "c6": 0})
    mult = 0
    for i, (l, r) in enumerate(zip(member.ltfp, member.rtfp)):
        c, kind, edges = node_mult_cost(l, r, n)
        mult += c
        for e in edges:
            counts["c%d" % e] += 1
        per_node.append(NodeCost(node=i, ltfp=l, rtfp=r, mult=c,
                                 kind=kind, per_edge=edges))
    additions = ADD_PER_NODE * n * m
    return CostReport(n=n, additions=additions, mult=mult,
                      total=additions + mult, per_node=per_node,
                      class_counts=dict(counts))


def splitradix_total(n: int) -> int:
    """Closed-form flop total of the conjugate split-radix member, n >= 4."""
    m = n.bit_length() - 1
    return 4 * n * m - 6 * n + 8


def splitradix_mult(n: int) -> int:
    m = n.bit_length() - 1
    return 2 * n * m - 6 * n + 8
