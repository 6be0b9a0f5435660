"""Members of the FFT family: per-node weight assignments and their twiddles.

A family member is a choice of rotation weight W_b for every node of the
flowgraph (row-0 nodes are pinned to 0).  The stored value at a node is the
node's natural residue value times omega^W_b, so any assignment computes the
DFT exactly; what changes is where the twiddle rotations land and what they
cost.  From the weights, each edge's twiddle exponent follows mechanically:

    edge p -> c carries  c.W_b - p.W_b          if p is c's left parent,
                         c.W_b + c.ws - p.W_b   if p is c's right parent,

and each terminal applies a final rotation -W_b to land on the bare output.
Edge exponents are stored on the producing node: `ltfp` for the edge to the
left child, `rtfp` for the right child, and for terminals `ltfp` holds the
final output rotation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from fftfam.flowgraph import Flowgraph


@dataclass
class Member:
    n: int
    wb: list[int]
    rwb: list[int | None]
    ltfp: list[int | None]
    rtfp: list[int | None]
    provenance: dict = field(default_factory=dict)


def derive_twiddles(fg: Flowgraph, wb, provenance: dict | None = None) -> Member:
    """Derive all edge twiddle exponents from a per-node weight assignment."""
    n = fg.n
    nn = len(fg.nodes)
    if len(wb) != nn:
        raise ValueError("expected %d weights, got %d" % (nn, len(wb)))
    wb = [int(w) % n for w in wb]
    for i in fg.rows[0]:
        if wb[i] != 0:
            raise ValueError("row-0 node %d must have weight 0" % i)

    rwb: list[int | None] = [None] * nn
    ltfp: list[int | None] = [None] * nn
    rtfp: list[int | None] = [None] * nn
    for nd in fg.nodes:
        if nd.row > 0:
            rwb[nd.id] = (wb[nd.id] + nd.ws) % n
    for nd in fg.nodes:
        if nd.lc is None:
            ltfp[nd.id] = (-wb[nd.id]) % n
            continue
        for slot, c in (("l", nd.lc), ("r", nd.rc)):
            child = fg.nodes[c]
            t = (wb[c] if child.lp == nd.id else rwb[c]) - wb[nd.id]
            if slot == "l":
                ltfp[nd.id] = t % n
            else:
                rtfp[nd.id] = t % n
    return Member(n=n, wb=wb, rwb=rwb, ltfp=ltfp, rtfp=rtfp,
                  provenance=dict(provenance or {}))


def all_zero_wb(fg: Flowgraph) -> Member:
    """The all-zero assignment: the textbook radix-2 DIF algorithm."""
    return derive_twiddles(fg, [0] * len(fg.nodes), {"kind": "radix2"})


def random_member(fg: Flowgraph, seed=None, rng=None) -> Member:
    """Uniformly random weights on every two-input node."""
    if rng is None:
        rng = np.random.default_rng(seed)
    wb = [0] * len(fg.nodes)
    for nd in fg.nodes:
        if nd.row > 0:
            wb[nd.id] = int(rng.integers(0, fg.n))
    prov = {"kind": "random"}
    if seed is not None:
        prov["seed"] = int(seed)
    return derive_twiddles(fg, wb, prov)


def splitradix_conjugate(fg: Flowgraph) -> Member:
    """The conjugate split-radix assignment.

    Weights follow the split-radix recursion with delayed twists: a block
    carrying twist tau gives node j the weight tau*j, so the twist rotations
    fall on the edges out of the two odd-index subproblems, in conjugate
    pairs.  Total multiplication cost is 2*n*lg(n) - 6*n + 8 for n >= 4.
    """
    n = fg.n
    wb = [0] * len(fg.nodes)

    def put(row: int, bi: int, tau: int) -> None:
        _, _, ids = fg.blocks[row][bi]
        for j, i in enumerate(ids):
            wb[i] = (tau * j) % n

    def eff(row: int, bi: int, tau: int) -> int:
        s, w, _ = fg.blocks[row][bi]
        return (w - s * tau) % n

    def descend(row: int, bi: int, tau: int) -> None:
        # Dispatch the two children of a block whose twisted form is y^s - 1.
        a, b = 2 * bi, 2 * bi + 1
        if eff(row + 1, a, tau) == 0:
            plan_minus(row + 1, a, tau)
            plan_plus(row + 1, b, tau)
        else:
            plan_plus(row + 1, a, tau)
            plan_minus(row + 1, b, tau)

    def plan_minus(row: int, bi: int, tau: int) -> None:
        put(row, bi, tau)
        if fg.blocks[row][bi][0] == 1:
            return
        descend(row, bi, tau)

    def plan_plus(row: int, bi: int, tau: int) -> None:
        put(row, bi, tau)
        s = fg.blocks[row][bi][0]
        if s == 1:
            return
        if s == 2:
            put(row + 1, 2 * bi, tau)
            put(row + 1, 2 * bi + 1, tau)
            return
        d = n // (2 * s)
        for ci in (2 * bi, 2 * bi + 1):
            e = eff(row + 1, ci, tau)
            plan_twisted(row + 1, ci, tau, d if e == n // 4 else -d)

    def plan_twisted(row: int, bi: int, tau: int, d: int) -> None:
        # The block's own nodes keep tau; its children absorb the twist.
        put(row, bi, tau)
        descend(row, bi, (tau + d) % n)

    plan_minus(0, 0, 0)
    return derive_twiddles(fg, wb, {"kind": "splitradix-conjugate"})


def member_to_obj(fg: Flowgraph, member: Member) -> dict:
    nodes = []
    for nd in fg.nodes:
        i = nd.id
        nodes.append({
            "stride": nd.stride,
            "base": nd.base,
            "ws": nd.ws,
            "wb": member.wb[i],
            "rwb": member.rwb[i],
            "ltfp": member.ltfp[i],
            "rtfp": member.rtfp[i],
        })
    return {"n": member.n, "nodes": nodes, "provenance": member.provenance}


def member_from_obj(fg: Flowgraph, obj: dict) -> Member:
    if obj["n"] != fg.n:
        raise ValueError("member is for n=%d, flowgraph is n=%d" % (obj["n"], fg.n))
    nodes = obj["nodes"]
    if len(nodes) != len(fg.nodes):
        raise ValueError("wrong node count in member file")
    wb = []
    for nd, rec in zip(fg.nodes, nodes):
        if (rec["stride"], rec["base"], rec["ws"]) != nd.label:
            raise ValueError("node %d label mismatch in member file" % nd.id)
        wb.append(rec["wb"])
    member = derive_twiddles(fg, wb, obj.get("provenance") or {})
    for i, rec in enumerate(nodes):
        if (member.rwb[i], member.ltfp[i], member.rtfp[i]) != (
                rec["rwb"], rec["ltfp"], rec["rtfp"]):
            raise ValueError("derived twiddles disagree with member file at node %d" % i)
    return member


def dump_member(fg: Flowgraph, member: Member) -> str:
    return json.dumps(member_to_obj(fg, member), separators=(",", ":")) + "\n"


def save_member(fg: Flowgraph, member: Member, path) -> None:
    with open(path, "w") as fh:
        fh.write(dump_member(fg, member))


def load_member(fg: Flowgraph, path) -> Member:
    with open(path) as fh:
        return member_from_obj(fg, json.load(fh))
