"""Radix-2 decimation-in-frequency flowgraph: construction and structural checks.

The flowgraph for transform size n (a power of two) has n*(log2(n)+1) nodes
arranged in log2(n)+1 rows.  Row 0 holds the n single-input nodes fed by the
input sequence; every later row is produced by splitting each length-s block
of the row above into two length-s/2 blocks, until row log2(n) consists of n
single-node terminal blocks, one per output index.

Blocks are identified by (stride, w): `stride` is the number of nodes in the
block and `w` indexes which residue polynomial the block computes.  The root
block is (n, 0) and the split rule is

    (s, w)  ->  (s/2, w/2)  and  (s/2, w/2 + n/2).

Node labels (stride, base, ws) are canonical: no two nodes share one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _check_size(n: int) -> int:
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError("transform size must be a power of two >= 2, got %r" % (n,))
    return n.bit_length() - 1


@dataclass
class Node:
    """One flowgraph node.

    Row-0 nodes have a single input (the input sequence itself) and no
    parents; every other node sums two parent values.  `ws` is the w of the
    node's block, `base` its position within the block, and `stride` the
    block length, so ancestors of the node are exactly the input indices
    {base + t*stride}.
    """

    id: int
    row: int
    stride: int
    base: int
    ws: int
    lp: int | None = None
    rp: int | None = None
    lc: int | None = None
    rc: int | None = None
    ancestors: list[int] = field(default_factory=list)
    descendants: list[int] = field(default_factory=list)

    @property
    def label(self) -> tuple[int, int, int]:
        return (self.stride, self.base, self.ws)


@dataclass
class Pair:
    """A size-2 butterfly: two sibling nodes sharing both parents.

    `a` is the node in the left (w/2) child block, `b` its sibling in the
    right (w/2 + n/2) child block; `lp`/`rp` are the shared parents in
    position order.
    """

    a: int
    b: int
    lp: int
    rp: int
    row: int


@dataclass
class Flowgraph:
    n: int
    m: int
    nodes: list[Node]
    rows: list[list[int]]
    blocks: list[list[tuple[int, int, list[int]]]]
    pairs: list[Pair]
    terminal_of: dict[int, int]
    output_node: list[int]
    node_by_label: dict[tuple[int, int, int], int]

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]


def build_flowgraph(n: int) -> Flowgraph:
    """Construct the size-n flowgraph with parent/child links and labels."""
    m = _check_size(n)
    nodes: list[Node] = []
    rows: list[list[int]] = []
    blocks: list[list[tuple[int, int, list[int]]]] = []

    # Row 0: the root block (n, 0) of single-input nodes.
    row0 = []
    for j in range(n):
        node = Node(id=j, row=0, stride=n, base=j, ws=0)
        nodes.append(node)
        row0.append(j)
    rows.append(row0)
    blocks.append([(n, 0, row0)])

    for r in range(m):
        prev = blocks[r]
        cur: list[tuple[int, int, list[int]]] = []
        row_ids: list[int] = []
        for s, w, ids in prev:
            h = s // 2
            for cw in (w // 2, w // 2 + n // 2):
                child_ids = []
                for j in range(h):
                    node = Node(id=len(nodes), row=r + 1, stride=h, base=j, ws=cw)
                    node.lp = ids[j]
                    node.rp = ids[j + h]
                    nodes.append(node)
                    child_ids.append(node.id)
                    row_ids.append(node.id)
                cur.append((h, cw, child_ids))
            a_ids = cur[-2][2]
            b_ids = cur[-1][2]
            for j in range(s):
                p = nodes[ids[j]]
                p.lc = a_ids[j % h]
                p.rc = b_ids[j % h]
        blocks.append(cur)
        rows.append(row_ids)

    # Ancestors and descendants follow from the block arithmetic: block
    # (s, w) touches inputs {base + t*s} and exactly the outputs k with
    # k*s = w (mod n).
    for node in nodes:
        node.ancestors = list(range(node.base, n, node.stride))
        k0 = (node.ws // node.stride) % (n // node.stride)
        node.descendants = list(range(k0, n, n // node.stride))

    pairs: list[Pair] = []
    for r in range(m):
        for s, w, ids in blocks[r]:
            h = s // 2
            for j in range(h):
                top = nodes[ids[j]]
                pairs.append(Pair(a=top.lc, b=top.rc, lp=ids[j], rp=ids[j + h], row=r + 1))

    terminal_of: dict[int, int] = {}
    output_node = [-1] * n
    for s, w, ids in blocks[m]:
        terminal_of[ids[0]] = w
        output_node[w] = ids[0]

    node_by_label = {nd.label: nd.id for nd in nodes}
    if len(node_by_label) != len(nodes):
        raise ValueError("node labels are not unique for n=%d" % n)

    return Flowgraph(
        n=n,
        m=m,
        nodes=nodes,
        rows=rows,
        blocks=blocks,
        pairs=pairs,
        terminal_of=terminal_of,
        output_node=output_node,
        node_by_label=node_by_label,
    )


def _path_counts(fg: Flowgraph) -> tuple[np.ndarray, np.ndarray]:
    """Count input->node and node->output paths for every node.

    Returns (up, down): up[i, j] is the number of paths from input j to node
    i, down[i, k] the number from node i to output k.
    """
    n = len(fg.nodes)
    up = np.zeros((n, fg.n), dtype=np.int64)
    for j in fg.rows[0]:
        up[j, fg.nodes[j].base] = 1
    for row in fg.rows[1:]:
        lp = np.array([fg.nodes[i].lp for i in row])
        rp = np.array([fg.nodes[i].rp for i in row])
        up[row] = up[lp] + up[rp]

    down = np.zeros((n, fg.n), dtype=np.int64)
    for i, k in fg.terminal_of.items():
        down[i, k] = 1
    for row in reversed(fg.rows[:-1]):
        lc = np.array([fg.nodes[i].lc for i in row])
        rc = np.array([fg.nodes[i].rc for i in row])
        down[row] = down[lc] + down[rc]
    return up, down


def check_properties(fg: Flowgraph) -> None:
    """Validate the structural invariants; raise ValueError on any failure.

    Checked: path uniqueness (one path input->node->output for every
    ancestor/descendant pair), parent-ancestor interleaving, parent order,
    the stride congruence ws = k*stride (mod n) over each node's reachable
    outputs, and the terminal bijection.
    """
    n = fg.n
    up, down = _path_counts(fg)
    if up.max() > 1 or down.max() > 1:
        raise ValueError("flowgraph has a duplicated path")
    for node in fg.nodes:
        anc = np.flatnonzero(up[node.id]).tolist()
        if anc != node.ancestors:
            raise ValueError("ancestor set mismatch at node %d" % node.id)
        dec = np.flatnonzero(down[node.id]).tolist()
        if dec != node.descendants:
            raise ValueError("descendant set mismatch at node %d" % node.id)
        for k in node.descendants:
            if (k * node.stride - node.ws) % n != 0:
                raise ValueError(
                    "stride congruence fails at node %d, output %d" % (node.id, k)
                )
        if node.row == 0:
            if node.lp is not None or node.rp is not None:
                raise ValueError("row-0 node %d has parents" % node.id)
            continue
        lp, rp = fg.nodes[node.lp], fg.nodes[node.rp]
        if lp.base >= rp.base:
            raise ValueError("parent order violated at node %d" % node.id)
        both = sorted(lp.ancestors + rp.ancestors)
        if both != node.ancestors:
            raise ValueError("parent ancestors do not partition node %d's" % node.id)
        # Parents' ancestor sets must interleave: consecutive merged entries
        # alternate sides.
        la = set(lp.ancestors)
        sides = [a in la for a in both]
        if any(x == y for x, y in zip(sides, sides[1:])):
            raise ValueError("parent ancestors do not interleave at node %d" % node.id)

    if sorted(fg.terminal_of.values()) != list(range(n)):
        raise ValueError("terminal blocks do not map onto outputs 0..n-1")
    for i, k in fg.terminal_of.items():
        node = fg.nodes[i]
        if node.stride != 1 or node.ws != k:
            raise ValueError("terminal node %d has label %r" % (i, node.label))

    covered = sorted(p.a for p in fg.pairs) + sorted(p.b for p in fg.pairs)
    two_input = sorted(nd.id for nd in fg.nodes if nd.row > 0)
    if sorted(covered) != two_input:
        raise ValueError("butterfly pairs do not cover the two-input nodes")
