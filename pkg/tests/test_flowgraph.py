import pytest

from fftfam.flowgraph import build_flowgraph, check_properties

SIZES = [2, 4, 8, 16, 32, 64, 128, 256, 512]


@pytest.mark.parametrize("n", SIZES)
def test_structure_valid(n):
    fg = build_flowgraph(n)
    check_properties(fg)


@pytest.mark.parametrize("n", SIZES)
def test_node_and_edge_counts(n):
    fg = build_flowgraph(n)
    m = fg.m
    assert len(fg.nodes) == n * (m + 1)
    edges = sum(1 for nd in fg.nodes for p in (nd.lp, nd.rp) if p is not None)
    assert edges == 2 * n * m


def test_counts_smallest_nontrivial():
    fg = build_flowgraph(8)
    assert len(fg.nodes) == 32
    assert sum(1 for nd in fg.nodes if nd.row > 0) * 2 == 48


def test_rejects_bad_sizes():
    for n in (0, 1, 3, 6, 12, -8):
        with pytest.raises(ValueError):
            build_flowgraph(n)


def test_labels_are_canonical():
    for n in (2, 4, 8, 16, 64):
        fg = build_flowgraph(n)
        labels = {nd.label for nd in fg.nodes}
        assert len(labels) == len(fg.nodes)


def test_block_split_example():
    # At n=8 the root splits (8,0) -> (4,0), (4,4); then (4,4) -> (2,2), (2,6).
    fg = build_flowgraph(8)
    assert [(s, w) for s, w, _ in fg.blocks[1]] == [(4, 0), (4, 4)]
    assert [(s, w) for s, w, _ in fg.blocks[2]] == [(2, 0), (2, 4), (2, 2), (2, 6)]
    # Block (4,4) feeds exactly the odd outputs.
    blk = next(ids for s, w, ids in fg.blocks[1] if w == 4)
    assert fg.nodes[blk[0]].descendants == [1, 3, 5, 7]


def test_parentage_example():
    # The output-3 terminal at n=8 descends from block (2,6); its parents sit
    # at positions 0 and 1 of that block.
    fg = build_flowgraph(8)
    t = fg.nodes[fg.output_node[3]]
    assert t.label == (1, 0, 3)
    assert fg.nodes[t.lp].label == (2, 0, 6)
    assert fg.nodes[t.rp].label == (2, 1, 6)


def test_terminal_bijection():
    for n in (4, 16, 32):
        fg = build_flowgraph(n)
        assert sorted(fg.terminal_of.values()) == list(range(n))
        for k, i in enumerate(fg.output_node):
            assert fg.terminal_of[i] == k


def test_child_links_mirror_parent_links():
    fg = build_flowgraph(16)
    for nd in fg.nodes:
        if nd.row == 0:
            continue
        lp, rp = fg.nodes[nd.lp], fg.nodes[nd.rp]
        assert nd.id in (lp.lc, lp.rc)
        assert nd.id in (rp.lc, rp.rc)
        # A-side children are the lc of both parents, B-side the rc.
        if nd.ws == lp.ws // 2:
            assert lp.lc == nd.id and rp.lc == nd.id
        else:
            assert nd.ws == lp.ws // 2 + fg.n // 2
            assert lp.rc == nd.id and rp.rc == nd.id


def test_pairs_share_both_parents():
    fg = build_flowgraph(32)
    for p in fg.pairs:
        a, b = fg.nodes[p.a], fg.nodes[p.b]
        assert (a.lp, a.rp) == (p.lp, p.rp)
        assert (b.lp, b.rp) == (p.lp, p.rp)
        assert a.stride == b.stride and a.base == b.base
        assert (a.ws + fg.n // 2) % fg.n == b.ws % fg.n
