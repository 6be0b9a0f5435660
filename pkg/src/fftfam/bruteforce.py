"""Exhaustive minimum search over the reduced weight space for tiny sizes.

At n=8 the reduced space is 12 pair residues of one bit each, 4096
assignments, small enough to grade every one directly through the ordinary
twiddle derivation and cost model.  This gives the constraint pipeline an
oracle that shares none of its encoding machinery.
"""

from __future__ import annotations

from itertools import product

from fftfam.cost import cost_member
from fftfam.family import Member, all_zero_wb, derive_twiddles
from fftfam.flowgraph import Flowgraph

BRUTE_MAX_N = 8


def brute_min(fg: Flowgraph) -> tuple[int, Member]:
    """Minimum multiplication count and one witness, by enumeration."""
    n = fg.n
    if n > BRUTE_MAX_N:
        raise ValueError("enumeration is limited to n <= %d" % BRUTE_MAX_N)
    if n < 8:
        # Every rotation below n=8 is a power of i; nothing to search.
        return 0, all_zero_wb(fg)

    q = n // 4
    pairs = fg.pairs
    best_mult = None
    best_wb = None
    wb = [0] * len(fg.nodes)
    for combo in product(range(q), repeat=len(pairs)):
        for pr, v in zip(pairs, combo):
            wb[pr.a] = v
            wb[pr.b] = v
        mult = cost_member(derive_twiddles(fg, wb)).mult
        if best_mult is None or mult < best_mult:
            best_mult = mult
            best_wb = list(wb)
    member = derive_twiddles(fg, best_wb, {"kind": "brute", "mult": best_mult})
    return best_mult, member
