"""Numerical evaluation of family members against a direct DFT oracle.

Evaluation walks the flowgraph row by row using the member's stored edge
rotations (not the weights), so a corrupted or hand-edited twiddle table is
caught rather than silently repaired.  The oracle is the O(n^2) defining sum,
kept deliberately independent of any fast algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fftfam.family import Member
from fftfam.flowgraph import Flowgraph

DEFAULT_TOL = 1e-6


def dft_oracle(x: np.ndarray) -> np.ndarray:
    """Direct evaluation of X(k) = sum_j x(j) omega^(jk), omega = e^(-2 pi i/n)."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[0]
    jk = np.outer(np.arange(n), np.arange(n))
    return np.exp(-2j * np.pi * jk / n) @ x


def evaluate_member(fg: Flowgraph, member: Member, x) -> np.ndarray:
    """Run the member's twiddle assignment on an input vector."""
    n = fg.n
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (n,):
        raise ValueError("input must have shape (%d,)" % n)
    tw = np.exp(-2j * np.pi * np.arange(n) / n)
    lt = np.array([0 if v is None else v for v in member.ltfp])
    rt = np.array([0 if v is None else v for v in member.rtfp])

    vals = np.empty(len(fg.nodes), dtype=np.complex128)
    vals[: n] = x
    for row in fg.rows[1:]:
        ids = np.array(row)
        lp = np.array([fg.nodes[i].lp for i in row])
        rp = np.array([fg.nodes[i].rp for i in row])
        # The edge from parent p lands in p's ltfp slot when the child is
        # p's left child, rtfp when it is the right child.
        from_lp = np.where(np.array([fg.nodes[i].id == fg.nodes[fg.nodes[i].lp].lc
                                     for i in row]), lt[lp], rt[lp])
        from_rp = np.where(np.array([fg.nodes[i].id == fg.nodes[fg.nodes[i].rp].lc
                                     for i in row]), lt[rp], rt[rp])
        vals[ids] = vals[lp] * tw[from_lp] + vals[rp] * tw[from_rp]

    out = np.empty(n, dtype=np.complex128)
    for k, i in enumerate(fg.output_node):
        out[k] = vals[i] * tw[lt[i]]
    return out


@dataclass
class VerifyResult:
    ok: bool
    max_rel_err: float
    trials: int
    tol: float


def verify_member(fg: Flowgraph, member: Member, trials: int = 3,
                  seed: int = 0, tol: float = DEFAULT_TOL) -> VerifyResult:
    """Compare the member against the oracle on seeded random inputs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = rng.random(fg.n) + 1j * rng.random(fg.n)
        ref = dft_oracle(x)
        got = evaluate_member(fg, member, x)
        err = np.abs(got - ref).max() / max(np.abs(ref).max(), 1.0)
        worst = max(worst, float(err))
    return VerifyResult(ok=worst <= tol, max_rel_err=worst, trials=trials, tol=tol)
