"""A guided walk through the algorithm family on one small transform size.

Builds the size-16 flowgraph, pokes at its structure, draws a few random
family members, checks them against the reference transform, and compares
their operation counts with the classic conjugate split-radix member.
"""

import numpy as np

from fftfam.cost import cost_member, splitradix_total
from fftfam.family import random_member, splitradix_conjugate
from fftfam.flowgraph import build_flowgraph, check_properties
from fftfam.numeric import evaluate_member, verify_member

n = 16
fg = build_flowgraph(n)
check_properties(fg)

print("flowgraph for n = %d: %d nodes in %d rows" % (n, len(fg.nodes), fg.m + 1))
for r in range(fg.m + 1):
    row = fg.rows[r]
    print("  row %d: %2d nodes, strides %s"
          % (r, len(row), sorted({fg.nodes[i].stride for i in row})))

# Every output index k ends at exactly one terminal node.
print("output terminals:", [fg.output_node[k] for k in range(n)])

# Each weight assignment that respects the stride congruences is a
# correct FFT; sample a handful and check them numerically.
print("\nrandom members against the reference transform:")
rng = np.random.default_rng(7)
for seed in range(5):
    member = random_member(fg, seed=seed)
    res = verify_member(fg, member)
    report = cost_member(member)
    print("  seed %d: max rel err %.2e, %s" % (seed, res.max_rel_err, report))

# The conjugate split-radix choice of weights is one distinguished member.
sr = splitradix_conjugate(fg)
report = cost_member(sr)
print("\nsplit-radix member: %s" % report)
print("closed form 4*n*log2(n) - 6*n + 8 = %d" % splitradix_total(n))

x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
y = evaluate_member(fg, sr, x)
print("split-radix vs numpy.fft.fft: max abs diff %.2e"
      % np.max(np.abs(y - np.fft.fft(x))))
