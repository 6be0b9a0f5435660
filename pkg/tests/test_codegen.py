import shutil
import subprocess

import numpy as np
import pytest

from fftfam.bruteforce import brute_min
from fftfam.codegen import build_program, emit_c, run_program
from fftfam.cost import cost_member
from fftfam.family import random_member, splitradix_conjugate
from fftfam.flowgraph import build_flowgraph
from fftfam.numeric import evaluate_member


def _differential(fg, member, rng):
    prog = build_program(fg, member)
    x = rng.standard_normal(fg.n) + 1j * rng.standard_normal(fg.n)
    yr, yi = run_program(prog, x.real, x.imag)
    got = np.array(yr) + 1j * np.array(yi)
    want = evaluate_member(fg, member, x)
    return prog, np.max(np.abs(got - want)) / np.max(np.abs(want))


def test_program_matches_oracle_on_fifty_members():
    # The unrolled straight-line program and the direct recurrence agree
    # on random members, and every program recounts to its cost report.
    rng = np.random.default_rng(1234)
    cases = [(8, 18), (16, 16), (32, 16)]
    assert sum(k for _, k in cases) == 50
    for n, seeds in cases:
        fg = build_flowgraph(n)
        for seed in range(seeds):
            member = random_member(fg, seed=seed)
            prog, err = _differential(fg, member, rng)
            assert err < 1e-12
            report = cost_member(member)
            muls, adds, total = prog.flop_counts()
            assert total == report.total
            assert prog.rotation_flops == report.mult
            assert prog.gather_adds == report.additions


def test_minimum_members_unroll_to_their_totals():
    fg = build_flowgraph(8)
    _, member = brute_min(fg)
    prog = build_program(fg, member)
    assert prog.flop_counts()[2] == 56

    fg = build_flowgraph(32)
    prog = build_program(fg, splitradix_conjugate(fg))
    assert prog.flop_counts()[2] == 456


def test_emitted_c_shape_and_determinism():
    fg = build_flowgraph(16)
    member = splitradix_conjugate(fg)
    text = emit_c(fg, member)
    assert text == emit_c(fg, member)
    assert "void fft16(const double xr[16]" in text
    assert "(40 rotation flops" in text and "= 168 flops" in text
    # Single-assignment: every declared temporary appears exactly once.
    decls = [ln.split("=")[0].split()[-1] for ln in text.splitlines()
             if ln.strip().startswith("const double")]
    assert len(decls) == len(set(decls))
    stores = [ln for ln in text.splitlines() if ln.strip().startswith("y")]
    assert len(stores) == 2 * 16


def test_unverified_member_is_refused():
    fg = build_flowgraph(8)
    member = random_member(fg, seed=0)
    member.ltfp[fg.rows[1][0]] = (member.ltfp[fg.rows[1][0]] + 1) % 8
    with pytest.raises(ValueError):
        emit_c(fg, member)


@pytest.mark.skipif(shutil.which("gcc") is None, reason="no C compiler")
def test_emitted_c_compiles_and_runs(tmp_path):
    n = 16
    fg = build_flowgraph(n)
    member = random_member(fg, seed=9)
    rng = np.random.default_rng(2)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    want = evaluate_member(fg, member, x)
    harness = """
#include <stdio.h>
int main(void) {
  double xr[%d] = {%s};
  double xi[%d] = {%s};
  double yr[%d], yi[%d];
  fft%d(xr, xi, yr, yi);
  for (int k = 0; k < %d; k++) printf("%%.17g %%.17g\\n", yr[k], yi[k]);
  return 0;
}
""" % (n, ",".join("%.17g" % v for v in x.real),
       n, ",".join("%.17g" % v for v in x.imag), n, n, n, n)
    src = tmp_path / "kern.c"
    src.write_text(emit_c(fg, member) + harness)
    exe = tmp_path / "kern"
    subprocess.run(["gcc", "-O2", "-o", str(exe), str(src)], check=True)
    out = subprocess.run([str(exe)], capture_output=True, text=True,
                         check=True).stdout
    got = np.array([complex(float(a), float(b))
                    for a, b in (ln.split() for ln in out.splitlines())])
    assert np.max(np.abs(got - want)) / np.max(np.abs(want)) < 1e-12
