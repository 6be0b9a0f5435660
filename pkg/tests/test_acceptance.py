"""Acceptance gate: one test and one printed verdict line per criterion.

Run with `pytest tests/test_acceptance.py -v -s`.  Solver-heavy criteria
resume from the probe logs shipped under tests/data/ when present (the
package's normal resume mechanism); a missing log simply makes that
criterion solve live, which can take hours for the largest sizes.  Every
resumed witness is still decoded, recounted and numerically verified here.
"""

import json
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

from fftfam.bruteforce import brute_min
from fftfam.codegen import build_program, run_program
from fftfam.cost import cost_member, splitradix_mult, splitradix_total
from fftfam.family import (dump_member, member_from_obj, random_member,
                           splitradix_conjugate)
from fftfam.flowgraph import build_flowgraph, check_properties
from fftfam.numeric import evaluate_member, verify_member
from fftfam.search import addition_count, prove_total_bound, search_min
from fftfam.smtgen import MITER_THEOREMS, ModelOptions, emit_theorem_miter
from fftfam.backsolver import solve_script

DATA = Path(__file__).parent / "data"
OPTS = ModelOptions(adder_tree="totalizer")
SYM = ModelOptions(sym_3node=True, sym_equal_pair=True,
                   adder_tree="totalizer")


def _line(num: int, ok: bool, detail: str) -> None:
    print("criterion %2d: %s - %s" % (num, "PASS" if ok else "FAIL", detail))
    assert ok, "criterion %d: %s" % (num, detail)


def _resumed(tmp_path, name: str):
    """Stage a shipped probe log into tmp so runs never mutate the repo."""
    staged = tmp_path / name
    shipped = DATA / name
    if shipped.exists():
        shutil.copy(shipped, staged)
    return str(staged), shipped.exists()


@pytest.fixture(scope="module")
def table1(tmp_path_factory):
    """Search results for the four Table-1 sizes, shared across criteria."""
    tmp = tmp_path_factory.mktemp("logs")
    out = {}
    for n, mode, log_name, opts in (
            (32, "monolithic", "mono32.jsonl", OPTS),
            (64, "monolithic", "mono64.jsonl", OPTS),
            (128, "monolithic", "mono128.jsonl", SYM),
            (256, "partitioned", "part256.jsonl", SYM)):
        log, _ = _resumed(tmp, log_name)
        fg = build_flowgraph(n)
        out[n] = (fg, search_min(fg, mode, opts, log_path=log, resume=True),
                  log)
    return out


def test_criterion_1_structural_suite():
    t0 = time.perf_counter()
    for k in range(1, 10):
        fg = build_flowgraph(2 ** k)
        check_properties(fg)  # includes the weight-stride invariant
    dt = time.perf_counter() - t0
    _line(1, dt < 5.0, "build+checks n=2..512 in %.2fs (< 5s)" % dt)


def test_criterion_2_family_validity():
    t0 = time.perf_counter()
    worst = 0.0
    for n in (8, 16, 32, 64, 128, 256):
        fg = build_flowgraph(n)
        for seed in range(100):
            res = verify_member(fg, random_member(fg, seed=seed), trials=1)
            worst = max(worst, res.max_rel_err)
            assert res.ok
    dt = time.perf_counter() - t0
    _line(2, worst <= 1e-6 and dt < 60.0,
          "600 members, worst rel err %.2e, %.1fs (< 60s)" % (worst, dt))


def test_criterion_3_reference_costs():
    expected = {16: 168, 32: 456, 64: 1160, 128: 2824, 256: 6664}
    got = {}
    for n, want in expected.items():
        fg = build_flowgraph(n)
        m = n.bit_length() - 1
        report = cost_member(splitradix_conjugate(fg))
        assert report.total == splitradix_total(n) == 4 * n * m - 6 * n + 8
        got[n] = report.total
    _line(3, got == expected, "split-radix totals %s" % got)


def test_criterion_4_table1_sat_side(table1):
    expected = {32: 456, 64: 1160, 128: 2824, 256: 6616}
    details = []
    ok = True
    for n, want in expected.items():
        fg, res, _ = table1[n]
        check = verify_member(fg, res.witness)
        recount = cost_member(res.witness).total
        good = (res.total == want and res.proven and check.ok
                and recount == res.total)
        ok = ok and good
        details.append("n=%d %s%s" % (n, res.total,
                                      "" if good else "(!)"))
    _line(4, ok, "proven minima " + " ".join(details))


def test_criterion_5_table1_unsat_side(table1):
    cases = ((32, 455, "monolithic", OPTS), (64, 1159, "monolithic", OPTS),
             (128, 2823, "monolithic", SYM), (256, 6615, "partitioned", SYM))
    verdicts = {}
    for n, bound, mode, opts in cases:
        fg, _, log = table1[n]
        verdict, member = prove_total_bound(fg, bound, mode, opts,
                                            log_path=log, resume=True)
        verdicts[bound] = verdict
        assert member is None
    ok = all(v == "unsat" for v in verdicts.values())
    _line(5, ok, "bounds refuted: %s" % verdicts)


def test_criterion_6_512_accepts_and_resumes(tmp_path):
    fg = build_flowgraph(512)
    log = str(tmp_path / "mono512.jsonl")
    opts = ModelOptions(adder_tree="by_subtree")
    res = search_min(fg, "monolithic", opts, probe_timeout=0.5,
                     log_path=log, resume=True)
    # No number is claimed at this size: the run must come back witnessed
    # (split-radix upper bound) but unproven, and must resume cleanly.
    first = (res.minimum, res.proven)
    res2 = search_min(fg, "monolithic", opts, probe_timeout=0.5,
                      log_path=log, resume=True)
    ok = (res.minimum == splitradix_mult(512) == res2.minimum
          and not res.proven and not res2.proven
          and res.total == 15368)
    _line(6, ok, "n=512 run accepted, unproven upper bound %s, resumable"
          % res.total)


def test_criterion_7_brute_force_boundary():
    t0 = time.perf_counter()
    fg = build_flowgraph(8)
    mult, member = brute_min(fg)
    total = mult + addition_count(8)
    sat_v, _ = prove_total_bound(fg, total, opts=OPTS)
    unsat_v, _ = prove_total_bound(fg, total - 1, opts=OPTS)
    dt = time.perf_counter() - t0
    ok = (total == 56 and cost_member(member).mult == mult == 8
          and sat_v == "sat" and unsat_v == "unsat" and dt < 10.0)
    _line(7, ok, "exhaustive minimum 56 = prove boundary, %.1fs (< 10s)" % dt)


def test_criterion_8_partition_equivalence(table1, tmp_path):
    minima = {}
    for n in (16, 32, 64):
        fg = build_flowgraph(n)
        if n == 16:
            mono = search_min(fg, "monolithic", OPTS)
        else:
            mono = table1[n][1]
        log, _ = _resumed(tmp_path, "part%d.jsonl" % n)
        part = search_min(fg, "partitioned", OPTS, log_path=log, resume=True)
        minima[n] = (mono.minimum, part.minimum)
        assert mono.proven and part.proven
    ok = all(a == b for a, b in minima.values())
    _line(8, ok, "monolithic == partitioned minima: %s" % minima)


def test_criterion_9_theorem_miters():
    times = []
    ok = True
    for n in (16, 32):
        for theorem in MITER_THEOREMS:
            t0 = time.perf_counter()
            model = emit_theorem_miter(n, theorem)
            verdict, _ = solve_script(model.script, model.var_names)
            dt = time.perf_counter() - t0
            times.append(dt)
            ok = ok and verdict == "unsat" and dt < 300.0
    _line(9, ok, "6 miters unsat, slowest %.2fs (< 300s)" % max(times))


def test_criterion_10_reduction_soundness():
    minima = {}
    for n in (8, 16):
        fg = build_flowgraph(n)
        for psi in (True, False):
            # The psi toggle is isolated in the unshared model: pair
            # sharing only classifies edges through the psi residue.
            opts = ModelOptions(psi_only=psi, shared_twiddles=False,
                                adder_tree="totalizer")
            minima[("psi", n, psi)] = search_min(fg, "monolithic",
                                                 opts).minimum
    for n in (16, 32):
        fg = build_flowgraph(n)
        for sym in (False, True):
            opts = ModelOptions(sym_3node=sym, sym_equal_pair=sym,
                                adder_tree="totalizer")
            minima[("sym", n, sym)] = search_min(fg, "monolithic",
                                                 opts).minimum
    ok = (minima[("psi", 8, True)] == minima[("psi", 8, False)]
          and minima[("psi", 16, True)] == minima[("psi", 16, False)]
          and minima[("sym", 16, False)] == minima[("sym", 16, True)]
          and minima[("sym", 32, False)] == minima[("sym", 32, True)])
    _line(10, ok, "minima invariant under reductions: %s"
          % {k: v for k, v in sorted(minima.items())})


def test_criterion_11_design_constraints():
    fg = build_flowgraph(32)
    results = {}
    for slots, want in ((2, 616), (3, 536)):
        res = search_min(fg, "monolithic",
                         ModelOptions(free_twiddle_slots=slots,
                                      adder_tree="totalizer"))
        results[slots] = (res.total, res.proven,
                          verify_member(fg, res.witness).ok)
        assert res.total == want and res.proven and results[slots][2]

    fg64 = build_flowgraph(64)
    opts = ModelOptions(allowed_twiddles=(7, 8, 9), adder_tree="totalizer")
    verdict, member = prove_total_bound(fg64, 2112, opts=opts)
    ok64 = (verdict == "sat" and verify_member(fg64, member).ok
            and cost_member(member).total <= 2112)
    _line(11, ok64, "n=32 slot minima %s; n=64 residues {7,8,9} reach %d"
          % (results, cost_member(member).total if member else -1))


def test_criterion_12_witness_integrity(table1):
    fg = build_flowgraph(16)
    res = search_min(fg, "monolithic", OPTS)
    checked = 0
    for g, r in [(fg, res)] + [(table1[n][0], table1[n][1])
                               for n in (32, 64, 128, 256)]:
        member = r.witness
        report = cost_member(member)
        assert report.mult == r.minimum and report.total == r.total
        assert verify_member(g, member).ok
        text = dump_member(g, member)
        again = member_from_obj(g, json.loads(text))
        assert dump_member(g, again) == text
        prog = build_program(g, member)
        assert prog.flop_counts()[2] == report.total
        rng = np.random.default_rng(0)
        x = rng.standard_normal(g.n) + 1j * rng.standard_normal(g.n)
        yr, yi = run_program(prog, x.real, x.imag)
        got = np.array(yr) + 1j * np.array(yi)
        want = evaluate_member(g, member, x)
        assert np.max(np.abs(got - want)) <= 1e-9 * np.max(np.abs(want))
        checked += 1
    _line(12, checked == 5,
          "%d witnesses: recount, oracle, JSON and code round trips" % checked)
