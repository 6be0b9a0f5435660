"""Minimum-cost search over the weight family.

The driver bisects on the multiplication count, asking one bounded-cost
model per probe.  A sat answer tightens the upper bound and is always
decoded to a concrete member (so the running minimum is witnessed at every
step); an unsat answer raises the lower bound.  Every cost is even, so
unsat at bound b actually proves min >= b + 2 and the window shrinks in
even steps.

Solver timeouts step the lower bound like unsat but mark the run unproven;
the final minimum is then only a witnessed upper bound.  Probes are
appended to an optional JSON-lines log as they finish, and a later run
pointed at the same log resumes instead of re-solving.

Three modes: "monolithic" bisects over whole-transform models, "brute"
enumerates (n <= 8), and "partitioned" splits the graph into independent
regions and bisects each one (see the partition module).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from fftfam.bruteforce import BRUTE_MAX_N, brute_min
from fftfam.backsolver import run_solver
from fftfam.cost import ADD_PER_NODE, cost_member, splitradix_mult
from fftfam.family import Member, member_from_obj, member_to_obj, \
    splitradix_conjugate
from fftfam.flowgraph import Flowgraph, build_flowgraph
from fftfam.numeric import verify_member
from fftfam.smtgen import ModelOptions, build_bound_model


def addition_count(n: int) -> int:
    m = n.bit_length() - 1
    return ADD_PER_NODE * n * m


@dataclass
class Probe:
    bound: int
    verdict: str
    seconds: float
    genuine: bool = True
    witness_mult: int | None = None


@dataclass
class SearchResult:
    n: int
    mode: str
    minimum: int | None
    total: int | None
    proven: bool
    witness: Member | None
    probes: list[Probe] = field(default_factory=list)
    assumptions: list[str] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "n": self.n,
            "mode": self.mode,
            "minimum_mult": self.minimum,
            "minimum_total": self.total,
            "proven": self.proven,
            "probes": [vars(p) for p in self.probes],
            "assumptions": self.assumptions,
            "witness": None if self.witness is None
            else member_to_obj(build_flowgraph(self.n), self.witness),
        }


class ProbeLog:
    """Append-only JSON-lines record of solver probes, used for resuming."""

    def __init__(self, path: str | None, resume: bool = False):
        self.path = path
        self.cached: dict[tuple[str, int], tuple[str, dict | None]] = {}
        if path and resume:
            try:
                with open(path) as fh:
                    for line in fh:
                        rec = json.loads(line)
                        if rec.get("event") != "probe":
                            continue
                        key = (rec["scope"], rec["budget"])
                        self.cached[key] = (rec["verdict"],
                                            rec.get("witness"))
            except FileNotFoundError:
                pass

    def lookup(self, scope: str, budget: int):
        hit = self.cached.get((scope, budget))
        # A logged timeout is an absence, not a verdict: re-solve it.
        if hit is not None and hit[0] == "unknown":
            return None
        return hit

    def record(self, scope: str, budget: int, bound: int, verdict: str,
               seconds: float, witness_obj: dict | None) -> None:
        self.cached[(scope, budget)] = (verdict, witness_obj)
        if not self.path:
            return
        rec = {"event": "probe", "scope": scope, "budget": budget,
               "bound": bound, "verdict": verdict,
               "seconds": round(seconds, 3)}
        if witness_obj is not None:
            rec["witness"] = witness_obj
        with open(self.path, "a") as fh:
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")

    def note(self, **rec) -> None:
        if not self.path:
            return
        with open(self.path, "a") as fh:
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def probe_bound(fg: Flowgraph, mult_bound: int, opts: ModelOptions,
                solver_cmd: str | None = None,
                timeout: float | None = None,
                log: ProbeLog | None = None,
                scope: str = "whole") -> tuple[str, Member | None, float]:
    """Solve one budget question; decode and cross-check any witness."""
    budget = mult_bound // 2
    if log is not None:
        hit = log.lookup(scope, budget)
        if hit is not None:
            verdict, wobj = hit
            member = member_from_obj(fg, wobj) if wobj else None
            return verdict, member, 0.0
    model = build_bound_model(fg, mult_bound, opts)
    t0 = time.perf_counter()
    verdict, values = run_solver(model.to_smt2(), solver_cmd, timeout)
    dt = time.perf_counter() - t0
    member = model.decode(values) if verdict == "sat" else None
    if log is not None:
        log.record(scope, budget, mult_bound, verdict, dt,
                   member_to_obj(fg, member) if member else None)
    return verdict, member, dt


def bisect_min(fg: Flowgraph, opts: ModelOptions,
               hi: int | None = None, hi_witness: Member | None = None,
               lo: int = 0,
               solver_cmd: str | None = None,
               probe_timeout: float | None = None,
               log: ProbeLog | None = None,
               scope: str = "whole") -> tuple[int, Member, bool, list[Probe]]:
    """Shrink [lo, hi] to the witnessed minimum multiplication count.

    Returns (minimum, witness, proven, probes).  The witness always attains
    the returned minimum; proven is False when any step leaned on a timeout.
    """
    if hi is None:
        hi_witness = splitradix_conjugate(fg)
        hi = cost_member(hi_witness).mult
    if hi_witness is None:
        raise ValueError("an explicit hi needs its witness")
    proven_lo = lo
    witness = hi_witness
    probes: list[Probe] = []
    unsat_at: list[int] = []
    sat_mults: list[int] = []
    while lo < hi:
        p = (lo + hi) // 2
        verdict, member, dt = probe_bound(
            fg, p, opts, solver_cmd, probe_timeout, log, scope)
        pr = Probe(bound=p, verdict=verdict, seconds=dt)
        if verdict == "sat":
            witness = member
            pr.witness_mult = cost_member(member).mult
            hi = pr.witness_mult
            sat_mults.append(pr.witness_mult)
        else:
            lo = 2 * (p // 2) + 2
            if verdict == "unsat":
                proven_lo = max(proven_lo, lo)
                unsat_at.append(p)
            else:
                pr.genuine = False
        probes.append(pr)
        # Verdicts must be monotone in the budget: a decoded witness at or
        # below some refuted bound means the encoding or solver is unsound.
        if sat_mults and unsat_at and min(sat_mults) <= max(unsat_at):
            raise RuntimeError(
                "soundness alarm in %s: witness with %d multiplications "
                "coexists with unsat at bound %d"
                % (scope, min(sat_mults), max(unsat_at)))
    return hi, witness, proven_lo >= hi, probes


def _climb_restricted(fg: Flowgraph, opts: ModelOptions,
                      solver_cmd: str | None,
                      probe_timeout: float | None,
                      log: ProbeLog | None
                      ) -> tuple[int, Member, int, list[Probe]]:
    """Double a budget from the split-radix count until a member appears."""
    n = fg.n
    m = n.bit_length() - 1
    ceiling = 12 * n * (m - 1) + 6 * n
    lo = 0
    bound = splitradix_mult(n)
    probes: list[Probe] = []
    while bound <= 2 * ceiling:
        verdict, member, dt = probe_bound(
            fg, min(bound, ceiling), opts, solver_cmd, probe_timeout, log)
        pr = Probe(bound=min(bound, ceiling), verdict=verdict, seconds=dt)
        probes.append(pr)
        if verdict == "sat":
            pr.witness_mult = cost_member(member).mult
            return pr.witness_mult, member, lo, probes
        if verdict == "unsat":
            lo = min(bound, ceiling) + 2
        else:
            pr.genuine = False
        if bound >= ceiling:
            break
        bound *= 2
    raise RuntimeError("no member exists under the restricted options")


def search_min(fg: Flowgraph, mode: str = "monolithic",
               opts: ModelOptions = ModelOptions(adder_tree="totalizer"),
               solver_cmd: str | None = None,
               probe_timeout: float | None = None,
               log_path: str | None = None,
               resume: bool = False,
               jobs: int = 1) -> SearchResult:
    n = fg.n
    log = ProbeLog(log_path, resume)
    log.note(event="start", n=n, mode=mode, options=vars(opts))
    if mode == "brute":
        if n > BRUTE_MAX_N:
            raise ValueError("brute search stops at n = %d" % BRUTE_MAX_N)
        mult, member = brute_min(fg)
        result = SearchResult(n, mode, mult, mult + addition_count(n),
                              True, member)
    elif mode == "monolithic":
        hi = hi_witness = None
        lo = 0
        climb: list[Probe] = []
        if opts.allowed_twiddles is not None or opts.free_twiddle_slots:
            # Split-radix lies outside a residue-restricted family, so it
            # cannot seed the upper bound; climb until the model is sat.
            hi, hi_witness, lo, climb = _climb_restricted(
                fg, opts, solver_cmd, probe_timeout, log)
        mn, witness, proven, probes = bisect_min(
            fg, opts, hi=hi, hi_witness=hi_witness, lo=lo,
            solver_cmd=solver_cmd, probe_timeout=probe_timeout, log=log)
        proven = proven and all(p.genuine for p in climb)
        result = SearchResult(n, mode, mn, mn + addition_count(n),
                              proven, witness, climb + probes)
    elif mode == "partitioned":
        from fftfam.partition import search_partitioned
        result = search_partitioned(fg, opts, solver_cmd=solver_cmd,
                                    probe_timeout=probe_timeout, log=log,
                                    jobs=jobs)
    else:
        raise ValueError("mode must be monolithic, partitioned or brute")
    if result.witness is not None:
        check = verify_member(fg, result.witness)
        if not check.ok:
            raise RuntimeError(
                "soundness alarm: search witness fails numeric verification "
                "(max rel err %.3g)" % check.max_rel_err)
    log.note(event="done", n=n, mode=mode, minimum=result.minimum,
             proven=result.proven)
    return result


def prove_total_bound(fg: Flowgraph, total_bound: int,
                      mode: str = "monolithic",
                      opts: ModelOptions = ModelOptions(
                          adder_tree="totalizer"),
                      solver_cmd: str | None = None,
                      timeout: float | None = None,
                      log_path: str | None = None,
                      resume: bool = False,
                      jobs: int = 1) -> tuple[str, Member | None]:
    """Decide one total-flop budget for the whole transform.

    Monolithic mode asks a single bounded-cost model.  Brute and
    partitioned modes compare the budget against a searched minimum,
    answering unsat only when that minimum is fully proven and unknown
    when it is merely a witnessed upper bound.
    """
    mult_bound = total_bound - addition_count(fg.n)
    if mult_bound < 0:
        return "unsat", None
    if mode == "monolithic":
        log = ProbeLog(log_path, resume)
        verdict, member, _ = probe_bound(fg, mult_bound, opts, solver_cmd,
                                         timeout, log)
        return verdict, member
    if mode not in ("brute", "partitioned"):
        raise ValueError("mode must be monolithic, partitioned or brute")
    result = search_min(fg, mode, opts, solver_cmd=solver_cmd,
                        probe_timeout=timeout, log_path=log_path,
                        resume=resume, jobs=jobs)
    if result.minimum is not None and mult_bound >= result.minimum:
        return "sat", result.witness
    if result.proven:
        return "unsat", None
    return "unknown", None
