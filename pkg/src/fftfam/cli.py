"""Command-line front end.

One executable, one verb per run: build and render the flowgraph, draw a
random member, grade or verify a member file, emit bounded-cost SMT text,
plan partitions, run the minimum search, decide a single budget, check a
reduction-theorem miter, or unroll a member into C.  Every run echoes its
resolved configuration into whatever it prints, machine outputs are JSON
or standard text formats, and exit codes separate negative verdicts (1)
from usage errors (2) and internal failures (3).
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from fftfam.codegen import emit_c
from fftfam.cost import cost_member, twiddle_class
from fftfam.family import dump_member, member_from_obj, random_member
from fftfam.flowgraph import Flowgraph, build_flowgraph, check_properties
from fftfam.numeric import DEFAULT_TOL, verify_member
from fftfam.partition import build_region_model, enumerate_partitions
from fftfam.search import prove_total_bound, search_min
from fftfam.smtgen import (MITER_THEOREMS, ModelOptions, build_bound_model,
                           emit_theorem_miter)

EDGE_COLOR = {0: "gray55", 4: "darkorange2", 6: "crimson"}


def emit_dot(fg: Flowgraph, member=None, name: str | None = None) -> str:
    """Render the flowgraph in DOT, one rank per row.

    Nodes carry their (stride, base, Ws) labels.  With a member, every
    edge shows its twiddle power and is colored by cost class, and
    terminal nodes show their final rotation.
    """
    lines = ["digraph %s {" % (name or "fft%d" % fg.n),
             "  rankdir=BT;",
             '  node [shape=box, fontname="monospace", fontsize=10];']
    for r, row in enumerate(fg.rows):
        for i in row:
            nd = fg.nodes[i]
            label = "(%d,%d,%d)" % nd.label
            if member is not None and nd.lc is None and member.ltfp[i]:
                label += "\\n*w^%d" % member.ltfp[i]
            lines.append('  n%d [label="%s"];' % (i, label))
        lines.append("  { rank=same; %s }"
                     % " ".join("n%d;" % i for i in row))
    for nd in fg.nodes:
        if nd.lc is None:
            continue
        for child, t in ((nd.lc, None if member is None
                          else member.ltfp[nd.id]),
                         (nd.rc, None if member is None
                          else member.rtfp[nd.id])):
            if t is None:
                lines.append("  n%d -> n%d;" % (nd.id, child))
            else:
                lines.append('  n%d -> n%d [label="%d", color=%s];'
                             % (nd.id, child, t,
                                EDGE_COLOR[twiddle_class(t, fg.n)]))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _config(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k != "func" and not k.startswith("_")}
    return json.dumps(cfg, separators=(",", ":"), default=str)


def _options_from(args: argparse.Namespace) -> ModelOptions:
    allowed = None
    if args.allowed_twiddles:
        allowed = tuple(int(s) for s in args.allowed_twiddles.split(","))
    return ModelOptions(
        shared_twiddles=not args.general_twiddles,
        psi_only=not args.full_weights,
        sym_3node=args.sym_3node,
        sym_equal_pair=args.sym_equal_pair,
        conjugate_pairs_required=args.conjugate_pairs,
        allowed_twiddles=allowed,
        free_twiddle_slots=args.free_slots,
        cap_partial_sums=not args.no_cap,
        adder_tree=args.adder)


def _add_model_flags(sub: argparse.ArgumentParser) -> None:
    g = sub.add_argument_group("model options")
    g.add_argument("--general-twiddles", action="store_true",
                   help="drop the shared-twiddle pair reduction")
    g.add_argument("--full-weights", action="store_true",
                   help="model whole weights instead of quarter twiddles")
    g.add_argument("--sym-3node", action="store_true",
                   help="enable the three-node symmetry break")
    g.add_argument("--sym-equal-pair", action="store_true",
                   help="enable the equal-pair symmetry break")
    g.add_argument("--conjugate-pairs", action="store_true",
                   help="require conjugate twiddles within each pair")
    g.add_argument("--allowed-twiddles", metavar="T1,T2,...",
                   help="whitelist of nontrivial quarter-twiddle residues")
    g.add_argument("--free-slots", type=int, default=0, metavar="K",
                   help="limit distinct nontrivial residues to K slots")
    g.add_argument("--adder", default="totalizer",
                   choices=("balanced", "by_subtree", "totalizer"),
                   help="cost accumulator encoding (default totalizer)")
    g.add_argument("--no-cap", action="store_true",
                   help="do not clip partial sums at the budget")


def _write(text: str, path: str | None) -> None:
    if path and path != "-":
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_member_file(path: str):
    with open(path) as fh:
        obj = json.load(fh)
    fg = build_flowgraph(int(obj["n"]))
    return fg, member_from_obj(fg, obj)


def cmd_build(args) -> int:
    fg = build_flowgraph(args.size)
    check_properties(fg)
    print("config: %s" % _config(args))
    print("n=%d rows=%d nodes=%d pairs=%d (structure checks pass)"
          % (fg.n, len(fg.rows), len(fg.nodes), len(fg.pairs)))
    if args.dot:
        _write(("// config: %s\n" % _config(args)) + emit_dot(fg), args.dot)
    return 0


def cmd_random(args) -> int:
    fg = build_flowgraph(args.size)
    member = random_member(fg, seed=args.seed)
    print("config: %s" % _config(args))
    text = dump_member(fg, member)
    if args.out:
        _write(text, args.out)
        print("member written to %s" % args.out)
    else:
        sys.stdout.write(text)
    if args.dot:
        _write(("// config: %s\n" % _config(args))
               + emit_dot(fg, member), args.dot)
    print(str(cost_member(member)))
    if args.verify:
        res = verify_member(fg, member, trials=args.trials, tol=args.tol)
        print("verify: %s (max rel err %.3g over %d trials)"
              % ("pass" if res.ok else "FAIL", res.max_rel_err, res.trials))
        if not res.ok:
            return 1
    return 0


def cmd_cost(args) -> int:
    fg, member = _load_member_file(args.member)
    report = cost_member(member)
    print("config: %s" % _config(args))
    print(str(report))
    if args.per_node:
        for nc in report.per_node:
            if nc.mult:
                print("  node %d: ltfp=%s rtfp=%s %s %s -> %d"
                      % (nc.node, nc.ltfp, nc.rtfp, nc.kind,
                         nc.per_edge, nc.mult))
    return 0


def cmd_verify(args) -> int:
    fg, member = _load_member_file(args.member)
    res = verify_member(fg, member, trials=args.trials, seed=args.seed,
                        tol=args.tol)
    print("config: %s" % _config(args))
    print("verify: %s (max rel err %.3g over %d trials, tol %g)"
          % ("pass" if res.ok else "FAIL", res.max_rel_err, res.trials,
             res.tol))
    return 0 if res.ok else 1


def cmd_partitions(args) -> int:
    fg = build_flowgraph(args.size)
    plan = enumerate_partitions(fg)
    obj = {"config": json.loads(_config(args))}
    obj.update(plan.to_obj())
    _write(json.dumps(obj, indent=2) + "\n", args.out)
    return 0


def cmd_emit_smt(args) -> int:
    fg = build_flowgraph(args.size)
    opts = _options_from(args)
    if args.total is not None:
        from fftfam.search import addition_count
        mult_bound = args.total - addition_count(args.size)
        if mult_bound < 0:
            raise ValueError("total bound is below the addition floor")
    else:
        mult_bound = args.mult_bound
    if args.partition:
        plan = enumerate_partitions(fg)
        region = plan.by_name(args.partition)
        model = build_region_model(fg, region, mult_bound, opts)
    else:
        model = build_bound_model(fg, mult_bound, opts)
    _write("; config: %s\n%s" % (_config(args), model.to_smt2()), args.out)
    return 0


def cmd_search(args) -> int:
    fg = build_flowgraph(args.size)
    opts = _options_from(args)
    result = search_min(fg, args.mode, opts, solver_cmd=args.solver_cmd,
                        probe_timeout=args.timeout, log_path=args.log,
                        resume=args.resume, jobs=args.jobs)
    for p in result.probes:
        print("probe mult<=%d: %s (%.2fs)"
              % (p.bound, p.verdict, p.seconds), file=sys.stderr)
    obj = {"config": json.loads(_config(args))}
    obj.update(result.to_obj())
    _write(json.dumps(obj, indent=2) + "\n", args.out)
    if args.witness_out and result.witness is not None:
        _write(dump_member(fg, result.witness), args.witness_out)
    print("minimum: %s multiplications, %s total flops (%s)"
          % (result.minimum, result.total,
             "proven" if result.proven else "upper bound only"),
          file=sys.stderr)
    return 0 if result.minimum is not None else 1


def cmd_prove(args) -> int:
    fg = build_flowgraph(args.size)
    opts = _options_from(args)
    verdict, member = prove_total_bound(
        fg, args.total, args.mode, opts, solver_cmd=args.solver_cmd,
        timeout=args.timeout, log_path=args.log, resume=args.resume,
        jobs=args.jobs)
    print("config: %s" % _config(args))
    if verdict == "sat":
        report = cost_member(member)
        ok = verify_member(fg, member).ok
        print("sat: member with %d total flops (verify %s)"
              % (report.total, "pass" if ok else "FAIL"))
        if args.witness_out:
            _write(dump_member(fg, member), args.witness_out)
        return 0 if ok else 1
    if verdict == "unsat":
        print("unsat: no member within %d total flops" % args.total)
    else:
        print("unknown: budget %d undecided" % args.total)
    return 1


def cmd_miter(args) -> int:
    model = emit_theorem_miter(args.size, args.theorem,
                               allow_tie=args.allow_tie)
    if args.out:
        _write("; config: %s\n%s" % (_config(args), model.to_smt2()),
               args.out)
        return 0
    from fftfam.backsolver import run_solver
    verdict, values = run_solver(model.to_smt2(), args.solver_cmd,
                                 args.timeout)
    print("config: %s" % _config(args))
    if verdict == "unsat":
        print("unsat (theorem holds)")
        return 0
    if verdict == "sat":
        assign = {v: values.get(v) for v in model.var_names}
        print("sat (counterexample: %s)"
              % json.dumps(assign, sort_keys=True))
        return 1
    print("unknown (solver gave up)")
    return 1


def cmd_codegen(args) -> int:
    fg, member = _load_member_file(args.member)
    try:
        text = emit_c(fg, member, func_name=args.name, trials=args.trials)
    except ValueError as exc:
        print("refused: %s" % exc, file=sys.stderr)
        return 1
    _write(("/* config: %s */\n" % _config(args)) + text, args.out)
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fftfam",
        description="enumerate, grade, verify and search the power-of-two "
                    "FFT family on the shared flowgraph")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build the flowgraph and check it")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--dot", metavar="PATH", help="write DOT rendering")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("random", help="draw a random family member")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", metavar="PATH", help="member JSON destination")
    p.add_argument("--dot", metavar="PATH", help="write DOT with twiddles")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("cost", help="grade a member file")
    p.add_argument("member", help="member JSON path")
    p.add_argument("--per-node", action="store_true")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("verify", help="check a member against the oracle")
    p.add_argument("member", help="member JSON path")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("partitions", help="plan independent regions")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_partitions)

    p = sub.add_parser("emit-smt", help="write a bounded-cost model")
    p.add_argument("--size", type=int, required=True)
    b = p.add_mutually_exclusive_group(required=True)
    b.add_argument("--mult-bound", type=int,
                   help="multiplication-flop budget")
    b.add_argument("--total", type=int, help="total-flop budget")
    p.add_argument("--partition", metavar="NAME",
                   help="emit one region's model instead of the whole graph")
    p.add_argument("--out", metavar="PATH")
    _add_model_flags(p)
    p.set_defaults(func=cmd_emit_smt)

    p = sub.add_parser("search", help="find the minimum-flop member")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--mode", default="monolithic",
                   choices=("monolithic", "partitioned", "brute"))
    p.add_argument("--solver-cmd", metavar="CMD",
                   help="external solver template with {file}")
    p.add_argument("--timeout", type=float, default=None,
                   help="per-probe solver timeout in seconds")
    p.add_argument("--log", metavar="PATH", help="probe log (JSON lines)")
    p.add_argument("--resume", action="store_true",
                   help="reuse verdicts already in the log")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", metavar="PATH", help="result JSON destination")
    p.add_argument("--witness-out", metavar="PATH")
    _add_model_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("prove", help="decide one total-flop budget")
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--mode", default="monolithic",
                   choices=("monolithic", "partitioned", "brute"))
    p.add_argument("--solver-cmd", metavar="CMD")
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--log", metavar="PATH")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--witness-out", metavar="PATH")
    _add_model_flags(p)
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("miter", help="check a reduction-theorem miter")
    p.add_argument("--theorem", required=True,
                   help="one of: %s (prefixes accepted)"
                        % ", ".join(MITER_THEOREMS))
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--allow-tie", action="store_true",
                   help="ask for ties instead of strict improvements")
    p.add_argument("--solver-cmd", metavar="CMD")
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--out", metavar="PATH",
                   help="emit the SMT text instead of solving")
    p.set_defaults(func=cmd_miter)

    p = sub.add_parser("codegen", help="unroll a verified member into C")
    p.add_argument("member", help="member JSON path")
    p.add_argument("--name", help="emitted function name")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--trials", type=int, default=3)
    p.set_defaults(func=cmd_codegen)

    return ap


def cli_dispatch(argv: list[str] | None = None) -> int:
    """Parse argv and run one subcommand; returns the process exit code."""
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError,
            NotImplementedError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0
    except Exception:
        traceback.print_exc()
        return 3


def main() -> None:
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
