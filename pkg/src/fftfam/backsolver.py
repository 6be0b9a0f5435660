"""Self-contained decision procedure for the emitted constraint files.

Parses the QF_BV subset that the model emitters produce (declare-fun,
define-fun, assert, check-sat, get-value over bvadd/bvsub/extract/
zero_extend/concat/=/bvule/and/or/not/ite and #b constants), Tseitin
bit-blasts it, and hands the CNF to an external DIMACS solver.  Output
mimics the usual interactive shape: a verdict line, then for sat runs a
((name #b...) ...) value list for the requested terms.

The DIMACS back end is chosen from, in order: the FFTFAM_SAT_CMD environment
variable (a command template containing {cnf}), the bundled tools/cnfsolve
release binary, or a cnfsolve/splr found on PATH.

Run as:  python3 -m fftfam.backsolver FILE.smt2
"""

from __future__ import annotations

import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

from fftfam.smtexpr import BOOL, Ctx, Expr, Script, bitblast, to_dimacs


# -- parsing ----------------------------------------------------------------


def tokenize(text: str) -> list[str]:
    out = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            out.append(c)
            i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_sexprs(tokens: list[str]):
    pos = 0

    def walk():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while tokens[pos] != ")":
                items.append(walk())
            pos += 1
            return items
        if tok == ")":
            raise ValueError("unbalanced parenthesis")
        return tok

    forms = []
    while pos < len(tokens):
        forms.append(walk())
    return forms


class ScriptReader:
    """Rebuild a Script from its textual form."""

    def __init__(self):
        self.ctx = Ctx()
        self.script = Script(self.ctx)
        self.env: dict[str, Expr] = {}
        self.get_values: list[str] = []
        self.checked = False

    def read(self, text: str) -> "ScriptReader":
        for form in parse_sexprs(tokenize(text)):
            self._command(form)
        return self

    def _command(self, form) -> None:
        if not isinstance(form, list) or not form:
            raise ValueError("bad command: %r" % (form,))
        head = form[0]
        if head in ("set-option", "set-logic", "set-info", "exit"):
            return
        if head == "declare-fun":
            name, params, sort = form[1], form[2], form[3]
            if params:
                raise ValueError("only nullary functions are supported")
            self.env[name] = self.ctx.var(name, self._width(sort))
            return
        if head == "define-fun":
            name, params, _sort, body = form[1], form[2], form[3], form[4]
            if params:
                raise ValueError("only nullary functions are supported")
            self.env[name] = self._expr(body)
            return
        if head == "assert":
            self.script.assert_(self._expr(form[1]))
            return
        if head == "check-sat":
            self.checked = True
            return
        if head == "get-value":
            for item in form[1]:
                if not isinstance(item, str):
                    raise ValueError("get-value supports plain names only")
                self.get_values.append(item)
            return
        raise ValueError("unsupported command %s" % head)

    def _width(self, sort) -> int | None:
        if sort == "Bool":
            return BOOL
        if isinstance(sort, list) and sort[:2] == ["_", "BitVec"]:
            return int(sort[2])
        raise ValueError("unsupported sort %r" % (sort,))

    def _expr(self, form) -> Expr:
        ctx = self.ctx
        if isinstance(form, str):
            if form in self.env:
                return self.env[form]
            if form.startswith("#b"):
                return ctx.const(int(form[2:], 2), len(form) - 2)
            if form == "true":
                return ctx.true()
            if form == "false":
                return ctx.false()
            raise ValueError("unknown atom %s" % form)
        head = form[0]
        if isinstance(head, list):
            if head[:2] == ["_", "extract"]:
                return ctx.extract(self._expr(form[1]), int(head[2]), int(head[3]))
            if head[:2] == ["_", "zero_extend"]:
                return ctx.zext(self._expr(form[1]), int(head[2]))
            raise ValueError("unsupported indexed operator %r" % (head,))
        args = [self._expr(x) for x in form[1:]]
        if head == "bvadd":
            return ctx.add(*args)
        if head == "bvsub":
            return ctx.sub(*args)
        if head == "concat":
            return ctx.concat(*args)
        if head == "=":
            return ctx.eq(*args)
        if head == "bvule":
            return ctx.ule(*args)
        if head == "and":
            return ctx.and_(*args)
        if head == "or":
            return ctx.or_(*args)
        if head == "not":
            return ctx.not_(*args)
        if head == "ite":
            return ctx.ite(*args)
        raise ValueError("unsupported operator %s" % head)


# -- the DIMACS back end ------------------------------------------------------


def _repo_root() -> Path:
    return Path(__file__).resolve().parents[2]


def resolve_backend() -> str:
    """Command template with a {cnf} placeholder."""
    env = os.environ.get("FFTFAM_SAT_CMD")
    if env:
        return env
    bundled = _repo_root() / "tools" / "cnfsolve" / "target" / "release" / "cnfsolve"
    if bundled.exists():
        return "%s {cnf}" % bundled
    for name in ("cnfsolve", "splr"):
        found = shutil.which(name)
        if found:
            if name == "splr":
                return "%s -q -o /dev/stdout {cnf}" % found
            return "%s {cnf}" % found
    raise RuntimeError(
        "no DIMACS solver: set FFTFAM_SAT_CMD or build tools/cnfsolve "
        "(cargo build --release)")


def run_dimacs(cnf_text: str, command: str | None = None,
               timeout: float | None = None) -> tuple[str, dict[int, bool]]:
    """Run the CNF through the back end; returns (verdict, assignment)."""
    command = command or resolve_backend()
    with tempfile.NamedTemporaryFile("w", suffix=".cnf", delete=False) as fh:
        fh.write(cnf_text)
        path = fh.name
    try:
        proc = subprocess.run(command.format(cnf=path).split(),
                              capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        os.unlink(path)
        return "unknown", {}
    finally:
        if os.path.exists(path):
            os.unlink(path)
    text = proc.stdout
    verdict = "unknown"
    if "s SATISFIABLE" in text or proc.returncode == 10:
        verdict = "sat"
    elif "s UNSATISFIABLE" in text or proc.returncode == 20:
        verdict = "unsat"
    assign: dict[int, bool] = {}
    if verdict == "sat":
        for line in text.splitlines():
            if line.startswith("v"):
                for tok in line[1:].split():
                    lit = int(tok)
                    if lit != 0:
                        assign[abs(lit)] = lit > 0
    return verdict, assign


def solve_script(script: Script, names: list[str] | None = None,
                 command: str | None = None,
                 timeout: float | None = None) -> tuple[str, dict[str, int]]:
    """Bit-blast and solve; returns (verdict, name -> value)."""
    cb, var_bits = bitblast(script)
    verdict, assign = run_dimacs(to_dimacs(cb), command, timeout)
    values: dict[str, int] = {}
    if verdict == "sat":
        for name in (names if names is not None else list(var_bits)):
            bs = var_bits.get(name)
            if bs is None:
                continue
            values[name] = sum(1 << k for k, b in enumerate(bs)
                               if assign.get(abs(b), False) == (b > 0))
    return verdict, values


# -- external SMT-LIB solvers -------------------------------------------------

_MODEL_PAIR = None


def _model_pairs(text: str):
    import re
    global _MODEL_PAIR
    if _MODEL_PAIR is None:
        _MODEL_PAIR = (
            re.compile(r"\(\s*([A-Za-z_][\w.$!-]*)\s+#b([01]+)\s*\)"),
            re.compile(r"define-fun\s+([A-Za-z_][\w.$!-]*)\s*\(\s*\)\s*"
                       r"\(\s*_\s+BitVec\s+\d+\s*\)\s+#b([01]+)"),
        )
    pairs = {}
    for rx in _MODEL_PAIR:
        for name, bits in rx.findall(text):
            pairs.setdefault(name, int(bits, 2))
    return pairs


def default_solver_command() -> str:
    return os.environ.get("FFTFAM_SOLVER_CMD") or (
        "%s -m fftfam.backsolver {file}" % sys.executable)


def run_solver(smt2_text: str, command: str | None = None,
               timeout: float | None = None) -> tuple[str, dict[str, int]]:
    """Run an SMT-LIB file through an external solver command.

    `command` is a template containing {file}; the default is this module.
    Output parsing accepts a bare verdict line plus either get-value pairs
    or define-fun model lines.  Timeouts and unparseable output come back as
    "unknown".  The solver runs in its own process group so a timeout also
    stops any helper it spawned.
    """
    command = command or default_solver_command()
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as fh:
        fh.write(smt2_text)
        path = fh.name
    argv = [a.replace("{file}", path) for a in command.split()]
    try:
        proc = subprocess.Popen(argv, stdout=subprocess.PIPE,
                                stderr=subprocess.DEVNULL, text=True,
                                start_new_session=True)
        try:
            out, _ = proc.communicate(timeout=timeout)
        except subprocess.TimeoutExpired:
            import signal
            os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
            proc.wait()
            return "unknown", {}
    finally:
        os.unlink(path)
    verdict = "unknown"
    for line in out.splitlines():
        tok = line.strip()
        if tok in ("sat", "unsat", "unknown"):
            verdict = tok
            break
    values = _model_pairs(out) if verdict == "sat" else {}
    return verdict, values


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python3 -m fftfam.backsolver FILE.smt2", file=sys.stderr)
        return 2
    text = Path(argv[0]).read_text()
    reader = ScriptReader().read(text)
    verdict, values = solve_script(reader.script, reader.get_values)
    print(verdict)
    if verdict == "sat" and reader.get_values:
        lines = []
        for name in reader.get_values:
            e = reader.env[name]
            w = reader.ctx.widths[e.id]
            v = values.get(name, 0)
            lines.append("(%s #b%s)" % (name, format(v, "0%db" % w)))
        print("(" + "\n ".join(lines) + ")")
    return 0


if __name__ == "__main__":
    sys.exit(main())
