import numpy as np
import pytest

from fftfam.backsolver import ScriptReader, solve_script
from fftfam.bruteforce import brute_min
from fftfam.cost import cost_member
from fftfam.flowgraph import build_flowgraph
from fftfam.numeric import verify_member
from fftfam.smtgen import (MITER_THEOREMS, ModelOptions,
                           build_bound_model, emit_theorem_miter,
                           psi_width)

VARIANTS = [
    ModelOptions(),
    ModelOptions(psi_only=False),
    ModelOptions(shared_twiddles=False),
    ModelOptions(shared_twiddles=False, psi_only=False),
    ModelOptions(cap_partial_sums=False),
    ModelOptions(adder_tree="by_subtree"),
    ModelOptions(adder_tree="totalizer"),
    ModelOptions(adder_tree="totalizer", shared_twiddles=False,
                 psi_only=False),
]


@pytest.mark.parametrize("n", [8, 16, 32])
@pytest.mark.parametrize("idx", range(len(VARIANTS)))
def test_model_cost_agrees_with_recount(n, idx):
    # The concrete evaluation of the model's total must equal the cost-model
    # recount of the decoded member, for arbitrary assignments.
    opts = VARIANTS[idx]
    fg = build_flowgraph(n)
    model = build_bound_model(fg, 12 * n * fg.m, opts)
    rng = np.random.default_rng(n + idx)
    wv = psi_width(n) if opts.psi_only else fg.m
    for trial in range(4):
        values = {name: int(rng.integers(0, 1 << wv))
                  for name in model.var_names}
        member = model.decode(values, seed=trial)
        assert cost_member(member).mult == model.eval_mult(values)
        assert verify_member(fg, member, trials=1).ok


def test_options_validation():
    fg = build_flowgraph(16)
    with pytest.raises(ValueError):
        build_bound_model(fg, 10, ModelOptions(sym_3node=True,
                                               shared_twiddles=False))
    with pytest.raises(ValueError):
        build_bound_model(fg, 10, ModelOptions(allowed_twiddles=(1,),
                                               free_twiddle_slots=2))
    with pytest.raises(ValueError):
        build_bound_model(build_flowgraph(4), 10)
    with pytest.raises(ValueError):
        build_bound_model(fg, 10, ModelOptions(allowed_twiddles=(9,)))


def _probe(fg, bound, opts=ModelOptions()):
    model = build_bound_model(fg, bound, opts)
    verdict, values = solve_script(model.script, model.var_names)
    return model, verdict, values


def test_n8_minimum_matches_enumeration():
    fg = build_flowgraph(8)
    want, _ = brute_min(fg)
    assert want == 8
    model, verdict, values = _probe(fg, 8)
    assert verdict == "sat"
    member = model.decode(values)
    assert cost_member(member).mult <= 8
    assert verify_member(fg, member, trials=2).ok
    assert _probe(fg, 6)[1] == "unsat"


@pytest.mark.parametrize("idx", range(len(VARIANTS)))
def test_n8_minimum_invariant_under_encoding(idx):
    # Every encoding variant agrees on the n=8 minimum; in particular the
    # residue and pair-sharing reductions lose nothing.
    fg = build_flowgraph(8)
    assert _probe(fg, 8, VARIANTS[idx])[1] == "sat"
    assert _probe(fg, 6, VARIANTS[idx])[1] == "unsat"


def test_n16_minimum_is_splitradix():
    fg = build_flowgraph(16)
    model, verdict, values = _probe(fg, 40)
    assert verdict == "sat"
    member = model.decode(values)
    assert verify_member(fg, member, trials=2).ok
    assert _probe(fg, 38)[1] == "unsat"


def test_n16_pair_constraints_preserve_minimum():
    fg = build_flowgraph(16)
    opts = ModelOptions(sym_3node=True, sym_equal_pair=True,
                        conjugate_pairs_required=True)
    assert _probe(fg, 40, opts)[1] == "sat"
    assert _probe(fg, 38, opts)[1] == "unsat"


def test_whitelist_all_residues_is_no_restriction():
    fg = build_flowgraph(16)
    opts = ModelOptions(allowed_twiddles=(1, 2, 3))
    assert _probe(fg, 40, opts)[1] == "sat"


def test_empty_whitelist_is_infeasible():
    # Rotation-free members of size 16 do not exist at any budget.
    fg = build_flowgraph(16)
    opts = ModelOptions(allowed_twiddles=())
    assert _probe(fg, 4000, opts)[1] == "unsat"


def test_free_slots_cover_unrestricted_search():
    # Three slots at n=16 can hold every nonzero residue, and the ordering
    # constraint pins them to 1 < 2 < 3.
    fg = build_flowgraph(16)
    opts = ModelOptions(free_twiddle_slots=3)
    model, verdict, values = _probe(fg, 40, opts)
    assert verdict == "sat"
    assert [values["slot%d" % k] for k in (1, 2, 3)] == [1, 2, 3]
    member = model.decode(values)
    assert cost_member(member).mult <= 40


def test_emitted_text_solves_identically():
    fg = build_flowgraph(8)
    for bound in (8, 6):
        model = build_bound_model(fg, bound)
        reader = ScriptReader().read(model.to_smt2())
        verdict, values = solve_script(reader.script, reader.get_values)
        assert verdict == ("sat" if bound == 8 else "unsat")
        if verdict == "sat":
            member = reader  # values decode through the original model
            assert cost_member(model.decode(values)).mult <= 8


@pytest.mark.parametrize("n", [16, 32])
@pytest.mark.parametrize("theorem", MITER_THEOREMS)
def test_theorem_miters_unsat(n, theorem):
    # No assignment makes the general butterfly strictly cheaper than the
    # rewritten form, so each reduction is loss-free.
    model = emit_theorem_miter(n, theorem)
    verdict, _ = solve_script(model.script, model.var_names)
    assert verdict == "unsat"


@pytest.mark.parametrize("theorem", MITER_THEOREMS)
def test_theorem_miters_tie_is_reachable(theorem):
    # Allowing ties must flip the verdict (the all-zero assignment ties),
    # which rules out a vacuously contradictory constraint set.
    model = emit_theorem_miter(16, theorem, allow_tie=True)
    verdict, _ = solve_script(model.script, model.var_names)
    assert verdict == "sat"


def test_miter_argument_checks():
    assert emit_theorem_miter(16, "shared").theorem == "shared_twiddles"
    assert emit_theorem_miter(16, "original").theorem == "original_butterfly"
    assert emit_theorem_miter(16, "terminal").theorem == "terminal_butterfly"
    with pytest.raises(ValueError):
        emit_theorem_miter(16, "nonsense")
    with pytest.raises(ValueError):
        emit_theorem_miter(12, "shared")


@pytest.mark.parametrize("theorem", MITER_THEOREMS)
def test_miter_text_round_trips(theorem):
    # The textual form must re-read cleanly (declared names stay clear of
    # generated temporaries) and still refute.
    model = emit_theorem_miter(16, theorem)
    reader = ScriptReader().read(model.to_smt2())
    verdict, _ = solve_script(reader.script, reader.get_values)
    assert verdict == "unsat"
