"""Stage machines, the reduction harness and witness composition."""

import pytest
from hypothesis import given, settings, strategies as st

from indivq.coding import pair, tuple_code, tuple_decode, unpair
from indivq.families import gen_family
from indivq.problems import RTInstance, solver_for
from indivq.reductions import REGISTRY, reduce_rt_to_tt, reduce_tcn_to_rtjump, reduce_tt_to_tcn
from indivq.stagecore import (
    FnMachine, MachineFault, ReductionWitness, Run, Verdict, compose_witnesses, run_machine,
    run_reduction,
)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_pairing_round_trip(a, b):
    assert unpair(pair(a, b)) == (a, b)


@given(st.lists(st.integers(0, 500), max_size=6))
def test_tuple_code_round_trip(xs):
    assert tuple_decode(tuple_code(xs)) == tuple(xs)


def identity():
    return FnMachine("id", lambda s, f: (s, {"out": [f["in"]] if f.get("in") is not None else []}))


def test_identity_machine():
    assert run_machine(identity(), {"in": [4, 7, 1]}, 3) == {"out": (4, 7, 1)}


def test_zero_budget_is_empty():
    assert run_machine(identity(), {"in": [4, 7, 1]}, 0) == {"out": ()}


def test_constant_emitter():
    zero = FnMachine("zero", lambda s, f: (s, {"out": [0]}))
    assert run_machine(zero, {}, 5) == {"out": (0, 0, 0, 0, 0)}


def test_negative_budget_rejected():
    with pytest.raises(ValueError):
        run_machine(identity(), {}, -1)


def test_bad_transition_is_a_fault():
    bad = FnMachine("bad", lambda s, f: {"out": []})
    with pytest.raises(MachineFault):
        Run(bad).advance({"in": None})
    ghost = FnMachine("ghost", lambda s, f: (s, {"nowhere": [1]}))
    with pytest.raises(MachineFault):
        Run(ghost).advance({"in": None})


def _identity_witness():
    # RT^1_2 <= RT^1_2 with K copying the name and H copying the answer
    def outer(s, f):
        return s, {"out": [f["answer"]] if f.get("answer") is not None else []}

    h = FnMachine("h", outer, inputs=("in", "answer"))
    return ReductionWitness("id", "RT1_2", "RT1_2", identity(), h,
                            limit=lambda inst, run: inst, budget=lambda inst: 8)


@pytest.mark.parametrize("pal", [(0,), (1,), (0, 1)])
def test_identity_reduction_verifies(pal):
    w = _identity_witness()
    inst = RTInstance(2, pal, (1, 0, 1))
    rep = run_reduction(w, inst, solver_for("RT1_2"), 8)
    assert rep.verdict == Verdict.VERIFIED


def test_budget_below_stabilization_is_undecided():
    inst = gen_family("bounded-mind-change", 3)
    w = reduce_tcn_to_rtjump(inst.comps)
    rep = run_reduction(w, inst, solver_for(w.oracle), 1)
    assert rep.verdict == Verdict.UNDECIDED


def test_rt_to_tt_on_constant_zero():
    w = reduce_rt_to_tt(2)
    rep = run_reduction(w, RTInstance(2, (0,)), solver_for(w.oracle), 64)
    assert rep.verdict == Verdict.VERIFIED
    assert rep.output[:1] == (0,)


def test_compose_identity():
    w = compose_witnesses(_identity_witness(), _identity_witness())
    for pal in [(0,), (1,), (1, 0)]:
        inst = RTInstance(2, pal, (0, 0, 1))
        rep = run_reduction(w, inst, solver_for(w.oracle), 32)
        assert rep.verdict == Verdict.VERIFIED
        assert rep.output[0] == min(pal)


def test_compose_rt_tt_tcn_on_constant_zero():
    w = compose_witnesses(reduce_rt_to_tt(2), reduce_tt_to_tcn(1))
    inst = RTInstance(2, (0,))
    rep = run_reduction(w, inst, solver_for(w.oracle), w.budget(inst))
    assert rep.verdict == Verdict.VERIFIED and rep.output[0] == 0


def test_compose_port_mismatch():
    with pytest.raises(ValueError, match="port mismatch"):
        compose_witnesses(reduce_rt_to_tt(2), reduce_tt_to_tcn(2))


def test_witness_port_check():
    with pytest.raises(ValueError):
        ReductionWitness("x", "A", "B", identity(), identity(), limit=lambda i, r: None)


@pytest.mark.parametrize("seed", range(12))
def test_composition_associative(seed):
    a, b, c = reduce_rt_to_tt(2), reduce_tt_to_tcn(1), reduce_tcn_to_rtjump(1)
    left = compose_witnesses(compose_witnesses(a, b), c)
    right = compose_witnesses(a, compose_witnesses(b, c))
    inst = gen_family({"family": "rt-random", "k": 2}, seed)
    t = max(left.budget(inst), right.budget(inst))
    r1 = run_reduction(left, inst, solver_for(left.oracle), t)
    r2 = run_reduction(right, inst, solver_for(right.oracle), t)
    assert r1.verdict == r2.verdict == Verdict.VERIFIED
    assert r1.output == r2.output


def _drive(machine, name, budget):
    run = Run(machine)
    for t in range(budget):
        run.advance({"in": name[t] if t < len(name) else None})
    return list(run.out["out"])


@settings(max_examples=40, deadline=None)
@given(rid=st.sampled_from(sorted(REGISTRY)), seed=st.integers(0, 500),
       t1=st.integers(0, 40), t2=st.integers(0, 40))
def test_inner_machines_monotone_and_deterministic(rid, seed, t1, t2):
    e = REGISTRY[rid]
    inst = e.instance(seed)
    w = e.witness(inst)
    lo, hi = sorted((t1, t2))
    name = inst.name(hi)
    short, long_ = _drive(w.inner, name, lo), _drive(w.inner, name, hi)
    assert long_[:len(short)] == short
    assert _drive(w.inner, name, hi) == long_
