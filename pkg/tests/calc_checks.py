"""Seeded sweeps of the guessing calculus, shared by the unit and acceptance tests.

Each sweep returns a list of failure descriptions; empty means every case held.
"""

from indivq.families import gen_family
from indivq.guessing import (
    StarInstance, audit, compose_guessers, factor_through_cn, inner_transcript, lift_guesser,
    promote_delayed_guesser, run_guesser, verify_guesses,
)
from indivq.guessing.library import (
    all_colours, delayed_all_colours, delayed_range, ecfc_all, guesser_for_oracle, tc_tracker,
)
from indivq.problems import CoEnumInstance, RTInstance
from indivq.reductions import REGISTRY

OK = "verified"


def lift_sweep(rid, seeds):
    """Lift a correct oracle guesser along ``rid``; correct in, correct out."""
    e = REGISTRY[rid]
    bad, checked = [], 0
    for s in seeds:
        inst = e.instance(s)
        w = e.witness(inst)
        g = guesser_for_oracle(w.oracle)
        lifted = lift_guesser(w, g, e.lift_budget(w))
        outer, inner, run = inner_transcript(lifted, inst)
        if audit(outer) or len(outer.slots) != len(inner.slots):
            bad.append((s, "shape", audit(outer)))
            continue
        oracle = w.limit(inst, run.state["k"])
        if oracle is None or verify_guesses(g.problem, oracle, inner).value != OK:
            continue
        checked += 1
        if verify_guesses(lifted.problem, inst, outer).value != OK:
            bad.append((s, "lifted guesser wrong"))
    return bad, checked


COMPOSE_CASES = {
    "fixed*fixed": (
        all_colours(2), all_colours(3), {"family": "rt-random", "k": 3},
        lambda z: RTInstance(2, (z[0] % 2,), (1, 0))),
    "fixed*finitely": (
        all_colours(2), ecfc_all(),
        {"family": "adversarial-removal-schedule", "problem": "ECFC", "k": 3},
        lambda z: RTInstance(2, (z[0] % 2, 1 - z[0] % 2))),
    "finitely*eventually": (
        ecfc_all(), tc_tracker(1), {"family": "bounded-mind-change", "k": 1},
        lambda z: CoEnumInstance("ECFC", 1, tuple((s, 0, z[0] + s) for s in range(z[0] % 3)),
                                 bound=z[0] % 3 + 1, header=(z[0] % 3 + 1,))),
}


def compose_sweep(name, seeds):
    f, g, fam, bridge = COMPOSE_CASES[name]
    comp = compose_guessers(f, g, bridge)
    bad = []
    for s in seeds:
        x = gen_family(fam, s)
        star = StarInstance(x, bridge, f.problem, g.problem)
        tr = run_guesser(comp, star)
        if audit(tr):
            bad.append((s, audit(tr)))
        gv = verify_guesses(g.problem, x, run_guesser(g, x)).value
        if gv == OK and verify_guesses(comp.problem, star, tr).value != OK:
            bad.append((s, "composed guesser wrong"))
    return bad


PROMOTE_CASES = {
    "rt3": (delayed_all_colours(3), {"family": "rt-random", "k": 3}, "RT1_3"),
    "fott2": (delayed_range(10), "functional-with-trigger-depth", "FOTT2"),
}


def promote_sweep(name, seeds):
    G, fam, tag = PROMOTE_CASES[name]
    P = promote_delayed_guesser(G, tag)
    bad = []
    for s in seeds:
        x = gen_family(fam, s)
        tr = run_guesser(P.guesser, x)
        if audit(tr) or verify_guesses(tag, x, tr).value != OK:
            bad.append((s, audit(tr)))
    return bad, P


def factor_sweep(seeds, k=2):
    F = tc_tracker(k)
    fz = factor_through_cn(F)
    bad = []
    for s in seeds:
        x = gen_family({"family": "bounded-mind-change", "k": k}, s)
        direct_tr = run_guesser(F, x)
        direct = verify_guesses(f"TC_{k}", x, direct_tr)
        count, tr, v = fz.run(x)
        if v != direct or count != len(direct_tr.slots) or tr.declared != count:
            bad.append((s, direct.value, v.value, count, len(direct_tr.slots)))
    return bad
