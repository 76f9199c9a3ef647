"""Guessers, transcripts, the calculus operations and the ACC diagonalizer."""

import pytest

from indivq.coding import tuple_code
from indivq.families import gen_family
from indivq.guessing import (
    EVENTUALLY, FINITELY, FIXED, Guesser, StarInstance, acc_monitor, acc_targets, audit,
    compose_guessers, declare_token, decode_guess_token, diagonalize_accn, factor_through_cn,
    final_token, get_guesser, guesser_to_selector, identity_witness, inner_transcript,
    lift_guesser, open_token, promote_delayed_guesser, run_guesser, verify_guesses,
)
from indivq.guessing.library import all_colours, greedy_tt, lpo_tree, tc_tracker
from indivq.problems import CoEnumInstance, DelayedInstance, RTInstance
from indivq.reductions import REGISTRY, reduce_rt_to_tt
from indivq.stagecore import FnMachine, Verdict

from calc_checks import COMPOSE_CASES, compose_sweep, factor_sweep, lift_sweep, promote_sweep

V, R, U = Verdict.VERIFIED, Verdict.REFUTED, Verdict.UNDECIDED


def scripted(problem, flavor, script, k=None):
    """A guesser emitting ``script[t]`` at stage ``t``."""

    def step(st, fresh):
        out = script[st] if st < len(script) else []
        return st + 1, {"out": out}

    return Guesser("scripted", problem, flavor, FnMachine("scripted", step, lambda: 0), k=k,
                   budget=lambda inst: len(script) + 1)


# -- tokens and transcripts --------------------------------------------------------

def test_token_round_trip():
    assert decode_guess_token(open_token()) == ("open",)
    assert decode_guess_token(final_token(2, (5, 6))) == ("final", 2, (5, 6))
    assert decode_guess_token(declare_token(4)) == ("declare", 4)
    with pytest.raises(ValueError):
        decode_guess_token(tuple_code((7, 7, 7)))


def test_single_correct_slot():
    g = scripted("RT1_2", FIXED, [[open_token(), final_token(0, (0,))]], k=1)
    assert verify_guesses("RT1_2", RTInstance(2, (0,)), run_guesser(g, RTInstance(2, (0,)))) == V


def test_unfinalized_slots_are_wrong():
    g = scripted("RT1_2", FIXED, [[open_token()] * 2], k=2)
    inst = RTInstance(2, (0, 1))
    assert verify_guesses("RT1_2", inst, run_guesser(g, inst)) == R


def test_existential_semantics():
    toks = [open_token()] * 3 + [final_token(0, (5,)), final_token(1, (6,)), final_token(2, (1,))]
    g = scripted("RT1_2", FIXED, [toks], k=3)
    inst = RTInstance(2, (1,))
    assert verify_guesses("RT1_2", inst, run_guesser(g, inst)) == V


@pytest.mark.parametrize("flavor, script, k, msg", [
    (FIXED, [[open_token()], [open_token()]], 2, "after stage 0"),
    (FIXED, [[open_token()]], 2, "expected exactly 2"),
    (FIXED, [[open_token(), declare_token(1)]], 1, "declared"),
    (FINITELY, [[declare_token(1), open_token(), open_token()]], None, "after declaring"),
    (EVENTUALLY, [[declare_token(1)]], None, "declared"),
    (FIXED, [[open_token(), final_token(0, (0,)), final_token(0, (1,))]], 1, "twice"),
    (FIXED, [[final_token(0, (0,)), open_token()]], 1, "before it was opened"),
])
def test_flavor_audit(flavor, script, k, msg):
    inst = RTInstance(2, (0,))
    tr = run_guesser(scripted("RT1_2", flavor, script, k), inst)
    assert any(msg in m for m in audit(tr))
    assert verify_guesses("RT1_2", inst, tr) == R


def test_finitely_without_declaration_is_undecided():
    g = scripted("RT1_2", FINITELY, [[open_token(), final_token(0, (1,))]])
    inst = RTInstance(2, (0,))
    assert verify_guesses("RT1_2", inst, run_guesser(g, inst)) == U


def test_guesser_flavor_checks():
    with pytest.raises(ValueError):
        scripted("RT1_2", FIXED, [])
    with pytest.raises(ValueError):
        scripted("RT1_2", "sometimes", [])


def test_transcript_json():
    tr = run_guesser(all_colours(2), RTInstance(2, (0,)))
    d = tr.to_json()
    assert d["k"] == 2 and [s["value"] for s in d["slots"]] == [[0], [1]]


# -- lifting --------------------------------------------------------------------------

def test_lift_identity_preserves_transcript():
    w = identity_witness("RT1_2", lambda ans: 1)
    g = all_colours(2)
    lifted = lift_guesser(w, g)
    inst = RTInstance(2, (1, 0), (0, 1))
    outer, inner, _ = inner_transcript(lifted, inst)
    assert outer.finalized() == inner.finalized() == run_guesser(g, inst).finalized()


def test_lift_rt_over_greedy_tt_on_constants():
    w = reduce_rt_to_tt(2)
    lifted = lift_guesser(w, greedy_tt(2, 1))
    for c in (0, 1):
        inst = RTInstance(2, (c,))
        outer, inner, _ = inner_transcript(lifted, inst)
        assert verify_guesses("RT1_2", inst, outer) == V
        assert len(outer.slots) == len(inner.slots) == 2


def test_lift_rejects_wrong_oracle():
    with pytest.raises(ValueError):
        lift_guesser(reduce_rt_to_tt(2), all_colours(2))


@pytest.mark.parametrize("rid", sorted(REGISTRY))
def test_lift_sample(rid):
    bad, checked = lift_sweep(rid, range(25))
    assert not bad and checked > 0


# -- composition ----------------------------------------------------------------------

def test_compose_flavors_and_counts():
    f, g, fam, bridge = COMPOSE_CASES["fixed*fixed"]
    c = compose_guessers(f, g, bridge)
    assert c.flavor == FIXED and c.k == 6
    f, g, fam, bridge = COMPOSE_CASES["fixed*finitely"]
    c = compose_guessers(f, g, bridge)
    assert c.flavor == FINITELY
    # ecfc_all declares bound + 1 = 4 slots, so the composite declares 8
    inst = CoEnumInstance("ECFC", 1, ((1, 0, 0), (2, 0, 1), (3, 0, 2)), bound=3, header=(3,))
    tr = run_guesser(c, StarInstance(inst, bridge, f.problem, g.problem))
    assert tr.declared == 8 and len(tr.slots) == 8


def test_compose_finitely_eventually_opens_finitely_many():
    f, g, fam, bridge = COMPOSE_CASES["finitely*eventually"]
    c = compose_guessers(f, g, bridge)
    assert c.flavor == EVENTUALLY
    x = gen_family(fam, 4)
    star = StarInstance(x, bridge, f.problem, g.problem)
    short, long_ = run_guesser(c, star), run_guesser(c, star, 4 * c.budget(star))
    assert len(short.slots) == len(long_.slots)


@pytest.mark.parametrize("name", sorted(COMPOSE_CASES))
def test_compose_sample(name):
    assert not compose_sweep(name, range(60))


def test_unsupported_composition_rejected():
    # an eventually guesser for the outer problem is the Tmin territory
    with pytest.raises(ValueError, match="not supported"):
        compose_guessers(lpo_tree(), all_colours(2), lambda z: z)
    with pytest.raises(ValueError, match="not supported"):
        compose_guessers(tc_tracker(1), lpo_tree(), lambda z: z)


# -- promotion ------------------------------------------------------------------------

def test_promote_reads_declaration():
    _, P = promote_sweep("rt3", range(0))
    assert P.k == 3 and P.verdict == V
    _, P = promote_sweep("fott2", range(0))
    assert P.k == 10


@pytest.mark.parametrize("name", ["rt3", "fott2"])
def test_promote_sample(name):
    bad, _ = promote_sweep(name, range(60))
    assert not bad


def test_promoted_matches_post_specification_transcript():
    from calc_checks import PROMOTE_CASES
    G, _, tag = PROMOTE_CASES["rt3"]
    P = promote_delayed_guesser(G, tag)
    for seed in range(20):
        x = gen_family({"family": "rt-random", "k": 3}, seed)
        mine = run_guesser(P.guesser, x).finalized()
        theirs = run_guesser(G, DelayedInstance(x, P.pad_stages)).finalized()
        assert mine == [(i, (v[0] - 1,)) for i, v in theirs]


def test_promote_needs_declaration():
    silent = scripted("DELAYED_RT1_2", FINITELY, [[open_token()]])
    assert promote_delayed_guesser(silent, "RT1_2", budget=8).verdict == U
    with pytest.raises(ValueError):
        promote_delayed_guesser(all_colours(2), "RT1_2")


# -- factoring through C_N --------------------------------------------------------

def test_factor_counts_slots():
    fz = factor_through_cn(tc_tracker(2))
    x = CoEnumInstance("TC", 2, ())
    count, tr, v = fz.run(x)
    assert count == len(run_guesser(tc_tracker(2), x).slots)
    assert tr.declared == count and v == V


def test_factor_zero_slots():
    none = scripted("RT1_2", EVENTUALLY, [])
    count, tr, v = factor_through_cn(none).run(RTInstance(2, (0,)))
    assert count == 0 and tr.declared == 0 and v == R


def test_factor_sample():
    assert not factor_sweep(range(60))


def test_factor_needs_eventually():
    with pytest.raises(ValueError):
        factor_through_cn(all_colours(2))


# -- selectors -----------------------------------------------------------------------

def test_selector_one_slot():
    g = scripted("RT1_1", FIXED, [[open_token(), final_token(0, (0,))]], k=1)
    rows = guesser_to_selector(g, [RTInstance(1, (0,))] * 3)
    assert [r["value"] for r in rows] == [0, 0, 0]


def test_selector_second_slot():
    g = all_colours(2)
    rows = guesser_to_selector(g, [RTInstance(2, (1,)), RTInstance(2, (0, 1))])
    assert [r["value"] for r in rows] == [1, 0]


def test_selector_range_and_refuted_rows():
    insts = [gen_family({"family": "rt-random", "k": 3}, s) for s in range(30)]
    rows = guesser_to_selector(all_colours(3), insts)
    assert all(0 <= r["value"] < 3 for r in rows)
    wrong = scripted("RT1_2", FIXED, [[open_token(), final_token(0, (1,))]], k=1)
    assert guesser_to_selector(wrong, [RTInstance(2, (0,))])[0]["verdict"] == "refuted"


# -- the ACC diagonalizer ------------------------------------------------------------

def test_constant_zero_target():
    g = scripted("ACC", FIXED, [[open_token(), final_token(0, (0,))]], k=1)
    d = diagonalize_accn(g, 1, 16)
    assert [(c, n) for _, c, n in d.instance.schedule] == [(0, 0)]
    assert verify_guesses("ACC", d.instance, d.transcript) == R and not d.vacuous


def test_two_slot_target():
    g = scripted("ACC", FIXED, [[open_token(), open_token(), final_token(0, (1, 2)),
                                 final_token(1, (3, 4))]], k=2)
    d = diagonalize_accn(g, 2, 16)
    assert sorted((c, n) for _, c, n in d.instance.schedule) == [(0, 1), (1, 4)]
    assert verify_guesses("ACC", d.instance, d.transcript) == R


def test_silent_target_is_vacuous():
    d = diagonalize_accn(get_guesser("acc-silent-k2-p0"), 2, 16)
    assert d.vacuous and verify_guesses("ACC", d.instance, d.transcript) == R


def test_diagonalizer_rejects_wrong_k():
    with pytest.raises(ValueError):
        diagonalize_accn(all_colours(2), 3)
    with pytest.raises(ValueError):
        diagonalize_accn(tc_tracker(2), 2)


def test_malformed_tokens_do_not_crash():
    g = scripted("ACC", FIXED, [[open_token(), tuple_code((9, 9, 9))]], k=1)
    d = diagonalize_accn(g, 1, 8)
    assert d.transcript.faults and verify_guesses("ACC", d.instance, d.transcript) == R


def test_acc_monitor_flags_double_removal():
    bad = CoEnumInstance("ACC", 1, ((1, 0, 3),), header=(1,))
    assert acc_monitor(bad, 6) == []
    assert acc_monitor(CoEnumInstance("ACC", 2, (), header=(1,)), 4)


@pytest.mark.parametrize("gid", acc_targets())
def test_every_target_defeated(gid):
    g = get_guesser(gid)
    d = diagonalize_accn(g, g.k, 64)
    assert acc_monitor(d.instance, 80) == []
    assert verify_guesses("ACC", d.instance, d.transcript) == R
    replay = run_guesser(g, d.instance, 64)
    assert replay.finalized() == d.transcript.finalized()
    assert verify_guesses("ACC", d.instance, replay) == R


def test_target_corpus_size():
    assert len(acc_targets()) >= 50
