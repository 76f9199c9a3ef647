"""Problem zoo: verifiers, antichain enumeration, greedy copies, the oracle."""

from functools import lru_cache
from itertools import combinations

import pytest

from indivq.families import gen_family, instance_from_json, instance_to_json, FAMILIES
from indivq.problems import CoEnumInstance, RTInstance, solve, verify_solution
from indivq.stagecore import Verdict
from indivq.trees import (
    PivotPromise, StrongCopy, TreeColouring, antichain_index, canonical_antichain, cone,
    extendibility_oracle, extends, vkey, greedy_copy, is_antichain, vertices_upto,
)

V, R, U = Verdict.VERIFIED, Verdict.REFUTED, Verdict.UNDECIDED

SPLIT = TreeColouring(2, 6, PivotPromise(pivots=(("0", (1,)), ("1", (0,)))))


# -- verify_solution ----------------------------------------------------------

def test_rt_constant():
    assert verify_solution("RT1_2", RTInstance(2, (0,)), [0]) == V
    assert verify_solution("RT1_2", RTInstance(2, (0,)), [1]) == R
    assert verify_solution("RT1_2", RTInstance(2, (0,)), []) == U


def test_ecfc_membership():
    inst = CoEnumInstance("ECFC", 1, ((1, 0, 3), (4, 0, 5)), bound=2, header=(2,))
    assert verify_solution("ECFC", inst, [4]) == V
    assert verify_solution("ECFC", inst, [5]) == R
    assert verify_solution("ECFC", inst, [3]) == R


def test_tt_pivot_example():
    # depth-2 copy below "1", where everything is coloured 0
    imgs = ("1", "10", "11", "100", "101", "110", "111")
    good = StrongCopy(2, imgs)
    assert verify_solution("TT1_2", SPLIT, good.tokens()) == V
    bad = StrongCopy(1, ("", "0", "1"))
    assert verify_solution("TT1_2", SPLIT, bad.tokens()) == R
    assert verify_solution("TT1_2", SPLIT, [2, 1]) == U


def test_undecodable_is_refuted():
    assert verify_solution("TT1_2", SPLIT, [99]) == R


# -- canonical antichains -----------------------------------------------------

def _brute_antichains(size, D):
    verts = list(vertices_upto(D))
    # members sorted length-then-lex, tuples compared the same way
    found = [tuple(sorted(c, key=vkey)) for c in combinations(verts, size) if is_antichain(c)]
    return sorted(found, key=lambda a: (max(len(v) for v in a), [vkey(v) for v in a]))


def test_first_antichain():
    assert canonical_antichain(0, 1) == ("0", "1")


@pytest.mark.parametrize("k", [1, 2])
def test_antichain_order_matches_brute_force(k):
    # every antichain within depth D comes before any deeper one, in the stated order
    brute = _brute_antichains(k + 1, 5 if k == 1 else 4)
    got = [canonical_antichain(n, k) for n in range(len(brute))]
    assert got == brute


@pytest.mark.parametrize("k", [1, 2])
def test_bijection_on_truncation(k):
    for D in range(1, 6 if k == 1 else 5):
        brute = _brute_antichains(k + 1, D)
        assert {canonical_antichain(n, k) for n in range(len(brute))} == set(brute)
        assert {antichain_index(a) for a in brute} == set(range(len(brute)))


def test_injective_first_thousand():
    seen = {canonical_antichain(n, 1) for n in range(1000)}
    assert len(seen) == 1000
    assert all(is_antichain(a) and len(a) == 2 for a in seen)
    assert all(antichain_index(canonical_antichain(n, 2)) == n for n in range(0, 1000, 37))


# -- greedy copies ------------------------------------------------------------

def test_greedy_constant_is_identity():
    c = greedy_copy(TreeColouring.constant(2, 0), "", 0, 2)
    assert c.images == ("", "0", "1", "00", "01", "10", "11")


def test_greedy_missing_colour_fails():
    assert greedy_copy(TreeColouring.constant(2, 0), "", 1, 2) is None


def _brute_min_embedding(col, b, d, D):
    # lexicographically least BFS image tuple over all b-coloured embeddings
    verts = [v for v in vertices_upto(D) if col(v) == b]
    key = lambda v: (len(v), v)
    best = None
    doms = list(vertices_upto(d))
    for root in verts:
        partial = [{"": root}]
        for s in doms[1:]:
            parent = s[:-1]
            partial = [dict(p, **{s: v}) for p in partial for v in verts
                       if extends(v, p[parent] + s[-1])]
        for p in partial:
            cand = tuple(key(p[s]) for s in doms)
            if best is None or cand < best[0]:
                best = (cand, tuple(p[s] for s in doms))
    return best[1] if best else None


def test_greedy_chequerboard_matches_brute_force():
    col = lambda v: len(v) % 2
    got = greedy_copy(col, "", 0, 2, D=6)
    assert got is not None and got.images == _brute_min_embedding(col, 0, 2, 6)
    assert got.colours(col) == {0}


# -- the extendibility oracle -------------------------------------------------

def test_oracle_examples():
    assert extendibility_oracle(TreeColouring.constant(2, 0), "0101") == {0}
    assert extendibility_oracle(SPLIT, "") == {0, 1}
    assert extendibility_oracle(SPLIT, "0") == {1}


@pytest.mark.parametrize("seed", range(60))
def test_oracle_never_empty(seed):
    col = gen_family("pivot-random", seed)
    for v in vertices_upto(4):
        assert extendibility_oracle(col, v)


# -- TT verifier against an exhaustive search ---------------------------------

def _full_copy_checker(col, start=5):
    """Depth-bounded search for deep ``b``-copies in the truncated tree.

    A ``b``-copy of depth ``M+1`` puts a ``b``-coloured image past the stable
    depth ``M``, and from there the region repeats its palette, so finding one
    within a generous truncation witnesses a full copy.  Palettes have at
    most two colours, so each copy level costs at most two tree levels below
    the start vertex, which sits at depth at most ``start``.
    """
    M = col.promise.stable_depth
    n = M + 1
    L = start + 2 * (n + 1) + 1

    @lru_cache(maxsize=None)
    def good(u, b, m):
        # some vertex extending u carries b and heads a b-copy of depth m
        if len(u) > L:
            return False
        here = col.colour(u) == b and (m == 0 or (good(u + "0", b, m - 1)
                                                 and good(u + "1", b, m - 1)))
        return here or good(u + "0", b, m) or good(u + "1", b, m)

    return lambda u, b: good(u, b, n)


def _all_embeddings(D, d):
    verts = list(vertices_upto(D))
    doms = list(vertices_upto(d))
    for root in verts:
        partial = [{"": root}]
        for s in doms[1:]:
            partial = [dict(p, **{s: v}) for p in partial for v in cone(p[s[:-1]] + s[-1], D)]
        for p in partial:
            yield StrongCopy(d, tuple(p[s] for s in doms))


@pytest.mark.parametrize("seed", range(8))
def test_tt_verifier_vs_exhaustive(seed):
    col = gen_family({"family": "pivot-random", "k": 2, "D": 4}, seed)
    full = _full_copy_checker(col)
    count = 0
    for d in (0, 1, 2):
        D = 4 if d < 2 else 3
        for copy in _all_embeddings(D, d):
            cols = copy.colours(col)
            truth = len(cols) == 1 and all(
                full(y + i, next(iter(cols))) for y in copy.leaves() for i in "01")
            assert verify_solution("TT1_2", col, copy.tokens()) == (V if truth else R), copy
            count += 1
    assert count > 100


@pytest.mark.parametrize("seed", range(40))
def test_greedy_success_verifies(seed):
    col = gen_family("pivot-random", seed)
    for b in extendibility_oracle(col, ""):
        if col.dense_below("", b):
            copy = greedy_copy(col, "", b, 2)
            if copy is not None:
                assert verify_solution(f"TT1_{col.k}", col, copy.tokens()) == V


# -- families -----------------------------------------------------------------

def test_constant_family_example():
    inst = gen_family({"family": "constant", "k": 3, "colour": 2}, 0)
    assert [c for c in range(3) if verify_solution("RT1_3", inst, [c]) == V] == [2]


def test_acc_single_removal():
    inst = CoEnumInstance("ACC", 1, ((7, 0, 7),), header=(1,))
    assert all((verify_solution("ACC", inst, [n]) == V) == (n != 7) for n in range(20))


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_families_deterministic_and_round_trip(name):
    for seed in range(15):
        a, b = gen_family(name, seed), gen_family(name, seed)
        assert instance_to_json(a) == instance_to_json(b)
        back = instance_from_json(instance_to_json(a, name, seed))
        assert instance_to_json(back, name, seed) == instance_to_json(a, name, seed)


@pytest.mark.parametrize("name", ["adversarial-removal-schedule", "bounded-mind-change",
                                  "functional-with-trigger-depth", "tmin-enumeration"])
def test_solver_answers_verify(name):
    for seed in range(30):
        inst = gen_family(name, seed)
        tag = instance_to_json(inst)["problem"]
        tag = {"FOTT2": "FOTT2"}.get(tag, tag)
        assert verify_solution(tag, inst, solve(tag, inst)) == V


def test_unknown_family_rejected():
    with pytest.raises(ValueError):
        gen_family("no-such-family", 0)
