"""eCFC_N <= TT^1_2: block the antichain of every removed index with a colour-1 cone."""

from __future__ import annotations

from itertools import combinations, product

from ..problems import CoEnumLimit, decode_removal
from ..stagecore import FnMachine, IllegalOracleInstance, ReductionWitness
from ..trees import (
    PivotPromise, StrongCopy, TreeColouring, antichain_index, canonical_antichain, comparable,
    extends, is_antichain, vertex_at, vindex, vkey,
)


def reselect(antichains, colour_of):
    """Lexicographically least choice ``t_r in s_r`` leaving a 0-coloured witness in each ``s_r``.

    ``colour_of(v)`` is the already-emitted colour of ``v`` or ``None``.
    """
    options = [sorted(a, key=vkey) for a in antichains]
    for ts in product(*options):
        ok = True
        for a_r, t_r in zip(options, ts):
            if not any(a != t_r and all(not comparable(a, t) for t in ts)
                       and colour_of(a) in (None, 0) for a in a_r):
                ok = False
                break
        if ok:
            return ts
    return None


def reduce_ecfc_to_tt2() -> ReductionWitness:
    def k_start():
        return {"k": None, "removed": [], "chosen": (), "cols": []}

    def colour_now(st, v):
        return 1 if any(extends(v, t) for t in st["chosen"]) else 0

    def k_step(st, fresh):
        tok = fresh["in"]
        if tok is not None:
            if st["k"] is None:
                st["k"] = tok
            else:
                rem = decode_removal(tok)
                if rem is not None and rem[1] not in st["removed"]:
                    st["removed"].append(rem[1])
                    if len(st["removed"]) > st["k"]:
                        raise IllegalOracleInstance("more removals than the eCFC bound")
                    cols = st["cols"]
                    chosen = reselect(
                        [canonical_antichain(n, st["k"]) for n in st["removed"]],
                        lambda v: cols[vindex(v)] if vindex(v) < len(cols) else None)
                    if chosen is None:
                        raise IllegalOracleInstance("no admissible reselection")
                    st["chosen"] = chosen
        c = colour_now(st, vertex_at(len(st["cols"])))
        st["cols"].append(c)
        return st, {"out": [c]}

    def h_start():
        return {"k": None, "ans": [], "done": False}

    def h_step(st, fresh):
        if fresh["in"] is not None and st["k"] is None:
            st["k"] = fresh["in"]
        if fresh["answer"] is not None:
            st["ans"].append(fresh["answer"])
        ans = st["ans"]
        if st["done"] or st["k"] is None or not ans or len(ans) < (1 << (ans[0] + 1)):
            return st, {}
        copy = StrongCopy.from_tokens(ans)
        best = min((antichain_index(s) for s in combinations(copy.images, st["k"] + 1)
                    if is_antichain(s)), default=None)
        if best is None:
            return st, {}
        st["done"] = True
        return st, {"out": [best]}

    def limit(inst, run):
        if run.stages < inst.stabilization + 1:
            return None
        st = run.state
        minimal = [t for t in set(st["chosen"])
                   if not any(t != u and extends(t, u) for u in st["chosen"])]
        pivots = tuple((t, (1,)) for t in sorted(minimal, key=vkey))
        base = TreeColouring(2, 8, PivotPromise(pivots=pivots, residual=(0,)))
        emitted = run.out["out"]
        over = tuple((vertex_at(i), c) for i, c in enumerate(emitted)
                     if base.colour(vertex_at(i)) != c)
        return TreeColouring(2, 8, PivotPromise(pivots=pivots, residual=(0,), overrides=over))

    return ReductionWitness(
        "ecfc_le_tt2", "ECFC", "TT1_2",
        FnMachine("ecfc_le_tt2.K", k_step, k_start),
        FnMachine("ecfc_le_tt2.H", h_step, h_start, inputs=("in", "answer")),
        limit, budget=lambda inst: inst.stabilization + 24,
    )


def blocking_holds(colouring: TreeColouring, removed, k: int) -> bool:
    """Every removed antichain has members in cones of opposite eventual colour."""
    for n in removed:
        s = canonical_antichain(n, k)
        ext = [colouring.extendible_colours(v) for v in s]
        if not (any(e == {0} for e in ext) and any(e == {1} for e in ext)):
            return False
    return True
