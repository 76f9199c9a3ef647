"""Finitary part of TC^*_N: from a witness for ``f <= TC^*_N`` to one for ``f <= RT^1_k``.

The new inner machine guesses the answer vector ``v`` to the ``j`` totalized
choice instances, starting from all zeros and bumping ``v_i`` whenever the
``i``-th instance removes it.  After every bump it restarts the old outer
machine on ``(input, v)`` and keeps writing that machine's latest answer.
"""

from __future__ import annotations

from ..coding import pair, unpair
from ..problems import CoEnumLimit, RTLimit, decode_removal, removal_token
from ..stagecore import Feed, FnMachine, ReductionWitness, Run


def _codomain(tag: str) -> int:
    if not tag.startswith("RT1_"):
        raise ValueError(f"{tag!r} has no finite codomain")
    return int(tag.split("_")[1])


def extract_finitary_from_tcnstar(witness: ReductionWitness, k: int) -> ReductionWitness:
    if witness.oracle != "TCSTAR":
        raise ValueError("the given witness must query TC*_N")
    if _codomain(witness.source) != k:
        raise ValueError("codomain size does not match k")

    def restart(st):
        h = Run(witness.outer)
        st["h"], st["h_in"], st["h_ans"] = h, Feed(st["prefix"]), Feed(st["v"])
        for _ in range(len(st["prefix"]) - 1):
            h.advance({"in": st["h_in"].pop(), "answer": st["h_ans"].pop()})

    def k_step(st, fresh):
        tok = fresh["in"]
        if tok is not None:
            st["prefix"].append(tok)
        emitted = st["base"].advance({"in": tok}).get("out", [])
        changed = False
        for t in emitted:
            if st["v"] is None:
                st["v"] = [0] * t
                st["removed"] = [set() for _ in range(t)]
                changed = True
                continue
            rem = decode_removal(t)
            if rem is None:
                continue
            c, n = rem
            st["removed"][c].add(n)
            while st["v"][c] in st["removed"][c]:
                st["v"][c] += 1
                changed = True
        if changed:
            st["bumps"] += 1
            restart(st)
        elif st["h"] is not None and tok is not None:
            st["h_in"].push([tok])
        if st["h"] is not None:
            st["h"].advance({"in": st["h_in"].pop(), "answer": st["h_ans"].pop()})
            if st["h"].out["out"]:
                st["latest"] = st["h"].out["out"][0]
        return st, {"out": [st["latest"]]}

    def k_start():
        return {"base": Run(witness.inner), "prefix": [], "v": None, "removed": None,
                "h": None, "h_in": None, "h_ans": None, "latest": 0, "bumps": 0}

    def h_step(st, fresh):
        if fresh["answer"] is not None and not st["done"]:
            st["done"] = True
            return st, {"out": [fresh["answer"]]}
        return st, {}

    def limit(inst, run):
        st = run.state
        base = witness.limit(inst, st["base"])
        if base is None or st["v"] is None:
            return None
        final = [base.least_member(c) for c in range(base.comps)]
        if st["v"] != final or st["h"] is None or not st["h"].out["out"]:
            return None
        return RTLimit(k, frozenset([st["latest"]]))

    return ReductionWitness(
        f"fin_from_tcnstar[{witness.id}]", witness.source, f"RT1_{k}",
        FnMachine("fin_from_tcnstar.K", k_step, k_start),
        FnMachine("fin_from_tcnstar.H", h_step, lambda: {"done": False}, inputs=("in", "answer")),
        limit, budget=lambda inst: 2 * witness.budget(inst) + 8,
    )


# -- hand-built witnesses for RT^1_k <= TC^*_N on eventually constant colourings

def _rt_prefix_limit(inst):
    cols = [inst.colour(n) for n in range(len(inst.prefix) + 1)]
    return cols


def rt2_via_tc() -> ReductionWitness:
    """``A = {n : c is constant from n on}``; answer ``c(n)``."""

    def k_step(st, fresh):
        tok = fresh["in"]
        out = []
        if not st["started"]:
            st["started"] = True
            out.append(1)
        if tok is None:
            return st, {"out": out}
        t = len(st["cols"])
        st["cols"].append(tok)
        keep = []
        for n in st["live"]:
            if st["cols"][n] != tok:
                out.append(removal_token(0, n))
            else:
                keep.append(n)
        st["live"] = keep + [t]
        return st, {"out": out}

    def h_step(st, fresh):
        if fresh["in"] is not None:
            st["cols"].append(fresh["in"])
        if fresh["answer"] is not None and st["n"] is None:
            st["n"] = fresh["answer"]
        n = st["n"]
        if not st["done"] and n is not None and n < len(st["cols"]):
            st["done"] = True
            return st, {"out": [st["cols"][n]]}
        return st, {}

    def limit(inst, run):
        if len(inst.palette) != 1:
            raise ValueError("family restricted to eventually constant colourings")
        if run.stages < inst.stabilization + 1:
            return None
        cols = _rt_prefix_limit(inst)
        gone = frozenset(n for n in range(len(cols))
                         if any(cols[m] != cols[n] for m in range(n, len(cols))))
        return CoEnumLimit("TCSTAR", (("cofinite", gone),))

    return ReductionWitness(
        "rt2_via_tc", "RT1_2", "TCSTAR",
        FnMachine("rt2_via_tc.K", k_step, lambda: {"started": False, "cols": [], "live": []}),
        FnMachine("rt2_via_tc.H", h_step, lambda: {"cols": [], "n": None, "done": False},
                  inputs=("in", "answer")),
        limit, budget=lambda inst: 2 * len(inst.prefix) + 8,
    )


def rt3_via_tc2() -> ReductionWitness:
    """Second instance codes ``pair(n, b)``: colour ``b`` is absent from ``n`` on."""
    base = rt2_via_tc()

    def k_step(st, fresh):
        st["inner"], out = base.inner.step(st["inner"], fresh)
        out = list(out.get("out", []))
        if out and out[0] == 1 and not st["hdr"]:
            st["hdr"] = True
            out[0] = 2
        tok = fresh["in"]
        if tok is not None:
            t = st["t"]
            st["t"] += 1
            for n in range(st["cleared"][tok], t + 1):
                out.append(removal_token(1, pair(n, tok)))
            st["cleared"][tok] = t + 1
        return st, {"out": out}

    def h_step(st, fresh):
        if fresh["in"] is not None:
            st["cols"].append(fresh["in"])
        if fresh["answer"] is not None:
            st["ans"].append(fresh["answer"])
        if st["done"] or len(st["ans"]) < 2 or st["ans"][0] >= len(st["cols"]):
            return st, {}
        st["done"] = True
        _, b2 = unpair(st["ans"][1])
        c = st["cols"][st["ans"][0]]
        return st, {"out": [c if c != b2 else min({0, 1, 2} - {b2})]}

    def limit(inst, run):
        first = base.limit(inst, run)
        if first is None:
            return None
        cols = _rt_prefix_limit(inst)
        last = {b: max((m for m in range(len(cols)) if cols[m] == b), default=-1) for b in range(3)}
        eventual = cols[-1]

        def member(code):
            n, b = unpair(code)
            # codes naming a non-colour are never removed
            return b >= 3 or (b != eventual and n > last[b])

        return CoEnumLimit("TCSTAR", (first.sets[0], ("predicate", member)))

    return ReductionWitness(
        "rt3_via_tc2", "RT1_3", "TCSTAR",
        FnMachine("rt3_via_tc2.K", k_step,
                  lambda: {"inner": base.inner.start(), "hdr": False, "t": 0,
                           "cleared": [0, 0, 0]}),
        FnMachine("rt3_via_tc2.H", h_step, lambda: {"cols": [], "ans": [], "done": False},
                  inputs=("in", "answer")),
        limit, budget=lambda inst: 2 * len(inst.prefix) + 8,
    )
