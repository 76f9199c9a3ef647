"""Reductions whose witnesses are short pass-through constructions."""

from __future__ import annotations

from ..coding import tuple_code, tuple_decode
from ..problems import (
    PAD, SPEC_MARK, CoEnumLimit, FOTTInstance, Functional, LPOCompositeLimit,
    colour_token, decode_fott_token, decode_removal, entry_token, removal_token,
)
from ..stagecore import FnMachine, IllegalOracleInstance, ReductionWitness
from ..trees import PivotPromise, TreeColouring, vertex_at


def _two_port(name, step, start):
    return FnMachine(name, step, start, inputs=("in", "answer"))


# -- RT^1_k <= TT^1_k --------------------------------------------------------

def reduce_rt_to_tt(k: int, depth: int = 1) -> ReductionWitness:
    """Colour each vertex by the instance colour of its length."""
    if k < 1:
        raise ValueError("k must be positive")

    def k_step(st, fresh):
        if fresh["in"] is not None:
            st["cols"].append(fresh["in"])
        v = vertex_at(st["n"])
        if len(v) < len(st["cols"]):
            st["n"] += 1
            return st, {"out": [st["cols"][len(v)]]}
        return st, {}

    def h_step(st, fresh):
        for port in ("in", "answer"):
            if fresh[port] is not None:
                st[port].append(fresh[port])
        ans, cols = st["answer"], st["in"]
        if not st["done"] and len(ans) >= 2:
            root = vertex_at(ans[1])
            if len(root) < len(cols):
                st["done"] = True
                return st, {"out": [cols[len(root)]]}
        return st, {}

    def limit(inst, run):
        if run.stages < inst.stabilization:
            return None
        over = tuple((vertex_at(i), inst.prefix[len(vertex_at(i))])
                     for i in range((1 << len(inst.prefix)) - 1)
                     if inst.prefix[len(vertex_at(i))]
                     != inst.palette[len(vertex_at(i)) % len(inst.palette)])
        return TreeColouring(k, 8, PivotPromise(residual=inst.palette, overrides=over))

    return ReductionWitness(
        "rt_le_tt", f"RT1_{k}", f"TT1_{k}",
        FnMachine("rt_le_tt.K", k_step, lambda: {"cols": [], "n": 0}),
        _two_port("rt_le_tt.H", h_step, lambda: {"in": [], "answer": [], "done": False}),
        limit, budget=lambda inst: 2 * len(inst.prefix) + 24,
    )


# -- ACC_N^* <= eCFC_N -------------------------------------------------------

def reduce_accstar_to_ecfc() -> ReductionWitness:
    """Merge all removal streams into one, dropping repeats; broadcast the answer."""

    def k_step(st, fresh):
        tok = fresh["in"]
        if tok is None:
            return st, {}
        if st["k"] is None:
            st["k"] = tok
            return st, {"out": [tok]}
        rem = decode_removal(tok)
        if rem is None or rem[1] in st["gone"]:
            return st, {"out": [PAD]}
        st["gone"].add(rem[1])
        if len(st["gone"]) > st["k"]:
            raise IllegalOracleInstance("merged removals exceed the eCFC bound")
        return st, {"out": [removal_token(0, rem[1])]}

    def h_step(st, fresh):
        if fresh["in"] is not None and st["k"] is None:
            st["k"] = fresh["in"]
        if fresh["answer"] is not None and st["ans"] is None:
            st["ans"] = fresh["answer"]
        if not st["done"] and st["k"] is not None and st["ans"] is not None:
            st["done"] = True
            return st, {"out": [st["ans"]] * st["k"]}
        return st, {}

    def limit(inst, run):
        if run.stages < inst.stabilization + 1:
            return None
        gone = frozenset(n for _, _, n in inst.schedule)
        return CoEnumLimit("ECFC", (("cofinite", gone),), bound=inst.comps)

    return ReductionWitness(
        "accstar_le_ecfc", "ACC", "ECFC",
        FnMachine("accstar_le_ecfc.K", k_step, lambda: {"k": None, "gone": set()}),
        _two_port("accstar_le_ecfc.H", h_step, lambda: {"k": None, "ans": None, "done": False}),
        limit, budget=lambda inst: inst.stabilization + 4,
    )


# -- Tmin <= LPO^* * LPO -----------------------------------------------------
# K's output codes ("hit", q) as tuple_code((0, q)) and ("count", m) as
# tuple_code((1, m)).  Query 0 is the emptiness test; query i+1 asks "i in A?".

def _hit(q: int) -> int:
    return tuple_code((0, q))


def _count(m: int) -> int:
    return tuple_code((1, m))


def reduce_tmin_to_lpostar_lpo() -> ReductionWitness:
    def k_step(st, fresh):
        tok = fresh["in"]
        if tok is None or tok == PAD:
            return st, {}
        n = tok - 1
        out = []
        if st["m"] is None:
            st["m"] = n
            out += [_hit(0), _count(n)]
        elif n < st["m"] and n not in st["hit"]:
            st["hit"].add(n)
            out.append(_hit(n + 1))
        return st, {"out": out}

    def h_step(st, fresh):
        if fresh["in"] is not None and fresh["in"] != PAD and st["m"] is None:
            st["m"] = fresh["in"] - 1
        if fresh["answer"] is not None:
            st["ans"].append(fresh["answer"])
        ans = st["ans"]
        if st["done"] or not ans:
            return st, {}
        if ans[0] == 0:
            st["done"] = True
            return st, {"out": [0]}
        m = st["m"]
        if m is None or len(ans) < 1 + m:
            return st, {}
        st["done"] = True
        bits = ans[1:1 + m]
        return st, {"out": [next((i for i, b in enumerate(bits) if b), m)]}

    def limit(inst, run):
        if run.stages < inst.stabilization:
            return None
        if not inst.events:
            return _TminLimit(False)
        m = min(inst.events)[1]
        return _TminLimit(True, tuple(i in inst.members for i in range(m)))

    return ReductionWitness(
        "tmin_le_lpostar_lpo", "TMIN", "LPOSTAR_LPO",
        FnMachine("tmin_le_lpostar_lpo.K", k_step, lambda: {"m": None, "hit": set()}),
        _two_port("tmin_le_lpostar_lpo.H", h_step,
                  lambda: {"m": None, "ans": [], "done": False}),
        limit,
        budget=lambda inst: inst.stabilization + max(inst.members, default=0) + 4,
    )


class _TminLimit(LPOCompositeLimit):
    def agrees_with(self, prefix) -> bool:
        for tok in prefix:
            kind, x = tuple_decode(tok)
            if kind == 0 and not (self.first if x == 0 else self.queries[x - 1]):
                return False
            if kind == 1 and x != len(self.queries):
                return False
        return True


# -- ?(1 TT^1_2) <= 1 TT^1_3 ------------------------------------------------

def reduce_delayed_fott2_to_fott3() -> ReductionWitness:
    """Colour 2 everywhere until specified; afterwards pass the inner instance through.

    The extra entry ``(2, root) -> 0`` makes every 2-coloured copy answer 0,
    and inner answers are shifted up by one.
    """

    def k_step(st, fresh):
        tok = fresh["in"]
        out = []
        if not st["started"]:
            st["started"] = True
            out.append(entry_token(2, "", 0))
        if not st["spec"]:
            if tok == SPEC_MARK:
                st["spec"] = True
            else:
                out.append(colour_token(2))
                st["emitted"] += 1
            return st, {"out": out}
        if tok is None:
            return st, {"out": out}
        kind, *rest = decode_fott_token(tok)
        if kind == "entry":
            b, u, n = rest
            out.append(entry_token(b, u, n + 1))
        else:
            if st["inner_seen"] >= st["emitted"]:
                out.append(tok)
                st["emitted"] += 1
            st["inner_seen"] += 1
        return st, {"out": out}

    def h_step(st, fresh):
        if fresh["answer"] is not None and not st["done"]:
            st["done"] = True
            return st, {"out": [fresh["answer"]]}
        return st, {}

    def limit(inst, run):
        if run.stages < inst.stabilization:
            return None
        top = ((2, ""), 0)
        if inst.spec_stage is None:
            return FOTTInstance(TreeColouring.constant(3, 2), Functional((top,)))
        inner = inst.inner
        p = inst.spec_stage
        base = inner.colouring.promise
        over = dict(base.overrides)
        over.update({vertex_at(i): 2 for i in range(p)})
        promise = PivotPromise(base.pivots, base.residual, tuple(sorted(over.items())))
        col = TreeColouring(3, inner.colouring.D, promise)
        fun = Functional((top,) + inner.functional.shifted(1).entries)
        return FOTTInstance(col, fun)

    return ReductionWitness(
        "delayed_fott2_le_fott3", "DELAYED_FOTT2", "FOTT3",
        FnMachine("delayed_fott2_le_fott3.K", k_step,
                  lambda: {"started": False, "spec": False, "emitted": 0, "inner_seen": 0}),
        _two_port("delayed_fott2_le_fott3.H", h_step, lambda: {"done": False}),
        limit, budget=lambda inst: inst.stabilization + 8,
    )
