"""First-order part of TT^1_2 reduced to RT^1_+ via one pair of writer processes per leaf."""

from __future__ import annotations

from typing import Optional

from ..problems import RTParLimit, decode_fott_token
from ..stagecore import FnMachine, ReductionWitness
from ..trees import cone, extends, vertex_at, vindex


class TriggerScanner:
    """Incremental view of a first-order TT name.

    Finds, in canonical order (largest breadth-first index first, then the
    root), depth-1 monochromatic copies on which the functional has a value.
    """

    def __init__(self):
        self.entries: dict[tuple[int, str], int] = {}
        self.cols: list[int] = []
        self.least_below: dict[tuple[str, int], int] = {}

    def value(self, b: int, r: str) -> Optional[int]:
        for n in range(len(r), -1, -1):
            v = self.entries.get((b, r[:n]))
            if v is not None:
                return v
        return None

    def colour(self, v: str) -> Optional[int]:
        i = vindex(v)
        return self.cols[i] if i < len(self.cols) else None

    def push(self, tok: int) -> Optional[str]:
        """Read one token; return the new vertex when it was a colour token."""
        kind, *rest = decode_fott_token(tok)
        if kind == "entry":
            b, u, n = rest
            self.entries[(b, u)] = n
            return None
        x = vertex_at(len(self.cols))
        c = rest[0]
        self.cols.append(c)
        for n in range(len(x) + 1):
            self.least_below.setdefault((x[:n], c), len(self.cols) - 1)
        return x

    def copy_closed_by(self, x: str, base: str, colour: int):
        """Least trigger copy of ``colour`` below ``base`` whose largest vertex is ``x``."""
        q = vindex(x)
        if self.cols[q] != colour:
            return None
        for n in range(len(base), len(x)):
            r = x[:n]
            if self.cols[vindex(r)] != colour:
                continue
            val = self.value(colour, r)
            if val is None:
                continue
            side = x[n]
            other = self.least_below.get((r + ("1" if side == "0" else "0"), colour))
            if other is None or other >= q:
                continue
            leaves = (x, vertex_at(other)) if side == "0" else (vertex_at(other), x)
            return r, leaves, val
        return None

    def least_strictly_below(self, w: str, colour: int) -> Optional[int]:
        found = [self.least_below.get((w + i, colour)) for i in "01"]
        found = [f for f in found if f is not None]
        return min(found) if found else None


class _Component:
    """Phase A search plus the 0- and 1-writer for one leaf ``v``."""

    def __init__(self, v: str, b: int):
        self.v, self.b = v, b
        self.tree = None
        self.cursor_gen = None
        self.cursor = None
        self.chain: list[str] = []
        self.pending = {0: False, 1: False}
        self.last = 0

    def feed(self, sc: TriggerScanner, x: str):
        if self.tree is None:
            if extends(x, self.v):
                found = sc.copy_closed_by(x, self.v, 1 - self.b)
                if found is not None:
                    self.tree = found
                    self.cursor_gen = cone_forever(self.v)
                    self.cursor = next(self.cursor_gen)
                    self.chain = list(found[1])
                    self.search(sc)
            return
        c = sc.cols[vindex(x)]
        if not self.pending[1] and c == 1 - self.b and extends(x, self.cursor) and x != self.cursor:
            self._event1(sc)
        if not self.pending[0] and c == self.b:
            for j, w in enumerate(self.chain):
                if extends(x, w) and x != w:
                    self.chain[j] = x
                    self.pending[0] = True
                    break

    def _event1(self, sc):
        self.pending[1] = True
        self.cursor = next(self.cursor_gen)

    def search(self, sc: TriggerScanner):
        if not self.pending[1] and sc.least_strictly_below(self.cursor, 1 - self.b) is not None:
            self._event1(sc)
        if not self.pending[0]:
            for j, w in enumerate(self.chain):
                nxt = sc.least_strictly_below(w, self.b)
                if nxt is not None:
                    self.chain[j] = vertex_at(nxt)
                    self.pending[0] = True
                    break

    def digit(self, sc: TriggerScanner, turn: int) -> int:
        if self.tree is None:
            return 0
        for p in ((1, 0) if turn else (0, 1)):
            if self.pending[p]:
                self.pending[p] = False
                self.last = p
                self.search(sc)
                return p
        return self.last


def cone_forever(u: str):
    extra = 0
    while True:
        yield from (w for w in cone(u, len(u) + extra) if len(w) == len(u) + extra)
        extra += 1


def reduce_fott2_to_rtplus() -> ReductionWitness:
    def k_start():
        return {"sc": TriggerScanner(), "P": None, "comps": [], "turn": 0}

    def k_step(st, fresh):
        sc = st["sc"]
        x = sc.push(fresh["in"]) if fresh["in"] is not None else None
        out = []
        if x is not None and st["P"] is None:
            for b in (0, 1):
                found = sc.copy_closed_by(x, "", b)
                if found is not None:
                    st["P"] = (b,) + found
                    st["comps"] = [_Component(v, b) for v in found[1]]
                    for i in range(len(sc.cols)):
                        for comp in st["comps"]:
                            comp.feed(sc, vertex_at(i))
                    out.append(len(st["comps"]))
                    break
            x = None
        if st["P"] is None:
            return st, {}
        if x is not None:
            for comp in st["comps"]:
                comp.feed(sc, x)
        st["turn"] ^= 1
        code = sum(comp.digit(sc, st["turn"]) << i for i, comp in enumerate(st["comps"]))
        out.append(code)
        return st, {"out": out}

    def h_start():
        return {"sc": TriggerScanner(), "P": None, "ans": [], "done": False, "scan": 0}

    def h_step(st, fresh):
        sc = st["sc"]
        if fresh["in"] is not None:
            x = sc.push(fresh["in"])
            if x is not None and st["P"] is None:
                for b in (0, 1):
                    found = sc.copy_closed_by(x, "", b)
                    if found is not None:
                        st["P"] = (b,) + found
                        break
        if fresh["answer"] is not None:
            st["ans"].append(fresh["answer"])
        P = st["P"]
        if st["done"] or P is None or len(st["ans"]) < len(P[2]):
            return st, {}
        b, _, leaves, n0 = P
        ones = [i for i, bit in enumerate(st["ans"][:len(leaves)]) if bit == 1]
        if not ones:
            st["done"] = True
            return st, {"out": [n0]}
        v = leaves[ones[0]]
        # resume the scan where the previous stage stopped
        for i in range(st["scan"], len(sc.cols)):
            x = vertex_at(i)
            if extends(x, v):
                found = sc.copy_closed_by(x, v, 1 - b)
                if found is not None:
                    st["done"] = True
                    return st, {"out": [found[2]]}
        st["scan"] = len(sc.cols)
        return st, {}

    return ReductionWitness(
        "fott2_le_rtplus", "FOTT2", "RT1PLUS_PAR",
        FnMachine("fott2_le_rtplus.K", k_step, k_start),
        FnMachine("fott2_le_rtplus.H", h_step, h_start, inputs=("in", "answer")),
        fott_limit, budget=fott_budget,
    )


def fott_budget(inst) -> int:
    M = inst.colouring.promise.stable_depth
    return len(inst.functional.entries) + (1 << (M + 5)) + 64


def _exists_trigger_copy(inst, v: str, colour: int) -> bool:
    col = inst.colouring
    keylen = max((len(u) for (_, u), _ in inst.functional.entries), default=0)
    pal = max([len(col.promise.residual)] + [len(p) for _, p in col.promise.pivots])
    horizon = max(col.promise.stable_depth, keylen, len(v)) + pal + 1
    for r in cone(v, horizon):
        if (col.colour(r) == colour and inst.functional.value(colour, r) is not None
                and colour in col.colours_below(r + "0") and colour in col.colours_below(r + "1")):
            return True
    return False


def _least_strict(col, w: str, colour: int) -> Optional[str]:
    if colour not in col.colours_below(w + "0") | col.colours_below(w + "1"):
        return None
    depth = len(w) + 1
    while True:
        for u in cone(w, depth):
            if len(u) == depth and col.colour(u) == colour:
                return u
        depth += 1


def _chain_infinite(col, start: str, b: int) -> bool:
    M = col.promise.stable_depth
    w = start
    while True:
        nxt = _least_strict(col, w, b)
        if nxt is None:
            return False
        w = nxt
        if len(w) >= M:
            return True


def fott_limit(inst, run):
    st = run.state
    if st["P"] is None:
        return None
    col = inst.colouring
    b = st["P"][0]
    sets = []
    for comp in st["comps"]:
        if not _exists_trigger_copy(inst, comp.v, 1 - b):
            sets.append(frozenset([0]))
            continue
        if comp.tree is None:
            return None
        one_inf = col.dense_below(comp.v, 1 - b)
        zero_inf = any(_chain_infinite(col, u, b) for u in comp.tree[1])
        digits = {d for d, inf in ((0, zero_inf), (1, one_inf)) if inf}
        if not digits:
            stuck1 = (1 - b) not in col.colours_below(comp.cursor + "0") | \
                col.colours_below(comp.cursor + "1")
            stuck0 = all(_least_strict(col, w, b) is None for w in comp.chain)
            if comp.pending[0] or comp.pending[1] or not (stuck0 and stuck1):
                return None
            digits = {comp.last}
        sets.append(frozenset(digits))
    return _RTParLimit(tuple(sets))


class _RTParLimit(RTParLimit):
    pass
