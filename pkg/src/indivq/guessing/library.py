"""Concrete guessers: correct ones per oracle problem and diagonalizer targets.

Guessers marked "family-bounded" are only correct because the seeded
families keep answers in a known finite range.
"""

from __future__ import annotations

import random
from itertools import product
from typing import Callable

from ..coding import tuple_decode, unpair
from ..problems import PAD, SPEC_MARK, decode_removal
from ..stagecore import FnMachine
from ..trees import greedy_copy, vertex_at, vindex
from .core import (
    EVENTUALLY, FINITELY, FIXED, Guesser, declare_token, final_token, open_token,
)


def _machine(name, step, start):
    return FnMachine(name, step, start)


def _opens(n):
    return [open_token()] * n


# -- correct guessers -----------------------------------------------------------

def all_colours(k: int) -> Guesser:
    """RT^1_k: one slot per colour."""

    def step(st, fresh):
        if st:
            return st, {}
        return True, {"out": _opens(k) + [final_token(c, (c,)) for c in range(k)]}

    return Guesser(f"all-colours-{k}", f"RT1_{k}", FIXED, _machine("all_colours", step, lambda: False), k=k,
                   budget=lambda inst: 2)


def greedy_tt(k: int, depth: int = 1) -> Guesser:
    """TT^1_k: slot ``c`` holds the first greedy ``c``-copy visible in the name."""

    def step(st, fresh):
        first = not st["started"]
        out = _opens(k) if first else []
        st["started"] = True
        if fresh["in"] is not None:
            st["cols"].append(fresh["in"])
        cols = st["cols"]

        def colour(v):
            i = vindex(v)
            return cols[i] if i < len(cols) else None

        known = len(vertex_at(len(cols) - 1)) + 1 if cols else 0
        for c in range(k):
            # a new copy of colour c needs a new vertex of colour c
            if c in st["done"] or not (first or fresh["in"] == c):
                continue
            root = next((vertex_at(i) for i, x in enumerate(cols) if x == c), None)
            if root is None:
                continue
            copy = greedy_copy(colour, root, c, depth, D=known)
            if copy is not None and all(vindex(v) < len(cols) for v in copy.images):
                st["done"].add(c)
                out.append(final_token(c, copy.tokens()))
        return st, {"out": out}

    return Guesser(f"greedy-tt-{k}-d{depth}", f"TT1_{k}", FIXED,
                   _machine("greedy_tt", step, lambda: {"started": False, "cols": [], "done": set()}),
                   k=k, budget=lambda inst: 4 * inst.stabilization + 64,
                   note="correct on colourings whose first greedy copies are extendible")


def tc_tracker(k: int, problem: str = None, header: bool = False, patience: int = 8) -> Guesser:
    """TC^k / ACC: guess the least live vector once it has held for ``patience`` stages."""
    problem = problem or f"TC_{k}"

    def step(st, fresh):
        tok = fresh["in"]
        if tok is not None:
            if header and not st["hdr"]:
                st["hdr"] = True
                return st, {}
            rem = decode_removal(tok)
            if rem is not None and rem[0] < k:
                st["removed"][rem[0]].add(rem[1])
        # removals only grow, so the least live numbers only move up
        least = st["least"]
        for c in range(k):
            while least[c] in st["removed"][c]:
                least[c] += 1
        vec = list(least)
        if vec != st["cur"]:
            st["cur"], st["held"] = vec, 0
        st["held"] += 1
        if st["held"] < patience or vec == st["last"]:
            return st, {}
        st["last"] = vec
        i = st["slots"]
        st["slots"] += 1
        return st, {"out": [open_token(), final_token(i, vec)]}

    return Guesser(f"tc-tracker-{k}", problem, EVENTUALLY,
                   _machine("tc_tracker", step, lambda: {"removed": [set() for _ in range(k)], "least": [0] * k, "cur": None,
                                                           "held": 0, "last": None, "slots": 0,
                                                           "hdr": False}),
                   budget=lambda inst: inst.stabilization + patience + 8,
                   note="correct once every removal has been seen")


def delta_tracker(m: int, depth: int = 2) -> Guesser:
    """(RT^1_m)': for each colour, guess its first ``depth`` numbers again whenever they change."""

    def step(st, fresh):
        tok = fresh["in"]
        out = []
        if tok is not None:
            n, g = unpair(tok)
            st["guess"][n] = g
        for c in range(m):
            cand = [n for n in sorted(st["guess"]) if st["guess"][n] == c][:depth]
            if len(cand) == depth and cand != st["last"].get(c):
                st["last"][c] = cand
                out += [open_token(), final_token(st["slots"], cand)]
                st["slots"] += 1
        return st, {"out": out}

    return Guesser(f"delta-tracker-{m}", f"RTJUMP_{m}", EVENTUALLY,
                   _machine("delta_tracker", step, lambda: {"guess": {}, "last": {}, "slots": 0}),
                   budget=lambda inst: 64)


def ecfc_all() -> Guesser:
    """eCFC: read the bound ``b`` and guess ``0..b``; at most ``b`` of them are removed."""

    def step(st, fresh):
        if st or fresh["in"] is None:
            return st, {}
        b = fresh["in"]
        return True, {"out": [declare_token(b + 1)] + _opens(b + 1)
                      + [final_token(i, (i,)) for i in range(b + 1)]}

    return Guesser("ecfc-all", "ECFC", FINITELY, _machine("ecfc_all", step, lambda: False),
                   budget=lambda inst: 2)


def rtpar_all() -> Guesser:
    """(RT^1_2)^m: read ``m`` and guess every 0/1 vector."""

    def step(st, fresh):
        if st or fresh["in"] is None:
            return st, {}
        m = fresh["in"]
        vecs = list(product((0, 1), repeat=m))
        return True, {"out": [declare_token(len(vecs))] + _opens(len(vecs))
                      + [final_token(i, v) for i, v in enumerate(vecs)]}

    return Guesser("rtpar-all", "RT1PLUS_PAR", FINITELY, _machine("rtpar_all", step, lambda: False),
                   budget=lambda inst: 2)


def value_range(n: int, problem: str = "FOTT3") -> Guesser:
    """Family-bounded: guess every value below ``n``."""

    def step(st, fresh):
        if st:
            return st, {}
        return True, {"out": _opens(n) + [final_token(i, (i,)) for i in range(n)]}

    return Guesser(f"value-range-{n}-{problem}", problem, FIXED, _machine("value_range", step, lambda: False),
                   k=n, budget=lambda inst: 2, note="family-bounded")


def lpo_tree() -> Guesser:
    """LPO^* * LPO: guess "empty" at once, then the current answer vector on every new hit."""

    def step(st, fresh):
        out = []
        if not st["started"]:
            st["started"] = True
            out += [open_token(), final_token(0, (0,))]
        tok = fresh["in"]
        if tok is None:
            return st, {"out": out}
        kind, x = tuple_decode(tok)
        if kind == 1:
            st["m"] = x
        elif x > 0:
            st["hits"].add(x - 1)
        if st["m"] is not None:
            bits = tuple(int(i in st["hits"]) for i in range(st["m"]))
            if bits != st["last"]:
                st["last"] = bits
                out += [open_token(), final_token(st["slots"], (1,) + bits)]
                st["slots"] += 1
        return st, {"out": out}

    return Guesser("lpo-tree", "LPOSTAR_LPO", EVENTUALLY,
                   _machine("lpo_tree", step, lambda: {"started": False, "m": None, "hits": set(),
                                                       "last": None, "slots": 1}),
                   budget=lambda inst: 32)


def delayed_all_colours(k: int) -> Guesser:
    """?RT^1_k: declare ``k`` on padding, commit colour 0 at once, the rest after specification.

    Answer tokens follow the delayed convention: ``c + 1`` names colour ``c``.
    """

    def step(st, fresh):
        out = []
        if not st["started"]:
            st["started"] = True
            out += [declare_token(k), open_token(), final_token(0, (1,))]
        tok = fresh["in"]
        if tok is not None and not st["spec"] and tok == SPEC_MARK:
            st["spec"] = True
        elif tok is not None and st["spec"] and not st["done"]:
            # order the remaining colours starting from the first colour read
            st["done"] = True
            rest = sorted(range(1, k), key=lambda c: (c != tok, c))
            for i, c in enumerate(rest):
                out += [open_token(), final_token(1 + i, (c + 1,))]
        return st, {"out": out}

    return Guesser(f"delayed-all-colours-{k}", f"DELAYED_RT1_{k}", FINITELY,
                   _machine("delayed_all_colours", step,
                            lambda: {"started": False, "spec": False, "done": False}),
                   budget=lambda inst: inst.stabilization + 4)


def delayed_range(n: int, problem: str = "DELAYED_FOTT2") -> Guesser:
    """Family-bounded ?FOTT: value 0 at once, values ``1..n-1`` after specification."""

    def step(st, fresh):
        out = []
        if not st["started"]:
            st["started"] = True
            out += [declare_token(n), open_token(), final_token(0, (1,))]
        if fresh["in"] == SPEC_MARK and not st["done"]:
            st["done"] = True
            for v in range(1, n):
                out += [open_token(), final_token(v, (v + 1,))]
        return st, {"out": out}

    return Guesser(f"delayed-range-{n}", problem, FINITELY,
                   _machine("delayed_range", step, lambda: {"started": False, "done": False}),
                   budget=lambda inst: inst.stabilization + 4, note="family-bounded")


# -- diagonalizer targets for ACC^k -------------------------------------------------

def acc_target(kind: str, k: int, param: int) -> Guesser:
    """Deterministic ``k``-guessers for ACC^k used to exercise the diagonalizer.

    ``kind`` is one of constant, periodic, echo, random, lazy, silent.
    """

    def finals_for(stage, seen, st):
        out = []
        for i in range(k):
            if i in st["done"]:
                continue
            if kind == "constant" and stage >= param % 3:
                value = (param,) * k
            elif kind == "periodic" and stage >= (param + 1) * (i + 1):
                value = tuple((stage + j) % (param + 2) for j in range(k))
            elif kind == "echo" and len(seen) >= i + 1 + param:
                value = tuple((sum(seen) + j * param) % 7 for j in range(k))
            elif kind == "random" and stage >= st["when"][i]:
                value = st["values"][i]
            elif kind == "lazy" and i == 0 and stage >= param:
                value = (param,) * k
            else:
                continue
            st["done"].add(i)
            out.append(final_token(i, value))
        return out

    def start():
        rng = random.Random(f"acc-target:{k}:{param}")
        return {"stage": 0, "seen": [], "done": set(),
                "when": [rng.randrange(6) for _ in range(k)],
                "values": [tuple(rng.randrange(9) for _ in range(k)) for _ in range(k)]}

    def step(st, fresh):
        out = _opens(k) if st["stage"] == 0 else []
        if fresh["in"] is not None:
            st["seen"].append(fresh["in"])
        if kind != "silent":
            out += finals_for(st["stage"], st["seen"], st)
        st["stage"] += 1
        return st, {"out": out}

    return Guesser(f"acc-{kind}-k{k}-p{param}", "ACC", FIXED,
                   _machine(f"acc_{kind}", step, start), k=k, budget=lambda inst: 24)


TARGET_KINDS = {"constant": range(4), "periodic": range(3), "echo": range(3),
                "random": range(6), "lazy": range(1, 3)}


def acc_targets() -> list[str]:
    """Ids of the registered ACC^k target guessers, k in 1..3."""
    return [f"acc-{kind}-k{k}-p{p}" for k in (1, 2, 3)
            for kind, params in TARGET_KINDS.items() for p in params]


# -- registry -----------------------------------------------------------------------

def _parse_target(gid: str) -> Guesser:
    _, kind, k, p = gid.split("-")
    return acc_target(kind, int(k[1:]), int(p[1:]))


FACTORIES: dict[str, Callable[[], Guesser]] = {
    "ecfc-all": ecfc_all, "rtpar-all": rtpar_all, "lpo-tree": lpo_tree,
    "acc-silent-k2-p0": lambda: acc_target("silent", 2, 0),
}
for _k in (1, 2, 3):
    FACTORIES[f"all-colours-{_k}"] = lambda k=_k: all_colours(k)
    FACTORIES[f"tc-tracker-{_k}"] = lambda k=_k: tc_tracker(k)
    FACTORIES[f"delta-tracker-{_k + 1}"] = lambda k=_k: delta_tracker(k + 1)
    FACTORIES[f"greedy-tt-{_k + 1}-d2"] = lambda k=_k: greedy_tt(k + 1, 2)
    FACTORIES[f"delayed-all-colours-{_k + 1}"] = lambda k=_k: delayed_all_colours(k + 1)
for _gid in acc_targets():
    FACTORIES[_gid] = lambda gid=_gid: _parse_target(gid)


def get_guesser(gid: str) -> Guesser:
    try:
        return FACTORIES[gid]()
    except KeyError:
        raise KeyError(f"unknown guesser {gid!r}") from None


def guesser_for_oracle(tag: str) -> Guesser:
    """A guesser for the oracle problem ``tag`` of a registered reduction."""
    if tag.startswith("TT1_"):
        return greedy_tt(int(tag[4:]), 2)
    if tag.startswith("TC_"):
        return tc_tracker(int(tag[3:]))
    if tag.startswith("RTJUMP_"):
        return delta_tracker(int(tag[7:]))
    if tag == "ECFC":
        return ecfc_all()
    if tag == "RT1PLUS_PAR":
        return rtpar_all()
    if tag.startswith("FOTT"):
        return value_range(10, tag)
    if tag == "LPOSTAR_LPO":
        return lpo_tree()
    if tag.startswith("RT1_"):
        return all_colours(int(tag[4:]))
    raise KeyError(f"no guesser for {tag!r}")
