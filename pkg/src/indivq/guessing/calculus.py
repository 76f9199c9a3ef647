"""Operations on guessers: lifting along reductions, composition, promotion, factoring.

Outer machines are assumed to write their whole answer in a single stage;
every outer machine in :mod:`indivq.reductions` does.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

from ..problems import PAD, SPEC_MARK, CoEnumLimit, DelayedInstance, removal_token, solve
from ..stagecore import Feed, FnMachine, ReductionWitness, Run, StageMachine, Verdict
from .core import (
    EVENTUALLY, FINITELY, FIXED, Guesser, GuessTranscript, declare_token, decode_guess_token,
    final_token, open_token, run_guesser, slot_correct, verify_guesses,
)


def identity_witness(problem: str, answer_len: Callable[[list], Optional[int]]) -> ReductionWitness:
    """``problem <= problem`` with ``K`` copying the name and ``H`` buffering the answer."""

    def h_step(st, fresh):
        if fresh["answer"] is not None:
            st["ans"].append(fresh["answer"])
        need = answer_len(st["ans"]) if st["ans"] else None
        if st["done"] or need is None or len(st["ans"]) < need:
            return st, {}
        st["done"] = True
        return st, {"out": st["ans"][:need]}

    return ReductionWitness(
        f"id[{problem}]", problem, problem,
        FnMachine("id.K", lambda st, fresh: (st, {"out": [] if fresh["in"] is None else [fresh["in"]]})),
        FnMachine("id.H", h_step, lambda: {"ans": [], "done": False}, inputs=("in", "answer")),
        lambda inst, run: inst,
    )


# -- lifting ------------------------------------------------------------------------

class _LiftedMachine(StageMachine):
    def __init__(self, w: ReductionWitness, g: Guesser):
        self.w, self.g = w, g
        self.name = f"lift({w.id},{g.id})"

    def start(self):
        return {"k": Run(self.w.inner), "pipe": Feed(), "g": Run(self.g.machine),
                "prefix": [], "h": {}, "g_tokens": []}

    def _advance(self, st, entry, feed_input=True):
        tok = None
        if feed_input and entry["pos"] < len(st["prefix"]):
            tok = st["prefix"][entry["pos"]]
            entry["pos"] += 1
        return entry["run"].advance({"in": tok, "answer": entry["ans"].pop()}).get("out", [])

    def step(self, st, fresh):
        if fresh["in"] is not None:
            st["prefix"].append(fresh["in"])
        st["pipe"].push(st["k"].advance({"in": fresh["in"]}).get("out", []))
        out = []
        for tok in st["g"].advance({"in": st["pipe"].pop()}).get("out", []):
            st["g_tokens"].append(tok)
            kind, *rest = decode_guess_token(tok)
            if kind != "final":
                out.append(tok)
                continue
            i, value = rest
            entry = {"run": Run(self.w.outer), "pos": 0, "ans": Feed(value)}
            st["h"][i] = entry
            while entry["pos"] < len(st["prefix"]) - 1:
                emitted = self._advance(st, entry)
                if emitted:
                    out.append(final_token(i, emitted))
                    entry["done"] = True
                    break
        for i, entry in list(st["h"].items()):
            if entry.get("done"):
                continue
            emitted = self._advance(st, entry)
            # drain the answer without waiting for more input
            while not emitted and entry["ans"].pending():
                emitted = self._advance(st, entry, feed_input=False)
            if emitted:
                out.append(final_token(i, emitted))
                entry["done"] = True
        return st, {"out": out}


def lift_guesser(w: ReductionWitness, g: Guesser, budget: Optional[Callable] = None) -> Guesser:
    """A guesser for ``w.source`` from one for ``w.oracle`` (outer witness per slot)."""
    if g.problem.split("_")[0] != w.oracle.split("_")[0]:
        raise ValueError(f"guesser answers {g.problem!r}, witness queries {w.oracle!r}")
    return Guesser(f"lift({w.id},{g.id})", w.source, g.flavor, _LiftedMachine(w, g), k=g.k,
                   budget=budget or (lambda inst: 2 * w.budget(inst) + 16))


def inner_transcript(lifted: Guesser, inst, budget: Optional[int] = None):
    """Run a lifted guesser; also return the transcript of the guesser it lifts."""
    m = lifted.machine
    t = lifted.budget(inst) if budget is None else budget
    run = Run(m)
    outer = GuessTranscript(lifted.problem, lifted.flavor, lifted.k)
    feed = Feed(inst.name(t))
    inner = GuessTranscript(m.g.problem, m.g.flavor, m.g.k)
    seen = 0
    for stage in range(t):
        for tok in run.advance({"in": feed.pop()}).get("out", []):
            outer.record(stage, tok)
        for tok in run.state["g_tokens"][seen:]:
            inner.record(stage, tok)
        seen = len(run.state["g_tokens"])
    outer.stages = inner.stages = t
    return outer, inner, run


# -- composition ---------------------------------------------------------------------

@dataclass(frozen=True)
class StarInstance:
    """An ``f * g`` instance: a ``g`` instance plus a computable bridge to ``f`` instances.

    A solution is ``[len(z)] + z + y`` with ``z`` solving the ``g`` instance and
    ``y`` solving ``bridge(z)``.
    """

    inner: Any
    bridge: Callable[[tuple], Any]
    f_problem: str
    g_problem: str

    @property
    def stabilization(self) -> int:
        return self.inner.stabilization

    def name(self, n: int) -> list[int]:
        return self.inner.name(n)

    def judge(self, toks) -> bool:
        toks = list(toks)
        if not toks or len(toks) < 1 + toks[0]:
            return False
        z, y = tuple(toks[1:1 + toks[0]]), toks[1 + toks[0]:]
        if not slot_correct(self.g_problem, self.inner, z):
            return False
        try:
            target = self.bridge(z)
        except (ValueError, IndexError):
            return False
        return slot_correct(self.f_problem, target, y)


SUPPORTED = {(FIXED, FIXED): FIXED, (FIXED, FINITELY): FINITELY, (FINITELY, EVENTUALLY): EVENTUALLY}


def compose_guessers(f: Guesser, g: Guesser, bridge: Callable[[tuple], Any]) -> Guesser:
    """A guesser for ``f * g``; each finalized ``g`` guess spawns a run of ``f`` on ``bridge(z)``."""
    flavor = SUPPORTED.get((f.flavor, g.flavor))
    if flavor is None:
        raise ValueError(f"composition of ({f.flavor}, {g.flavor}) guessers is not supported")
    k = f.k * g.k if flavor == FIXED else None

    def start():
        return {"g": Run(g.machine), "opened": 0, "next": 0, "stage": 0}

    def ensure_open(st, n, out):
        while st["opened"] < n:
            out.append(open_token())
            st["opened"] += 1

    def step(st, fresh):
        out = []
        if flavor == FIXED and st["stage"] == 0:
            ensure_open(st, k, out)
        st["stage"] += 1
        for tok in st["g"].advance({"in": fresh["in"]}).get("out", []):
            kind, *rest = decode_guess_token(tok)
            if kind == "declare" and f.flavor == FIXED:
                out.append(declare_token(f.k * rest[0]))
                ensure_open(st, f.k * rest[0], out)
            if kind != "final":
                continue
            j, z = rest
            try:
                target = bridge(z)
            except (ValueError, IndexError):
                continue
            ftr = run_guesser(f, target)
            if f.flavor == FIXED:
                base = j * f.k
            elif ftr.declared is None:
                continue
            else:
                base = st["next"]
                st["next"] += ftr.declared
                ensure_open(st, st["next"], out)
            for i, y in ftr.finalized():
                ensure_open(st, base + i + 1, out)
                out.append(final_token(base + i, (len(z),) + tuple(z) + tuple(y)))
        return st, {"out": out}

    return Guesser(f"star({f.id},{g.id})", f"STAR({f.problem},{g.problem})", flavor,
                   FnMachine("compose", step, start), k=k, budget=g.budget)


# -- promotion of guessers for delayed problems --------------------------------------

@dataclass
class Promotion:
    verdict: Verdict
    k: Optional[int] = None
    guesser: Optional[Guesser] = None
    pad_stages: Optional[int] = None


def _unwrap_delayed(value):
    if not value or value[0] < 1:
        return None
    return (value[0] - 1,) + tuple(value[1:])


def promote_delayed_guesser(G: Guesser, problem: str, budget: int = 64,
                            unwrap: Callable = _unwrap_delayed) -> Promotion:
    """From a finitely guesser for ``?f`` to a fixed guesser for ``f``.

    The count declared on pure padding is the fixed count; the new guesser
    replays ``G`` on "padding, marker, then the real name".
    """
    if G.flavor != FINITELY:
        raise ValueError("promotion needs a finitely-flavor guesser")
    pad = run_guesser(G, DelayedInstance(None), budget)
    if pad.declared is None:
        return Promotion(Verdict.UNDECIDED)
    k, p = pad.declared, pad.declared_at + 1

    def start():
        return {"g": Run(G.machine), "stage": 0}

    def relay(toks, out):
        for tok in toks:
            kind, *rest = decode_guess_token(tok)
            if kind == "final" and rest[0] < k:
                v = unwrap(rest[1])
                if v is not None:
                    out.append(final_token(rest[0], v))

    def step(st, fresh):
        out = []
        if st["stage"] == 0:
            out += [open_token()] * k
            for _ in range(p):
                relay(st["g"].advance({"in": PAD}).get("out", []), out)
            relay(st["g"].advance({"in": SPEC_MARK}).get("out", []), out)
        st["stage"] += 1
        relay(st["g"].advance({"in": fresh["in"]}).get("out", []), out)
        return st, {"out": out}

    promoted = Guesser(f"promote({G.id})", problem, FIXED, FnMachine("promote", step, start), k=k,
                       budget=lambda inst: G.budget(DelayedInstance(inst, p)))
    return Promotion(Verdict.VERIFIED, k, promoted, p)


# -- factoring an eventually-finitely guesser through C_N ------------------------------

@dataclass
class Factorization:
    F: Guesser

    def extractor(self) -> StageMachine:
        """Reads the name, removes every count the guesser has already exceeded."""
        F = self.F

        def step(st, fresh):
            n_before = st["slots"]
            for tok in st["f"].advance({"in": fresh["in"]}).get("out", []):
                if decode_guess_token(tok)[0] == "open":
                    st["slots"] += 1
            return st, {"out": [removal_token(0, c) for c in range(n_before, st["slots"])]}

        return FnMachine("count_extractor", step, lambda: {"f": Run(F.machine), "slots": 0})

    def count_instance(self, inst, budget: Optional[int] = None) -> CoEnumLimit:
        """The C_N instance the extractor builds, with the run horizon taken as final."""
        t = self.F.budget(inst) if budget is None else budget
        run = Run(self.extractor())
        feed = Feed(inst.name(t))
        for _ in range(t):
            run.advance({"in": feed.pop()})
        return CoEnumLimit("CN", (("cofinite", frozenset(range(run.state["slots"]))),))

    def residual(self, count: int) -> Guesser:
        """Finitely guesser on ``(input, count)``: declare ``count`` at once and replay ``F``."""
        F = self.F

        def step(st, fresh):
            out = []
            if not st["started"]:
                st["started"] = True
                out += [declare_token(count)] + [open_token()] * count
            for tok in st["f"].advance({"in": fresh["in"]}).get("out", []):
                kind, *rest = decode_guess_token(tok)
                if kind == "final" and rest[0] < count:
                    out.append(tok)
            return st, {"out": out}

        return Guesser(f"residual({F.id},{count})", F.problem, FINITELY,
                       FnMachine("residual", step, lambda: {"started": False, "f": Run(F.machine)}),
                       budget=F.budget)

    def run(self, inst, budget: Optional[int] = None) -> tuple[int, GuessTranscript, Verdict]:
        """Extractor, then the C_N answer, then the residual guesser."""
        count = solve("CN", self.count_instance(inst, budget))[0]
        tr = run_guesser(self.residual(count), inst, budget)
        return count, tr, verify_guesses(self.F.problem, inst, tr)


def factor_through_cn(F: Guesser) -> Factorization:
    if F.flavor != EVENTUALLY:
        raise ValueError("factoring needs an eventually-finitely guesser")
    return Factorization(F)


# -- selectors -----------------------------------------------------------------------

def guesser_to_selector(G: Guesser, instances, problem: Optional[str] = None) -> list[dict]:
    """For each instance, the least correct slot index (or a refuted row)."""
    if G.flavor != FIXED:
        raise ValueError("selectors come from fixed-count guessers")
    problem = problem or G.problem
    rows = []
    for idx, inst in enumerate(instances):
        tr = run_guesser(G, inst)
        good = [i for i, v in tr.finalized() if slot_correct(problem, inst, v)]
        rows.append({"index": idx, "value": min(good) if good else None,
                     "verdict": (Verdict.VERIFIED if good else Verdict.REFUTED).value})
    return rows
