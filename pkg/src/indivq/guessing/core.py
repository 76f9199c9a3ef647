"""Guessers, their token protocol, transcripts and the exact guess verifier.

A guesser is a stage machine reading an instance name on ``in`` and writing
guess tokens on ``out``:

* ``open_token()`` opens the next slot,
* ``final_token(i, value)`` finalizes slot ``i`` with an answer token tuple,
* ``declare_token(c)`` announces the total slot count (finitely flavor).

A slot that is never finalized stands for the bottom element of the
completed codomain and is never correct.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from ..coding import tuple_code, tuple_decode
from ..problems import verify_solution
from ..stagecore import Feed, Run, StageMachine, Verdict

FIXED, FINITELY, EVENTUALLY = "fixed", "finitely", "eventually"
FLAVORS = (FIXED, FINITELY, EVENTUALLY)


def open_token() -> int:
    return tuple_code((0,))


def final_token(slot: int, value) -> int:
    return tuple_code((1, slot) + tuple(value))


def declare_token(count: int) -> int:
    return tuple_code((2, count))


def decode_guess_token(tok: int):
    t = tuple_decode(tok)
    if t == (0,):
        return ("open",)
    if len(t) >= 2 and t[0] == 1:
        return ("final", t[1], t[2:])
    if len(t) == 2 and t[0] == 2:
        return ("declare", t[1])
    raise ValueError(f"not a guess token: {t}")


@dataclass
class Guesser:
    """A guess-emitting machine for one problem tag."""

    id: str
    problem: str
    flavor: str
    machine: StageMachine
    k: Optional[int] = None
    budget: Callable[[Any], int] = lambda inst: 64
    note: str = ""

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if (self.flavor == FIXED) != (self.k is not None):
            raise ValueError("fixed flavor needs k, other flavors must not set it")


@dataclass
class Slot:
    opened: int
    finalized: Optional[int] = None
    value: Optional[tuple] = None

    def to_json(self, index: int) -> dict:
        return {"slot": index, "opened": self.opened, "finalized": self.finalized,
                "value": None if self.value is None else list(self.value)}


@dataclass
class GuessTranscript:
    problem: str
    flavor: str
    k: Optional[int] = None
    slots: list[Slot] = field(default_factory=list)
    declared: Optional[int] = None
    declared_at: Optional[int] = None
    stages: int = 0
    faults: list[str] = field(default_factory=list)

    def record(self, stage: int, tok: int):
        try:
            kind, *rest = decode_guess_token(tok)
        except ValueError as exc:
            self.faults.append(f"stage {stage}: {exc}")
            return
        if kind == "open":
            self.slots.append(Slot(stage))
        elif kind == "declare":
            if self.declared is not None:
                self.faults.append(f"stage {stage}: second declaration")
            else:
                self.declared, self.declared_at = rest[0], stage
        else:
            i, value = rest
            if i >= len(self.slots):
                self.faults.append(f"stage {stage}: slot {i} finalized before it was opened")
            elif self.slots[i].finalized is not None:
                self.faults.append(f"stage {stage}: slot {i} finalized twice")
            else:
                self.slots[i].finalized, self.slots[i].value = stage, tuple(value)

    def finalized(self) -> list[tuple[int, tuple]]:
        return [(i, s.value) for i, s in enumerate(self.slots) if s.finalized is not None]

    def to_json(self) -> dict:
        return {"problem": self.problem, "flavor": self.flavor, "k": self.k,
                "declared": self.declared, "declared_at": self.declared_at,
                "stages": self.stages, "faults": list(self.faults),
                "slots": [s.to_json(i) for i, s in enumerate(self.slots)]}


def audit(tr: GuessTranscript) -> list[str]:
    """Flavor violations in ``tr`` (empty when the transcript is well formed)."""
    bad = list(tr.faults)
    if tr.flavor == FIXED:
        if tr.declared is not None:
            bad.append("fixed-flavor guesser declared a count")
        if len(tr.slots) != tr.k:
            bad.append(f"opened {len(tr.slots)} slots, expected exactly {tr.k}")
        if any(s.opened != 0 for s in tr.slots):
            bad.append("fixed-flavor slot opened after stage 0")
    elif tr.flavor == FINITELY:
        if tr.declared is not None and len(tr.slots) > tr.declared:
            bad.append(f"opened {len(tr.slots)} slots after declaring {tr.declared}")
    elif tr.declared is not None:
        bad.append("eventually-flavor guesser declared a count")
    return bad


def run_guesser(g: Guesser, inst, budget: Optional[int] = None) -> GuessTranscript:
    t = g.budget(inst) if budget is None else budget
    tr = GuessTranscript(g.problem, g.flavor, g.k)
    run = Run(g.machine)
    feed = Feed(inst.name(t))
    for stage in range(t):
        for tok in run.advance({"in": feed.pop()}).get("out", []):
            tr.record(stage, tok)
    tr.stages = t
    return tr


def slot_correct(problem: str, inst, value) -> bool:
    judge = getattr(inst, "judge", None)
    if judge is not None:
        return judge(value)
    return verify_solution(problem, inst, value) == Verdict.VERIFIED


def verify_guesses(problem: str, inst, tr: GuessTranscript) -> Verdict:
    """Verified iff the transcript is well formed and some finalized slot is correct."""
    if audit(tr):
        return Verdict.REFUTED
    if any(slot_correct(problem, inst, v) for _, v in tr.finalized()):
        return Verdict.VERIFIED
    if tr.flavor == FINITELY and tr.declared is None:
        return Verdict.UNDECIDED
    return Verdict.REFUTED


def correct_slots(problem: str, inst, tr: GuessTranscript) -> list[int]:
    return [i for i, v in tr.finalized() if slot_correct(problem, inst, v)]
