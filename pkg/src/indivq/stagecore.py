"""Stage-based transducers and the harness that runs reduction witnesses.

A machine consumes at most one fresh token per input port per stage and may
emit finitely many tokens on each output port.  Emissions are never
retracted, so the output after ``t`` stages is a prefix of the output after
any later stage.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence

Token = int


class Verdict(str, enum.Enum):
    VERIFIED = "verified"
    REFUTED = "refuted"
    UNDECIDED = "undecided-at-budget"


class MachineFault(RuntimeError):
    """A machine produced a malformed transition."""


class IllegalOracleInstance(RuntimeError):
    """An inner witness emitted something outside the oracle problem's domain."""


class StageMachine:
    """Base class for deterministic monotone transducers.

    Subclasses implement :meth:`start` and :meth:`step`.  ``step`` receives the
    current state and a mapping from each input port to the fresh token (or
    ``None`` when nothing new is visible) and returns the new state together
    with a mapping from output ports to lists of emitted tokens.
    """

    name = "machine"
    inputs: tuple[str, ...] = ("in",)
    outputs: tuple[str, ...] = ("out",)

    def start(self) -> Any:
        return None

    def step(self, state: Any, fresh: Mapping[str, Optional[Token]]):
        raise NotImplementedError


class FnMachine(StageMachine):
    """Machine from a plain ``(state, fresh) -> (state, emitted)`` function."""

    def __init__(self, name, step, start=lambda: None, inputs=("in",), outputs=("out",)):
        self.name = name
        self._step = step
        self._start = start
        self.inputs = tuple(inputs)
        self.outputs = tuple(outputs)

    def start(self):
        return self._start()

    def step(self, state, fresh):
        return self._step(state, fresh)


class Run:
    """A machine being driven stage by stage."""

    def __init__(self, machine: StageMachine):
        self.machine = machine
        self.state = machine.start()
        self.out: dict[str, list] = {p: [] for p in machine.outputs}
        self.stages = 0

    def advance(self, fresh: Mapping[str, Optional[Token]]) -> dict[str, list]:
        try:
            result = self.machine.step(self.state, fresh)
        except (MachineFault, IllegalOracleInstance):
            raise
        except Exception as exc:  # noqa: BLE001 - re-raised with context
            raise MachineFault(f"{self.machine.name}: step {self.stages} failed: {exc!r}") from exc
        if not (isinstance(result, tuple) and len(result) == 2):
            raise MachineFault(f"{self.machine.name}: step must return (state, emitted)")
        self.state, emitted = result
        emitted = emitted or {}
        for port, toks in emitted.items():
            if port not in self.out:
                raise MachineFault(f"{self.machine.name}: unknown output port {port!r}")
            self.out[port].extend(toks)
        self.stages += 1
        return emitted


class Feed:
    """A FIFO that hands a consumer one buffered token per stage."""

    def __init__(self, source: Optional[Sequence[Token]] = None):
        self.buf = list(source) if source is not None else []
        self.pos = 0

    def push(self, toks: Sequence[Token]):
        self.buf.extend(toks)

    def pending(self) -> int:
        return len(self.buf) - self.pos

    def pop(self) -> Optional[Token]:
        if self.pos < len(self.buf):
            tok = self.buf[self.pos]
            self.pos += 1
            return tok
        return None


def run_machine(machine: StageMachine, inputs: Mapping[str, Sequence[Token]],
                budget: int) -> dict[str, tuple]:
    if budget < 0:
        raise ValueError("budget must be non-negative")
    run = Run(machine)
    feeds = {p: Feed(inputs.get(p, ())) for p in machine.inputs}
    for _ in range(budget):
        run.advance({p: f.pop() for p, f in feeds.items()})
    return {p: tuple(v) for p, v in run.out.items()}


@dataclass
class ReductionWitness:
    """Inner machine ``K`` and outer machine ``H`` for ``source <= oracle``.

    ``limit(instance, k_run)`` returns the exact oracle instance that ``K``
    builds in the limit, or ``None`` while the run has not provably settled.
    ``budget(instance)`` is the documented stage bound after which the
    reduction is expected to verify on its promise family.
    """

    id: str
    source: str
    oracle: str
    inner: StageMachine
    outer: StageMachine
    limit: Callable[[Any, Run], Any]
    budget: Callable[[Any], int] = lambda inst: 64
    monitor: Optional[Callable[[Any, Run], None]] = None
    outer_needs_input: bool = True

    def __post_init__(self):
        if tuple(self.inner.inputs) != ("in",) or tuple(self.inner.outputs) != ("out",):
            raise ValueError(f"{self.id}: inner machine must read 'in' and write 'out'")
        if set(self.outer.inputs) != {"in", "answer"}:
            raise ValueError(f"{self.id}: outer machine must read 'in' and 'answer'")


@dataclass
class RunReport:
    stages_run: int
    output: tuple
    verdict: Verdict
    transcript: Optional[list] = None
    diagnostic: str = ""
    oracle_instance: Any = None
    oracle_answer: tuple = ()
    extra: dict = field(default_factory=dict)


def run_inner(witness: ReductionWitness, instance, budget: int, transcript=None) -> Run:
    run = Run(witness.inner)
    feed = Feed(instance.name(budget))
    for t in range(budget):
        emitted = run.advance({"in": feed.pop()})
        if witness.monitor is not None:
            witness.monitor(instance, run)
        if transcript is not None:
            transcript.append({"stage": t, "K": list(emitted.get("out", []))})
    return run


def run_reduction(witness: ReductionWitness, f_instance, oracle_solver: Callable,
                  budget: int, verifier: Optional[Callable] = None,
                  keep_transcript: bool = False) -> RunReport:
    """Close the loop instance -> K -> oracle -> H and judge H's output."""
    from . import problems

    verify = verifier or (lambda inst, toks: problems.verify_solution(witness.source, inst, toks))
    transcript = [] if keep_transcript else None
    try:
        k_run = run_inner(witness, f_instance, budget, transcript)
    except IllegalOracleInstance as exc:
        return RunReport(budget, (), Verdict.REFUTED, transcript, f"illegal oracle instance: {exc}")
    oracle = witness.limit(f_instance, k_run)
    if oracle is None:
        return RunReport(budget, (), Verdict.UNDECIDED, transcript, "inner witness not settled")
    agree = getattr(oracle, "agrees_with", None)
    if agree is not None and not agree(k_run.out["out"]):
        return RunReport(budget, (), Verdict.REFUTED, transcript,
                         "inner witness emission disagrees with its limit instance", oracle)
    legal = getattr(oracle, "check_legal", None)
    if legal is not None:
        try:
            legal()
        except IllegalOracleInstance as exc:
            return RunReport(budget, (), Verdict.REFUTED, transcript,
                             f"illegal oracle instance: {exc}", oracle)
    answer = tuple(oracle_solver(oracle))
    h_run = Run(witness.outer)
    feeds = {"in": Feed(f_instance.name(budget)), "answer": Feed(answer)}
    for t in range(budget):
        emitted = h_run.advance({p: f.pop() for p, f in feeds.items()})
        if transcript is not None and t < len(transcript):
            transcript[t]["H"] = list(emitted.get("out", []))
    output = tuple(h_run.out["out"])
    verdict = verify(f_instance, output)
    return RunReport(budget, output, verdict, transcript, "", oracle, answer)


class _ComposedInner(StageMachine):
    def __init__(self, first: StageMachine, second: StageMachine):
        self.first, self.second = first, second
        self.name = f"{second.name}∘{first.name}"

    def start(self):
        return {"a": Run(self.first), "b": Run(self.second), "pipe": Feed()}

    def step(self, st, fresh):
        emitted = st["a"].advance({"in": fresh.get("in")})
        st["pipe"].push(emitted.get("out", []))
        out = st["b"].advance({"in": st["pipe"].pop()})
        return st, {"out": list(out.get("out", []))}


class _ComposedOuter(StageMachine):
    inputs = ("in", "answer")

    def __init__(self, k_first: StageMachine, h_first: StageMachine, h_second: StageMachine):
        self.k_first, self.h_first, self.h_second = k_first, h_first, h_second
        self.name = f"compose({h_first.name},{h_second.name})"

    def start(self):
        return {"k": Run(self.k_first), "h2": Run(self.h_second), "h1": Run(self.h_first),
                "g_name": Feed(), "g_answer": Feed(), "f_in": Feed()}

    def step(self, st, fresh):
        if fresh.get("in") is not None:
            st["f_in"].push([fresh["in"]])
        k_out = st["k"].advance({"in": fresh.get("in")})
        st["g_name"].push(k_out.get("out", []))
        h2_out = st["h2"].advance({"in": st["g_name"].pop(), "answer": fresh.get("answer")})
        st["g_answer"].push(h2_out.get("out", []))
        h1_out = st["h1"].advance({"in": st["f_in"].pop(), "answer": st["g_answer"].pop()})
        return st, {"out": list(h1_out.get("out", []))}


def compose_witnesses(outer_w: ReductionWitness, inner_w: ReductionWitness) -> ReductionWitness:
    """Chain ``f <= g`` (``outer_w``) with ``g <= h`` (``inner_w``) into ``f <= h``."""
    if outer_w.oracle != inner_w.source:
        raise ValueError(f"port mismatch: {outer_w.id} queries {outer_w.oracle!r} "
                         f"but {inner_w.id} reduces {inner_w.source!r}")
    inner = _ComposedInner(outer_w.inner, inner_w.inner)

    def limit(instance, run: Run):
        st = run.state
        mid = outer_w.limit(instance, st["a"])
        if mid is None:
            return None
        return inner_w.limit(mid, st["b"])

    def budget(instance):
        # the second leg is timed on the middle instance the first leg settles on
        # the middle stream is read one token per stage, so its length counts too
        first = outer_w.budget(instance)
        run = run_inner(outer_w, instance, first)
        mid = outer_w.limit(instance, run)
        try:
            second = inner_w.budget(mid) if mid is not None else first
        except AttributeError:
            second = 0
        return first + len(run.out["out"]) + 2 * second + 8

    def monitor(instance, run: Run):
        if outer_w.monitor is not None:
            outer_w.monitor(instance, run.state["a"])

    outer = _ComposedOuter(outer_w.inner, outer_w.outer, inner_w.outer)
    return ReductionWitness(f"{outer_w.id}*{inner_w.id}", outer_w.source, inner_w.oracle,
                            inner, outer, limit, budget, monitor)
