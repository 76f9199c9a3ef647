"""The adversary showing ACC^k is not k-guessable."""

from __future__ import annotations

from dataclasses import dataclass

from ..problems import PAD, CoEnumInstance, decode_removal, removal_token
from ..stagecore import Run
from .core import FIXED, GuessTranscript, Guesser, decode_guess_token


@dataclass
class Defeat:
    instance: CoEnumInstance
    transcript: GuessTranscript
    vacuous: bool
    stages: int


def diagonalize_accn(target: Guesser, k: int, budget: int = 64) -> Defeat:
    """Keep the ACC^k instance neutral until a slot is finalized, then spoil it.

    Slot ``i`` finalized with ``(n_0, ..., n_{k-1})`` makes component ``i``
    remove ``n_i``.  Each component removes at most once, so the instance is
    legal; the guesser only ever sees the name it is defeated on.
    """
    if target.flavor != FIXED or target.k != k:
        raise ValueError(f"target must be a fixed {k}-guesser")
    run = Run(target.machine)
    tr = GuessTranscript(target.problem, target.flavor, k)
    name = [k]
    schedule = []
    queue: list[tuple[int, int]] = []
    spoiled: set[int] = set()
    for stage in range(budget):
        # the adversary writes one token, then the guesser moves
        if stage > 0:
            if queue:
                c, n = queue.pop(0)
                schedule.append((len(name) - 1, c, n))
                name.append(removal_token(c, n))
            else:
                name.append(PAD)
        for tok in run.advance({"in": name[stage]}).get("out", []):
            tr.record(stage, tok)
            try:
                kind, *rest = decode_guess_token(tok)
            except ValueError:
                # malformed tokens are already faults in the transcript
                continue
            if kind == "final" and rest[0] < k and rest[0] not in spoiled:
                i, value = rest
                spoiled.add(i)
                queue.append((i, value[i] if i < len(value) else 0))
    # removals still queued at the budget are written after it
    t = len(name) - 1
    for c, n in queue:
        schedule.append((t, c, n))
        t += 1
    tr.stages = budget
    inst = CoEnumInstance("ACC", k, tuple(schedule), header=(k,))
    return Defeat(inst, tr, vacuous=not tr.finalized(), stages=budget)


def acc_monitor(inst: CoEnumInstance, stages: int) -> list[str]:
    """Read ``stages`` tokens of the name and report ACC violations.

    Checks the header and that no component ever removes two different
    numbers; it looks only at the stream, not at the schedule.
    """
    name = inst.name(stages)
    if not name or name[0] != inst.comps:
        return [f"header {name[:1]} does not announce {inst.comps} components"]
    bad, seen = [], {}
    for t, tok in enumerate(name[1:], start=1):
        rem = decode_removal(tok)
        if rem is None:
            continue
        c, n = rem
        if c >= inst.comps:
            bad.append(f"stage {t}: component {c} out of range")
        elif seen.setdefault(c, n) != n:
            bad.append(f"stage {t}: component {c} removes {n} after {seen[c]}")
    return bad
