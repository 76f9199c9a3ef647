"""Registered reductions: witness, promise family and oracle solver per id."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..families import gen_family
from ..problems import solver_for
from ..stagecore import ReductionWitness, RunReport, run_reduction
from .basic import (
    reduce_accstar_to_ecfc, reduce_delayed_fott2_to_fott3, reduce_rt_to_tt,
    reduce_tmin_to_lpostar_lpo,
)
from .ecfc import reduce_ecfc_to_tt2
from .finitary import extract_finitary_from_tcnstar, rt2_via_tc, rt3_via_tc2
from .fott import reduce_fott2_to_rtplus
from .tcn import reduce_tcn_to_rtjump, reduce_tt_to_tcn


@dataclass(frozen=True)
class Entry:
    id: str
    summary: str
    family: dict
    witness_for: Callable[[object], ReductionWitness]
    solver_depth: int = 2
    lift_factor: int = 2
    tags: tuple = field(default=())

    def witness(self, inst) -> ReductionWitness:
        return self.witness_for(inst)

    def lift_budget(self, w: ReductionWitness):
        # stages a lifted guesser gets; the outer machine may need to look deeper than K
        return lambda inst: self.lift_factor * w.budget(inst) + 16

    def instance(self, seed: int):
        return gen_family(self.family, seed)


def _fin(inst):
    base = {2: rt2_via_tc, 3: rt3_via_tc2}[inst.k]()
    return extract_finitary_from_tcnstar(base, inst.k)


REGISTRY: dict[str, Entry] = {e.id: e for e in [
    Entry("rt_le_tt", "RT^1_k <= TT^1_k", {"family": "rt-random"},
          lambda inst: reduce_rt_to_tt(inst.k), solver_depth=1),
    Entry("tt_le_tcn", "TT^1_{k+1} <= TC_N^k", {"family": "pivot-random"},
          lambda inst: reduce_tt_to_tcn(inst.k - 1), lift_factor=6),
    Entry("tcn_le_rtjump", "TC_N^k <= (RT^1_{k+1})'", {"family": "bounded-mind-change"},
          lambda inst: reduce_tcn_to_rtjump(inst.comps)),
    Entry("accstar_le_ecfc", "ACC_N^* <= eCFC_N",
          {"family": "adversarial-removal-schedule", "problem": "ACC"},
          lambda inst: reduce_accstar_to_ecfc()),
    Entry("ecfc_le_tt2", "eCFC_N <= TT^1_2",
          {"family": "adversarial-removal-schedule", "problem": "ECFC"},
          lambda inst: reduce_ecfc_to_tt2()),
    Entry("fott2_le_rtplus", "FOTT^1_2 <= RT^1_+", {"family": "functional-with-trigger-depth"},
          lambda inst: reduce_fott2_to_rtplus()),
    Entry("delayed_fott2_le_fott3", "delayed FOTT^1_2 <= FOTT^1_3",
          {"family": "delayed-functional"}, lambda inst: reduce_delayed_fott2_to_fott3()),
    Entry("tmin_le_lpostar_lpo", "Tmin <= LPO^* * LPO", {"family": "tmin-enumeration"},
          lambda inst: reduce_tmin_to_lpostar_lpo()),
    Entry("fin_from_tcnstar", "finitary part of TC_N^*: RT^1_k <= TC_N^* gives RT^1_k <= RT^1_k",
          {"family": "rt-eventually-constant"}, _fin),
]}


def run_case(rid: str, seed: int, budget: Optional[int] = None, inst=None,
             keep_transcript: bool = False) -> RunReport:
    """Run the registered reduction ``rid`` on one family member."""
    entry = REGISTRY[rid]
    inst = entry.instance(seed) if inst is None else inst
    w = entry.witness(inst)
    t = w.budget(inst) if budget is None else budget
    return run_reduction(w, inst, solver_for(w.oracle, entry.solver_depth), t,
                         keep_transcript=keep_transcript)
