"""
Running a reduction stage by stage
==================================

A reduction is a pair of stage machines.  The inner one translates the
source instance into an oracle instance, the outer one turns the oracle's
answer back into a source answer.  Here the pigeonhole problem for two
colours is reduced to the tree version.
"""

from indivq.problems import RTInstance, solver_for, verify_solution
from indivq.reductions import REGISTRY, reduce_rt_to_tt, run_case
from indivq.stagecore import run_reduction

# repeating palette (1,) after the prefix 0, 0, 0
inst = RTInstance(2, (1,), (0, 0, 0))
w = reduce_rt_to_tt(2)
rep = run_reduction(w, inst, solver_for(w.oracle, 1), w.budget(inst), keep_transcript=True)

# the first few stages: what K emitted and what H emitted
for row in rep.transcript[:8]:
    print(row)

# the tree colouring K built, the copy the oracle found, and the verdict
print("oracle instance:", rep.oracle_instance)
print("oracle answer tokens:", rep.oracle_answer)
print("output:", rep.output, "->", rep.verdict.value)

# colour 0 occurs only finitely often, so the verifier refutes it
print("answer 0:", verify_solution("RT1_2", inst, [0]).value)

# every registered reduction on its own promise family
for rid in sorted(REGISTRY):
    verdicts = {run_case(rid, s).verdict.value for s in range(20)}
    print(f"{rid:24s} {REGISTRY[rid].summary:50s} {sorted(verdicts)}")
