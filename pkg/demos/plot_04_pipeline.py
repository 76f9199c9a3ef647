"""
The finitary pipeline
=====================

For a first-order tree instance with a three-valued functional, the
pipeline builds layered commit trees until it can select an extendible
vertex, and reads off the answer there.  It never builds more trees than
there are colours.
"""

import json

from indivq.committree import finitary_pipeline
from indivq.families import gen_family, instance_to_json
from indivq.problems import verify_solution

inst = gen_family({"family": "commit-pipeline", "j": 3}, 4)
res = finitary_pipeline(inst.colouring, inst.functional, 3)
audit = res.to_json()
print(json.dumps({k: audit[k] for k in ("verdict", "answer", "trees_built", "layer_answers")}))
print("selected:", json.dumps(audit["selection"])[:200])

tag = instance_to_json(inst)["problem"]
print("answer", res.answer, "->", verify_solution(tag, inst, [res.answer]).value)

# over a batch of seeds
built = [len(finitary_pipeline(gen_family("commit-pipeline", s).colouring,
                               gen_family("commit-pipeline", s).functional, 3).trees)
         for s in range(40)]
print("trees built per run:", sorted(set(built)), "max", max(built))
