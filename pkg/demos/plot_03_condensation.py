"""
Condensing a commit tree
========================

A unitary commit tree labels each vertex with a small monochromatic copy
on which the functional has committed to one answer.  Colour its leaves
with two colours and condensation finds a half-height commit tree whose
leaves all come from one colour class.
"""

import random

from indivq.committree import condense, find_unitary_commit_tree, validate
from indivq.problems import Functional
from indivq.trees import PivotPromise, TreeColouring

col = TreeColouring(2, 20, PivotPromise(residual=(0,)))
f = Functional((((0, ""), 5), ((1, ""), 5)))

T = find_unitary_commit_tree(col, f, 0, 5, 4)
print("height", T.height, "with", len(T.leaves()), "leaves")
print("defects:", validate(T, col, f))

rng = random.Random(7)
d = {p: rng.randrange(2) for p in T.leaves()}
print("leaf colours:", [d[p] for p in T.leaves()])

r = condense(T, d)
print("condensed height", r.tree.height, "colour", r.colour)
# each condensed vertex remembers where it came from
for p, q in sorted(r.origin.items()):
    print(f"  {p} <- {q}")
print("steps:", r.steps)
