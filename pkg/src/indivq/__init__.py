"""Executable reductions, guessers and commit trees for the tree pigeonhole principle."""

from .stagecore import (
    FnMachine, ReductionWitness, RunReport, StageMachine, Verdict, compose_witnesses,
    run_machine, run_reduction,
)
from .trees import (
    PivotPromise, StrongCopy, TreeColouring, antichain_index, canonical_antichain,
    extendibility_oracle, greedy_copy,
)
from .problems import verify_solution

__version__ = "0.1.0"
