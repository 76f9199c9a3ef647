"""Seeded promise families and the JSON instance format.

Every instance is written as one JSON object::

    {"problem": tag, "family": name, "seed": int, "k": int, "D": int,
     "promise": {...}, "schedule": [[stage, payload], ...], ...}

``promise`` is a :class:`~indivq.trees.PivotPromise` dump for tree problems
and ``{}`` otherwise.  ``schedule`` lists removals ``[stage, [comp, n]]`` for
co-enumerations and enumerations ``[stage, n]`` for Tmin.  Problem-specific
extras (``palette``, ``prefix``, ``functional``, ``spec_stage``, ...) sit
alongside.  Keys are sorted on output so the bytes are reproducible.
"""

from __future__ import annotations

import json
import os
import random
from pathlib import Path
from typing import Callable, Union

from .problems import (
    CoEnumInstance, DelayedInstance, FOTTInstance, Functional, RTInstance, TminInstance,
)
from .trees import PivotPromise, TreeColouring, cone, vertex_at

FAMILIES: dict[str, Callable] = {}


def family(name: str):
    def register(fn):
        FAMILIES[name] = fn
        return fn
    return register


def _descriptor(spec: Union[str, dict]) -> dict:
    if isinstance(spec, str):
        spec = {"family": spec}
    if spec.get("family") not in FAMILIES:
        raise ValueError(f"unknown family {spec.get('family')!r}")
    return dict(spec)


def gen_family(spec: Union[str, dict], seed: int):
    """Deterministic instance of a registered family."""
    desc = _descriptor(spec)
    rng = random.Random(f"{desc['family']}:{seed}:{json.dumps(desc, sort_keys=True)}")
    return FAMILIES[desc["family"]](rng, seed, **{k: v for k, v in desc.items() if k != "family"})


# -- generators ---------------------------------------------------------------

def random_promise(rng: random.Random, k: int, max_depth: int = 3,
                   overrides: int = 2, max_palette: int = 2) -> PivotPromise:
    """Random antichain of pivot cones with dense palettes, plus a few overrides."""
    pivots = []

    def palette():
        size = rng.randint(1, min(k, max_palette))
        return tuple(rng.sample(range(k), size))

    def grow(v):
        r = rng.random()
        if len(v) >= max_depth or r < 0.3:
            if r < 0.6 or len(v) >= max_depth:
                pivots.append((v, palette()))
            return
        grow(v + "0")
        grow(v + "1")

    if rng.random() < 0.8:
        grow("0")
        grow("1")
    over = {}
    for _ in range(rng.randint(0, overrides)):
        over[vertex_at(rng.randrange(7))] = rng.randrange(k)
    return PivotPromise(tuple(pivots), palette(), tuple(sorted(over.items())))


def random_functional(rng: random.Random, k: int, extra_keys: int = 3, values: int = 10):
    entries = {(b, ""): rng.randrange(values) for b in range(k)}
    for _ in range(rng.randint(0, extra_keys)):
        u = vertex_at(rng.randrange(1, 15))
        entries[(rng.randrange(k), u)] = rng.randrange(values)
    return Functional(tuple(sorted(entries.items())))


@family("constant")
def _constant(rng, seed, problem="RT1", k=2, colour=None, D=6):
    c = seed % k if colour is None else colour
    if problem == "RT1":
        return RTInstance(k, (c,))
    return TreeColouring.constant(k, c, D)


@family("rt-random")
def _rt_random(rng, seed, k=None, max_prefix=6):
    k = k or rng.choice([2, 3])
    pal = tuple(rng.sample(range(k), rng.randint(1, k)))
    prefix = tuple(rng.randrange(k) for _ in range(rng.randint(0, max_prefix)))
    return RTInstance(k, pal, prefix)


@family("rt-eventually-constant")
def _rt_eventually_constant(rng, seed, k=None, max_prefix=8):
    k = k or rng.choice([2, 3])
    prefix = tuple(rng.randrange(k) for _ in range(rng.randint(0, max_prefix)))
    return RTInstance(k, (rng.randrange(k),), prefix)


@family("pivot-random")
def _pivot_random(rng, seed, k=None, D=6, max_depth=3):
    k = k or rng.choice([2, 3])
    return TreeColouring(k, D, random_promise(rng, k, max_depth))


@family("adversarial-removal-schedule")
def _removals(rng, seed, problem="ECFC", k=None, universe=None):
    if problem == "ECFC":
        k = k or rng.choice([1, 2, 2, 3])
        universe = universe or 40
        nums = rng.sample(range(universe), rng.randint(0, k))
        stages = sorted(rng.sample(range(12), len(nums)))
        return CoEnumInstance("ECFC", 1, tuple((s, 0, n) for s, n in zip(stages, nums)),
                              bound=k, header=(k,))
    if problem == "ACC":
        k = k or rng.choice([1, 2, 3])
        universe = universe or 10
        comps = [c for c in range(k) if rng.random() < 0.7]
        stages = sorted(rng.sample(range(12), len(comps)))
        rng.shuffle(comps)
        sched = tuple((s, c, rng.randrange(universe)) for s, c in zip(stages, comps))
        return CoEnumInstance("ACC", k, sched, header=(k,))
    if problem == "TC":
        return _normalized_tc(rng, seed, k)
    raise ValueError(f"no removal schedule for {problem!r}")


@family("bounded-mind-change")
def _normalized_tc(rng, seed, k=None, universe=8):
    """Normalized TC_N^k instances: each limit set is empty or cofinite."""
    k = k or rng.choice([1, 2, 3])
    exhaust = tuple(c for c in range(k) if rng.random() < 0.3)
    sched = []
    for c in range(k):
        if c not in exhaust:
            sched += [(c, n) for n in rng.sample(range(universe), rng.randint(0, 3))]
    rng.shuffle(sched)
    stages = sorted(rng.sample(range(2 * len(sched) + 2), len(sched)))
    tail = (stages[-1] + 1 if stages else 0) + rng.randint(0, 3)
    return CoEnumInstance("TC", k, tuple((s, c, n) for s, (c, n) in zip(stages, sched)),
                          exhaust=exhaust, tail_start=tail if exhaust else 0)


@family("functional-with-trigger-depth")
def _fott(rng, seed, k=2, D=6, max_depth=3):
    col = TreeColouring(k, D, random_promise(rng, k, max_depth))
    return FOTTInstance(col, random_functional(rng, k))


@family("delayed-functional")
def _delayed(rng, seed, D=6):
    if rng.random() < 0.2:
        return DelayedInstance(None)
    return DelayedInstance(_fott(rng, seed, 2, D), rng.randrange(12))


@family("delayed-rt")
def _delayed_rt(rng, seed, k=3):
    if rng.random() < 0.2:
        return DelayedInstance(None)
    return DelayedInstance(_rt_random(rng, seed, k), rng.randrange(12))


@family("tmin-enumeration")
def _tmin(rng, seed, universe=12, empty_rate=0.15):
    if rng.random() < empty_rate:
        return TminInstance()
    nums = rng.sample(range(universe), rng.randint(1, 4))
    stages = sorted(rng.sample(range(15), len(nums)))
    return TminInstance(tuple(zip(stages, nums)))


@family("commit-pipeline")
def _commit_pipeline(rng, seed, j=3, height=8):
    """Two colours, answers below ``j``, sized for commit trees of ``height``.

    Half the instances hide colour 0 in a finite block deep enough for the
    first commit tree, so the pipeline must move on to colour 1.  Each colour
    has a root key and possibly one deeper key, which keeps at most two leaf
    labels per stage.
    """
    w = rng.choice(["", "0", "1"])
    entries = {(0, ""): rng.randrange(j), (1, ""): rng.randrange(j)}
    for b in (0, 1):
        if rng.random() < 0.5:
            u = format(rng.randrange(1 << (d := rng.randint(1, 3))), "b").zfill(d)
            entries[(b, u)] = rng.randrange(j)
    if rng.random() < 0.5:
        block = tuple((v, 0) for v in cone(w, len(w) + height))
        promise = PivotPromise(residual=(1,), overrides=block)
        D = len(w) + 2 * height + 2  # room for a colour-1 tree under the block
    else:
        cols = (0, 1) if w else (rng.randrange(2),)
        pivots = tuple((w + b, (rng.choice(cols),)) for b in "01") if w else ()
        promise = PivotPromise(pivots=pivots, residual=(rng.randrange(2),))
        D = height + 4
    return FOTTInstance(TreeColouring(2, D, promise), Functional(tuple(sorted(entries.items()))))


# -- JSON ---------------------------------------------------------------------

def instance_to_json(inst, family_name: str = "", seed: int = 0) -> dict:
    d = {"family": family_name, "seed": seed, "promise": {}, "schedule": [], "D": 0}
    if isinstance(inst, RTInstance):
        d.update(problem=f"RT1_{inst.k}", k=inst.k, palette=list(inst.palette),
                 prefix=list(inst.prefix))
    elif isinstance(inst, TreeColouring):
        d.update(problem=f"TT1_{inst.k}", k=inst.k, D=inst.D, promise=inst.promise.to_json())
    elif isinstance(inst, CoEnumInstance):
        d.update(problem=inst.kind, k=inst.bound if inst.kind == "ECFC" else inst.comps,
                 comps=inst.comps, exhaust=list(inst.exhaust), tail_start=inst.tail_start,
                 header=list(inst.header),
                 schedule=[[s, [c, n]] for s, c, n in inst.schedule])
    elif isinstance(inst, FOTTInstance):
        d.update(problem=f"FOTT{inst.k}", k=inst.k, D=inst.colouring.D,
                 promise=inst.colouring.promise.to_json(), functional=inst.functional.to_json())
    elif isinstance(inst, DelayedInstance):
        inner_tag = "RT1" if isinstance(inst.inner, RTInstance) else "FOTT2"
        d.update(problem=f"DELAYED_{inner_tag}", k=getattr(inst.inner, "k", 2),
                 spec_stage=inst.spec_stage,
                 inner=None if inst.inner is None else instance_to_json(inst.inner))
    elif isinstance(inst, TminInstance):
        d.update(problem="TMIN", k=0, schedule=[[s, n] for s, n in inst.events])
    else:
        raise TypeError(f"cannot serialize {type(inst).__name__}")
    return d


def instance_from_json(d: dict):
    p = d["problem"]
    if p.startswith("RT1_"):
        return RTInstance(d["k"], tuple(d["palette"]), tuple(d["prefix"]))
    if p.startswith("TT1_"):
        return TreeColouring(d["k"], d["D"], PivotPromise.from_json(d["promise"]))
    if p in ("TC", "ACC", "ECFC", "CN"):
        return CoEnumInstance(p, d["comps"], tuple((s, c, n) for s, (c, n) in d["schedule"]),
                              exhaust=tuple(d["exhaust"]), tail_start=d["tail_start"],
                              bound=d["k"] if p == "ECFC" else None, header=tuple(d["header"]))
    if p.startswith("FOTT"):
        col = TreeColouring(d["k"], d["D"], PivotPromise.from_json(d["promise"]))
        return FOTTInstance(col, Functional.from_json(d["functional"]))
    if p.startswith("DELAYED_"):
        inner = d["inner"]
        return DelayedInstance(None if inner is None else instance_from_json(inner), d["spec_stage"])
    if p == "TMIN":
        return TminInstance(tuple((s, n) for s, n in d["schedule"]))
    raise ValueError(f"unknown problem {p!r}")


def dumps(d: dict) -> str:
    return json.dumps(d, sort_keys=True, separators=(",", ":")) + "\n"


def write_corpus(spec: Union[str, dict], seeds, out: Union[str, Path],
                 name: str = "") -> list[Path]:
    """Write ``<out>/<name>/<seed>.json`` for every seed; remove partial output on failure.

    ``name`` defaults to the family name.
    """
    desc = _descriptor(spec)
    folder = Path(out) / (name or desc["family"])
    folder.mkdir(parents=True, exist_ok=True)
    written, tmp = [], None
    try:
        for seed in seeds:
            inst = gen_family(desc, seed)
            path = folder / f"{seed}.json"
            # write beside, then rename, so no file is ever half written
            tmp = path.with_suffix(".json.tmp")
            tmp.write_text(dumps(instance_to_json(inst, desc["family"], seed)))
            os.replace(tmp, path)
            written.append(path)
    except Exception:
        for path in written + ([tmp] if tmp is not None else []):
            path.unlink(missing_ok=True)
        raise
    return written
