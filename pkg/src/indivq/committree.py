"""Commit trees for the finitary part of the tree pigeonhole.

A commit tree records where an outer functional ``H`` has already committed
to an answer on monochromatic strong copies.  Trees are stored as a map from
paths (tuples of child indices, ``()`` is the root) to the label ``S_v``.
Heights count vertex levels: a single vertex has height 1.

Layer ``i`` of a layered tree occupies the levels after the first
``sum(heights[:i])``; its last level (except in the bottom layer) has degree
one and hangs the next layer below the root of its label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .problems import FOTTInstance, Functional
from .stagecore import Verdict
from .trees import StrongCopy, TreeColouring, extendibility_oracle, extends

Path = tuple


@dataclass(frozen=True)
class Layer:
    height: int
    colour: int
    answer: int


@dataclass(frozen=True)
class LayeredCommitTree:
    layers: tuple[Layer, ...]
    labels: dict  # path -> StrongCopy

    @property
    def height(self) -> int:
        return sum(l.height for l in self.layers)

    def layer_of(self, path: Path) -> int:
        level, top = len(path) + 1, 0
        for i, l in enumerate(self.layers):
            top += l.height
            if level <= top:
                return i
        raise ValueError(f"path {path} below the tree")

    def is_boundary(self, path: Path) -> bool:
        """Last level of a non-bottom layer."""
        top = 0
        for l in self.layers[:-1]:
            top += l.height
            if len(path) + 1 == top:
                return True
        return False

    def children(self, path: Path) -> list[Path]:
        out, i = [], 0
        while path + (i,) in self.labels:
            out.append(path + (i,))
            i += 1
        return out

    def leaves(self) -> list[Path]:
        return sorted((p for p in self.labels if len(p) + 1 == self.height), key=_pkey)

    def paths(self) -> list[Path]:
        return sorted(self.labels, key=_pkey)

    def answers(self) -> tuple[int, ...]:
        return tuple(l.answer for l in self.layers)

    def to_json(self) -> dict:
        return {
            "layers": [{"height": l.height, "colour": l.colour, "answer": l.answer}
                       for l in self.layers],
            "vertices": [{"path": list(p), "layer": self.layer_of(p),
                          "S": list(self.labels[p].images), "S_depth": self.labels[p].d}
                         for p in self.paths()],
        }

    @classmethod
    def from_json(cls, d: dict) -> "LayeredCommitTree":
        layers = tuple(Layer(int(l["height"]), int(l["colour"]), int(l["answer"]))
                       for l in d["layers"])
        labels = {tuple(v["path"]): StrongCopy(int(v["S_depth"]), tuple(v["S"]))
                  for v in d["vertices"]}
        return cls(layers, labels)


class UnitaryCommitTree(LayeredCommitTree):
    """A one-layer tree: one colour ``i`` and one committed answer ``x``."""

    def __init__(self, i: int, x: int, height: int, labels: dict):
        super().__init__((Layer(height, i, x),), labels)

    @property
    def i(self) -> int:
        return self.layers[0].colour

    @property
    def x(self) -> int:
        return self.layers[0].answer

    @classmethod
    def from_layered(cls, t: LayeredCommitTree) -> "UnitaryCommitTree":
        if len(t.layers) != 1:
            raise ValueError("not a one-layer tree")
        l = t.layers[0]
        return cls(l.colour, l.answer, l.height, t.labels)


def _pkey(p: Path):
    return (len(p), p)


def as_tree(t: LayeredCommitTree, layers=None, labels=None) -> LayeredCommitTree:
    """Same kind as ``t`` with new layers/labels."""
    layers = t.layers if layers is None else tuple(layers)
    labels = t.labels if labels is None else labels
    if isinstance(t, UnitaryCommitTree) and len(layers) == 1:
        l = layers[0]
        return UnitaryCommitTree(l.colour, l.answer, l.height, labels)
    return LayeredCommitTree(layers, labels)


# -- independent checker --------------------------------------------------------

def commits(functional: Functional, colour: int, S: StrongCopy) -> Optional[int]:
    """The answer ``H`` gives on reading ``S`` (None if it has not committed)."""
    if S.d < functional.trigger_depth:
        return None
    return functional.value(colour, S.root)


def validate(tree: LayeredCommitTree, colouring: TreeColouring,
             functional: Functional) -> list[str]:
    """Every violated definition clause; empty iff ``tree`` is a commit tree.

    Written from the definition alone: it does not call the search or the
    condensation code.
    """
    bad = []
    if not tree.layers or any(l.height < 1 for l in tree.layers):
        return ["layer heights must be positive"]
    cols = [l.colour for l in tree.layers]
    if len(set(cols)) != len(cols):
        bad.append(f"layers share a colour: {cols}")
    if () not in tree.labels:
        return bad + ["no root"]
    H = tree.height
    for p in tree.labels:
        if p and p[:-1] not in tree.labels:
            bad.append(f"{p}: parent missing")
        if any(p[:-1] + (j,) not in tree.labels for j in range(p[-1] if p else 0)):
            bad.append(f"{p}: child indices not contiguous")
    for p, S in tree.labels.items():
        if len(p) + 1 > H:
            bad.append(f"{p}: deeper than height {H}")
            continue
        layer = tree.layers[tree.layer_of(p)]
        if not S.is_embedding():
            bad.append(f"{p}: label is not a strong copy")
        if any(len(v) > colouring.D for v in S.images):
            bad.append(f"{p}: label leaves 2^<={colouring.D}")
        if any(colouring.colour(v) != layer.colour for v in S.images):
            bad.append(f"{p}: label not {layer.colour}-monochromatic")
        if commits(functional, layer.colour, S) != layer.answer:
            bad.append(f"{p}: H does not return {layer.answer} on the label")
        kids = tree.children(p)
        if len(p) + 1 == H:
            if kids:
                bad.append(f"{p}: leaf level vertex has children")
        elif tree.is_boundary(p):
            if len(kids) != 1:
                bad.append(f"{p}: layer boundary has degree {len(kids)}")
            elif not all(extends(v, S.root) for v in tree.labels[kids[0]].images):
                bad.append(f"{p}: successor not below the root of the label")
        else:
            leaves = S.leaves()
            if len(kids) != len(leaves):
                bad.append(f"{p}: degree {len(kids)} but label has {len(leaves)} leaves")
            for j, q in enumerate(kids[:len(leaves)]):
                if not all(extends(v, leaves[j]) for v in tree.labels[q].images):
                    bad.append(f"{q}: not below leaf {j} of its parent's label")
    return bad


def is_condensation(new: LayeredCommitTree, old: LayeredCommitTree, origin: dict) -> list[str]:
    """Check ``new`` arises from ``old`` by replacing subtrees with successor subtrees.

    ``origin`` maps each path of ``new`` to the ``old`` path it came from.  A
    tree is such a condensation iff labels are copied, child ``j`` maps below
    child ``j`` of the parent's origin, degrees are kept and leaves stay leaves.
    """
    bad = []
    old_leaves = {p for p in old.labels if len(p) + 1 == old.height}
    for p, S in new.labels.items():
        o = origin.get(p)
        if o not in old.labels:
            bad.append(f"{p}: origin {o} not in the old tree")
            continue
        if old.labels[o] != S:
            bad.append(f"{p}: label differs from origin {o}")
        if len(new.children(p)) != len(old.children(o)):
            bad.append(f"{p}: degree changed")
        if p and origin.get(p[:-1]) is not None:
            parent = origin[p[:-1]]
            if o[:len(parent) + 1] != parent + (p[-1],):
                bad.append(f"{p}: origin {o} not below child {p[-1]} of {parent}")
        if len(p) + 1 == new.height and o not in old_leaves:
            bad.append(f"{p}: leaf of new tree is not a leaf of the old one")
    return bad


# -- search ---------------------------------------------------------------------

class _UnitarySearch:
    """Existence tables for unitary commit trees of one colour and answer.

    ``top(w, h)``: some height-``h`` tree has its root label rooted at or below
    ``w``.  ``part(w, h, e)``: a depth-``e`` piece of a label fits at or below
    ``w`` with every leaf able to carry a height-``h-1`` subtree.  Below the
    stable depth only (length, palette, answer) matter, which bounds the tables.
    """

    def __init__(self, colouring: TreeColouring, functional: Functional, i: int, x: int):
        self.c, self.f, self.i, self.x = colouring, functional, i, x
        self.D = colouring.D
        self.depth = max(1, functional.trigger_depth)
        keys = [len(u) + 1 for (_, u) in functional._map]
        self.M = max([colouring.promise.stable_depth] + keys)
        self.memo: dict = {}

    def _key(self, tag, w, *rest):
        if len(w) >= self.M:
            return (tag, "deep", len(w), self.c.palette_at(w), self.f.value(self.i, w)) + rest
        return (tag, w) + rest

    def here_top(self, r: str, h: int) -> bool:
        return (self.c.colour(r) == self.i and self.f.value(self.i, r) == self.x
                and all(self.part(r + b, h, self.depth - 1) for b in "01"))

    def here_part(self, r: str, h: int, e: int) -> bool:
        if self.c.colour(r) != self.i:
            return False
        if e == 0:
            return h == 1 or self.top(r, h - 1)
        return all(self.part(r + b, h, e - 1) for b in "01")

    def _exists(self, key, w, here) -> bool:
        if len(w) > self.D:
            return False
        k = self._key(key, w)
        hit = self.memo.get(k)
        if hit is None:
            hit = here(w) or self._exists(key, w + "0", here) or self._exists(key, w + "1", here)
            self.memo[k] = hit
        return hit

    def top(self, w: str, h: int) -> bool:
        return self._exists(("top", h), w, lambda r: self.here_top(r, h))

    def part(self, w: str, h: int, e: int) -> bool:
        return self._exists(("part", h, e), w, lambda r: self.here_part(r, h, e))

    def least(self, w: str, exists: Callable[[str], bool], here: Callable[[str], bool]) -> str:
        """Breadth-first least vertex at or below ``w`` satisfying ``here``."""
        frontier = [w]
        while frontier:
            for v in frontier:
                if here(v):
                    return v
            frontier = [v + b for v in frontier for b in "01"
                        if len(v) < self.D and exists(v + b)]
        raise AssertionError("existence table promised a vertex")

    def build(self, w: str, h: int, path: Path, labels: dict):
        r = self.least(w, lambda v: self.top(v, h), lambda v: self.here_top(v, h))
        emb = {"": r}
        order = [s for s in _bfs(self.depth) if s]
        for s in order:
            e = self.depth - len(s)
            parent = emb[s[:-1]] + s[-1]
            emb[s] = self.least(parent, lambda v: self.part(v, h, e),
                                lambda v: self.here_part(v, h, e))
        S = StrongCopy.from_map(self.depth, emb)
        labels[path] = S
        if h > 1:
            for j, y in enumerate(S.leaves()):
                self.build(y, h - 1, path + (j,), labels)


def _bfs(d: int) -> Iterator[str]:
    for n in range(d + 1):
        for t in range(1 << n):
            yield format(t, "b").zfill(n) if n else ""


def find_unitary_commit_tree(colouring: TreeColouring, functional: Functional, i: int,
                             x: int, h: int, below: str = "",
                             search: Optional[_UnitarySearch] = None
                             ) -> Optional[UnitaryCommitTree]:
    """Canonical unitary commit tree of height ``h`` at or below ``below``, or None.

    Canonical means least in breadth-first vertex order, label by label and
    in preorder; ``None`` means no such tree exists inside ``2^{<=D}``.
    """
    s = search if search is not None else _UnitarySearch(colouring, functional, i, x)
    if not s.top(below, h):
        return None
    labels: dict = {}
    s.build(below, h, (), labels)
    return UnitaryCommitTree(i, x, h, labels)


# -- condensation ---------------------------------------------------------------

@dataclass(frozen=True)
class CondensationStep:
    """Replace the subtree at ``vertex`` by the subtree at its child ``successor``."""

    vertex: Path
    successor: int

    def to_json(self) -> dict:
        return {"vertex": list(self.vertex), "successor": self.successor}


def apply_step(labels: dict, origin: dict, step: CondensationStep) -> tuple[dict, dict]:
    v, n = step.vertex, len(step.vertex)
    src = v + (step.successor,)
    if src not in labels:
        raise ValueError(f"{step}: no such successor")
    new_l = {p: S for p, S in labels.items() if p[:n] != v}
    new_o = {p: o for p, o in origin.items() if p[:n] != v}
    for p, S in labels.items():
        if p[:n + 1] == src:
            new_l[v + p[n + 1:]] = S
            new_o[v + p[n + 1:]] = origin[p]
    return new_l, new_o


def replay(tree: LayeredCommitTree, steps) -> tuple[dict, dict]:
    """Labels and origin map obtained by applying ``steps`` to ``tree`` in order."""
    labels, origin = dict(tree.labels), {p: p for p in tree.labels}
    for st in steps:
        labels, origin = apply_step(labels, origin, st)
    return labels, origin


@dataclass
class Condensation:
    tree: LayeredCommitTree
    origin: dict  # new path -> input path
    steps: list[CondensationStep]
    colour: int  # the constant value of d on the leaves

    def to_json(self) -> dict:
        return {"colour": self.colour, "steps": [s.to_json() for s in self.steps],
                "origin": [[list(p), list(o)] for p, o in sorted(self.origin.items(),
                                                                  key=lambda t: _pkey(t[0]))],
                "tree": self.tree.to_json()}


def _halve(tree: LayeredCommitTree, colour_of: Callable[[Path], int]):
    """One binary pass: every layer halves, leaf colours become constant.

    Works bottom layer first.  Inside a layer, vertices at odd distance from
    the layer's last level are handled two levels at a time: keep the least
    child whose leaves share a colour, or else push every child down to its
    least leaf of colour 0.  At distance one every child is trivially
    uniform, so the least child is kept.
    """
    steps: list[CondensationStep] = []
    starts, top = [], 0
    for l in tree.layers:
        if l.height < 2 or l.height % 2:
            raise ValueError(f"layer height {l.height} cannot be halved")
        starts.append(top)
        top += l.height
    # plan = (path, [child plans]); res maps a processed path to (plan, colour)
    res: dict = {}
    for L in range(len(tree.layers) - 1, -1, -1):
        last = starts[L] + tree.layers[L].height - 1  # len of paths on the layer's last level
        for p in (p for p in tree.labels if len(p) == last):
            if L == len(tree.layers) - 1:
                res[p] = ((p, []), colour_of(p))
            else:
                (child,) = tree.children(p)
                plan, col = res.pop(child)
                res[p] = ((p, [plan]), col)
        for depth in range(last - 1, starts[L] - 1, -2):
            for v in sorted((p for p in tree.labels if len(p) == depth), key=_pkey):
                kids = tree.children(v)
                if depth == last - 1:
                    steps.append(CondensationStep(v, 0))
                    res[v] = res.pop(kids[0])
                    for w in kids[1:]:
                        res.pop(w)
                    continue
                grand = {w: [res.pop(x) for x in tree.children(w)] for w in kids}
                uniform = [j for j, w in enumerate(kids) if len({c for _, c in grand[w]}) == 1]
                if uniform:
                    j = uniform[0]
                    w = kids[j]
                    steps.append(CondensationStep(v, j))
                    res[v] = ((w, [pl for pl, _ in grand[w]]), grand[w][0][1])
                else:
                    plans = []
                    for j, w in enumerate(kids):
                        jj = min(m for m, (_, c) in enumerate(grand[w]) if c == 0)
                        steps.append(CondensationStep(w, jj))
                        plans.append(grand[w][jj][0])
                    res[v] = ((v, plans), 0)
    (plan, col), = res.values()
    labels, origin = {}, {}

    def place(plan, at):
        src, kids = plan
        labels[at], origin[at] = tree.labels[src], src
        for j, k in enumerate(kids):
            place(k, at + (j,))

    place(plan, ())
    layers = [Layer(l.height // 2, l.colour, l.answer) for l in tree.layers]
    return as_tree(tree, layers, labels), origin, steps, col


def condense_layered(tree: LayeredCommitTree, d: dict, s: int = 1) -> Condensation:
    """Condense every layer from height ``2^(l_i+s)`` to ``2^l_i`` making ``d`` constant.

    ``d`` maps each leaf path to a colour below ``2^s``.  The ``2^s`` case is
    ``s`` binary passes, highest bit first.
    """
    for l in tree.layers:
        if l.height < (1 << s) or l.height & (l.height - 1):
            raise ValueError(f"layer height {l.height} is not 2^(l+{s})")
    leaves = tree.leaves()
    if set(d) < set(leaves) or any(not 0 <= d[p] < (1 << s) for p in leaves):
        raise ValueError(f"d must colour every leaf with fewer than {1 << s} colours")
    cur, origin, steps = tree, {p: p for p in tree.labels}, []
    for bit in range(s - 1, -1, -1):
        cur, o, st, _ = _halve(cur, lambda p: (d[origin[p]] >> bit) & 1)
        origin = {p: origin[q] for p, q in o.items()}
        steps += st
    cols = {d[origin[p]] for p in cur.leaves()}
    if len(cols) != 1:
        raise AssertionError(f"condensation left colours {cols}")
    return Condensation(cur, origin, steps, cols.pop())


def condense(tree: UnitaryCommitTree, d: dict, s: int = 1) -> Condensation:
    if len(tree.layers) != 1:
        raise ValueError("condense takes a unitary tree; use condense_layered")
    return condense_layered(tree, d, s)


def brute_force_condensations(tree: LayeredCommitTree, height: int) -> Iterator[dict]:
    """Every condensation of a unitary ``tree`` with the given height, as origin maps.

    Independent of :func:`condense`; only practical for small trees.
    """
    H = tree.height

    def below(o):
        return [q for q in tree.labels if q[:len(o)] == o]

    def rec(o, h):
        for q in sorted(below(o), key=_pkey):
            rest = H - len(q)
            if h == 1:
                if rest == 1:
                    yield {(): q}
                continue
            if rest < h:
                continue
            kids = tree.children(q)
            yield from _product(q, [list(rec(w, h - 1)) for w in kids])

    def _product(q, options, j=0, acc=None):
        acc = {(): q} if acc is None else acc
        if j == len(options):
            yield dict(acc)
            return
        for opt in options[j]:
            nxt = dict(acc)
            nxt.update({(j,) + p: o for p, o in opt.items()})
            yield from _product(q, options, j + 1, nxt)

    yield from rec((), height)


def mono_condensation_exists(tree: LayeredCommitTree, d: dict, height: int) -> bool:
    return any(len({d[o] for p, o in org.items() if len(p) + 1 == height}) == 1
               for org in brute_force_condensations(tree, height))


# -- extendible vertices and the pipeline ---------------------------------------

def _log2ceil(k: int) -> int:
    return max(0, math.ceil(math.log2(k))) if k > 1 else 0


@dataclass
class Selection:
    vertex: Path  # path in the input tree
    layer: int
    colour: int
    answer: int
    condensation: Condensation

    def to_json(self) -> dict:
        return {"vertex": list(self.vertex), "layer": self.layer, "colour": self.colour,
                "answer": self.answer, "condensation": self.condensation.to_json()}


def oracle_labelling(tree: LayeredCommitTree, colouring: TreeColouring,
                     prefer=()) -> dict:
    """``d(u)``: a colour with a full monochromatic copy below the root of ``S_u``.

    Colours in ``prefer`` win when available, otherwise the least one.
    """
    d = {}
    for p in tree.leaves():
        ext = extendibility_oracle(colouring, tree.labels[p].root)
        if not ext:
            raise ValueError(f"no monochromatic copy below {tree.labels[p].root!r}")
        pref = ext & set(prefer)
        d[p] = min(pref or ext)
    return d


def select_extendible(tree: LayeredCommitTree, d: dict, k: int) -> Optional[Selection]:
    """A vertex whose label extends to a full copy, via a d-constant condensation.

    Needs every layer height ``2^n`` with ``n > ceil(log k)``.  With fewer
    than ``k`` layers the constant colour may belong to no layer; then None.
    """
    s = _log2ceil(k)
    for l in tree.layers:
        n = l.height.bit_length() - 1
        if l.height != 1 << n or n <= s:
            raise ValueError(f"layer height {l.height} is not 2^n with n > {s}")
    cond = condense_layered(tree, d, s)
    c = cond.colour
    hits = [i for i, l in enumerate(cond.tree.layers) if l.colour == c]
    if not hits:
        return None
    L = hits[0]
    first = sum(l.height for l in cond.tree.layers[:L])
    u = min((p for p in cond.tree.labels if len(p) == first), key=_pkey)
    layer = cond.tree.layers[L]
    return Selection(cond.origin[u], L, c, layer.answer, cond)


def selection_extendible(tree: LayeredCommitTree, sel: Selection,
                         colouring: TreeColouring) -> bool:
    """Oracle check: the colour survives below every leaf of ``S_v``."""
    S = tree.labels[sel.vertex]
    return all(sel.colour in extendibility_oracle(colouring, y) for y in S.leaves())


@dataclass
class PipelineResult:
    verdict: Verdict
    answer: Optional[int]
    trees: list = field(default_factory=list)
    selection: Optional[Selection] = None
    stage_labels: list = field(default_factory=list)
    note: str = ""

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value, "answer": self.answer, "note": self.note,
                "trees_built": len(self.trees),
                "layer_answers": [list(t.answers()) for t in self.trees],
                "stage_labels": self.stage_labels,
                "selection": None if self.selection is None else self.selection.to_json(),
                "trees": [t.to_json() for t in self.trees]}


def finitary_pipeline(colouring: TreeColouring, functional: Functional, j: int,
                      h: int = 1) -> PipelineResult:
    """An answer in ``range(j)`` valid for some full monochromatic copy.

    Builds ``T_0`` of height ``2^(1+kh)``, then at stage ``t`` asks the
    extendibility oracle for a leaf labelling; if the condensed tree exposes
    an extendible vertex the layer's answer is returned, otherwise unitary
    trees of height ``2^(1+h(k-t-1))`` in a fresh colour are found below the
    leaves, the tree is condensed to agree on (colour, answer) and they are
    appended as a new layer.  Failures to find a required tree are reported
    as undecided, never as an answer.
    """
    k = colouring.k
    searches: dict = {}

    def searcher(i, x):
        if (i, x) not in searches:
            searches[(i, x)] = _UnitarySearch(colouring, functional, i, x)
        return searches[(i, x)]

    def undecided(note, **kw):
        return PipelineResult(Verdict.UNDECIDED, None, note=note, **kw)

    T = None
    for i in range(k):
        for x in range(j):
            T = find_unitary_commit_tree(colouring, functional, i, x, 1 << (1 + k * h),
                                         search=searcher(i, x))
            if T is not None:
                break
        if T is not None:
            break
    if T is None:
        return undecided("no unitary commit tree of the first height")
    trees, stage_labels = [T], []
    for t in range(k):
        used = [l.colour for l in T.layers]
        sel = select_extendible(T, oracle_labelling(T, colouring, used), k)
        if sel is not None:
            res = PipelineResult(Verdict.UNDECIDED, sel.answer, trees, sel, stage_labels)
            inst = FOTTInstance(colouring, functional)
            res.verdict = Verdict.VERIFIED if inst.is_correct(sel.answer) else Verdict.REFUTED
            return res
        if t == k - 1:
            return undecided("all colours used but no extendible vertex", trees=trees)
        height = 1 << (1 + h * (k - t - 1))
        found, labels = {}, {}
        for p in T.leaves():
            root = T.labels[p].root
            for i in (c for c in range(k) if c not in used):
                for x in range(j):
                    sub = find_unitary_commit_tree(colouring, functional, i, x, height,
                                                   below=root, search=searcher(i, x))
                    if sub is not None:
                        found[p], labels[p] = sub, (i, x)
                        break
                if p in found:
                    break
            if p not in found:
                return undecided(f"stage {t}: no fresh commit tree below leaf {p}",
                                 trees=trees, stage_labels=stage_labels)
        kinds = sorted(set(labels.values()))
        stage_labels.append([list(l) for l in kinds])
        if len(kinds) > 1 << h:
            return undecided(f"stage {t}: {len(kinds)} leaf labels exceed 2^{h}",
                             trees=trees, stage_labels=stage_labels)
        cond = condense_layered(T, {p: kinds.index(labels[p]) for p in labels}, h)
        i_new, x_new = kinds[cond.colour]
        new_labels = dict(cond.tree.labels)
        for p in cond.tree.leaves():
            sub = found[cond.origin[p]]
            for q, S in sub.labels.items():
                new_labels[p + (0,) + q] = S
        T = LayeredCommitTree(cond.tree.layers + (Layer(height, i_new, x_new),), new_labels)
        trees.append(T)
    return undecided("stage loop exhausted", trees=trees)
