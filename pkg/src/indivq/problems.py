"""Promise instances, name streams, exact verifiers and exact solvers.

Each instance class knows how to produce its name (the token stream a
machine reads) and carries enough finite data to decide its infinite
behaviour.  Classes whose name ends in ``Limit`` describe instances built by
an inner witness: they have no name of their own, only the limit data
needed to judge answers, plus :meth:`agrees_with` to audit the witness's
emitted prefix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .coding import pair, unpair
from .stagecore import IllegalOracleInstance, Verdict
from .trees import (
    StrongCopy, TreeColouring, copy_is_extendible, extends, solve_tt, vertex_at, vindex,
)


class Incomplete(ValueError):
    """Answer prefix too short to decode."""


# -- RT^1_k ----------------------------------------------------------------

@dataclass(frozen=True)
class RTInstance:
    """``c(n) = prefix[n]`` below ``len(prefix)``, ``palette[n % len]`` after."""

    k: int
    palette: tuple[int, ...]
    prefix: tuple[int, ...] = ()
    tag = "RT1"

    def __post_init__(self):
        if not self.palette or any(not 0 <= c < self.k for c in self.palette + self.prefix):
            raise ValueError("colour out of range or empty palette")

    def colour(self, n: int) -> int:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.palette[n % len(self.palette)]

    @property
    def stabilization(self) -> int:
        return len(self.prefix)

    def name(self, n: int) -> list[int]:
        return [self.colour(i) for i in range(n)]

    def infinite_colours(self) -> frozenset:
        return frozenset(self.palette)


@dataclass(frozen=True)
class RTLimit:
    """An RT^1_k colouring known only through its infinitely-often colours."""

    k: int
    infinite: frozenset
    eventual: Optional[int] = None
    emitted_ok: Optional[tuple] = None
    tag = "RT1"

    def infinite_colours(self) -> frozenset:
        return self.infinite

    def agrees_with(self, prefix) -> bool:
        return all(0 <= c < self.k for c in prefix)


# -- co-enumeration problems: TC_N, ACC_N, eCFC_N, C_N ------------------------

PAD = 0


def removal_token(comp: int, n: int) -> int:
    return 1 + pair(comp, n)


def decode_removal(tok: int) -> Optional[tuple[int, int]]:
    if tok == PAD:
        return None
    return unpair(tok - 1)


@dataclass(frozen=True)
class CoEnumInstance:
    """``comps`` parallel co-enumerations.

    ``schedule`` holds explicit removals ``(stage, comp, n)``.  From stage
    ``tail_start`` on, the components in ``exhaust`` remove every number,
    round-robin, one removal per stage; their limit set is empty.  The
    ``kind`` fixes legality: ``ACC`` allows one removal per component,
    ``ECFC`` at most ``bound`` removals (a header token carries the bound),
    ``CN`` needs a non-empty limit, ``TC`` allows anything.
    """

    kind: str
    comps: int = 1
    schedule: tuple[tuple[int, int, int], ...] = ()
    exhaust: tuple[int, ...] = ()
    tail_start: int = 0
    bound: Optional[int] = None
    header: tuple[int, ...] = ()

    def __post_init__(self):
        stages = [s for s, _, _ in self.schedule]
        if len(stages) != len(set(stages)):
            raise ValueError("two removals scheduled for the same stage")
        if self.exhaust and stages and max(stages) >= self.tail_start:
            raise ValueError("explicit removals must precede the exhaustion tail")
        if any(not 0 <= c < self.comps for _, c, _ in self.schedule):
            raise ValueError("component out of range")
        if self.kind in ("ACC", "ECFC", "CN") and self.exhaust:
            raise ValueError(f"{self.kind} instances cannot exhaust a component")
        if self.kind == "ACC":
            for c in range(self.comps):
                if len({n for _, cc, n in self.schedule if cc == c}) > 1:
                    raise ValueError("ACC component removes more than one number")
        if self.kind == "ECFC":
            if self.bound is None:
                raise ValueError("eCFC needs a bound")
            if len({n for _, _, n in self.schedule}) > self.bound:
                raise ValueError("more eCFC removals than the bound allows")

    @property
    def tag(self) -> str:
        return self.kind

    @property
    def stabilization(self) -> int:
        if self.exhaust:
            return self.tail_start
        return max((s + 1 for s, _, _ in self.schedule), default=0)

    def token_at(self, t: int) -> int:
        for s, c, n in self.schedule:
            if s == t:
                return removal_token(c, n)
        if self.exhaust and t >= self.tail_start:
            off = t - self.tail_start
            c = sorted(self.exhaust)[off % len(self.exhaust)]
            return removal_token(c, off // len(self.exhaust))
        return PAD

    def name(self, n: int) -> list[int]:
        toks = list(self.header)
        t = 0
        while len(toks) < n:
            toks.append(self.token_at(t))
            t += 1
        return toks[:n]

    def removed(self, comp: int) -> frozenset:
        return frozenset(n for _, c, n in self.schedule if c == comp)

    def limit_member(self, comp: int, n: int) -> bool:
        return comp not in self.exhaust and n not in self.removed(comp)

    def limit_empty(self, comp: int) -> bool:
        return comp in self.exhaust

    def least_member(self, comp: int) -> Optional[int]:
        if self.limit_empty(comp):
            return None
        gone = self.removed(comp)
        n = 0
        while n in gone:
            n += 1
        return n


@dataclass(frozen=True)
class CoEnumLimit:
    """Limit sets of co-enumerations built by an inner witness.

    Each entry of ``sets`` is ``("cofinite", removed)``, ``("finite", members)``
    or ``("predicate", member_fn)`` for infinite sets that are neither.
    """

    kind: str
    sets: tuple[tuple[str, frozenset], ...]
    bound: Optional[int] = None

    @property
    def tag(self) -> str:
        return self.kind

    @property
    def comps(self) -> int:
        return len(self.sets)

    def limit_member(self, comp: int, n: int) -> bool:
        form, s = self.sets[comp]
        if form == "predicate":
            return bool(s(n))
        return (n not in s) if form == "cofinite" else (n in s)

    def limit_empty(self, comp: int) -> bool:
        form, s = self.sets[comp]
        return form == "finite" and not s

    def least_member(self, comp: int) -> Optional[int]:
        form, s = self.sets[comp]
        if form == "finite":
            return min(s) if s else None
        n = 0
        while not self.limit_member(comp, n):
            n += 1
        return n

    def agrees_with(self, prefix) -> bool:
        toks = list(prefix)
        if self.kind in ("ECFC", "TCSTAR"):
            want = self.bound if self.kind == "ECFC" else self.comps
            if toks and toks[0] != want:
                return False
            toks = toks[1:]
        for tok in toks:
            rem = decode_removal(tok)
            if rem is None:
                continue
            c, n = rem
            if c >= self.comps or self.limit_member(c, n):
                return False
        return True

    def check_legal(self):
        if self.kind == "ECFC":
            gone = set().union(*(s for form, s in self.sets if form == "cofinite"))
            if any(form != "cofinite" for form, _ in self.sets) or len(gone) > (self.bound or 0):
                raise IllegalOracleInstance("eCFC removal bound exceeded")
        if self.kind == "ACC":
            for form, s in self.sets:
                if form != "cofinite" or len(s) > 1:
                    raise IllegalOracleInstance("ACC component removes more than one number")


# -- Delta^0_2 colourings for (RT^1_k)' -------------------------------------

@dataclass(frozen=True)
class Delta02Limit:
    """Limit colouring: ``overrides`` on finitely many points, ``default`` elsewhere."""

    k: int
    default: int
    overrides: tuple[tuple[int, int], ...] = ()
    mind_change_bound: Optional[int] = None
    tag = "RTJUMP"

    def colour(self, n: int) -> int:
        return dict(self.overrides).get(n, self.default)

    def infinite_colours(self) -> frozenset:
        return frozenset([self.default])


# -- first-order part of TT^1_k ---------------------------------------------

@dataclass(frozen=True)
class Functional:
    """A continuous functional on depth-1 monochromatic copies.

    The value on a copy of colour ``b`` rooted at ``r`` is ``entries[(b, u)]``
    for the longest ``u`` extending-prefix of ``r`` with an entry; the copy
    is ignored when no such ``u`` exists.  An entry ``(b, u)`` must appear in
    the name before any ``b``-coloured vertex extending ``u``.
    """

    entries: tuple[tuple[tuple[int, str], int], ...]
    trigger_depth: int = 1

    def __post_init__(self):
        object.__setattr__(self, "_map", dict(self.entries))

    def value(self, b: int, root: str) -> Optional[int]:
        for n in range(len(root), -1, -1):
            v = self._map.get((b, root[:n]))
            if v is not None:
                return v
        return None

    def keys_for(self, b: int) -> list[str]:
        return [u for (bb, u) in self._map if bb == b]

    def shifted(self, by: int) -> "Functional":
        return Functional(tuple((key, v + by) for key, v in self.entries), self.trigger_depth)

    def tokens(self) -> list[int]:
        return [entry_token(b, u, n) for (b, u), n in self.entries]

    def to_json(self):
        return [[b, u, n] for (b, u), n in self.entries]

    @classmethod
    def from_json(cls, rows):
        return cls(tuple(((int(b), u), int(n)) for b, u, n in rows))


def colour_token(c: int) -> int:
    return 2 * c


def entry_token(b: int, u: str, n: int) -> int:
    return 2 * pair(pair(b, vindex(u)), n) + 1


def decode_fott_token(tok: int):
    """``("colour", c)`` or ``("entry", b, u, n)``."""
    if tok % 2 == 0:
        return ("colour", tok // 2)
    bu, n = unpair((tok - 1) // 2)
    b, ui = unpair(bu)
    return ("entry", b, vertex_at(ui), n)


def root_realisable(colouring: TreeColouring, functional: Functional, b: int, u: str) -> bool:
    """Is there a full ``b``-copy whose root has ``u`` as longest ``b``-key?"""
    deeper = [w for w in functional.keys_for(b) if w != u and extends(w, u)]
    key_depth = max((len(w) for w in deeper), default=0)
    horizon = max(colouring.promise.stable_depth, key_depth)
    seen = {}

    def good_root(r):
        return (colouring.colour(r) == b and b in colouring.extendible_colours(r + "0")
                and b in colouring.extendible_colours(r + "1"))

    def search(w):
        if w in seen:
            return seen[w]
        if any(extends(w, x) for x in deeper):
            res = False
        elif len(w) >= horizon:
            res = b in colouring.palette_at(w)
        else:
            res = good_root(w) or search(w + "0") or search(w + "1")
        seen[w] = res
        return res

    return search(u)


@dataclass(frozen=True)
class FOTTInstance:
    """First-order tree pigeonhole: a colouring plus a functional into N."""

    colouring: TreeColouring
    functional: Functional
    tag = "FOTT"

    @property
    def k(self) -> int:
        return self.colouring.k

    @property
    def stabilization(self) -> int:
        return len(self.functional.entries) + (1 << (self.colouring.promise.stable_depth + 1))

    def name(self, n: int) -> list[int]:
        toks = self.functional.tokens()
        i = 0
        while len(toks) < n:
            toks.append(colour_token(self.colouring.colour(vertex_at(i))))
            i += 1
        return toks[:n]

    def agrees_with(self, prefix) -> bool:
        """Entries match the functional, colours match the colouring, entries come early."""
        seen: list[tuple[str, int]] = []
        for tok in prefix:
            kind, *rest = decode_fott_token(tok)
            if kind == "colour":
                v = vertex_at(len(seen))
                if self.colouring.colour(v) != rest[0]:
                    return False
                seen.append((v, rest[0]))
                continue
            b, u, n = rest
            if self.functional._map.get((b, u)) != n:
                return False
            if any(c == b and extends(v, u) for v, c in seen):
                return False
        return True

    def correct_answers(self) -> set[int]:
        return {n for (b, u), n in self.functional.entries
                if root_realisable(self.colouring, self.functional, b, u)}

    def is_correct(self, n: int) -> bool:
        return n in self.correct_answers()


# -- ?(first-order TT) ------------------------------------------------------

SPEC_MARK = 1


@dataclass(frozen=True)
class DelayedInstance:
    """Padding, then optionally a marker followed by an inner instance's name."""

    inner: Optional[object]
    spec_stage: Optional[int] = None
    tag = "DELAYED"

    def __post_init__(self):
        if (self.inner is None) != (self.spec_stage is None):
            raise ValueError("inner instance and specification stage go together")

    @property
    def stabilization(self) -> int:
        return 0 if self.spec_stage is None else self.spec_stage + 1 + self.inner.stabilization

    def name(self, n: int) -> list[int]:
        if self.spec_stage is None:
            return [PAD] * n
        toks = [PAD] * self.spec_stage + [SPEC_MARK] + self.inner.name(n)
        return toks[:n]


# -- Tmin and LPO-style problems --------------------------------------------

@dataclass(frozen=True)
class TminInstance:
    """Enumeration of a finite set: ``events`` are ``(stage, n)``."""

    events: tuple[tuple[int, int], ...] = ()
    tag = "TMIN"

    def __post_init__(self):
        stages = [s for s, _ in self.events]
        if len(stages) != len(set(stages)):
            raise ValueError("two enumerations at one stage")

    @property
    def members(self) -> frozenset:
        return frozenset(n for _, n in self.events)

    @property
    def stabilization(self) -> int:
        return max((s + 1 for s, _ in self.events), default=0)

    def name(self, n: int) -> list[int]:
        ev = dict(self.events)
        return [(1 + ev[t]) if t in ev else PAD for t in range(n)]


@dataclass(frozen=True)
class LPOCompositeLimit:
    """``LPO* * LPO``: one LPO query, then (if it says 1) a list of LPO queries."""

    first: bool
    queries: tuple[bool, ...] = ()
    tag = "LPOSTAR_LPO"


@dataclass(frozen=True)
class RTParLimit:
    """Parallel product of RT^1_2 instances, streamed as one RT^1_+ instance.

    ``infinite[i]`` is the set of digits written infinitely often to the
    ``i``-th component.
    """

    infinite: tuple[frozenset, ...]
    tag = "RT1PLUS_PAR"

    @property
    def m(self) -> int:
        return len(self.infinite)

    def agrees_with(self, prefix) -> bool:
        if not prefix:
            return True
        return prefix[0] == self.m and all(0 <= t < (1 << self.m) for t in prefix[1:])


# -- verification -----------------------------------------------------------

def _need(tokens: Sequence[int], n: int):
    if len(tokens) < n:
        raise Incomplete(f"need {n} answer tokens, have {len(tokens)}")


def _judge(problem: str, inst, toks: Sequence[int]) -> bool:
    if problem.startswith("RT1PLUS_PAR"):
        _need(toks, inst.m)
        return all(toks[i] in inst.infinite[i] for i in range(inst.m))
    if problem.startswith("RTJUMP"):
        _need(toks, 1)
        inf = inst.infinite_colours()
        return all(inst.colour(n) in inf and inst.colour(n) == inst.colour(toks[0])
                   for n in toks)
    if problem.startswith("RT1"):
        _need(toks, 1)
        return toks[0] in inst.infinite_colours()
    if problem.startswith("TT1"):
        _need(toks, 1)
        d = toks[0]
        if d > 16:
            return False
        _need(toks, (1 << (d + 1)))
        return copy_is_extendible(inst, StrongCopy.from_tokens(toks))
    if problem.startswith(("TC", "ACC")):
        _need(toks, inst.comps)
        return all(inst.limit_empty(c) and problem.startswith("TC")
                   or inst.limit_member(c, toks[c]) for c in range(inst.comps))
    if problem.startswith(("ECFC", "CN")):
        _need(toks, 1)
        return all(inst.limit_member(c, toks[0]) for c in range(inst.comps))
    if problem.startswith("FOTT"):
        _need(toks, 1)
        return inst.is_correct(toks[0])
    if problem.startswith("DELAYED"):
        _need(toks, 1)
        if inst.spec_stage is None:
            return True
        if toks[0] < 1:
            return False
        if hasattr(inst.inner, "is_correct"):
            return inst.inner.is_correct(toks[0] - 1)
        return _judge(inst.inner.tag, inst.inner, [toks[0] - 1])
    if problem.startswith("TMIN"):
        _need(toks, 1)
        return not inst.members or toks[0] == min(inst.members)
    if problem.startswith("LPOSTAR_LPO"):
        _need(toks, 1)
        if toks[0] != int(inst.first):
            return False
        if not inst.first:
            return True
        _need(toks, 1 + len(inst.queries))
        return list(toks[1:1 + len(inst.queries)]) == [int(q) for q in inst.queries]
    raise KeyError(f"unknown problem {problem!r}")


def verify_solution(problem: str, instance, answer: Sequence[int]) -> Verdict:
    """Exact judgement of ``answer`` against the infinite promised instance."""
    try:
        ok = _judge(problem, instance, list(answer))
    except Incomplete:
        return Verdict.UNDECIDED
    except (ValueError, IndexError, TypeError):
        return Verdict.REFUTED
    return Verdict.VERIFIED if ok else Verdict.REFUTED


# -- exact solvers ----------------------------------------------------------

def solve(problem: str, instance, depth: int = 2) -> list[int]:
    """A correct answer for the promised instance (used as the oracle)."""
    if problem.startswith("RT1PLUS_PAR"):
        return [min(s) for s in instance.infinite]
    if problem.startswith("RTJUMP"):
        c = instance.default
        out, n = [], 0
        while len(out) < depth:
            if instance.colour(n) == c:
                out.append(n)
            n += 1
        return out
    if problem.startswith("RT1"):
        return [min(instance.infinite_colours())]
    if problem.startswith("TT1"):
        return solve_tt(instance, depth).tokens()
    if problem.startswith(("TC", "ACC")):
        return [instance.least_member(c) or 0 for c in range(instance.comps)]
    if problem.startswith(("ECFC", "CN")):
        n = 0
        while not all(instance.limit_member(c, n) for c in range(instance.comps)):
            n += 1
        return [n]
    if problem.startswith("FOTT"):
        return [min(instance.correct_answers())]
    if problem.startswith("DELAYED"):
        if instance.spec_stage is None:
            return [0]
        if hasattr(instance.inner, "correct_answers"):
            return [1 + min(instance.inner.correct_answers())]
        return [1 + solve(instance.inner.tag, instance.inner, depth)[0]]
    if problem.startswith("TMIN"):
        return [min(instance.members) if instance.members else 0]
    if problem.startswith("LPOSTAR_LPO"):
        return [int(instance.first)] + [int(q) for q in instance.queries]
    raise KeyError(f"unknown problem {problem!r}")


def solver_for(problem: str, depth: int = 2):
    return lambda inst: solve(problem, inst, depth)
