"""The two reductions around totalized choice: TT^1_{k+1} <= TC^k and TC^k <= (RT^1_{k+1})'."""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

from ..coding import pair, unpair
from ..problems import CoEnumLimit, Delta02Limit, decode_removal, removal_token
from ..stagecore import FnMachine, IllegalOracleInstance, ReductionWitness
from ..trees import extends, greedy_copy, vertex_at, vindex


def _mask(cols) -> int:
    m = 0
    for c in cols:
        m |= 1 << c
    return m


def _cone_bfs(u: str, start: str = ""):
    """Cone of ``u`` in breadth-first order, resuming at ``start`` when it lies in the cone."""
    extra, first = 0, 0
    if start.startswith(u) and len(start) > len(u):
        extra = len(start) - len(u)
        first = int(start[len(u):], 2)
    while True:
        for tail in range(first, 1 << extra):
            yield u + (format(tail, "b").zfill(extra) if extra else "")
        extra, first = extra + 1, 0


class ChainObserver:
    """Tracks the currently first pair ``(sigma_i, I_i)`` on every level.

    Level ``i`` ranges over pairs with ``|I_i| = k - i`` that extend the
    current first of level ``i - 1`` (``sigma`` extends, ``I`` is a proper
    subset); a pair is refuted once a colour outside ``I`` is seen below
    ``sigma``.  ``history[s]`` is the tuple of firsts after ``s`` vertices.
    """

    def __init__(self, k: int):
        self.k = k
        self.cols: list[int] = []
        self.obs: dict[str, int] = {}
        self.firsts: list[tuple[str, int]] = []
        parent = ("", _mask(range(k + 1)))
        for _ in range(k):
            parent = self._search(parent, parent[0], -1)
            self.firsts.append(parent)
        self.history = [tuple(self.firsts)]

    @staticmethod
    def _candidates(parent_mask: int, seen: int):
        # dropping larger colours first gives increasing rank
        for drop in reversed(_colours(parent_mask)):
            m = parent_mask & ~(1 << drop)
            if seen & ~m == 0:
                yield m

    def _search(self, parent, start: str, after: int):
        """Least unrefuted pair below ``parent``, from ``start`` onwards in code order."""
        psig, pmask = parent
        for sigma in _cone_bfs(psig, start):
            seen = self.obs.get(sigma, 0)
            for m in self._candidates(pmask, seen):
                if sigma == start and self.rank(pmask, m) <= after:
                    continue
                return (sigma, m)
        raise AssertionError("unreachable")

    @staticmethod
    @lru_cache(maxsize=None)
    def rank(parent_mask: int, m: int) -> int:
        # subsets of a fixed size ordered lexicographically by member list
        members = _colours(parent_mask)
        subs = [_mask(s) for s in combinations(members, len(members) - 1)]
        return subs.index(m)

    def push(self, colour: int):
        v = vertex_at(len(self.cols))
        self.cols.append(colour)
        for n in range(len(v) + 1):
            self.obs[v[:n]] = self.obs.get(v[:n], 0) | (1 << colour)
        parent = ("", _mask(range(self.k + 1)))
        changed = False
        for i, (sigma, m) in enumerate(self.firsts):
            if changed:
                new = self._search(parent, parent[0], -1)
            elif self.obs.get(sigma, 0) & ~m:
                new = self._search(parent, sigma, self.rank(parent[1], m))
            else:
                new = (sigma, m)
            changed = changed or new != (sigma, m)
            self.firsts[i] = new
            parent = new
        self.history.append(tuple(self.firsts))

    def colour(self, v: str):
        i = vindex(v)
        return self.cols[i] if i < len(self.cols) else None


def _colours(mask: int) -> list[int]:
    return [c for c in range(mask.bit_length()) if mask >> c & 1]


def true_chain(colouring, k: int) -> list[tuple[str, int]]:
    """Least truly surviving pair on each level, stopping at the first level with none."""
    parent = ("", _mask(range(k + 1)))
    out = []
    for _ in range(k):
        horizon = max(colouring.promise.stable_depth, len(parent[0]))
        found = None
        for sigma in _cone_bfs(parent[0]):
            if len(sigma) > horizon:
                break
            below = _mask(colouring.colours_below(sigma))
            cands = list(ChainObserver._candidates(parent[1], below))
            if cands:
                found = (sigma, cands[0])
                break
        if found is None:
            break
        out.append(found)
        parent = found
    return out


def reduce_tt_to_tcn(k: int, depth: int = 2) -> ReductionWitness:
    """``TT^1_{k+1} <= TC_N^k``; H builds a greedy copy of the given depth."""
    if k < 1:
        raise ValueError("k must be positive")

    def k_start():
        return {"obs": ChainObserver(k), "run_start": [0] * k}

    def k_step(st, fresh):
        if fresh["in"] is None:
            return st, {}
        obs = st["obs"]
        prev = obs.history[-1]
        obs.push(fresh["in"])
        cur = obs.history[-1]
        s = len(obs.history) - 1
        out = []
        for i in range(k):
            if cur[:i + 1] != prev[:i + 1]:
                out += [removal_token(i, e) for e in range(st["run_start"][i], s)]
                st["run_start"][i] = s
        return st, {"out": out}

    def h_start():
        return {"obs": ChainObserver(k), "ans": [], "done": False}

    def h_step(st, fresh):
        obs = st["obs"]
        if fresh["in"] is not None:
            obs.push(fresh["in"])
        if fresh["answer"] is not None:
            st["ans"].append(fresh["answer"])
        ans = st["ans"]
        if st["done"] or len(ans) < k or max(ans) >= len(obs.history):
            return st, {}
        chain = [obs.history[s][i] for i, s in enumerate(ans)]
        j = 0
        while j + 1 < k and extends(chain[j + 1][0], chain[j][0]) \
                and chain[j + 1][1] & ~chain[j][1] == 0:
            j += 1
        sigma, m = chain[j]
        b = _colours(m)[0]
        known = len(vertex_at(len(obs.cols) - 1)) + 1 if obs.cols else 0
        copy = greedy_copy(obs.colour, sigma, b, depth, D=known)
        if copy is None or any(vindex(v) >= len(obs.cols) for v in copy.images):
            return st, {}
        st["done"] = True
        return st, {"out": copy.tokens()}

    def limit(inst, run):
        chain = true_chain(inst, k)
        obs = run.state["obs"]
        if list(obs.firsts[:len(chain)]) != chain:
            return None
        sets = []
        for i in range(k):
            if i < len(chain):
                sets.append(("cofinite", frozenset(range(run.state["run_start"][i]))))
            else:
                sets.append(("finite", frozenset()))
        return CoEnumLimit("TC", tuple(sets))

    def monitor(inst, run):
        firsts = run.state["obs"].firsts
        for a, b in zip(firsts, firsts[1:]):
            if not extends(b[0], a[0]) or b[1] & ~a[1] or b[1] == a[1]:
                raise IllegalOracleInstance("sigma-I chain condition broken")

    return ReductionWitness(
        "tt_le_tcn", f"TT1_{k + 1}", f"TC_{k}",
        FnMachine("tt_le_tcn.K", k_step, k_start),
        FnMachine("tt_le_tcn.H", h_step, h_start, inputs=("in", "answer")),
        limit, budget=lambda inst: 24 * (inst.stabilization + 1) + 64, monitor=monitor,
    )


# -- TC_N^k <= (RT^1_{k+1})' -------------------------------------------------

def delta_token(n: int, guess: int) -> int:
    return pair(n, guess)


def reduce_tcn_to_rtjump(k: int) -> ReductionWitness:
    """Stream ``c(n) = #{i : n in A_i}`` as guess updates; broadcast the first homogeneous element."""
    if k < 1:
        raise ValueError("k must be positive")

    def k_step(st, fresh):
        out = []
        rem = decode_removal(fresh["in"]) if fresh["in"] is not None else None
        if rem is not None:
            c, n = rem
            if c >= k:
                raise IllegalOracleInstance(f"component {c} out of range")
            if n not in st["removed"][c]:
                st["removed"][c].add(n)
                if n < len(st["guess"]):
                    st["guess"][n] -= 1
                    out.append(delta_token(n, st["guess"][n]))
        n = len(st["guess"])
        st["guess"].append(k - sum(n in r for r in st["removed"]))
        out.append(delta_token(n, st["guess"][n]))
        return st, {"out": out}

    def h_step(st, fresh):
        if fresh["answer"] is not None and not st["done"]:
            st["done"] = True
            return st, {"out": [fresh["answer"]] * k}
        return st, {}

    def limit(inst, run):
        if inst.kind != "TC" or inst.comps != k:
            raise ValueError("input is not a TC_N^k instance")
        live = [c for c in range(k) if not inst.limit_empty(c)]
        gone = {c: _removed_set(inst, c) for c in live}
        if any(not gone[c] <= run.state["removed"][c] for c in live):
            return None
        touched = set().union(*gone.values())
        if touched and max(touched) >= len(run.state["guess"]):
            return None
        over = []
        for n in sorted(touched):
            col = sum(n not in gone[c] for c in live)
            if col != len(live):
                over.append((n, col))
        return _JumpLimit(k + 1, len(live), tuple(over), mind_change_bound=k)

    def monitor(inst, run):
        toks = inst.name(run.stages)
        removed = [set() for _ in range(k)]
        for tok in toks:
            rem = decode_removal(tok)
            if rem is not None:
                removed[rem[0]].add(rem[1])
        guess = run.state["guess"]
        for n in range(len(guess)):
            if guess[n] != k - sum(n in r for r in removed):
                raise IllegalOracleInstance(f"counting identity fails at n={n}")
        monitor.checks += len(guess)

    monitor.checks = 0
    return ReductionWitness(
        "tcn_le_rtjump", f"TC_{k}", f"RTJUMP_{k + 1}",
        FnMachine("tcn_le_rtjump.K", k_step,
                  lambda: {"removed": [set() for _ in range(k)], "guess": []}),
        FnMachine("tcn_le_rtjump.H", h_step, lambda: {"done": False}, inputs=("in", "answer")),
        limit, budget=_jump_budget, monitor=monitor,
    )


def _jump_budget(inst) -> int:
    # one new number per stage, so every removed number needs its own stage too
    touched = [n for _, _, n in inst.schedule]
    return max([inst.stabilization] + [n + 1 for n in touched]) + 6


def _removed_set(inst, c: int) -> frozenset:
    if hasattr(inst, "removed"):
        return inst.removed(c)
    form, s = inst.sets[c]
    if form != "cofinite":
        raise ValueError("input is not normalized: a limit set is neither empty nor cofinite")
    return frozenset(s)


class _JumpLimit(Delta02Limit):
    def agrees_with(self, prefix) -> bool:
        changes: dict[int, int] = {}
        last: dict[int, int] = {}
        for tok in prefix:
            n, g = unpair(tok)
            if g >= self.k:
                return False
            if n in last and last[n] != g:
                changes[n] = changes.get(n, 0) + 1
            last[n] = g
        bound = self.mind_change_bound
        return bound is None or all(v <= bound for v in changes.values())
