"""Binary-tree vertices, promised colourings and strong copies.

Vertices of the full binary tree are bit strings (``""`` is the root).
Everything that orders vertices uses length-then-lexicographic order, which
is also the breadth-first order in which colourings are streamed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Optional, Sequence


def vkey(v: str) -> tuple[int, str]:
    return (len(v), v)


def vindex(v: str) -> int:
    """Position of ``v`` in breadth-first order."""
    return (1 << len(v)) - 1 + (int(v, 2) if v else 0)


def vertex_at(n: int) -> str:
    if n < 0:
        raise ValueError("negative vertex index")
    length = (n + 1).bit_length() - 1
    offset = n + 1 - (1 << length)
    return format(offset, "b").zfill(length) if length else ""


def extends(v: str, u: str) -> bool:
    """True iff ``v`` is ``u`` or lies below it."""
    return v.startswith(u)


def comparable(u: str, v: str) -> bool:
    return u.startswith(v) or v.startswith(u)


def is_antichain(vs: Iterable[str]) -> bool:
    vs = list(vs)
    return all(not comparable(a, b) for a, b in itertools.combinations(vs, 2))


def vertices_upto(depth: int) -> Iterator[str]:
    for n in range((1 << (depth + 1)) - 1):
        yield vertex_at(n)


def cone(u: str, depth: int) -> Iterator[str]:
    """Vertices extending ``u`` of length at most ``depth``, in BFS order."""
    for extra in range(0, depth - len(u) + 1):
        for tail in range(1 << extra):
            yield u + (format(tail, "b").zfill(extra) if extra else "")


@dataclass(frozen=True)
class PivotPromise:
    """Finite description of a locally-constant-in-the-limit colouring.

    ``pivots`` is an antichain of ``(vertex, palette)`` pairs; every vertex
    outside the pivot cones belongs to the residual region with palette
    ``residual``.  A vertex ``v`` in a region with palette ``p`` is coloured
    ``p[len(v) % len(p)]`` unless it appears in ``overrides``.  Every colour
    of a palette is therefore dense below every vertex of that region.
    """

    pivots: tuple[tuple[str, tuple[int, ...]], ...] = ()
    residual: tuple[int, ...] = (0,)
    overrides: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if not self.residual:
            raise ValueError("empty residual palette")
        verts = [v for v, _ in self.pivots]
        if not is_antichain(verts):
            raise ValueError(f"pivots must form an antichain: {verts}")
        for v, pal in self.pivots:
            if not pal:
                raise ValueError(f"empty palette at pivot {v!r}")
        seen = [v for v, _ in self.overrides]
        if len(seen) != len(set(seen)):
            raise ValueError("duplicate override")

    @property
    def stable_depth(self) -> int:
        """Below this length every vertex sits in one region with no overrides."""
        m = max((len(v) for v, _ in self.pivots), default=0)
        return max(m, max((len(v) + 1 for v, _ in self.overrides), default=0))

    def colours_used(self) -> set[int]:
        cols = set(self.residual)
        for _, pal in self.pivots:
            cols |= set(pal)
        cols |= {c for _, c in self.overrides}
        return cols

    def to_json(self) -> dict:
        return {
            "pivots": [[v, list(p)] for v, p in self.pivots],
            "residual": list(self.residual),
            "overrides": [[v, c] for v, c in self.overrides],
        }

    @classmethod
    def from_json(cls, d: dict) -> "PivotPromise":
        return cls(
            pivots=tuple((v, tuple(p)) for v, p in d.get("pivots", [])),
            residual=tuple(d.get("residual", [0])),
            overrides=tuple((v, int(c)) for v, c in d.get("overrides", [])),
        )


@dataclass(frozen=True)
class TreeColouring:
    """A ``k``-colouring of the full binary tree carried by a pivot promise.

    ``D`` is the truncation depth used when the colouring is streamed or
    searched; the colour of every vertex of every length is still defined.
    """

    k: int
    D: int
    promise: PivotPromise
    _memo: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        bad = [c for c in self.promise.colours_used() if not 0 <= c < self.k]
        if bad:
            raise ValueError(f"colours {bad} outside range {self.k}")
        over = dict(self.promise.overrides)
        pivots = dict(self.promise.pivots)
        object.__setattr__(self, "_over", over)
        object.__setattr__(self, "_pivots", pivots)
        object.__setattr__(self, "_M", self.promise.stable_depth)

    @classmethod
    def constant(cls, k: int, colour: int, D: int = 6) -> "TreeColouring":
        return cls(k, D, PivotPromise(residual=(colour,)))

    def palette_at(self, v: str) -> tuple[int, ...]:
        for n in range(len(v) + 1):
            pal = self._pivots.get(v[:n])
            if pal is not None:
                return pal
        return self.promise.residual

    def colour(self, v: str) -> int:
        c = self._over.get(v)
        if c is not None:
            return c
        pal = self.palette_at(v)
        return pal[len(v) % len(pal)]

    def stream(self, n: int) -> int:
        """Colour of the ``n``-th vertex in BFS order (the name's ``n``-th token)."""
        return self.colour(vertex_at(n))

    def name(self, n: int) -> list[int]:
        return [self.stream(i) for i in range(n)]

    @property
    def stabilization(self) -> int:
        return (1 << (self.promise.stable_depth + 1)) - 1

    def agrees_with(self, prefix: Sequence[int]) -> bool:
        return all(self.stream(i) == t for i, t in enumerate(prefix))

    def _cached(self, tag: str, v: str, compute: Callable[[str], frozenset]) -> frozenset:
        key = (tag, v)
        hit = self._memo.get(key)
        if hit is None:
            hit = compute(v)
            self._memo[key] = hit
        return hit

    def colours_below(self, w: str) -> frozenset:
        """Exact set of colours occurring at vertices extending ``w``."""

        def compute(u):
            if len(u) >= self._M:
                return frozenset(self.palette_at(u))
            return (frozenset([self.colour(u)]) | self.colours_below(u + "0")
                    | self.colours_below(u + "1"))

        return self._cached("below", w, compute)

    def extendible_colours(self, w: str) -> frozenset:
        """Colours ``i`` with a full ``i``-monochromatic copy of the tree below ``w``."""

        def compute(u):
            if len(u) >= self._M:
                return frozenset(self.palette_at(u))
            return self.extendible_colours(u + "0") | self.extendible_colours(u + "1")

        return self._cached("ext", w, compute)

    def dense_below(self, w: str, b: int) -> bool:
        """Every vertex extending ``w`` has a ``b``-coloured descendant."""

        def compute(u):
            if len(u) >= self._M:
                return frozenset([b in self.palette_at(u)])
            return frozenset([self.dense_below(u + "0", b) and self.dense_below(u + "1", b)])

        return True in self._cached(f"dense{b}", w, compute)

    def to_json(self) -> dict:
        return {"k": self.k, "D": self.D, "promise": self.promise.to_json()}

    @classmethod
    def from_json(cls, d: dict) -> "TreeColouring":
        return cls(int(d["k"]), int(d["D"]), PivotPromise.from_json(d["promise"]))


def extendibility_oracle(colouring: TreeColouring, vertex: str) -> frozenset:
    return colouring.extendible_colours(vertex)


def _bfs_strings(depth: int) -> list[str]:
    return list(vertices_upto(depth))


@dataclass(frozen=True)
class StrongCopy:
    """An embedding ``e`` of ``2^{<=d}`` with ``e(s+i)`` extending ``e(s)+i``.

    ``images`` lists ``e(s)`` for ``s`` in BFS order of ``2^{<=d}``.
    """

    d: int
    images: tuple[str, ...]

    def __post_init__(self):
        if len(self.images) != (1 << (self.d + 1)) - 1:
            raise ValueError("image count does not match depth")

    def image(self, sigma: str) -> str:
        return self.images[vindex(sigma)]

    @property
    def root(self) -> str:
        return self.images[0]

    def leaves(self) -> list[str]:
        first = (1 << self.d) - 1
        return list(self.images[first:])

    def is_embedding(self) -> bool:
        for n in range((1 << self.d) - 1):
            s = vertex_at(n)
            for i in "01":
                if not extends(self.image(s + i), self.image(s) + i):
                    return False
        return True

    def colours(self, colouring) -> set[int]:
        col = colouring.colour if hasattr(colouring, "colour") else colouring
        return {col(v) for v in self.images}

    def tokens(self) -> list[int]:
        return [self.d] + [vindex(v) for v in self.images]

    @classmethod
    def from_tokens(cls, toks: Sequence[int]) -> "StrongCopy":
        d = int(toks[0])
        need = (1 << (d + 1)) - 1
        if len(toks) < need + 1:
            raise ValueError("truncated strong copy")
        return cls(d, tuple(vertex_at(int(t)) for t in toks[1:need + 1]))

    @classmethod
    def from_map(cls, d: int, emb: dict[str, str]) -> "StrongCopy":
        return cls(d, tuple(emb[s] for s in _bfs_strings(d)))


def least_coloured_below(colour: Callable[[str], Optional[int]], u: str, b: int,
                         depth: int, accept: Callable[[str], bool] = lambda v: True
                         ) -> Optional[str]:
    for v in cone(u, depth):
        if colour(v) == b and accept(v):
            return v
    return None


def greedy_copy(colouring, root: str, b: int, d: int, D: Optional[int] = None
                ) -> Optional[StrongCopy]:
    """Breadth-first greedy search for a ``b``-monochromatic copy of depth ``d``.

    Each image is the least ``b``-coloured vertex extending the parent's
    image followed by the side bit.  Returns ``None`` when some search leaves
    the depth bound ``D``.
    """
    col = colouring.colour if hasattr(colouring, "colour") else colouring
    if D is None:
        D = colouring.D
    start = least_coloured_below(col, root, b, D)
    if start is None:
        return None
    emb = {"": start}
    for s in _bfs_strings(d - 1) if d > 0 else []:
        for i in "01":
            found = least_coloured_below(col, emb[s] + i, b, D)
            if found is None:
                return None
            emb[s + i] = found
    return StrongCopy.from_map(d, emb)


def copy_is_extendible(colouring: TreeColouring, copy: StrongCopy) -> bool:
    """Exact test that a monochromatic strong copy extends to a full copy."""
    cols = copy.colours(colouring)
    if len(cols) != 1 or not copy.is_embedding():
        return False
    (b,) = cols
    return all(b in colouring.extendible_colours(y + "0")
               and b in colouring.extendible_colours(y + "1")
               for y in copy.leaves())


def solve_tt(colouring: TreeColouring, depth: int) -> StrongCopy:
    """Exact solver for the tree pigeonhole: an extendible copy of ``depth``.

    Picks the least colour with a full copy below the root, then builds the
    copy from the least vertices that keep that colour extendible.
    """
    b = min(colouring.extendible_colours(""))

    def good(v):
        return (b in colouring.extendible_colours(v + "0")
                and b in colouring.extendible_colours(v + "1"))

    bound = colouring.promise.stable_depth + 4 * (depth + 2) * max(
        [len(colouring.promise.residual)] + [len(p) for _, p in colouring.promise.pivots])
    root = least_coloured_below(colouring.colour, "", b, bound, good)
    if root is None:
        raise RuntimeError("no extendible root found; promise inconsistent")
    emb = {"": root}
    for s in _bfs_strings(depth - 1) if depth > 0 else []:
        for i in "01":
            v = least_coloured_below(colouring.colour, emb[s] + i, b,
                                     len(emb[s]) + bound, good)
            if v is None:
                raise RuntimeError("extendible copy search failed")
            emb[s + i] = v
    return StrongCopy.from_map(depth, emb)


# -- canonical antichain enumeration -------------------------------------

@lru_cache(maxsize=None)
def _antichains_with_max_length(length: int, size: int) -> tuple[tuple[str, ...], ...]:
    verts = list(vertices_upto(length))
    out: list[tuple[str, ...]] = []

    def rec(start: int, chosen: list[str]):
        if len(chosen) == size:
            if len(chosen[-1]) == length:
                out.append(tuple(chosen))
            return
        for idx in range(start, len(verts)):
            v = verts[idx]
            if any(comparable(v, c) for c in chosen):
                continue
            chosen.append(v)
            rec(idx + 1, chosen)
            chosen.pop()

    rec(0, [])
    return tuple(out)


def _poly_mul(p: list[int], q: list[int], size: int) -> list[int]:
    out = [0] * (size + 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q[:size + 1 - i]):
                out[i + j] += a * b
    return out


@lru_cache(maxsize=None)
def _full_poly(depth: int, size: int) -> tuple[int, ...]:
    """Antichain counts by size in a full binary tree with ``depth + 1`` levels."""
    if depth < 0:
        return (1,) + (0,) * size
    sub = list(_full_poly(depth - 1, size))
    out = _poly_mul(sub, sub, size)
    if size:
        out[1] += 1
    return tuple(out)


def _count_antichains(L: int, size: int, after: int, chosen) -> int:
    """Antichains of ``size`` vertices of length <= L, index > ``after``, incomparable to ``chosen``."""

    def poly(u: str) -> list[int]:
        if any(u.startswith(c) for c in chosen):
            return [1] + [0] * size
        if vindex(u) > after and not any(c.startswith(u) for c in chosen):
            # whole cone available only when every vertex in it is late enough
            return list(_full_poly(L - len(u), size))
        if len(u) == L:
            return [1] + [0] * size
        out = _poly_mul(poly(u + "0"), poly(u + "1"), size)
        if size and vindex(u) > after and not any(comparable(u, c) for c in chosen):
            out[1] += 1
        return out

    if L < 0:
        return 1 if size == 0 else 0
    return poly("")[size]


def _block_offset(length: int, size: int) -> int:
    return _full_poly(length - 1, size)[size] if length > 0 else 0


def canonical_antichain(n: int, k: int) -> tuple[str, ...]:
    """The ``n``-th ``(k+1)``-element antichain.

    Order: by greatest vertex length, then lexicographically on the tuple of
    members sorted length-then-lex.
    """
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    size = k + 1
    length = 0
    while True:
        block = _antichains_with_max_length(length, size)
        if n < len(block):
            return block[n]
        n -= len(block)
        length += 1


def antichain_index(antichain: Iterable[str]) -> int:
    """Inverse of :func:`canonical_antichain`, computed by counting rather than enumerating."""
    members = tuple(sorted(antichain, key=vkey))
    if not is_antichain(members) or len(members) < 2:
        raise ValueError("not an antichain of size >= 2")
    n, L = len(members), len(members[-1])
    rank = _block_offset(L, n)
    for p in range(n):
        lo = vindex(members[p - 1]) if p else -1
        hi = vindex(members[p])
        chosen = members[:p]
        for bound, sign in ((lo, 1), (hi - 1, -1)):
            c = _count_antichains(L, n - p, bound, chosen)
            if all(len(x) < L for x in chosen):
                c -= _count_antichains(L - 1, n - p, bound, chosen)
            rank += sign * c
    return rank
