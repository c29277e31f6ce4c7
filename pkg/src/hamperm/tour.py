"""Tours as n-cycles, the three move kinds, and pseudo-arc bookkeeping.

A tour stores its successor map plus ordinals (``ord`` is 1-based,
clockwise means increasing ordinal).  Composition is ``h' = h o s``: the
move ``s`` acts first, so ``h'(x) = h(s(x))``.

Each tour also carries a set of *reversed* vertices.  Plain vertices
ignore it; a contracted super-vertex uses it to know which end of its
chain the tour enters.  Rotations toggle it along the reversed segment.
"""

from __future__ import annotations

import operator
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Protocol, Sequence, Union

from hamperm.errors import InputError, ParseError


class LinkGraph(Protocol):
    """What tours need from a graph: oriented arc tests and adjacency."""

    n: int
    directed: bool

    def link(self, u: int, v: int, u_rev: bool = False, v_rev: bool = False) -> bool: ...

    def neighbors(self, v: int) -> Iterable[int]: ...

    def in_neighbors(self, v: int) -> Iterable[int]: ...

    def degree(self, v: int) -> int: ...


class Tour:
    """An immutable n-cycle over ``1..n`` with ordinal index."""

    __slots__ = ("n", "order", "_pos", "_nxt", "rev")

    def __init__(self, order: Sequence[int], rev: Iterable[int] = ()):
        try:
            order = tuple(operator.index(v) for v in order)
        except TypeError:
            raise InputError("tour entries must be integers") from None
        n = len(order)
        if n < 3:
            raise InputError("a tour needs at least 3 vertices")
        pos = [-1] * (n + 1)
        for i, v in enumerate(order):
            if not 1 <= v <= n:
                raise InputError(f"vertex {v!r} out of range 1..{n}")
            if pos[v] != -1:
                raise InputError(f"vertex {v} appears twice")
            pos[v] = i
        nxt = [0] * (n + 1)
        for i, v in enumerate(order):
            nxt[v] = order[(i + 1) % n]
        self.n = n
        self.order = order
        self._pos = pos
        self._nxt = nxt
        self.rev = frozenset(rev)

    def succ(self, v: int) -> int:
        return self._nxt[v]

    def pred(self, v: int) -> int:
        return self.order[self._pos[v] - 1]

    def ord(self, v: int) -> int:
        """1-based position of ``v``."""
        return self._pos[v] + 1

    def ord_inv(self, p: int) -> int:
        return self.order[p - 1]

    def is_rev(self, v: int) -> bool:
        return v in self.rev

    def arcs(self) -> Iterator[tuple[int, int]]:
        for v in self.order:
            yield v, self._nxt[v]

    def __iter__(self) -> Iterator[int]:
        return iter(self.order)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tour):
            return NotImplemented
        return self._nxt == other._nxt and self.rev == other.rev

    def __hash__(self) -> int:
        return hash((tuple(self._nxt), self.rev))

    def __repr__(self) -> str:
        return f"Tour({list(self.order)})"


def build_tour(order: Sequence[int], rev: Iterable[int] = ()) -> Tour:
    """Tour visiting ``order`` cyclically, starting at ``order[0]``."""
    return Tour(order, rev)


def _from_succ(start: int, nxt: list[int], rev: Iterable[int]) -> Tour:
    n = len(nxt) - 1
    order = [start]
    v = nxt[start]
    while v != start:
        order.append(v)
        if len(order) > n:
            break
        v = nxt[v]
    if len(order) != n:
        raise InputError("move splits the tour into several cycles")
    return Tour(order, rev)


# Moves -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ThreeCycle:
    """The 3-cycle ``(a b c)``."""

    a: int
    b: int
    c: int

    def vertices(self) -> tuple[int, ...]:
        return (self.a, self.b, self.c)

    def key(self) -> tuple:
        t = self.vertices()
        i = t.index(min(t))
        return ("3C", *t[i:], *t[:i])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ThreeCycle) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __str__(self) -> str:
        return f"3C {self.a} {self.b} {self.c}"


@dataclass(frozen=True, eq=False)
class Potdtc:
    """The product of disjoint transpositions ``(a c)(b d)``."""

    a: int
    c: int
    b: int
    d: int

    def vertices(self) -> tuple[int, ...]:
        return (self.a, self.c, self.b, self.d)

    def key(self) -> tuple:
        p, q = sorted((tuple(sorted((self.a, self.c))), tuple(sorted((self.b, self.d)))))
        return ("P2", *p, *q)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Potdtc) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __str__(self) -> str:
        return f"P2 {self.a} {self.c} {self.b} {self.d}"


@dataclass(frozen=True)
class Rotation:
    """Reverse the segment ``succ(v) .. w`` and insert the arc ``(v, w)``."""

    v: int
    w: int

    def vertices(self) -> tuple[int, ...]:
        return (self.v, self.w)

    def key(self) -> tuple:
        return ("ROT", self.v, self.w)

    def __str__(self) -> str:
        return f"ROT {self.v} {self.w}"


Move = Union[ThreeCycle, Potdtc, Rotation]


def parse_move(text: str) -> Move:
    parts = text.split()
    arity = {"3C": 3, "P2": 4, "ROT": 2}
    if not parts or parts[0] not in arity:
        raise ParseError(f"unknown move {text!r}")
    if len(parts) != arity[parts[0]] + 1:
        raise ParseError(f"wrong arity in move {text!r}")
    try:
        ids = [int(p) for p in parts[1:]]
    except ValueError:
        raise ParseError(f"non-integer vertex in move {text!r}") from None
    if len(set(ids)) != len(ids):
        raise ParseError(f"repeated vertex in move {text!r}")
    kind = {"3C": ThreeCycle, "P2": Potdtc, "ROT": Rotation}[parts[0]]
    return kind(*ids)


def format_move(m: Move) -> str:
    return str(m)


def parse_tour(text: str) -> Tour:
    ids: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        try:
            ids.extend(int(x) for x in line.split())
        except ValueError:
            raise ParseError("tour entries must be integers", lineno) from None
    return build_tour(ids)


def format_tour(t: Tour) -> str:
    return " ".join(map(str, t.order)) + "\n"


# Geometry ------------------------------------------------------------------


def _distinct(*vs: int) -> None:
    if len(set(vs)) != len(vs):
        raise InputError(f"vertices must be distinct: {vs}")


def cyclic_clockwise(t: Tour, a: int, b: int, c: int) -> bool:
    """True iff a, b, c occur in this cyclic order going clockwise."""
    _distinct(a, b, c)
    n, pa = t.n, t.ord(a)
    return (t.ord(b) - pa) % n < (t.ord(c) - pa) % n


def interlaced(t: Tour, a: int, b: int, c: int, d: int) -> bool:
    """True iff the chords {a, b} and {c, d} properly cross."""
    _distinct(a, b, c, d)
    n, pa = t.n, t.ord(a)
    span = (t.ord(b) - pa) % n
    return ((t.ord(c) - pa) % n < span) != ((t.ord(d) - pa) % n < span)


def is_admissible(t: Tour, m: Move) -> bool:
    """Whether applying ``m`` keeps a single n-cycle."""
    if isinstance(m, ThreeCycle):
        return cyclic_clockwise(t, m.a, m.b, m.c)
    if isinstance(m, Potdtc):
        return interlaced(t, m.a, m.c, m.b, m.d)
    _distinct(m.v, m.w)
    return t.succ(m.v) != m.w


def _segment(t: Tour, start: int, end: int) -> list[int]:
    seg = [start]
    while seg[-1] != end:
        seg.append(t.succ(seg[-1]))
    return seg


def apply_move(t: Tour, m: Move) -> Tour:
    """New tour ``t o m``; raises InputError when ``m`` is inadmissible."""
    if not is_admissible(t, m):
        raise InputError(f"move {m} is not admissible on this tour")
    nxt = list(t._nxt)
    rev = t.rev
    if isinstance(m, ThreeCycle):
        a, b, c = m.a, m.b, m.c
        nxt[a], nxt[b], nxt[c] = t.succ(b), t.succ(c), t.succ(a)
    elif isinstance(m, Potdtc):
        a, c, b, d = m.a, m.c, m.b, m.d
        nxt[a], nxt[c] = t.succ(c), t.succ(a)
        nxt[b], nxt[d] = t.succ(d), t.succ(b)
    else:
        v, w = m.v, m.w
        seg = _segment(t, t.succ(v), w)
        after = t.succ(w)
        nxt[v] = w
        for x, y in zip(seg[1:], seg):
            nxt[x] = y
        nxt[seg[0]] = after
        rev = rev.symmetric_difference(seg)
    return _from_succ(t.order[0], nxt, rev)


def inverse_move(t: Tour, m: Move) -> Move:
    """The move that undoes ``m``, where ``t`` is the tour ``m`` is applied to."""
    if isinstance(m, ThreeCycle):
        return ThreeCycle(m.a, m.c, m.b)
    if isinstance(m, Potdtc):
        return m
    return Rotation(m.v, t.succ(m.v))


def rotation_as_permutation(t: Tour, v: int, w: int) -> tuple[int, ...]:
    """Permutation ``r`` (index 0 unused) with ``t o r`` equal to the rotation."""
    if t.succ(v) == w:
        return tuple(range(t.n + 1))
    rotated = apply_move(t, Rotation(v, w))
    r = [0] * (t.n + 1)
    for x in range(1, t.n + 1):
        r[x] = t.pred(rotated.succ(x))
    return tuple(r)


def tour_as_permutation(t: Tour) -> tuple[int, ...]:
    return (0, *t._nxt[1:])


# Pseudo-arcs -----------------------------------------------------------------


def is_pseudo(t: Tour, g: LinkGraph, v: int) -> bool:
    w = t.succ(v)
    return not g.link(v, w, v in t.rev, w in t.rev)


def pseudo_vertices(t: Tour, g: LinkGraph) -> list[int]:
    rev = t.rev
    return [v for v in t.order if not g.link(v, t.succ(v), v in rev, t.succ(v) in rev)]


def pseudo_count(t: Tour, g: LinkGraph) -> int:
    return len(pseudo_vertices(t, g))


def arc_changes(t: Tour, m: Move) -> tuple[list[tuple], list[tuple]]:
    """Replaced and introduced arcs as ``(u, w, u_rev, w_rev)`` tuples.

    For rotations only the two boundary arcs are listed; the reversed
    interior keeps its status in undirected graphs.
    """
    rv = t.rev
    s = t.succ
    if isinstance(m, Rotation):
        v, w = m.v, m.w
        sv, sw = s(v), s(w)
        old = [(v, sv, v in rv, sv in rv), (w, sw, w in rv, sw in rv)]
        new = [(v, w, v in rv, w not in rv), (sv, sw, sv not in rv, sw in rv)]
        return old, new
    if isinstance(m, ThreeCycle):
        pairs = [(m.a, m.b), (m.b, m.c), (m.c, m.a)]
    else:
        pairs = [(m.a, m.c), (m.c, m.a), (m.b, m.d), (m.d, m.b)]
    old = [(x, s(x), x in rv, s(x) in rv) for x, _ in pairs]
    new = [(x, s(y), x in rv, s(y) in rv) for x, y in pairs]
    return old, new


def score(t: Tour, g: LinkGraph, m: Move) -> int:
    """Net decrease in pseudo-arc vertices caused by applying ``m``."""
    if isinstance(m, Rotation) and g.directed:
        return pseudo_count(t, g) - pseudo_count(apply_move(t, m), g)
    old, new = arc_changes(t, m)
    lost = sum(not g.link(*arc) for arc in old)
    gained = sum(not g.link(*arc) for arc in new)
    return lost - gained


class PseudoRegistry:
    """Pseudo-arc vertices ordered by descending degree, then ascending id."""

    def __init__(self, t: Tour, g: LinkGraph):
        self._items = sorted(pseudo_vertices(t, g), key=lambda v: (-g.degree(v), v))
        self._set = frozenset(self._items)

    def __iter__(self) -> Iterator[int]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, v: object) -> bool:
        return v in self._set

    def top(self, k: int = 1) -> list[int]:
        return self._items[:k]


def pseudo_registry(t: Tour, g: LinkGraph) -> PseudoRegistry:
    return PseudoRegistry(t, g)


class NoHistory(LookupError):
    """Raised when popping an empty backtrack queue."""


class BacktrackQueue:
    """Inverse moves, newest first; unbounded unless a capacity is given."""

    def __init__(self, capacity: int | None = None):
        self._q: deque[Move] = deque(maxlen=capacity)

    def push(self, inverse: Move) -> None:
        self._q.appendleft(inverse)

    def pop(self) -> Move:
        if not self._q:
            raise NoHistory("no history")
        return self._q.popleft()

    def head(self) -> Move | None:
        return self._q[0] if self._q else None

    def clear(self) -> None:
        self._q.clear()

    def __len__(self) -> int:
        return len(self._q)


def backtrack_push(q: BacktrackQueue, m: Move) -> None:
    q.push(m)


def backtrack_pop(q: BacktrackQueue) -> Move:
    return q.pop()
