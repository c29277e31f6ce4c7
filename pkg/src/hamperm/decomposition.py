"""Turn one tour into another through admissible 3-cycles and POTDTCs.

``sigma`` measures the distance between the current tour ``H`` and the
target ``C``: it is the permutation with ``C = H o sigma``.  Its moved
points are exactly the vertices whose successor differs, and every move
emitted here fixes at least two more of them.
"""

from __future__ import annotations

from dataclasses import dataclass

from hamperm.errors import InputError
from hamperm.tour import Move, Potdtc, ThreeCycle, Tour, apply_move, cyclic_clockwise, interlaced


@dataclass(frozen=True)
class SigmaPermutation:
    """A permutation in image form (index 0 unused) with its cycles."""

    image: tuple[int, ...]
    cycles: tuple[tuple[int, ...], ...]

    @property
    def moved(self) -> int:
        return sum(len(c) for c in self.cycles)

    def is_even(self) -> bool:
        return sum(len(c) - 1 for c in self.cycles) % 2 == 0

    def __call__(self, x: int) -> int:
        return self.image[x]

    def __str__(self) -> str:
        return "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles) or "()"


def cycles_of(image: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """Nontrivial cycles, each starting at its smallest point, sorted."""
    seen = [False] * len(image)
    out = []
    for x in range(1, len(image)):
        if seen[x] or image[x] == x:
            continue
        cyc = [x]
        seen[x] = True
        y = image[x]
        while y != x:
            cyc.append(y)
            seen[y] = True
            y = image[y]
        out.append(tuple(cyc))
    return tuple(out)


def sigma(current: Tour, target: Tour) -> SigmaPermutation:
    """The permutation ``s`` with ``target(x) == current(s(x))`` for all x."""
    if current.n != target.n:
        raise InputError("tours have different sizes")
    image = (0, *(current.pred(target.succ(x)) for x in range(1, current.n + 1)))
    return SigmaPermutation(image, cycles_of(image))


def next_move(t: Tour, s: SigmaPermutation) -> Move:
    """An admissible move that fixes at least two points of ``s``.

    Consecutive triples ``a -> b -> c`` of a cycle give the 3-cycle
    ``(a b c)`` when they run clockwise.  Otherwise two crossing arcs
    ``a -> c`` and ``b -> d`` of ``s`` give ``(a c)(b d)``.
    """
    if s.moved < 3:
        raise InputError("sigma must move at least three points")
    for cyc in s.cycles:
        k = len(cyc)
        if k < 3:
            continue
        for i in range(k):
            a, b, c = cyc[i], cyc[(i + 1) % k], cyc[(i + 2) % k]
            if cyclic_clockwise(t, a, b, c):
                return ThreeCycle(a, b, c)
    largest = max(s.cycles, key=len)
    arcs = sorted((x, s(x)) for x in range(1, t.n + 1) if s(x) != x)
    first = sorted((x, s(x)) for x in largest) + arcs
    for a, c in first:
        for b, d in arcs:
            if len({a, b, c, d}) == 4 and interlaced(t, a, c, b, d):
                return Potdtc(a, c, b, d)
    raise RuntimeError("no progress move found; sigma is inconsistent with the tour")


def decompose(start: Tour, target: Tour) -> list[Move]:
    """Moves leading from ``start`` to ``target``, at most ``n // 2`` of them."""
    moves: list[Move] = []
    t = start
    s = sigma(t, target)
    while s.moved:
        m = next_move(t, s)
        t = apply_move(t, m)
        nxt = sigma(t, target)
        if nxt.moved > s.moved - 2 or not nxt.is_even():
            raise RuntimeError(f"move {m} did not make progress")
        moves.append(m)
        s = nxt
    return moves


def replay(start: Tour, moves: list[Move]) -> Tour:
    t = start
    for m in moves:
        t = apply_move(t, m)
    return t


def move_count_bounds(n: int) -> tuple[int, int]:
    """``(2q^3 + 3q^2 + q) / 6`` for ``q = n // 2`` and for ``q = n // 3``.

    The two values are returned without claiming which bounds which.
    """
    if n < 3:
        raise InputError("n must be at least 3")

    def f(q: int) -> int:
        return (2 * q**3 + 3 * q**2 + q) // 6

    return f(n // 2), f(n // 3)
