"""Local search for the symmetric travelling salesman problem.

Moves are the same tour operations used by the Hamilton search, but a move
is *good* when the arcs it introduces weigh strictly less than the arcs it
replaces.  Each iteration first applies good rotations until none is left,
then looks for a good 3-cycle, or a 3-cycle that becomes good once one
rotation is added.  The run stops after ``stagnation`` iterations without a
new best tour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hamperm.errors import InputError
from hamperm.graph import Graph
from hamperm.tour import Move, Rotation, ThreeCycle, Tour, apply_move, arc_changes, build_tour, cyclic_clockwise


def tour_weight(t: Tour, inst: Graph) -> float:
    """Total weight of the tour's arcs; a missing weight names the arc."""
    return math.fsum(inst.weight(u, v) for u, v in t.arcs())


def _delta(t: Tour, inst: Graph, m: Move) -> float:
    """Weight removed minus weight added (positive means improvement)."""
    old, new = arc_changes(t, m)
    return math.fsum(inst.weight(a[0], a[1]) for a in old) - math.fsum(inst.weight(a[0], a[1]) for a in new)


def is_good_rotation(t: Tour, inst: Graph, x: int, y: int) -> bool:
    """``w[x,y] + w[s(x),s(y)] < w[x,s(x)] + w[y,s(y)]``, strictly."""
    if x == y or t.succ(x) == y:
        return False
    sx, sy = t.succ(x), t.succ(y)
    return inst.weight(x, y) + inst.weight(sx, sy) < inst.weight(x, sx) + inst.weight(y, sy)


def is_good_move(t: Tour, inst: Graph, m: Move) -> bool:
    """True iff the introduced arcs weigh strictly less than the replaced ones."""
    old, new = arc_changes(t, m)
    return math.fsum(inst.weight(a[0], a[1]) for a in new) < math.fsum(inst.weight(a[0], a[1]) for a in old)


@dataclass
class BestTourRecord:
    tour: Tour
    weight: float
    iteration: int
    history: list[tuple[int, float]] = field(default_factory=list)


@dataclass(frozen=True)
class TspConfig:
    """``None`` fields default to ``max(3, ceil(ln n))`` fanout and
    ``ceil(n ln n)`` stagnation."""

    seed: int | None = 0
    fanout: int | None = None
    stagnation: int | None = None
    neighbor_list: int = 8
    max_iterations: int = 1_000_000


def nearest_neighbor_tour(inst: Graph, start: int = 1) -> Tour:
    """Greedy construction: always walk to the closest unvisited vertex."""
    left = set(range(1, inst.n + 1)) - {start}
    seq = [start]
    while left:
        cur = seq[-1]
        options = [v for v in inst.neighbors(cur) if v in left]
        if not options:
            raise InputError(f"nearest-neighbour walk is stuck at vertex {cur}")
        nxt = min(options, key=lambda v: (inst.weight(cur, v), v))
        seq.append(nxt)
        left.discard(nxt)
    if not inst.has_arc(seq[-1], start):
        raise InputError("nearest-neighbour walk cannot close the tour")
    return build_tour(seq)


def random_euclidean(n: int, seed: int | None = 0) -> tuple[Graph, np.ndarray]:
    """Complete weighted graph on ``n`` uniform points in the unit square."""
    pts = np.random.default_rng(seed).random((n, 2))
    weights = {
        (u, v): float(np.hypot(*(pts[u - 1] - pts[v - 1])))
        for u in range(1, n + 1)
        for v in range(u + 1, n + 1)
    }
    return Graph(n, list(weights), weights=weights), pts


class _Improver:
    def __init__(self, inst: Graph, cfg: TspConfig):
        if not inst.weighted or inst.directed:
            raise InputError("TSP needs an undirected weighted graph")
        self.inst = inst
        n = inst.n
        self.fanout = cfg.fanout or max(3, math.ceil(math.log(n)))
        self.near = [()] + [
            tuple(sorted(inst.neighbors(v), key=lambda u: (inst.weight(v, u), u))[: max(cfg.neighbor_list, self.fanout)])
            for v in range(1, n + 1)
        ]
        self.rng = np.random.default_rng(cfg.seed)

    def has(self, m: Move, t: Tour) -> bool:
        _, new = arc_changes(t, m)
        return all(a[1] in self.inst.neighbors(a[0]) for a in new)

    def best_rotation(self, t: Tour, sources) -> tuple[float, Rotation] | None:
        options = []
        adj = self.inst.neighbors
        for x in sources:
            sx = t.succ(x)
            for y in self.near[x]:
                if y == sx or t.succ(y) not in adj(sx) or not is_good_rotation(t, self.inst, x, y):
                    continue
                m = Rotation(x, y)
                options.append((-_delta(t, self.inst, m), m.key(), m))
        if not options:
            return None
        gain, _, m = min(options)
        return -gain, m

    def rotate_to_fixpoint(self, t: Tour) -> Tour:
        improved = True
        while improved:
            improved = False
            for x in range(1, t.n + 1):
                found = self.best_rotation(t, (x,))
                if found:
                    t = apply_move(t, found[1])
                    improved = True
        return t

    def three_cycles(self, t: Tour) -> list[ThreeCycle]:
        out = []
        n, L = t.n, self.fanout
        pivots = self.rng.choice(n, size=min(L, n), replace=False) + 1
        for a in map(int, pivots):
            for x in self.near[a][:L]:
                b = t.pred(x)
                if b == a:
                    continue
                for y in self.near[b][:L]:
                    c = t.pred(y)
                    if c in (a, b) or not cyclic_clockwise(t, a, b, c):
                        continue
                    m = ThreeCycle(a, b, c)
                    if self.has(m, t):
                        out.append(m)
        return out

    def step(self, t: Tour) -> Tour | None:
        """One good 3-cycle or 3-cycle-plus-rotation compound, if any."""
        options = []
        weak = []
        for m in self.three_cycles(t):
            gain = _delta(t, self.inst, m)
            if gain > 0:
                options.append((-gain, (m.key(),), [m]))
            else:
                weak.append((-gain, m.key(), m))
        # Only the least-bad few are worth pairing with a rotation.
        for loss, _, m in sorted(weak)[: self.fanout]:
            t2 = apply_move(t, m)
            rot = self.best_rotation(t2, sorted({*m.vertices(), *(t2.pred(v) for v in m.vertices())}))
            if rot is not None and rot[0] - loss > 0:
                options.append((loss - rot[0], (m.key(), rot[1].key()), [m, rot[1]]))
        if not options:
            return None
        for mv in min(options, key=lambda o: o[:2])[2]:
            t = apply_move(t, mv)
        return t


def tsp_improve(inst: Graph, start: Tour | None = None, cfg: TspConfig | None = None) -> BestTourRecord:
    """Improve ``start`` (nearest-neighbour tour by default) and return the best tour seen."""
    cfg = cfg or TspConfig()
    imp = _Improver(inst, cfg)
    t = start or nearest_neighbor_tour(inst)
    if t.n != inst.n:
        raise InputError("start tour size does not match the instance")
    for u, v in t.arcs():
        if not inst.has_arc(u, v):
            raise InputError(f"start tour uses missing arc ({u}, {v})")
    limit = cfg.stagnation or math.ceil(inst.n * math.log(inst.n))
    record = BestTourRecord(t, tour_weight(t, inst), 0, [(0, tour_weight(t, inst))])
    quiet = 0
    dirty = True
    for it in range(1, cfg.max_iterations + 1):
        if dirty:
            t = imp.rotate_to_fixpoint(t)
        nxt = imp.step(t)
        dirty = nxt is not None
        if dirty:
            t = nxt
        w = tour_weight(t, inst)
        if w < record.weight:
            record.tour, record.weight, record.iteration = t, w, it
            record.history.append((it, w))
            quiet = 0
        else:
            quiet += 1
            if quiet >= limit:
                break
    return record
