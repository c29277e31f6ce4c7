"""Search for a Hamilton circuit by improving a random pseudo-Hamilton tour.

Four variants share one engine:

``g``
    3-cycles and POTDTCs chosen by SCORE, with rotations as the fallback.
    Never backtracks; only a one-entry memory stops it from undoing the
    previous move.
``d``
    For digraphs.  No rotations; dead ends are undone from a history
    stack, with restarts from a fresh tour when the stack runs dry.
``g-no-r``
    Like ``d`` but for undirected graphs that were not contracted: a
    degree-2 pseudo-arc vertex with one tour edge gets its other edge
    forced onto the tour by a rotation.
``g-heuristic``
    Like ``g`` but whenever no move improves it first looks for a rotation
    out of the pivot that does.

Each run has two phases.  Phase 1 ends when at most one pseudo-arc remains
(a Hamilton path).  Phase 2 closes the path, using only 3-cycles that
introduce real arcs, the segment probe below, and rotations.
"""

from __future__ import annotations

import math
import os
import threading
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from hamperm.contraction import ContractedGraph, NotHamiltonian, TriviallyHamiltonian, contract_any, expand_tour
from hamperm.errors import InputError
from hamperm.generators import complement_tour
from hamperm.graph import Graph
from hamperm.tour import (
    BacktrackQueue,
    LinkGraph,
    Move,
    NoHistory,
    Potdtc,
    Rotation,
    ThreeCycle,
    Tour,
    apply_move,
    arc_changes,
    build_tour,
    cyclic_clockwise,
    interlaced,
    inverse_move,
    pseudo_vertices,
    score,
)
from hamperm.verify import verify

ALGORITHMS = ("g", "d", "g-no-r", "g-heuristic")
TRACE_RING = 100_000

#: Environment variables that override the default fanout and depth cap.
ENV_FANOUT = "HAMPERM_FANOUT"
ENV_DEPTH = "HAMPERM_DEPTH"


def _log_n(n: int) -> int:
    return max(3, math.ceil(math.log(max(n, 2))))


@dataclass(frozen=True)
class SolveConfig:
    """Search parameters; ``None`` means the size-dependent default.

    Defaults: fanout ``L = max(3, ceil(ln n))``, depth cap
    ``ceil(ln n)^2``, phase budget ``ceil(2 n ln n)`` (or ``ceil(6 n^3 ln n)``
    in extended mode), all scaled by ``budget_mult``.
    """

    algorithm: str = "g"
    seed: int | None = 0
    fanout: int | None = None
    depth_cap: int | None = None
    phase_budget: int | None = None
    budget_mult: float = 1.0
    extended: bool = False
    contract: bool = False
    start: str = "random"
    max_restarts: int = 10
    trace: bool = True
    full_trace: bool = False

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise InputError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.start not in ("random", "complement"):
            raise InputError("start must be 'random' or 'complement'")
        for name in ("fanout", "depth_cap", "phase_budget"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise InputError(f"{name} must be positive")
        if self.budget_mult <= 0 or self.max_restarts < 0:
            raise InputError("budget_mult must be positive and max_restarts nonnegative")

    def limits(self, n: int) -> tuple[int, int, int]:
        """Resolved ``(fanout, depth_cap, phase_budget)`` for ``n`` vertices."""
        ln = math.log(max(n, 2))
        fanout = self.fanout or _env_int(ENV_FANOUT) or _log_n(n)
        depth = self.depth_cap or _env_int(ENV_DEPTH) or math.ceil(ln) ** 2
        if self.phase_budget:
            base = self.phase_budget
        elif self.extended:
            base = math.ceil(6 * n**3 * ln)
        else:
            base = math.ceil(2 * n * ln)
        return fanout, depth, max(1, math.ceil(base * self.budget_mult))


def _env_int(name: str) -> int | None:
    raw = os.environ.get(name)
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{name} must be a positive integer") from None
    if value < 1:
        raise InputError(f"{name} must be a positive integer")
    return value


@dataclass(frozen=True)
class TraceEvent:
    iter: int
    move: str
    score: int | None
    pseudo: int
    backtracked: bool = False
    phase: int = 1

    def to_json(self) -> dict:
        return {
            "iter": self.iter,
            "move": self.move,
            "score": self.score,
            "pseudo": self.pseudo,
            "backtracked": self.backtracked,
            "phase": self.phase,
        }


@dataclass
class FailureDiagnostics:
    """Failed iterations per pivot vertex (keys are display names)."""

    counts: dict[str, int] = field(default_factory=dict)
    failed_iterations: int = 0

    def record(self, name: str) -> None:
        self.counts[name] = self.counts.get(name, 0) + 1
        self.failed_iterations += 1

    def suspects(self, k: int = 5) -> list[tuple[str, int]]:
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]

    def to_json(self) -> dict:
        return {
            "failed_iterations": self.failed_iterations,
            "suspects": [{"vertex": v, "failures": c} for v, c in self.suspects()],
            "counts": dict(sorted(self.counts.items())),
        }


@dataclass
class SolveResult:
    found: bool
    tour: Tour | None
    iterations: int
    trace: list[TraceEvent]
    diagnostics: FailureDiagnostics
    restarts: int = 0
    reason: str = ""
    start_tour: Tour | None = None
    work_tour: Tour | None = None
    net_moves: list[Move] = field(default_factory=list)
    seed: int | None = None

    @property
    def outcome(self) -> str:
        return "found" if self.found else "budget_exhausted"


class Candidate(NamedTuple):
    move: Move
    score: int
    pivot: int


def _sample(rng: np.random.Generator, items: Sequence[int], k: int) -> Sequence[int]:
    if len(items) <= k:
        return items
    idx = rng.choice(len(items), size=k, replace=False)
    return [items[i] for i in sorted(idx)]


class _Restart(Exception):
    pass


class _Search:
    """Mutable search state over a work graph (plain or contracted)."""

    def __init__(self, w: LinkGraph, cfg: SolveConfig, rng: np.random.Generator, names):
        self.w = w
        self.cfg = cfg
        self.rng = rng
        self.names = names
        self.algo = cfg.algorithm
        self.fanout, self.depth, self.budget = cfg.limits(w.n)
        self.out_adj = [()] + [tuple(sorted(w.neighbors(v))) for v in range(1, w.n + 1)]
        self.in_adj = [()] + [tuple(sorted(w.in_neighbors(v))) for v in range(1, w.n + 1)]
        self.deg = [0] + [w.degree(v) for v in range(1, w.n + 1)]
        self.backtracking = self.algo in ("d", "g-no-r")
        self.trace: deque[TraceEvent] | list[TraceEvent] = (
            [] if cfg.full_trace else deque(maxlen=TRACE_RING)
        )
        self.diag = FailureDiagnostics()
        self.iteration = 0
        self.restarts = 0
        self.cancel: threading.Event | None = None

    # state ---------------------------------------------------------------

    def reset(self, t: Tour) -> None:
        self.start = t
        self.bt = BacktrackQueue(None if self.backtracking else 1)
        self.hist: list[tuple[Move, int]] = []
        self.zero_run: list[int] = [0]
        self.banned: dict[int, set[Move]] = {}
        self.fresh: list[int] = []
        self._set_tour(t)

    def _set_tour(self, t: Tour) -> None:
        self.t = t
        self.pseudo = pseudo_vertices(t, self.w)
        self.pseudo_set = frozenset(self.pseudo)

    def _log(self, move: str, sc: int | None, backtracked: bool = False) -> None:
        if self.cfg.trace:
            phase = 1 if len(self.pseudo) > 1 or move == "restart" else 2
            self.trace.append(TraceEvent(self.iteration, move, sc, len(self.pseudo), backtracked, phase))

    def apply(self, m: Move, sc: int, *, backtracked: bool = False, record: bool = True) -> None:
        before = len(self.pseudo)
        old = self.pseudo_set
        inverse = inverse_move(self.t, m) if backtracked is False else None
        self._set_tour(apply_move(self.t, m))
        if len(self.pseudo) != before - sc:
            raise RuntimeError(f"score {sc} of {m} disagrees with the pseudo-arc recount")
        self.fresh = [v for v in self.pseudo if v not in old]
        if not backtracked:
            if record and (self.backtracking or not isinstance(m, Rotation)):
                self.bt.push(inverse)
            if self.backtracking and record:
                depth = len(self.hist)
                self.hist.append((m, sc))
                self.zero_run.append(self.zero_run[-1] + 1 if sc <= 0 else 0)
                self.banned.pop(depth + 1, None)
        self._log(str(m), sc, backtracked)

    def revert(self, pivot: int) -> None:
        """Undo the newest move, or restart when there is none."""
        self.diag.record(self.names(pivot))
        try:
            inv = self.bt.pop()
        except NoHistory:
            raise _Restart from None
        undone, _ = self.hist.pop()
        self.zero_run.pop()
        depth = len(self.hist)
        for d in [k for k in self.banned if k > depth]:
            del self.banned[d]
        self.banned.setdefault(depth, set()).add(undone)
        self.apply(inv, score(self.t, self.w, inv), backtracked=True)

    def idle(self, pivot: int) -> None:
        self.diag.record(self.names(pivot))
        self._log("-", 0)

    # candidates ----------------------------------------------------------

    def pivots(self) -> list[int]:
        if self.algo == "g-no-r":
            key = lambda v: (self.deg[v] != 2, -self.deg[v], v)  # noqa: E731
        else:
            key = lambda v: (-self.deg[v], v)  # noqa: E731
        ranked = sorted(self.pseudo, key=key)
        fresh = [v for v in self.fresh if v in self.pseudo_set]
        first = min(fresh, key=key) if fresh else ranked[0]
        if self.algo == "g-no-r" and self.deg[ranked[0]] == 2:
            first = ranked[0]
        return [first] + [v for v in ranked if v != first][:2]

    def permutation_candidates(self, pivots: list[int]) -> list[Candidate]:
        t, rng, L = self.t, self.rng, self.fanout
        found: dict[Move, int] = {}
        a0 = pivots[0]
        first_xs: Sequence[int] = ()
        for a in pivots:
            sa = t.succ(a)
            xs = _sample(rng, [x for x in self.out_adj[a] if x != sa], L)
            if a == a0:
                first_xs = xs
            closers = _sample(rng, self.in_adj[sa], L)
            for x in xs:
                b = t.pred(x)
                for y in _sample(rng, self.out_adj[b], L):
                    c = t.pred(y)
                    if c != a and c != b and cyclic_clockwise(t, a, b, c):
                        found.setdefault(ThreeCycle(a, b, c), a)
                for c in closers:
                    if c != a and c != b and cyclic_clockwise(t, a, b, c):
                        found.setdefault(ThreeCycle(a, b, c), a)
        for v in pivots[1:]:
            ys = _sample(rng, [y for y in self.out_adj[v] if y != t.succ(v)], L)
            for x in first_xs:
                c = t.pred(x)
                for y in ys:
                    d = t.pred(y)
                    if len({a0, c, v, d}) == 4 and interlaced(t, a0, c, v, d):
                        found.setdefault(Potdtc(a0, c, v, d), a0)
        return [Candidate(m, score(t, self.w, m), p) for m, p in found.items()]

    def rotation_candidates(self, a: int) -> list[Candidate]:
        if self.w.directed:
            return []
        sa = self.t.succ(a)
        moves = (Rotation(a, x) for x in self.out_adj[a] if x != sa)
        return [Candidate(m, score(self.t, self.w, m), a) for m in moves]

    def involves_degree_two(self, m: Move) -> bool:
        if any(self.deg[v] == 2 and v in self.pseudo_set for v in m.vertices()):
            return True
        _, new = arc_changes(self.t, m)
        return any(self.deg[arc[1]] == 2 and self.w.link(*arc) for arc in new)

    def rank(self, cands: Iterable[Candidate]) -> list[Candidate]:
        return sorted(
            cands,
            key=lambda c: (-c.score, not self.involves_degree_two(c.move), -self.deg[c.pivot], c.move.key()),
        )

    def probe_segment(self, a: int) -> Candidate | None:
        """Best POTDTC with SCORE >= 0 built around a score-1 transposition."""
        t, w = self.t, self.w
        sa = t.succ(a)
        rev = t.rev
        partners = [
            b
            for b in self.in_adj[sa]
            if b != a
            and t.succ(b) != a
            and w.link(b, sa, b in rev, sa in rev)
            and w.link(a, t.succ(b), a in rev, t.succ(b) in rev)
        ]
        for b in _sample(self.rng, partners, self.fanout):
            m = probe_segment_potdtc(t, w, a, b, self.fanout, self.rng, self.out_adj)
            if m is not None:
                return Candidate(m, score(t, w, m), a)
        return None

    # iterations ------------------------------------------------------------

    def step(self) -> None:
        pivots = self.pivots()
        a = pivots[0]
        if self.algo == "g-no-r" and self.forced_rotation(a):
            return
        phase2 = len(self.pseudo) == 1
        head = self.bt.head()
        banned = self.banned.get(len(self.hist), set()) if self.backtracking else set()
        cands = [
            c
            for c in self.permutation_candidates(pivots)
            if c.move != head and c.move not in banned and c.score >= 0
        ]
        if phase2:
            closing = [c for c in cands if c.score >= 1 and isinstance(c.move, ThreeCycle)]
            if closing:
                cands = closing
            elif self.backtracking:
                probe = self.probe_segment(a)
                cands = [probe] if probe and probe.move not in banned else [c for c in cands if c.score == 0]
            else:
                probe = self.probe_segment(a)
                cands = [probe] if probe else []
        ranked = self.rank(cands)
        if self.backtracking:
            self.step_backtracking(a, ranked)
        else:
            self.step_greedy(a, ranked)

    def step_greedy(self, a: int, ranked: list[Candidate]) -> None:
        best = ranked[0] if ranked else None
        if best is not None and best.score > 0:
            self.apply(best.move, best.score)
            return
        rotations = [c for c in self.rotation_candidates(a) if c.score >= 0]
        positive = self.rank(c for c in rotations if c.score > 0)
        if positive:
            self.apply(positive[0].move, positive[0].score)
            return
        if self.algo == "g-heuristic" and rotations:
            top = max(self.deg[self.t.succ(c.move.w)] for c in rotations)
            pick = [c for c in rotations if self.deg[self.t.succ(c.move.w)] == top]
            choice = pick[int(self.rng.integers(len(pick)))]
            self.apply(choice.move, choice.score)
            return
        if best is not None:
            self.apply(best.move, best.score)
            return
        if rotations:
            choice = rotations[int(self.rng.integers(len(rotations)))]
            self.apply(choice.move, choice.score)
            return
        self.idle(a)

    def step_backtracking(self, a: int, ranked: list[Candidate]) -> None:
        allowed = [c for c in ranked if c.score > 0 or self.zero_run[-1] < self.depth]
        if allowed:
            self.apply(allowed[0].move, allowed[0].score)
        else:
            self.revert(a)

    def forced_rotation(self, a: int) -> bool:
        """Degree-2 pivot with one tour edge: put its other edge on the tour."""
        if self.deg[a] != 2:
            return False
        t = self.t
        on_tour = [u for u in self.out_adj[a] if u == t.pred(a)]
        off = [u for u in self.out_adj[a] if u != t.pred(a)]
        if len(on_tour) != 1 or len(off) != 1:
            return False
        b = off[0]
        m = Rotation(b, a)
        if t.succ(b) == a or m in self.banned.get(len(self.hist), set()):
            return False
        sc = score(t, self.w, m)
        if sc < 0:
            return False
        self.apply(m, sc)
        return True

    def run_attempt(self) -> bool:
        """Phase 1 down to one pseudo-arc, then phase 2; each gets the budget."""
        spent = 0
        while len(self.pseudo) > 1 and spent < self.budget:
            self.tick()
            spent += 1
        if len(self.pseudo) > 1:
            return False
        spent = 0
        while self.pseudo and spent < self.budget:
            self.tick()
            spent += 1
        return not self.pseudo

    def tick(self) -> None:
        if self.cancel is not None and self.cancel.is_set():
            raise _Cancelled
        self.iteration += 1
        self.step()


class _Cancelled(Exception):
    pass


def probe_segment_potdtc(
    t: Tour,
    w: LinkGraph,
    a: int,
    b: int,
    fanout: int,
    rng: np.random.Generator,
    out_adj: Sequence[Sequence[int]] | None = None,
) -> Potdtc | None:
    """Search the shorter side of the chord ``{a, b}`` for a crossing pair.

    ``(a b)`` alone would split the tour.  Pairing it with ``(c d)``, where
    ``c`` lies strictly inside the shorter segment and ``d`` outside,
    restores a single cycle.  ``d`` is taken as the predecessor of a
    neighbour of ``c`` so that ``c`` gains a real arc.  Returns the best
    such move with SCORE >= 0, or None.
    """
    n = t.n
    forward = (t.ord(b) - t.ord(a)) % n
    if forward - 1 <= n - forward - 1:
        lo, span = a, forward
    else:
        lo, span = b, n - forward
    interior = [t.ord_inv((t.ord(lo) - 1 + k) % n + 1) for k in range(1, span)]
    if not interior:
        return None
    inside = set(interior)
    best: tuple[int, tuple, Potdtc] | None = None
    for c in _sample(rng, interior, fanout):
        nbrs = out_adj[c] if out_adj is not None else tuple(sorted(w.neighbors(c)))
        for y in _sample(rng, nbrs, fanout):
            d = t.pred(y)
            if d in inside or d in (a, b, c):
                continue
            m = Potdtc(a, b, c, d)
            if not interlaced(t, a, b, c, d):
                continue
            sc = score(t, w, m)
            if sc >= 0 and (best is None or (sc, m.key()) > (best[0], best[1])):
                best = (sc, m.key(), m)
    return best[2] if best else None


# entry points ------------------------------------------------------------------


def solver_rng(seed: int | None) -> np.random.Generator:
    """PCG64 stream for the search, kept apart from the generators' streams
    so that a graph and its solver can share one seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))


def precheck(g: Graph) -> None:
    """Reject graphs that obviously have no Hamilton circuit."""
    if g.n < 3:
        raise NotHamiltonian("a Hamilton circuit needs at least 3 vertices")
    for v in range(1, g.n + 1):
        if g.directed:
            if not g.neighbors(v) or not g.in_neighbors(v):
                side = "out" if not g.neighbors(v) else "in"
                raise NotHamiltonian(f"vertex {v} has {side}-degree 0", v)
        elif g.degree(v) < 2:
            raise NotHamiltonian(f"vertex {v} has degree {g.degree(v)} < 2", v)
    for adj in ((g.neighbors, g.in_neighbors) if g.directed else (g.neighbors,)):
        seen = {1}
        stack = [1]
        while stack:
            for u in adj(stack.pop()):
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != g.n:
            missing = min(set(range(1, g.n + 1)) - seen)
            raise NotHamiltonian(f"graph is not {'strongly ' if g.directed else ''}connected (vertex {missing} unreachable)", missing)


def _initial_tour(w: LinkGraph, base: Graph, cfg: SolveConfig, rng: np.random.Generator) -> Tour:
    if cfg.start == "complement" and not isinstance(w, ContractedGraph):
        return complement_tour(base, int(rng.integers(2**63)))
    order = rng.permutation(w.n) + 1
    rev: list[int] = []
    if isinstance(w, ContractedGraph) and not w.directed:
        flips = rng.integers(0, 2, size=len(w.r_map))
        rev = [i for i, f in zip(sorted(w.r_map), flips) if f]
    return build_tour(order, rev)


def solve(g: Graph, cfg: SolveConfig | None = None, cancel: threading.Event | None = None) -> SolveResult:
    """Search ``g`` for a Hamilton circuit; the result tour is over ``g``.

    Raises NotHamiltonian (an InputError) for graphs that fail the quick
    degree and connectivity checks.
    """
    cfg = cfg or SolveConfig()
    if cfg.algorithm == "d" and not g.directed:
        raise InputError("algorithm d expects a directed graph")
    if cfg.algorithm != "d" and g.directed:
        raise InputError(f"algorithm {cfg.algorithm} expects an undirected graph")
    precheck(g)
    work: LinkGraph = g
    cg: ContractedGraph | None = None
    if cfg.contract:
        try:
            cg = contract_any(g)
        except TriviallyHamiltonian as done:
            return SolveResult(True, done.tour, 0, [], FailureDiagnostics(), reason="single cycle", seed=cfg.seed)
        work = cg
    names = cg.name if cg is not None else str
    rng = solver_rng(cfg.seed)
    search = _Search(work, cfg, rng, names)
    search.cancel = cancel
    found = False
    reason = "budget exhausted"
    while True:
        search.reset(_initial_tour(work, g, cfg, rng))
        search._log("restart" if search.restarts or search.iteration else "start", None)
        try:
            found = search.run_attempt()
            if found or not search.backtracking:
                break
        except _Restart:
            reason = "search stuck"
        except _Cancelled:
            reason = "cancelled"
            break
        if search.restarts >= cfg.max_restarts:
            break
        search.restarts += 1
    tour = None
    if found:
        tour = expand_tour(cg, search.t) if cg is not None else search.t
        if not verify(g, tour.order):
            raise RuntimeError("solver produced a tour that fails verification")
        reason = ""
    return SolveResult(
        found,
        tour,
        search.iteration,
        list(search.trace),
        search.diag,
        restarts=search.restarts,
        reason=reason,
        start_tour=search.start,
        work_tour=search.t,
        net_moves=[m for m, _ in search.hist],
        seed=cfg.seed,
    )


def solve_portfolio(g: Graph, cfg: SolveConfig, k: int) -> SolveResult:
    """Run ``k`` solvers with seeds ``seed, seed+1, ...``; lowest found seed wins.

    A worker stops early once a lower seed has succeeded, so the answer
    does not depend on thread timing.
    """
    if k < 1:
        raise InputError("portfolio size must be positive")
    base = cfg.seed if cfg.seed is not None else 0
    seeds = [base + i for i in range(k)]
    cancels = [threading.Event() for _ in seeds]
    lock = threading.Lock()

    def work(i: int) -> SolveResult:
        res = solve(g, replace(cfg, seed=seeds[i]), cancels[i])
        if res.found:
            with lock:
                for j in range(i + 1, k):
                    cancels[j].set()
        return res

    with ThreadPoolExecutor(max_workers=k) as pool:
        results = list(pool.map(work, range(k)))
    for res in results:
        if res.found:
            return res
    return results[0]
