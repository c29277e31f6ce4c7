"""Collapse forced degree-2 chains into super-vertices and expand tours back.

Chains whose interior vertices have degree 2 must be traversed whole by any
Hamilton circuit, so each becomes a single vertex of the contracted graph.
Edges that can never lie on a circuit are dropped along the way:

* a vertex already holding two forced edges loses every other edge
  (adjacent chains merge through it);
* the edge joining the two ends of a chain would close a short cycle.

Both rules are applied until nothing changes.  Vertices of the contracted
graph are numbered ``1..n'``: untouched vertices first in their original
order, then the chains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from hamperm.errors import InputError
from hamperm.graph import Graph
from hamperm.tour import Tour, build_tour


class NotHamiltonian(InputError):
    """The graph provably has no Hamilton circuit."""

    def __init__(self, message: str, vertex: int | None = None):
        self.vertex = vertex
        super().__init__(message)


class DegenerateContraction(InputError):
    """Fewer than three vertices remain after contraction."""


class TriviallyHamiltonian(Exception):
    """Forced edges already form a Hamilton circuit; carries it as ``tour``."""

    def __init__(self, tour: Tour):
        self.tour = tour
        super().__init__("graph is a single cycle")


class UnexpandableTour(InputError):
    """A contracted tour whose chain orientations do not fit the graph."""


@dataclass(frozen=True)
class RVertex:
    id: int
    path: tuple[int, ...]

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.path[0], self.path[-1]

    @property
    def name(self) -> str:
        return "-".join(map(str, self.path))


class ContractedGraph:
    """The contracted graph plus what is needed to map tours back.

    Acts as a graph for the solver: ``link`` decides whether a tour arc
    ``u -> w`` is real given which way each chain is traversed.
    """

    def __init__(self, original: Graph, reduced: Graph, paths: Sequence[tuple[int, ...]]):
        self.original = original
        self.reduced = reduced
        self.directed = original.directed
        self.paths: tuple[tuple[int, ...], ...] = tuple(paths)
        self.n = len(self.paths)
        node_of = [0] * (original.n + 1)
        for i, p in enumerate(self.paths, start=1):
            for v in p:
                node_of[v] = i
        self._node_of = node_of
        self.passthrough = {p[0]: i for i, p in enumerate(self.paths, start=1) if len(p) == 1}
        self.r_map = {i: RVertex(i, p) for i, p in enumerate(self.paths, start=1) if len(p) > 1}
        arcs: set[tuple[int, int]] = set()
        for x, y in reduced.arcs():
            a, b = node_of[x], node_of[y]
            if a == b:
                continue
            arcs.add((a, b) if self.directed else (min(a, b), max(a, b)))
        self.g_prime = Graph(self.n, sorted(arcs), directed=self.directed)

    def node_of(self, v: int) -> int:
        return self._node_of[v]

    def name(self, i: int) -> str:
        return "-".join(map(str, self.paths[i - 1]))

    def exit_end(self, i: int, rev: bool = False) -> int:
        p = self.paths[i - 1]
        return p[0] if rev and not self.directed else p[-1]

    def entry_end(self, i: int, rev: bool = False) -> int:
        p = self.paths[i - 1]
        return p[-1] if rev and not self.directed else p[0]

    def link(self, u: int, w: int, u_rev: bool = False, w_rev: bool = False) -> bool:
        x, y = self.exit_end(u, u_rev), self.entry_end(w, w_rev)
        return x != y and self.reduced.link(x, y)

    def neighbors(self, v: int):
        return self.g_prime.neighbors(v)

    def in_neighbors(self, v: int):
        return self.g_prime.in_neighbors(v)

    def degree(self, v: int) -> int:
        return self.g_prime.degree(v)

    def rmap_text(self) -> str:
        """Sidecar map: one ``id: v1,v2,...`` line per contracted vertex."""
        return "".join(f"{i}: {','.join(map(str, p))}\n" for i, p in enumerate(self.paths, start=1))

    def resolve(self, token: str) -> int:
        """Contracted id for a name such as ``7`` or ``4-6-9`` (either direction)."""
        try:
            ids = tuple(int(x) for x in token.split("-"))
        except ValueError:
            raise InputError(f"bad vertex token {token!r}") from None
        for v in ids:
            if not 1 <= v <= self.original.n:
                raise InputError(f"vertex {v} out of range")
        i = self._node_of[ids[0]]
        path = self.paths[i - 1]
        if ids not in (path, path[::-1]):
            raise InputError(f"{token!r} is not a vertex of the contracted graph")
        return i


def _chains(n: int, forced: dict[int, set[int]]) -> list[list[int]]:
    """Maximal paths and cycles of the forced-edge graph (undirected)."""
    seen = [False] * (n + 1)
    out: list[list[int]] = []
    for v in range(1, n + 1):
        if seen[v] or not forced[v] or len(forced[v]) == 2:
            continue
        path = [v]
        seen[v] = True
        prev, cur = 0, v
        while True:
            nxt = [x for x in forced[cur] if x != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            path.append(cur)
            seen[cur] = True
        out.append(path)
    for v in range(1, n + 1):
        if not seen[v] and forced[v]:
            cyc = [v]
            seen[v] = True
            prev, cur = 0, v
            while True:
                nxt = [x for x in forced[cur] if x != prev and not seen[x]]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                cyc.append(cur)
                seen[cur] = True
            out.append(cyc + [v])
    return out


def contract(g: Graph) -> ContractedGraph:
    """Contract an undirected graph; see the module docstring for the rules."""
    if g.directed:
        raise InputError("contract expects an undirected graph; use contract_digraph")
    n = g.n
    adj = [set(g.neighbors(v)) if v else set() for v in range(n + 1)]
    forced: dict[int, set[int]] = {v: set() for v in range(1, n + 1)}

    def drop(u: int, v: int) -> None:
        adj[u].discard(v)
        adj[v].discard(u)

    changed = True
    while changed:
        changed = False
        for v in range(1, n + 1):
            if len(adj[v]) < 2:
                raise NotHamiltonian(f"vertex {v} has degree {len(adj[v])} < 2", v)
            if len(adj[v]) == 2:
                for u in adj[v]:
                    if u not in forced[v]:
                        forced[v].add(u)
                        forced[u].add(v)
                        changed = True
        for v in range(1, n + 1):
            if len(forced[v]) > 2:
                raise NotHamiltonian(f"vertex {v} is forced onto three edges", v)
            if len(forced[v]) == 2 and len(adj[v]) > 2:
                for u in list(adj[v] - forced[v]):
                    drop(u, v)
                changed = True
        if changed:
            continue
        for chain in _chains(n, forced):
            if chain[0] == chain[-1]:
                if len(chain) - 1 == n:
                    raise TriviallyHamiltonian(build_tour(chain[:-1]))
                raise NotHamiltonian(f"forced edges close a short cycle through {chain[0]}", chain[0])
            a, b = chain[0], chain[-1]
            if b in adj[a]:
                if len(chain) == n:
                    raise TriviallyHamiltonian(build_tour(chain))
                drop(a, b)
                changed = True
    chains = _chains(n, forced)
    in_chain = {v for c in chains for v in c}
    paths = [(v,) for v in range(1, n + 1) if v not in in_chain] + [tuple(c) for c in chains]
    if len(paths) < 3:
        raise DegenerateContraction("fewer than three vertices remain after contraction")
    reduced = Graph(n, ((u, v) for u in range(1, n + 1) for v in adj[u] if u < v))
    return ContractedGraph(g, reduced, paths)


def contract_digraph(d: Graph) -> ContractedGraph:
    """Contract chains through vertices with in- and out-degree exactly 1.

    For a chain ``v1 -> ... -> vr`` every other arc leaving ``v1`` or
    entering ``vr`` is deleted, as is the arc ``(vr, v1)``.
    """
    if not d.directed:
        raise InputError("contract_digraph expects a directed graph")
    n = d.n
    out = [set(d.neighbors(v)) if v else set() for v in range(n + 1)]
    inn = [set(d.in_neighbors(v)) if v else set() for v in range(n + 1)]
    nxt: dict[int, int] = {}
    prv: dict[int, int] = {}

    def drop(u: int, v: int) -> None:
        out[u].discard(v)
        inn[v].discard(u)

    def force(u: int, v: int) -> bool:
        if nxt.get(u, v) != v or prv.get(v, u) != u:
            raise NotHamiltonian(f"conflicting forced arcs at {u} -> {v}", u)
        new = u not in nxt
        nxt[u], prv[v] = v, u
        return new

    changed = True
    while changed:
        changed = False
        for v in range(1, n + 1):
            if not out[v] or not inn[v]:
                raise NotHamiltonian(f"vertex {v} has no {'out' if not out[v] else 'in'}-arc", v)
            if len(out[v]) == 1 and len(inn[v]) == 1:
                (p,), (s,) = inn[v], out[v]
                changed |= force(p, v)
                changed |= force(v, s)
        for v in list(nxt):
            if v in prv:
                continue
            chain = [v]
            while chain[-1] in nxt:
                chain.append(nxt[chain[-1]])
            first, last = chain[0], chain[-1]
            for u in list(out[first] - {chain[1]}):
                drop(first, u)
                changed = True
            for u in list(inn[last] - {chain[-2]}):
                drop(u, last)
                changed = True
            if first in out[last]:
                if len(chain) == n:
                    raise TriviallyHamiltonian(build_tour(chain))
                drop(last, first)
                changed = True
    chains = []
    for v in sorted(nxt):
        if v in prv:
            continue
        chain = [v]
        while chain[-1] in nxt:
            chain.append(nxt[chain[-1]])
        chains.append(tuple(chain))
    in_chain = {v for c in chains for v in c}
    if len(in_chain) != len(set(nxt) | set(prv)):
        start = next(v for v in nxt if v not in in_chain)
        cyc = [start]
        while nxt[cyc[-1]] != start:
            cyc.append(nxt[cyc[-1]])
        if len(cyc) == n:
            raise TriviallyHamiltonian(build_tour(cyc))
        raise NotHamiltonian(f"forced arcs close a short cycle through {start}", start)
    paths = [(v,) for v in range(1, n + 1) if v not in in_chain] + chains
    if len(paths) < 3:
        raise DegenerateContraction("fewer than three vertices remain after contraction")
    reduced = Graph(n, ((u, v) for u in range(1, n + 1) for v in out[u]), directed=True)
    return ContractedGraph(d, reduced, paths)


def infer_orientations(cg: ContractedGraph, order: Sequence[int]) -> frozenset[int] | None:
    """Reversed chain ids making ``order`` a circuit of the original graph, if any."""
    k = len(order)
    options = [(False, True) if len(cg.paths[x - 1]) > 1 and not cg.directed else (False,) for x in order]
    for s0 in options[0]:
        parents: list[dict[bool, bool]] = [{s0: s0}]
        for i in range(1, k):
            layer = {}
            for s in options[i]:
                for p in parents[-1]:
                    if cg.link(order[i - 1], order[i], p, s):
                        layer[s] = p
                        break
            if not layer:
                break
            parents.append(layer)
        else:
            for last in parents[-1]:
                if cg.link(order[-1], order[0], last, s0):
                    states = [last]
                    for i in range(k - 1, 0, -1):
                        states.append(parents[i][states[-1]])
                    states.reverse()
                    return frozenset(x for x, s in zip(order, states) if s)
    return None


def expand_tour(
    cg: ContractedGraph, t: Tour, orientations: Mapping[int, bool] | None = None
) -> Tour:
    """Replace each chain vertex of ``t`` by its path in the given direction.

    ``orientations`` maps chain ids to True when reversed; by default the
    tour's own reversal flags are used.
    """
    if t.n != cg.n:
        raise InputError(f"tour has {t.n} vertices, contracted graph has {cg.n}")
    if orientations is None:
        rev = t.rev
    else:
        rev = frozenset(i for i, r in orientations.items() if r)
    for u, w in t.arcs():
        if not cg.link(u, w, u in rev, w in rev):
            raise UnexpandableTour(f"arc {cg.name(u)} -> {cg.name(w)} does not fit the graph")
    seq: list[int] = []
    for x in t.order:
        p = cg.paths[x - 1]
        seq.extend(p[::-1] if x in rev and not cg.directed else p)
    return build_tour(seq)


def contract_any(g: Graph) -> ContractedGraph:
    return contract_digraph(g) if g.directed else contract(g)
