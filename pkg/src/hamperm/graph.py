"""Graphs, digraphs and weighted graphs over dense vertex ids ``1..n``.

The text format is a header ``n m FLAGS`` (``U``, ``D``, ``UW`` or ``DW``)
followed by ``m`` lines ``u v`` or ``u v w``.  ``#`` starts a comment.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Iterable, Iterator

from hamperm.errors import InputError, ParseError

_FLAGS = {"U": (False, False), "D": (True, False), "UW": (False, True), "DW": (True, True)}


def _as_id(v) -> int:
    try:
        return operator.index(v)
    except TypeError:
        raise InputError(f"vertex id {v!r} is not an integer") from None


@dataclass(frozen=True)
class DegreeProfile:
    """Per-vertex degree counts, indexed by vertex id (index 0 unused)."""

    deg: tuple[int, ...]
    out_deg: tuple[int, ...]
    in_deg: tuple[int, ...]


class Graph:
    """Immutable simple graph or digraph with optional arc weights.

    Undirected edges are stored as symmetric arc pairs, so every query is
    answered from the out-adjacency sets alone.
    """

    __slots__ = ("n", "directed", "_out", "_in", "_weights", "_m")

    def __init__(
        self,
        n: int,
        arcs: Iterable[tuple[int, int]] = (),
        *,
        directed: bool = False,
        weights: dict[tuple[int, int], float] | None = None,
    ):
        if n < 0:
            raise InputError("vertex count must be nonnegative")
        self.n = n
        self.directed = directed
        out: list[set[int]] = [set() for _ in range(n + 1)]
        inn: list[set[int]] = [set() for _ in range(n + 1)]
        m = 0
        for u, v in arcs:
            u, v = _as_id(u), _as_id(v)
            self._check(u)
            self._check(v)
            if u == v:
                raise InputError(f"loop at vertex {u}")
            if v in out[u]:
                raise InputError(f"duplicate arc ({u}, {v})")
            out[u].add(v)
            inn[v].add(u)
            m += 1
            if not directed:
                if u in out[v]:
                    raise InputError(f"duplicate edge {{{u}, {v}}}")
                out[v].add(u)
                inn[u].add(v)
        self._out = tuple(frozenset(s) for s in out)
        self._in = self._out if not directed else tuple(frozenset(s) for s in inn)
        self._m = m
        self._weights = None
        if weights is not None:
            table: dict[tuple[int, int], float] = {}
            for (u, v), w in weights.items():
                if v not in self._out[u]:
                    raise InputError(f"weight given for missing arc ({u}, {v})")
                if not math.isfinite(w) or w < 0:
                    raise InputError(f"weight on ({u}, {v}) must be finite and nonnegative")
                table[(u, v)] = float(w)
                if not directed:
                    table[(v, u)] = float(w)
            missing = [a for a in self.arcs() if a not in table]
            if missing:
                raise InputError(f"arc {missing[0]} has no weight")
            self._weights = table

    def _check(self, v: int) -> None:
        if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= self.n:
            raise InputError(f"vertex id {v!r} out of range 1..{self.n}")

    @property
    def m(self) -> int:
        """Number of edges (undirected) or arcs (directed)."""
        return self._m

    @property
    def weighted(self) -> bool:
        return self._weights is not None

    def has_arc(self, u: int, v: int) -> bool:
        """True iff ``(u, v)`` is stored.  A loop query returns False."""
        self._check(u)
        self._check(v)
        return v in self._out[u]

    def link(self, u: int, v: int, u_rev: bool = False, v_rev: bool = False) -> bool:
        """Arc test used by tours; orientation flags are meaningless here."""
        return v in self._out[u]

    def neighbors(self, v: int) -> frozenset[int]:
        return self._out[v]

    def in_neighbors(self, v: int) -> frozenset[int]:
        return self._in[v]

    def degree(self, v: int) -> int:
        """Degree, or total in+out degree for a digraph."""
        if self.directed:
            return len(self._out[v]) + len(self._in[v])
        return len(self._out[v])

    def weight(self, u: int, v: int) -> float:
        if self._weights is None:
            raise InputError("graph has no weights")
        try:
            return self._weights[(u, v)]
        except KeyError:
            raise InputError(f"arc ({u}, {v}) has no weight") from None

    def arcs(self) -> Iterator[tuple[int, int]]:
        """Stored arcs; for undirected graphs each edge once as ``u < v``."""
        for u in range(1, self.n + 1):
            for v in sorted(self._out[u]):
                if self.directed or u < v:
                    yield u, v

    def edge_weights(self) -> dict[tuple[int, int], float] | None:
        if self._weights is None:
            return None
        return {a: self._weights[a] for a in self.arcs()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.directed == other.directed
            and self._out == other._out
            and self.edge_weights() == other.edge_weights()
        )

    def __hash__(self) -> int:
        return hash((self.n, self.directed, self._out))

    def __repr__(self) -> str:
        kind = "Digraph" if self.directed else "Graph"
        return f"<{kind} n={self.n} m={self.m}{' weighted' if self.weighted else ''}>"


def complete_graph(n: int, directed: bool = False) -> Graph:
    if directed:
        return Graph(n, ((u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v), directed=True)
    return Graph(n, ((u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)))


def degrees(g: Graph) -> DegreeProfile:
    out = tuple(0 if v == 0 else len(g.neighbors(v)) for v in range(g.n + 1))
    inn = tuple(0 if v == 0 else len(g.in_neighbors(v)) for v in range(g.n + 1))
    deg = tuple(o + i for o, i in zip(out, inn)) if g.directed else out
    return DegreeProfile(deg=deg, out_deg=out, in_deg=inn)


def parse_graph(text: str) -> Graph:
    """Parse the graph text format; errors carry the 1-based line number."""
    header: tuple[int, int, bool, bool] | None = None
    arcs: list[tuple[int, int]] = []
    weights: dict[tuple[int, int], float] = {}
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 3 or parts[2] not in _FLAGS:
                raise ParseError("header must be 'n m FLAGS' with FLAGS in U, D, UW, DW", lineno)
            try:
                n, m = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError("header counts must be integers", lineno) from None
            if n < 0 or m < 0:
                raise ParseError("header counts must be nonnegative", lineno)
            header = (n, m, *_FLAGS[parts[2]])
            continue
        n, _, directed, weighted = header
        if len(parts) != (3 if weighted else 2):
            raise ParseError(f"expected {'u v w' if weighted else 'u v'}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError("vertex ids must be integers", lineno) from None
        if not (1 <= u <= n and 1 <= v <= n):
            raise ParseError(f"vertex id out of range 1..{n}", lineno)
        if u == v:
            raise ParseError(f"loop at vertex {u}", lineno)
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in seen:
            raise ParseError(f"duplicate edge {u} {v}", lineno)
        seen.add(key)
        arcs.append((u, v))
        if weighted:
            try:
                w = float(parts[2])
            except ValueError:
                raise ParseError("weight must be a number", lineno) from None
            if not math.isfinite(w) or w < 0:
                raise ParseError("weight must be a finite nonnegative number", lineno)
            weights[(u, v)] = w
    if header is None:
        raise ParseError("missing header")
    n, m, directed, weighted = header
    if len(arcs) != m:
        raise ParseError(f"header declares {m} edges but {len(arcs)} were given")
    return Graph(n, arcs, directed=directed, weights=weights if weighted else None)


def _fmt_weight(w: float) -> str:
    return repr(int(w)) if w.is_integer() else repr(w)


def serialize_graph(g: Graph) -> str:
    """Canonical text form: header then sorted edge lines."""
    flag = ("D" if g.directed else "U") + ("W" if g.weighted else "")
    lines = [f"{g.n} {g.m} {flag}"]
    for u, v in g.arcs():
        lines.append(f"{u} {v} {_fmt_weight(g.weight(u, v))}" if g.weighted else f"{u} {v}")
    return "\n".join(lines) + "\n"
