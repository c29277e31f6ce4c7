"""Seeded random graph families.

Every generator draws from ``numpy.random.default_rng(seed)``, which is
PCG64 in all supported numpy versions, so a (parameters, seed) pair always
yields the same graph.
"""

from __future__ import annotations

import numpy as np

from hamperm.errors import InputError
from hamperm.graph import Graph
from hamperm.tour import Tour, build_tour


def _rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def _pair_from_index(idx: int, n: int) -> tuple[int, int]:
    # Row-major enumeration of pairs u < v over 0..n-1.
    u = int((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8 * idx)) // 2)
    while u * (2 * n - u - 1) // 2 > idx:
        u -= 1
    while (u + 1) * (2 * n - u - 2) // 2 <= idx:
        u += 1
    v = idx - u * (2 * n - u - 1) // 2 + u + 1
    return u + 1, v + 1


def gnm(n: int, m: int, seed: int | None = None) -> Graph:
    """Uniform random graph with exactly ``m`` edges."""
    total = n * (n - 1) // 2
    if n < 0 or not 0 <= m <= total:
        raise InputError(f"m must lie in 0..{total}")
    rng = _rng(seed)
    picks = rng.choice(total, size=m, replace=False) if m else []
    return Graph(n, sorted(_pair_from_index(int(i), n) for i in picks))


def _random_pairs(rng: np.random.Generator, n: int, directed: bool):
    """Distinct random pairs in uniformly random order (rejection sampling)."""
    seen: set[tuple[int, int]] = set()
    limit = n * (n - 1) if directed else n * (n - 1) // 2
    while len(seen) < limit:
        u, v = (int(x) for x in rng.integers(1, n + 1, size=2))
        if u == v:
            continue
        key = (u, v) if directed else (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        yield key


def boll_graph(n: int, seed: int | None = None) -> Graph:
    """Random edge process stopped once every vertex has degree at least 2."""
    if n < 3:
        raise InputError("n must be at least 3")
    rng = _rng(seed)
    deg = [0] * (n + 1)
    low = n
    edges = []
    for u, v in _random_pairs(rng, n, directed=False):
        edges.append((u, v))
        for x in (u, v):
            deg[x] += 1
            if deg[x] == 2:
                low -= 1
        if low == 0:
            break
    return Graph(n, edges)


def frieze_boll_digraph(n: int, seed: int | None = None) -> Graph:
    """Random arc process stopped once all in- and out-degrees are at least 1."""
    if n < 3:
        raise InputError("n must be at least 3")
    rng = _rng(seed)
    outd = [0] * (n + 1)
    ind = [0] * (n + 1)
    missing = 2 * n
    arcs = []
    for u, v in _random_pairs(rng, n, directed=True):
        arcs.append((u, v))
        outd[u] += 1
        ind[v] += 1
        missing -= (outd[u] == 1) + (ind[v] == 1)
        if missing == 0:
            break
    return Graph(n, arcs, directed=True)


def _choose_others(rng: np.random.Generator, n: int, v: int, k: int) -> list[int]:
    picks = rng.choice(n - 1, size=k, replace=False)
    return [int(p) + 1 + (int(p) + 1 >= v) for p in picks]


def r3_out(n: int, seed: int | None = None) -> Graph:
    """Each vertex picks 3 distinct neighbours; choices are symmetrised."""
    if n < 5:
        raise InputError("n must be at least 5")
    rng = _rng(seed)
    edges = {(min(v, u), max(v, u)) for v in range(1, n + 1) for u in _choose_others(rng, n, v, 3)}
    return Graph(n, sorted(edges))


def d_k_in_k_out(n: int, k: int, seed: int | None = None) -> Graph:
    """Each vertex picks ``k`` out-neighbours and ``k`` in-neighbours."""
    if k < 1 or n <= 2 * k:
        raise InputError("need k >= 1 and n > 2k")
    rng = _rng(seed)
    arcs: set[tuple[int, int]] = set()
    for v in range(1, n + 1):
        arcs.update((v, u) for u in _choose_others(rng, n, v, k))
        arcs.update((u, v) for u in _choose_others(rng, n, v, k))
    return Graph(n, sorted(arcs), directed=True)


def random_tour(n: int, rng: np.random.Generator) -> Tour:
    return build_tour([int(x) + 1 for x in rng.permutation(n)])


def planted(n: int, extra_m: int, seed: int | None = None) -> tuple[Graph, Tour]:
    """A random Hamilton circuit plus ``extra_m`` random chords."""
    if n < 3:
        raise InputError("n must be at least 3")
    room = n * (n - 1) // 2 - n
    if not 0 <= extra_m <= room:
        raise InputError(f"extra_m must lie in 0..{room}")
    rng = _rng(seed)
    tour = random_tour(n, rng)
    edges = {(min(u, v), max(u, v)) for u, v in tour.arcs()}
    free = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if (u, v) not in edges]
    for i in rng.choice(len(free), size=extra_m, replace=False) if extra_m else []:
        edges.add(free[int(i)])
    return Graph(n, sorted(edges)), tour


def complement_tour(g: Graph, seed: int | None = None, restarts: int = 100) -> Tour:
    """A tour none of whose arcs is an arc of ``g`` (randomised greedy)."""
    n = g.n
    rng = _rng(seed)
    for _ in range(restarts):
        start = int(rng.integers(1, n + 1))
        seq = [start]
        left = set(range(1, n + 1)) - {start}
        while left:
            options = sorted(left - g.neighbors(seq[-1]))
            if not options:
                break
            nxt = options[int(rng.integers(len(options)))]
            seq.append(nxt)
            left.discard(nxt)
        if not left and not g.has_arc(seq[-1], start):
            return build_tour(seq)
    raise InputError("no complement tour found")
