"""Independent Hamilton-circuit check used to vet every solver answer."""

from __future__ import annotations

from typing import Sequence

from hamperm.errors import InputError
from hamperm.graph import Graph


def verify(g: Graph, order: Sequence[int]) -> bool:
    """True iff ``order`` visits every vertex once and each step is an arc.

    Raises InputError when the sizes differ.
    """
    order = list(order)
    if len(order) != g.n:
        raise InputError(f"tour has {len(order)} vertices, graph has {g.n}")
    if sorted(order) != list(range(1, g.n + 1)):
        return False
    return all(g.has_arc(u, w) for u, w in zip(order, order[1:] + order[:1]))
