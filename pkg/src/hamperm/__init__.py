"""Hamilton circuit search by admissible permutations of pseudo-Hamilton tours."""

from hamperm.errors import InputError, ParseError
from hamperm.graph import Graph, parse_graph, serialize_graph
from hamperm.tour import Potdtc, Rotation, ThreeCycle, Tour, build_tour

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "InputError",
    "ParseError",
    "Potdtc",
    "Rotation",
    "ThreeCycle",
    "Tour",
    "build_tour",
    "parse_graph",
    "serialize_graph",
    "__version__",
]
