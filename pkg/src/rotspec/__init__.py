"""Exact rotation sets and localized entropy for a discontinuous-entropy example on the full 3-shift."""
from .geometry import HullQ, convex_hull, predicted_vertices
from .potential import Potential, PotentialParams, Vec2Q
from .symbolic import PeriodicOrbit, enumerate_orbits
from .transfer import TransferGraph, build_graph, pressure

__all__ = [
    "HullQ",
    "PeriodicOrbit",
    "Potential",
    "PotentialParams",
    "TransferGraph",
    "Vec2Q",
    "build_graph",
    "convex_hull",
    "enumerate_orbits",
    "predicted_vertices",
    "pressure",
]
