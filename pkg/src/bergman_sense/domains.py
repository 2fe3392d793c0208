"""Planar regions used as the ambient domain Omega."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely


@dataclass(frozen=True)
class DiscDomain:
    center: complex
    radius: float

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius

    def distance_to_boundary(self, z) -> np.ndarray:
        return np.abs(self.radius - np.abs(np.asarray(z) - self.center))

    def enclosing_disc(self) -> tuple[complex, float]:
        return complex(self.center), float(self.radius)

    def to_dict(self) -> dict:
        c = complex(self.center)
        return {"kind": "disc", "center": [c.real, c.imag], "radius": self.radius}


class PolygonDomain:
    """Open simple polygon given by its vertices (either orientation)."""

    def __init__(self, vertices):
        self.vertices = np.asarray(vertices, dtype=complex)
        self._poly = shapely.Polygon(np.column_stack([self.vertices.real, self.vertices.imag]))
        if not self._poly.is_valid:
            raise ValueError("polygon vertices do not describe a simple polygon")
        shapely.prepare(self._poly)

    @classmethod
    def rectangle(cls, x0: float, x1: float, y0: float, y1: float) -> "PolygonDomain":
        return cls([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)])

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        inside = shapely.contains_xy(self._poly, z.real, z.imag)
        return np.asarray(inside) & (self.distance_to_boundary(z) > 0)

    def distance_to_boundary(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        pts = shapely.points(z.real, z.imag)
        return np.asarray(shapely.distance(self._poly.exterior, pts), dtype=float)

    def enclosing_disc(self) -> tuple[complex, float]:
        lo = complex(self.vertices.real.min(), self.vertices.imag.min())
        hi = complex(self.vertices.real.max(), self.vertices.imag.max())
        c = 0.5 * (lo + hi)
        return c, float(np.max(np.abs(self.vertices - c)))

    def to_dict(self) -> dict:
        return {"kind": "polygon", "vertices": [[v.real, v.imag] for v in self.vertices]}


def domain_from_dict(spec: dict):
    if spec["kind"] == "disc":
        return DiscDomain(complex(*spec["center"]), float(spec["radius"]))
    if spec["kind"] == "polygon":
        return PolygonDomain([complex(*v) for v in spec["vertices"]])
    if spec["kind"] == "rectangle":
        return PolygonDomain.rectangle(*spec["bounds"])
    raise ValueError(f"unknown domain kind {spec['kind']!r}")
