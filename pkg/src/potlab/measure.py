"""Finite positive measures on the plane: point atoms plus a piecewise-constant density.

Normalisation: the Riesz measure of a subharmonic function is ``dd^c phi = Delta phi / (2 pi)``,
so ``log|z - a|`` has the unit atom at ``a`` as its measure and the mass of an atom is
the Lelong number of the potential at that point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "Point2":
        return cls(float(z.real), float(z.imag))


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle; segments and points are allowed."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max):
            raise ValueError(f"inverted rectangle {self}")

    @classmethod
    def square(cls, cx: float, cy: float, side: float) -> "Rect":
        h = side / 2.0
        return cls(cx - h, cx + h, cy - h, cy + h)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def centre(self) -> Point2:
        return Point2(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))

    @property
    def is_degenerate(self) -> bool:
        return self.width <= 0.0 or self.height <= 0.0

    def aspect(self) -> float:
        """Longer side over shorter side; only defined for non-degenerate rectangles."""
        if self.is_degenerate:
            raise ValueError("aspect of a degenerate rectangle is undefined")
        return max(self.width, self.height) / min(self.width, self.height)

    def is_almost_square(self) -> bool:
        # multiplication form avoids a spurious ulp failure of long/short <= 3
        lo, hi = sorted((self.width, self.height))
        return hi <= 3.0 * lo

    def contains(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        return (x >= self.x_min) & (x <= self.x_max) & (y >= self.y_min) & (y <= self.y_max)

    def contains_rect(self, other: "Rect") -> bool:
        return (
            self.x_min <= other.x_min
            and other.x_max <= self.x_max
            and self.y_min <= other.y_min
            and other.y_max <= self.y_max
        )

    def intersection(self, other: "Rect") -> "Rect | None":
        x0, x1 = max(self.x_min, other.x_min), min(self.x_max, other.x_max)
        y0, y1 = max(self.y_min, other.y_min), min(self.y_max, other.y_max)
        if x0 > x1 or y0 > y1:
            return None
        return Rect(x0, x1, y0, y1)

    def union(self, other: "Rect") -> "Rect":
        return Rect(
            min(self.x_min, other.x_min),
            max(self.x_max, other.x_max),
            min(self.y_min, other.y_min),
            max(self.y_max, other.y_max),
        )

    def as_list(self) -> list[float]:
        return [self.x_min, self.x_max, self.y_min, self.y_max]


@dataclass(frozen=True)
class Disc:
    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("disc radius must be positive")

    @property
    def centre(self) -> complex:
        return complex(self.cx, self.cy)

    def contains(self, x, y):
        return np.hypot(np.asarray(x) - self.cx, np.asarray(y) - self.cy) <= self.r

    def bounding_square(self) -> Rect:
        return Rect.square(self.cx, self.cy, 2.0 * self.r)


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Uniform grid over ``rect``; ``cells[iy, ix]`` is the total mass of a cell, spread uniformly."""

    rect: Rect
    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=float)
        if cells.ndim != 2 or cells.size == 0:
            raise ValueError("density cells must be a non-empty 2-D array")
        if not np.all(np.isfinite(cells)) or np.any(cells < 0):
            raise ValueError("density cells must be finite and nonnegative")
        if self.rect.is_degenerate:
            raise ValueError("density grid needs a rectangle of positive area")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def ny(self) -> int:
        return self.cells.shape[0]

    @property
    def nx(self) -> int:
        return self.cells.shape[1]

    @property
    def hx(self) -> float:
        return self.rect.width / self.nx

    @property
    def hy(self) -> float:
        return self.rect.height / self.ny

    @property
    def x_edges(self) -> np.ndarray:
        return np.linspace(self.rect.x_min, self.rect.x_max, self.nx + 1)

    @property
    def y_edges(self) -> np.ndarray:
        return np.linspace(self.rect.y_min, self.rect.y_max, self.ny + 1)

    @property
    def total(self) -> float:
        return float(self.cells.sum())

    @property
    def cell_density(self) -> np.ndarray:
        """Mass per unit area in each cell."""
        return self.cells / (self.hx * self.hy)

    def with_cells(self, cells: np.ndarray) -> "DensityGrid":
        return DensityGrid(self.rect, cells)

    def overlap_fractions(self, region: Rect) -> tuple[np.ndarray, np.ndarray]:
        """Fraction of each column (``fx``) and row (``fy``) lying inside ``region``."""
        xe, ye = self.x_edges, self.y_edges
        fx = np.clip(np.minimum(xe[1:], region.x_max) - np.maximum(xe[:-1], region.x_min), 0.0, None)
        fy = np.clip(np.minimum(ye[1:], region.y_max) - np.maximum(ye[:-1], region.y_min), 0.0, None)
        return fx / self.hx, fy / self.hy

    def restricted_cells(self, region: Rect) -> np.ndarray:
        fx, fy = self.overlap_fractions(region)
        return self.cells * fy[:, None] * fx[None, :]

    def support_rect(self, region: Rect | None = None) -> Rect | None:
        """Bounding rectangle of the positive part of the density (optionally clipped to ``region``)."""
        cells = self.cells if region is None else self.restricted_cells(region)
        iy, ix = np.nonzero(cells > 0)
        if iy.size == 0:
            return None
        xe, ye = self.x_edges, self.y_edges
        box = Rect(xe[ix.min()], xe[ix.max() + 1], ye[iy.min()], ye[iy.max() + 1])
        if region is not None:
            box = box.intersection(region)
        return box


def _seg_len_integral(a: float, b: float, y1: float, y2: float, R: float) -> float:
    """Integral over x in [a, b] of |[y1, y2] intersect [-s(x), s(x)]|, s = sqrt(R^2 - x^2)."""
    a, b = max(a, -R), min(b, R)
    if a >= b:
        return 0.0
    pts = {a, b}
    for y in (y1, y2):
        if abs(y) <= R:
            w = math.sqrt(R * R - y * y)
            pts.update(v for v in (-w, w) if a < v < b)
    pts.update(v for v in (-R, 0.0, R) if a < v < b)
    xs = sorted(pts)

    def S(x):  # antiderivative of sqrt(R^2 - x^2)
        x = min(max(x, -R), R)
        return 0.5 * (x * math.sqrt(max(R * R - x * x, 0.0)) + R * R * math.asin(x / R))

    total = 0.0
    for u, v in zip(xs[:-1], xs[1:]):
        mid = 0.5 * (u + v)
        s = math.sqrt(max(R * R - mid * mid, 0.0))
        upper_is_s = s < y2
        lower_is_s = -s > y1
        top = s if upper_is_s else y2
        bot = -s if lower_is_s else y1
        if top <= bot:
            continue
        piece = 0.0
        piece += (S(v) - S(u)) if upper_is_s else y2 * (v - u)
        piece += (S(v) - S(u)) if lower_is_s else -y1 * (v - u)
        total += piece
    return total


def rect_disc_area(rect: Rect, disc: Disc) -> float:
    """Exact area of ``rect`` intersected with ``disc``."""
    return _seg_len_integral(
        rect.x_min - disc.cx, rect.x_max - disc.cx, rect.y_min - disc.cy, rect.y_max - disc.cy, disc.r
    )


@dataclass(frozen=True, eq=False)
class PlanarMeasure:
    """Atoms ``(x, y, mass)`` plus an optional density grid, all inside ``bounding``."""

    atoms: np.ndarray
    density: DensityGrid | None
    bounding: Rect

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(atoms)):
            raise ValueError("atoms must be finite")
        if np.any(atoms[:, 2] <= 0):
            raise ValueError("atom masses must be positive")
        if atoms.size and not np.all(self.bounding.contains(atoms[:, 0], atoms[:, 1])):
            raise ValueError("atoms must lie inside the bounding rectangle")
        if self.density is not None and not self.bounding.contains_rect(self.density.rect):
            raise ValueError("density grid must lie inside the bounding rectangle")
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def build(
        cls,
        atoms: Iterable[Sequence[float]] = (),
        density: DensityGrid | None = None,
        bounding: Rect | None = None,
    ) -> "PlanarMeasure":
        arr = np.array([tuple(a) for a in atoms], dtype=float).reshape(-1, 3)
        if bounding is None:
            box = density.rect if density is not None else None
            for x, y, _ in arr:
                p = Rect(x, x, y, y)
                box = p if box is None else box.union(p)
            bounding = box if box is not None else Rect(0.0, 0.0, 0.0, 0.0)
        return cls(arr, density, bounding)

    @classmethod
    def uniform(cls, rect: Rect, mass: float, n: int = 1) -> "PlanarMeasure":
        cells = np.full((n, n), mass / (n * n))
        return cls.build(density=DensityGrid(rect, cells), bounding=rect)

    @property
    def atom_xy(self) -> np.ndarray:
        return self.atoms[:, :2]

    @property
    def atom_mass(self) -> np.ndarray:
        return self.atoms[:, 2]

    @property
    def total(self) -> float:
        dens = self.density.total if self.density is not None else 0.0
        return float(self.atom_mass.sum() + dens)

    def is_empty(self) -> bool:
        return self.total == 0.0

    def to_dict(self) -> dict:
        out: dict = {"atoms": [[float(x), float(y), float(m)] for x, y, m in self.atoms]}
        if self.density is not None:
            g = self.density
            out["density"] = {
                "rect": g.rect.as_list(),
                "nx": g.nx,
                "ny": g.ny,
                "cells": [float(v) for v in g.cells.ravel()],
            }
        out["bounding"] = self.bounding.as_list()
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "PlanarMeasure":
        if not isinstance(doc, dict):
            raise ConfigError("measure must be a mapping")
        try:
            atoms = [tuple(float(v) for v in a) for a in doc.get("atoms", []) or []]
            if any(len(a) != 3 for a in atoms):
                raise ConfigError("each atom must be [x, y, mass]")
            density = None
            if doc.get("density") is not None:
                d = doc["density"]
                rect = Rect(*[float(v) for v in d["rect"]])
                nx, ny = int(d["nx"]), int(d["ny"])
                if "cells" in d:
                    cells = np.asarray(d["cells"], dtype=float)
                else:
                    # uniform shorthand: total mass spread evenly over the cells
                    cells = np.full(nx * ny, float(d["mass"]) / (nx * ny))
                if cells.size != nx * ny:
                    raise ConfigError(f"density has {cells.size} cells, expected nx*ny = {nx * ny}")
                density = DensityGrid(rect, cells.reshape(ny, nx))
            bounding = Rect(*[float(v) for v in doc["bounding"]]) if doc.get("bounding") else None
            return cls.build(atoms, density, bounding)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid measure document: {exc}") from exc


@dataclass(frozen=True)
class LelongSpectrum:
    entries: dict

    def __len__(self):
        return len(self.entries)

    def at(self, p: Point2) -> float:
        return self.entries.get(p, 0.0)


def mass_on(m: PlanarMeasure, region: Rect | Disc) -> float:
    """Mass of the closed region; exact for rectangles and (via closed-form areas) for discs."""
    if isinstance(region, Rect):
        atoms = m.atom_mass[region.contains(m.atoms[:, 0], m.atoms[:, 1])].sum() if len(m.atoms) else 0.0
        dens = float(m.density.restricted_cells(region).sum()) if m.density is not None else 0.0
        return float(atoms + dens)
    if isinstance(region, Disc):
        atoms = m.atom_mass[region.contains(m.atoms[:, 0], m.atoms[:, 1])].sum() if len(m.atoms) else 0.0
        return float(atoms + _density_disc_mass(m.density, region))
    raise TypeError(f"unsupported region {type(region).__name__}")


def _density_disc_mass(grid: DensityGrid | None, disc: Disc) -> float:
    if grid is None:
        return 0.0
    xe, ye = grid.x_edges, grid.y_edges
    dx0 = np.maximum(np.abs(xe[:-1] - disc.cx), np.abs(xe[1:] - disc.cx))
    dy0 = np.maximum(np.abs(ye[:-1] - disc.cy), np.abs(ye[1:] - disc.cy))
    far_x = np.maximum(0.0, np.maximum(xe[:-1] - disc.cx, disc.cx - xe[1:]))
    far_y = np.maximum(0.0, np.maximum(ye[:-1] - disc.cy, disc.cy - ye[1:]))
    r2 = disc.r**2
    inside = (dy0[:, None] ** 2 + dx0[None, :] ** 2) <= r2
    outside = (far_y[:, None] ** 2 + far_x[None, :] ** 2) >= r2
    total = float(grid.cells[inside].sum())
    cell_area = grid.hx * grid.hy
    for iy, ix in zip(*np.nonzero(~inside & ~outside)):
        if grid.cells[iy, ix] == 0.0:
            continue
        cell = Rect(xe[ix], xe[ix + 1], ye[iy], ye[iy + 1])
        total += grid.cells[iy, ix] * rect_disc_area(cell, disc) / cell_area
    return total


def lelong_spectrum(m: PlanarMeasure) -> LelongSpectrum:
    """Lelong numbers of the potential: one entry per atom location (colocated atoms summed)."""
    entries: dict = {}
    for x, y, mass in m.atoms:
        p = Point2(float(x), float(y))
        entries[p] = entries.get(p, 0.0) + float(mass)
    return LelongSpectrum(entries)


def scale(m: PlanarMeasure, c: float) -> PlanarMeasure:
    if not c > 0:
        raise ValueError("scale factor must be positive")
    atoms = np.array(m.atoms)
    atoms[:, 2] *= c
    density = m.density.with_cells(m.density.cells * c) if m.density is not None else None
    return PlanarMeasure(atoms, density, m.bounding)


def split_atom_integer_parts(m: PlanarMeasure) -> tuple[PlanarMeasure, list[tuple[Point2, int]]]:
    """Strip the integer part of every atom; returns the residual measure and the carried units."""
    kept = []
    carried = []
    for x, y, mass in m.atoms:
        k = int(math.floor(mass))
        frac = mass - k
        if k >= 1:
            carried.append((Point2(float(x), float(y)), k))
        if frac > 0:
            kept.append((x, y, frac))
    return PlanarMeasure(np.array(kept).reshape(-1, 3), m.density, m.bounding), carried


def restrict(m: PlanarMeasure, region: Rect) -> PlanarMeasure:
    """Restriction to ``region``; density cells must not be cut by the region's boundary."""
    atoms = m.atoms[region.contains(m.atoms[:, 0], m.atoms[:, 1])] if len(m.atoms) else m.atoms
    density = None
    if m.density is not None:
        fx, fy = m.density.overlap_fractions(region)
        partial = ((fx > 1e-12) & (fx < 1 - 1e-12)).any() or ((fy > 1e-12) & (fy < 1 - 1e-12)).any()
        if partial:
            raise ValueError("restriction region cuts through density cells")
        if fx.sum() > 0 and fy.sum() > 0:
            density = m.density.with_cells(m.density.restricted_cells(region))
            if not region.contains_rect(density.rect):
                keep_x = np.nonzero(fx > 0.5)[0]
                keep_y = np.nonzero(fy > 0.5)[0]
                xe, ye = m.density.x_edges, m.density.y_edges
                rect = Rect(xe[keep_x[0]], xe[keep_x[-1] + 1], ye[keep_y[0]], ye[keep_y[-1] + 1])
                cells = m.density.cells[keep_y[0] : keep_y[-1] + 1, keep_x[0] : keep_x[-1] + 1]
                density = DensityGrid(rect, cells)
    return PlanarMeasure.build(atoms, density, region)
