"""Seeded random measures and weights used by the property suites and ``verify-all``."""

from __future__ import annotations

import cmath
import math

import numpy as np

from .measure import DensityGrid, Disc, PlanarMeasure, Rect
from .potential import SubharmonicWeight


def random_integer_measure(rng: np.random.Generator, n_range=(2, 64)) -> tuple[PlanarMeasure, Rect]:
    """Atoms of mass < 1 plus a patchy density on a random square, total mass an integer N."""
    N = int(rng.integers(n_range[0], n_range[1] + 1))
    side = rng.uniform(0.5, 2.0)
    x0, y0 = rng.uniform(-1, 1, 2)
    sq = Rect(x0, x0 + side, y0, y0 + side)
    n = int(rng.integers(1, 17))
    if rng.uniform() < 0.5:
        dr = sq
    else:
        a, b = np.sort(rng.uniform(0, 0.95, 2))
        c, d = np.sort(rng.uniform(0, 0.95, 2))
        dr = Rect(x0 + a * side, x0 + max(b, a + 0.05) * side, y0 + c * side, y0 + max(d, c + 0.05) * side)
    cells = rng.uniform(0, 1, (n, n)) * (rng.uniform(size=(n, n)) > rng.uniform(0, 0.6))
    if cells.sum() == 0:
        cells[0, 0] = 1.0
    k = int(rng.integers(0, min(N, 12)))
    am = rng.uniform(0.05, 0.95, k)
    while am.sum() > N - 0.5:
        am *= 0.5
    ax = rng.uniform(sq.x_min, sq.x_max, k)
    ay = rng.uniform(sq.y_min, sq.y_max, k)
    if k > 2 and rng.uniform() < 0.3:
        # shared coordinates exercise the collision ordering
        ax[1] = ax[0]
        ay[2] = ay[0]
    cells = cells / cells.sum() * (N - am.sum())
    mu = PlanarMeasure.build(np.column_stack([ax, ay, am]), DensityGrid(dr, cells), sq)
    return mu, sq


def random_weight(rng: np.random.Generator, r: float | None = None) -> SubharmonicWeight:
    """Density on a random square plus up to three atoms, random harmonic polynomial, disc about 0."""
    r = r if r is not None else rng.uniform(0.1, 0.49)
    side = rng.uniform(0.2, 0.9)
    cx, cy = rng.uniform(-0.2, 0.2, 2)
    n = int(rng.integers(1, 6))
    cells = rng.uniform(0, 1, (n, n)) * rng.uniform(0.05, 1.5) / (n * n)
    grid = DensityGrid(Rect(cx - side / 2, cx + side / 2, cy - side / 2, cy + side / 2), cells)
    k = int(rng.integers(0, 4))
    atoms = [(*rng.uniform(-0.3, 0.3, 2), rng.uniform(0.05, 0.6)) for _ in range(k)]
    mu = PlanarMeasure.build(atoms, grid)
    g0 = tuple(complex(*rng.normal(size=2)) for _ in range(int(rng.integers(0, 3))))
    return SubharmonicWeight(mu, g0, Disc(0.0, 0.0, r))


def random_point_in(rng: np.random.Generator, disc: Disc, shrink: float = 0.999) -> complex:
    rad = disc.r * shrink * math.sqrt(rng.uniform())
    return disc.centre + rad * cmath.exp(2j * math.pi * rng.uniform())
