"""Split a measure of integer mass N into N unit-mass pieces carried by almost-square rectangles.

The construction is a mass-balanced kd-partition.  Each sub-problem is a *tile*
(a rectangle of the partition) together with the atoms and the restriction of
the source density to that tile.  A sub-problem of integer mass ``n >= 2`` is cut
by a line perpendicular to the longer side of its support into masses
``floor(n/2)`` and ``n - floor(n/2)``; the cut coordinate comes from inverting the
piecewise-linear cumulative mass exactly.  Atoms whose mass jump straddles the
target are split into colocated fragments.  Atoms sharing the cut coordinate are
ordered by (coordinate, other coordinate, index), which plays the role of an
infinitesimal deterministic jitter.

Integer parts of atoms are removed first and returned as degenerate unit pieces
whose support and container are the atom's location.

A piece's measure is the source density restricted to its tile plus its atom
fragments; supports are bounding rectangles of that mass and containers grow
supports along the short axis until the side ratio is at most 3.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CutInfeasible, EmptyMeasure, NonIntegerMass
from .measure import DensityGrid, PlanarMeasure, Point2, Rect, mass_on, split_atom_integer_parts

MASS_TOL = 1e-9


# -- sub-problems ---------------------------------------------------------------------


@dataclass(frozen=True)
class SubProblem:
    """A tile of the partition with its atoms ``(x, y, mass, source_index)`` and integer mass."""

    tile: Rect
    atoms: np.ndarray
    N: int
    grid: DensityGrid | None

    def density_cells(self) -> np.ndarray | None:
        if self.grid is None:
            return None
        return self.grid.restricted_cells(self.tile)

    @property
    def mass(self) -> float:
        dens = float(self.density_cells().sum()) if self.grid is not None else 0.0
        return dens + float(self.atoms[:, 2].sum())

    def support(self) -> Rect | None:
        box = None
        if self.grid is not None and self.tile.area > 0:
            box = self.grid.support_rect(self.tile)
        for x, y, *_ in self.atoms:
            p = Rect(x, x, y, y)
            box = p if box is None else box.union(p)
        return box


@dataclass(frozen=True)
class Cut:
    axis: int  # 0: vertical line x = coord, 1: horizontal line y = coord
    coord: float
    left: SubProblem
    right: SubProblem
    split_atom: int | None  # source index of an atom divided by the cut
    left_container: Rect
    right_container: Rect

    @property
    def masses(self) -> tuple[float, float]:
        return self.left.mass, self.right.mass


def _line_masses(grid: DensityGrid, tile: Rect, axis: int):
    """Edges along ``axis`` and the mass of each grid line (column/row) inside the tile's other extent."""
    fx, fy = grid.overlap_fractions(tile)
    if axis == 0:
        return grid.x_edges, grid.hx, (grid.cells * fy[:, None]).sum(axis=0)
    return grid.y_edges, grid.hy, (grid.cells * fx[None, :]).sum(axis=1)


def _cumulative_density(edges, h, line_mass, lo, t):
    """Density mass in ``[lo, t]`` along the axis (vectorised in ``t``)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    a = np.maximum(edges[:-1][None, :], lo)
    b = np.minimum(edges[1:][None, :], t[:, None])
    return (np.clip(b - a, 0.0, None) / h) @ line_mass


def _order_atoms(atoms: np.ndarray, axis: int) -> np.ndarray:
    if len(atoms) == 0:
        return atoms
    key = np.lexsort((atoms[:, 3], atoms[:, 1 - axis], atoms[:, axis]))
    return atoms[key]


@dataclass
class _CutPlan:
    coord: float
    n_left_atoms: int  # atoms (in axis order) assigned wholly to the left
    split_left: float  # mass of a split fragment going left (0 if none)
    needs_split: bool


def _plan_cut(sp: SubProblem, axis: int, k: int, tol: float) -> _CutPlan:
    lo = (sp.tile.x_min, sp.tile.y_min)[axis]
    hi = (sp.tile.x_max, sp.tile.y_max)[axis]
    atoms = _order_atoms(sp.atoms, axis)
    pos = atoms[:, axis] if len(atoms) else np.zeros(0)
    w = atoms[:, 2] if len(atoms) else np.zeros(0)
    if sp.grid is not None and sp.tile.area > 0:
        edges, h, lm = _line_masses(sp.grid, sp.tile, axis)
        dens = lambda t: _cumulative_density(edges, h, lm, lo, t)
        inner = edges[(edges > lo) & (edges < hi)]
    else:
        dens = lambda t: np.zeros(np.size(t))
        inner = np.zeros(0)
    knots = np.unique(np.concatenate([[lo, hi], inner, pos]))
    D = dens(knots)
    csum = np.concatenate([[0.0], np.cumsum(w)])
    before = np.searchsorted(pos, knots, side="left")
    upto = np.searchsorted(pos, knots, side="right")
    m_minus = D + csum[before]
    m_plus = D + csum[upto]

    # first position where the mass reaches k
    i = int(np.argmax(m_plus >= k - tol)) if np.any(m_plus >= k - tol) else len(knots) - 1
    if m_minus[i] >= k - tol and i > 0:
        a, b = knots[i - 1], knots[i]
        ma, mb = m_plus[i - 1], m_minus[i]
        t_lo = b if mb - ma <= 0 else a + (k - ma) / (mb - ma) * (b - a)
        t_lo = min(max(t_lo, a), b)
        jump_inside = False
    else:
        t_lo = knots[i]
        jump_inside = m_plus[i] > k + tol

    if not jump_inside:
        # extent of a flat stretch at level k: last position where mass is still <= k
        j = int(np.nonzero(m_minus <= k + tol)[0].max())
        if m_plus[j] <= k + tol and j < len(knots) - 1:
            a, b = knots[j], knots[j + 1]
            ma, mb = m_plus[j], m_minus[j + 1]
            t_hi = a if mb - ma <= 0 else a + (k - ma) / (mb - ma) * (b - a)
            t_hi = min(max(t_hi, a), b)
        else:
            t_hi = knots[j]
        if t_hi > t_lo:
            coord = 0.5 * (t_lo + t_hi)
            return _CutPlan(coord, int(np.searchsorted(pos, coord, side="right")), 0.0, False)

    coord = float(t_lo)
    first = int(np.searchsorted(pos, coord, side="left"))
    last = int(np.searchsorted(pos, coord, side="right"))
    base = float(dens(coord)[0]) + csum[first]
    n_left = first
    for idx in range(first, last):
        if base + w[idx] <= k + tol:
            base += w[idx]
            n_left = idx + 1
        else:
            break
    if base >= k - tol:
        return _CutPlan(coord, n_left, 0.0, False)
    return _CutPlan(coord, n_left, k - base, True)


def _apply_cut(sp: SubProblem, axis: int, k: int, plan: _CutPlan) -> tuple[SubProblem, SubProblem, int | None]:
    atoms = _order_atoms(sp.atoms, axis)
    t = plan.coord
    if axis == 0:
        lt = Rect(sp.tile.x_min, t, sp.tile.y_min, sp.tile.y_max)
        rt = Rect(t, sp.tile.x_max, sp.tile.y_min, sp.tile.y_max)
    else:
        lt = Rect(sp.tile.x_min, sp.tile.x_max, sp.tile.y_min, t)
        rt = Rect(sp.tile.x_min, sp.tile.x_max, t, sp.tile.y_max)
    left = [a for a in atoms[: plan.n_left_atoms]]
    right = [a for a in atoms[plan.n_left_atoms :]]
    split = None
    if plan.split_left > 0:
        a = right.pop(0)
        split = int(a[3])
        left.append(np.array([a[0], a[1], plan.split_left, a[3]]))
        right.insert(0, np.array([a[0], a[1], a[2] - plan.split_left, a[3]]))
    la = np.array(left, dtype=float).reshape(-1, 4)
    ra = np.array(right, dtype=float).reshape(-1, 4)
    return SubProblem(lt, la, k, sp.grid), SubProblem(rt, ra, sp.N - k, sp.grid), split


def _cut_axis(sp: SubProblem) -> int:
    s = sp.support() or sp.tile
    return 0 if s.width >= s.height else 1


def _elongation(sp: SubProblem) -> float:
    s = sp.support()
    if s is None:
        return 1.0
    lo, hi = sorted((s.width, s.height))
    if hi == 0:
        return 1.0
    return hi / lo if lo > 0 else math.inf


def _cut(sp: SubProblem, split_atoms: bool) -> tuple[SubProblem, SubProblem, int, float, int | None]:
    """Balanced cut; both axes are tried and the one giving rounder children wins (ties: across the long side)."""
    tol = 1e-12 * max(sp.N, 1)
    k0 = sp.N // 2
    first = _cut_axis(sp)
    best = None
    for axis in (first, 1 - first):
        plan = _plan_cut(sp, axis, k0, tol)
        if plan.needs_split and not split_atoms:
            continue
        left, right, split = _apply_cut(sp, axis, k0, plan)
        score = max(_elongation(left), _elongation(right))
        if best is None or score < best[0]:
            best = (score, (left, right, axis, plan.coord, split))
    if best is not None:
        return best[1]
    # no atom splitting: nearest feasible integer on either axis
    order = sorted(range(1, sp.N), key=lambda j: (abs(j - k0), j))
    for axis in (first, 1 - first):
        for k in order:
            plan = _plan_cut(sp, axis, k, tol)
            if not plan.needs_split:
                left, right, split = _apply_cut(sp, axis, k, plan)
                return left, right, axis, plan.coord, split
    raise CutInfeasible(f"no integer split of mass {sp.N} avoids dividing an atom")


# -- containers -----------------------------------------------------------------------------


def container_candidates(support: Rect, tile: Rect, outer: Rect) -> list[Rect]:
    """Almost squares containing ``support``, obtained by widening its short side to a third of the long one.

    The first candidate is centred on the support and kept inside the tile when
    the tile is wide enough (else inside ``outer``); the rest slide along the
    widened axis and are used to reduce overlaps.
    """
    w, h = support.width, support.height
    if w == 0 and h == 0:
        return [support]
    axis = 1 if w >= h else 0  # axis to widen
    long_side = max(w, h)
    a, b = (support.x_min, support.x_max) if axis == 0 else (support.y_min, support.y_max)
    if 3.0 * (b - a) >= long_side:
        return [support]
    need = float(np.nextafter(long_side / 3.0, math.inf))
    spans = [
        (tile.x_min, tile.x_max) if axis == 0 else (tile.y_min, tile.y_max),
        (outer.x_min, outer.x_max) if axis == 0 else (outer.y_min, outer.y_max),
    ]
    los: list[float] = []
    for A, B in spans:
        if B - A < need:
            continue
        lo_min, lo_max = max(A, b - need), min(a, B - need)
        centred = min(max(0.5 * (a + b) - 0.5 * need, lo_min), lo_max)
        los += [centred] + list(np.linspace(lo_min, lo_max, 5))
    if not los:
        los = [0.5 * (a + b) - 0.5 * need]
    out, seen = [], set()
    for lo in los:
        lo = min(lo, a)
        hi = max(lo + need, b)
        for _ in range(64):
            if 3.0 * (hi - lo) >= long_side:
                break
            hi = float(np.nextafter(hi, math.inf))
        if (lo, hi) in seen:
            continue
        seen.add((lo, hi))
        if axis == 0:
            out.append(Rect(float(lo), float(hi), support.y_min, support.y_max))
        else:
            out.append(Rect(support.x_min, support.x_max, float(lo), float(hi)))
    return out


def grow_container(support: Rect, tile: Rect, outer: Rect) -> Rect:
    return container_candidates(support, tile, outer)[0]


def _local_multiplicity(box: Rect, others: np.ndarray) -> tuple[int, float]:
    """(1 + max overlap of ``others`` inside ``box``, total overlap area)."""
    if len(others) == 0:
        return 1, 0.0
    x0 = np.maximum(others[:, 0], box.x_min)
    x1 = np.minimum(others[:, 1], box.x_max)
    y0 = np.maximum(others[:, 2], box.y_min)
    y1 = np.minimum(others[:, 3], box.y_max)
    hit = (x1 > x0) & (y1 > y0)
    if not hit.any():
        return 1, 0.0
    clipped = [Rect(*v) for v in zip(x0[hit], x1[hit], y0[hit], y1[hit])]
    area = float(np.sum((x1[hit] - x0[hit]) * (y1[hit] - y0[hit])))
    return 1 + _max_multiplicity(clipped), area


def _settle_containers(supports, tiles, outer) -> list[Rect]:
    """Pick, for every widened container, the candidate position with the least local overlap."""
    cands = [container_candidates(s, t, outer) for s, t in zip(supports, tiles)]
    boxes = [c[0] for c in cands]
    arr = np.array([b.as_list() for b in boxes], dtype=float).reshape(-1, 4)
    for i, opts in enumerate(cands):
        if len(opts) < 2:
            continue
        others = np.delete(arr, i, axis=0)
        others = others[(others[:, 1] > others[:, 0]) & (others[:, 3] > others[:, 2])]
        best = min(range(len(opts)), key=lambda j: (*_local_multiplicity(opts[j], others), j))
        boxes[i] = opts[best]
        arr[i] = boxes[i].as_list()
    return boxes


# -- results ------------------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomPiece:
    """One unit-mass piece.  ``atoms`` rows are ``(x, y, mass, source_index)``."""

    index: int
    container: Rect
    support: Rect
    tile: Rect
    atoms: np.ndarray
    grid: DensityGrid | None = field(repr=False, default=None)

    @property
    def centre(self) -> Point2:
        return self.support.centre

    def density_cells(self) -> np.ndarray | None:
        if self.grid is None:
            return None
        return self.grid.restricted_cells(self.tile)

    @property
    def mass(self) -> float:
        dens = float(self.density_cells().sum()) if self.grid is not None else 0.0
        return dens + float(self.atoms[:, 2].sum())

    def mass_on(self, region: Rect) -> float:
        """Mass of this piece inside a rectangle."""
        part = self.tile.intersection(region)
        dens = 0.0
        if self.grid is not None and part is not None and part.area > 0:
            dens = float(self.grid.restricted_cells(part).sum())
        inside = region.contains(self.atoms[:, 0], self.atoms[:, 1]) if len(self.atoms) else []
        return dens + float(self.atoms[inside, 2].sum()) if len(self.atoms) else dens


@dataclass
class CertificateReport:
    mass_ok: bool
    mass_max_dev: float
    decomposition_ok: bool
    decomposition_max_dev: float
    cover_ok: bool
    cover_deficit: float
    containment_ok: bool
    disjoint_ok: bool
    aspect_ok: bool
    worst_aspect: float
    overlap_ok: bool
    max_multiplicity: int
    d_min: float
    separation_constant: float
    degenerate_coincident: bool

    @property
    def a(self) -> bool:
        return self.mass_ok and self.decomposition_ok

    @property
    def b(self) -> bool:
        return self.cover_ok and self.containment_ok

    @property
    def c(self) -> bool:
        return self.disjoint_ok

    @property
    def d(self) -> bool:
        return self.aspect_ok

    @property
    def e(self) -> bool:
        return self.overlap_ok

    @property
    def f(self) -> bool:
        """Empirical: centre separation at least side / N^2."""
        return self.separation_constant >= 1.0

    @property
    def all_pass(self) -> bool:
        return self.a and self.b and self.c and self.d and self.e

    def as_dict(self) -> dict:
        out = asdict(self)
        out.update({f"cert_{c}": getattr(self, c) for c in "abcdef"})
        return out


@dataclass
class AtomisationResult:
    pieces: list[AtomPiece]
    source_square: Rect
    N: int
    source: PlanarMeasure
    certificates: CertificateReport | None = None
    cuts: int = 0

    def centres(self) -> np.ndarray:
        return np.array([p.centre.z for p in self.pieces])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            ["j", "cx", "cy", "mass", "sup_xmin", "sup_xmax", "sup_ymin", "sup_ymax",
             "box_xmin", "box_xmax", "box_ymin", "box_ymax", "aspect", "degenerate"]
        )
        for p in self.pieces:
            c = p.container
            aspect = "" if c.is_degenerate else f"{c.aspect():.12g}"
            w.writerow(
                [p.index, f"{p.centre.x:.17g}", f"{p.centre.y:.17g}", f"{p.mass:.17g}"]
                + [f"{v:.17g}" for v in p.support.as_list()]
                + [f"{v:.17g}" for v in c.as_list()]
                + [aspect, int(c.is_degenerate)]
            )
        return buf.getvalue()

    def summary(self) -> dict:
        cert = self.certificates or verify_certificates(self)
        return {
            "N": self.N,
            "square": self.source_square.as_list(),
            "cuts": self.cuts,
            "certificates": cert.as_dict(),
        }


# -- public operations -------------------------------------------------------------------------


def _integer_mass(mass: float) -> int:
    n = round(mass)
    if abs(mass - n) > MASS_TOL * max(1.0, abs(mass)):
        raise NonIntegerMass(f"total mass {mass!r} is not an integer")
    return int(n)


def _source_atoms(mu: PlanarMeasure) -> np.ndarray:
    a = np.asarray(mu.atoms)
    return np.column_stack([a, np.arange(len(a), dtype=float)]) if len(a) else np.zeros((0, 4))


def recursive_cut(mu: PlanarMeasure, container: Rect, N: int | None = None, split_atoms: bool = True) -> Cut:
    """One balancing cut of ``mu`` restricted to ``container``."""
    N = _integer_mass(mass_on(mu, container)) if N is None else int(N)
    if N < 2:
        raise ValueError("a cut needs integer mass at least 2")
    inside = container.contains(mu.atoms[:, 0], mu.atoms[:, 1]) if len(mu.atoms) else np.zeros(0, bool)
    atoms = _source_atoms(mu)[inside]
    sp = SubProblem(container, atoms, N, mu.density)
    left, right, axis, coord, split = _cut(sp, split_atoms)
    lc = grow_container(left.support() or left.tile, left.tile, container)
    rc = grow_container(right.support() or right.tile, right.tile, container)
    return Cut(axis, coord, left, right, split, lc, rc)


def atomise(mu: PlanarMeasure, square: Rect, split_atoms: bool = True, verify: bool = True) -> AtomisationResult:
    """Decompose ``mu`` (integer mass, supported in ``square``) into unit-mass pieces."""
    if abs(square.width - square.height) > 1e-12 * max(square.width, square.height):
        raise ValueError("atomisation needs a square")
    total = mass_on(mu, square)
    if abs(total - mu.total) > MASS_TOL * max(1.0, mu.total):
        raise ValueError("the square must contain the support of the measure")
    N = _integer_mass(total)
    if N == 0:
        raise EmptyMeasure("measure has zero mass")

    stripped, carried = split_atom_integer_parts(mu)
    mass = mu.atom_mass
    # source indices: carried units follow atom order, as do atoms with a fractional remainder
    int_idx = [i for i, m in enumerate(mass) if m >= 1.0]
    frac_idx = [i for i, m in enumerate(mass) if m - math.floor(m) > 0]
    frac = np.column_stack([stripped.atoms, np.array(frac_idx, dtype=float)]) if frac_idx else np.zeros((0, 4))

    leaves: list[tuple[Rect, Rect, np.ndarray]] = []  # (tile, container, atoms)
    for i, (p, k) in zip(int_idx, carried):
        pt = Rect(p.x, p.x, p.y, p.y)
        leaves += [(pt, pt, np.array([[p.x, p.y, 1.0, float(i)]]))] * k

    rest = N - sum(k for _, k in carried)
    cuts = 0
    if rest > 0:
        root = SubProblem(square, frac, rest, mu.density)
        if rest == 1 and not carried:
            leaves.append((square, square, frac))
        else:
            stack = [root]
            out = []
            while stack:
                sp = stack.pop()
                if sp.N == 1:
                    out.append(sp)
                    continue
                left, right, _, _, _ = _cut(sp, split_atoms)
                cuts += 1
                stack.append(right)
                stack.append(left)
            sups = [sp.support() or sp.tile for sp in out]
            boxes = _settle_containers(sups, [sp.tile for sp in out], square)
            leaves.extend((sp.tile, box, sp.atoms) for sp, box in zip(out, boxes))

    pieces = []
    for j, (tile, box, atoms) in enumerate(leaves):
        sp = SubProblem(tile, atoms, 1, mu.density)
        sup = sp.support() or tile
        pieces.append(AtomPiece(j, box, sup, tile, atoms, mu.density))
    result = AtomisationResult(pieces, square, N, mu, cuts=cuts)
    if verify:
        result.certificates = verify_certificates(result)
    return result


def _max_multiplicity(boxes: list[Rect]) -> int:
    if not boxes:
        return 0
    xs = np.unique(np.concatenate([[b.x_min, b.x_max] for b in boxes]))
    ys = np.unique(np.concatenate([[b.y_min, b.y_max] for b in boxes]))
    diff = np.zeros((len(ys) + 1, len(xs) + 1), dtype=np.int64)
    for b in boxes:
        i0, i1 = np.searchsorted(xs, b.x_min), np.searchsorted(xs, b.x_max)
        j0, j1 = np.searchsorted(ys, b.y_min), np.searchsorted(ys, b.y_max)
        diff[j0, i0] += 1
        diff[j0, i1] -= 1
        diff[j1, i0] -= 1
        diff[j1, i1] += 1
    return int(diff.cumsum(axis=0).cumsum(axis=1).max())


def verify_certificates(result: AtomisationResult) -> CertificateReport:
    """Measure every certificate on ``result``; nothing is assumed from the construction."""
    pieces = result.pieces
    mu = result.source
    masses = np.array([p.mass for p in pieces])
    mass_dev = float(np.max(np.abs(masses - 1.0))) if len(pieces) else math.inf
    mass_ok = len(pieces) == result.N and mass_dev <= MASS_TOL

    scale = max(1.0, mu.total)
    dec_dev = 0.0
    grid = mu.density
    if grid is not None:
        acc = np.zeros_like(grid.cells)
        for p in pieces:
            acc += p.density_cells()
        dec_dev = float(np.max(np.abs(acc - grid.cells)))
    if len(mu.atoms):
        got = np.zeros(len(mu.atoms))
        for p in pieces:
            for row in p.atoms:
                got[int(row[3])] += row[2]
        dec_dev = max(dec_dev, float(np.max(np.abs(got - mu.atom_mass))))
    dec_ok = dec_dev <= MASS_TOL * scale

    # (b) supports cover the support of mu; containers contain supports
    deficit = 0.0
    if grid is not None:
        xe, ye = grid.x_edges, grid.y_edges
        covered = np.zeros_like(grid.cells)
        for p in pieces:
            s = p.support
            if s.is_degenerate:
                continue
            fx = np.clip(np.minimum(xe[1:], s.x_max) - np.maximum(xe[:-1], s.x_min), 0, None) / grid.hx
            fy = np.clip(np.minimum(ye[1:], s.y_max) - np.maximum(ye[:-1], s.y_min), 0, None) / grid.hy
            covered += fy[:, None] * fx[None, :]
        pos = grid.cells > 0
        if pos.any():
            deficit = float(np.max(np.clip(1.0 - covered[pos], 0, None)))
    for x, y, _ in mu.atoms:
        if not any(p.support.contains(x, y) for p in pieces):
            deficit = max(deficit, 1.0)
    cover_ok = deficit <= 1e-9
    contain_ok = all(p.container.contains_rect(p.support) for p in pieces)

    # (c) support interiors pairwise disjoint
    S = np.array([p.support.as_list() for p in pieces])
    disjoint_ok = True
    if len(S) > 1:
        for i in range(len(S) - 1):
            ow = np.minimum(S[i, 1], S[i + 1 :, 1]) - np.maximum(S[i, 0], S[i + 1 :, 0])
            oh = np.minimum(S[i, 3], S[i + 1 :, 3]) - np.maximum(S[i, 2], S[i + 1 :, 2])
            if np.any((ow > 0) & (oh > 0)):
                disjoint_ok = False
                break

    boxes = [p.container for p in pieces if not p.container.is_degenerate]
    aspect_ok = all(b.is_almost_square() for b in boxes)
    worst = max((max(b.aspect(), 1.0 / b.aspect()) for b in boxes), default=1.0)
    mult = _max_multiplicity(boxes)

    C = result.centres()
    d_min = math.inf
    if len(C) > 1:
        for i in range(len(C) - 1):
            d_min = min(d_min, float(np.min(np.abs(C[i + 1 :] - C[i]))))
    side = result.source_square.width
    sep = d_min * result.N**2 / side if math.isfinite(d_min) else math.inf
    return CertificateReport(
        mass_ok, mass_dev, dec_ok, dec_dev, cover_ok, deficit, contain_ok, disjoint_ok,
        aspect_ok, worst, mult <= 4, mult, d_min, sep, d_min == 0.0,
    )
