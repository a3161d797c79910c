"""Subharmonic weights given by a Riesz measure plus the real part of a polynomial.

A weight is ``phi(z) = U(z) + Re g0(z)`` where ``U(z) = int log|z - w| dmu(w)``.
With the normalisation ``dd^c = (i/pi) d dbar`` the Riesz measure of ``log|z - a|``
is the unit point mass at ``a``, so atom masses are Lelong numbers.

Density cells are integrated in closed form: the logarithmic potential of a
uniform rectangle has an elementary antiderivative, applied at the grid vertices.
Integrals of the density over a disc (Jensen check) use polar rays about the
evaluation point with exact radial antiderivatives on each constant segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ZeroMass
from .measure import DensityGrid, Disc, PlanarMeasure, Point2, Rect, mass_on

def _as_complex(z) -> np.ndarray:
    if isinstance(z, Point2):
        return np.asarray(z.z)
    return np.asarray(z, dtype=complex)


def _rect_log_antiderivative(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """F with d^2F/du dv = log(u^2 + v^2) / 2, finite and continuous through the axes."""
    r2 = u * u + v * v
    with np.errstate(divide="ignore", invalid="ignore"):
        lg = np.where(r2 > 0, np.log(r2), 0.0)
        at_v = np.where(u != 0, np.arctan(v / np.where(u != 0, u, 1.0)), 0.0)
        at_u = np.where(v != 0, np.arctan(u / np.where(v != 0, v, 1.0)), 0.0)
    return 0.5 * (u * v * lg - 3.0 * u * v + u * u * at_v + v * v * at_u)


def density_potential(grid: DensityGrid, z: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Logarithmic potential of a piecewise-constant density at the points ``z``."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.empty(flat.shape, dtype=float)
    xe, ye = grid.x_edges, grid.y_edges
    rho = grid.cell_density
    for s in range(0, flat.size, chunk):
        zz = flat[s : s + chunk]
        u = xe[None, None, :] - zz.real[:, None, None]
        v = ye[None, :, None] - zz.imag[:, None, None]
        G = _rect_log_antiderivative(u, v)
        cell = G[:, 1:, 1:] - G[:, 1:, :-1] - G[:, :-1, 1:] + G[:, :-1, :-1]
        out[s : s + chunk] = np.einsum("pij,ij->p", cell, rho)
    return out.reshape(z.shape)


def atom_potential(atoms: np.ndarray, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if len(atoms) == 0:
        return np.zeros(z.shape)
    a = atoms[:, 0] + 1j * atoms[:, 1]
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z[..., None] - a)) @ atoms[:, 2]


def log_potential(mu: PlanarMeasure, z) -> np.ndarray:
    """``int log|z - w| dmu(w)``; ``-inf`` exactly at atoms."""
    z = _as_complex(z)
    val = atom_potential(mu.atoms, z)
    if mu.density is not None:
        val = val + density_potential(mu.density, z)
    return val


@dataclass(frozen=True)
class SubharmonicWeight:
    """``phi0 = U_mu + Re g0`` on ``domain``; ``g0`` coefficients are in powers of ``z - centre``."""

    riesz: PlanarMeasure
    g0: tuple = ()
    domain: Disc = field(default_factory=lambda: Disc(0.0, 0.0, 0.4))

    def __post_init__(self):
        if not 0.0 < self.domain.r < 0.5:
            raise ConfigError(f"disc radius must lie in (0, 1/2), got {self.domain.r}")
        object.__setattr__(self, "g0", tuple(complex(c) for c in self.g0))

    @property
    def centre(self) -> complex:
        return self.domain.centre

    def g0_holo(self, z) -> np.ndarray:
        z = _as_complex(z)
        out = np.zeros(z.shape, dtype=complex)
        for c in reversed(self.g0):
            out = out * (z - self.centre) + c
        return out

    def harmonic(self, z) -> np.ndarray:
        return self.g0_holo(z).real

    def potential(self, z) -> np.ndarray:
        return log_potential(self.riesz, z)

    def __call__(self, z) -> np.ndarray:
        return self.potential(z) + self.harmonic(z)

    def square(self) -> Rect:
        """The square ``P(x0, 2r)`` of side ``2r`` centred on the disc centre."""
        d = self.domain
        return Rect(d.cx - d.r, d.cx + d.r, d.cy - d.r, d.cy + d.r)

    def gamma_square(self) -> float:
        return mass_on(self.riesz, self.square())

    def gamma_disc(self) -> float:
        return mass_on(self.riesz, self.domain)

    def to_dict(self) -> dict:
        d = self.domain
        return {
            "measure": self.riesz.to_dict(),
            "g0_coeffs": [[c.real, c.imag] for c in self.g0],
            "disc": {"cx": d.cx, "cy": d.cy, "r": d.r},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SubharmonicWeight":
        if not isinstance(doc, dict):
            raise ConfigError("weight must be a mapping")
        try:
            mu = PlanarMeasure.from_dict(doc.get("measure") or {"atoms": []})
            coeffs = [complex(float(a), float(b)) for a, b in doc.get("g0_coeffs", []) or []]
            disc = doc["disc"]
            dom = Disc(float(disc["cx"]), float(disc["cy"]), float(disc["r"]))
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid weight document: {exc}") from exc
        return cls(mu, tuple(coeffs), dom)


def eval_weight(w: SubharmonicWeight, z):
    """Value of the weight at ``z`` (scalar or array); ``-inf`` at atoms."""
    val = w(z)
    return float(val) if np.ndim(val) == 0 else val


# -- disc-restricted density integrals by polar rays -------------------------------


def _ray_exit(z: complex, disc: Disc, theta: np.ndarray) -> np.ndarray:
    d = z - disc.centre
    b = (np.conj(d) * np.exp(1j * theta)).real
    disc_term = np.maximum(b * b + disc.r**2 - abs(d) ** 2, 0.0)
    return -b + np.sqrt(disc_term)


def _break_angles(grid: DensityGrid, disc: Disc, z: complex) -> np.ndarray:
    xe, ye = grid.x_edges, grid.y_edges
    X, Y = np.meshgrid(xe, ye)
    angs = [np.arctan2(Y - z.imag, X - z.real).ravel()]
    R = disc.r
    for x in xe:
        h = R * R - (x - disc.cx) ** 2
        if h >= 0:
            for sgn in (1.0, -1.0):
                angs.append(np.array([math.atan2(disc.cy + sgn * math.sqrt(h) - z.imag, x - z.real)]))
    for y in ye:
        h = R * R - (y - disc.cy) ** 2
        if h >= 0:
            for sgn in (1.0, -1.0):
                angs.append(np.array([math.atan2(y - z.imag, disc.cx + sgn * math.sqrt(h) - z.real)]))
    a = np.mod(np.concatenate(angs), 2 * math.pi)
    a = np.concatenate([a, [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi, 2 * math.pi]])
    a = np.unique(a)
    keep = np.concatenate([[True], np.diff(a) > 1e-13])
    return a[keep]


def _radial_antiderivative(kind: str, p: float = 0.0):
    if kind == "mass":
        return lambda t: 0.5 * t * t
    if kind == "log":
        def K(t):
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(t > 0, 0.5 * t * t * np.log(np.where(t > 0, t, 1.0)) - 0.25 * t * t, 0.0)
        return K
    if kind == "power":
        if p < 2.0:
            e = 2.0 - p
            return lambda t: t**e / e
        if p == 2.0:
            return np.log
        e = 2.0 - p
        return lambda t: t**e / e
    raise ValueError(kind)


def disc_density_integral(
    grid: DensityGrid, disc: Disc, z: complex, kind: str, p: float = 0.0, n_gauss: int = 12
) -> float:
    """``int_{disc} k(|w - z|) rho(w) dA(w)`` for kernels ``1`` (mass), ``log`` or ``|.|^(-p)`` (power).

    ``z`` must lie in the closed disc.  Each ray from ``z`` crosses the grid in
    constant-density segments integrated exactly; angles between consecutive
    kinks (rays through grid vertices, grid-line/circle intersections) use Gauss rules.
    """
    z = complex(z)
    K = _radial_antiderivative(kind, p)
    br = _break_angles(grid, disc, z)
    x, w = np.polynomial.legendre.leggauss(n_gauss)
    a0, a1 = br[:-1], br[1:]
    theta = (0.5 * (a0 + a1))[:, None] + (0.5 * (a1 - a0))[:, None] * x[None, :]
    wt = (0.5 * (a1 - a0))[:, None] * w[None, :]
    theta, wt = theta.ravel(), wt.ravel()
    L = _ray_exit(z, disc, theta)
    c, s = np.cos(theta), np.sin(theta)
    xe, ye = grid.x_edges, grid.y_edges
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = (xe[None, :] - z.real) / c[:, None]
        ty = (ye[None, :] - z.imag) / s[:, None]
    T = np.concatenate([np.zeros((theta.size, 1)), tx, ty, L[:, None]], axis=1)
    T = np.where(np.isfinite(T), T, 0.0)
    T = np.clip(T, 0.0, L[:, None])
    T.sort(axis=1)
    mid = 0.5 * (T[:, 1:] + T[:, :-1])
    mx = z.real + mid * c[:, None]
    my = z.imag + mid * s[:, None]
    ix = np.floor((mx - grid.rect.x_min) / grid.hx).astype(int)
    iy = np.floor((my - grid.rect.y_min) / grid.hy).astype(int)
    inside = (ix >= 0) & (ix < grid.nx) & (iy >= 0) & (iy < grid.ny)
    rho = np.where(inside, grid.cell_density[np.clip(iy, 0, grid.ny - 1), np.clip(ix, 0, grid.nx - 1)], 0.0)
    seg = T[:, 1:] > T[:, :-1]
    # t = 0 gives infinite kernels for p >= 2; those segments are either dropped or make the result inf
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        dK = K(T[:, 1:]) - K(T[:, :-1])
        contrib = np.where(seg & (rho > 0), rho * dK, 0.0)
    return float(wt @ contrib.sum(axis=1))


def restricted_potential(mu: PlanarMeasure, disc: Disc, z: complex) -> float:
    """Logarithmic potential at ``z`` of ``mu`` restricted to ``disc``."""
    val = 0.0
    if len(mu.atoms):
        inside = disc.contains(mu.atoms[:, 0], mu.atoms[:, 1])
        a = mu.atoms[inside]
        if len(a):
            with np.errstate(divide="ignore"):
                val += float(np.log(np.abs(z - (a[:, 0] + 1j * a[:, 1]))) @ a[:, 2])
    if mu.density is not None:
        val += disc_density_integral(mu.density, disc, z, "log")
    return val


@dataclass(frozen=True)
class JensenCheck:
    lhs: float
    rhs: float
    passed: bool
    gamma: float


def jensen_bound_check(w: SubharmonicWeight, z, rel_tol: float = 1e-6) -> JensenCheck:
    """Check ``exp(-2 U(z)) <= (1/gamma) int_D |w - z|^(-2 gamma) dmu(w)`` on the weight's disc.

    ``U`` is the potential of the Riesz measure restricted to the disc and
    ``gamma`` its mass there; for measures carried by the disc this is the
    weight minus its harmonic part.
    """
    z = complex(_as_complex(z))
    mu, D = w.riesz, w.domain
    gamma = mass_on(mu, D)
    if gamma <= 0.0:
        raise ZeroMass("the Riesz measure carries no mass on the disc")
    lhs = math.exp(-2.0 * restricted_potential(mu, D, z))
    rhs = 0.0
    if len(mu.atoms):
        inside = D.contains(mu.atoms[:, 0], mu.atoms[:, 1])
        a = mu.atoms[inside]
        if len(a):
            with np.errstate(divide="ignore"):
                rhs += float(np.abs(z - (a[:, 0] + 1j * a[:, 1])) ** (-2.0 * gamma) @ a[:, 2])
    if mu.density is not None:
        rhs += disc_density_integral(mu.density, D, z, "power", 2.0 * gamma)
    rhs /= gamma
    return JensenCheck(lhs, rhs, bool(lhs <= rhs * (1.0 + rel_tol)), gamma)
