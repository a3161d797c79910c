"""Weighted Bergman spaces on discs and the regularisations built from their kernels.

For a weight ``phi`` on a disc ``Omega`` and an integer ``m`` the space is
``{f holomorphic : int_Omega |f|^2 exp(-2 m phi) < inf}``.  Monomials about the
disc centre span a dense subspace; the basis is truncated at degree ``d``.

Kernel sums with jets::

    S_p(z) = sum_j sum_{a <= p} c_a |D^a sigma_j(z)|^2,     c_a = 1 or 1/(a!)^2

``log S_p / (2m)`` is the regularised weight.  All magnitudes are carried in log
space: at ``m`` in the thousands the norms are far outside floating range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg as sla
from scipy.special import gammaln, logsumexp

from .errors import ConfigError, IllConditioned
from .ideals import ideal_order
from .measure import DensityGrid, Disc, PlanarMeasure, Rect
from .potential import SubharmonicWeight
from .quad import disc_rule, integrate_radial, log_radial_moment

MAX_COND = 1e8


# -- weights -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialWeight:
    """``phi(z) = const + nu log r + a r^2 + Z(r)`` with ``r = |z - centre|``.

    ``Z(r) = -s sqrt(-log r)`` has zero Lelong number but is unbounded below at
    the centre; with ``core > 0`` it is replaced inside ``D(centre, core)`` by the
    potential of a uniform disc carrying the same Riesz mass, which keeps the
    density bounded.
    """

    nu: float = 0.0
    a: float = 0.0
    s: float = 0.0
    core: float = 0.0
    const: float = 0.0
    centre: complex = 0j

    def __post_init__(self):
        if self.nu < 0 or self.a < 0 or self.s < 0 or self.core < 0:
            raise ConfigError("radial weight parameters must be nonnegative")
        if self.s > 0 and not self.core < 1:
            raise ConfigError("core radius must be below 1")
        object.__setattr__(self, "centre", complex(self.centre))

    @property
    def lelong_at_centre(self) -> float:
        return self.nu

    def _z_part(self, r: np.ndarray) -> np.ndarray:
        if self.s == 0:
            return np.zeros_like(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -self.s * np.sqrt(-np.log(r))
        if self.core > 0:
            c = self.core
            t = -math.log(c)
            zc = -self.s * math.sqrt(t)
            mc = 0.5 * self.s / math.sqrt(t)
            out = np.where(r < c, zc + 0.5 * mc * (r * r / (c * c) - 1.0), out)
        return out

    def smooth_part_logr(self, lr) -> np.ndarray:
        """``smooth_part_r`` as a function of ``log r``."""
        lr = np.asarray(lr, dtype=float)
        with np.errstate(under="ignore"):
            r2 = np.exp(2.0 * lr)
        out = self.const + self.a * r2
        if self.s == 0:
            return out + 0.0 * lr
        z = -self.s * np.sqrt(np.maximum(-lr, 0.0))
        if self.core > 0:
            z = np.where(lr < math.log(self.core), self._z_part(np.sqrt(r2)), z)
        return out + z

    def smooth_part_r(self, r) -> np.ndarray:
        """Everything except ``nu log r``."""
        r = np.asarray(r, dtype=float)
        return self.const + self.a * r * r + self._z_part(r)

    def phi_r(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            pole = self.nu * np.log(r) if self.nu else 0.0
        return self.smooth_part_r(r) + pole

    def __call__(self, z) -> np.ndarray:
        return self.phi_r(np.abs(np.asarray(z, dtype=complex) - self.centre))

    def riesz_mass(self, r: float) -> float:
        """Riesz mass of ``D(centre, r)``, which equals ``r phi'(r)``."""
        out = self.nu + 2.0 * self.a * r * r
        if self.s > 0:
            if self.core > 0 and r < self.core:
                out += 0.5 * self.s / math.sqrt(-math.log(self.core)) * (r / self.core) ** 2
            elif r > 0:
                out += 0.5 * self.s / math.sqrt(-math.log(r))
        return out

    def riesz_density(self, r) -> np.ndarray:
        """Area density of the Riesz measure ``Delta phi / (2 pi)`` away from the centre."""
        r = np.asarray(r, dtype=float)
        out = np.full(r.shape, 4.0 * self.a / (2.0 * math.pi))
        if self.s > 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                t = -np.log(r)
                z = self.s / (8.0 * math.pi * r * r * t**1.5)
            if self.core > 0:
                c = self.core
                inner = 0.5 * self.s / math.sqrt(-math.log(c)) / (math.pi * c * c)
                z = np.where(r < c, inner, z)
            out = out + z
        return out

    def singular_points(self):
        return [(self.centre, self.nu)] if self.nu > 0 else []

    def is_flat(self) -> bool:
        return self.a == 0 and self.s == 0

    def to_dict(self) -> dict:
        return {"kind": "radial", "nu": self.nu, "a": self.a, "s": self.s, "core": self.core,
                "const": self.const, "centre": [self.centre.real, self.centre.imag]}


def radial_riesz_measure(w: RadialWeight, rect: Rect, n: int, sub: int = 8) -> PlanarMeasure:
    """Riesz measure of ``w`` on ``rect`` as an ``n x n`` density grid plus the central atom.

    Cell masses come from a ``sub x sub`` midpoint rule on the density.
    """
    xs = np.linspace(rect.x_min, rect.x_max, n * sub + 1)
    ys = np.linspace(rect.y_min, rect.y_max, n * sub + 1)
    xm, ym = 0.5 * (xs[1:] + xs[:-1]), 0.5 * (ys[1:] + ys[:-1])
    X, Y = np.meshgrid(xm, ym)
    rho = w.riesz_density(np.abs(X + 1j * Y - w.centre)) * (xs[1] - xs[0]) * (ys[1] - ys[0])
    cells = rho.reshape(n, sub, n, sub).sum(axis=(1, 3))
    atoms = [(w.centre.real, w.centre.imag, w.nu)] if w.nu > 0 else []
    return PlanarMeasure.build(atoms, DensityGrid(rect, cells), rect)


@dataclass(frozen=True)
class MeasureWeight:
    """Adapter evaluating a :class:`SubharmonicWeight` anywhere in the plane."""

    weight: SubharmonicWeight

    def __call__(self, z) -> np.ndarray:
        return np.asarray(self.weight(np.asarray(z, dtype=complex)), dtype=float)

    def singular_points(self):
        out: dict[complex, float] = {}
        for x, y, mass in self.weight.riesz.atoms:
            out[complex(x, y)] = out.get(complex(x, y), 0.0) + float(mass)
        return sorted(out.items(), key=lambda kv: (kv[0].real, kv[0].imag))


def weight_from_dict(doc: dict):
    if not isinstance(doc, dict):
        raise ConfigError("bergman weight must be a mapping")
    kind = doc.get("kind", "radial")
    if kind == "radial":
        try:
            c = doc.get("centre", [0.0, 0.0])
            return RadialWeight(
                float(doc.get("nu", 0.0)), float(doc.get("a", 0.0)), float(doc.get("s", 0.0)),
                float(doc.get("core", 0.0)), float(doc.get("const", 0.0)), complex(float(c[0]), float(c[1])),
            )
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"invalid radial weight: {exc}") from exc
    if kind == "measure":
        return MeasureWeight(SubharmonicWeight.from_dict(doc))
    raise ConfigError(f"unknown bergman weight kind {kind!r}")


# -- radial norms ------------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _radial_log_norm(w: RadialWeight, m: int, R: float, k: int) -> float:
    """``log int_{D(0,R)} |z|^{2k} exp(-2 m phi)``."""
    p = 2.0 * k + 2.0 - 2.0 * m * w.nu
    if p <= 0:
        return math.inf
    if w.is_flat():
        return math.log(2.0 * math.pi / p) + p * math.log(R) - 2.0 * m * w.const
    return log_radial_moment(lambda lt: -2.0 * m * w.smooth_part_logr(lt), 2.0 * k - 2.0 * m * w.nu, R, log_arg=True)


def radial_norm_by_quadrature(w: RadialWeight, m: int, R: float, k: int) -> float:
    """Independent check of ``||z^k||^2`` by plain adaptive quadrature (moderate sizes only)."""
    val, _ = integrate_radial(lambda t: t ** (2 * k) * math.exp(-2.0 * m * float(w.phi_r(t))), R)
    return val


# -- the basis ---------------------------------------------------------------------------------


@dataclass
class BergmanBasis:
    weight: object
    m: int
    domain: Disc
    orders: np.ndarray  # admissible monomial orders in the basis, ascending
    excluded_orders: list
    radial: bool
    log_norms: np.ndarray  # log ||(z-c)^k||^2 for the orders
    chol: np.ndarray | None = None  # lower factor of the conjugated Jacobi-scaled Gram
    cond: float = 1.0
    quad_rule: tuple | None = field(default=None, repr=False)

    @property
    def degree_cap(self) -> int:
        return int(self.orders[-1]) if len(self.orders) else -1

    @property
    def k_min(self) -> int:
        return int(self.orders[0])

    def _log_monomial_terms(self, z: np.ndarray, alpha: int):
        """log|D^a (z-c)^k / ||(z-c)^k|| | and the phases, for every order k."""
        k = self.orders.astype(float)
        d = z[:, None] - self.domain.centre
        live = k >= alpha
        power = np.where(live, k - alpha, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            lr = np.log(np.abs(d))
            coef = gammaln(k + 1) - gammaln(np.where(live, k - alpha, 0.0) + 1) - 0.5 * self.log_norms
            lg = coef[None, :] + np.where(power[None, :] == 0, 0.0, power[None, :] * lr)
        lg = np.where(live[None, :], lg, -np.inf)
        phase = np.exp(1j * power[None, :] * np.angle(d))
        return lg, phase

    def jet_features(self, z, p: int, factorial: bool):
        """Per-point scaled values of ``c_a D^a sigma_j`` for ``a = 0..p+1`` and the log scale.

        Returns ``(F, shift)`` with ``F[a]`` of shape (points, basis size); true values
        are ``F * exp(shift)``.  Order ``p + 1`` is included for Laplacians.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        logs, phases = [], []
        for a in range(p + 2):
            lg, ph = self._log_monomial_terms(z, a)
            if factorial:
                lg = lg - gammaln(a + 1)
            logs.append(lg)
            phases.append(ph)
        shift = np.max(np.stack([lg.max(axis=1) for lg in logs[: p + 1]]), axis=0)
        shift = np.where(np.isfinite(shift), shift, 0.0)
        F = []
        for lg, ph in zip(logs, phases):
            with np.errstate(over="ignore"):
                v = np.exp(np.minimum(lg - shift[:, None], 700.0)) * ph
            if self.chol is not None:
                v = sla.solve_triangular(self.chol, v.T, lower=True).T
            F.append(v)
        return F, shift

    def log_kernel(self, z, p: int = 0, factorial: bool = False) -> np.ndarray:
        """``log S_p(z)``."""
        F, shift = self.jet_features(z, p, factorial)
        tot = sum(np.sum(np.abs(F[a]) ** 2, axis=1) for a in range(p + 1))
        with np.errstate(divide="ignore"):
            return np.log(tot) + 2.0 * shift

    def laplacian_log_kernel(self, z, p: int = 0, factorial: bool = False) -> np.ndarray:
        """``Delta log S_p`` by the Lagrange identity ``4 (S |F'|^2 - |<F', F>|^2) / S^2``."""
        F, _ = self.jet_features(z, p, factorial)
        f = np.concatenate([F[a] for a in range(p + 1)], axis=1)
        if factorial:
            # c_a D^{a+1} sigma = (a + 1) c_{a+1} D^{a+1} sigma
            fp = np.concatenate([(a + 1) * F[a + 1] for a in range(p + 1)], axis=1)
        else:
            fp = np.concatenate([F[a + 1] for a in range(p + 1)], axis=1)
        S = np.sum(np.abs(f) ** 2, axis=1)
        Sp = np.sum(np.abs(fp) ** 2, axis=1)
        cross = np.abs(np.sum(fp * np.conj(f), axis=1)) ** 2
        return 4.0 * np.maximum(S * Sp - cross, 0.0) / (S * S)

    def gram_check(self, finer: tuple | None = None) -> float:
        """Max deviation from the identity of the basis Gram matrix under an independent rule."""
        if self.radial:
            w = self.weight
            dev = 0.0
            for k, ln in zip(self.orders, self.log_norms):
                if k > 40 or self.m * max(1.0, abs(float(w.phi_r(self.domain.r)))) > 200:
                    ref = log_radial_moment(
                        lambda t: -2.0 * self.m * w.smooth_part_r(t), 2.0 * k - 2.0 * self.m * w.nu,
                        self.domain.r, tol=1e-13,
                    )
                    dev = max(dev, abs(math.expm1(ref - ln)))
                else:
                    ref = radial_norm_by_quadrature(w, self.m, self.domain.r, int(k))
                    dev = max(dev, abs(ref * math.exp(-ln) - 1.0))
            return dev
        n_t, n_theta = finer or (48, 192)
        A = _scaled_design(self.weight, self.m, self.domain, self.orders, self.log_norms, n_t, n_theta)
        G = np.conj(A.conj().T @ A)
        Li = sla.solve_triangular(self.chol, np.eye(len(self.orders)), lower=True)
        M = Li @ G @ Li.conj().T
        return float(np.max(np.abs(M - np.eye(len(self.orders)))))


def _is_radial_about(w, domain: Disc) -> bool:
    return isinstance(w, RadialWeight) and abs(w.centre - domain.centre) <= 1e-15 * max(1.0, abs(domain.centre))


def _central_pole(w, domain: Disc) -> float:
    """Lelong number of the weight at the disc centre; off-centre poles must stay integrable."""
    nu_c = 0.0
    for p, nu in w.singular_points():
        if abs(p - domain.centre) <= 1e-15 * max(1.0, abs(p)):
            nu_c += nu
    return nu_c


def _check_off_centre(w, m: int, domain: Disc):
    for p, nu in w.singular_points():
        if abs(p - domain.centre) <= 1e-15 * max(1.0, abs(p)):
            continue
        if abs(p - domain.centre) < domain.r and m * nu >= 1.0:
            raise ConfigError(
                f"pole at {p} with m*nu = {m * nu:g} >= 1 away from the disc centre is not supported"
            )


def _quad_points(w, m: int, domain: Disc, k_min: int, n_t: int, n_theta: int):
    sing = []
    for p, nu in w.singular_points():
        if abs(p - domain.centre) >= domain.r:
            continue
        if abs(p - domain.centre) <= 1e-15 * max(1.0, abs(p)):
            s = m * nu - k_min
        else:
            s = m * nu
        if s > 1e-14:
            sing.append((p, s))
    z, wq = disc_rule(domain, sing, n_t=n_t, n_theta=n_theta)
    with np.errstate(divide="ignore"):
        lw = np.log(wq) - 2.0 * m * np.asarray(w(z), dtype=float)
    return z, lw


def _scaled_design(w, m, domain, orders, log_norms, n_t, n_theta):
    z, lw = _quad_points(w, m, domain, int(orders[0]), n_t, n_theta)
    d = z - domain.centre
    with np.errstate(divide="ignore"):
        lr = np.log(np.abs(d))
    k = orders.astype(float)
    lg = 0.5 * lw[:, None] + k[None, :] * lr[:, None] - 0.5 * log_norms[None, :]
    A = np.exp(lg) * np.exp(1j * k[None, :] * np.angle(d)[:, None])
    return np.where(np.isfinite(lg), A, 0.0)


def _nonradial_log_diag(w, m, domain, orders, n_t, n_theta):
    z, lw = _quad_points(w, m, domain, int(orders[0]), n_t, n_theta)
    with np.errstate(divide="ignore"):
        lr = np.log(np.abs(z - domain.centre))
    k = orders.astype(float)
    return logsumexp(lw[:, None] + 2.0 * k[None, :] * lr[:, None], axis=0)


def _lowest_order(w, m: int, domain: Disc) -> int:
    if _is_radial_about(w, domain):
        nu_c = w.nu
    else:
        _check_off_centre(w, m, domain)
        nu_c = _central_pole(w, domain)
    return ideal_order(nu_c, m) if nu_c > 0 else 0


def _fixed_basis(w, m: int, domain: Disc, d: int, n_t: int, n_theta: int, gram: bool = False) -> BergmanBasis:
    radial = _is_radial_about(w, domain) and not gram
    k0 = _lowest_order(w, m, domain)
    excluded = list(range(k0))
    orders = np.arange(k0, max(d, k0) + 1)
    if radial:
        ln = np.array([_radial_log_norm(w, m, float(domain.r), int(k)) for k in orders])
        return BergmanBasis(w, m, domain, orders, excluded, True, ln)
    ln = _nonradial_log_diag(w, m, domain, orders, n_t, n_theta)
    A = _scaled_design(w, m, domain, orders, ln, n_t, n_theta)
    G = np.conj(A.conj().T @ A)
    ev = np.linalg.eigvalsh(G)
    cond = float(ev[-1] / ev[0]) if ev[0] > 0 else math.inf
    if not cond <= MAX_COND:
        raise IllConditioned(f"Gram matrix up to degree {d} has condition {cond:.3g} (> 1e8)")
    L = np.linalg.cholesky(G)
    return BergmanBasis(w, m, domain, orders, excluded, False, ln, L, cond)


def default_probe_points(domain: Disc, frac: float = 0.75, n: int = 24) -> np.ndarray:
    ang = 2.0 * math.pi * (np.arange(n) + 0.25) / n
    rad = np.array([0.0, 0.5 * frac, frac]) * domain.r
    return (domain.centre + rad[:, None] * np.exp(1j * ang)[None, :]).ravel()


def build_basis(
    w,
    m: int,
    domain: Disc,
    d: int | None = None,
    probe=None,
    p: int = 0,
    tol: float = 1e-8,
    d_max: int | None = None,
    n_t: int = 32,
    n_theta: int = 128,
    method: str = "auto",
) -> BergmanBasis:
    """Orthonormal system of ``H(m phi)`` on ``domain``.

    With ``d`` given the degree cap is fixed; otherwise it grows until one more band
    of monomials moves ``log S_p / (2m)`` by less than ``tol`` on ``probe``.
    Raises :class:`IllConditioned` when a non-radial Gram matrix loses more than
    eight digits before that happens.  ``method="gram"`` assembles the Gram matrix
    by 2-D quadrature even for weights radial about the disc centre.
    """
    if method not in ("auto", "gram"):
        raise ValueError(f"unknown method {method!r}")
    gram = method == "gram"
    if m < 1:
        raise ValueError("m must be a positive integer")
    if isinstance(w, SubharmonicWeight):
        w = MeasureWeight(w)
    if d is not None:
        if d < 0:
            raise ValueError("degree cap must be nonnegative")
        return _fixed_basis(w, m, domain, d, n_t, n_theta, gram)
    radial = _is_radial_about(w, domain) and not gram
    probe = default_probe_points(domain) if probe is None else np.asarray(probe, dtype=complex)
    d_max = d_max if d_max is not None else (40000 if radial else 160)
    band = 8 if radial else 4
    d = _lowest_order(w, m, domain) + 8
    prev = None
    while d <= d_max:
        basis = _fixed_basis(w, m, domain, d, n_t, n_theta, gram)  # radial norms are cached per order
        cur = basis.log_kernel(probe, p) / (2.0 * m)
        if prev is not None:
            with np.errstate(invalid="ignore"):
                diff = np.where(np.isfinite(cur) | np.isfinite(prev), np.abs(cur - prev), 0.0)
            if float(np.nanmax(diff)) < tol:
                return basis
        prev = cur
        if radial:
            band = max(band, d // 4)
        d += band
    raise IllConditioned(f"kernel did not settle below degree {d_max}")


# -- regularised weights ------------------------------------------------------------------------


@dataclass
class RegularisedWeight:
    kind: str  # "demailly" or "jet_augmented"
    jet_order: int
    factorial: bool
    basis: BergmanBasis

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = self.basis.log_kernel(z.ravel(), self.jet_order, self.factorial) / (2.0 * self.basis.m)
        return out.reshape(z.shape)

    def laplacian(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = self.basis.laplacian_log_kernel(z.ravel(), self.jet_order, self.factorial) / (2.0 * self.basis.m)
        return out.reshape(z.shape)


def demailly_phi_m(basis: BergmanBasis) -> RegularisedWeight:
    return RegularisedWeight("demailly", 0, False, basis)


def jet_augmented_psi_m(basis: BergmanBasis, jet_order: int, factorial: bool = False) -> RegularisedWeight:
    """Kernel sum with derivatives up to ``jet_order``.

    ``factorial=False`` sums plain ``|D^a sigma|^2`` (first-order jets for the
    mass-controlled regularisation); ``factorial=True`` divides each derivative by
    ``a!`` (the jet variant with order ``floor(delta m)``).
    """
    if jet_order < 0:
        raise ValueError("jet order must be nonnegative")
    return RegularisedWeight("jet_augmented", jet_order, factorial, basis)


def jet_order_for_delta(m: int, delta: float) -> int:
    return int(math.floor(delta * m + 1e-12))


def lelong_at_centre(basis: BergmanBasis) -> float:
    """Lelong number of ``log S_0 / (2m)`` at the disc centre: lowest surviving order over m."""
    return basis.k_min / basis.m


def sub_mean_value_check(reg: RegularisedWeight, points, h: float, n: int = 64, tol: float = 1e-10) -> bool:
    pts = np.asarray(points, dtype=complex)
    ring = pts[:, None] + h * np.exp(2j * math.pi * np.arange(n) / n)[None, :]
    mean = reg(ring).mean(axis=1)
    centre = reg(pts)
    return bool(np.all(centre <= mean + tol * (1.0 + np.abs(mean))))


# -- sandwich ------------------------------------------------------------------------------------


def _sup_on_disc(w, z: np.ndarray, r: np.ndarray, n: int = 256) -> np.ndarray:
    if isinstance(w, RadialWeight):
        return w.phi_r(np.abs(z - w.centre) + r)
    ring = z[:, None] + r[:, None] * np.exp(2j * math.pi * np.arange(n) / n)[None, :]
    return np.asarray(w(ring)).max(axis=1)


@dataclass
class SandwichReport:
    ms: list
    C1: float
    C2: float
    lower_ok: list
    upper_ok: list
    lower_margin: list
    upper_margin: list

    @property
    def passed(self) -> bool:
        return all(self.lower_ok) and all(self.upper_ok)


def sandwich_points(domain: Disc, rng: np.random.Generator, n: int = 100, frac: float = 0.8):
    rad = domain.r * frac * np.sqrt(rng.uniform(0.0025, 1.0, n))
    z = domain.centre + rad * np.exp(2j * math.pi * rng.uniform(size=n))
    r = 0.5 * (domain.r - np.abs(z - domain.centre))
    return z, r


def sandwich_check(w, ms, domain: Disc, z, r, tol: float = 1e-10) -> SandwichReport:
    """``phi - C1/m <= phi_m <= sup_{D(z,r)} phi + log(C2/r)/m`` with constants fitted at the smallest m."""
    ms = sorted(ms)
    z = np.asarray(z, dtype=complex)
    r = np.asarray(r, dtype=float)
    phi = np.asarray(w(z), dtype=float)
    sup = _sup_on_disc(w, z, r)
    vals = {}
    for m in ms:
        b = build_basis(w, m, domain, probe=z)
        vals[m] = demailly_phi_m(b)(z)
    m0 = ms[0]
    fin = np.isfinite(phi)
    C1 = max(0.0, float(np.max(m0 * (phi[fin] - vals[m0][fin])))) if fin.any() else 0.0
    C2 = float(np.max(r * np.exp(m0 * (vals[m0] - sup))))
    lo_ok, up_ok, lo_m, up_m = [], [], [], []
    for m in ms:
        v = vals[m]
        lower = np.where(fin, v - (phi - C1 / m), np.inf)
        upper = sup + np.log(C2 / r) / m - v
        lo_m.append(float(lower.min()))
        up_m.append(float(upper.min()))
        lo_ok.append(bool(np.all(lower >= -tol * (1 + np.abs(v)))))
        up_ok.append(bool(np.all(upper >= -tol * (1 + np.abs(v)))))
    return SandwichReport(ms, C1, C2, lo_ok, up_ok, lo_m, up_m)


# -- mass growth ---------------------------------------------------------------------------------


@dataclass
class MassProbeRow:
    m: int
    sup_abs_psi: float
    mass: float
    mass_flux: float | None
    degree: int


@dataclass
class MassProbe:
    rows: list
    slope: float
    intercept: float
    max_rel_residual: float
    mass_constant: float
    mass_ok: bool

    @property
    def sup_trend_ok(self) -> bool:
        return self.slope >= 0 and self.max_rel_residual < 0.10


def _radial_flux_mass(reg: RegularisedWeight, rho: float, h: float = 1e-5) -> float:
    c = reg.basis.domain.centre
    v = reg(np.array([c + rho + h, c + rho - h]))
    return rho * float(v[0] - v[1]) / (2 * h)


def mass_growth_probe(w, ms, domain: Disc, B: Disc, jet_order: int = 1, n_grid: int = 24) -> MassProbe:
    """``sup_B |psi_m|`` and ``int_B dd^c psi_m`` over an m-grid, regressed on ``log m``."""
    ang = 2.0 * math.pi * (np.arange(n_grid) + 0.5) / n_grid
    rad = B.r * np.linspace(0.0, 1.0, n_grid // 2 + 1)
    grid = (B.centre + rad[:, None] * np.exp(1j * ang)[None, :]).ravel()
    zq, wq = disc_rule(B, (), n_t=24, n_theta=96)
    probe = np.concatenate([grid, zq[:: max(1, len(zq) // 200)]])
    rows = []
    for m in sorted(ms):
        b = build_basis(w, m, domain, probe=probe, p=jet_order)
        reg = jet_augmented_psi_m(b, jet_order)
        sup = float(np.max(np.abs(reg(grid))))
        mass = float(np.sum(wq * reg.laplacian(zq)) / (2.0 * math.pi))
        flux = _radial_flux_mass(reg, B.r) if b.radial and abs(B.centre - domain.centre) == 0 else None
        rows.append(MassProbeRow(m, sup, mass, flux, b.degree_cap))
    x = np.log([r.m for r in rows])
    y = np.array([r.sup_abs_psi for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    res = float(np.max(np.abs(y - fit) / np.abs(y)))
    C = rows[0].mass / math.log(rows[0].m)
    mass_ok = all(r.mass <= C * math.log(r.m) * (1 + 1e-9) for r in rows)
    return MassProbe(rows, float(slope), float(intercept), res, C, mass_ok)


# -- kernel comparison under restriction ---------------------------------------------------------------


def flat_disc_kernel(z, domain: Disc) -> np.ndarray:
    """Unweighted Bergman kernel on the diagonal: ``R^2 / (pi (R^2 - |z - c|^2)^2)``."""
    R2 = domain.r**2
    d2 = np.abs(np.asarray(z) - domain.centre) ** 2
    return R2 / (math.pi * (R2 - d2) ** 2)


@dataclass
class KernelComparison:
    m: int
    p: int
    n_points: int
    ok: bool
    min_ratio: float  # min over the grid of K_B / K_Omega
    max_ratio: float
    equal_domains: bool
    max_equal_dev: float


def comparison_grid(B0: Disc, n: int = 20) -> np.ndarray:
    h = B0.r / math.sqrt(2.0)
    t = np.linspace(-h, h, n)
    return (B0.centre + t[None, :] + 1j * t[:, None]).ravel()


def kernel_comparison(w, m: int, p: int, B0: Disc, B: Disc, Omega: Disc, n: int = 20, tol: float = 1e-10):
    """``K^(p)_Omega <= K^(p)_B`` on a grid in ``B0`` for nested discs ``B0 ⊂ B ⊂ Omega``."""
    for inner, outer in ((B0, B), (B, Omega)):
        if abs(inner.centre - outer.centre) + inner.r > outer.r * (1 + 1e-12):
            raise ConfigError("discs must be nested")
    z = comparison_grid(B0, n)
    bO = build_basis(w, m, Omega, probe=z, p=p)
    bB = build_basis(w, m, B, probe=z, p=p)
    lO = bO.log_kernel(z, p)
    lB = bB.log_kernel(z, p)
    diff = lB - lO
    equal = Omega == B
    ok = bool(np.all(diff >= -tol))
    return KernelComparison(
        m, p, len(z), ok, float(np.exp(diff.min())), float(np.exp(diff.max())), equal,
        float(np.max(np.abs(np.expm1(diff)))) if equal else math.nan,
    )
