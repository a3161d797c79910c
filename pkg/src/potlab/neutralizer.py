"""Pole neutralisation: a holomorphic ``f_m`` whose zeros cancel the mass of ``m phi0`` on a disc.

Pipeline for one ``m``:

1. strip atoms with ``m nu >= 1 - delta`` (a zero of order ``max(floor(m nu), 1)`` each);
2. restrict what is left to the square ``P`` of side ``2r`` and rescale it to integer mass ``N_m``;
3. atomise into ``N_m`` unit pieces and put a simple zero at each support centre;
4. integrate ``|f_m|^2 exp(-2 m phi0)`` over the disc.

The harmonic part cancels in that integrand, so it is computed as
``exp(2 L)`` with ``L = sum m_j log|z - a_j| - m U_mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .atomizer import AtomisationResult, atomise
from .errors import ConfigError, WindowEmpty
from .measure import Disc, PlanarMeasure, Point2, lelong_spectrum, restrict, scale
from .potential import SubharmonicWeight, log_potential
from .quad import integrate_disc

# tolerance for treating two zeros, or a zero and an atom, as the same point
_SAME_POINT = 1e-13


@dataclass(frozen=True)
class StrippedWeight:
    base: SubharmonicWeight
    m: int
    delta: float
    stripped_points: list  # [(Point2, m_j)]
    residual: PlanarMeasure  # Riesz measure of psi_m / m, restricted to the square P

    @property
    def gamma_residual(self) -> float:
        return self.residual.total


def _merged_atoms(mu: PlanarMeasure) -> list[tuple[Point2, float]]:
    return sorted(lelong_spectrum(mu).entries.items(), key=lambda kv: (kv[0].x, kv[0].y))


def strip(w: SubharmonicWeight, m: int, delta: float) -> StrippedWeight:
    """Remove the large point masses of ``m mu`` inside the square ``P``.

    An atom with ``m nu >= 1`` loses ``floor(m nu)/m``; one with ``1 - delta <= m nu < 1``
    gets a simple zero and is dropped from the residual altogether, since that zero
    already absorbs it.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    P = w.square()
    try:
        base = restrict(w.riesz, P)
    except ValueError as exc:
        raise ConfigError(f"density grid must not straddle the square P: {exc}") from exc

    points = []
    kept = []
    for p, nu in _merged_atoms(base):
        mnu = _snap(m * nu)
        if mnu >= 1.0 - delta:
            k = int(math.floor(mnu))
            points.append((p, max(k, 1)))
            rest = nu - k / m if k >= 1 else 0.0
        else:
            rest = nu
        if rest > 1e-15 * max(1.0, nu):
            kept.append((p.x, p.y, rest))
    residual = PlanarMeasure.build(kept, base.density, P)
    return StrippedWeight(w, m, delta, points, residual)


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else x


def choose_Nm(m: int, gamma: float, delta: float) -> int:
    """Smallest integer in ``(2 m gamma / (2 - delta), m gamma (1 + delta)]``."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not gamma > 0:
        raise WindowEmpty("gamma must be positive")
    feas = m * gamma * delta * (1.0 - delta) / (2.0 - delta)
    if not feas > 1.0:
        raise WindowEmpty(f"m*gamma*delta(1-delta)/(2-delta) = {feas:.6g} <= 1; increase m")
    lo = 2.0 * m * gamma / (2.0 - delta)
    hi = m * gamma * (1.0 + delta)
    n = math.floor(_snap(lo)) + 1
    if n > hi:
        raise WindowEmpty(f"no integer in ({lo}, {hi}]")
    return int(n)


# -- the holomorphic function and its integrand ---------------------------------------------


@dataclass(frozen=True)
class ZeroDivisor:
    """``f_m(z) = exp(m g0(z)) * prod (z - a_j)^{m_j}``."""

    points: np.ndarray  # complex
    mult: np.ndarray  # int
    m: int
    weight: SubharmonicWeight

    def log_abs(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            out = np.log(np.abs(z[..., None] - self.points)) @ self.mult.astype(float) if len(self.points) else 0.0
        return out + self.m * self.weight.harmonic(z)

    def value(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.exp(self.m * self.weight.g0_holo(z))
        for a, k in zip(self.points, self.mult):
            out = out * (z - a) ** int(k)
        return out

    def log_derivative(self, z) -> np.ndarray:
        """``f'/f``."""
        z = np.asarray(z, dtype=complex)
        w = self.weight
        dg = np.zeros(z.shape, dtype=complex)
        for k in range(len(w.g0) - 1, 0, -1):
            dg = dg * (z - w.centre) + k * w.g0[k]
        out = self.m * dg
        if len(self.points):
            out = out + (self.mult / (z[..., None] - self.points)).sum(axis=-1)
        return out

    def log_integrand(self, z) -> np.ndarray:
        """``log(|f_m|^2 exp(-2 m phi0)) / 2``."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            zs = np.log(np.abs(z[..., None] - self.points)) @ self.mult.astype(float) if len(self.points) else 0.0
        return zs - self.m * log_potential(self.weight.riesz, z)


def _merge_points(stripped: list, centres: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pts = [complex(p.x, p.y) for p, _ in stripped] + [complex(c) for c in centres]
    mult = [k for _, k in stripped] + [1] * len(centres)
    order = sorted(range(len(pts)), key=lambda i: (pts[i].real, pts[i].imag))
    out_p: list[complex] = []
    out_k: list[int] = []
    for i in order:
        if out_p and abs(pts[i] - out_p[-1]) <= _SAME_POINT * max(1.0, abs(pts[i])):
            out_k[-1] += mult[i]
        else:
            out_p.append(pts[i])
            out_k.append(mult[i])
    return np.array(out_p, dtype=complex), np.array(out_k, dtype=int)


def winding_count(div: ZeroDivisor, disc: Disc, max_nodes: int = 1 << 16) -> int:
    """Number of zeros of ``f_m`` in ``disc`` from the argument principle (trapezoid rule)."""
    prev = None
    n = 256
    while n <= max_nodes:
        t = 2.0 * math.pi * np.arange(n) / n
        e = np.exp(1j * t)
        z = disc.centre + disc.r * e
        val = (div.log_derivative(z) * (1j * disc.r * e)).sum() * (2.0 * math.pi / n) / (2j * math.pi)
        val = complex(val)
        if prev is not None and abs(val - prev) < 1e-8 and abs(val.real - round(val.real)) < 1e-6:
            return int(round(val.real))
        prev = val
        n *= 2
    raise RuntimeError("contour sum did not settle; the circle passes too close to a zero")


def zero_count_checks(div: ZeroDivisor, domain: Disc, rng: np.random.Generator, n_discs: int = 3) -> list[dict]:
    """Compare contour counts with the divisor on random subdiscs kept away from every zero."""
    out = []
    scale_ = domain.r
    while len(out) < n_discs:
        rad = domain.r * math.sqrt(rng.uniform()) * 0.7
        c = domain.centre + rad * complex(math.cos(a := 2 * math.pi * rng.uniform()), math.sin(a))
        r = rng.uniform(0.1, 1.0) * (domain.r - abs(c - domain.centre))
        if r <= 0:
            continue
        d = np.abs(np.abs(div.points - c) - r) if len(div.points) else np.array([np.inf])
        if d.min() < 1e-3 * scale_:
            continue
        sub = Disc(c.real, c.imag, r)
        expected = int(div.mult[np.abs(div.points - c) < r].sum()) if len(div.points) else 0
        got = winding_count(div, sub)
        out.append({"disc": [sub.cx, sub.cy, sub.r], "expected": expected, "counted": got, "ok": expected == got})
    return out


# -- the I_m integral -------------------------------------------------------------------------


def _singular_points(div: ZeroDivisor, mu: PlanarMeasure, disc: Disc, m: int) -> list[tuple[complex, float]]:
    sing = []
    for p, nu in _merged_atoms(mu):
        z = complex(p.x, p.y)
        if abs(z - disc.centre) >= disc.r:
            continue
        hit = np.abs(div.points - z) <= _SAME_POINT * max(1.0, abs(z)) if len(div.points) else np.zeros(0, bool)
        s = m * nu - float(div.mult[hit].sum())
        if abs(s) > 1e-12:
            sing.append((z, s))
    return sing


def integral_I_m(div: ZeroDivisor, tol: float = 1e-4, budget: int = 10_000_000) -> tuple[float, float, float]:
    """``I_m = int_D |f_m|^2 exp(-2 m phi0)``; returns ``(I_m, log I_m, error estimate)``."""
    w = div.weight
    disc = w.domain
    n = 48
    rr = disc.r * np.sqrt((np.arange(n) + 0.5) / n)
    th = 2 * math.pi * (np.arange(n) + 0.37) / n
    probe = disc.centre + (rr[:, None] * np.exp(1j * th[None, :])).ravel()
    lv = div.log_integrand(probe)
    lv = lv[np.isfinite(lv)]
    L_ref = float(lv.max()) if lv.size else 0.0

    def g(z):
        v = np.exp(2.0 * (div.log_integrand(z) - L_ref))
        return np.where(np.isfinite(v), v, 0.0)

    sing = _singular_points(div, w.riesz, disc, div.m)
    val, err = integrate_disc(g, disc, sing, tol=tol, budget=budget)
    log_I = 2.0 * L_ref + math.log(val) if val > 0 else -math.inf
    scale_ = math.exp(2.0 * L_ref) if 2.0 * L_ref < 700 else math.inf
    return val * scale_, log_I, err * scale_


# -- reports ----------------------------------------------------------------------------------


@dataclass
class NeutralisationReport:
    m: int
    delta: float
    gamma: float
    gamma_disc: float
    gamma_residual: float
    N_m: int
    points: np.ndarray
    multiplicities: np.ndarray
    n_stripped: int
    sum_mj: int
    bound_i: float
    bound_i_ok: bool
    min_separation_small_nu: float
    integral_I_m: float | None
    log_I_m: float | None
    I_m_error: float | None
    points_in_disc: bool
    zero_checks: list = field(default_factory=list)
    atomisation: AtomisationResult | None = None

    @property
    def I_m_over_m(self) -> float | None:
        return None if self.integral_I_m is None else self.integral_I_m / self.m

    def row(self) -> dict:
        return {
            "m": self.m,
            "N_m": self.N_m,
            "sum_mj": self.sum_mj,
            "bound_i_ok": self.bound_i_ok,
            "min_sep": self.min_separation_small_nu,
            "I_m": self.integral_I_m,
            "I_m_over_m": self.I_m_over_m,
        }


def _min_separation(points: np.ndarray) -> float:
    if len(points) < 2:
        return math.inf
    xy = np.column_stack([points.real, points.imag])
    d, _ = cKDTree(xy).query(xy, k=2)
    return float(d[:, 1].min())


def neutralise(
    w: SubharmonicWeight,
    m: int,
    delta: float,
    tol: float = 1e-4,
    with_integral: bool = True,
    zero_check_seed: int | None = 0,
) -> NeutralisationReport:
    sw = strip(w, m, delta)
    P = w.square()
    gamma = w.gamma_square()
    g_res = sw.gamma_residual
    centres = np.zeros(0, dtype=complex)
    N_m = 0
    res = None
    if g_res > 1e-14:
        N_m = choose_Nm(m, g_res, delta)
        res = atomise(scale(sw.residual, N_m / g_res), P)
        centres = res.centres()
    pts, mult = _merge_points(sw.stripped_points, centres)
    div = ZeroDivisor(pts, mult, m, w)

    sum_mj = int(mult.sum())
    bound = m * gamma * (1.0 + delta)
    lelong = dict(_merged_atoms(w.riesz))
    small = np.array(
        [lelong.get(Point2(p.real, p.imag), 0.0) < (1.0 - delta) / m for p in pts], dtype=bool
    ) if len(pts) else np.zeros(0, bool)
    dom = w.domain
    in_disc = bool(np.all(np.abs(pts - dom.centre) <= dom.r)) if len(pts) else True

    I = logI = err = None
    if with_integral:
        I, logI, err = integral_I_m(div, tol=tol)
    checks = []
    if zero_check_seed is not None:
        checks = zero_count_checks(div, dom, np.random.default_rng([zero_check_seed, m]))
    return NeutralisationReport(
        m=m,
        delta=delta,
        gamma=gamma,
        gamma_disc=w.gamma_disc(),
        gamma_residual=g_res,
        N_m=N_m,
        points=pts,
        multiplicities=mult,
        n_stripped=len(sw.stripped_points),
        sum_mj=sum_mj,
        bound_i=bound,
        bound_i_ok=sum_mj <= math.floor(_snap(bound)),
        min_separation_small_nu=_min_separation(pts[small]),
        integral_I_m=I,
        log_I_m=logI,
        I_m_error=err,
        points_in_disc=in_disc,
        zero_checks=checks,
        atomisation=res,
    )


def m_grid(a: int, b: int, kind: str = "geometric") -> list[int]:
    """Integers from ``a`` to ``b``: powers-of-two steps (``geometric``) or unit steps (``linear``)."""
    if a < 1 or b < a:
        raise ConfigError(f"bad m range {a}:{b}")
    if kind == "linear":
        return list(range(a, b + 1))
    if kind != "geometric":
        raise ConfigError(f"unknown m-grid kind {kind!r}")
    out = []
    m = a
    while m <= b:
        out.append(m)
        m *= 2
    return out


@dataclass
class GridAnalysis:
    ms: list
    separation_constant: float
    separation_ok: bool
    separation_ratios: list
    bound_i_ok: bool
    monotone_ok: bool
    decay_ratio: float
    decay_ok: bool
    uniform_constant: float
    uniform_ok: bool


def analyse_grid(reports: list[NeutralisationReport], jitter: float = 0.05) -> GridAnalysis:
    """Checks over an m-grid: integer mass bound, separation ``C/m^2``, and the shape of ``I_m``."""
    reps = sorted(reports, key=lambda r: r.m)
    ms = [r.m for r in reps]
    seps = [r.min_separation_small_nu for r in reps]
    C = seps[0] * ms[0] ** 2 if math.isfinite(seps[0]) else math.inf
    ratios = [s * m * m / C if math.isfinite(C) and C > 0 else math.inf for s, m in zip(seps, ms)]
    sep_ok = all(not math.isfinite(s) or s >= C / (m * m) * (1 - 1e-12) for s, m in zip(seps, ms))
    logI = [r.log_I_m for r in reps]
    have_I = all(v is not None for v in logI)
    mono = decay_ok = unif_ok = False
    decay = unif = math.nan
    if have_I:
        # log space: I_m leaves the double range near m = 1000 for diffuse measures
        lq = [v - math.log(m) for v, m in zip(logI, ms)]
        mono = all(lq[i + 1] <= lq[i] + math.log1p(jitter) for i in range(len(lq) - 1))
        decay = math.exp(lq[-1] - lq[0])
        decay_ok = lq[-1] - lq[0] < math.log(1e-2)
        half = max(1, len(logI) // 2)
        unif_log = max(logI[:half])
        unif = math.exp(unif_log)
        unif_ok = max(logI) <= math.log(2.0) + unif_log
    return GridAnalysis(
        ms, C, sep_ok, ratios, all(r.bound_i_ok for r in reps), mono, decay, decay_ok, unif, unif_ok
    )
