"""Adaptive quadrature on discs for integrands with registered point singularities.

Strategy: a smooth partition of unity splits the disc into small bumps around each
registered singular point ``p`` and a remainder.  The remainder is smooth and is
integrated by adaptive tensor Gauss rules in polar coordinates about the disc
centre.  Each bump is integrated in polar coordinates about ``p`` as a sequence of
geometric rings; ring contributions of an integrable singularity ``|z - p|^(-2s)``
with ``s < 1`` decay like ``2^(-(2 - 2s) k)``, so the tail is summed from the
observed ratio, and a ratio that does not fall below one is reported as divergence.

Integrands take a complex ndarray of points and return an array of shape ``(n,)``
or ``(n, k)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import special as _sp_special

from .errors import DivergenceDetected, QuadratureFailure
from .measure import Disc

Integrand = Callable[[np.ndarray], np.ndarray]

DEFAULT_BUDGET = 10_000_000

_N_LO, _N_HI = 6, 12
_GL_LO = np.polynomial.legendre.leggauss(_N_LO)
_GL_HI = np.polynomial.legendre.leggauss(_N_HI)


def _tensor_rule(nodes, weights):
    u, v = np.meshgrid(nodes, nodes, indexing="ij")
    w = np.outer(weights, weights)
    return u.ravel(), v.ravel(), w.ravel()


_RULE_LO = _tensor_rule(*_GL_LO)
_RULE_HI = _tensor_rule(*_GL_HI)


def smooth_step(v):
    """C-infinity step: 1 for v <= 0, 0 for v >= 1."""
    v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(v < 1.0, np.exp(-1.0 / np.maximum(1.0 - v, 1e-300)), 0.0)
        b = np.where(v > 0.0, np.exp(-1.0 / np.maximum(v, 1e-300)), 0.0)
        out = a / (a + b)
    return out


def bump(u):
    """Partition-of-unity bump in the scaled radius u = |z - p| / rho: 1 on [0, 1/2], 0 beyond 1."""
    return smooth_step(2.0 * np.asarray(u) - 1.0)


@dataclass
class _Cell:
    t0: float
    t1: float
    a0: float
    a1: float


def _eval_cells(g: Integrand, centre: complex, cells: Sequence[_Cell], shape_hint):
    """Low/high order tensor Gauss values for a batch of polar cells."""
    t0 = np.array([c.t0 for c in cells])
    t1 = np.array([c.t1 for c in cells])
    a0 = np.array([c.a0 for c in cells])
    a1 = np.array([c.a1 for c in cells])
    out = []
    for u, v, w in (_RULE_LO, _RULE_HI):
        tm, th = 0.5 * (t0 + t1), 0.5 * (t1 - t0)
        am, ah = 0.5 * (a0 + a1), 0.5 * (a1 - a0)
        t = tm[:, None] + th[:, None] * u[None, :]
        a = am[:, None] + ah[:, None] * v[None, :]
        z = centre + t * np.exp(1j * a)
        vals = np.asarray(g(z.ravel()))
        vals = vals.reshape(len(cells), u.size, *vals.shape[1:])
        jac = (th * ah)[:, None] * w[None, :] * t
        if vals.ndim == 3:
            q = np.einsum("cp,cpk->ck", jac, vals)
        else:
            q = np.einsum("cp,cp->c", jac, vals)
        out.append(q)
    lo, hi = out
    diff = np.abs(hi - lo)
    err = diff.max(axis=1) if diff.ndim == 2 else diff
    return hi, err, len(cells) * (_RULE_LO[0].size + _RULE_HI[0].size)


def adaptive_polar(
    g: Integrand,
    centre: complex,
    t0: float,
    t1: float,
    rel_tol: float,
    abs_tol: float = 0.0,
    budget: int = DEFAULT_BUDGET,
    n_theta: int = 8,
    n_t: int = 2,
    batch: int = 64,
):
    """Integrate ``g`` over the annulus ``t0 <= |z - centre| <= t1`` (area measure).

    Returns ``(value, error, evaluations)``; the error is the summed |high - low|
    order discrepancy of the final cells, a pessimistic bound for the high-order value.
    """
    ts = np.linspace(t0, t1, n_t + 1)
    angs = np.linspace(0.0, 2.0 * math.pi, n_theta + 1)
    cells = [_Cell(ts[i], ts[i + 1], angs[j], angs[j + 1]) for i in range(n_t) for j in range(n_theta)]
    vals, errs, evals = _eval_cells(g, centre, cells, None)
    heap = [(-float(e), i) for i, e in enumerate(errs)]
    heapq.heapify(heap)
    store = {i: (cells[i], vals[i], float(errs[i])) for i in range(len(cells))}
    next_id = len(cells)
    total = vals.sum(axis=0)
    total_err = float(errs.sum())

    def scale_of(tot):
        return float(np.max(np.abs(tot))) if np.ndim(tot) else abs(float(tot))

    while total_err > max(rel_tol * scale_of(total), abs_tol):
        if evals >= budget:
            raise QuadratureFailure(
                f"error target not met within {budget} evaluations "
                f"(value {scale_of(total):.6g}, error {total_err:.3g})"
            )
        picked = []
        while heap and len(picked) < batch:
            _, i = heapq.heappop(heap)
            picked.append(i)
        children = []
        for i in picked:
            c, v, e = store.pop(i)
            total = total - v
            total_err -= e
            tm, am = 0.5 * (c.t0 + c.t1), 0.5 * (c.a0 + c.a1)
            children += [
                _Cell(c.t0, tm, c.a0, am),
                _Cell(c.t0, tm, am, c.a1),
                _Cell(tm, c.t1, c.a0, am),
                _Cell(tm, c.t1, am, c.a1),
            ]
        cv, ce, n = _eval_cells(g, centre, children, None)
        evals += n
        for c, v, e in zip(children, cv, ce):
            store[next_id] = (c, v, float(e))
            heapq.heappush(heap, (-float(e), next_id))
            next_id += 1
            total = total + v
            total_err += float(e)
        # guard against drift of the running sums
        if next_id % 4096 < len(children):
            total = sum(v for _, v, _ in store.values())
            total_err = sum(e for _, _, e in store.values())
    return total, total_err, evals


def _bump_radii(points: Sequence[complex], centre: complex, R: float) -> list[float]:
    radii = []
    for i, p in enumerate(points):
        room = R - abs(p - centre)
        if room <= 1e-12 * R:
            radii.append(0.0)
            continue
        rho = room
        for j, q in enumerate(points):
            if j != i:
                d = abs(p - q)
                if d == 0.0:
                    raise ValueError("registered singularities must be distinct points")
                rho = min(rho, 0.45 * d)
        radii.append(rho)
    return radii


def _ring_series(
    f: Integrand,
    p: complex,
    rho: float,
    rel_tol: float,
    budget: int,
    max_rings: int = 400,
):
    """Integral of ``f`` over the disc D(p, rho/2) as a ring series with ratio tail."""
    value = None
    err = 0.0
    evals = 0
    prev = None
    prev_ratio = None
    stagnant = 0
    outer = rho / 2.0
    for k in range(max_rings):
        inner = outer / 2.0
        c, e, n = adaptive_polar(f, p, inner, outer, rel_tol / 20.0, budget=budget - evals, n_theta=8, n_t=1)
        evals += n
        c = np.asarray(c, dtype=float)
        value = c.copy() if value is None else value + c
        err += e
        outer = inner
        mag = np.abs(c)
        if prev is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(np.abs(prev) > 0, mag / np.abs(prev), 0.0)
            live = mag > 1e-300
            worst = float(np.max(np.where(live, ratio, 0.0))) if np.ndim(ratio) else float(ratio if live else 0.0)
            stagnant = stagnant + 1 if worst >= 1.0 - 1e-3 else 0
            if stagnant >= 4:
                raise DivergenceDetected(
                    f"ring contributions around {p} do not decay (ratio {worst:.6f})"
                )
            if prev_ratio is not None and k >= 4:
                r = np.clip(ratio, 0.0, 1.0 - 1e-3)
                tail = c * r / (1.0 - r)
                drift = np.abs(ratio - prev_ratio)
                tail_err = np.abs(c) * drift / (1.0 - r) ** 2 + np.abs(tail) * 1e-12
                scale = float(np.max(np.abs(value + tail)))
                if float(np.max(tail_err)) <= rel_tol * scale / 20.0:
                    value = value + tail
                    err += float(np.max(tail_err))
                    return value, err, evals
            prev_ratio = ratio
        prev = c
        if evals >= budget:
            break
    raise QuadratureFailure(f"ring series around {p} did not converge")


def integrate_disc(
    f: Integrand,
    disc: Disc,
    singularities: Sequence[tuple[complex, float]] = (),
    tol: float = 1e-8,
    budget: int = DEFAULT_BUDGET,
    abs_tol: float = 0.0,
):
    """Integrate ``f`` over ``disc`` with respect to area measure.

    Parameters
    ----------
    f : callable
        Vectorised integrand on complex points.
    disc : Disc
        Integration domain.
    singularities : sequence of (point, s)
        Points where ``f`` may behave like ``|z - p|^(-2 s)``.  Points on or
        outside the boundary are handled by plain adaptivity.
    tol : float
        Target relative error.
    budget : int
        Maximum number of integrand evaluations.

    Returns
    -------
    value, error_estimate

    Raises
    ------
    DivergenceDetected
        Ring contributions around a singular point fail to decay.
    QuadratureFailure
        The error target is not met within the budget.
    """
    centre = disc.centre
    R = disc.r
    pts = [complex(p) for p, _ in singularities]
    radii = _bump_radii(pts, centre, R)
    active = [(p, rho) for p, rho in zip(pts, radii) if rho > 0]

    value = 0.0
    err = 0.0
    evals = 0
    for p, rho in active:
        v_in, e_in, n = _ring_series(f, p, rho, tol, budget - evals)
        evals += n

        def g_ann(z, p=p, rho=rho):
            vals = np.asarray(f(z))
            w = bump(np.abs(z - p) / rho)
            return vals * (w if vals.ndim == 1 else w[:, None])

        v_an, e_an, n = adaptive_polar(g_ann, p, rho / 2.0, rho, tol / 20.0, budget=budget - evals, n_t=2)
        evals += n
        value = value + v_in + v_an
        err += e_in + e_an

    def g_rest(z):
        vals = np.asarray(f(z))
        if not active:
            return vals
        w = np.ones(z.shape)
        for p, rho in active:
            w = w - bump(np.abs(z - p) / rho)
        return vals * (w if vals.ndim == 1 else w[:, None])

    scale = float(np.max(np.abs(value))) if np.ndim(value) else abs(value)
    v_g, e_g, n = adaptive_polar(
        g_rest, centre, 0.0, R, tol / 2.0, abs_tol=max(abs_tol / 2.0, tol * scale / 4.0),
        budget=budget - evals,
    )
    evals += n
    value = value + v_g
    err += e_g
    scale = float(np.max(np.abs(value))) if np.ndim(value) else abs(value)
    if err > max(tol * scale, abs_tol) * 1.000001:
        raise QuadratureFailure(f"error estimate {err:.3g} exceeds target for value {scale:.6g}")
    if np.ndim(value) == 0:
        value = float(value)
    return value, float(err)


# ---------------------------------------------------------------------------
# fixed product rules (used for Gram matrices, where one point set serves many integrands)


def _jacobi_rule(n: int, alpha: float):
    """Nodes/weights on [0, 1] for the weight t^alpha (alpha > -1)."""
    x, w = _sp_special.roots_jacobi(n, 0.0, alpha)
    t = 0.5 * (x + 1.0)
    return t, w * 0.5 ** (alpha + 1.0)


def _ray_exit(p: complex, centre: complex, R: float, ang: np.ndarray) -> np.ndarray:
    """Distance from interior point ``p`` to the circle |z - centre| = R along each angle."""
    d = p - centre
    e = np.exp(1j * ang)
    b = (np.conj(d) * e).real
    return -b + np.sqrt(b * b + R * R - abs(d) ** 2)


def disc_rule(
    disc: Disc,
    singularities: Sequence[tuple[complex, float]] = (),
    n_t: int = 32,
    n_theta: int = 128,
    t_panels: int = 4,
):
    """Fixed quadrature rule ``(points, weights)`` for integrands ``|z - p|^(-2 s) * smooth``.

    With at most one interior singular point the rule is polar about that point
    (about the centre if there is none) with Gauss-Jacobi nodes along each ray up
    to the boundary, so the radial direction is exact for polynomial times the
    registered power and the angular direction converges spectrally.  Several
    singular points fall back to a smooth partition of unity.
    """
    centre = disc.centre
    R = disc.r
    pts = [complex(p) for p, _ in singularities]
    exps = [float(s) for _, s in singularities]
    radii = _bump_radii(pts, centre, R)
    active = [(p, s, rho) for p, s, rho in zip(pts, exps, radii) if rho > 0]
    for p, s, _ in active:
        if s >= 1.0:
            raise DivergenceDetected(f"exponent {s} at {p} is not integrable")
    ang = 2.0 * math.pi * (np.arange(n_theta) + 0.5) / n_theta
    w_ang = 2.0 * math.pi / n_theta

    if len(active) <= 1:
        p, s = (active[0][0], active[0][1]) if active else (centre, 0.0)
        L = _ray_exit(p, centre, R, ang)
        points, weights = [], []
        # first panel carries the singular power, outer panels are plain Gauss-Legendre
        edges = np.linspace(0.0, 1.0, t_panels + 1)
        tj, wj = _jacobi_rule(n_t, 1.0 - 2.0 * s)
        u = edges[1] * tj
        wu = wj * edges[1] ** (2.0 - 2.0 * s) * u ** (2.0 * s)
        x, w = np.polynomial.legendre.leggauss(n_t)
        us, ws = [u], [wu]
        for a, b in zip(edges[1:-1], edges[2:]):
            uu = 0.5 * (a + b) + 0.5 * (b - a) * x
            us.append(uu)
            ws.append(0.5 * (b - a) * w * uu)
        u = np.concatenate(us)
        wu = np.concatenate(ws)
        z = p + (u[:, None] * L[None, :]) * np.exp(1j * ang)[None, :]
        ww = wu[:, None] * (L * L)[None, :] * w_ang
        return z.ravel(), ww.ravel()

    x, w = np.polynomial.legendre.leggauss(n_t)
    points, weights = [], []
    edges = np.linspace(0.0, R, t_panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        t = 0.5 * (a + b) + 0.5 * (b - a) * x
        wt = 0.5 * (b - a) * w * t
        z = centre + t[:, None] * np.exp(1j * ang)[None, :]
        ww = (wt[:, None] * w_ang) * np.ones_like(ang)[None, :]
        for p, _, rho in active:
            ww = ww * (1.0 - bump(np.abs(z - p) / rho))
        points.append(z.ravel())
        weights.append(ww.ravel())
    for p, s, rho in active:
        half = rho / 2.0
        tj, wj = _jacobi_rule(n_t, 1.0 - 2.0 * s)
        t = half * tj
        wt = wj * half ** (2.0 - 2.0 * s) * t ** (2.0 * s)
        z = p + t[:, None] * np.exp(1j * ang)[None, :]
        points.append(z.ravel())
        weights.append(np.repeat(wt * w_ang, n_theta))
        ann = np.linspace(half, rho, 5)
        for a, b in zip(ann[:-1], ann[1:]):
            t = 0.5 * (a + b) + 0.5 * (b - a) * x
            wt = 0.5 * (b - a) * w * t * bump(t / rho)
            z = p + t[:, None] * np.exp(1j * ang)[None, :]
            points.append(z.ravel())
            weights.append(np.repeat(wt * w_ang, n_theta))
    return np.concatenate(points), np.concatenate(weights)


def integrate_radial(h: Callable[[float], float], R: float, tol: float = 1e-12):
    """``2 pi * int_0^R h(t) t dt`` for radial integrands, via scipy's adaptive QUADPACK."""
    val, err = _sp_integrate.quad(lambda t: h(t) * t, 0.0, R, epsabs=0.0, epsrel=tol, limit=400)
    return 2.0 * math.pi * val, 2.0 * math.pi * err


def log_radial_moment(
    log_h: Callable[[np.ndarray], np.ndarray], power: float, R: float, tol: float = 1e-12, log_arg: bool = False
):
    """log of ``2 pi int_0^R t^power exp(log_h(t)) t dt`` computed in log space.

    Substitutes ``t = R e^{-s}`` so that power-type behaviour at the origin becomes
    exponential decay in ``s``; the exponent is maximised first to avoid overflow.
    With ``log_arg=True`` the callable receives ``log t``, which avoids underflow of
    ``t`` for profiles that stay informative far below the smallest double.
    """
    a = power + 2.0
    if a <= 0:
        raise DivergenceDetected(f"radial moment with power {power} diverges at the origin")

    def expo(s):
        s = np.asarray(s, dtype=float)
        lt = math.log(R) - s
        return (power + 2.0) * lt + log_h(lt if log_arg else np.exp(lt))

    grid = np.concatenate([[0.0], np.geomspace(1e-6, 1e7, 4000)])
    with np.errstate(all="ignore"):
        vals = expo(grid)
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    k = int(np.argmax(vals))
    peak = float(vals[k])
    s_star = float(grid[k])

    def integrand(s):
        with np.errstate(all="ignore"):
            v = float(expo(s)) - peak
        return math.exp(v) if v > -745 else 0.0

    pieces = [0.0, s_star] if s_star > 0 else [0.0]
    total = 0.0
    lo = 0.0
    for hi in pieces[1:]:
        v, _ = _sp_integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=tol, limit=400)
        total += v
        lo = hi
    v, _ = _sp_integrate.quad(integrand, lo, np.inf, epsabs=0.0, epsrel=tol, limit=400)
    total += v
    return math.log(2.0 * math.pi) + peak + math.log(total)
