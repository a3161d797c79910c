import math

import numpy as np
import pytest
from scipy import integrate

from potlab.errors import ConfigError, ZeroMass
from potlab.measure import DensityGrid, Disc, PlanarMeasure, Point2, Rect, mass_on
from potlab.sampling import random_point_in, random_weight
from potlab.potential import (
    SubharmonicWeight,
    density_potential,
    disc_density_integral,
    eval_weight,
    jensen_bound_check,
    restricted_potential,
)

D04 = Disc(0.0, 0.0, 0.4)


def test_unit_atom():
    w = SubharmonicWeight(PlanarMeasure.build([(0, 0, 1.0)]), (), D04)
    for t in np.linspace(0, 2 * math.pi, 7):
        assert eval_weight(w, 0.3 * np.exp(1j * t)) == pytest.approx(math.log(0.3), abs=1e-15)
    assert eval_weight(w, Point2(0, 0)) == -math.inf


def test_constant_harmonic_part():
    w = SubharmonicWeight(PlanarMeasure.build([]), (1.5 - 2j,), D04)
    assert np.all(eval_weight(w, np.array([0.1, 0.2j, -0.3])) == 1.5)


def test_harmonic_polynomial_centred_on_disc():
    w = SubharmonicWeight(PlanarMeasure.build([]), (0, 1j, 2), Disc(0.1, 0.0, 0.3))
    z = 0.25 + 0.05j
    assert eval_weight(w, z) == pytest.approx((1j * (z - 0.1) + 2 * (z - 0.1) ** 2).real, abs=1e-15)


def test_small_square_far_point():
    h = 0.02
    mu = PlanarMeasure.uniform(Rect(0.1, 0.1 + h, 0.0, h), 1.0, n=2)
    w = SubharmonicWeight(mu, (), D04)
    z = -0.25 + 0.2j
    ref, _ = integrate.dblquad(lambda y, x: math.log(abs(complex(x, y) - z)) / h**2, 0.1, 0.1 + h, 0.0, h, epsabs=1e-14)
    assert eval_weight(w, z) == pytest.approx(ref, abs=1e-12)
    centroid = complex(0.1 + h / 2, h / 2)
    assert abs(eval_weight(w, z) - math.log(abs(z - centroid))) < h**2


def test_density_potential_against_cellwise_quadrature():
    rng = np.random.default_rng(5)
    g = DensityGrid(Rect(-0.3, 0.2, -0.1, 0.35), rng.uniform(0, 1, (3, 4)))
    xe, ye = g.x_edges, g.y_edges
    for z in (0.05 + 0.1j, 0.9 - 0.2j, -0.3 + 0.35j):
        ref = 0.0
        for i in range(g.ny):
            for j in range(g.nx):
                v, _ = integrate.dblquad(
                    lambda y, x: math.log(abs(complex(x, y) - z)), xe[j], xe[j + 1], ye[i], ye[i + 1],
                    epsabs=1e-13, epsrel=1e-12,
                )
                ref += v * g.cell_density[i, j]
        assert density_potential(g, np.array([z]))[0] == pytest.approx(ref, rel=1e-8, abs=1e-12)


def _cellwise_power(g, z, p):
    """Oracle: dblquad over each cell, split at z so the singular point sits on a corner."""
    total = 0.0
    xe, ye = g.x_edges, g.y_edges
    for i in range(g.ny):
        for j in range(g.nx):
            xs = sorted({xe[j], xe[j + 1]} | ({z.real} if xe[j] < z.real < xe[j + 1] else set()))
            ys = sorted({ye[i], ye[i + 1]} | ({z.imag} if ye[i] < z.imag < ye[i + 1] else set()))
            for x0, x1 in zip(xs[:-1], xs[1:]):
                for y0, y1 in zip(ys[:-1], ys[1:]):
                    v, _ = integrate.dblquad(
                        lambda y, x: abs(complex(x, y) - z) ** -p, x0, x1, y0, y1, epsabs=1e-12, epsrel=1e-11
                    )
                    total += v * g.cell_density[i, j]
    return total


def test_ray_integrals_against_exact_mass_and_quadrature():
    rng = np.random.default_rng(8)
    g = DensityGrid(Rect(-0.3, 0.2, -0.1, 0.35), rng.uniform(0, 1, (3, 4)))
    mu = PlanarMeasure.build(density=g)
    disc = Disc(0.0, 0.1, 0.27)
    for z in (0.05 + 0.1j, 0.2 + 0.2j, -0.1 + 0.0j):
        assert disc_density_integral(g, disc, z, "mass") == pytest.approx(mass_on(mu, disc), rel=1e-10)
    big = Disc(-0.05, 0.125, 0.5)
    for z in (0.05 + 0.1j, -0.2 + 0.3j):
        assert restricted_potential(mu, big, z) == pytest.approx(density_potential(g, np.array([z]))[0], abs=1e-12)
        for p in (0.8, 1.7):
            ref = _cellwise_power(g, z, p)
            assert disc_density_integral(g, big, z, "power", p) == pytest.approx(ref, rel=1e-8)


def test_jensen_single_atom_equality():
    w = SubharmonicWeight(PlanarMeasure.build([(0, 0, 1.0)]), (), D04)
    for z in (0.1, 0.3j, -0.2 + 0.2j):
        res = jensen_bound_check(w, z)
        assert res.passed
        assert res.lhs == pytest.approx(abs(z) ** -2, rel=1e-12)
        assert abs(res.lhs - res.rhs) <= 1e-8 * res.rhs


def test_jensen_uniform_half_mass():
    rng = np.random.default_rng(2)
    mu = PlanarMeasure.uniform(Rect(-0.2, 0.2, -0.2, 0.2), 0.5, n=4)
    w = SubharmonicWeight(mu, (), D04)
    for _ in range(10):
        assert jensen_bound_check(w, random_point_in(rng, D04)).passed


def test_jensen_two_atoms():
    w = SubharmonicWeight(PlanarMeasure.build([(-0.1, 0, 0.4), (0.1, 0, 0.4)]), (), D04)
    res = jensen_bound_check(w, 0.02j)
    gamma = 0.8
    d = abs(0.1 + 0.02j)
    assert res.lhs == pytest.approx(d ** (-1.6), rel=1e-12)
    assert res.rhs == pytest.approx(d ** (-1.6), rel=1e-12)
    assert res.passed and res.gamma == gamma


def test_jensen_zero_mass():
    w = SubharmonicWeight(PlanarMeasure.build([(0.45, 0.45, 1.0)], bounding=Rect(-1, 1, -1, 1)), (), D04)
    with pytest.raises(ZeroMass):
        jensen_bound_check(w, 0.1)


def test_jensen_random_corpus():
    rng = np.random.default_rng(2024)
    fails = []
    for i in range(500):
        w = random_weight(rng)
        z = random_point_in(rng, w.domain)
        if mass_on(w.riesz, w.domain) == 0:
            continue
        res = jensen_bound_check(w, z)
        if not res.passed:
            fails.append((i, res))
    assert not fails


def test_sub_mean_value():
    rng = np.random.default_rng(99)
    angles = 2 * math.pi * np.arange(4096) / 4096
    for _ in range(100):
        w = random_weight(rng, r=0.45)
        z = random_point_in(rng, w.domain, 0.6)
        rad = rng.uniform(0.01, 0.15)
        mean = float(np.mean(eval_weight(w, z + rad * np.exp(1j * angles))))
        assert eval_weight(w, z) <= mean + 1e-6


def test_serialisation_and_radius_check():
    w = random_weight(np.random.default_rng(0))
    back = SubharmonicWeight.from_dict(w.to_dict())
    z = np.array([0.05 + 0.01j, -0.1j])
    assert np.array_equal(eval_weight(back, z), eval_weight(w, z))
    with pytest.raises(ConfigError):
        SubharmonicWeight(PlanarMeasure.build([]), (), Disc(0, 0, 0.5))
    with pytest.raises(ConfigError):
        SubharmonicWeight.from_dict({"measure": {}, "disc": {"cx": 0}})
