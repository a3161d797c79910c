import math

import numpy as np
import pytest

from potlab.errors import DivergenceDetected, QuadratureFailure
from potlab.measure import Disc
from potlab.quad import disc_rule, integrate_disc, integrate_radial, log_radial_moment


def model_bound(a, r, tau):
    R = abs(a) + r
    return 4 * math.pi * R ** (2 - tau) * (R**2 / (4 - tau) + abs(a) ** 2 / (2 - tau))


@pytest.mark.parametrize("s", [0.0, 0.25, 0.5, 0.75, 0.9, 0.97])
def test_power_family(s):
    val, err = integrate_disc(lambda z: np.abs(z) ** (-2 * s), Disc(0, 0, 1), [(0j, s)], tol=1e-10)
    assert abs(val - math.pi / (1 - s)) <= 1e-8 * math.pi / (1 - s)
    assert err <= 1e-9 * val


@pytest.mark.parametrize("r", [0.1, 0.4, 1.0, 3.0])
def test_disc_area(r):
    val, _ = integrate_disc(lambda z: np.ones(z.shape), Disc(0.2, -0.3, r))
    assert val == pytest.approx(math.pi * r * r, rel=1e-12)


def test_model_integral_respects_bound():
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = complex(*rng.uniform(-0.4, 0.4, 2))
        r = rng.uniform(0.05, 0.5)
        tau = rng.uniform(0.02, 1.98)

        def f(z):
            return np.abs(z) ** 2 * np.abs(z - a) ** (-tau)

        val, err = integrate_disc(f, Disc(0, 0, r), [(a, tau / 2)], tol=1e-9)
        assert val <= model_bound(a, r, tau)
        # the origin-centred closed form for a = 0 is 2 pi r^(4 - tau)/(4 - tau)
        v0, _ = integrate_disc(lambda z: np.abs(z) ** (2 - tau), Disc(0, 0, r), [(0j, tau / 2 - 1)], tol=1e-10)
        assert v0 == pytest.approx(2 * math.pi * r ** (4 - tau) / (4 - tau), rel=1e-8)


def test_off_centre_singularity_matches_shifted_closed_form():
    a, s = 0.25 - 0.1j, 0.6
    # disc centred on the singular point away from the origin
    val, _ = integrate_disc(lambda z: np.abs(z - a) ** (-2 * s), Disc(a.real, a.imag, 0.3), [(a, s)], tol=1e-11)
    assert val == pytest.approx(2 * math.pi * 0.3 ** (2 - 2 * s) / (2 - 2 * s), rel=1e-9)


def test_two_singularities():
    p, q = 0.3 + 0j, -0.3 + 0j
    f = lambda z: np.abs(z - p) ** -1.0 + np.abs(z - q) ** -0.5
    val, _ = integrate_disc(f, Disc(0, 0, 1), [(p, 0.5), (q, 0.25)], tol=1e-10)
    # independent check: fixed product rule with a partition of unity
    P, W = disc_rule(Disc(0, 0, 1), [(p, 0.5), (q, 0.25)], n_t=40, n_theta=256, t_panels=8)
    assert val == pytest.approx(float(W @ f(P)), rel=1e-7)


def test_vector_valued_integrand():
    f = lambda z: np.column_stack([np.ones(z.shape), np.abs(z) ** 2, np.abs(z) ** -1])
    val, _ = integrate_disc(f, Disc(0, 0, 1), [(0j, 0.5)], tol=1e-10)
    assert val == pytest.approx([math.pi, math.pi / 2, 2 * math.pi], rel=1e-9)


@pytest.mark.parametrize("s", [1.0, 1.2])
def test_divergence_detected(s):
    with pytest.raises(DivergenceDetected):
        integrate_disc(lambda z: np.abs(z) ** (-2 * s), Disc(0, 0, 1), [(0j, s)], tol=1e-8)


def test_budget_exhaustion():
    with pytest.raises(QuadratureFailure):
        integrate_disc(lambda z: np.cos(400 * z.real), Disc(0, 0, 1), tol=1e-12, budget=5000)


@pytest.mark.parametrize("s", [0.3, 0.8])
def test_refinement_convergence(s):
    exact = math.pi / (1 - s)
    prev_val, prev_err = integrate_disc(lambda z: np.abs(z) ** (-2 * s), Disc(0, 0, 1), [(0j, s)], tol=1e-4)
    for tol in (5e-5, 2.5e-5, 1.25e-5, 1e-6, 1e-8):
        val, err = integrate_disc(lambda z: np.abs(z) ** (-2 * s), Disc(0, 0, 1), [(0j, s)], tol=tol)
        assert abs(val - prev_val) <= prev_err + 1e-15 * exact
        prev_val, prev_err = val, err


def test_polynomial_exactness_on_smooth_cells():
    coeffs = np.random.default_rng(0).normal(size=(5, 5))

    def f(z):
        x, y = z.real, z.imag
        return sum(coeffs[i, j] * x**i * y**j for i in range(5) for j in range(5))

    # exact: int over unit disc of x^i y^j = 0 unless both even; Beta-function closed form
    def moment(i, j):
        if i % 2 or j % 2:
            return 0.0
        return 2 * math.gamma((i + 1) / 2) * math.gamma((j + 1) / 2) / ((i + j + 2) * math.gamma((i + j + 2) / 2))

    exact = sum(coeffs[i, j] * moment(i, j) for i in range(5) for j in range(5))
    val, _ = integrate_disc(f, Disc(0, 0, 1), tol=1e-12, abs_tol=1e-13)
    assert val == pytest.approx(exact, abs=1e-12)


def test_disc_rule_jacobi_core():
    P, W = disc_rule(Disc(0, 0, 1), [(0j, 0.7)])
    assert float(W @ np.abs(P) ** -1.4) == pytest.approx(math.pi / 0.3, rel=1e-12)
    assert float(W @ np.abs(P) ** 0.6) == pytest.approx(math.pi / 1.3, rel=1e-12)
    P, W = disc_rule(Disc(0, 0, 1))
    assert W.sum() == pytest.approx(math.pi, rel=1e-14)


def test_disc_rule_off_centre_matches_adaptive():
    a = 0.3 + 0.1j
    f = lambda z: np.abs(z - a) ** -1.4 * np.exp(z.real)
    P, W = disc_rule(Disc(0, 0, 1), [(a, 0.7)])
    ref, _ = integrate_disc(f, Disc(0, 0, 1), [(a, 0.7)], tol=1e-11)
    assert float(W @ f(P)) == pytest.approx(ref, rel=1e-10)


def test_radial_helpers():
    val, _ = integrate_radial(lambda t: t**2, 1.0)
    assert val == pytest.approx(math.pi / 2, rel=1e-12)
    # 2 pi int_0^1 t^{2k} t dt = pi/(k+1)
    for k in (0, 3, 40):
        assert math.exp(log_radial_moment(lambda t: 0 * t, 2.0 * k, 1.0)) == pytest.approx(math.pi / (k + 1), rel=1e-10)
    with pytest.raises(DivergenceDetected):
        log_radial_moment(lambda t: 0 * t, -2.0, 1.0)
