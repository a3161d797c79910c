import math

import numpy as np
import pytest

from potlab.errors import WindowEmpty
from potlab.measure import DensityGrid, Disc, PlanarMeasure, Rect
from potlab.neutralizer import (
    ZeroDivisor,
    analyse_grid,
    choose_Nm,
    m_grid,
    neutralise,
    strip,
    winding_count,
)
from potlab.potential import SubharmonicWeight
from potlab.quad import disc_rule

DISC = Disc(0.0, 0.0, 0.4)
SQUARE = Rect(-0.28, 0.28, -0.28, 0.28)


def uniform_weight(mass, g0=()):
    return SubharmonicWeight(PlanarMeasure.uniform(SQUARE, mass, n=16), g0, DISC)


def test_strip_unit_atom():
    w = SubharmonicWeight(PlanarMeasure.build([(0.0, 0.0, 1.0)]), (), DISC)
    sw = strip(w, 10, 0.5)
    assert [(p.x, p.y, k) for p, k in sw.stripped_points] == [(0.0, 0.0, 10)]
    assert sw.residual.total == 0.0 and len(sw.residual.atoms) == 0


def test_strip_atomless_keeps_measure():
    w = uniform_weight(0.7)
    sw = strip(w, 50, 0.5)
    assert sw.stripped_points == []
    assert sw.gamma_residual == pytest.approx(0.7, rel=1e-14)


def test_small_atom_below_threshold_is_kept():
    w = SubharmonicWeight(PlanarMeasure.build([(0.1, 0.1, 0.05)]), (), DISC)
    sw = strip(w, 10, 0.4)
    assert sw.stripped_points == []
    assert sw.residual.atoms[0, 2] * 10 == pytest.approx(0.5)


def test_fractional_remainder_stays_in_residual():
    w = SubharmonicWeight(PlanarMeasure.build([(0.1, 0.0, 0.3)]), (), DISC)
    sw = strip(w, 16, 0.5)
    assert sw.stripped_points[0][1] == 4
    assert 16 * sw.residual.atoms[0, 2] == pytest.approx(0.8)


def test_choose_Nm_examples():
    assert choose_Nm(100, 0.3, 0.5) == 41
    with pytest.raises(WindowEmpty):
        choose_Nm(2, 0.3, 0.5)
    # window (9.33, 10.5] holds the single integer 10
    assert choose_Nm(7, 1.0, 0.5) == 10


@pytest.mark.parametrize("m,gamma,delta", [(37, 0.81, 0.3), (1024, 0.3, 0.5), (64, 1.2, 0.7), (500, 0.07, 0.2)])
def test_choose_Nm_window(m, gamma, delta):
    n = choose_Nm(m, gamma, delta)
    assert 2 * m * gamma / (2 - delta) < n <= m * gamma * (1 + delta)
    assert not 2 * m * gamma / (2 - delta) < n - 1


def test_pure_atom_closed_form():
    w = SubharmonicWeight(PlanarMeasure.build([(0.0, 0.0, 1.0)]), (), DISC)
    rep = neutralise(w, 10, 0.5)
    assert rep.sum_mj == 10 and rep.N_m == 0
    assert rep.integral_I_m == pytest.approx(math.pi * 0.16, rel=1e-6)


def test_zero_mass_closed_form():
    w = SubharmonicWeight(PlanarMeasure.build([]), (0.4 - 0.2j, 1.5), DISC)
    rep = neutralise(w, 64, 0.5)
    assert rep.sum_mj == 0 and len(rep.points) == 0
    assert rep.integral_I_m == pytest.approx(math.pi * 0.16, rel=1e-6)


@pytest.mark.parametrize("m", [64, 128, 256])
def test_uniform_density_counts(m):
    rep = neutralise(uniform_weight(0.3), m, 0.5)
    assert rep.sum_mj == rep.N_m <= m * 0.3 * 1.5
    assert rep.bound_i_ok and all(c["ok"] for c in rep.zero_checks)
    assert rep.integral_I_m < math.pi * 0.16


def test_I_m_against_fixed_rule():
    w = uniform_weight(1.0, (0.3 + 0.1j, 0.5))
    rep = neutralise(w, 16, 0.5)
    div = ZeroDivisor(rep.points, rep.multiplicities, 16, w)
    z, wq = disc_rule(DISC, (), n_t=48, n_theta=512, t_panels=16)
    ref = float(np.sum(wq * np.exp(2 * div.log_integrand(z))))
    assert rep.integral_I_m == pytest.approx(ref, rel=2e-4)


def test_atomiser_unit_merges_with_stripped_point():
    cells = np.full((4, 4), 1.0 / 16)
    mu = PlanarMeasure.build([(0.1, 0.0, 0.3)], DensityGrid(SQUARE, cells), None)
    w = SubharmonicWeight(mu, (), DISC)
    rep = neutralise(w, 16, 0.5, with_integral=False)
    at = np.abs(rep.points - 0.1) < 1e-15
    # 16 * 0.3 = 4.8: four from stripping, one carried unit from the rescaled remainder
    assert at.sum() == 1 and rep.multiplicities[at][0] == 5
    assert rep.sum_mj == 4 + rep.N_m


def test_winding_count_matches_divisor():
    w = uniform_weight(0.5)
    div = ZeroDivisor(np.array([0.05 + 0.02j, -0.1j]), np.array([3, 2]), 8, w)
    assert winding_count(div, Disc(0.0, 0.0, 0.2)) == 5
    assert winding_count(div, Disc(0.05, 0.0, 0.06)) == 3


def test_grid_analysis_on_uniform_density():
    w = uniform_weight(1.0)
    reps = [neutralise(w, m, 0.5, zero_check_seed=None) for m in m_grid(16, 128)]
    g = analyse_grid(reps)
    assert g.bound_i_ok and g.separation_ok and g.monotone_ok and g.uniform_ok


def test_m_grid():
    assert m_grid(16, 1024) == [16, 32, 64, 128, 256, 512, 1024]
    assert m_grid(3, 6, "linear") == [3, 4, 5, 6]
