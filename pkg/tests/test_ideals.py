import numpy as np
import pytest

from potlab.ideals import (
    check_inclusions,
    exhaustive_grid,
    ideal_order,
    ideal_order_by_quadrature,
    integrable_by_quadrature,
    skoda_integrability,
)


@pytest.mark.parametrize(
    "nu,m,k", [(0.7, 10, 7), (0.0, 7, 0), (0.5, 4, 2), (0.29, 100, 29), (0.3, 3, 0), (1.5, 1, 1)]
)
def test_orders(nu, m, k):
    assert ideal_order(nu, m) == k


def test_integer_boundary_matches_quadrature():
    # m·nu = 2: |z|^(2k-4) diverges at k = 1 and converges at k = 2
    assert not integrable_by_quadrature(2.0 - 1)
    assert integrable_by_quadrature(2.0 - 2)
    assert ideal_order_by_quadrature(0.5, 4) == 2
    assert ideal_order_by_quadrature(0.7, 10) == 7


def test_monotone_in_both_arguments():
    nus = np.round(np.arange(0, 3.01, 0.01), 2)
    table = np.array([[ideal_order(nu, m) for m in range(1, 51)] for nu in nus])
    assert (np.diff(table, axis=0) >= 0).all() and (np.diff(table, axis=1) >= 0).all()


def test_quadrature_oracle_random_sample():
    rng = np.random.default_rng(20261016)
    for _ in range(50):
        nu = rng.uniform(0, 3)
        m = int(rng.integers(1, 51))
        assert ideal_order(nu, m) == ideal_order_by_quadrature(nu, m), (nu, m)


def test_inclusion_examples():
    c = check_inclusions(0.7, 10, 3, 0.3)
    assert (c.order_m0q, 3 * c.order_m0) == (21, 21) and c.right_ok and c.left_ok
    c = check_inclusions(0.33, 10, 2, 0.3)
    assert (c.order_m0q, 2 * c.order_m0) == (6, 6) and c.right_ok
    for nu in (0.05, 0.5, 2.3):
        c = check_inclusions(nu, 7, 1, 0.9)
        assert c.left_ok and c.right_ok


def test_small_lelong_counterexample_to_left_inclusion():
    # the trivial ideal stays trivial under powers while I(m0 q phi) does not
    c = check_inclusions(0.01, 5, 20, 0.6)
    assert c.left_contractual and c.order_m0eps == 0 and c.order_m0q == 1
    assert not c.left_ok and c.right_ok


def test_grid_right_inclusion_never_fails():
    rep = exhaustive_grid()
    assert rep.cases == 300 * 50 * 20 * 3
    assert rep.right_failures == 0
    assert all(c.nu <= 0.31 for c in rep.first_left_counterexamples)


@pytest.mark.parametrize("nu,ok", [(0.0, True), (0.5, True), (0.99, True), (1.0, False), (1.5, False)])
def test_skoda(nu, ok):
    r = skoda_integrability(nu)
    assert r.integrable_below_1 == ok and r.quadrature_converged == ok and r.threshold == 1.0
