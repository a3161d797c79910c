"""The ten acceptance criteria, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict, printed in a summary block at
the end of the run, and asserts the verdict.
"""

import math

import numpy as np
import pytest

from potlab import acceptance as acc
from potlab.bergman import RadialWeight, build_basis, flat_disc_kernel, comparison_grid
from potlab.ideals import check_inclusions, ideal_order
from potlab.scenario import load_corpus

SEED = acc.DEFAULT_SEED


@pytest.fixture(scope="module")
def corpus():
    return load_corpus()


@pytest.fixture(scope="module")
def corpus_run(corpus):
    return acc.neutralise_corpus(corpus, SEED)


def record(log, res):
    log[res.number] = res.line()
    print(res.line())
    return res


def test_corpus_covers_required_cases(corpus):
    names = {sc.name for sc in corpus}
    assert {"pure_atom", "pure_density", "mixed", "zero_lelong", "zero_mass"} <= names
    assert all(sc.ms == [16, 32, 64, 128, 256, 512, 1024] for sc in corpus)


def test_criterion_01_atomiser(acceptance_log):
    res = record(acceptance_log, acc.criterion_atomiser(SEED, runs=200))
    assert not res.details["hard_failures"]
    assert res.passed


def test_criterion_02_mass_bound(acceptance_log, corpus_run):
    res = record(acceptance_log, acc.criterion_mass_bound(corpus_run))
    # pure atom: every unit of m nu is stripped, nothing else
    atom = corpus_run["reports"]["pure_atom"]
    assert [r.sum_mj for r in atom] == [r.m for r in atom]
    assert all(r.sum_mj == 0 for r in corpus_run["reports"]["zero_mass"])
    assert res.passed


def test_criterion_03_separation(acceptance_log, corpus_run):
    res = record(acceptance_log, acc.criterion_separation(corpus_run))
    for name in ("pure_density", "mixed", "zero_lelong"):
        assert 0 < res.details[name]["C"] < math.inf
    assert res.passed


def test_criterion_04_integral(acceptance_log, corpus_run, corpus):
    res = record(acceptance_log, acc.criterion_integral(corpus_run, corpus))
    area = math.pi * 0.4**2
    for r in corpus_run["reports"]["pure_atom"]:
        assert abs(r.integral_I_m - area) <= 1e-6 * area
    assert res.passed


def test_criterion_05_jensen(acceptance_log):
    res = record(acceptance_log, acc.criterion_jensen(SEED, samples=500))
    assert res.details["equality_deviation"] <= 1e-8
    assert res.passed


def test_criterion_06_lelong_and_sandwich(acceptance_log):
    res = record(acceptance_log, acc.criterion_lelong_sandwich(SEED, points=100))
    # direct oracle for the lowest surviving order: floor(m nu), or m nu - 1 ... m nu when integral
    for nu in (0.35, 1.3):
        for m in (7, 20):
            b = build_basis(RadialWeight(nu=nu), m, acc.Disc(0, 0, 1), d=ideal_order(nu, m) + 2)
            k = b.k_min
            assert 2 * k + 2 - 2 * m * nu > 0 and 2 * (k - 1) + 2 - 2 * m * nu <= 1e-12
    assert res.passed


def test_criterion_07_zero_lelong_probe(acceptance_log, corpus):
    sc = next(s for s in corpus if s.name == "zero_lelong")
    res = record(acceptance_log, acc.criterion_zero_lelong_probe(sc))
    sups = [r["sup_abs_psi"] for r in res.details["rows"]]
    assert all(np.isfinite(sups))
    assert res.passed


def test_criterion_08_kernel_restriction(acceptance_log):
    res = record(acceptance_log, acc.criterion_kernel_restriction(n=20))
    # closed-form anchor for the flat configuration
    z = comparison_grid(acc.Disc(0, 0, 0.2))
    exact = flat_disc_kernel(z, acc.Disc(0, 0, 0.5)) / flat_disc_kernel(z, acc.Disc(0, 0, 1))
    assert res.details["configs"][0]["min_ratio"] == pytest.approx(exact.min(), rel=1e-8)
    assert all(e["max_dev"] <= 1e-10 for e in res.details["equal_domains"])
    assert res.passed


def test_criterion_09_ideals(acceptance_log):
    res = record(acceptance_log, acc.criterion_ideals(SEED, samples=50))
    assert res.details["right_failures"] == 0
    assert not res.details["oracle_mismatches"]
    # a hand-checkable left-inclusion case: nu = 0.01, m0 = 5, q = 20, eps = 0.6
    c = check_inclusions(0.01, 5, 20, 0.6)
    assert (c.order_m0eps, c.order_m0q) == (0, 1) and not c.left_ok
    assert res.passed


def test_criterion_10_quadrature(acceptance_log):
    res = record(acceptance_log, acc.criterion_quadrature(SEED))
    assert res.details["worst_rel_error"] <= 1e-8
    assert res.passed
