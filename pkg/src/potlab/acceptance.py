"""The acceptance suite: ten numerical certificates run over seeded corpora.

Each ``criterion_*`` function returns a :class:`CriterionResult`.  ``run_all``
drives them in order for ``potlab verify-all`` and the test suite.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .atomizer import atomise
from .bergman import (
    MeasureWeight,
    RadialWeight,
    build_basis,
    kernel_comparison,
    lelong_at_centre,
    mass_growth_probe,
    sandwich_check,
    sandwich_points,
)
from .errors import DivergenceDetected
from .ideals import exhaustive_grid, ideal_order, ideal_order_by_quadrature
from .measure import Disc, PlanarMeasure, Rect, mass_on
from .neutralizer import analyse_grid, neutralise
from .potential import SubharmonicWeight, jensen_bound_check
from .quad import integrate_disc
from .scenario import load_corpus
from .sampling import random_integer_measure, random_point_in, random_weight

DEFAULT_SEED = 20261016


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"criterion {self.number:2d} {'PASS' if self.passed else 'FAIL'}  {self.title}: {self.summary}"

    def as_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "summary": self.summary, "seconds": round(self.seconds, 3), "details": self.details}


def _timed(fn):
    def run(*args, **kwargs):
        t = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


# -- 1 ---------------------------------------------------------------------------------------------


@_timed
def criterion_atomiser(seed: int = DEFAULT_SEED, runs: int = 200) -> CriterionResult:
    rng = np.random.default_rng(seed)
    hard_fail, sep_fail = [], []
    t0 = time.perf_counter()
    for i in range(runs):
        mu, sq = random_integer_measure(rng)
        cert = atomise(mu, sq).certificates
        if not cert.all_pass:
            hard_fail.append({"run": i, **{c: getattr(cert, c) for c in "abcde"}})
        if not cert.f:
            sep_fail.append({"run": i, "N": round(mu.total), "constant": cert.separation_constant})
    elapsed = time.perf_counter() - t0
    sep_rate = 1.0 - len(sep_fail) / runs
    ok = not hard_fail and sep_rate >= 0.95 and elapsed < 120.0
    return CriterionResult(
        1, "atomiser certificates", ok,
        f"{runs - len(hard_fail)}/{runs} pass (a)-(e); separation >= side/N^2 on {sep_rate:.1%}; {elapsed:.1f}s",
        {"hard_failures": hard_fail, "separation_failures": sep_fail, "elapsed": elapsed},
    )


# -- 2, 3, 4 ------------------------------------------------------------------------------------


def _neutralise_job(args):
    weight, m, delta, seed = args
    rep = neutralise(weight, m, delta, zero_check_seed=seed)
    rep.atomisation = None  # large and not needed downstream
    return rep


def neutralise_corpus(scenarios, seed: int = DEFAULT_SEED, jobs: int = 1) -> dict:
    """``{name: (reports sorted by m, seconds)}`` for every scenario on its m-grid."""
    tasks = [(sc.name, (sc.weight, m, sc.delta, seed)) for sc in scenarios for m in sc.ms]
    t0 = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            reps = list(ex.map(_neutralise_job, [t for _, t in tasks]))
    else:
        reps = [_neutralise_job(t) for _, t in tasks]
    out: dict = {sc.name: [] for sc in scenarios}
    for (name, _), rep in zip(tasks, reps):
        out[name].append(rep)
    elapsed = time.perf_counter() - t0
    return {"reports": {k: sorted(v, key=lambda r: r.m) for k, v in out.items()}, "elapsed": elapsed}


def _exact_bound_holds(rep) -> bool:
    # floats convert to Fractions exactly, so this is the real inequality
    return Fraction(rep.sum_mj) <= Fraction(rep.m) * Fraction(rep.gamma) * (1 + Fraction(rep.delta))


@_timed
def criterion_mass_bound(corpus_run: dict) -> CriterionResult:
    bad = []
    n = 0
    for name, reps in corpus_run["reports"].items():
        for r in reps:
            n += 1
            if not _exact_bound_holds(r):
                bad.append({"scenario": name, "m": r.m, "sum_mj": r.sum_mj, "bound": r.m * r.gamma * (1 + r.delta)})
    elapsed = corpus_run["elapsed"]
    ok = not bad and elapsed < 300.0
    return CriterionResult(
        2, "sum of multiplicities <= m gamma (1 + delta)", ok,
        f"{n - len(bad)}/{n} runs satisfy the exact bound; corpus runtime {elapsed:.1f}s",
        {"failures": bad, "elapsed": elapsed},
    )


@_timed
def criterion_separation(corpus_run: dict) -> CriterionResult:
    per, ok = {}, True
    for name, reps in corpus_run["reports"].items():
        a = analyse_grid(reps)
        per[name] = {"C": a.separation_constant, "ok": a.separation_ok,
                     "min_ratio": min(a.separation_ratios) if a.separation_ratios else math.inf}
        ok &= a.separation_ok
    cs = ", ".join(f"{k} C={v['C']:.3g}" for k, v in per.items())
    return CriterionResult(3, "separation >= C/m^2 with C fixed at the first m", ok, cs, per)


@_timed
def criterion_integral(corpus_run: dict, scenarios) -> CriterionResult:
    """Monotone ``I_m/m``, the uniform-bound shape, and decay or the exact constant value.

    When nothing is left to atomise (``N_m = 0`` for every m) the integrand is
    identically 1 and ``I_m = pi r^2``; then ``I_m/m`` falls exactly like ``1/m``
    and the decay requirement is replaced by the closed-form check.
    """
    discs = {sc.name: sc.disc for sc in scenarios}
    per, ok = {}, True
    for name, reps in corpus_run["reports"].items():
        a = analyse_grid(reps)
        r = discs[name].r
        constant_case = all(rep.N_m == 0 and abs(rep.sum_mj - rep.m * rep.gamma) < 1e-9 for rep in reps)
        row = {"monotone": a.monotone_ok, "uniform": a.uniform_ok, "decay_ratio": a.decay_ratio}
        if constant_case:
            dev = max(abs(rep.integral_I_m / (math.pi * r * r) - 1.0) for rep in reps)
            row.update(kind="closed form", max_rel_dev=dev, closed_form_ok=dev <= 1e-6)
            good = a.monotone_ok and a.uniform_ok and dev <= 1e-6
        else:
            row.update(kind="decay", decay_ok=a.decay_ok)
            good = a.monotone_ok and a.uniform_ok and a.decay_ok
        row["ok"] = good
        per[name] = row
        ok &= good
    parts = []
    for k, v in per.items():
        tail = f"I_m=pi r^2 dev {v['max_rel_dev']:.1e}" if v["kind"] == "closed form" else f"decay {v['decay_ratio']:.1e}"
        parts.append(f"{k} {tail}")
    return CriterionResult(4, "I_m/m monotone, decaying, uniformly bounded", ok, "; ".join(parts), per)


# -- 5 ---------------------------------------------------------------------------------------------


@_timed
def criterion_jensen(seed: int = DEFAULT_SEED, samples: int = 500) -> CriterionResult:
    rng = np.random.default_rng(seed + 5)
    fails, n = [], 0
    while n < samples:
        w = random_weight(rng)
        if mass_on(w.riesz, w.domain) <= 0:
            continue
        z = random_point_in(rng, w.domain)
        res = jensen_bound_check(w, z, rel_tol=1e-6)
        n += 1
        if not res.passed:
            fails.append({"z": [z.real, z.imag], "lhs": res.lhs, "rhs": res.rhs})
    D = Disc(0.0, 0.0, 0.4)
    eq_dev = 0.0
    for a in (0j, 0.1 - 0.05j):
        w = SubharmonicWeight(PlanarMeasure.build([(a.real, a.imag, 1.0)]), (), D)
        for z in (0.1, 0.3j, -0.2 + 0.2j):
            res = jensen_bound_check(w, z)
            eq_dev = max(eq_dev, abs(res.lhs - res.rhs) / res.rhs)
    ok = not fails and eq_dev <= 1e-8
    return CriterionResult(
        5, "Jensen bound", ok,
        f"{n - len(fails)}/{n} samples hold; single-atom equality deviation {eq_dev:.1e}",
        {"failures": fails, "equality_deviation": eq_dev},
    )


# -- 6 ---------------------------------------------------------------------------------------------

LELONG_NUS = (0.1, 0.25, 0.3, 0.35, 0.5, 0.7, 1.0, 1.3, 2.05, 2.5)
LELONG_MS = (3, 7, 16, 33, 100)

# the smallest m of each grid makes m nu an integer: fitting there captures the worst case
SANDWICH_CASES = (
    (RadialWeight(nu=0.35), (20, 40, 80, 160, 320)),
    (RadialWeight(nu=1.3), (10, 20, 40, 80, 160)),
    (RadialWeight(nu=0.5, a=0.4), (8, 16, 32, 64, 128)),
    (RadialWeight(nu=0.25, a=1.0, s=0.5, core=0.05), (4, 8, 16, 32, 64)),
)


@_timed
def criterion_lelong_sandwich(seed: int = DEFAULT_SEED, points: int = 100) -> CriterionResult:
    unit = Disc(0.0, 0.0, 1.0)
    bad = []
    for nu in LELONG_NUS:
        for m in LELONG_MS:
            b = build_basis(RadialWeight(nu=nu), m, unit, d=ideal_order(nu, m) + 4)
            lam = Fraction(b.k_min, m)
            nu_q = Fraction(str(nu))
            if lelong_at_centre(b) != b.k_min / m or not (nu_q - Fraction(1, m) <= lam <= nu_q):
                bad.append({"nu": nu, "m": m, "k_min": b.k_min})
    pairs = len(LELONG_NUS) * len(LELONG_MS)
    rng = np.random.default_rng(seed + 6)
    sand = []
    for w, ms in SANDWICH_CASES:
        z, r = sandwich_points(unit, rng, n=points)
        rep = sandwich_check(w, list(ms), unit, z, r)
        sand.append({"weight": w.to_dict(), "ms": list(ms), "C1": rep.C1, "C2": rep.C2,
                     "lower_ok": rep.lower_ok, "upper_ok": rep.upper_ok, "passed": rep.passed})
    s_ok = all(s["passed"] for s in sand)
    ok = not bad and s_ok
    return CriterionResult(
        6, "Lelong number of phi_m and the sandwich", ok,
        f"{pairs - len(bad)}/{pairs} (nu, m) pairs in [nu - 1/m, nu]; sandwich holds on "
        f"{sum(s['passed'] for s in sand)}/{len(sand)} weights x {points} points",
        {"lelong_failures": bad, "sandwich": sand},
    )


# -- 7 ---------------------------------------------------------------------------------------------


@_timed
def criterion_zero_lelong_probe(scenario) -> CriterionResult:
    jet = scenario.jet
    probe = mass_growth_probe(jet.weight, jet.ms, jet.omega, jet.ball, jet_order=jet.order)
    ok = probe.slope >= 0 and probe.max_rel_residual < 0.10 and probe.mass_ok
    rows = [{"m": r.m, "sup_abs_psi": r.sup_abs_psi, "mass": r.mass, "degree": r.degree} for r in probe.rows]
    return CriterionResult(
        7, "zero-Lelong growth probe", ok,
        f"slope {probe.slope:.3f} per log m, residual {probe.max_rel_residual:.1%}, "
        f"mass <= {probe.mass_constant:.3f} log m: {probe.mass_ok}",
        {"rows": rows, "slope": probe.slope, "intercept": probe.intercept,
         "max_rel_residual": probe.max_rel_residual, "C": probe.mass_constant},
    )


# -- 8 ---------------------------------------------------------------------------------------------


def kernel_configs():
    """Ten ``(label, weight, m, p, B0, B, Omega)`` configurations."""
    D = Disc
    dens = SubharmonicWeight(PlanarMeasure.uniform(Rect(-0.2, 0.2, -0.2, 0.2), 1.0, n=4), (), D(0, 0, 0.4))
    atoms = SubharmonicWeight(PlanarMeasure.build([(0.1, 0.05, 0.25), (-0.15, 0.1, 0.3)]), (0.2j,), D(0, 0, 0.4))
    return [
        ("flat", RadialWeight(), 1, 0, D(0, 0, 0.2), D(0, 0, 0.5), D(0, 0, 1)),
        ("flat off-centre", RadialWeight(), 1, 2, D(0.3, 0.15, 0.15), D(0.3, 0.15, 0.3), D(0, 0, 1)),
        ("pole", RadialWeight(nu=0.35), 10, 1, D(0, 0, 0.2), D(0, 0, 0.4), D(0, 0, 1)),
        ("pole off-centre", RadialWeight(nu=0.35), 4, 1, D(0.45, 0, 0.2), D(0.45, 0, 0.4), D(0, 0, 0.9)),
        ("gaussian", RadialWeight(a=0.5), 16, 0, D(0, 0, 0.3), D(0, 0, 0.6), D(0, 0, 1)),
        ("gaussian jets", RadialWeight(a=0.5), 16, 3, D(0, 0, 0.3), D(0, 0, 0.6), D(0, 0, 1)),
        ("heavy pole", RadialWeight(nu=1.3, a=0.3), 8, 2, D(0, 0, 0.2), D(0, 0, 0.5), D(0, 0, 1)),
        ("zero Lelong", RadialWeight(s=2.0, core=0.0125), 32, 1, D(0, 0, 0.2), D(0, 0, 0.4), D(0, 0, 0.8)),
        ("density", MeasureWeight(dens), 8, 1, D(0, 0, 0.15), D(0, 0, 0.3), D(0, 0, 0.4)),
        ("atoms", MeasureWeight(atoms), 2, 1, D(0, 0, 0.15), D(0, 0, 0.3), D(0, 0, 0.4)),
    ]


@_timed
def criterion_kernel_restriction(n: int = 20) -> CriterionResult:
    rows, ok = [], True
    for label, w, m, p, B0, B, Om in kernel_configs():
        rep = kernel_comparison(w, m, p, B0, B, Om, n=n)
        rows.append({"config": label, "m": m, "p": p, "ok": rep.ok, "min_ratio": rep.min_ratio})
        ok &= rep.ok
    eq = []
    for label, w, m, p, B0, B, _ in (kernel_configs()[2], kernel_configs()[8]):
        rep = kernel_comparison(w, m, p, B0, B, B, n=n)
        eq.append({"config": label, "max_dev": rep.max_equal_dev})
    eq_ok = all(e["max_dev"] <= 1e-10 for e in eq)
    ok = ok and eq_ok
    return CriterionResult(
        8, "kernel monotone under domain restriction", ok,
        f"{sum(r['ok'] for r in rows)}/{len(rows)} configs hold on {n}x{n} grids; "
        f"equal-domain deviation {max(e['max_dev'] for e in eq):.1e}",
        {"configs": rows, "equal_domains": eq},
    )


# -- 9 ---------------------------------------------------------------------------------------------


@_timed
def criterion_ideals(seed: int = DEFAULT_SEED, samples: int = 50) -> CriterionResult:
    grid = exhaustive_grid()
    rng = np.random.default_rng(seed + 9)
    mism = []
    for _ in range(samples):
        nu = round(float(rng.uniform(0.01, 3.0)), 4)
        m = int(rng.integers(1, 51))
        if ideal_order(nu, m) != ideal_order_by_quadrature(nu, m):
            mism.append({"nu": nu, "m": m})
    ok = grid.passed and not mism
    ex = [{"nu": c.nu, "m0": c.m0, "q": c.q, "eps": c.eps, "q*order(m0(1+eps))": c.q * c.order_m0eps,
           "order(m0 q)": c.order_m0q} for c in grid.first_left_counterexamples]
    return CriterionResult(
        9, "ideal inclusions over the exhaustive grid", ok,
        f"{grid.cases} cases: right inclusion fails {grid.right_failures}, left inclusion fails "
        f"{grid.left_failures}/{grid.left_contractual_cases}; quadrature oracle agrees "
        f"{samples - len(mism)}/{samples}",
        {"cases": grid.cases, "right_failures": grid.right_failures, "left_failures": grid.left_failures,
         "left_cases": grid.left_contractual_cases, "left_counterexamples": ex, "oracle_mismatches": mism},
    )


# -- 10 --------------------------------------------------------------------------------------------


def model_integral_bound(a: complex, r: float, tau: float) -> float:
    """Upper bound for ``int_{D(0,r)} |z|^2 |z - a|^(-tau)``."""
    R = abs(a) + r
    return 4 * math.pi * R ** (2 - tau) * (R**2 / (4 - tau) + abs(a) ** 2 / (2 - tau))


@_timed
def criterion_quadrature(seed: int = DEFAULT_SEED) -> CriterionResult:
    unit = Disc(0.0, 0.0, 1.0)
    worst = 0.0
    bad = []
    for s in (0.0, 0.25, 0.5, 0.75, 0.9, 0.97):
        v, _ = integrate_disc(lambda z, s=s: np.abs(z) ** (-2 * s), unit, [(0j, s)], tol=1e-10)
        worst = max(worst, abs(v / (math.pi / (1 - s)) - 1))
    for cx, cy, r in ((0.0, 0.0, 1.0), (0.2, -0.3, 0.4), (1.5, 2.0, 3.0)):
        v, _ = integrate_disc(lambda z: np.ones(z.shape), Disc(cx, cy, r))
        worst = max(worst, abs(v / (math.pi * r * r) - 1))
    rng = np.random.default_rng(seed + 10)
    for _ in range(10):
        a = complex(*rng.uniform(-0.4, 0.4, 2))
        r = float(rng.uniform(0.05, 0.5))
        tau = float(rng.uniform(0.02, 1.98))
        v, _ = integrate_disc(lambda z: np.abs(z) ** 2 * np.abs(z - a) ** (-tau), Disc(0, 0, r), [(a, tau / 2)], tol=1e-7)
        if v > model_integral_bound(a, r, tau):
            bad.append({"a": [a.real, a.imag], "r": r, "tau": tau})
        v0, _ = integrate_disc(lambda z: np.abs(z) ** (2 - tau), Disc(0, 0, r), [(0j, tau / 2 - 1)], tol=1e-10)
        worst = max(worst, abs(v0 / (2 * math.pi * r ** (4 - tau) / (4 - tau)) - 1))
    diverge = {}
    for s in (1.0, 1.2):
        try:
            integrate_disc(lambda z, s=s: np.abs(z) ** (-2 * s), unit, [(0j, s)], tol=1e-8)
            diverge[s] = False
        except DivergenceDetected:
            diverge[s] = True
    ok = worst <= 1e-8 and not bad and all(diverge.values())
    return CriterionResult(
        10, "quadrature closed forms and divergence", ok,
        f"worst relative error {worst:.1e}; model bound violations {len(bad)}; "
        f"divergence flagged for s=1.0: {diverge[1.0]}, s=1.2: {diverge[1.2]}",
        {"worst_rel_error": worst, "bound_violations": bad, "divergence": {str(k): v for k, v in diverge.items()}},
    )


# -- driver ----------------------------------------------------------------------------------------


def run_all(scenarios, seed: int = DEFAULT_SEED, jobs: int = 1, log=None) -> list[CriterionResult]:
    """All ten criteria in order; ``log`` receives each result line as it completes."""
    out = []

    def emit(res):
        out.append(res)
        if log:
            log(res.line())

    emit(criterion_atomiser(seed))
    corpus_run = neutralise_corpus(scenarios, seed, jobs)
    emit(criterion_mass_bound(corpus_run))
    emit(criterion_separation(corpus_run))
    emit(criterion_integral(corpus_run, scenarios))
    emit(criterion_jensen(seed))
    emit(criterion_lelong_sandwich(seed))
    zl = [sc for sc in scenarios if sc.name == "zero_lelong"] or [
        sc for sc in load_corpus() if sc.name == "zero_lelong"
    ]
    emit(criterion_zero_lelong_probe(zl[0]))
    emit(criterion_kernel_restriction())
    emit(criterion_ideals(seed))
    emit(criterion_quadrature(seed))
    return out

