"""``potlab`` command line: scenario runner writing CSV tables and a JSON summary.

Exit codes: 0 success, 1 a certificate failed (``verify-all``), 2 bad
configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import acceptance
from .atomizer import atomise
from .bergman import (
    RadialWeight,
    build_basis,
    kernel_comparison,
    lelong_at_centre,
    mass_growth_probe,
    sandwich_check,
    sandwich_points,
)
from .errors import ConfigError, PotlabError
from .ideals import exhaustive_grid
from .measure import Disc, restrict, scale
from .neutralizer import analyse_grid, neutralise
from .scenario import SCHEMA, load_corpus, load_scenario, parse_m_grid

log = logging.getLogger("potlab")


# -- output helpers -----------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in header])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


@contextmanager
def atomic_dir(out: Path):
    """Yield a staging directory that replaces ``out`` only if the block succeeds."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        yield stage
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    old = None
    if out.exists():
        old = out.with_name(f".{out.name}.old")
        shutil.rmtree(old, ignore_errors=True)
        os.replace(out, old)
    os.replace(stage, out)
    if old is not None:
        shutil.rmtree(old, ignore_errors=True)


def write_summary(stage: Path, command: str, args, body: dict, scenario=None) -> None:
    doc = {"schema": SCHEMA, "command": command, "seed": args.seed}
    if scenario is not None:
        doc["scenario"] = {"name": scenario.name, "source": Path(scenario.source).name, "sha256": scenario.digest}
    doc.update(body)
    (stage / "summary.json").write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


def _need_scenario(args):
    if not args.scenario:
        raise ConfigError(f"{args.command} needs --scenario")
    return load_scenario(args.scenario)


def _pmap(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


# -- subcommands --------------------------------------------------------------------------------


def cmd_atomize(args, stage: Path) -> int:
    sc = _need_scenario(args)
    sq = sc.weight.square()
    mu = restrict(sc.weight.riesz, sq)
    if mu.total <= 0:
        raise ConfigError("no Riesz mass on the square to atomise")
    N = int(sc.grids.get("atomize_N", max(1, math.ceil(mu.total - 1e-12))))
    res = atomise(scale(mu, N / mu.total), sq)
    (stage / "pieces.csv").write_text(res.to_csv())
    cert = res.certificates.as_dict()
    (stage / "certificates.csv").write_text(csv_text(list(cert), [cert]))
    write_summary(stage, "atomize", args, {"N": N, "scale": N / mu.total, "certificates": cert}, sc)
    log.info("atomised into %d pieces; certificates %s", N, "pass" if res.certificates.all_pass else "FAIL")
    return 0


NEUTRALIZE_COLUMNS = ["m", "N_m", "sum_mj", "bound_i_ok", "min_sep", "sep_bound_ok", "I_m", "I_m_over_m"]


def _neutralise_one(job):
    w, m, delta, tol, seed = job
    rep = neutralise(w, m, delta, tol=tol, zero_check_seed=seed)
    rep.atomisation = None
    return rep


def cmd_neutralize(args, stage: Path) -> int:
    sc = _need_scenario(args)
    ms = parse_m_grid(args.m_grid) if args.m_grid else sc.ms
    delta = args.delta if args.delta is not None else sc.delta
    if not 0 < delta < 1:
        raise ConfigError("delta must lie in (0, 1)")
    tol = args.tol if args.tol is not None else 1e-4
    reps = _pmap(_neutralise_one, [(sc.weight, m, delta, tol, args.seed) for m in ms], args.jobs)
    reps.sort(key=lambda r: r.m)
    an = analyse_grid(reps)
    C = an.separation_constant
    rows, pts = [], []
    for r in reps:
        row = r.row()
        sep = r.min_separation_small_nu
        row["sep_bound_ok"] = not math.isfinite(sep) or sep >= C / (r.m * r.m) * (1 - 1e-12)
        rows.append(row)
        for z, k in zip(r.points, r.multiplicities):
            pts.append({"m": r.m, "x": z.real, "y": z.imag, "multiplicity": int(k)})
    (stage / "neutralize.csv").write_text(csv_text(NEUTRALIZE_COLUMNS, rows))
    (stage / "points.csv").write_text(csv_text(["m", "x", "y", "multiplicity"], pts))
    body = {
        "delta": delta, "tol": tol, "m_grid": ms,
        "gamma": reps[0].gamma if reps else None,
        "fitted": {
            "separation_constant": C,
            "uniform_constant": an.uniform_constant,
            "decay_ratio": an.decay_ratio,
        },
        "checks": {
            "bound_i": an.bound_i_ok, "separation": an.separation_ok, "monotone": an.monotone_ok,
            "decay": an.decay_ok, "uniform": an.uniform_ok,
        },
        "log_I_m": {str(r.m): r.log_I_m for r in reps},
    }
    write_summary(stage, "neutralize", args, body, sc)
    return 0


def _lelong_row(job):
    w, m, omega = job
    b = build_basis(w, m, omega)
    return {"m": m, "k_min": b.k_min, "lelong": lelong_at_centre(b), "nu": w.nu,
            "in_range": w.nu - 1 / m <= lelong_at_centre(b) <= w.nu + 1e-15}


def _kernel_row(job):
    w, m, p, B0, B, omega, n = job
    rep = kernel_comparison(w, m, p, B0, B, omega, n=n)
    return {"m": m, "p": p, "points": rep.n_points, "ok": rep.ok, "min_ratio": rep.min_ratio,
            "max_ratio": rep.max_ratio}


def cmd_bergman(args, stage: Path) -> int:
    sc = _need_scenario(args)
    jet = sc.jet
    ms = parse_m_grid(args.m_grid) if args.m_grid else jet.ms
    order = args.jet if args.jet is not None else jet.order
    ball = jet.ball
    if args.subdisc:
        try:
            cx, cy, r = (float(v) for v in args.subdisc.split(","))
        except ValueError as exc:
            raise ConfigError("--subdisc must be cx,cy,r") from exc
        ball = Disc(cx, cy, r)
    w, omega = jet.weight, jet.omega
    body = {"m_grid": ms, "jet_order": order, "omega": [omega.cx, omega.cy, omega.r],
            "ball": [ball.cx, ball.cy, ball.r], "weight": getattr(w, "to_dict", lambda: "measure")()}

    probe = mass_growth_probe(w, ms, omega, ball, jet_order=order)
    rows = [{"m": r.m, "sup_abs_psi": r.sup_abs_psi, "mass": r.mass, "mass_flux": r.mass_flux, "degree": r.degree}
            for r in probe.rows]
    (stage / "mass_probe.csv").write_text(csv_text(["m", "sup_abs_psi", "mass", "mass_flux", "degree"], rows))
    body["mass_probe"] = {"slope": probe.slope, "intercept": probe.intercept,
                          "max_rel_residual": probe.max_rel_residual, "C": probe.mass_constant,
                          "mass_ok": probe.mass_ok, "sup_trend_ok": probe.sup_trend_ok}

    B0 = Disc(ball.cx, ball.cy, ball.r / 2)
    n = int(sc.grids.get("kernel_points", 20))
    krows = _pmap(_kernel_row, [(w, m, order, B0, ball, omega, n) for m in ms], args.jobs)
    (stage / "kernel_restriction.csv").write_text(
        csv_text(["m", "p", "points", "ok", "min_ratio", "max_ratio"], krows))
    body["kernel_restriction_ok"] = all(r["ok"] for r in krows)

    if isinstance(w, RadialWeight) and w.nu > 0 and abs(w.centre - omega.centre) == 0:
        lrows = _pmap(_lelong_row, [(w, m, omega) for m in ms], args.jobs)
        (stage / "lelong.csv").write_text(csv_text(["m", "k_min", "lelong", "nu", "in_range"], lrows))
        rng = np.random.default_rng(args.seed)
        z, r = sandwich_points(omega, rng, n=int(sc.grids.get("sandwich_points", 100)))
        rep = sandwich_check(w, ms, omega, z, r)
        srows = [{"m": m, "lower_margin": lo, "upper_margin": up}
                 for m, lo, up in zip(rep.ms, rep.lower_margin, rep.upper_margin)]
        (stage / "sandwich.csv").write_text(csv_text(["m", "lower_margin", "upper_margin"], srows))
        body["sandwich"] = {"C1": rep.C1, "C2": rep.C2, "passed": rep.passed}
        body["lelong_ok"] = all(r["in_range"] for r in lrows)
    write_summary(stage, "bergman", args, body, sc)
    return 0


def cmd_ideals(args, stage: Path) -> int:
    cfg = {}
    if args.scenario:
        cfg = load_scenario(args.scenario).grids.get("ideals", {}) or {}
    try:
        nu_max = float(cfg.get("nu_max", 3.0))
        nu_step = float(cfg.get("nu_step", 0.01))
        m0_max = int(cfg.get("m0_max", 50))
        q_max = int(cfg.get("q_max", 20))
        factors = tuple(float(f) for f in cfg.get("eps_factors", (1, 2, 5)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grids.ideals: {exc}") from exc
    n_nu = int(round(nu_max / nu_step))
    nus = [round(i * nu_step, 12) for i in range(1, n_nu + 1)]
    rows = [] if args.grid else None
    rep = exhaustive_grid(nus, range(1, m0_max + 1), range(1, q_max + 1), factors, rows=rows)
    if args.grid:
        header = ["nu", "m0", "q", "eps", "order_m0", "order_m0q", "left_ok", "right_ok"]
        (stage / "ideals_grid.csv").write_text(csv_text(header, (
            {"nu": c.nu, "m0": c.m0, "q": c.q, "eps": c.eps, "order_m0": c.order_m0, "order_m0q": c.order_m0q,
             "left_ok": c.left_ok, "right_ok": c.right_ok} for c in rows)))
    ex = [{"nu": c.nu, "m0": c.m0, "q": c.q, "eps": c.eps, "order_m0eps": c.order_m0eps, "order_m0q": c.order_m0q}
          for c in rep.first_left_counterexamples]
    write_summary(stage, "ideals", args, {
        "cases": rep.cases, "right_failures": rep.right_failures, "left_failures": rep.left_failures,
        "left_cases": rep.left_contractual_cases, "left_counterexamples": ex, "passed": rep.passed,
    })
    log.info("%d cases: right failures %d, left failures %d", rep.cases, rep.right_failures, rep.left_failures)
    return 0


def cmd_verify_all(args, stage: Path) -> int:
    scenarios = [load_scenario(args.scenario)] if args.scenario else load_corpus()
    results = acceptance.run_all(scenarios, seed=args.seed, jobs=args.jobs, log=print)
    rows = [{"criterion": r.number, "title": r.title, "passed": r.passed, "summary": r.summary} for r in results]
    (stage / "acceptance.csv").write_text(csv_text(["criterion", "title", "passed", "summary"], rows))
    write_summary(stage, "verify-all", args, {
        "scenarios": [sc.name for sc in scenarios],
        "all_passed": all(r.passed for r in results),
        "criteria": [r.as_dict() for r in results],
    })
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "atomize": cmd_atomize,
    "neutralize": cmd_neutralize,
    "bergman": cmd_bergman,
    "ideals": cmd_ideals,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario YAML file")
    common.add_argument("--out", default="potlab-out", help="output directory (replaced atomically)")
    common.add_argument("--m-grid", help="A:B[:geometric|linear]; overrides the scenario")
    common.add_argument("--delta", type=float, help="overrides the scenario delta")
    common.add_argument("--tol", type=float, help="quadrature tolerance")
    common.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for independent m values")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="potlab", description="Scenario runner writing CSV tables and a JSON summary.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("atomize", parents=[common], help="split the Riesz measure on the square into unit pieces")
    sub.add_parser("neutralize", parents=[common], help="neutralise the weight over an m-grid")
    b = sub.add_parser("bergman", parents=[common], help="Bergman-kernel regularisation probes")
    b.add_argument("--jet", type=int, help="jet order; overrides the scenario")
    b.add_argument("--subdisc", help="probe disc B as cx,cy,r")
    i = sub.add_parser("ideals", parents=[common], help="multiplier-ideal inclusion grid")
    i.add_argument("--grid", action="store_true", help="also write every grid case to ideals_grid.csv")
    sub.add_parser("verify-all", parents=[common], help="run the full acceptance suite")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        with atomic_dir(Path(args.out)) as stage:
            code = COMMANDS[args.command](args, stage)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except PotlabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return code


if __name__ == "__main__":
    sys.exit(main())
