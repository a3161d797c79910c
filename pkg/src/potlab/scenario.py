"""Scenario documents: one YAML file per experiment.

Top-level sections::

    name, description
    weight:  {measure: <measure document> | radial: {nu, a, s, core, n}, g0_coeffs}
    disc:    {cx, cy, r}                 # the disc D(x0, r) carrying the weight
    delta:   0.5
    m_grid:  "16:1024:geometric"
    jet:     {order, factorial, weight, omega, ball, m_grid}   # Bergman runs
    grids:   {atomize_N, sandwich_points, kernel_points, ideals: {...}}

``weight.radial`` samples the Riesz measure of a radial profile on the square
about the disc as an ``n x n`` density grid.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from .bergman import RadialWeight, MeasureWeight, radial_riesz_measure, weight_from_dict
from .errors import ConfigError
from .measure import Disc, PlanarMeasure
from .neutralizer import m_grid
from .potential import SubharmonicWeight

SCHEMA = 1


def parse_m_grid(text) -> list[int]:
    """``"A:B"`` or ``"A:B:geometric|linear"`` to a list of m values."""
    if isinstance(text, (list, tuple)):
        try:
            out = sorted({int(v) for v in text})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad m list {text!r}") from exc
        if not out or out[0] < 1:
            raise ConfigError(f"bad m list {text!r}")
        return out
    parts = str(text).split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"m-grid must look like A:B[:geometric|linear], got {text!r}")
    try:
        a, b = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"bad m-grid bounds in {text!r}") from exc
    return m_grid(a, b, parts[2] if len(parts) == 3 else "geometric")


def _disc(doc, what: str) -> Disc:
    try:
        d = Disc(float(doc["cx"]), float(doc["cy"]), float(doc["r"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: expected {{cx, cy, r}}") from exc
    if d.r <= 0:
        raise ConfigError(f"{what}: radius must be positive")
    return d


@dataclass
class JetSettings:
    order: int
    factorial: bool
    weight: object  # RadialWeight or MeasureWeight
    omega: Disc
    ball: Disc
    ms: list


@dataclass
class Scenario:
    name: str
    description: str
    weight: SubharmonicWeight
    delta: float
    ms: list
    jet: JetSettings
    grids: dict = field(default_factory=dict)
    digest: str = ""
    source: str = ""

    @property
    def disc(self) -> Disc:
        return self.weight.domain


def _build_weight(doc, disc: Disc) -> SubharmonicWeight:
    if not isinstance(doc, dict):
        raise ConfigError("weight section must be a mapping")
    coeffs = doc.get("g0_coeffs", []) or []
    if "radial" in doc:
        params = dict(doc["radial"] or {})
        n = int(params.pop("n", 32))
        try:
            rw = RadialWeight(**{k: float(v) for k, v in params.items()}, centre=disc.centre)
        except TypeError as exc:
            raise ConfigError(f"weight.radial: {exc}") from exc
        probe = SubharmonicWeight(PlanarMeasure.build([]), (), disc)
        mu = radial_riesz_measure(rw, probe.square(), n)
        return SubharmonicWeight(mu, tuple(complex(*c) for c in coeffs), disc)
    return SubharmonicWeight.from_dict(
        {"measure": doc.get("measure") or {"atoms": []}, "g0_coeffs": coeffs,
         "disc": {"cx": disc.cx, "cy": disc.cy, "r": disc.r}}
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    return parse_scenario(text, source=str(path))


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: scenario must be a mapping")
    missing = {"weight", "disc", "delta", "m_grid"} - doc.keys()
    if missing:
        raise ConfigError(f"{source}: missing sections {sorted(missing)}")
    disc = _disc(doc["disc"], "disc")
    try:
        weight = _build_weight(doc["weight"], disc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: weight: {exc}") from exc
    try:
        delta = float(doc["delta"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: delta must be a number") from exc
    if not 0 < delta < 1:
        raise ConfigError(f"{source}: delta must lie in (0, 1)")
    ms = parse_m_grid(doc["m_grid"])

    jd = doc.get("jet") or {}
    if not isinstance(jd, dict):
        raise ConfigError(f"{source}: jet section must be a mapping")
    jw = weight_from_dict(jd["weight"]) if "weight" in jd else MeasureWeight(weight)
    omega = _disc(jd["omega"], "jet.omega") if "omega" in jd else disc
    ball = _disc(jd["ball"], "jet.ball") if "ball" in jd else Disc(omega.cx, omega.cy, omega.r / 2)
    jet = JetSettings(
        int(jd.get("order", 1)), bool(jd.get("factorial", False)), jw, omega, ball,
        parse_m_grid(jd["m_grid"]) if "m_grid" in jd else ms,
    )
    grids = doc.get("grids") or {}
    if not isinstance(grids, dict):
        raise ConfigError(f"{source}: grids section must be a mapping")
    return Scenario(
        str(doc.get("name", Path(source).stem)), str(doc.get("description", "")), weight, delta, ms, jet,
        grids, hashlib.sha256(text.encode()).hexdigest(), source,
    )


def corpus_paths() -> list[Path]:
    """Bundled scenario files, sorted by name."""
    root = resources.files("potlab") / "corpus"
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".yaml"))


def load_corpus() -> list[Scenario]:
    return [load_scenario(p) for p in corpus_paths()]
