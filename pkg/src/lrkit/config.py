"""Experiment configuration: JSON in, validated dataclasses out.

Schema (all sections optional except ``geometry`` and ``model``)::

    {
      "geometry": {"nu": 1, "length": 8}            # or "box_radius": R, or "sites": [[...], ...]
      "model":    {"model": "heisenberg", "J": 1.0, "h": 0.5}
                  # or {"model": "custom", "terms": [{"sites": [...], "matrix": [[re, im], ...]}],
                  #     "onsite": [{"site": [...], "matrix": ...}], "range": R}
      "decay":    {"epsilon": 1.0, "a": 1.0, "a_interval": [0.001, 10.0]},
      "dynamics": {"A": {"site": [0], "pauli": 3},
                   "B": {"pauli": 3, "sites": [[1], [2]]},   # or "distances": [1, 2, ...]
                   "times": [0.0, 0.5, 1.0],                  # or {"t_max": 2.0, "n": 64}
                   "threshold": 0.1,
                   "balls": [1, 2, 3]},
      "outputs":  {"dir": "out", "formats": ["csv", "json"]},
      "seed": 0,
      "verify":   {"g_scale": 1.0}                            # negative-control hook
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .algebra import Observable, local, pauli
from .bounds import DEFAULT_A_INTERVAL
from .dynamics import default_times
from .geometry import DecayFunction, GeometryError, MetricGraph
from .model import Interaction, ModelError, OnSiteTerm, model_from_config

SITE_CAP = 12


class ConfigError(ValueError):
    pass


def _observable(spec: dict, site) -> Observable:
    if "pauli" in spec:
        return pauli(int(spec["pauli"]), site)
    if "matrix" in spec:
        from .model import _parse_matrix
        return local(_parse_matrix(spec["matrix"]), [site])
    raise ConfigError("observable needs 'pauli' or 'matrix'")


@dataclass
class ExperimentConfig:
    graph: MetricGraph
    onsite: list[OnSiteTerm]
    interaction: Interaction
    decay: DecayFunction
    model_spec: dict
    a_interval: tuple[float, float] = DEFAULT_A_INTERVAL
    A: Observable | None = None
    B_template: dict | None = None
    B_sites: list = field(default_factory=list)
    distances: list[int] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    threshold: float | None = None
    balls: list[int] = field(default_factory=lambda: [1, 2, 3])
    out_dir: Path = Path(".")
    formats: tuple[str, ...] = ("csv", "json")
    seed: int = 0
    g_scale: float = 1.0
    raw: dict = field(default_factory=dict)

    @property
    def n_sites(self) -> int:
        return len(self.graph)

    def B_at(self, site) -> Observable:
        return _observable(self.B_template or {"pauli": 3}, site)


def load(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _times(spec) -> list[float]:
    if spec is None:
        return default_times(2.0)
    if isinstance(spec, dict):
        return default_times(float(spec["t_max"]), int(spec.get("n", 64)))
    times = [float(t) for t in spec]
    if not times:
        raise ConfigError("time grid is empty")
    return times


def parse(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict) or "geometry" not in raw or "model" not in raw:
        raise ConfigError("config needs 'geometry' and 'model' sections")
    try:
        g = MetricGraph.from_config(raw["geometry"])
        onsite, phi = model_from_config(raw["model"], g)
        dec = raw.get("decay", {})
        a = float(dec.get("a", 1.0))
        if a < 0:
            raise ConfigError("a must be non-negative")
        f = DecayFunction(float(dec.get("epsilon", 1.0)), a, g.dimension)
        lo, hi = dec.get("a_interval", DEFAULT_A_INTERVAL)
        cfg = ExperimentConfig(graph=g, onsite=onsite, interaction=phi, decay=f,
                               model_spec=raw["model"], a_interval=(float(lo), float(hi)),
                               seed=int(raw.get("seed", 0)), raw=raw)
        dyn = raw.get("dynamics", {})
        A_spec = dyn.get("A", {"site": g.sites[0], "pauli": 3})
        cfg.A = _observable(A_spec, g.site(A_spec.get("site", g.sites[0])))
        cfg.B_template = dyn.get("B", {"pauli": 3})
        if "sites" in cfg.B_template:
            cfg.B_sites = [g.site(s) for s in cfg.B_template["sites"]]
        origin = cfg.A.sites[0]
        if "distances" in cfg.B_template:
            cfg.distances = [int(d) for d in cfg.B_template["distances"]]
        elif not cfg.B_sites:
            cfg.distances = [d for d in range(1, len(g))
                             if (origin[0] + d,) + origin[1:] in set(g.sites)]
        for d in cfg.distances:
            g.site((origin[0] + d,) + origin[1:])
        if not cfg.B_sites:
            cfg.B_sites = [g.site((origin[0] + d,) + origin[1:]) for d in cfg.distances]
        cfg.times = _times(dyn.get("times"))
        cfg.threshold = dyn.get("threshold")
        cfg.balls = [int(r) for r in dyn.get("balls", [1, 2, 3])]
        out = raw.get("outputs", {})
        cfg.out_dir = Path(out.get("dir", "."))
        cfg.formats = tuple(out.get("formats", ["csv", "json"]))
        cfg.g_scale = float(raw.get("verify", {}).get("g_scale", 1.0))
    except ConfigError:
        raise
    except (GeometryError, ModelError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def rng_for(cfg: ExperimentConfig, name: str) -> np.random.Generator:
    """Named deterministic generator derived from the config seed."""
    key = [cfg.seed] + [ord(c) for c in name]
    return np.random.default_rng(key)
