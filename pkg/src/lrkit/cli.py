"""lrkit simulate|bound|lightcone|verify --config <path> [--out <dir>] [--threads <n>] [--seed <n>]

Exit codes: 0 success, 1 invariant failure, 2 config error, 3 resource cap.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config as config_mod
from .algebra import operator_norm
from .bounds import (anharmonic_velocity_bound, certify, heisenberg_velocity_bound, lr_bound,
                     lr_bound_corollary, optimal_velocity, velocity)
from .config import SITE_CAP, ConfigError, ExperimentConfig
from .dynamics import commutator_norms, diagonalize
from .geometry import (convolution_constant_analytic, convolution_constant_empirical, f_norm,
                       lattice_f_norm)
from .model import build_hamiltonian
from .quasilocality import LightConeReport, QuasiLocalityError, light_cone_scan
from .verify import format_table, run_checks

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


class CapExceeded(RuntimeError):
    pass


def _num(x) -> str:
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n")


def write_grid_csv(path: Path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LightConeReport.CSV_COLUMNS)
        for row in rows:
            w.writerow([_num(x) for x in row])


def _check_cap(cfg: ExperimentConfig, allow_large: bool):
    if cfg.n_sites > SITE_CAP and not allow_large:
        raise CapExceeded(f"{cfg.n_sites} sites exceed the cap of {SITE_CAP} (use --allow-large)")


def _engine(cfg):
    return diagonalize(build_hamiltonian(cfg.graph, cfg.onsite, cfg.interaction))


def simulate(cfg: ExperimentConfig, threads: int = 1) -> tuple[list, dict]:
    """Commutator-norm grid with both bounds per cell, rows ordered by (B, t)."""
    g, f, A = cfg.graph, cfg.decay, cfg.A
    e = _engine(cfg)
    ev = certify(cfg.interaction, f, g)
    Bs = [cfg.B_at(s) for s in cfg.B_sites]
    norms = commutator_norms(e, A, Bs, cfg.times, threads)
    nA, t = operator_norm(A), np.asarray(cfg.times)
    rows = []
    for B, row in zip(Bs, norms):
        nB = operator_norm(B)
        b22 = lr_bound(ev, A.support, B.support, f, g, nA, nB, t)
        if ev.a > 0 and not set(A.support) & set(B.support):
            b24 = lr_bound_corollary(ev, A.support, B.support, g, nA, nB, t)
        else:
            b24 = np.full(len(t), np.nan)
        d = g.set_distance(A.support, B.support)
        rows += [(d, ti, m, x, y) for ti, m, x, y in zip(t, row, b22, b24)]
    return rows, {"a": ev.a, "phi_norm": ev.phi_norm, "conv_constant": ev.conv_constant,
                  "f_norm_bare": ev.f_norm_bare}


def bound_summary(cfg: ExperimentConfig) -> dict:
    g, f, phi = cfg.graph, cfg.decay, cfg.interaction
    ev = certify(phi, f, g)
    lat = lattice_f_norm(f.dimension, f.epsilon)
    out = {
        "nu": f.dimension, "epsilon": f.epsilon, "a": f.weight_a, "n_sites": len(g),
        "phi_norm": ev.phi_norm,
        "conv_constant_analytic": ev.conv_constant,
        "conv_constant_analytic_truncation": convolution_constant_analytic(f, g),
        "conv_constant_empirical": convolution_constant_empirical(f, g),
        "f_norm_bare": lat.upper,
        "f_norm_bracket": [lat.lower, lat.upper],
        "f_norm_truncation": f_norm(f.bare(), g),
        "velocity": velocity(ev) if f.weight_a > 0 else None,
    }
    a_star, v_star = optimal_velocity(phi, f, g, cfg.a_interval)
    out["optimal"] = {"a": a_star, "v": v_star, "interval": list(cfg.a_interval)}
    phi_sup = max((operator_norm(t) for t in phi.terms.values()), default=0.0)
    out["anharmonic_velocity_bound"] = anharmonic_velocity_bound(phi_sup, f.dimension, f.epsilon, lat.upper)
    if cfg.model_spec.get("model") == "heisenberg":
        J = abs(float(cfg.model_spec.get("J", 1.0)))
        out["heisenberg_velocity_bound"] = heisenberg_velocity_bound(J, f.dimension, f.epsilon, lat.upper)
    return out


def lightcone(cfg: ExperimentConfig, threads: int = 1) -> LightConeReport:
    g, f, A = cfg.graph, cfg.decay, cfg.A
    e = _engine(cfg)
    ev = certify(cfg.interaction, f, g)
    B = cfg.B_at(A.sites[0])
    thr = cfg.threshold if cfg.threshold is not None else 0.1 * 2 * operator_norm(A) * operator_norm(B)
    opt = None
    if ev.phi_norm > 0:
        opt = optimal_velocity(cfg.interaction, f, g, cfg.a_interval)[1]
    return light_cone_scan(e, A, B.matrix, cfg.distances, cfg.times, float(thr), ev, f, g,
                           threads=threads, optimal=opt)


def _out_dir(cfg: ExperimentConfig, args) -> Path:
    return Path(args.out) if args.out else cfg.out_dir


def cmd_simulate(cfg, args) -> int:
    _check_cap(cfg, args.allow_large)
    rows, meta = simulate(cfg, args.threads)
    out = _out_dir(cfg, args)
    if "csv" in cfg.formats:
        write_grid_csv(out / "simulate.csv", rows)
    if "json" in cfg.formats:
        write_json(out / "simulate.json", {"bound": meta, "columns": list(LightConeReport.CSV_COLUMNS),
                                           "grid": rows})
    return EXIT_OK


def cmd_bound(cfg, args) -> int:
    summary = bound_summary(cfg)
    write_json(_out_dir(cfg, args) / "bound.json", summary)
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_lightcone(cfg, args) -> int:
    _check_cap(cfg, args.allow_large)
    report = lightcone(cfg, args.threads)
    out = _out_dir(cfg, args)
    write_json(out / "lightcone.json", report.to_dict())
    write_grid_csv(out / "lightcone.csv", report.grid)
    ok = all(report.checks.values())
    print(f"crossings: {report.crossings}")
    print(f"fitted velocity: {report.fitted_velocity}  certified: {report.theoretical_velocity}")
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_verify(cfg, args) -> int:
    _check_cap(cfg, args.allow_large)
    checks = run_checks(cfg, args.threads)
    print(format_table(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_INVARIANT


COMMANDS = {"simulate": cmd_simulate, "bound": cmd_bound,
            "lightcone": cmd_lightcone, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lrkit", description="Numerical checks of Lieb-Robinson bounds.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output directory (overrides outputs.dir)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--allow-large", action="store_true",
                   help=f"lift the {SITE_CAP}-site cap; exactness at that size is on you")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = config_mod.load(args.config)
        if args.seed is not None and isinstance(raw, dict):
            raw["seed"] = args.seed
        cfg = config_mod.parse(raw)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, QuasiLocalityError) as exc:
        print(f"lrkit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapExceeded as exc:
        print(f"lrkit: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
