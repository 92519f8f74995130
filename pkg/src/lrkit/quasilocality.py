"""Approximate supports of evolved observables and empirical light cones."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .algebra import Observable, conditional_expectation, embed, local, operator_norm
from .bounds import BoundEvaluation, lr_bound, lr_bound_corollary, velocity
from .dynamics import DynamicsEngine, commutator_norms, evolve
from .geometry import DecayFunction, MetricGraph


class QuasiLocalityError(ValueError):
    pass


def localization_error(e: DynamicsEngine, A: Observable, t: float, ball: Sequence,
                       ev: BoundEvaluation, f: DecayFunction, g: MetricGraph) -> tuple[float, float]:
    """(measured, certified) error of approximating tau_t(A) by an observable on ``ball``.

    measured: ||E_ball(tau_t(A)) (x) 1 - tau_t(A)|| with E the normalized partial trace.
    certified: sum over exterior sites y of the single-site LR bound with ||B|| = 1.
    """
    ball = g.sort_sites(ball)
    if not set(A.support) <= set(ball):
        raise QuasiLocalityError("ball must contain the support of A")
    if not set(ball) <= set(e.volume):
        raise QuasiLocalityError("ball must lie inside the volume")
    At = evolve(e, A, t)
    approx = embed(conditional_expectation(At, ball, e.volume), e.volume)
    measured = operator_norm(approx.matrix - At.matrix)
    normA = operator_norm(A)
    exterior = [y for y in e.volume if y not in set(ball)]
    certified = float(sum(lr_bound(ev, A.support, [y], f, g, normA, 1.0, t) for y in exterior))
    return measured, certified


@dataclass
class LightConeReport:
    grid: list[tuple[float, float, float, float, float]]
    threshold: float
    crossings: list[tuple[float, float | None]]
    fitted_velocity: float | None
    theoretical_velocity: float
    optimal_velocity: float | None = None
    crossings_monotone: bool = True
    checks: dict = field(default_factory=dict)

    CSV_COLUMNS = ("distance", "t", "measured_norm", "bound_22", "bound_24")

    def to_dict(self) -> dict:
        return asdict(self)


def crossing_time(times: Sequence[float], values: Sequence[float], threshold: float) -> float | None:
    """Earliest t with value >= threshold, linearly interpolated between grid points."""
    for i, v in enumerate(values):
        if v >= threshold:
            if i == 0:
                return float(times[0])
            t0, t1, v0 = times[i - 1], times[i], values[i - 1]
            return float(t0 + (threshold - v0) * (t1 - t0) / (v - v0))
    return None


def fit_velocity(crossings: Sequence[tuple[float, float | None]]) -> float | None:
    pts = [(t, d) for d, t in crossings if t is not None]
    if len(pts) < 3:
        return None
    ts, ds = np.array(pts).T
    if np.ptp(ts) == 0:
        return None
    slope = float(np.polyfit(ts, ds, 1)[0])
    return slope if slope > 0 else None


def crossing_lower_bound(distance: float, ev: BoundEvaluation, normA: float, normB: float,
                         threshold: float, card: int = 1) -> float:
    """Earliest crossing time the corollary bound allows at ``distance``."""
    margin = math.log(2 * normA * normB * ev.f_norm_bare * card / (ev.conv_constant * threshold)) / ev.a
    return (distance - margin) / velocity(ev)


def light_cone_scan(e: DynamicsEngine, A: Observable, B_template, distances: Sequence[float],
                    times: Sequence[float], threshold: float, ev: BoundEvaluation,
                    f: DecayFunction, g: MetricGraph, threads: int = 1,
                    optimal: float | None = None) -> LightConeReport:
    """Commutator norms with B translated to each distance from A's first support site.

    B is shifted along the first lattice axis; distances whose site falls
    outside the volume are rejected.
    """
    if len(times) < 2:
        raise QuasiLocalityError("need at least two time points")
    Bmat = B_template.matrix if isinstance(B_template, Observable) else np.asarray(B_template)
    normA, normB = operator_norm(A), operator_norm(Bmat)
    if not 0 < threshold < 2 * normA * normB:
        raise QuasiLocalityError(f"threshold must lie in (0, {2 * normA * normB})")
    origin = A.support[0]

    def placed(d):
        site = (origin[0] + int(d),) + tuple(origin[1:])
        if site not in set(e.volume):
            raise QuasiLocalityError(f"distance {d} leaves the volume")
        return local(Bmat, [site])

    Bs = [placed(d) for d in distances]
    columns = commutator_norms(e, A, Bs, times, threads)

    t_arr = np.asarray(times, dtype=float)
    grid, crossings, checks = [], [], {}
    lower_ok = True
    dt = float(np.max(np.diff(t_arr))) if len(t_arr) > 1 else 0.0
    for d, B, col in zip(distances, Bs, columns):
        measured = [float(m) for m in col]
        b22 = lr_bound(ev, A.support, B.support, f, g, normA, normB, t_arr)
        disjoint = not (set(A.support) & set(B.support))
        if ev.a > 0 and disjoint:
            b24 = lr_bound_corollary(ev, A.support, B.support, g, normA, normB, t_arr)
        else:
            b24 = np.full(len(t_arr), np.nan)
        grid += [(float(d), float(t), m, float(x), float(y))
                 for t, m, x, y in zip(t_arr, measured, b22, b24)]
        tc = crossing_time(t_arr, measured, threshold)
        crossings.append((float(d), tc))
        if tc is not None and ev.a > 0:
            card = min(len(A.support), len(B.support))
            lower_ok &= tc >= crossing_lower_bound(d, ev, normA, normB, threshold, card) - dt

    found = [(d, t) for d, t in crossings if t is not None]
    monotone = all(t1 <= t2 for (d1, t1), (d2, t2) in zip(found, found[1:]) if d1 < d2)
    checks["crossing_time_lower_bound"] = bool(lower_ok)
    checks["dominance"] = all(m <= b22 + 1e-9 and (np.isnan(b24) or m <= b24 + 1e-9)
                              for _, _, m, b22, b24 in grid)
    return LightConeReport(
        grid=grid,
        threshold=threshold,
        crossings=crossings,
        fitted_velocity=fit_velocity(crossings),
        theoretical_velocity=velocity(ev) if ev.a > 0 else math.inf,
        optimal_velocity=optimal,
        crossings_monotone=bool(monotone),
        checks=checks,
    )
