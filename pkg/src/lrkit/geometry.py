"""Finite truncations of Z^nu with the L1 metric, and the decay-function calculus.

Distances are integral, so every geometry quantity reduces to sums of
``F_a(r) = exp(-a r) (1 + r)^-(nu + eps)`` over integer radii.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

Site = tuple[int, ...]

GEOMETRY_ATOL = 1e-12


class GeometryError(ValueError):
    pass


def _as_site(x, nu: int) -> Site:
    if isinstance(x, (int, np.integer)):
        x = (int(x),)
    site = tuple(int(c) for c in x)
    if len(site) != nu:
        raise GeometryError(f"site {x!r} does not have {nu} coordinates")
    return site


@dataclass(frozen=True)
class MetricGraph:
    """Finite set of lattice sites in Z^nu, sorted row-major, with the L1 metric."""

    dimension: int
    sites: tuple[Site, ...]
    metric_kind: str = "L1"

    def __post_init__(self):
        if self.dimension < 1:
            raise GeometryError("dimension must be a positive integer")
        if self.metric_kind != "L1":
            raise GeometryError(f"unsupported metric {self.metric_kind!r}")
        sites = tuple(sorted(_as_site(s, self.dimension) for s in self.sites))
        if len(set(sites)) != len(sites):
            raise GeometryError("sites must be pairwise distinct")
        object.__setattr__(self, "sites", sites)

    @classmethod
    def box(cls, nu: int, radius: int) -> "MetricGraph":
        if radius < 0:
            raise GeometryError("box radius must be non-negative")
        axis = range(-radius, radius + 1)
        return cls(nu, tuple(itertools.product(axis, repeat=nu)))

    @classmethod
    def chain(cls, length: int) -> "MetricGraph":
        """Sites 0..length-1 on a line."""
        if length < 1:
            raise GeometryError("chain length must be positive")
        return cls(1, tuple((i,) for i in range(length)))

    @classmethod
    def from_config(cls, cfg: dict) -> "MetricGraph":
        nu = int(cfg.get("nu", 1))
        keys = {"box_radius", "sites", "length"} & set(cfg)
        if len(keys) != 1:
            raise GeometryError("geometry needs exactly one of box_radius, sites, length")
        if "box_radius" in cfg:
            return cls.box(nu, int(cfg["box_radius"]))
        if "length" in cfg:
            if nu != 1:
                raise GeometryError("'length' is only defined for nu = 1")
            return cls.chain(int(cfg["length"]))
        return cls(nu, tuple(_as_site(s, nu) for s in cfg["sites"]))

    def __len__(self) -> int:
        return len(self.sites)

    @cached_property
    def _index(self) -> dict[Site, int]:
        return {s: i for i, s in enumerate(self.sites)}

    def site(self, x) -> Site:
        s = _as_site(x, self.dimension)
        if s not in self._index:
            raise GeometryError(f"unknown site {x!r}")
        return s

    def index(self, x) -> int:
        return self._index[self.site(x)]

    def sort_sites(self, xs: Iterable) -> tuple[Site, ...]:
        """Canonical (row-major) order of a subset of sites."""
        return tuple(sorted({self.site(x) for x in xs}))

    def distance(self, x, y) -> int:
        a, b = self.site(x), self.site(y)
        return sum(abs(p - q) for p, q in zip(a, b))

    def set_distance(self, xs: Iterable, ys: Iterable) -> int:
        """min over x in X, y in Y of d(x, y)."""
        return min(self.distance(x, y) for x in xs for y in ys)

    def diameter(self, xs: Sequence) -> int:
        return max((self.distance(x, y) for x in xs for y in xs), default=0)

    @cached_property
    def coords(self) -> np.ndarray:
        return np.array(self.sites, dtype=np.int64).reshape(len(self.sites), self.dimension)

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        c = self.coords
        return np.abs(c[:, None, :] - c[None, :, :]).sum(axis=-1)


@dataclass(frozen=True)
class DecayFunction:
    """F_a(r) = exp(-a r) * (1 + r)^-(nu + eps)."""

    epsilon: float
    weight_a: float = 0.0
    dimension: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise GeometryError("epsilon must be positive")
        if not self.weight_a >= 0:
            raise GeometryError("weight_a must be non-negative")
        if self.dimension < 1:
            raise GeometryError("dimension must be a positive integer")

    @property
    def exponent(self) -> float:
        return self.dimension + self.epsilon

    def with_weight(self, a: float) -> "DecayFunction":
        return replace(self, weight_a=float(a))

    def bare(self) -> "DecayFunction":
        return self.with_weight(0.0)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.exp(-self.weight_a * r) * (1.0 + r) ** (-self.exponent)
        return float(out) if out.ndim == 0 else out


def _check_dims(f: DecayFunction, g: MetricGraph):
    if f.dimension != g.dimension:
        raise GeometryError(f"decay function is for nu={f.dimension}, graph has nu={g.dimension}")


def f_norm(f: DecayFunction, g: MetricGraph) -> float:
    """max_x sum_y F_a(d(x, y)) over the truncation."""
    _check_dims(f, g)
    if len(g) == 0:
        raise GeometryError("empty site set")
    return float(f(g.distance_matrix).sum(axis=1).max())


def convolution_constant_empirical(f: DecayFunction, g: MetricGraph) -> float:
    """Smallest C with sum_z F_a(d(x,z)) F_a(d(z,y)) <= C F_a(d(x,y)) on the truncation."""
    _check_dims(f, g)
    if len(g) == 0:
        raise GeometryError("empty site set")
    M = f(g.distance_matrix)
    return float(((M @ M) / M).max())


def convolution_constant_analytic(f: DecayFunction, g: MetricGraph | None = None) -> float:
    """2^(nu+eps+1) * ||F|| with the bare F.

    With ``g`` the norm is taken on that truncation; without it the certified
    infinite-lattice value from :func:`lattice_f_norm` is used.
    """
    norm = lattice_f_norm(f.dimension, f.epsilon).upper if g is None else f_norm(f.bare(), g)
    return 2.0 ** (f.exponent + 1) * norm


def verify_log_superadditive(weight_a: float, samples: Iterable[tuple[float, float]],
                             tol: float = GEOMETRY_ATOL) -> bool:
    """Check w(r1 + r2) >= w(r1) w(r2) for w(r) = exp(-a r) on every sample."""
    ok = True
    for r1, r2 in samples:
        if r1 < 0 or r2 < 0:
            raise GeometryError("radii must be non-negative")
        w = lambda r: math.exp(-weight_a * r)
        ok &= w(r1 + r2) >= w(r1) * w(r2) - tol
    return bool(ok)


# --- infinite-lattice norm of the bare F ---------------------------------------


def shell_count_poly(nu: int) -> np.ndarray:
    """Coefficients (in r, ascending) of #{x in Z^nu : |x|_1 = r}, exact for r >= 1."""
    coef = np.zeros(1)
    for k in range(1, nu + 1):
        # C(r-1, k-1) = prod_{j=1}^{k-1} (r - j) / (k-1)!
        term = np.array([1.0])
        for j in range(1, k):
            term = P.polymul(term, [-j, 1.0])
        term = term * (2**k * math.comb(nu, k) / math.factorial(k - 1))
        coef = P.polyadd(coef, term)
    return coef


def shell_count(nu: int, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return np.where(r == 0, 1.0, P.polyval(r, shell_count_poly(nu)))


@dataclass(frozen=True)
class LatticeSum:
    """Bracket lower <= ||F|| <= upper from a partial sum plus integral tail bounds."""

    lower: float
    upper: float
    radius: int

    @property
    def value(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _tail_integral(nu: int, s: float, start: float) -> float:
    """int_start^inf N(r) (1+r)^-s dr with N the shell-count polynomial."""
    # rewrite N(r) in powers of u = 1 + r
    coef_r = shell_count_poly(nu)
    coef_u = np.zeros(1)
    for j, c in enumerate(coef_r):
        coef_u = P.polyadd(coef_u, c * P.polypow([-1.0, 1.0], j))
    u0 = 1.0 + start
    return float(sum(c * u0 ** (j - s + 1) / (s - j - 1) for j, c in enumerate(coef_u)))


def _partial_sum(nu: int, s: float, radius: int, chunk: int = 1 << 20) -> float:
    total = 1.0  # r = 0
    for lo in range(1, radius + 1, chunk):
        r = np.arange(lo, min(lo + chunk, radius + 1), dtype=float)
        total += float(np.sum(shell_count(nu, r) * (1.0 + r) ** (-s)))
    return total


@lru_cache(maxsize=None)
def lattice_f_norm(nu: int, epsilon: float, tol: float = 1e-10) -> LatticeSum:
    """||F|| = sum_{x in Z^nu} (1 + |x|)^-(nu+eps), bracketed to width <= tol.

    Sums shells r <= R directly and bounds the remainder between
    int_{R+1}^inf and int_R^inf of the (eventually decreasing) shell summand.
    """
    s = nu + epsilon
    summand = lambda r: float(shell_count(nu, r) * (1.0 + r) ** (-s))
    radius = max(64, 16 * nu)
    # bracket width is int_R^{R+1} of the summand, at most summand(R)
    while summand(radius) > tol or summand(radius + 1) >= summand(radius):
        radius *= 2
    head = _partial_sum(nu, s, radius)
    return LatticeSum(head + _tail_integral(nu, s, radius + 1),
                      head + _tail_integral(nu, s, radius), radius)
