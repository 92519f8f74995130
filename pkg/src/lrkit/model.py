"""Interactions, local Hamiltonians and the weighted interaction norm."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .algebra import Observable, SITE_DIM, embed_sparse, local, operator_norm, pauli
from .geometry import DecayFunction, MetricGraph

HEISENBERG_EXCHANGE = sum(np.kron(pauli(k).matrix, pauli(k).matrix) for k in (1, 2, 3))


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class OnSiteTerm:
    site: tuple
    matrix: Observable

    def __post_init__(self):
        if not self.matrix.is_hermitian():
            raise ModelError(f"on-site term at {self.site} is not hermitian")


@dataclass(frozen=True, eq=False)
class Interaction:
    """Finite map from site sets X to hermitian terms Phi(X)."""

    terms: Mapping[tuple, Observable] = field(default_factory=dict)
    range: float | None = None

    def __post_init__(self):
        terms = {}
        for X, term in self.terms.items():
            if not term.is_hermitian():
                raise ModelError(f"term on {X} is not hermitian")
            if not np.any(term.matrix):
                continue
            terms[term.sites] = term
        object.__setattr__(self, "terms", dict(sorted(terms.items())))

    def __len__(self) -> int:
        return len(self.terms)

    def check_range(self, g: MetricGraph) -> bool:
        if self.range is None:
            return True
        return all(g.diameter(X) <= self.range for X in self.terms)

    def scaled(self, c: float) -> "Interaction":
        return Interaction({X: t.scaled(c) for X, t in self.terms.items()}, self.range)


def heisenberg_interaction(g: MetricGraph, J: float) -> Interaction:
    """J (S1 S1 + S2 S2 + S3 S3) on every nearest-neighbour pair."""
    terms = {}
    if J != 0:
        D = g.distance_matrix
        for i, j in zip(*np.nonzero(np.triu(D == 1))):
            X = (g.sites[i], g.sites[j])
            terms[X] = local(J * HEISENBERG_EXCHANGE, X)
    return Interaction(terms, range=1)


def heisenberg_onsite(g: MetricGraph, h: float, sites: Iterable | None = None) -> list[OnSiteTerm]:
    sites = g.sites if sites is None else g.sort_sites(sites)
    if h == 0:
        return []
    return [OnSiteTerm(s, pauli(3, s).scaled(h)) for s in sites]


def build_hamiltonian(g: MetricGraph, onsite: Sequence[OnSiteTerm], phi: Interaction,
                      volume: Iterable | None = None) -> Observable:
    """H = sum_x H_x + sum_{X subset volume} Phi(X) with open boundaries."""
    volume = g.sites if volume is None else g.sort_sites(volume)
    inside = set(volume)
    dim = SITE_DIM ** len(volume)
    H = sp.csr_matrix((dim, dim), dtype=complex)
    for term in onsite:
        if tuple(term.site) not in inside:
            warnings.warn(f"on-site term at {term.site} lies outside the volume; ignored",
                          stacklevel=2)
            continue
        H = H + embed_sparse(term.matrix, volume)
    for X, term in phi.terms.items():
        if set(X) <= inside:
            H = H + embed_sparse(term, volume)
    return Observable(H.toarray(), volume)


def interaction_norm(phi: Interaction, f: DecayFunction, g: MetricGraph) -> float:
    """sup_{x,y} F_a(d(x,y))^-1 sum_{X ni x,y} ||Phi(X)||, diagonal pairs included."""
    n = len(g)
    S = np.zeros((n, n))
    for X, term in phi.terms.items():
        idx = np.array([g.index(x) for x in X])
        S[np.ix_(idx, idx)] += operator_norm(term)
    if not S.any():
        return 0.0
    return float((S / f(g.distance_matrix)).max())


def _parse_matrix(raw) -> np.ndarray:
    arr = np.asarray(raw, dtype=float)
    if arr.shape[-1] != 2:
        raise ModelError("matrix entries must be [re, im] pairs")
    vals = arr[..., 0] + 1j * arr[..., 1]
    if vals.ndim == 1:
        d = int(round(np.sqrt(vals.size)))
        if d * d != vals.size:
            raise ModelError("flat matrix length is not a perfect square")
        vals = vals.reshape(d, d)
    if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
        raise ModelError("matrix must be square")
    return vals


def model_from_config(cfg: dict, g: MetricGraph) -> tuple[list[OnSiteTerm], Interaction]:
    kind = cfg.get("model")
    if kind == "heisenberg":
        J, h = float(cfg.get("J", 1.0)), float(cfg.get("h", 0.0))
        return heisenberg_onsite(g, h), heisenberg_interaction(g, J)
    if kind == "custom":
        terms = {}
        for t in cfg.get("terms", []):
            # matrix factors follow the listed site order; Observable canonicalizes
            term = local(_parse_matrix(t["matrix"]), [g.site(x) for x in t["sites"]])
            prev = terms.get(term.sites)
            terms[term.sites] = term if prev is None else local(prev.matrix + term.matrix, term.sites)
        onsite = [OnSiteTerm(g.site(t["site"]), local(_parse_matrix(t["matrix"]), [g.site(t["site"])]))
                  for t in cfg.get("onsite", [])]
        rng = cfg.get("range")
        return onsite, Interaction(terms, None if rng is None else float(rng))
    raise ModelError(f"unknown model kind {kind!r}")
