"""Exact Heisenberg-picture dynamics tau_t(A) = exp(itH) A exp(-itH).

The production path diagonalizes H once and propagates in its eigenbasis.
``evolve_taylor`` is the independent nested-commutator oracle.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .algebra import (Observable, embed, local_products, operator_norm,
                      single_site_commutator_norm)

UNITARY_ATOL = 1e-10
TAYLOR_REMAINDER_MAX = 1e-9


class DynamicsError(ValueError):
    pass


class TaylorPreconditionError(DynamicsError):
    def __init__(self, bound: float):
        super().__init__(f"Taylor remainder bound {bound:.3e} exceeds {TAYLOR_REMAINDER_MAX:.0e}")
        self.bound = bound


@dataclass(frozen=True, eq=False)
class DynamicsEngine:
    hamiltonian: Observable
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def volume(self) -> tuple:
        return self.hamiltonian.sites

    def to_eigenbasis(self, A: Observable) -> np.ndarray:
        V = self.eigenvectors
        return V.conj().T @ embed(A, self.volume).matrix @ V

    def from_eigenbasis(self, M: np.ndarray) -> np.ndarray:
        V = self.eigenvectors
        return V @ M @ V.conj().T

    def phases(self, t: float) -> np.ndarray:
        """exp(i t (E_j - E_k)), the eigenbasis action of tau_t."""
        p = np.exp(1j * t * self.eigenvalues)
        return p[:, None] * p.conj()[None, :]


def diagonalize(H: Observable) -> DynamicsEngine:
    if not H.is_hermitian(UNITARY_ATOL):
        raise DynamicsError("Hamiltonian is not hermitian")
    m = H.matrix
    try:
        w, V = np.linalg.eigh(0.5 * (m + m.conj().T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise RuntimeError("eigensolver failed") from exc
    return DynamicsEngine(H, w, V)


def _check_support(e: DynamicsEngine, A: Observable):
    if not set(A.sites) <= set(e.volume):
        raise DynamicsError(f"observable sites {A.sites} not inside the volume")


def evolve(e: DynamicsEngine, A: Observable, t: float) -> Observable:
    _check_support(e, A)
    if t == 0:
        return embed(A, e.volume)
    M = e.to_eigenbasis(A) * e.phases(t)
    return Observable(e.from_eigenbasis(M), e.volume)


@dataclass(frozen=True, eq=False)
class TaylorResult:
    observable: Observable
    remainder_bound: float
    order: int


def taylor_remainder_bound(norm_H: float, norm_A: float, t: float, order: int) -> float:
    """Tail of sum_k (it)^k/k! ad_H^k(A) past ``order``; ||ad_H^k A|| <= (2||H||)^k ||A||."""
    x = 2.0 * abs(t) * norm_H
    return norm_A * x ** (order + 1) / math.factorial(order + 1) * math.exp(x)


def evolve_taylor(H: Observable, A: Observable, t: float, order: int = 20) -> TaylorResult:
    if order < 1:
        raise DynamicsError("order must be a positive integer")
    A_full = embed(A, H.sites)
    bound = taylor_remainder_bound(operator_norm(H), operator_norm(A_full), t, order)
    if bound > TAYLOR_REMAINDER_MAX:
        raise TaylorPreconditionError(bound)
    h, term = H.matrix, A_full.matrix.copy()
    total = term.copy()
    for k in range(1, order + 1):
        term = (1j * t / k) * (h @ term - term @ h)
        total += term
    return TaylorResult(Observable(total, H.sites), bound, order)


def default_times(t_max: float, n: int = 64) -> list[float]:
    return [float(t) for t in np.linspace(0.0, t_max, n)]


def commutator_norms(e: DynamicsEngine, A: Observable, Bs: Sequence[Observable],
                     times: Sequence[float], threads: int = 1,
                     fast_path: bool = True) -> np.ndarray:
    """||[tau_t(A), B]|| for every B in ``Bs`` (rows) and t in ``times`` (columns).

    tau_t(A) is formed once per time and shared by all B; hermitian
    single-site B go through :func:`single_site_commutator_norm`. Time cells run on a
    thread pool when ``threads > 1``; BLAS is pinned to one thread so the
    numbers do not depend on the pool size.
    """
    _check_support(e, A)
    for B in Bs:
        _check_support(e, B)
    A_eig = e.to_eigenbasis(A)
    A_site = embed(A, e.volume).matrix
    use_fast = [fast_path and len(B.sites) == 1 and B.is_hermitian() for B in Bs]

    # tau_0(A) = A, and operators on disjoint tensor factors commute by construction;
    # floating-point products would leave ~1e-17 residues for complex entries
    disjoint = [not set(A.sites) & set(B.sites) for B in Bs]

    def column(t):
        At = A_site if t == 0 else e.from_eigenbasis(A_eig * e.phases(t))
        out = []
        for B, fast, apart in zip(Bs, use_fast, disjoint):
            if t == 0 and apart:
                out.append(0.0)
            elif fast and t != 0:
                out.append(single_site_commutator_norm(At, B, e.volume))
            else:
                right, left = local_products(At, B, e.volume)
                out.append(operator_norm(right - left))
        return out

    with threadpool_limits(limits=1, user_api="blas"):
        if threads <= 1:
            cols = [column(t) for t in times]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                cols = list(pool.map(column, times))
    return np.array(cols, dtype=float).reshape(len(times), len(Bs)).T


def commutator_norm_grid(e: DynamicsEngine, A: Observable, B: Observable,
                         times: Sequence[float], threads: int = 1) -> list[tuple[float, float]]:
    norms = commutator_norms(e, A, [B], times, threads)[0]
    return [(float(t), float(n)) for t, n in zip(times, norms)]
