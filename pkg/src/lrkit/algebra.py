"""Dense spin-1/2 operator algebra on ordered site lists.

Basis convention: tensor factors follow the row-major order of the sites,
first site is the most significant bit (``np.kron`` order).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

SITE_DIM = 2
HERMITIAN_ATOL = 1e-12

_PAULI = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


class AlgebraError(ValueError):
    pass


def _site(x) -> tuple[int, ...]:
    if isinstance(x, (int, np.integer)):
        return (int(x),)
    return tuple(int(c) for c in x)


def _sites(xs: Iterable) -> tuple[tuple[int, ...], ...]:
    return tuple(sorted({_site(x) for x in xs}))


@dataclass(frozen=True, eq=False)
class Observable:
    """A matrix acting on the tensor product over ``sites``.

    Sites are stored in canonical (sorted) order; a matrix given with its
    factors listed out of order is permuted to match.

    ``support`` is the declared support and may be narrower than ``sites``
    (e.g. after embedding into a larger volume); it defaults to ``sites``.
    """

    matrix: np.ndarray
    sites: tuple
    support: tuple | None = field(default=None)

    def __post_init__(self):
        given = [_site(x) for x in self.sites]
        sites = _sites(given)
        if len(sites) != len(given):
            raise AlgebraError(f"duplicate sites in {given}")
        support = sites if self.support is None else _sites(self.support)
        if not set(support) <= set(sites):
            raise AlgebraError("declared support must lie inside the tensor factors")
        m = np.array(self.matrix, dtype=complex)
        dim = SITE_DIM ** len(sites)
        if m.shape != (dim, dim):
            raise AlgebraError(f"matrix shape {m.shape} does not match {len(sites)} sites")
        if list(sites) != given:
            # factors were listed out of order: permute into canonical order
            n = len(sites)
            src = [given.index(s) for s in sites]
            m = m.reshape((SITE_DIM,) * (2 * n)).transpose(src + [n + i for i in src])
            m = np.ascontiguousarray(m.reshape(dim, dim))
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "support", support)

    @property
    def site_dims(self) -> tuple[int, ...]:
        return (SITE_DIM,) * len(self.sites)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def is_hermitian(self, atol: float = HERMITIAN_ATOL) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, rtol=0, atol=atol))

    def dagger(self) -> "Observable":
        return Observable(self.matrix.conj().T, self.sites, self.support)

    def scaled(self, c: complex) -> "Observable":
        return Observable(c * self.matrix, self.sites, self.support)

    def __repr__(self):
        return f"Observable(dim={self.dim}, sites={self.sites}, support={self.support})"


def local(matrix, sites) -> Observable:
    if isinstance(sites, (int, np.integer)):
        sites = [sites]
    return Observable(np.asarray(matrix), tuple(sites))


def pauli(k: int, site=0) -> Observable:
    """S^1, S^2, S^3 on a single site."""
    if k not in _PAULI:
        raise AlgebraError(f"Pauli index must be 1, 2 or 3, got {k!r}")
    return local(_PAULI[k], [site])


def identity(sites) -> Observable:
    sites = _sites(sites)
    return Observable(np.eye(SITE_DIM ** len(sites)), sites)


def _bit_offsets(positions: Sequence[int], n: int) -> np.ndarray:
    """Basis-index contribution of every configuration of the factors at ``positions``."""
    k = len(positions)
    configs = np.arange(SITE_DIM ** k)
    out = np.zeros(SITE_DIM ** k, dtype=np.int64)
    for m, p in enumerate(positions):
        bit = (configs >> (k - 1 - m)) & 1
        out += bit << (n - 1 - p)
    return out


def embed_sparse(A: Observable, volume: Sequence) -> sp.csr_matrix:
    """A (x) 1 on ``volume`` as a sparse matrix, tensor factors in canonical order."""
    volume = _sites(volume)
    if not set(A.sites) <= set(volume):
        raise AlgebraError(f"sites {A.sites} not contained in volume")
    n = len(volume)
    pos = [volume.index(s) for s in A.sites]
    rest = [i for i in range(n) if i not in pos]
    inner, outer = _bit_offsets(pos, n), _bit_offsets(rest, n)
    a, b = np.nonzero(A.matrix)
    rows = (inner[a][:, None] + outer[None, :]).ravel()
    cols = (inner[b][:, None] + outer[None, :]).ravel()
    vals = np.repeat(A.matrix[a, b], len(outer))
    dim = SITE_DIM ** n
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))


def embed(A: Observable, volume: Sequence) -> Observable:
    """A (x) 1 on ``volume``; the declared support is kept."""
    volume = _sites(volume)
    if A.sites == volume:
        return A
    return Observable(embed_sparse(A, volume).toarray(), volume, A.support)


def commutator(A: Observable, B: Observable, volume: Sequence | None = None) -> Observable:
    if volume is None:
        volume = set(A.sites) | set(B.sites)
    a, b = embed(A, volume).matrix, embed(B, volume).matrix
    if a.shape != b.shape:
        raise RuntimeError("embedded dimensions disagree")
    return Observable(a @ b - b @ a, _sites(volume))


def operator_norm(A) -> float:
    """Largest singular value; eigenvalue route when A is (anti-)hermitian."""
    m = A.matrix if isinstance(A, Observable) else np.asarray(A)
    if m.size == 0:
        return 0.0
    scale = np.abs(m).max()
    if scale == 0:
        return 0.0
    tol = 1e-14 * scale * m.shape[0]
    if np.allclose(m, m.conj().T, rtol=0, atol=tol):
        return float(np.abs(np.linalg.eigvalsh(0.5 * (m + m.conj().T))).max())
    if np.allclose(m, -m.conj().T, rtol=0, atol=tol):
        return float(np.abs(np.linalg.eigvalsh(0.5j * (m - m.conj().T))).max())
    return float(np.linalg.norm(m, 2))


def single_site_commutator_norm(M: np.ndarray, B: Observable, volume: Sequence) -> float:
    """||[M, B (x) 1]|| for a hermitian single-site B, via one half-size SVD.

    With B = U diag(w0, w1) U^dag, the commutator is block off-diagonal in the
    rotated basis of B's site, so its norm is |w1 - w0| times the larger norm
    of the two off-diagonal blocks of the rotated M.
    """
    volume = _sites(volume)
    if len(B.sites) != 1 or not B.is_hermitian():
        raise AlgebraError("fast path needs a hermitian single-site observable")
    n, p = len(volume), volume.index(B.sites[0])
    w, U = np.linalg.eigh(B.matrix)
    gap = abs(w[1] - w[0])
    if gap == 0:
        return 0.0
    lo, hi = SITE_DIM ** p, SITE_DIM ** (n - p - 1)
    t = M.reshape(lo, SITE_DIM, hi, lo, SITE_DIM, hi)
    t = np.einsum("sa,iajkbl,bt->isjktl", U.conj().T, t, U, optimize=True)
    half = lo * hi
    x01 = t[:, 0, :, :, 1, :].reshape(half, half)
    x10 = t[:, 1, :, :, 0, :].reshape(half, half)
    return float(gap * max(np.linalg.norm(x01, 2), np.linalg.norm(x10, 2)))


def local_products(M: np.ndarray, B: Observable, volume: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """(M (B (x) 1), (B (x) 1) M) without forming the embedded B."""
    volume = _sites(volume)
    n, k = len(volume), len(B.sites)
    pos = [volume.index(s) for s in B.sites]
    b = B.matrix.reshape((SITE_DIM,) * (2 * k))
    d = M.shape[0]
    # right product: contract column factors at pos with B's row factors
    Mt = M.reshape((d,) + (SITE_DIM,) * n)
    right = np.tensordot(Mt, b, axes=([1 + p for p in pos], list(range(k))))
    right = np.moveaxis(right, list(range(n + 1 - k, n + 1)), [1 + p for p in pos]).reshape(d, d)
    # left product: contract B's column factors with row factors at pos
    Mt = M.reshape((SITE_DIM,) * n + (d,))
    left = np.tensordot(b, Mt, axes=(list(range(k, 2 * k)), pos))
    left = np.moveaxis(left, list(range(k)), pos).reshape(d, d)
    return right, left


def partial_trace(matrix: np.ndarray, n_sites: int, keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor whose position is not in ``keep`` (unnormalized)."""
    keep = sorted(keep)
    traced = [i for i in range(n_sites) if i not in keep]
    t = matrix.reshape((SITE_DIM,) * (2 * n_sites))
    order = keep + traced
    t = t.transpose(order + [i + n_sites for i in order])
    dk, dt = SITE_DIM ** len(keep), SITE_DIM ** len(traced)
    t = t.reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def conditional_expectation(A: Observable, keep: Sequence, volume: Sequence | None = None) -> Observable:
    """Normalized partial trace of A (embedded in ``volume``) onto the sites in ``keep``."""
    volume = A.sites if volume is None else _sites(volume)
    keep = _sites(keep)
    if not set(keep) <= set(volume):
        raise AlgebraError("keep set must be a subset of the volume")
    full = embed(A, volume)
    pos = [volume.index(s) for s in keep]
    traced_dim = SITE_DIM ** (len(volume) - len(keep))
    m = partial_trace(full.matrix, len(volume), pos) / traced_dim
    return Observable(m, keep)


def random_hermitian(sites, rng: np.random.Generator, normalize: bool = True) -> Observable:
    sites = _sites(sites)
    d = SITE_DIM ** len(sites)
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = 0.5 * (g + g.conj().T)
    if normalize:
        h /= np.abs(np.linalg.eigvalsh(h)).max()
    return Observable(h, sites)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
