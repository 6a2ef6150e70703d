"""Reproducible random instances for property suites.

Every generator is a counter-based Philox stream keyed by an explicit seed,
so the same seed gives the same instances on every platform.

* random Hermitian: ``(G + G*)/2`` with ``G`` complex Gaussian
* random positive: ``G* G + eps`` with ``eps = 1e-3``
* random state: random positive divided by its trace
"""

from __future__ import annotations

import numpy as np

POSITIVE_SHIFT = 1e-3


def rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def ginibre(gen: np.random.Generator, n: int, real: bool = False) -> np.ndarray:
    g = gen.standard_normal((n, n))
    if real:
        return g
    return g + 1j * gen.standard_normal((n, n))


def random_hermitian(gen: np.random.Generator, n: int, real: bool = False) -> np.ndarray:
    g = ginibre(gen, n, real)
    return (g + g.conj().T) / 2


def random_positive(
    gen: np.random.Generator, n: int, real: bool = False, eps: float = POSITIVE_SHIFT
) -> np.ndarray:
    g = ginibre(gen, n, real)
    return g.conj().T @ g + eps * np.eye(n)


def random_state(gen: np.random.Generator, n: int, real: bool = False) -> np.ndarray:
    p = random_positive(gen, n, real)
    return p / np.trace(p).real


def random_unitary(gen: np.random.Generator, n: int) -> np.ndarray:
    """Haar unitary from the QR decomposition of a Ginibre matrix."""
    q, r = np.linalg.qr(ginibre(gen, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(gen: np.random.Generator, n: int, margin: float = 0.05) -> np.ndarray:
    """One-particle density with spectrum inside ``[margin, 1 - margin]``."""
    u = random_unitary(gen, n)
    w = gen.uniform(margin, 1 - margin, size=n)
    return (u * w) @ u.conj().T


def random_diagonal_pair(gen: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Commuting pair of faithful states, diagonal in a random common basis."""
    u = random_unitary(gen, n)
    a = gen.uniform(0.05, 1.0, size=n)
    b = gen.uniform(0.05, 1.0, size=n)
    a, b = a / a.sum(), b / b.sum()
    return (u * a) @ u.conj().T, (u * b) @ u.conj().T


def random_open_spec(gen: np.random.Generator, sample_dim: int = 2, reservoir_dims=(2, 2),
                     betas=(1.0, 2.0), mus=None, coupling: float = 0.5, real: bool = True):
    """Small sample coupled to reservoirs with diagonal ``H_j`` and integer-valued ``N_j``."""
    from .fcs import OpenSystemSpec, Reservoir

    mus = (0.0,) * len(reservoir_dims) if mus is None else mus
    res = []
    for d, b, m in zip(reservoir_dims, betas, mus):
        h = np.diag(np.sort(gen.uniform(-1.0, 1.0, size=d)))
        n = np.diag(np.arange(d, dtype=float))
        res.append(Reservoir(h, n, float(b), float(m)))
    h_s = random_hermitian(gen, sample_dim, real)
    cs = [coupling * random_hermitian(gen, sample_dim * d, real) for d in reservoir_dims]
    return OpenSystemSpec(h_s, tuple(res), tuple(cs))
