"""Dense Hermitian linear algebra: spectral decomposition and functional calculus.

All higher modules express entropies, tests and observables through
:class:`HermitianOperator`. Eigenvalues closer than a relative cluster
tolerance are merged, so spectral projections stay well defined under
(numerically) degenerate spectra.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_CLUSTER_TOL = 1e-10
HERMITIAN_TOL = 1e-12


class NonHermitianError(ValueError):
    """Raised when a matrix is too far from Hermitian to be symmetrized."""


class FunctionalCalculusError(ValueError):
    """Raised when a scalar map is not finite on the spectrum."""


@dataclass(frozen=True)
class SpectralDecomposition:
    """Clustered spectral resolution ``A = sum_i eigenvalues[i] * P_i``.

    Projectors are not stored; they are assembled on demand from the
    eigenvector blocks so that large operators stay cheap.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    blocks: tuple[slice, ...]

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def projector(self, i: int) -> np.ndarray:
        v = self.vectors[:, self.blocks[i]]
        return v @ v.conj().T

    @property
    def projectors(self) -> list[np.ndarray]:
        return [self.projector(i) for i in range(len(self))]

    @property
    def ranks(self) -> np.ndarray:
        return np.array([b.stop - b.start for b in self.blocks])

    def expanded_eigenvalues(self) -> np.ndarray:
        """Clustered eigenvalue attached to each eigenvector column."""
        return np.repeat(self.eigenvalues, self.ranks)

    def reconstruct(self) -> np.ndarray:
        w = self.expanded_eigenvalues()
        return (self.vectors * w) @ self.vectors.conj().T


class HermitianOperator:
    """Immutable dense Hermitian matrix with a lazily cached eigendecomposition.

    Input whose anti-Hermitian part is below ``HERMITIAN_TOL * ||A||`` is
    symmetrized; anything worse raises :class:`NonHermitianError`.
    """

    __slots__ = ("_matrix", "_eigh", "_lock")

    def __init__(self, entries, *, tol: float = HERMITIAN_TOL):
        if isinstance(entries, HermitianOperator):
            m = entries.matrix
        else:
            m = np.array(entries, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"expected a square matrix, got shape {m.shape}")
            scale = max(1.0, float(np.abs(m).max())) if m.size else 1.0
            defect = float(np.abs(m - m.conj().T).max()) if m.size else 0.0
            if defect > tol * scale:
                raise NonHermitianError(
                    f"matrix is not Hermitian: max |A - A*| = {defect:.3e} "
                    f"(tolerance {tol * scale:.3e})"
                )
            m = (m + m.conj().T) / 2
        m.setflags(write=False)
        self._matrix = m
        self._eigh = None
        self._lock = threading.Lock()

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def norm(self) -> float:
        """Operator norm (largest |eigenvalue|)."""
        w, _ = self.eigh()
        return float(np.abs(w).max()) if w.size else 0.0

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eigh is None:
            with self._lock:
                if self._eigh is None:
                    w, v = np.linalg.eigh(self._matrix)
                    w.setflags(write=False)
                    v.setflags(write=False)
                    self._eigh = (w, v)
        return self._eigh

    def is_real(self, tol: float = 1e-10) -> bool:
        return bool(np.abs(self._matrix.imag).max(initial=0.0) <= tol)

    def trace(self) -> float:
        return float(np.trace(self._matrix).real)

    def expect(self, other) -> float:
        """``Tr(self @ other)`` for Hermitian ``other``; real by construction."""
        b = other.matrix if isinstance(other, HermitianOperator) else np.asarray(other)
        return float(np.einsum("ij,ji->", self._matrix, b).real)

    def conjugate_by(self, u: np.ndarray) -> "HermitianOperator":
        """``U A U*`` for unitary ``U``."""
        return HermitianOperator(u @ self._matrix @ u.conj().T)

    def __add__(self, other):
        if isinstance(other, HermitianOperator):
            return HermitianOperator(self._matrix + other.matrix)
        return HermitianOperator(self._matrix + other * np.eye(self.dim))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, HermitianOperator):
            return HermitianOperator(self._matrix - other.matrix)
        return HermitianOperator(self._matrix - other * np.eye(self.dim))

    def __neg__(self):
        return HermitianOperator(-self._matrix)

    def __mul__(self, c):
        c = float(c)
        return HermitianOperator(c * self._matrix)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / float(c))

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim})"


def as_operator(a) -> HermitianOperator:
    if isinstance(a, HermitianOperator):
        return a
    if hasattr(a, "op") and isinstance(a.op, HermitianOperator):
        return a.op
    return HermitianOperator(a)


def _cluster_bounds(w: np.ndarray, tol: float) -> list[slice]:
    if w.size == 0:
        return []
    cuts = np.flatnonzero(np.diff(w) > tol) + 1
    edges = np.concatenate([[0], cuts, [w.size]])
    return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]


def decompose(a, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> SpectralDecomposition:
    """Spectral decomposition with eigenvalue clustering.

    Eigenvalues within ``cluster_tol * max(1, ||A||)`` of their neighbour
    are merged into one cluster whose eigenvalue is the mean of its members.
    """
    if cluster_tol <= 0:
        raise ValueError("cluster_tol must be positive")
    op = as_operator(a)
    w, v = op.eigh()
    tol = cluster_tol * max(1.0, op.norm())
    blocks = tuple(_cluster_bounds(w, tol))
    vals = np.array([w[b].mean() for b in blocks])
    return SpectralDecomposition(vals, v, blocks)


def apply_function(
    a,
    f: Callable[[np.ndarray], np.ndarray],
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> HermitianOperator:
    """Functional calculus ``f(A) = sum_i f(lambda_i) P_i``.

    ``f`` is called once with the array of clustered eigenvalues.
    """
    dec = decompose(a, cluster_tol)
    with np.errstate(all="ignore"):
        fv = np.asarray(f(dec.eigenvalues), dtype=float)
    bad = ~np.isfinite(fv)
    if bad.any():
        lam = dec.eigenvalues[np.argmax(bad)]
        raise FunctionalCalculusError(f"function is not finite at eigenvalue {lam!r}")
    fw = np.repeat(fv, dec.ranks)
    return HermitianOperator((dec.vectors * fw) @ dec.vectors.conj().T)


def _spectral_part(a, keep: Callable[[np.ndarray], np.ndarray], cluster_tol: float):
    dec = decompose(a, cluster_tol)
    zero_tol = cluster_tol * max(1.0, as_operator(a).norm())
    lam = dec.eigenvalues.copy()
    lam[np.abs(lam) <= zero_tol] = 0.0
    fw = np.repeat(keep(lam), dec.ranks)
    return HermitianOperator((dec.vectors * fw) @ dec.vectors.conj().T)


def positive_part(a, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> HermitianOperator:
    return _spectral_part(a, lambda x: np.where(x > 0, x, 0.0), cluster_tol)


def negative_part(a, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> HermitianOperator:
    """``A_-`` with ``A = A_+ - A_-`` and ``A_- >= 0``."""
    return _spectral_part(a, lambda x: np.where(x < 0, -x, 0.0), cluster_tol)


def abs_part(a, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> HermitianOperator:
    return _spectral_part(a, np.abs, cluster_tol)


def support(a, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> HermitianOperator:
    """Projection onto the range of ``A``; eigenvalues in the zero cluster are dropped."""
    return _spectral_part(a, lambda x: (x != 0).astype(float), cluster_tol)


def trace_norm(a) -> float:
    w, _ = as_operator(a).eigh()
    return float(np.abs(w).sum())


def kron(a, b) -> HermitianOperator:
    return HermitianOperator(np.kron(as_operator(a).matrix, as_operator(b).matrix))


def kron_all(ops: Sequence) -> HermitianOperator:
    m = np.ones((1, 1), dtype=complex)
    for op in ops:
        m = np.kron(m, as_operator(op).matrix)
    return HermitianOperator(m)


def embed(op, dims: Sequence[int], position: int) -> HermitianOperator:
    """Place ``op`` on tensor factor ``position`` of a product space with factor ``dims``."""
    mats = [np.eye(d) for d in dims]
    mats[position] = as_operator(op).matrix
    return kron_all(mats)


def commutator(a, b) -> np.ndarray:
    x = a.matrix if isinstance(a, HermitianOperator) else np.asarray(a)
    y = b.matrix if isinstance(b, HermitianOperator) else np.asarray(b)
    return x @ y - y @ x


def unitary_group(h, t: float) -> np.ndarray:
    """``exp(-i t H)`` assembled from the eigendecomposition of ``H``."""
    w, v = as_operator(h).eigh()
    return (v * np.exp(-1j * t * w)) @ v.conj().T


# -- matrix JSON ------------------------------------------------------------

def matrix_to_dict(a) -> dict:
    m = as_operator(a).matrix if not isinstance(a, np.ndarray) else np.asarray(a, dtype=complex)
    flat = m.reshape(-1)
    return {
        "dim": int(m.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_dict(d: dict) -> np.ndarray:
    n = int(d["dim"])
    entries = d["entries"]
    if len(entries) != n * n:
        raise ValueError(f"matrix JSON: expected {n * n} entries, got {len(entries)}")
    flat = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return flat.reshape(n, n)


def dumps_matrix(a) -> str:
    return json.dumps(matrix_to_dict(a))


def loads_matrix(s: str) -> HermitianOperator:
    return HermitianOperator(matrix_from_dict(json.loads(s)))
