"""Positive functionals, relative and Rényi entropies, relative modular spectral measures."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .operators import (
    DEFAULT_CLUSTER_TOL,
    HermitianOperator,
    as_operator,
    decompose,
    matrix_from_dict,
    matrix_to_dict,
)

FAITHFUL_TOL = 1e-12
ORDER_TOL = 1e-12
ATOM_DROP = 1e-14


class NotFaithfulError(ValueError):
    pass


class OrderingError(ValueError):
    pass


class PositiveFunctional:
    """Faithful positive functional ``A -> Tr(op A)``.

    Eigenvalues of ``op`` inside ``[-1e-12 ||op||, 1e-12 ||op||]`` (or below)
    are rejected rather than clipped.
    """

    __slots__ = ("op",)

    def __init__(self, op):
        op = as_operator(op)
        w, _ = op.eigh()
        scale = op.norm()
        if w.size == 0 or w.min() <= FAITHFUL_TOL * scale:
            raise NotFaithfulError(
                f"functional is not faithful: smallest eigenvalue {w.min():.3e}"
            )
        self.op = op

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def mass(self) -> float:
        """``nu(1) = Tr nu``."""
        return self.op.trace()

    def __call__(self, a) -> float:
        return self.op.expect(a)

    @property
    def faithful(self) -> bool:
        return True

    def log(self) -> HermitianOperator:
        w, v = self.op.eigh()
        return HermitianOperator((v * np.log(w)) @ v.conj().T)

    def power(self, s: float) -> HermitianOperator:
        w, v = self.op.eigh()
        return HermitianOperator((v * w**s) @ v.conj().T)

    def to_dict(self) -> dict:
        d = matrix_to_dict(self.op)
        d["faithful"] = True
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PositiveFunctional":
        return cls(matrix_from_dict(d))

    def __repr__(self) -> str:
        return f"PositiveFunctional(dim={self.dim}, mass={self.mass:.6g})"


def as_functional(x) -> PositiveFunctional:
    return x if isinstance(x, PositiveFunctional) else PositiveFunctional(x)


def dumps_functional(nu) -> str:
    return json.dumps(as_functional(nu).to_dict())


def loads_functional(s: str) -> PositiveFunctional:
    return PositiveFunctional.from_dict(json.loads(s))


@dataclass(frozen=True)
class SpectralMeasure:
    """Finite atomic measure on the real line, atoms strictly ascending."""

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.locations.shape != self.weights.shape:
            raise ValueError("locations and weights must have the same shape")
        if np.any(np.diff(self.locations) <= 0):
            raise ValueError("atom locations must be strictly ascending")
        if np.any(self.weights < 0):
            raise ValueError("atom weights must be non-negative")

    @classmethod
    def from_atoms(cls, x, w, merge_tol: float = 0.0, drop_tol: float = 0.0) -> "SpectralMeasure":
        """Sort atoms and merge those whose locations differ by at most ``merge_tol``.

        A merged atom sits at the weight-averaged location (plain mean when the
        cluster carries zero weight). Merged atoms of weight ``<= drop_tol`` are
        discarded.
        """
        x = np.asarray(x, dtype=float).ravel()
        w = np.asarray(w, dtype=float).ravel()
        order = np.argsort(x, kind="stable")
        x, w = x[order], w[order]
        if x.size == 0:
            return cls(x, w)
        cuts = np.flatnonzero(np.diff(x) > merge_tol) + 1
        edges = np.concatenate([[0], cuts, [x.size]])
        locs, wts = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            wt = w[a:b].sum()
            loc = (x[a:b] * w[a:b]).sum() / wt if wt > 0 else x[a:b].mean()
            locs.append(loc)
            wts.append(wt)
        locs, wts = np.array(locs), np.array(wts)
        keep = wts > drop_tol
        locs, wts = locs[keep], wts[keep]
        # weighted means can reorder neighbours only beyond merge_tol; guard anyway
        order = np.argsort(locs, kind="stable")
        return cls(locs[order], wts[order])

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return self.locations.size

    def laplace(self, s: float) -> float:
        """``int exp(-s x) dmu(x)``."""
        return float(np.sum(self.weights * np.exp(-s * self.locations)))

    def log_laplace(self, s: float) -> float:
        from scipy.special import logsumexp

        pos = self.weights > 0
        return float(logsumexp(-s * self.locations[pos], b=self.weights[pos]))

    def moment(self, k: int) -> float:
        return float(np.sum(self.weights * self.locations**k))

    def mean(self) -> float:
        return self.moment(1) / self.mass

    def variance(self) -> float:
        m = self.mean()
        return float(np.sum(self.weights * (self.locations - m) ** 2)) / self.mass

    def rescaled(self, c: float) -> "SpectralMeasure":
        """Push-forward under ``x -> c x`` (``c > 0``)."""
        if c <= 0:
            raise ValueError("rescaling factor must be positive")
        return SpectralMeasure(self.locations * c, self.weights.copy())

    def reflected(self) -> "SpectralMeasure":
        """Push-forward under ``x -> -x``."""
        return SpectralMeasure(-self.locations[::-1], self.weights[::-1].copy())

    def tilted(self, c: float) -> "SpectralMeasure":
        """Reweight by ``exp(c x)``."""
        return SpectralMeasure(self.locations.copy(), self.weights * np.exp(c * self.locations))

    def prob(self, lo: float = -np.inf, hi: float = np.inf) -> float:
        """Mass of the open interval ``]lo, hi[``."""
        sel = (self.locations > lo) & (self.locations < hi)
        return float(self.weights[sel].sum())


def relative_entropy(nu, omega) -> float:
    """``Ent(nu|omega) = Tr nu (log omega - log nu)``; non-positive for states."""
    nu, omega = as_functional(nu), as_functional(omega)
    return nu.op.expect(omega.log().matrix - nu.log().matrix)


def _scaled_power(f: PositiveFunctional, s: float) -> tuple[np.ndarray, float]:
    """``f**s = exp(shift) * M`` with the largest eigenvalue of ``M`` equal to one."""
    w, v = f.op.eigh()
    lw = s * np.log(w)
    shift = float(lw.max())
    return (v * np.exp(lw - shift)) @ v.conj().T, shift


def renyi_relative_entropy(nu, omega, s: float) -> float:
    """``Ent_s(nu|omega) = log Tr nu^s omega^(1-s)`` (natural log, any real ``s``).

    Powers are formed with their largest eigenvalue factored out, so the
    result stays finite wherever the exact value is.
    """
    nu, omega = as_functional(nu), as_functional(omega)
    a, sa = _scaled_power(nu, s)
    b, sb = _scaled_power(omega, 1.0 - s)
    tr = float(np.einsum("ij,ji->", a, b).real)
    if tr <= 0:
        return -np.inf
    return float(np.log(tr) + sa + sb)


def overlap_table(nu, omega, cluster_tol: float = DEFAULT_CLUSTER_TOL):
    """Spectra of both functionals and the matrix ``Tr P_lambda(nu) P_mu(omega)``."""
    nu, omega = as_functional(nu), as_functional(omega)
    dn = decompose(nu.op, cluster_tol)
    do = decompose(omega.op, cluster_tol)
    o = np.abs(dn.vectors.conj().T @ do.vectors) ** 2
    # sum the eigenvector overlaps over each pair of clustered blocks
    rows = np.add.reduceat(o, [b.start for b in dn.blocks], axis=0)
    table = np.add.reduceat(rows, [b.start for b in do.blocks], axis=1)
    return dn.eigenvalues, do.eigenvalues, table


def modular_spectral_measure(nu, omega, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> SpectralMeasure:
    """Spectral measure of ``-log Delta_{nu|omega}`` in the vector ``omega^(1/2)``.

    Atoms sit at ``-log(lambda/mu)`` with weight ``mu Tr P_lambda(nu) P_mu(omega)``;
    atoms that coincide within ``cluster_tol * max(1, max|x|)`` are merged and
    atoms lighter than ``ATOM_DROP * omega(1)`` (orthogonal blocks) are dropped.
    """
    lam, mu, table = overlap_table(nu, omega, cluster_tol)
    x = -(np.log(lam)[:, None] - np.log(mu)[None, :])
    w = mu[None, :] * table
    scale = max(1.0, float(np.abs(x).max()))
    return SpectralMeasure.from_atoms(x, w, merge_tol=cluster_tol * scale,
                                      drop_tol=ATOM_DROP * float(mu @ table.sum(axis=0)))


def check_ordered(big, small, label: str, tol: float = ORDER_TOL) -> None:
    d = as_operator(big).matrix - as_operator(small).matrix
    m = float(np.linalg.eigvalsh(d).min())
    if m < -tol:
        raise OrderingError(f"{label}: expected second <= first, min eigenvalue of difference {m:.3e}")


def monotonicity_gap(nu1, nu2, omega1, omega2, s: float) -> float:
    """``Tr (nu1^s - nu2^s) omega1^(1-s) - Tr (nu1^s - nu2^s) omega2^(1-s)``.

    Requires ``nu2 <= nu1`` and ``omega2 <= omega1``; the gap is then
    non-negative for ``s`` in ``[0, 1]``.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    nu1, nu2, omega1, omega2 = map(as_functional, (nu1, nu2, omega1, omega2))
    check_ordered(nu1.op, nu2.op, "(nu1, nu2)")
    check_ordered(omega1.op, omega2.op, "(omega1, omega2)")
    d = nu1.power(s).matrix - nu2.power(s).matrix
    return omega1.power(1 - s).expect(d) - omega2.power(1 - s).expect(d)
