"""Finite quantum dynamical systems: entropy production and full counting statistics.

Time evolution is exact: ``exp(-itH)`` is assembled from the eigendecomposition
of ``H``. The full counting statistics (FCS) is the law of ``(alpha' - alpha)/t``
where ``alpha``, ``alpha'`` are outcomes of two measurements of the entropy
observable ``S = -log omega`` at times ``0`` and ``t``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import quad

from . import testing
from .operators import (
    HermitianOperator,
    as_operator,
    commutator,
    decompose,
    embed,
    kron_all,
    matrix_from_dict,
    matrix_to_dict,
    unitary_group,
)
from .qstate import (
    PositiveFunctional,
    SpectralMeasure,
    ATOM_DROP,
    as_functional,
    modular_spectral_measure,
    relative_entropy,
    renyi_relative_entropy,
)

log = logging.getLogger(__name__)

WEIGHT_CLIP = 1e-12
COMMUTE_TOL = 1e-10
QUAD_TOL = 1e-8


class NegativeWeightError(ArithmeticError):
    pass


class CommutationError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteSystem:
    """Hamiltonian ``H`` and faithful initial state ``omega``.

    ``tri_basis`` (a unitary whose columns form the claimed basis) marks the
    system as time-reversal invariant; both ``H`` and ``omega`` must then be
    real in that basis.
    """

    H: HermitianOperator
    omega: PositiveFunctional
    tri_basis: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "H", as_operator(self.H))
        object.__setattr__(self, "omega", as_functional(self.omega))
        if self.H.dim != self.omega.dim:
            raise ValueError("H and omega act on spaces of different dimension")
        if abs(self.omega.mass - 1.0) > 1e-10:
            raise ValueError(f"omega must be a state, trace is {self.omega.mass}")
        if self.tri_basis is not None:
            u = np.asarray(self.tri_basis, dtype=complex)
            for name, op in (("H", self.H), ("omega", self.omega.op)):
                m = u.conj().T @ op.matrix @ u
                if np.abs(m.imag).max() > 1e-10:
                    raise ValueError(f"{name} is not real in the supplied TRI basis")
            object.__setattr__(self, "tri_basis", u)

    @property
    def dim(self) -> int:
        return self.H.dim

    @property
    def is_tri(self) -> bool:
        return self.tri_basis is not None


def evolve(sys: FiniteSystem, t: float) -> PositiveFunctional:
    """``omega_t = exp(-itH) omega exp(itH)``."""
    u = unitary_group(sys.H, t)
    return PositiveFunctional(sys.omega.op.conjugate_by(u))


def evolve_observable(sys: FiniteSystem, a, t: float) -> HermitianOperator:
    """Heisenberg picture ``A_t = exp(itH) A exp(-itH)``."""
    u = unitary_group(sys.H, -t)
    return as_operator(a).conjugate_by(u)


def entropy_observable(sys: FiniteSystem) -> HermitianOperator:
    """``S = -log omega``."""
    return -sys.omega.log()


def entropy_production_observable(sys: FiniteSystem) -> HermitianOperator:
    """``sigma = -i [H, log omega]``."""
    return HermitianOperator(-1j * commutator(sys.H, sys.omega.log()))


def time_reversal(sys: FiniteSystem, a) -> HermitianOperator:
    """Anti-unitary conjugation ``Theta(A)`` in the TRI basis."""
    if sys.tri_basis is None:
        raise ValueError("system carries no TRI basis")
    u = sys.tri_basis
    m = u.conj().T @ as_operator(a).matrix @ u
    return HermitianOperator(u @ m.conj() @ u.conj().T)


def mean_entropy_production_observable(sys: FiniteSystem, t: float) -> HermitianOperator:
    """``Sigma^t = (S_t - S)/t`` with ``S_t = -log omega_{-t}``."""
    s_t = -evolve(sys, -t).log()
    return (s_t - entropy_observable(sys)) / t


def mean_entropy_production(sys: FiniteSystem, t: float) -> float:
    """``omega(Sigma^t)``; equals ``-Ent(omega_t|omega)/t >= 0``."""
    if t <= 0:
        raise ValueError("t must be positive")
    return sys.omega(mean_entropy_production_observable(sys, t))


def entropy_balance(sys: FiniteSystem, t: float) -> float:
    """Right-hand side of the balance equation, ``-Ent(omega_t|omega)/t``."""
    return -relative_entropy(evolve(sys, t), sys.omega) / t


@dataclass(frozen=True)
class FcsDistribution:
    t: float
    measure: SpectralMeasure

    @property
    def phi(self) -> np.ndarray:
        return self.measure.locations

    @property
    def weights(self) -> np.ndarray:
        return self.measure.weights

    def mean(self) -> float:
        return self.measure.mean()

    def variance(self) -> float:
        return self.measure.variance()

    def cgf(self, s: float) -> float:
        """``log int exp(-s t phi) dP_t(phi)``, which equals ``e_t(1 - s)``."""
        return self.measure.log_laplace(s * self.t)


def _clip_weights(w: np.ndarray, what: str) -> np.ndarray:
    worst = float(w.min(initial=0.0))
    if worst < -WEIGHT_CLIP:
        raise NegativeWeightError(f"{what}: negative joint weight {worst:.3e}")
    return np.where(w < 0, 0.0, w)


def _two_time_weights(u: np.ndarray, omega: np.ndarray, vecs: np.ndarray, blocks) -> np.ndarray:
    """``W[a, b] = Tr(U P_a omega P_a U* P_b)`` for the block projections ``P``.

    Using ``P_a omega P_a`` (the post-measurement state) keeps every weight a
    sum of squared moduli; it coincides with ``omega P_a`` whenever ``omega``
    commutes with the measured observable.
    """
    starts = [b.start for b in blocks]
    # rotate into the measurement eigenbasis
    om = vecs.conj().T @ omega @ vecs
    ut = vecs.conj().T @ u @ vecs
    k = len(blocks)
    w = np.empty((k, k))
    for a, ba in enumerate(blocks):
        rho = ut[:, ba] @ om[ba, ba] @ ut[:, ba].conj().T  # U P_a omega P_a U*
        diag = np.real(np.diag(rho))
        w[a] = np.add.reduceat(diag, starts)
    return w


def fcs_distribution(sys: FiniteSystem, t: float) -> FcsDistribution:
    """Full counting statistics of the entropy observable over ``[0, t]``."""
    if t <= 0:
        raise ValueError("t must be positive")
    s_obs = entropy_observable(sys)
    dec = decompose(s_obs)
    u = unitary_group(sys.H, t)
    w = _two_time_weights(u, sys.omega.op.matrix, dec.vectors, dec.blocks)
    w = _clip_weights(w, "fcs_distribution")
    alpha = dec.eigenvalues
    phi = (alpha[None, :] - alpha[:, None]) / t
    tot = w.sum()
    if abs(tot - 1.0) > 1e-10:
        log.warning("FCS mass deviates from 1 by %.3e before normalization", tot - 1.0)
    w = w / tot
    scale = max(1.0, float(np.abs(phi).max()))
    return FcsDistribution(t, SpectralMeasure.from_atoms(phi, w, merge_tol=1e-10 * scale,
                                                         drop_tol=ATOM_DROP))


def fcs_from_modular(sys: FiniteSystem, t: float) -> SpectralMeasure:
    """``P_t`` as the spectral measure of ``-(1/t) log Delta_{omega_{-t}|omega}``."""
    mu = modular_spectral_measure(evolve(sys, -t), sys.omega)
    return mu.rescaled(1.0 / t)


def renyi_functional(sys: FiniteSystem, t: float, s: float) -> float:
    """``e_t(s) = Ent_s(omega_t|omega)``."""
    if t == 0:
        return renyi_relative_entropy(sys.omega, sys.omega, s)
    return renyi_relative_entropy(evolve(sys, t), sys.omega, s)


def renyi_table(sys: FiniteSystem, t_list: Sequence[float], s_grid: Sequence[float]) -> np.ndarray:
    out = np.empty((len(t_list), len(s_grid)))
    for i, t in enumerate(t_list):
        wt = evolve(sys, t)
        for j, s in enumerate(s_grid):
            out[i, j] = renyi_relative_entropy(wt, sys.omega, s)
    return out


# -- open systems -------------------------------------------------------------


@dataclass(frozen=True)
class Reservoir:
    H: HermitianOperator
    N: HermitianOperator
    beta: float
    mu: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "H", as_operator(self.H))
        object.__setattr__(self, "N", as_operator(self.N))
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.H.dim != self.N.dim:
            raise ValueError("reservoir H and N have different dimensions")
        c = np.abs(commutator(self.H, self.N)).max(initial=0.0)
        if c > COMMUTE_TOL:
            raise CommutationError(f"[H_j, N_j] != 0 (max entry {c:.3e})")

    @property
    def dim(self) -> int:
        return self.H.dim

    def generator(self) -> HermitianOperator:
        """``beta (H - mu N)``."""
        return (self.H - self.N * self.mu) * self.beta

    def log_partition(self) -> float:
        w, _ = self.generator().eigh()
        from scipy.special import logsumexp

        return float(logsumexp(-w))

    def gibbs(self) -> np.ndarray:
        w, v = self.generator().eigh()
        p = np.exp(-(w - w.min()))
        p /= p.sum()
        return (v * p) @ v.conj().T


@dataclass(frozen=True)
class OpenSystemSpec:
    """Small system coupled to thermal reservoirs.

    ``couplings[j]`` acts on ``sample (x) reservoir_j`` (sample factor first).
    Tensor order of the full space is ``sample, reservoir_1, ..., reservoir_n``.
    """

    H_S: HermitianOperator
    reservoirs: tuple[Reservoir, ...]
    couplings: tuple[HermitianOperator, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "H_S", as_operator(self.H_S))
        object.__setattr__(self, "reservoirs", tuple(self.reservoirs))
        cs = tuple(as_operator(v) for v in self.couplings)
        if cs and len(cs) != len(self.reservoirs):
            raise ValueError("need one coupling per reservoir")
        for j, (v, r) in enumerate(zip(cs, self.reservoirs)):
            if v.dim != self.H_S.dim * r.dim:
                raise ValueError(
                    f"coupling {j} has dim {v.dim}, expected {self.H_S.dim} x {r.dim}"
                )
        object.__setattr__(self, "couplings", cs)

    @property
    def dims(self) -> list[int]:
        return [self.H_S.dim] + [r.dim for r in self.reservoirs]

    def lift_reservoir(self, j: int, a) -> HermitianOperator:
        return embed(a, self.dims, j + 1)

    def lift_coupling(self, j: int) -> HermitianOperator:
        """``V_j`` on the full space; it acts on factors 0 and ``j + 1``."""
        dims = self.dims
        v = self.couplings[j].matrix.reshape(dims[0], dims[j + 1], dims[0], dims[j + 1])
        rest = [d for k, d in enumerate(dims) if k not in (0, j + 1)]
        nrest = int(np.prod(rest)) if rest else 1
        full = np.einsum("aibj,xy->aixbjy", v, np.eye(nrest)).reshape(
            dims[0] * dims[j + 1] * nrest, -1
        )
        # full acts on (sample, reservoir_j, others); permute to the canonical order
        order = [0, j + 1] + [k for k in range(len(dims)) if k not in (0, j + 1)]
        perm = np.argsort(order)
        shape = [dims[k] for k in order]
        t = full.reshape(shape + shape)
        n = len(dims)
        t = t.transpose(list(perm) + [n + p for p in perm])
        d = int(np.prod(dims))
        return HermitianOperator(t.reshape(d, d))

    def coupling(self) -> HermitianOperator:
        d = int(np.prod(self.dims))
        v = HermitianOperator(np.zeros((d, d)))
        for j in range(len(self.couplings)):
            v = v + self.lift_coupling(j)
        return v


def build_open_system(spec: OpenSystemSpec) -> FiniteSystem:
    """``H = H_S + sum H_j + V`` and ``omega = (1/dim) (x) Gibbs_1 (x) ... (x) Gibbs_n``."""
    dims = spec.dims
    h = embed(spec.H_S, dims, 0)
    for j, r in enumerate(spec.reservoirs):
        h = h + spec.lift_reservoir(j, r.H)
    if spec.couplings:
        h = h + spec.coupling()
    omega = kron_all([np.eye(dims[0]) / dims[0]] + [r.gibbs() for r in spec.reservoirs])
    # real data in the product basis makes the standard basis a TRI basis
    tri = np.eye(h.dim) if h.is_real() and omega.is_real() else None
    return FiniteSystem(h, PositiveFunctional(omega), tri)


def open_entropy_observable(spec: OpenSystemSpec) -> HermitianOperator:
    """``S = sum beta_j (H_j - mu_j N_j) + sum log Z_j + log dim H_S``."""
    d = int(np.prod(spec.dims))
    s = HermitianOperator(np.zeros((d, d)))
    const = np.log(spec.dims[0])
    for j, r in enumerate(spec.reservoirs):
        s = s + spec.lift_reservoir(j, r.generator())
        const += r.log_partition()
    return s + const


def currents(spec: OpenSystemSpec) -> tuple[list[HermitianOperator], list[HermitianOperator]]:
    """Energy fluxes ``Phi_j = -i[V, H_j]`` and charge fluxes ``J_j = -i[V, N_j]``."""
    if not spec.couplings:
        d = int(np.prod(spec.dims))
        z = HermitianOperator(np.zeros((d, d)))
        return [z] * len(spec.reservoirs), [z] * len(spec.reservoirs)
    v = spec.coupling()
    phis, js = [], []
    for j, r in enumerate(spec.reservoirs):
        phis.append(HermitianOperator(-1j * commutator(v, spec.lift_reservoir(j, r.H))))
        js.append(HermitianOperator(-1j * commutator(v, spec.lift_reservoir(j, r.N))))
    return phis, js


def open_entropy_production(spec: OpenSystemSpec) -> HermitianOperator:
    """``sigma = -sum beta_j (Phi_j - mu_j J_j)``."""
    phis, js = currents(spec)
    d = int(np.prod(spec.dims))
    sigma = HermitianOperator(np.zeros((d, d)))
    for r, p, c in zip(spec.reservoirs, phis, js):
        sigma = sigma - (p - c * r.mu) * r.beta
    return sigma


def time_integral(sys: FiniteSystem, a, t: float, tol: float = QUAD_TOL) -> float:
    """``int_0^t omega(A_u) du`` by adaptive quadrature."""
    a = as_operator(a)
    w, v = sys.H.eigh()
    am = v.conj().T @ a.matrix @ v
    om = v.conj().T @ sys.omega.op.matrix @ v

    def integrand(u):
        ph = np.exp(1j * u * w)
        au = (ph[:, None] * am) * ph.conj()[None, :]
        return float(np.einsum("ij,ji->", om, au).real)

    val, _ = quad(integrand, 0.0, t, epsabs=tol, epsrel=tol, limit=200)
    return val


# -- joint (multi-observable) FCS -------------------------------------------------


def joint_eigenspaces(observables: Sequence, tol: float = 1e-10):
    """Common eigenbasis of a commuting family and the joint eigenvalue of each block.

    Returns ``(vectors, blocks, values)`` with ``values[b]`` the eigenvalue
    tuple on block ``b``. Blocks are refined one observable at a time.
    """
    ops = [as_operator(a) for a in observables]
    if not ops:
        raise ValueError("need at least one observable")
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            c = np.abs(commutator(ops[i], ops[j])).max(initial=0.0)
            if c > tol * max(1.0, ops[i].norm() * ops[j].norm()):
                raise CommutationError(f"observables {i} and {j} do not commute ({c:.3e})")
    d = ops[0].dim
    spaces = [(np.eye(d, dtype=complex), ())]
    for op in ops:
        new = []
        for basis, vals in spaces:
            restricted = basis.conj().T @ op.matrix @ basis
            dec = decompose(restricted, tol)
            for lam, blk in zip(dec.eigenvalues, dec.blocks):
                new.append((basis @ dec.vectors[:, blk], vals + (float(lam),)))
        spaces = new
    vecs = np.concatenate([b for b, _ in spaces], axis=1)
    blocks, start = [], 0
    for b, _ in spaces:
        blocks.append(slice(start, start + b.shape[1]))
        start += b.shape[1]
    values = np.array([v for _, v in spaces])
    return vecs, blocks, values


@dataclass(frozen=True)
class JointFcs:
    """Atomic probability measure on ``R^k``: rows of ``points`` with ``weights``."""

    t: float
    points: np.ndarray
    weights: np.ndarray

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    def covariance(self) -> np.ndarray:
        m = self.mean()
        x = self.points - m
        return (x * self.weights[:, None]).T @ x

    def marginal(self, k: int) -> SpectralMeasure:
        return SpectralMeasure.from_atoms(self.points[:, k], self.weights, merge_tol=1e-10)


def joint_fcs(sys: FiniteSystem, observables: Sequence, t: float) -> JointFcs:
    """Two-time measurement statistics of a commuting family, as ``(alpha' - alpha)/t``."""
    if t <= 0:
        raise ValueError("t must be positive")
    vecs, blocks, values = joint_eigenspaces(observables)
    u = unitary_group(sys.H, t)
    w = _two_time_weights(u, sys.omega.op.matrix, vecs, blocks)
    w = _clip_weights(w, "joint_fcs")
    w = w / w.sum()
    pts = (values[None, :, :] - values[:, None, :]) / t
    pts = pts.reshape(-1, values.shape[1])
    w = w.reshape(-1)
    keep = w > 0
    pts, w = pts[keep], w[keep]
    # merge coincident points
    key = np.round(pts / 1e-10).astype(np.int64)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    agg_w = np.bincount(inv, weights=w)
    agg_p = np.zeros((len(uniq), pts.shape[1]))
    np.add.at(agg_p, inv, pts * w[:, None])
    agg_p /= agg_w[:, None]
    return JointFcs(t, agg_p, agg_w)


def open_fcs_observables(spec: OpenSystemSpec) -> list[HermitianOperator]:
    """``(beta_1 H_1, ..., beta_n H_n, -beta_1 mu_1 N_1, ..., -beta_n mu_n N_n)``."""
    hs = [spec.lift_reservoir(j, r.H) * r.beta for j, r in enumerate(spec.reservoirs)]
    ns = [spec.lift_reservoir(j, r.N) * (-r.beta * r.mu) for j, r in enumerate(spec.reservoirs)]
    return hs + ns


# -- arrow of time ------------------------------------------------------------------


def arrow_min_error(sys: FiniteSystem, t: float) -> float:
    """Minimal total error ``D(omega_t, omega_{-t})`` for past/future discrimination."""
    _, d = testing.optimal_test(evolve(sys, t), evolve(sys, -t))
    return d


@dataclass(frozen=True)
class ArrowRow:
    t: float
    min_error: float
    min_error_shifted: float
    exponent: float
    lower_exponent: float
    upper_exponent: float
    chernoff_estimate: float


def arrow_exponent_estimate(sys: FiniteSystem, t_list: Sequence[float], s_grid=None) -> list[ArrowRow]:
    """Finite-time table of ``(1/2t) log D(omega_t, omega_{-t})`` and its bounds.

    ``lower_exponent`` and ``upper_exponent`` come from the modular lower
    bound and the best Chernoff upper bound on the grid, applied to
    ``(omega_{2t}, omega)``; ``chernoff_estimate`` is ``min_s e_{2t}(s) / 2t``.
    """
    if s_grid is None:
        s_grid = np.linspace(0.0, 1.0, 101)
    rows = []
    for t in t_list:
        d = arrow_min_error(sys, t)
        w2 = evolve(sys, 2 * t)
        _, d2 = testing.optimal_test(w2, sys.omega)
        lo = testing.modular_lower_bound(w2, sys.omega)
        ups = [testing.chernoff_upper_bound(w2, sys.omega, float(s)) for s in s_grid]
        e2 = [renyi_relative_entropy(w2, sys.omega, float(s)) for s in s_grid]
        rows.append(
            ArrowRow(
                t=float(t),
                min_error=d,
                min_error_shifted=d2,
                exponent=np.log(d) / (2 * t),
                lower_exponent=np.log(lo) / (2 * t),
                upper_exponent=np.log(min(ups)) / (2 * t),
                chernoff_estimate=min(e2) / (2 * t),
            )
        )
    return rows


# -- JSON -----------------------------------------------------------------------------


def system_to_dict(sys: FiniteSystem) -> dict:
    d = {"H": matrix_to_dict(sys.H.matrix), "omega": matrix_to_dict(sys.omega.op.matrix)}
    if sys.tri_basis is not None:
        u = sys.tri_basis
        d["tri_basis"] = {"dim": u.shape[0],
                          "entries": [[float(z.real), float(z.imag)] for z in u.ravel()]}
    return d


def system_from_dict(d: dict) -> FiniteSystem:
    """Accepts ``{H, omega, tri_basis?}``; ``tri_basis: true`` means the standard basis."""
    h = matrix_from_dict(d["H"])
    tri = d.get("tri_basis")
    if tri is True:
        tri = np.eye(h.shape[0])
    elif isinstance(tri, dict):
        n = int(tri["dim"])
        tri = np.array([complex(re, im) for re, im in tri["entries"]]).reshape(n, n)
    elif tri in (None, False):
        tri = None
    else:
        raise ValueError("tri_basis must be a matrix object or a boolean")
    return FiniteSystem(h, PositiveFunctional(matrix_from_dict(d["omega"])), tri)


def open_spec_to_dict(spec: OpenSystemSpec) -> dict:
    return {
        "H_S": matrix_to_dict(spec.H_S.matrix),
        "reservoirs": [
            {"H": matrix_to_dict(r.H.matrix), "N": matrix_to_dict(r.N.matrix),
             "beta": r.beta, "mu": r.mu}
            for r in spec.reservoirs
        ],
        "couplings": [matrix_to_dict(v.matrix) for v in spec.couplings],
    }


def open_spec_from_dict(d: dict) -> OpenSystemSpec:
    res = tuple(
        Reservoir(matrix_from_dict(r["H"]), matrix_from_dict(r["N"]), float(r["beta"]),
                  float(r.get("mu", 0.0)))
        for r in d["reservoirs"]
    )
    cs = tuple(matrix_from_dict(v) for v in d.get("couplings", []))
    return OpenSystemSpec(matrix_from_dict(d["H_S"]), res, cs)


def load_system(d: dict) -> tuple[FiniteSystem, OpenSystemSpec | None]:
    """Build a system from either JSON layout; open specs also return the spec."""
    if "reservoirs" in d:
        spec = open_spec_from_dict(d)
        return build_open_system(spec), spec
    return system_from_dict(d), None
