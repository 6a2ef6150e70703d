"""Gauge-invariant quasi-free fermionic states on finite one-particle spaces.

A density ``0 < T < 1`` on the one-particle space fixes the state through
``omega(a*(f) a(g)) = (g|Tf)``. Rényi entropies between two such states reduce
to one-particle determinants; :func:`fock_state` builds the many-body density
matrix explicitly and serves as an independent check for small dimensions.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad, quad_vec
from scipy.special import expit

from .operators import HermitianOperator, as_operator, unitary_group

DENSITY_MARGIN = 1e-8
QUAD_TOL = 1e-8
UNITARY_TOL = 1e-10
MAX_ONE_PARTICLE = 4096


class DensityRangeError(ValueError):
    pass


class ResonanceError(ArithmeticError):
    pass


def _eig_density(t, margin: float):
    op = as_operator(t)
    w, v = op.eigh()
    if w.min() <= margin or w.max() >= 1 - margin:
        raise DensityRangeError(
            f"density spectrum [{w.min():.3e}, {w.max():.3e}] leaves ({margin}, 1 - {margin})"
        )
    return w, v


def quasifree_renyi(a, b, s: float, margin: float = DENSITY_MARGIN) -> float:
    """``Ent_s`` between the quasi-free states with densities ``a`` and ``b``.

    With ``x = a (1-a)^-1`` and ``y = b (1-b)^-1``::

        s Tr log(1-a) + (1-s) Tr log(1-b) + log det(1 + x^(s/2) y^(1-s) x^(s/2))

    which is ``log Tr nu^s omega^(1-s)`` for the second-quantized states. For
    commuting densities it reduces to
    ``Tr log[a^s b^(1-s) + (1-a)^s (1-b)^(1-s)]``.
    """
    return _renyi_from_eig(*_eig_density(a, margin), *_eig_density(b, margin), s)


def _renyi_from_eig(wa, va, wb, vb, s: float) -> float:
    return _renyi_overlap(wa, wb, vb.conj().T @ va, s)


def _renyi_overlap(wa, wb, w, s: float) -> float:
    """Determinant formula in the eigenbasis of ``b``; ``w = V_b* V_a``.

    ``det(1 + x^(s/2) y^(1-s) x^(s/2)) = det(1 + g^(1/2) W f W* g^(1/2))`` with
    ``f = x^s`` and ``g = y^(1-s)`` on the respective spectra.
    """
    f = (wa / (1 - wa)) ** s
    g = np.sqrt((wb / (1 - wb)) ** (1 - s))
    k = (w * f) @ w.conj().T
    m = np.eye(len(wa)) + g[:, None] * k * g[None, :]
    m = (m + m.conj().T) / 2
    try:
        logdet = 2.0 * np.log(np.diag(np.linalg.cholesky(m)).real).sum()
    except np.linalg.LinAlgError:
        logdet = np.log(np.linalg.eigvalsh(m)).sum()
    return float(s * np.log1p(-wa).sum() + (1 - s) * np.log1p(-wb).sum() + logdet)


def quasifree_renyi_commuting(a, b, s: float) -> float:
    """Scalar-symbol form ``sum log[a^s b^(1-s) + (1-a)^s (1-b)^(1-s)]`` for commuting diagonal data."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.sum(np.log(a**s * b ** (1 - s) + (1 - a) ** s * (1 - b) ** (1 - s))))


def annihilators(n: int) -> list[np.ndarray]:
    """Jordan-Wigner matrices of ``a(e_1), ..., a(e_n)`` on the ``2^n`` Fock space."""
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    ops = []
    for j in range(n):
        m = np.ones((1, 1))
        for k in range(n):
            m = np.kron(m, z if k < j else (lower if k == j else np.eye(2)))
        ops.append(m)
    return ops


def second_quantize(k, ops: Sequence[np.ndarray] | None = None) -> np.ndarray:
    """``dGamma(K) = sum_ij K_ij a*(e_i) a(e_j)``."""
    k = np.asarray(as_operator(k).matrix)
    n = k.shape[0]
    ops = annihilators(n) if ops is None else ops
    out = np.zeros((2**n, 2**n), dtype=complex)
    for i in range(n):
        ci = ops[i].T
        for j in range(n):
            if k[i, j] != 0:
                out += k[i, j] * (ci @ ops[j])
    return out


def fock_state(t, margin: float = DENSITY_MARGIN) -> HermitianOperator:
    """Many-body density matrix ``exp(dGamma(log t(1-t)^-1)) / Z`` (dimension ``2^n``)."""
    w, v = _eig_density(t, margin)
    if len(w) > 10:
        raise ValueError("Fock construction is capped at 10 modes")
    k = (v * np.log(w / (1 - w))) @ v.conj().T
    g = HermitianOperator(second_quantize(k))
    ew, ev = g.eigh()
    p = np.exp(ew - ew.max())
    p /= p.sum()
    return HermitianOperator((ev * p) @ ev.conj().T)


def two_point(rho, n: int) -> np.ndarray:
    """``C[i, j] = Tr(rho a*(e_i) a(e_j))``; equals ``T[j, i]`` for a quasi-free state."""
    ops = annihilators(n)
    r = as_operator(rho).matrix
    return np.array([[np.trace(r @ ops[i].T @ ops[j]) for j in range(n)] for i in range(n)])


def fermi_dirac(h, beta: float, mu: float = 0.0) -> HermitianOperator:
    """``(1 + exp(beta (h - mu)))^-1`` via a stable logistic evaluation."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    w, v = as_operator(h).eigh()
    return HermitianOperator((v * expit(-beta * (w - mu))) @ v.conj().T)


# -- translation-invariant limits ----------------------------------------------------


def szego_limit(a_fn: Callable[[float], float], b_fn: Callable[[float], float], s: float,
                quad_tol: float = QUAD_TOL) -> float:
    """``int_0^{2pi} log[A^s B^(1-s) + (1-A)^s (1-B)^(1-s)] dk/2pi`` for scalar symbols."""

    def integrand(k):
        a, b = a_fn(k), b_fn(k)
        return np.log(a**s * b ** (1 - s) + (1 - a) ** s * (1 - b) ** (1 - s))

    val, err = quad(integrand, 0.0, 2 * np.pi, epsabs=quad_tol, epsrel=quad_tol, limit=500)
    if not np.isfinite(val) or err > 100 * max(quad_tol, quad_tol * abs(val)):
        raise ArithmeticError(f"quadrature did not converge (estimate {val}, error {err})")
    return val / (2 * np.pi)


def toeplitz_section(symbol: Callable[[np.ndarray], np.ndarray], n: int, samples: int = 1 << 14) -> np.ndarray:
    """``n x n`` compression to ``l^2({0..n-1})`` of multiplication by ``symbol(k)``.

    Fourier coefficients ``c_m = int symbol(k) e^{-imk} dk/2pi`` come from an FFT
    on ``samples`` equispaced nodes.
    """
    k = 2 * np.pi * np.arange(samples) / samples
    c = np.fft.fft(symbol(k)) / samples
    idx = np.arange(n)
    diff = (idx[:, None] - idx[None, :]) % samples
    return c[diff]


# -- electronic black box ---------------------------------------------------------------


def lead_dispersion(k):
    """``epsilon(k) = 1 - cos k`` of the half-line lead ``-Delta/2``."""
    return 1.0 - np.cos(k)


def lead_surface_green(k):
    """Boundary value ``<delta_0|(epsilon(k) + i0 - h_lead)^-1 delta_0> = -2 e^{ik}``."""
    return -2.0 * np.exp(1j * k)


@dataclass(frozen=True)
class EbbSpec:
    """Sample ``h_S`` coupled through unit vectors ``chi[j]`` to half-line leads."""

    h_S: np.ndarray
    chi: tuple[np.ndarray, ...]
    lam: float
    betas: tuple[float, ...]
    mus: tuple[float, ...] = ()

    def __post_init__(self):
        h = as_operator(self.h_S).matrix
        object.__setattr__(self, "h_S", np.array(h))
        chis = tuple(np.asarray(c, dtype=complex).ravel() for c in self.chi)
        for j, c in enumerate(chis):
            if c.size != h.shape[0]:
                raise ValueError(f"chi[{j}] has the wrong dimension")
            if abs(np.linalg.norm(c) - 1) > 1e-10:
                raise ValueError(f"chi[{j}] must have unit norm")
        object.__setattr__(self, "chi", chis)
        betas = tuple(float(b) for b in self.betas)
        mus = tuple(float(m) for m in self.mus) or (0.0,) * len(betas)
        if len(betas) != len(chis) or len(mus) != len(chis):
            raise ValueError("need one (beta, mu) per lead")
        if min(betas) <= 0:
            raise ValueError("betas must be positive")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "mus", mus)

    @property
    def n_leads(self) -> int:
        return len(self.chi)

    @property
    def is_real(self) -> bool:
        return bool(np.abs(self.h_S.imag).max(initial=0) < 1e-14
                    and all(np.abs(c.imag).max(initial=0) < 1e-14 for c in self.chi))

    def varsigma(self, k) -> np.ndarray:
        """Diagonal of ``varsigma(k)``: ``-beta_j (epsilon(k) - mu_j)``."""
        return -np.array(self.betas) * (lead_dispersion(k) - np.array(self.mus))

    def occupations(self, k) -> np.ndarray:
        """Lead Fermi-Dirac occupations ``rho_j(k)``."""
        return expit(self.varsigma(k))

    def to_dict(self) -> dict:
        from .operators import matrix_to_dict

        return {
            "h_S": matrix_to_dict(self.h_S),
            "chi": [[[float(z.real), float(z.imag)] for z in c] for c in self.chi],
            "lambda": self.lam,
            "betas": list(self.betas),
            "mus": list(self.mus),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EbbSpec":
        from .operators import matrix_from_dict

        chi = [np.array([complex(re, im) for re, im in c]) for c in d["chi"]]
        return cls(matrix_from_dict(d["h_S"]), tuple(chi), float(d["lambda"]),
                   tuple(d["betas"]), tuple(d.get("mus", ())))


def ebb_scattering(spec: EbbSpec, k: float) -> np.ndarray:
    """On-shell scattering matrix ``s(k)`` between the leads.

    ``s_ij(k) = delta_ij - 4 i lambda^2 sin(k) <chi_i|G(k)|chi_j>`` with the
    dressed sample resolvent
    ``G(k) = (epsilon(k) - h_S - lambda^2 g(k) sum_j |chi_j><chi_j|)^-1`` and
    ``g(k) = -2 e^{ik}`` the lead boundary Green function.
    """
    if spec.lam == 0:
        return np.eye(spec.n_leads, dtype=complex)
    if not 0 < k < np.pi:
        raise ValueError("k must lie in the open interval (0, pi)")
    chi = np.array(spec.chi).T  # columns chi_j
    eps = lead_dispersion(k)
    sigma = spec.lam**2 * lead_surface_green(k) * (chi @ chi.conj().T)
    m = eps * np.eye(spec.h_S.shape[0]) - spec.h_S - sigma
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > 1e13:
        raise ResonanceError(f"sample resolvent is singular at k={k}")
    g = np.linalg.solve(m, chi)
    return np.eye(spec.n_leads) - 4j * spec.lam**2 * np.sin(k) * (chi.conj().T @ g)


class ScatteringTable:
    """Tabulated ``s(k)``; interpolated entrywise and projected back onto the unitaries."""

    def __init__(self, k: np.ndarray, s: np.ndarray):
        self.k = np.asarray(k, dtype=float)
        self.s = np.asarray(s, dtype=complex)
        if self.s.ndim != 3 or self.s.shape[0] != self.k.size:
            raise ValueError("need one n x n matrix per k node")

    def __call__(self, k: float) -> np.ndarray:
        n = self.s.shape[1]
        flat = self.s.reshape(self.k.size, -1)
        re = np.array([np.interp(k, self.k, flat[:, i].real) for i in range(n * n)])
        im = np.array([np.interp(k, self.k, flat[:, i].imag) for i in range(n * n)])
        m = (re + 1j * im).reshape(n, n)
        u, _, vh = np.linalg.svd(m)
        return u @ vh

    @classmethod
    def from_function(cls, fn: Callable[[float], np.ndarray], k: np.ndarray) -> "ScatteringTable":
        return cls(k, np.array([fn(float(x)) for x in k]))

    def to_csv(self) -> str:
        n = self.s.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["k"]
        for i in range(n):
            for j in range(n):
                head += [f"re_{i}{j}", f"im_{i}{j}"]
        w.writerow(head)
        for k, m in zip(self.k, self.s):
            row = [f"{k:.17g}"]
            for z in m.ravel():
                row += [f"{z.real:.17g}", f"{z.imag:.17g}"]
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ScatteringTable":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        data = np.array([[float(x) for x in r] for r in rows[1:]])
        k = data[:, 0]
        vals = data[:, 1::2] + 1j * data[:, 2::2]
        n = int(round(np.sqrt(vals.shape[1])))
        return cls(k, vals.reshape(-1, n, n))


def _check_unitary(s: np.ndarray, k: float) -> None:
    err = np.abs(s @ s.conj().T - np.eye(s.shape[0])).max()
    if err > UNITARY_TOL:
        raise ValueError(f"scattering matrix not unitary at k={k}: defect {err:.3e}")


def _scattering_fn(spec: EbbSpec, scattering):
    if scattering is None:
        return lambda k: ebb_scattering(spec, k)
    return scattering


def ebb_e_integrand(spec: EbbSpec, s: float, smat: np.ndarray, k: float) -> float:
    """``log det(1 + T(k)(e^{-s vs} s(k) e^{s vs} s(k)* - 1))`` without the measure.

    Evaluated as ``log det T - s tr(vs) + log det(e^{-(1-s) vs} + s(k) e^{s vs} s(k)*)``;
    the last matrix is positive definite, so the logarithm is real.
    """
    vs = spec.varsigma(k)
    logdet_t = -np.sum(np.logaddexp(0.0, -vs))
    x = np.diag(np.exp(-(1 - s) * vs)) + (smat * np.exp(s * vs)) @ smat.conj().T
    x = (x + x.conj().T) / 2
    lx = np.linalg.eigvalsh(x)
    if lx.min() <= 0:
        raise ArithmeticError(f"determinant argument is not positive at k={k}")
    return float(logdet_t - s * vs.sum() + np.log(lx).sum())


def ebb_e(spec: EbbSpec, s: float, scattering=None, quad_tol: float = QUAD_TOL) -> float:
    """Large-time Rényi functional of the EBB model:
    ``int_0^pi log det(...) d epsilon(k) / 2pi`` with ``d epsilon = sin k dk``."""
    sfn = _scattering_fn(spec, scattering)

    def integrand(k):
        sm = sfn(k)
        _check_unitary(sm, k)
        return ebb_e_integrand(spec, s, sm, k) * np.sin(k)

    val, _ = quad(integrand, 0.0, np.pi, epsabs=quad_tol, epsrel=quad_tol, limit=500)
    return val / (2 * np.pi)


@dataclass(frozen=True)
class LandauerResult:
    sigma_plus: float
    heat_fluxes: np.ndarray
    charge_fluxes: np.ndarray

    def entropy_from_fluxes(self, spec: EbbSpec) -> float:
        """``-sum_j beta_j (<Phi_j> - mu_j <J_j>)``."""
        b, m = np.array(spec.betas), np.array(spec.mus)
        return float(-np.sum(b * (self.heat_fluxes - m * self.charge_fluxes)))


def transmission(smat: np.ndarray) -> np.ndarray:
    """``t_ji = |s_ji - delta_ji|^2``."""
    return np.abs(smat - np.eye(smat.shape[0])) ** 2


def landauer(spec: EbbSpec, scattering=None, quad_tol: float = QUAD_TOL) -> LandauerResult:
    """Landauer-Büttiker entropy production and steady-state heat/charge fluxes."""
    sfn = _scattering_fn(spec, scattering)
    n = spec.n_leads

    def integrand(k):
        sm = sfn(k)
        _check_unitary(sm, k)
        t = transmission(sm)
        rho = spec.occupations(k)
        drho = rho[:, None] - rho[None, :]  # rho_j - rho_i at [j, i]
        flow = (t * drho).sum(axis=1)  # sum_i t_ji (rho_j - rho_i)
        eps = lead_dispersion(k)
        sig = float(np.sum(flow * spec.varsigma(k)))
        return np.concatenate([[sig], flow * eps, flow]) * np.sin(k)

    val, _ = quad_vec(integrand, 0.0, np.pi, epsabs=quad_tol, epsrel=quad_tol, limit=500)
    val = val / (2 * np.pi)
    return LandauerResult(float(val[0]), val[1:1 + n], val[1 + n:])


# -- XY chain -----------------------------------------------------------------------


@dataclass(frozen=True)
class XySpec:
    """XY chain on ``[-m, m]``: sample ``[-n, n]`` at ``beta``, left/right reservoirs at ``beta_L``/``beta_R``."""

    J: float
    lam: float
    beta_L: float
    beta_R: float
    beta: float = 1.0
    n: int = 2
    m: int = 128

    def __post_init__(self):
        if min(self.beta_L, self.beta_R, self.beta) <= 0:
            raise ValueError("inverse temperatures must be positive")
        if self.J == 0:
            raise ValueError("J must be non-zero")
        if not self.m > self.n >= 0:
            raise ValueError("need m > n >= 0")

    @property
    def sites(self) -> int:
        return 2 * self.m + 1

    def with_m(self, m: int) -> "XySpec":
        return XySpec(self.J, self.lam, self.beta_L, self.beta_R, self.beta, self.n, m)

    def to_dict(self) -> dict:
        return {"J": self.J, "lambda": self.lam, "beta_L": self.beta_L, "beta_R": self.beta_R,
                "beta": self.beta, "n": self.n, "m": self.m}

    @classmethod
    def from_dict(cls, d: dict) -> "XySpec":
        return cls(d["J"], d.get("lambda", d.get("lam", 0.0)), d["beta_L"], d["beta_R"],
                   d.get("beta", 1.0), d.get("n", 2), d.get("m", 128))


def _band(spec_or_j, lam=None) -> tuple[float, float]:
    j, l = (spec_or_j.J, spec_or_j.lam) if lam is None else (spec_or_j, lam)
    u1, u2 = (l - j) / 2, (l + j) / 2
    return min(u1, u2), max(u1, u2)


def xy_e(spec: XySpec, s: float, quad_tol: float = QUAD_TOL) -> float:
    """Large-time Rényi functional of the XY chain.

    ``(1/pi) int log(1 - sinh(s u db) sinh((1-s) u db) / (cosh(u bL) cosh(u bR))) du``
    over the half band ``u`` between ``(lam - J)/2`` and ``(lam + J)/2``, ``db = bR - bL``.
    """
    db = spec.beta_R - spec.beta_L
    lo, hi = _band(spec)

    def integrand(u):
        arg = 1 - np.sinh(s * u * db) * np.sinh((1 - s) * u * db) / (
            np.cosh(u * spec.beta_L) * np.cosh(u * spec.beta_R))
        if arg <= 0:
            raise ArithmeticError(f"log argument {arg} <= 0 at u={u}")
        return np.log(arg)

    val, _ = quad(integrand, lo, hi, epsabs=quad_tol, epsrel=quad_tol, limit=500)
    return val / np.pi


def xy_sigma(spec: XySpec, quad_tol: float = QUAD_TOL) -> float:
    """Entropy production ``(1/pi) int u (bL - bR)(tanh(u bL) - tanh(u bR)) du`` over the half band."""
    lo, hi = _band(spec)
    bl, br = spec.beta_L, spec.beta_R
    f = lambda u: u * (bl - br) * (np.tanh(u * bl) - np.tanh(u * br))
    val, _ = quad(f, lo, hi, epsabs=quad_tol, epsrel=quad_tol, limit=500)
    return val / np.pi


def xy_one_particle(J: float, lam: float, sites: int) -> np.ndarray:
    """Jordan-Wigner image of the XY Hamiltonian: hopping ``-J/2``, on-site ``-lam``."""
    h = np.diag(np.full(sites, -float(lam)))
    off = np.full(sites - 1, -J / 2)
    return h + np.diag(off, 1) + np.diag(off, -1)


def xy_initial_density(spec: XySpec) -> np.ndarray:
    """Block-diagonal Fermi-Dirac density of the three decoupled pieces."""
    left = spec.m - spec.n
    pieces = [(left, spec.beta_L), (2 * spec.n + 1, spec.beta), (left, spec.beta_R)]
    t = np.zeros((spec.sites, spec.sites))
    i = 0
    for size, beta in pieces:
        hb = xy_one_particle(spec.J, spec.lam, size)
        t[i:i + size, i:i + size] = fermi_dirac(hb, beta).matrix.real
        i += size
    return t


def xy_finite_renyi(spec: XySpec, t: float, s) -> np.ndarray | float:
    """``e_{mt}(s)`` of the finite chain; ``s`` may be a scalar or a sequence."""
    if spec.sites > MAX_ONE_PARTICLE:
        raise ValueError(f"one-particle dimension {spec.sites} exceeds {MAX_ONE_PARTICLE}")
    if t == 0:
        return 0.0 if np.isscalar(s) else np.zeros(len(s))
    wb, vb = _eig_density(xy_initial_density(spec), DENSITY_MARGIN)
    u = unitary_group(xy_one_particle(spec.J, spec.lam, spec.sites), t)
    w = vb.conj().T @ u @ vb  # A = U T U* has eigenvectors U V_b and the spectrum of T
    vals = [_renyi_overlap(wb, wb, w, float(x)) for x in np.atleast_1d(s)]
    return vals[0] if np.isscalar(s) else np.array(vals)


# -- spin-fermion weak coupling ---------------------------------------------------------


def spin_fermion_sigma2(norms2: Sequence[float], betas: Sequence[float]) -> float:
    """Second-order coefficient of the spin-fermion entropy production.

    ``(pi/2) sum_ij n_i n_j / (sum_k n_k) (b_i - b_j) sinh(b_i - b_j) / (cosh b_i cosh b_j)``
    with ``n_j`` the squared form-factor norms at the Bohr frequency.
    """
    n = np.asarray(norms2, dtype=float)
    b = np.asarray(betas, dtype=float)
    if n.shape != b.shape:
        raise ValueError("norms2 and betas must have the same length")
    if np.any(n < 0) or n.sum() == 0:
        raise ValueError("norms must be non-negative and not all zero")
    if np.any(b <= 0):
        raise ValueError("betas must be positive")
    db = b[:, None] - b[None, :]
    kern = db * np.sinh(db) / (np.cosh(b)[:, None] * np.cosh(b)[None, :])
    return float(np.pi / 2 * np.sum(np.outer(n, n) * kern) / n.sum())
