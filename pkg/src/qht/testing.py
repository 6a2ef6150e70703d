"""Binary hypothesis testing of a faithful pair (nu, omega).

Hypothesis I is ``omega``, hypothesis II is ``nu``. A test ``T`` accepts I on
outcome 1; its errors are ``omega(1 - T)`` (type I) and ``nu(T)`` (type II).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .operators import (
    DEFAULT_CLUSTER_TOL,
    as_operator,
    positive_part,
    support,
    trace_norm,
)
from .qstate import as_functional, overlap_table

PROJECTION_TOL = 1e-10


class NotAProjectionError(ValueError):
    pass


class TestProjection:
    """Orthogonal projection used as a test; ``generalized=True`` allows ``0 <= T <= 1``."""

    __test__ = False
    __slots__ = ("op", "generalized")

    def __init__(self, op, generalized: bool = False):
        op = as_operator(op)
        m = op.matrix
        if generalized:
            w, _ = op.eigh()
            if w.size and (w.min() < -PROJECTION_TOL or w.max() > 1 + PROJECTION_TOL):
                raise NotAProjectionError("generalized test must satisfy 0 <= T <= 1")
        else:
            defect = float(np.abs(m @ m - m).max(initial=0.0))
            if defect > PROJECTION_TOL:
                raise NotAProjectionError(f"T is not idempotent: max |T^2 - T| = {defect:.3e}")
        self.op = op
        self.generalized = generalized

    @classmethod
    def zero(cls, dim: int) -> "TestProjection":
        return cls(np.zeros((dim, dim)))

    @classmethod
    def identity(cls, dim: int) -> "TestProjection":
        return cls(np.eye(dim))

    @property
    def rank(self) -> int:
        return int(round(self.op.trace()))


def error_probability(nu, omega, test) -> tuple[float, float]:
    """Return ``(type1, type2) = (omega(1 - T), nu(T))``."""
    nu, omega = as_functional(nu), as_functional(omega)
    if not isinstance(test, TestProjection):
        test = TestProjection(test)
    t = test.op.matrix
    type2 = nu.op.expect(t)
    type1 = omega.mass - omega.op.expect(t)
    return type1, type2


def total_error(nu, omega, test) -> float:
    t1, t2 = error_probability(nu, omega, test)
    return t1 + t2


def min_error_formula(nu, omega) -> float:
    """``(omega(1) + nu(1) - Tr|omega - nu|) / 2``."""
    nu, omega = as_functional(nu), as_functional(omega)
    return 0.5 * (omega.mass + nu.mass - trace_norm(omega.op - nu.op))


def optimal_test(nu, omega, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> tuple[TestProjection, float]:
    """Neyman-Pearson optimal test: support of ``(omega - nu)_+``.

    Eigenvalues of ``omega - nu`` in the zero cluster are left out of the
    support. Returns the test and its total error ``nu(T) + omega(1 - T)``.
    """
    nu, omega = as_functional(nu), as_functional(omega)
    diff = omega.op - nu.op
    t = TestProjection(support(positive_part(diff, cluster_tol), cluster_tol))
    d = total_error(nu, omega, t)
    return t, d


def chernoff_upper_bound(nu, omega, s: float) -> float:
    """``Tr nu^s omega^(1-s)``; bounds the minimal error from above for s in [0, 1]."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"the upper bound only holds for s in [0, 1], got {s}")
    nu, omega = as_functional(nu), as_functional(omega)
    return omega.power(1.0 - s).expect(nu.power(s))


def modular_lower_bound(nu, omega, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> float:
    """``sum_{lambda, mu} Tr(P_lambda(nu) P_mu(omega)) / (1/lambda + 1/mu)``."""
    lam, mu, table = overlap_table(nu, omega, cluster_tol)
    harmonic = 1.0 / (1.0 / lam[:, None] + 1.0 / mu[None, :])
    return float(np.sum(table * harmonic))


def trace_inequality_gap(a, b, s: float) -> float:
    """``Tr A^(1-s) B^s - (Tr A + Tr B - Tr|A - B|)/2``, non-negative for ``A, B > 0``."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    a, b = as_functional(a), as_functional(b)
    lhs = a.power(1.0 - s).expect(b.power(s))
    rhs = 0.5 * (a.mass + b.mass - trace_norm(a.op - b.op))
    return lhs - rhs


@dataclass
class TestReport:
    __test__ = False

    type1: float
    type2: float
    total: float
    optimal_total: float
    upper_bounds: dict = field(default_factory=dict)
    lower_bound: float = float("nan")

    def consistent(self, tol: float = 1e-10) -> bool:
        ok = self.lower_bound <= self.optimal_total + tol
        ok &= self.optimal_total <= self.total + tol
        ok &= all(self.optimal_total <= u + tol for u in self.upper_bounds.values())
        return bool(ok)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["upper_bounds"] = {repr(float(s)): v for s, v in self.upper_bounds.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def report(nu, omega, s_grid=None, test=None) -> TestReport:
    """Evaluate a test (default: the optimal one) together with both bounds."""
    if s_grid is None:
        s_grid = np.linspace(0.0, 1.0, 11)
    t_opt, d_opt = optimal_test(nu, omega)
    t = t_opt if test is None else test
    t1, t2 = error_probability(nu, omega, t)
    ub = {float(s): chernoff_upper_bound(nu, omega, float(s)) for s in s_grid}
    return TestReport(
        type1=t1,
        type2=t2,
        total=t1 + t2,
        optimal_total=d_opt,
        upper_bounds=ub,
        lower_bound=modular_lower_bound(nu, omega),
    )


def commuting_enumeration_minimum(nu, omega, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> float:
    """Brute-force minimum of the total error over all spectral-subset projections.

    Valid when ``nu`` and ``omega`` commute: the projections are built from
    the eigenvectors of ``nu + pi * omega`` (a generic combination that
    resolves the common eigenbasis). Exponential in the dimension.
    """
    nu, omega = as_functional(nu), as_functional(omega)
    n = nu.dim
    if n > 16:
        raise ValueError("exhaustive enumeration is capped at dimension 16")
    _, v = np.linalg.eigh(nu.op.matrix + np.pi * omega.op.matrix)
    p = np.einsum("ij,jk,ki->i", v.conj().T, nu.op.matrix, v).real
    q = np.einsum("ij,jk,ki->i", v.conj().T, omega.op.matrix, v).real
    masks = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    totals = masks @ p + (1 - masks) @ q
    return float(totals.min())
