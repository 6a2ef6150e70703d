"""Convex analysis on sampled entropic functions.

An :class:`EntropicFunction` holds a convex ``e(s)`` sampled on a uniform
grid of ``[a, b]``. Its Fenchel-Legendre transform is taken as the exact
discrete supremum over the grid, so Young's inequality
``theta * s_i <= e_i + phi(theta)`` holds with no discretization slack.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

MIN_POINTS = 33
CONVEX_TOL = 1e-8
PSI_CAP = 1e-6
GOLDEN = (math.sqrt(5) - 1) / 2


class ConvexityError(ValueError):
    pass


def golden_section_min(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
                       max_iter: int = 200) -> tuple[float, float]:
    """Minimize a unimodal scalar function on ``[lo, hi]``; returns ``(x, f(x))``."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    best = min([(fc, c), (fd, d), (f(lo), lo), (f(hi), hi)])
    return best[1], best[0]


@dataclass(frozen=True)
class EntropicFunction:
    """Convex function sampled at ``N + 1`` uniform points of ``[a, b]``.

    ``func`` is an optional exact evaluator; when present it is used to
    refine grid optima, otherwise a cubic spline through the samples is used.
    """

    a: float
    b: float
    values: np.ndarray
    func: Callable[[float], float] | None = field(default=None, compare=False, repr=False)
    convex_tol: float = CONVEX_TOL

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if not self.b > self.a:
            raise ValueError("need a < b")
        if v.size < MIN_POINTS:
            raise ValueError(f"need at least {MIN_POINTS} samples, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("sampled values must be finite")
        d2 = v[2:] - 2 * v[1:-1] + v[:-2]
        scale = max(1.0, float(np.abs(v).max()))
        worst = int(np.argmin(d2))
        if d2[worst] < -self.convex_tol * scale:
            raise ConvexityError(
                f"not convex: second difference {d2[worst]:.3e} at s={self.grid[worst + 1]:.6g}"
            )

    @classmethod
    def from_function(cls, f: Callable[[float], float], a: float = 0.0, b: float = 1.0,
                      n: int = 512, **kw) -> "EntropicFunction":
        s = np.linspace(a, b, n + 1)
        return cls(a, b, np.array([f(float(x)) for x in s]), func=f, **kw)

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.values.size)

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    def __call__(self, s: float) -> float:
        if self.func is not None:
            return float(self.func(s))
        return float(self._spline()(s))

    def _spline(self):
        from scipy.interpolate import CubicSpline

        return CubicSpline(self.grid, self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "e"])
        for s, e in zip(self.grid, self.values):
            w.writerow([f"{s:.17g}", f"{e:.17g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EntropicFunction":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if [c.strip() for c in rows[0]] != ["s", "e"]:
            raise ValueError("EntropicFunction CSV needs header 's,e'")
        data = np.array([[float(x) for x in r] for r in rows[1:]])
        s, e = data[:, 0], data[:, 1]
        if not np.allclose(np.diff(s), (s[-1] - s[0]) / (len(s) - 1), rtol=1e-9, atol=1e-12):
            raise ValueError("s column must be a uniform grid")
        return cls(float(s[0]), float(s[-1]), e)


@dataclass(frozen=True)
class RateFunction:
    """Legendre transform of an :class:`EntropicFunction` tabulated on ``theta_grid``.

    ``phi`` can also be evaluated off the table: it is the exact discrete
    supremum over the source grid.
    """

    theta_grid: np.ndarray
    phi_values: np.ndarray
    source: EntropicFunction = field(repr=False)
    left_slope: float = float("nan")   # D+e(a): phi affine (a theta - e(a)) below it
    right_slope: float = float("nan")  # D-e(b): phi affine (b theta - e(b)) above it

    def __call__(self, theta):
        return _legendre_values(self.source, np.atleast_1d(np.asarray(theta, dtype=float)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta", "phi"])
        for t, p in zip(self.theta_grid, self.phi_values):
            w.writerow([f"{t:.17g}", f"{p:.17g}"])
        return buf.getvalue()


def _legendre_values(e: EntropicFunction, theta: np.ndarray) -> np.ndarray:
    s = e.grid
    out = np.empty(theta.size)
    # chunk so that the (theta, s) table stays small
    for i in range(0, theta.size, 2048):
        th = theta[i:i + 2048]
        out[i:i + 2048] = np.max(th[:, None] * s[None, :] - e.values[None, :], axis=1)
    return out


def legendre(e: EntropicFunction, theta_grid) -> RateFunction:
    """``phi(theta) = max_i (theta s_i - e_i)`` on the given theta grid."""
    theta = np.asarray(theta_grid, dtype=float)
    phi = _legendre_values(e, theta)
    return RateFunction(
        theta,
        phi,
        e,
        left_slope=subdifferential(e, e.a)[1],
        right_slope=subdifferential(e, e.b)[0],
    )


def default_theta_grid(e: EntropicFunction, n: int = 1025, pad: float = 0.5) -> np.ndarray:
    """Theta grid spanning the slope range of ``e`` plus ``pad`` of its width on each side."""
    lo = subdifferential(e, e.a)[1]
    hi = subdifferential(e, e.b)[0]
    w = max(hi - lo, 1e-3)
    return np.linspace(lo - pad * w, hi + pad * w, n)


def inverse_legendre(phi: RateFunction, s) -> np.ndarray:
    """``sup_theta (s theta - phi(theta))`` over the tabulated theta grid."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return np.max(s[:, None] * phi.theta_grid[None, :] - phi.phi_values[None, :], axis=1)


def subdifferential(e: EntropicFunction, s: float) -> tuple[float, float]:
    """One-sided difference quotients ``(D-e(s), D+e(s))`` at grid spacing.

    At ``s = a`` the left derivative is reported as ``-inf``; at ``s = b``
    the right derivative is ``+inf``. Off-grid ``s`` uses the enclosing cell.
    """
    if not e.a - 1e-12 <= s <= e.b + 1e-12:
        raise ValueError(f"s={s} outside [{e.a}, {e.b}]")
    h = e.h
    v = e.values
    x = (s - e.a) / h
    i = int(round(x))
    if abs(x - i) < 1e-9:
        dm = -np.inf if i == 0 else (v[i] - v[i - 1]) / h
        dp = np.inf if i == e.n else (v[i + 1] - v[i]) / h
        return float(dm), float(dp)
    i = int(math.floor(x))
    slope = (v[i + 1] - v[i]) / h
    return float(slope), float(slope)


def psi(e: EntropicFunction, r: float, cap: float = PSI_CAP) -> float:
    """Hoeffding function ``-sup_{s in [0,1[} (-s r - e(s)) / (1 - s)``.

    Returns ``-inf`` for ``r < -e(1)`` and ``e(1) - D-e(1)`` at ``r = -e(1)``.
    """
    _require_unit_interval(e)
    e1 = float(e.values[-1])
    boundary = -e1
    tol = 1e-12 * max(1.0, abs(e1))
    if r < boundary - tol:
        return -np.inf
    if abs(r - boundary) <= tol:
        return e1 - subdifferential(e, 1.0)[0]
    s = e.grid
    keep = s <= 1.0 - cap
    g = (-s[keep] * r - e.values[keep]) / (1.0 - s[keep])
    i = int(np.argmax(g))
    best = float(g[i])
    lo = s[max(i - 1, 0)]
    hi = min(s[min(i + 1, keep.sum() - 1)], 1.0 - cap)
    if hi > lo:
        ratio = lambda x: -(-x * r - e(x)) / (1.0 - x)
        _, val = golden_section_min(ratio, lo, hi)
        best = max(best, -val)
    return -best


def chernoff_exponent(e: EntropicFunction) -> float:
    """``inf_{s in [0,1]} e(s)``: grid minimum refined between neighbouring nodes."""
    _require_unit_interval(e)
    i = int(np.argmin(e.values))
    best = float(e.values[i])
    lo = e.grid[max(i - 1, 0)]
    hi = e.grid[min(i + 1, e.n)]
    _, val = golden_section_min(e, lo, hi)
    return min(best, val)


def hoeffding_exponent(e: EntropicFunction, r: float) -> float:
    return psi(e, r)


def stein_exponent(e: EntropicFunction) -> float:
    """``-Sigma+`` with ``Sigma+ = D-e(1)``."""
    _require_unit_interval(e)
    return -subdifferential(e, 1.0)[0]


def entropy_production(e: EntropicFunction) -> float:
    return subdifferential(e, e.b)[0]


def rate_infimum(phi: RateFunction, lo: float, hi: float) -> float:
    """``inf_{theta in ]lo, hi[} phi(theta)`` for an interval inside the theta table."""
    tg = phi.theta_grid
    if not lo < hi:
        raise ValueError("empty interval")
    if hi <= tg[0] or lo >= tg[-1]:
        raise ValueError(f"interval ]{lo}, {hi}[ does not meet the theta grid [{tg[0]}, {tg[-1]}]")
    inside = (tg > lo) & (tg < hi)
    f = lambda t: float(phi(t)[0])
    # phi is convex: the infimum over the closure is attained, golden section finds it
    x, val = golden_section_min(f, max(lo, tg[0]), min(hi, tg[-1]))
    if inside.any():
        val = min(val, float(phi.phi_values[inside].min()))
    return val


def hoeffding_table(e: EntropicFunction, r_values) -> list[tuple[float, float]]:
    return [(float(r), psi(e, float(r))) for r in r_values]


def exponent_summary(e: EntropicFunction, r_values=()) -> dict:
    return {
        "chernoff": chernoff_exponent(e),
        "stein": stein_exponent(e),
        "entropy_production": entropy_production(e),
        "hoeffding": [{"r": r, "psi": v} for r, v in hoeffding_table(e, r_values)],
    }


def _require_unit_interval(e: EntropicFunction) -> None:
    if abs(e.a) > 1e-12 or abs(e.b - 1.0) > 1e-12:
        raise ValueError("this exponent needs e(s) sampled on [0, 1]")
