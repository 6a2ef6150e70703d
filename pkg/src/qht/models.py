"""Finite example families: i.i.d. pairs and 1-D translation-invariant spin chains.

Boxes are ``[-n, n]`` (half-width ``n``) with open boundary: a translate of a
term contributes only when all of its sites lie inside the box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .operators import HermitianOperator, as_operator, kron_all, matrix_from_dict, matrix_to_dict
from .qstate import PositiveFunctional, as_functional, renyi_relative_entropy

MAX_QUBITS = 14


class SizeCapError(ValueError):
    pass


def _check_cap(dim: int) -> None:
    if np.log2(dim) > MAX_QUBITS + 1e-9:
        raise SizeCapError(f"Hilbert space dimension {dim} exceeds 2^{MAX_QUBITS}")


def iid_pair(nu1, omega1, n: int) -> tuple[PositiveFunctional, PositiveFunctional]:
    """n-fold tensor powers of a pair of faithful functionals."""
    nu1, omega1 = as_functional(nu1), as_functional(omega1)
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_cap(nu1.dim**n)
    return (
        PositiveFunctional(kron_all([nu1.op] * n)),
        PositiveFunctional(kron_all([omega1.op] * n)),
    )


@dataclass(frozen=True)
class Term:
    range: int
    matrix: np.ndarray


class Interaction:
    """Translation-invariant finite-range interaction on a chain of ``site_dim``-level sites.

    Each term is a Hermitian operator on ``range`` consecutive sites; the
    interaction is the sum of all its translates.
    """

    def __init__(self, site_dim: int, terms=()):
        self.site_dim = int(site_dim)
        ts = []
        for r, m in terms:
            m = as_operator(m).matrix
            if m.shape[0] != self.site_dim**r:
                raise ValueError(f"term of range {r} must have dim {self.site_dim ** r}")
            ts.append(Term(int(r), m))
        self.terms = tuple(ts)

    @property
    def range(self) -> int:
        return max((t.range for t in self.terms), default=1)

    def merged(self) -> dict[int, np.ndarray]:
        """Terms grouped by range and summed."""
        out: dict[int, np.ndarray] = {}
        for t in self.terms:
            out[t.range] = out.get(t.range, 0) + t.matrix
        return out

    def triple_norm(self) -> float:
        """``sum_{X containing 0} |X|^-1 ||Phi_X||``; each term contributes its norm once."""
        return float(sum(np.abs(np.linalg.eigvalsh(m)).max() for m in self.merged().values()))

    def __add__(self, other: "Interaction") -> "Interaction":
        if other.site_dim != self.site_dim:
            raise ValueError("site dimensions differ")
        return Interaction(self.site_dim, [(t.range, t.matrix) for t in self.terms + other.terms])

    def __mul__(self, c: float) -> "Interaction":
        return Interaction(self.site_dim, [(t.range, c * t.matrix) for t in self.terms])

    __rmul__ = __mul__

    def __sub__(self, other: "Interaction") -> "Interaction":
        return self + (-1.0) * other

    def to_dict(self) -> dict:
        return {
            "site_dim": self.site_dim,
            "terms": [{"range": t.range, "matrix": matrix_to_dict(t.matrix)} for t in self.terms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Interaction":
        return cls(d["site_dim"], [(t["range"], matrix_from_dict(t["matrix"])) for t in d["terms"]])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "Interaction":
        return cls.from_dict(json.loads(s))


def box_size(n: int) -> int:
    return 2 * n + 1


def box_hamiltonian(phi: Interaction, n: int) -> HermitianOperator:
    """``H_{Lambda_n}(Phi)``: all translates of the terms contained in ``[-n, n]``."""
    sites = box_size(n)
    d = phi.site_dim
    _check_cap(d**sites)
    dim = d**sites
    h = np.zeros((dim, dim), dtype=complex)
    for t in phi.terms:
        for left in range(sites - t.range + 1):
            right = sites - left - t.range
            h += np.kron(np.kron(np.eye(d**left), t.matrix), np.eye(d**right))
    return HermitianOperator(h)


def gibbs_state(phi: Interaction, n: int) -> PositiveFunctional:
    w, v = box_hamiltonian(phi, n).eigh()
    p = np.exp(-(w - w.min()))
    p /= p.sum()
    return PositiveFunctional((v * p) @ v.conj().T)


def finite_pressure(phi: Interaction, n: int) -> float:
    """``(1/|Lambda_n|) log Tr exp(-H_{Lambda_n}(Phi))``."""
    w, _ = box_hamiltonian(phi, n).eigh()
    return float(logsumexp(-w)) / box_size(n)


pressure = finite_pressure


def renyi_density(phi: Interaction, psi: Interaction, n: int, s: float) -> float:
    """``(1/|Lambda_n|) Ent_s(nu_n|omega_n)`` for the Gibbs states of ``phi`` and ``psi``."""
    return renyi_relative_entropy(gibbs_state(phi, n), gibbs_state(psi, n), s) / box_size(n)


def pressure_gap(phi: Interaction, psi: Interaction, n: int, s: float) -> float:
    """``P_n(s Phi + (1-s) Psi) - s P_n(Phi) - (1-s) P_n(Psi)`` at finite ``n``."""
    mix = s * phi + (1.0 - s) * psi
    return finite_pressure(mix, n) - s * finite_pressure(phi, n) - (1 - s) * finite_pressure(psi, n)


# -- common one- and two-site terms ---------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def field_term(h: float, pauli: np.ndarray = PAULI_Z) -> tuple[int, np.ndarray]:
    return 1, h * pauli


def xy_term(j: float) -> tuple[int, np.ndarray]:
    """``-(J/4)(sx sx + sy sy)`` on two neighbouring sites."""
    return 2, -(j / 4) * (np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y))


def ising_term(j: float) -> tuple[int, np.ndarray]:
    return 2, j * np.kron(PAULI_Z, PAULI_Z)
