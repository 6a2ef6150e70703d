"""Random systems and comparison helpers shared by the test modules."""

import numpy as np

from qht import ensembles
from qht.fcs import FiniteSystem


def random_system(seed: int, n: int | None = None, tri: bool = False) -> FiniteSystem:
    g = ensembles.rng(seed)
    n = int(g.integers(4, 9)) if n is None else n
    h = ensembles.random_hermitian(g, n, real=tri)
    w = ensembles.random_state(g, n, real=tri)
    return FiniteSystem(h, w, np.eye(n) if tri else None)


def measure_mismatch(a, b) -> float:
    """Largest atom discrepancy (location or weight) between two atomic measures;
    ``inf`` when the atom counts differ."""
    if len(a) != len(b):
        return np.inf
    if len(a) == 0:
        return 0.0
    scale = max(1.0, np.abs(a.locations).max())
    dx = np.abs(a.locations - b.locations).max() / scale
    dw = np.abs(a.weights - b.weights).max()
    return float(max(dx, dw))


# (criterion number, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE: list[tuple[int, bool, str]] = []


def acceptance_line(num: int, ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} criterion {num:>2}: {detail}"
