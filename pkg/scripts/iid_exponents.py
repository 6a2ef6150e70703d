"""Error exponents for i.i.d. qubit pairs: (1/n) log D_n against the Chernoff exponent.

Usage: python scripts/iid_exponents.py [--seed 0] [--n-max 8] [--out results/iid]
"""

import argparse
from pathlib import Path

import numpy as np

from qht import artifacts, ensembles, models, testing
from qht.qstate import PositiveFunctional, renyi_relative_entropy


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", type=int, default=8)
    p.add_argument("--out", type=Path, default=Path("results/iid"))
    args = p.parse_args()

    gen = ensembles.rng(args.seed)
    # mixing with the identity keeps the n-fold products well inside the faithful cone
    nu1 = PositiveFunctional(0.8 * ensembles.random_state(gen, 2) + 0.1 * np.eye(2))
    om1 = PositiveFunctional(0.8 * ensembles.random_state(gen, 2) + 0.1 * np.eye(2))
    s_grid = np.linspace(0, 1, 201)
    chern = min(renyi_relative_entropy(nu1, om1, s) for s in s_grid)

    rows = []
    for n in range(1, args.n_max + 1):
        nu_n, om_n = models.iid_pair(nu1, om1, n)
        d = testing.optimal_test(nu_n, om_n)[1]
        rows.append((n, d, np.log(d) / n, chern))
        print(f"n={n:2d}  D={d:.6e}  (1/n) log D={np.log(d) / n:+.6f}  Chernoff={chern:+.6f}")
    cfg = {"seed": args.seed, "n_max": args.n_max}
    path = artifacts.write_csv(args.out / "iid.csv", ["n", "min_error", "log_rate", "chernoff"], rows, cfg)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
