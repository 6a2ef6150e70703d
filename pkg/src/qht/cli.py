"""Command-line front end.

Each subcommand writes its CSV/JSON artifacts into ``--out`` and prints a
short summary (machine-readable with ``--json``). Exit status is 0 on
success, 1 for unparsable or invalid input, and 2 for numerical failures,
in which case a diagnostic JSON object goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, artifacts, ensembles, fcs, ldp, models, quasifree, testing
from .operators import FunctionalCalculusError, matrix_from_dict
from .qstate import PositiveFunctional, renyi_relative_entropy


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument helpers ------------------------------------------------------------------


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from exc


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from exc


def s_grid(text: str) -> np.ndarray:
    """``a,b,N`` -> ``N`` uniform points of ``[a, b]``."""
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--s-grid expects a,b,N")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad --s-grid {text!r}") from exc
    if n < 2 or not b > a:
        raise argparse.ArgumentTypeError("--s-grid needs a < b and N >= 2")
    return np.linspace(a, b, n)


def _load_state(path) -> PositiveFunctional:
    return PositiveFunctional(matrix_from_dict(artifacts.load_json(path)))


def _emit(args, summary: dict, lines: list[str]) -> None:
    if args.json:
        print(artifacts.dumps(summary))
    else:
        print("\n".join(lines))


def _config(args) -> dict:
    skip = {"func", "json", "out"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _out(args, name: str) -> Path:
    return Path(args.out) / name


# -- subcommands -------------------------------------------------------------------------


def cmd_ht(args) -> int:
    if args.nu and args.omega:
        nu, omega = _load_state(args.nu), _load_state(args.omega)
    elif args.nu or args.omega:
        raise ValueError("give both --nu and --omega, or neither (random pair from --seed)")
    else:
        gen = ensembles.rng(args.seed)
        nu = PositiveFunctional(ensembles.random_state(gen, args.random_dim))
        omega = PositiveFunctional(ensembles.random_state(gen, args.random_dim))
    rep = testing.report(nu, omega, args.s_grid)
    path = _out(args, "ht_report.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rep.to_json() + "\n")
    _emit(args, rep.to_dict(), [
        f"type I error      {rep.type1:.12g}",
        f"type II error     {rep.type2:.12g}",
        f"minimal total     {rep.optimal_total:.12g}",
        f"modular lower     {rep.lower_bound:.12g}",
        f"best Chernoff     {min(rep.upper_bounds.values()):.12g}",
    ])
    return 0


def cmd_exponents(args) -> int:
    e = ldp.EntropicFunction.from_csv(Path(args.e).read_text())
    theta = ldp.default_theta_grid(e, args.theta_n)
    rate = ldp.legendre(e, theta)
    cfg = _config(args)
    artifacts.write_csv(_out(args, "rate.csv"), ["theta", "phi"],
                        zip(rate.theta_grid, rate.phi_values), cfg)
    summary = ldp.exponent_summary(e, args.r_list)
    path = _out(args, "exponents.json")
    path.write_text(artifacts.dumps(summary) + "\n")
    lines = [f"chernoff {summary['chernoff']:.12g}", f"stein    {summary['stein']:.12g}"]
    lines += [f"psi({h['r']:g}) = {h['psi']:.12g}" for h in summary["hoeffding"]]
    _emit(args, summary, lines)
    return 0


def _system(args):
    if args.system:
        return fcs.load_system(artifacts.load_json(args.system))
    spec = ensembles.random_open_spec(ensembles.rng(args.seed))
    return fcs.build_open_system(spec), spec


def cmd_fcs(args) -> int:
    sys_, _ = _system(args)
    cfg = _config(args)
    dists = artifacts.ordered_map(lambda t: fcs.fcs_distribution(sys_, t), args.t_list)
    atoms = [(d.t, x, w) for d in dists for x, w in zip(d.phi, d.weights)]
    artifacts.write_csv(_out(args, "fcs_atoms.csv"), ["t", "phi", "weight"], atoms, cfg)
    table = fcs.renyi_table(sys_, args.t_list, args.s_grid)
    rows = [(t, s, table[i, j]) for i, t in enumerate(args.t_list) for j, s in enumerate(args.s_grid)]
    artifacts.write_csv(_out(args, "fcs_e.csv"), ["t", "s", "e"], rows, cfg)
    summary = {"t": [], "mass": [], "mean": [], "variance": [], "mean_entropy_production": []}
    for d in dists:
        summary["t"].append(d.t)
        summary["mass"].append(d.measure.mass)
        summary["mean"].append(d.mean())
        summary["variance"].append(d.variance())
        summary["mean_entropy_production"].append(fcs.mean_entropy_production(sys_, d.t))
    lines = [f"t={t:g}  mean={m:.10g}  var={v:.10g}" for t, m, v in
             zip(summary["t"], summary["mean"], summary["variance"])]
    _emit(args, summary, lines)
    return 0


def cmd_open(args) -> int:
    if args.system:
        sys_, spec = fcs.load_system(artifacts.load_json(args.system))
        if spec is None:
            raise ValueError("open needs an open-system spec (with 'reservoirs')")
    else:
        sys_, spec = _system(args)
    sigma = fcs.open_entropy_production(spec)
    phis, _ = fcs.currents(spec)
    n = len(spec.reservoirs)
    header = ["t", "mean_sigma", "balance", "integrated_sigma"]
    header += [f"dE_{j}" for j in range(n)] + [f"flux_integral_{j}" for j in range(n)]
    rows = []
    for t in args.t_list:
        row = [t, fcs.mean_entropy_production(sys_, t), fcs.entropy_balance(sys_, t),
               fcs.time_integral(sys_, sigma, t) / t]
        de, fl = [], []
        for j, r in enumerate(spec.reservoirs):
            hj = spec.lift_reservoir(j, r.H)
            de.append(fcs.evolve(sys_, t)(hj) - sys_.omega(hj))
            fl.append(-fcs.time_integral(sys_, phis[j], t))
        rows.append(row + de + fl)
    artifacts.write_csv(_out(args, "open_balance.csv"), header, rows, _config(args))
    summary = {"columns": header, "rows": rows}
    _emit(args, summary, [" ".join(f"{x:.8g}" for x in r) for r in rows])
    return 0


def cmd_iid(args) -> int:
    if args.nu1 and args.omega1:
        nu1, om1 = _load_state(args.nu1), _load_state(args.omega1)
    else:
        gen = ensembles.rng(args.seed)
        nu1 = PositiveFunctional(ensembles.random_state(gen, 2))
        om1 = PositiveFunctional(ensembles.random_state(gen, 2))
    e1 = [renyi_relative_entropy(nu1, om1, float(s)) for s in args.s_grid]
    cfg = _config(args)
    artifacts.write_csv(_out(args, "iid_e.csv"), ["s", "e"], zip(args.s_grid, e1), cfg)
    chern = float(min(e1))
    rows = []
    for n in args.n_list:
        nu_n, om_n = models.iid_pair(nu1, om1, n)
        _, d = testing.optimal_test(nu_n, om_n)
        rows.append((n, d, np.log(d) / n, chern))
    artifacts.write_csv(_out(args, "iid.csv"), ["n", "min_error", "log_rate", "chernoff"], rows, cfg)
    summary = {"chernoff": chern, "n": [r[0] for r in rows], "log_rate": [r[2] for r in rows]}
    _emit(args, summary, [f"n={r[0]}  D={r[1]:.6e}  (1/n)log D={r[2]:.8f}" for r in rows]
          + [f"Chernoff exponent (grid) {chern:.8f}"])
    return 0


def cmd_spin(args) -> int:
    val = quasifree.spin_fermion_sigma2(args.norms, args.betas)
    summary = {"sigma2": val, "norms2": args.norms, "betas": args.betas}
    path = _out(args, "spin.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(artifacts.dumps(summary) + "\n")
    _emit(args, summary, [f"second-order entropy production {val:.15g}"])
    return 0


def cmd_carshift(args) -> int:
    a = matrix_from_dict(artifacts.load_json(args.A))
    b = matrix_from_dict(artifacts.load_json(args.B))
    scale = a.shape[0] if args.per_mode else 1
    vals = artifacts.ordered_map(lambda s: quasifree.quasifree_renyi(a, b, float(s), args.margin) / scale,
                                 list(args.s_grid))
    artifacts.write_csv(_out(args, "carshift_e.csv"), ["s", "e"], zip(args.s_grid, vals), _config(args))
    summary = {"min_e": float(min(vals)), "s_at_min": float(args.s_grid[int(np.argmin(vals))])}
    _emit(args, summary, [f"min e(s) = {summary['min_e']:.12g} at s = {summary['s_at_min']:g}"])
    return 0


def cmd_ebb(args) -> int:
    spec = quasifree.EbbSpec.from_dict(artifacts.load_json(args.spec))
    table = None
    if args.scattering:
        table = quasifree.ScatteringTable.from_csv(Path(args.scattering).read_text())
    vals = artifacts.ordered_map(lambda s: quasifree.ebb_e(spec, float(s), table, args.quad_tol),
                                 list(args.s_grid))
    cfg = _config(args)
    artifacts.write_csv(_out(args, "ebb_e.csv"), ["s", "e"], zip(args.s_grid, vals), cfg)
    res = quasifree.landauer(spec, table, args.quad_tol)
    summary = {
        "sigma_plus": res.sigma_plus,
        "heat_fluxes": res.heat_fluxes,
        "charge_fluxes": res.charge_fluxes,
        "sigma_from_fluxes": res.entropy_from_fluxes(spec),
    }
    _out(args, "ebb_landauer.json").write_text(artifacts.dumps(summary) + "\n")
    _emit(args, summary, [f"Landauer entropy production {res.sigma_plus:.12g}"]
          + [f"lead {j}: heat {h:.10g}  charge {c:.10g}"
             for j, (h, c) in enumerate(zip(res.heat_fluxes, res.charge_fluxes))])
    return 0


def cmd_xy(args) -> int:
    base = quasifree.XySpec(args.J, args.lam, args.betaL, args.betaR, args.beta, args.n,
                            max(args.m_list))
    cfg = _config(args)
    grid = list(args.s_grid)
    closed = [quasifree.xy_e(base, float(s), args.quad_tol) for s in grid]
    artifacts.write_csv(_out(args, "xy_closed.csv"), ["s", "e"], zip(grid, closed), cfg)

    def run(m):
        spec = base.with_m(m)
        t = args.t_factor * m
        return t, quasifree.xy_finite_renyi(spec, t, grid) / t

    results = artifacts.ordered_map(run, list(args.m_list))
    rows, devs = [], []
    for m, (t, fin) in zip(args.m_list, results):
        d = np.abs(fin - np.array(closed))
        devs.append(float(d.max()))
        rows += [(m, t, s, f, c, dv) for s, f, c, dv in zip(grid, fin, closed, d)]
    artifacts.write_csv(_out(args, "xy_finite.csv"),
                        ["m", "t", "s", "e_finite", "e_closed", "deviation"], rows, cfg)
    summary = {"sigma_plus": quasifree.xy_sigma(base, args.quad_tol), "m": list(args.m_list),
               "max_deviation": devs}
    _emit(args, summary, [f"Sigma+ = {summary['sigma_plus']:.12g}"]
          + [f"m={m}: max deviation {d:.3e}" for m, d in zip(args.m_list, devs)])
    return 0


def cmd_arrow(args) -> int:
    sys_, _ = _system(args)
    rows = fcs.arrow_exponent_estimate(sys_, args.t_list, args.s_grid)
    header = ["t", "min_error", "min_error_shifted", "exponent", "lower_exponent",
              "upper_exponent", "chernoff_estimate"]
    artifacts.write_csv(_out(args, "arrow.csv"), header,
                        [[getattr(r, h) for h in header] for r in rows], _config(args))
    summary = {h: [getattr(r, h) for r in rows] for h in header}
    _emit(args, summary, [f"t={r.t:g}  (1/2t)log D={r.exponent:.8g}  in [{r.lower_exponent:.8g}, "
                          f"{r.upper_exponent:.8g}]" for r in rows])
    return 0


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON summary")
    common.add_argument("--seed", type=int, default=0, help="seed for generated inputs")
    common.add_argument("--out", default=".", help="directory for artifacts")

    p = _Parser(prog="qht", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qht {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("ht", parents=[common], help="optimal test and error bounds for a pair")
    q.add_argument("--nu")
    q.add_argument("--omega")
    q.add_argument("--random-dim", type=int, default=4)
    q.add_argument("--s-grid", type=s_grid, default=np.linspace(0, 1, 11))
    q.set_defaults(func=cmd_ht)

    q = sub.add_parser("exponents", parents=[common], help="Legendre transform and exponents of e(s)")
    q.add_argument("--e", required=True, help="CSV with header s,e")
    q.add_argument("--r-list", type=float_list, default=[])
    q.add_argument("--theta-n", type=int, default=1025)
    q.set_defaults(func=cmd_exponents)

    for name, fn, helptext in (("fcs", cmd_fcs, "full counting statistics of entropy flow"),
                               ("open", cmd_open, "entropy and energy balance of an open system"),
                               ("arrow", cmd_arrow, "past/future discrimination table")):
        q = sub.add_parser(name, parents=[common], help=helptext)
        q.add_argument("--system", help="system JSON {H, omega, tri_basis?} or open-system spec")
        q.add_argument("--t-list", type=float_list, default=[0.5, 1.0, 2.0])
        q.add_argument("--s-grid", type=s_grid, default=np.linspace(0, 1, 21))
        q.set_defaults(func=fn)

    q = sub.add_parser("iid", parents=[common], help="i.i.d. error decay vs the Chernoff exponent")
    q.add_argument("--nu1")
    q.add_argument("--omega1")
    q.add_argument("--n-list", type=int_list, default=[1, 2, 3, 4, 5, 6])
    q.add_argument("--s-grid", type=s_grid, default=np.linspace(0, 1, 101))
    q.set_defaults(func=cmd_iid)

    q = sub.add_parser("spin", parents=[common], help="spin-fermion second-order entropy production")
    q.add_argument("--norms", type=float_list, required=True)
    q.add_argument("--betas", type=float_list, required=True)
    q.set_defaults(func=cmd_spin)

    q = sub.add_parser("carshift", parents=[common], help="Rényi functional of two quasi-free states")
    q.add_argument("--A", required=True, help="matrix JSON of the first density")
    q.add_argument("--B", required=True, help="matrix JSON of the second density")
    q.add_argument("--s-grid", type=s_grid, default=np.linspace(0, 1, 65))
    q.add_argument("--per-mode", action="store_true", help="divide by the one-particle dimension")
    q.add_argument("--margin", type=float, default=quasifree.DENSITY_MARGIN)
    q.set_defaults(func=cmd_carshift)

    q = sub.add_parser("ebb", parents=[common], help="electronic black box e(s) and Landauer fluxes")
    q.add_argument("--spec", required=True)
    q.add_argument("--scattering", help="CSV table k,re_ij,im_ij,...")
    q.add_argument("--s-grid", type=s_grid, default=np.linspace(0, 1, 33))
    q.add_argument("--quad-tol", type=float, default=quasifree.QUAD_TOL)
    q.set_defaults(func=cmd_ebb)

    q = sub.add_parser("xy", parents=[common], help="XY chain closed form and finite-chain convergence")
    q.add_argument("--J", type=float, default=1.0)
    q.add_argument("--lambda", dest="lam", type=float, default=0.0)
    q.add_argument("--betaL", type=float, required=True)
    q.add_argument("--betaR", type=float, required=True)
    q.add_argument("--beta", type=float, default=1.5)
    q.add_argument("--n", type=int, default=3)
    q.add_argument("--m-list", type=int_list, default=[128, 256, 512])
    q.add_argument("--t-factor", type=float, default=0.25)
    q.add_argument("--s-grid", type=s_grid, default=np.linspace(0, 1, 11))
    q.add_argument("--quad-tol", type=float, default=quasifree.QUAD_TOL)
    q.set_defaults(func=cmd_xy)
    return p


NUMERICAL_ERRORS = (ArithmeticError, np.linalg.LinAlgError, FunctionalCalculusError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        artifacts.thread_count()
        return args.func(args)
    except UsageError as exc:
        print(f"qht: error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        diag = {"error": "numerical", "type": type(exc).__name__, "message": str(exc),
                "argv": list(sys.argv[1:] if argv is None else argv)}
        print(json.dumps(diag), file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"qht: invalid input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
