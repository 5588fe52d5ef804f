"""Command-line entry point: ``edgechaos <subcommand> [flags]``.

Each run writes its data tables and ``manifest.json`` into ``--out`` and
prints a JSON summary (including the per-task seeds) on stdout. Exit codes:
0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import complexity, equilibria, fakir, lyapunov, netmodel, randmat, seeding
from .exceptions import (ConvergenceError, EigenConvergenceError, NumericalBlowUp,
                         SusceptibilityOverflow)
from .output import emit_svg, write_csv, write_json, write_manifest, write_table

NUMERICAL_ERRORS = (NumericalBlowUp, ConvergenceError, EigenConvergenceError,
                    SusceptibilityOverflow, FloatingPointError, np.linalg.LinAlgError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _real_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", type=Path, default=Path("edgechaos-out"))
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = _Parser(prog="edgechaos", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, **defaults):
        p = sub.add_parser(name, parents=[common], help=help_text)
        flags = {
            "sigma": lambda d: p.add_argument("--sigma", type=float, default=d),
            "sigma_list": lambda d: p.add_argument("--sigma-list", type=_real_list, default=d),
            "n": lambda d: p.add_argument("--n", type=int, default=d),
            "matrices": lambda d: p.add_argument("--matrices", type=int, default=d),
            "starts": lambda d: p.add_argument("--starts", type=int, default=d),
            "dt": lambda d: p.add_argument("--dt", type=float, default=d),
            "t_end": lambda d: p.add_argument("--t-end", type=float, default=d),
            "transient": lambda d: p.add_argument("--transient", type=float, default=d),
            "k_list": lambda d: p.add_argument("--k-list", type=_int_list, default=d),
            "landscapes": lambda d: p.add_argument("--landscapes", type=int, default=d),
            "method": lambda d: p.add_argument("--method", choices=("closed_form", "quadrature"),
                                               default=d),
            "points": lambda d: p.add_argument("--points", type=int, default=d),
            "target": lambda d: p.add_argument("--target", type=float, default=d),
        }
        for key, value in defaults.items():
            flags[key](value)
        return p

    add("spectrum", "eigenvalues of one coupling matrix", n=500, sigma=1.0)
    add("trajectory", "RK4 trajectory of the network", n=100, sigma=1.5, dt=0.01, t_end=50.0)
    add("equilibria", "multi-start equilibrium search for one matrix", n=4, sigma=2.0,
        starts=200)
    add("mean-count", "mean equilibrium count over matrices", n=8, sigma=2.0, matrices=50,
        starts=200)
    add("complexity", "topological complexity c(sigma)", sigma=None, sigma_list=None,
        method="closed_form", points=1_000_000)
    add("kac-rice", "Monte-Carlo mean of (1/n) log|det(-I+J)|", n=300, sigma=None,
        sigma_list=None, matrices=50)
    add("lyapunov", "Benettin exponent for one sigma", n=200, sigma=1.5, matrices=1,
        dt=lyapunov.DEFAULTS["dt"], t_end=lyapunov.DEFAULTS["t_total"],
        transient=lyapunov.DEFAULTS["transient"])
    add("lyapunov-curve", "Benettin exponent across a sigma grid", n=200,
        sigma_list=[0.8, 1.2, 1.5, 2.0], matrices=5, dt=lyapunov.DEFAULTS["dt"],
        t_end=lyapunov.DEFAULTS["t_total"], transient=lyapunov.DEFAULTS["transient"])
    add("fakir-slope", "fakir-bed exponent against log k", k_list=[5, 10, 20, 40, 80],
        landscapes=100, dt=0.01, t_end=2000.0, transient=100.0)
    add("edge-thickness", "sigma at which n (sigma-1)^2 reaches a target", n=1000, target=1.0)
    return parser


def _check(args):
    """Range checks; raise UsageError naming the flag."""
    def need(cond, flag, what):
        if not cond:
            raise UsageError(f"{args.command}: {flag} {what}")

    a = vars(args)
    if "n" in a:
        need(args.n >= 1, "--n", "must be >= 1")
    if a.get("sigma") is not None:
        need(args.sigma > 0 and math.isfinite(args.sigma), "--sigma", "must be a positive real")
    if a.get("sigma_list") is not None:
        need(len(args.sigma_list) > 0 and all(s > 0 for s in args.sigma_list), "--sigma-list",
             "must be a non-empty list of positive reals")
    for key, flag in (("matrices", "--matrices"), ("starts", "--starts"),
                      ("landscapes", "--landscapes"), ("points", "--points")):
        if key in a:
            need(a[key] >= 1, flag, "must be >= 1")
    for key, flag in (("dt", "--dt"), ("t_end", "--t-end"), ("target", "--target")):
        if key in a:
            need(a[key] > 0, flag, "must be > 0")
    if "transient" in a:
        need(0 <= args.transient < args.t_end, "--transient", "must lie in [0, --t-end)")
    if "k_list" in a:
        need(len(args.k_list) >= 2 and all(k >= 1 for k in args.k_list), "--k-list",
             "needs at least two positive integers")
    need(args.threads >= 1, "--threads", "must be >= 1")
    if args.command == "spectrum":
        need(args.n <= randmat.MAX_DENSE_N, "--n", f"must be <= {randmat.MAX_DENSE_N}")
    if args.command == "complexity":
        need(args.points >= 100, "--points", "must be >= 100")
    if args.command == "kac-rice":
        need(args.n >= 2, "--n", "must be >= 2")
        need(args.matrices >= 2, "--matrices", "must be >= 2")
    if args.command == "fakir-slope":
        need(args.landscapes >= 2, "--landscapes", "must be >= 2")
    if args.command in ("complexity", "kac-rice"):
        need(args.sigma is not None or args.sigma_list is not None, "--sigma",
             "or --sigma-list is required")


@contextmanager
def _mapper(threads):
    if threads <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        yield pool.map


def _sigmas(args):
    return args.sigma_list if args.sigma_list is not None else [args.sigma]


def _cmd_spectrum(args, out, mapper):
    J = randmat.sample_matrix(args.n, args.sigma, args.seed)
    sp = randmat.eigenvalues(J)
    path = write_table(out / "spectrum", ["re", "im"],
                       ([float(z.real), float(z.imag)] for z in sp.eigenvalues), args.format)
    ev = sp.eigenvalues
    conj_closed = bool(np.allclose(np.sort_complex(ev), np.sort_complex(ev.conj()),
                                   atol=1e-9, rtol=0))
    summary = {"n": args.n, "sigma": args.sigma,
               "spectral_radius": randmat.spectral_radius(sp),
               "circular_law_ks": randmat.circular_law_discrepancy(sp, args.sigma),
               "conjugate_closed": conj_closed}
    return summary, [path], [args.seed]


def _cmd_trajectory(args, out, mapper):
    J = randmat.sample_matrix(args.n, args.sigma, args.seed)
    x0_seed = seeding.derive_seed(args.seed, 1)
    x0 = seeding.uniform(x0_seed, args.n, -1.0, 1.0)
    traj = netmodel.integrate(J, netmodel.TANH, x0, args.dt, args.t_end)
    header = ["t"] + [f"x_{i}" for i in range(args.n)]
    rows = ([t, *map(float, x)] for t, x in zip(traj.times, traj.states))
    path = write_table(out / "trajectory", header, rows, args.format)
    summary = {"n": args.n, "sigma": args.sigma, "dt": args.dt, "t_end": float(traj.times[-1]),
               "stored_states": len(traj.times), "store_every": traj.store_every,
               "final_norm": float(np.linalg.norm(traj.final))}
    return summary, [path], [args.seed, x0_seed]


def _cmd_equilibria(args, out, mapper):
    J = randmat.sample_matrix(args.n, args.sigma, args.seed)
    start_seed = seeding.derive_seed(args.seed, 1)
    eq = equilibria.find_equilibria(J, netmodel.TANH, n_starts=args.starts, seed=start_seed)
    header = ["index", "unstable_dims", "residual"] + [f"x_{i}" for i in range(args.n)]
    rows = ([i, u, r, *map(float, x)]
            for i, (x, u, r) in enumerate(zip(eq.roots, eq.unstable_dims, eq.residuals)))
    path = write_table(out / "equilibria", header, rows, args.format)
    summary = {"n": args.n, "sigma": args.sigma, "count": eq.count, "starts": eq.n_starts,
               "successes": eq.successes, "failures": eq.failures}
    return summary, [path], [args.seed, start_seed]


def _cmd_mean_count(args, out, mapper):
    est = equilibria.mean_count(args.sigma, args.n, args.matrices, args.starts, args.seed,
                                map_fn=mapper)
    path = write_table(out / "counts", ["sigma", "n", "realization", "count"], est.rows(),
                       args.format)
    summary = {"sigma": args.sigma, "n": args.n, "mean": est.mean, "stderr": est.stderr,
               "matrices": est.n_matrices, "starts": est.n_starts,
               "successes": est.successes}
    return summary, [path], est.matrix_seeds


_COMPLEXITY_HEADER = ["sigma", "n", "method", "value", "stderr", "samples"]


def _complexity_summary(estimates):
    recs = [e.as_row() for e in estimates]
    summary = {"estimates": recs}
    if len(recs) == 1:
        summary.update(recs[0])
    return summary


def _cmd_complexity(args, out, mapper):
    sigmas = _sigmas(args)
    if args.method == "closed_form":
        ests = [complexity.closed_form_estimate(s) for s in sigmas]
        seeds = []
    else:
        seeds = [seeding.derive_seed(args.seed, i) for i in range(len(sigmas))]
        ests = [complexity.c_quadrature(s, args.points, sd) for s, sd in zip(sigmas, seeds)]
    path = write_table(out / "complexity", _COMPLEXITY_HEADER, (e.as_row() for e in ests),
                       args.format)
    return _complexity_summary(ests), [path], seeds


def _cmd_kac_rice(args, out, mapper):
    sigmas = _sigmas(args)
    ests = list(mapper(_kac_rice_task, [(args.n, s, args.matrices, args.seed) for s in sigmas]))
    path = write_table(out / "complexity", _COMPLEXITY_HEADER, (e.as_row() for e in ests),
                       args.format)
    summary = _complexity_summary(ests)
    summary["closed_form"] = [complexity.c_closed_form(s) for s in sigmas]
    summary["excluded"] = [e.excluded for e in ests]
    return summary, [path], seeding.derive_seeds(args.seed, args.matrices)


def _kac_rice_task(a):
    return complexity.kac_rice_mc(*a)


def _lyapunov_params(args):
    return {"dt": args.dt, "t_total": args.t_end, "transient": args.transient}


def _cmd_lyapunov(args, out, mapper):
    curve = lyapunov.lyapunov_curve([args.sigma], args.n, args.matrices, _lyapunov_params(args),
                                    args.seed, map_fn=mapper)
    path = write_table(out / "lyapunov", ["sigma", "n", "realization", "lambda", "convention"],
                       curve.rows(), args.format)
    p = curve.points[0]
    summary = {"sigma": args.sigma, "n": args.n, "lambda": p.mean,
               "stderr": p.stderr if args.matrices > 1 else None,
               "lambda_susceptibility": lyapunov.SUSCEPTIBILITY_FACTOR * p.mean,
               "values": p.values, "params": curve.params}
    return summary, [path], p.seeds


def _cmd_lyapunov_curve(args, out, mapper):
    curve = lyapunov.lyapunov_curve(args.sigma_list, args.n, args.matrices,
                                    _lyapunov_params(args), args.seed, map_fn=mapper)
    paths = [write_table(out / "lyapunov", ["sigma", "n", "realization", "lambda", "convention"],
                         curve.rows(), args.format)]
    table = [{"sigma": p.sigma, "lambda_mean": p.mean, "lambda_stderr": p.stderr,
              "realizations": len(p.values)} for p in curve.points]
    paths.append(write_table(out / "lyapunov_curve",
                             ["sigma", "lambda_mean", "lambda_stderr", "realizations"],
                             table, args.format))
    paths.append(emit_svg([{"points": [(p.sigma, p.mean) for p in curve.points],
                            "label": f"n={args.n}", "style": "both"}],
                          {"xlabel": "sigma", "ylabel": "max Lyapunov exponent"},
                          out / "lyapunov_curve.svg"))
    summary = {"n": args.n, "curve": table, "params": curve.params}
    above = [p for p in curve.points if p.sigma > 1 and p.mean > 0]
    if len(above) >= 3:
        exponent, prefactor, r2 = lyapunov.critical_exponent(
            lyapunov.LyapunovCurve(curve.n, curve.params, above))
        summary["critical_fit"] = {"exponent": exponent, "prefactor": prefactor, "r2": r2}
    return summary, paths, curve.points[0].seeds


def _cmd_fakir_slope(args, out, mapper):
    res = fakir.slope_experiment(args.k_list, args.landscapes, seed=args.seed,
                                 lyapunov_params={"dt": args.dt, "t_total": args.t_end,
                                                  "transient": args.transient},
                                 map_fn=mapper)
    paths = [write_table(out / "fakir", ["k", "landscape_seed", "lambda"], res.rows, args.format),
             write_table(out / "fakir_summary",
                         ["k", "lambda_mean", "lambda_stderr", "n_landscapes"],
                         res.summary_rows(), args.format),
             write_json(out / "fakir_regression.json", res.regression())]
    fit_line = [(k, res.slope * math.log(k) + res.intercept) for k in res.k_list]
    paths.append(emit_svg([{"points": list(zip(res.k_list, res.means)), "label": "mean lambda"},
                           {"points": fit_line, "label": f"slope {res.slope:.3f}",
                            "style": "line"}],
                          {"xlabel": "number of hills k", "ylabel": "max Lyapunov exponent",
                           "xscale": "log"},
                          out / "fakir_slope.svg"))
    summary = {"k_list": res.k_list, "means": res.means, "stderrs": res.stderrs,
               **res.regression(), "reference_slope": fakir.REFERENCE_SLOPE}
    return summary, paths, [s for _, s, _ in res.rows]


def _cmd_edge_thickness(args, out, mapper):
    sigma = complexity.edge_thickness(args.n, args.target)
    path = write_table(out / "edge_thickness", ["n", "target", "sigma"],
                       [[args.n, args.target, sigma]], args.format)
    return {"n": args.n, "target": args.target, "sigma": sigma}, [path], []


COMMANDS = {
    "spectrum": _cmd_spectrum,
    "trajectory": _cmd_trajectory,
    "equilibria": _cmd_equilibria,
    "mean-count": _cmd_mean_count,
    "complexity": _cmd_complexity,
    "kac-rice": _cmd_kac_rice,
    "lyapunov": _cmd_lyapunov,
    "lyapunov-curve": _cmd_lyapunov_curve,
    "fakir-slope": _cmd_fakir_slope,
    "edge-thickness": _cmd_edge_thickness,
}


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        print(parser.format_usage().rstrip(), file=sys.stderr)
        return 1
    config = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    try:
        with _mapper(args.threads) as mapper:
            summary, outputs, seeds = COMMANDS[args.command](args, out, mapper)
    except NUMERICAL_ERRORS as exc:
        print(json.dumps({"command": args.command, "error": type(exc).__name__,
                          "message": str(exc)}), file=stdout)
        return 2
    write_manifest(out, config, started, _now(), seeds, outputs)
    summary = {"command": args.command, **summary, "seeds": [int(s) for s in seeds],
               "outputs": [str(p) for p in outputs], "manifest": str(out / "manifest.json")}
    print(json.dumps(summary, indent=2, default=_default), file=stdout)
    return 0


def _default(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
