"""Command-line front end; every command prints one JSON document (CSV for histograms)."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import DomainError, HiveLabError

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INFEASIBLE, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


# ------------------------------------------------------------------ parsing

def _floats(text: str):
    try:
        return [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str):
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _profile(text: str):
    """``quadratic:c`` or ``pwl:v0,v1,...``."""
    from .spectra import BoundaryProfile
    kind, _, rest = text.partition(":")
    if kind == "quadratic":
        return BoundaryProfile.quadratic(float(rest or 1.0))
    if kind == "pwl":
        return BoundaryProfile.pwl(_floats(rest))
    raise argparse.ArgumentTypeError("profile must be quadratic:c or pwl:v0,v1,...")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _emit(args, payload: dict):
    doc = {"schema_version": SCHEMA_VERSION, "command": args.cmd_name, "seed": args.seed,
           "threads": args.threads, **payload}
    text = json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _need_same_length(**vecs):
    sizes = {k: len(v) for k, v in vecs.items() if v is not None}
    if len(set(sizes.values())) > 1:
        raise DomainError(f"spectra lengths differ: {sizes}")


def _sorted_desc(v):
    return np.sort(np.asarray(v, dtype=float))[::-1]


# ---------------------------------------------------------------- commands

def cmd_hive_validate(args):
    from .hive import DiscreteHive, validate_hive
    with open(args.file) as fh:
        obj = json.load(fh)
    # accept the envelope written by `hive lift` / `hive sample`
    if isinstance(obj, dict) and "n" not in obj and isinstance(obj.get("hive"), dict):
        obj = obj["hive"]
    h = DiscreteHive.from_json(obj)
    _need_same_length(lam=args.lam, mu=args.mu, nu=args.nu)
    rep = validate_hive(h, args.lam, args.mu, args.nu, tol=args.tol)
    _emit(args, {"report": rep.to_json()})
    return EXIT_OK if rep.ok else EXIT_INFEASIBLE


def cmd_hive_sample(args):
    from .hive import DiscreteHive, hive_from_boundary
    from .polytope import build_hive_polytope, hit_and_run
    _need_same_length(lam=args.lam, mu=args.mu, nu=args.nu)
    lam, mu, nu = (_sorted_desc(v) for v in (args.lam, args.mu, args.nu))
    sys_ = build_hive_polytope(lam, mu, nu)
    if sys_.d == 0:
        xs = np.zeros((args.samples, 0))
        zero = 0
    else:
        xs, zero = hit_and_run(sys_, steps=args.samples, seed=args.seed,
                               thin=args.thin, burn=args.burn)
    hives = [DiscreteHive(hive_from_boundary(lam, mu, nu, x)).to_json() for x in xs]
    _emit(args, {"hives": hives, "zero_chords": zero, "dimension": sys_.dimension})
    return EXIT_OK


def cmd_hive_lift(args):
    from .hive import ContinuumHive, lift, mollify
    h = ContinuumHive.quadratic(args.c)
    if args.eps:
        h = mollify(h, args.eps)
    _emit(args, {"hive": lift(h, args.n).to_json(), "source": h.name})
    return EXIT_OK


def cmd_gt_volume(args):
    from .polytope import build_gt_polytope, estimate_volume
    from .vandermonde import gt_volume
    nu = _sorted_desc(args.nu)
    lv = gt_volume(nu)
    out = {"nu": nu, "log_volume": float(lv), "volume": math.exp(lv) if lv > -math.inf else 0.0,
           "degenerate": bool(lv.degenerate)}
    if args.mc:
        est = estimate_volume(build_gt_polytope(nu), args.method, budget=args.budget, seed=args.seed)
        out["monte_carlo"] = est.to_json()
    _emit(args, out)
    return EXIT_OK


def _volume(sys_, args):
    """Emit a volume estimate; infeasible systems exit with code 2."""
    from .polytope import estimate_volume, is_feasible
    est = estimate_volume(sys_, args.method, budget=args.budget, seed=args.seed)
    feasible = "infeasible" not in est.flags and (est.log_volume > -math.inf or is_feasible(sys_))
    _emit(args, {"estimate": est.to_json(), "dimension": sys_.dimension, "ambient": sys_.d,
                 "constraints": sys_.m, "feasible": feasible})
    return EXIT_OK if feasible else EXIT_INFEASIBLE


def cmd_vol_hive(args):
    from .polytope import build_hive_polytope
    _need_same_length(lam=args.lam, mu=args.mu, nu=args.nu)
    s = build_hive_polytope(*(_sorted_desc(v) for v in (args.lam, args.mu, args.nu)))
    return _volume(s, args)


def cmd_vol_augmented(args):
    from .polytope import build_augmented_polytope
    _need_same_length(lam=args.lam, mu=args.mu, nu=args.nu)
    if (args.nu is None) != (args.eps is None):
        raise DomainError("--nu and --eps go together")
    s = build_augmented_polytope(_sorted_desc(args.lam), _sorted_desc(args.mu),
                                 None if args.nu is None else _sorted_desc(args.nu), args.eps)
    return _volume(s, args)


def cmd_vol_torus(args):
    from .polytope import build_torus_polytope
    s = build_torus_polytope(args.n, args.s, args.variant)
    return _volume(s, args)


def cmd_sigma_fit(args):
    from .surface_tension import sigma_estimate
    est = sigma_estimate(args.s, args.n, budget=args.budget, seed=args.seed)
    _emit(args, {"s": args.s, "n_list": args.n, **est.to_json()})
    return EXIT_OK


def cmd_sigma_table(args):
    from .surface_tension import SigmaTable, sigma_table_build
    if args.load:
        table = SigmaTable.load(args.load)
    else:
        lo, hi, pts = args.grid
        table = sigma_table_build({"lo": lo, "hi": hi, "points": int(pts)}, budget=args.budget,
                                  n_list=args.n, seed=args.seed)
        if args.save:
            table.save(args.save)
    out = {"version": table.version, "grid": table.axis, "n_list": table.n_list,
           "convexity": table.convexity_certificate(seed=args.seed),
           "monotonicity_violations": len(table.monotonicity_violations()),
           "model": table.convex_model().fit_info}
    if args.at:
        out["at"] = {"s": args.at, "sigma": table.interpolate(args.at)}
    if args.full:
        out["table"] = table.to_json()
    _emit(args, out)
    return EXIT_OK


def cmd_sigma_conjecture(args):
    from .surface_tension import conjecture_gap
    rep = conjecture_gap(args.s0, args.s1, args.s2, n_list=args.n, budget=args.budget,
                         seed=args.seed)
    _emit(args, rep)
    return EXIT_OK


def cmd_rmt_horn(args):
    from .rmt import horn_probability
    _need_same_length(lam=args.lam, mu=args.mu, nu=args.nu)
    est = horn_probability(args.lam, args.mu, args.nu, args.eps, args.trials, args.mode, args.seed)
    _emit(args, {"estimate": est.to_json()})
    return EXIT_OK


def cmd_rmt_compare(args):
    from .rmt import horn_probability, predicted_probability
    _need_same_length(lam=args.lam, mu=args.mu, nu=args.nu)
    if args.n is not None and args.n != len(args.lam):
        raise DomainError("--n does not match the spectra")
    mc = horn_probability(args.lam, args.mu, args.nu, args.eps, args.trials, args.mode, args.seed)
    pr = predicted_probability(args.lam, args.mu, args.nu, args.eps, budget=args.budget,
                               seed=args.seed + 1, method=args.method)
    se = math.hypot(mc.stderr, pr.stderr)
    z = (mc.value - pr.value) / se if se > 0 else (0.0 if mc.value == pr.value else math.inf)
    _emit(args, {"monte_carlo": mc.to_json(), "prediction": pr.to_json(), "z": z,
                 "agree_3sigma": abs(z) < 3})
    return EXIT_OK


def cmd_rmt_density(args):
    from .rmt import sample_sum_spectra, top_eigenvalue_histogram
    _need_same_length(lam=args.lam, mu=args.mu)
    spec = sample_sum_spectra(args.lam, args.mu, args.trials, args.seed)
    edges, counts = top_eigenvalue_histogram(spec, args.bins)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["value", "count"])
    for lo, hi, c in zip(edges[:-1], edges[1:], counts):
        w.writerow([repr(float(0.5 * (lo + hi))), int(c)])
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_rate_eval(args):
    from .functional import as_sigma, rate_I
    sig = as_sigma(args.sigma_table)
    val, res = rate_I(args.gamma, args.alpha, args.beta, args.n, args.a, sig, args.iters)
    out = {"rate": val, "n": args.n, "a": args.a, "sigma_version": sig.version}
    if res is not None:
        out["minimizer"] = res.to_json()
    _emit(args, out)
    return EXIT_OK if np.isfinite(val) else EXIT_INFEASIBLE


def cmd_ldp_sweep(args):
    from .rmt import horn_probability
    from .spectra import BoundaryProfile, discretize
    prof = BoundaryProfile.quadratic(args.c)
    rows = []
    for eps in args.eps:
        seq = []
        for n in args.ns:
            lam = discretize(prof, n).values
            est = horn_probability(lam, lam, lam, eps * n * n, args.trials, args.mode,
                                   seed=[args.seed, n, int(round(eps * 1e6))])
            rate = 2.0 / (n * n) * math.log(est.value) if est.value > 0 else -math.inf
            se = 2.0 / (n * n) * est.stderr / est.value if est.value > 0 else math.inf
            seq.append({"n": n, "p": est.value, "p_stderr": est.stderr, "scaled_log_p": rate,
                        "scaled_log_p_stderr": se})
        vals = np.array([r["scaled_log_p"] for r in seq])
        diffs = np.abs(np.diff(vals))
        rows.append({"eps": eps, "series": seq, "abs_differences": diffs,
                     "differences_shrink": bool(np.all(np.isfinite(diffs)) and np.all(np.diff(diffs) < 0))})
    _emit(args, {"benchmark": {"profile": "quadratic", "c": args.c, "radius": "eps*n^2"},
                 "sweep": rows})
    return EXIT_OK


# ------------------------------------------------------------------- parser

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    common.add_argument("--threads", type=int, default=1,
                        help="accepted for interface stability; work runs single-threaded")
    common.add_argument("--budget", type=int, default=None, help="sample or chain-step budget")
    common.add_argument("--out", default=None, help="write the result here instead of stdout")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")

    p = _Parser(prog="hivelab", description="Hive, spectra and surface-tension experiments.")
    p.add_argument("--version", action="version", version=f"hivelab {__version__}")
    top = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def leaf(group, name, func, help_):
        sp = group.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    g = top.add_parser("hive", help="discrete hives").add_subparsers(dest="sub", required=True)
    sp = leaf(g, "validate", cmd_hive_validate, "check a hive JSON file against spectra")
    sp.add_argument("--file", required=True)
    for k in ("lam", "mu", "nu"):
        sp.add_argument(f"--{k}", type=_floats, required=True)
    sp = leaf(g, "sample", cmd_hive_sample, "uniform hives by hit-and-run")
    for k in ("lam", "mu", "nu"):
        sp.add_argument(f"--{k}", type=_floats, required=True)
    sp.add_argument("--samples", type=int, default=10)
    sp.add_argument("--thin", type=int, default=10)
    sp.add_argument("--burn", type=int, default=100)
    sp = leaf(g, "lift", cmd_hive_lift, "sample the quadratic continuum hive on T_n")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--eps", type=float, default=None, help="mollify first")

    g = top.add_parser("gt", help="Gelfand-Tsetlin patterns").add_subparsers(dest="sub", required=True)
    sp = leaf(g, "volume", cmd_gt_volume, "exact GT polytope volume")
    sp.add_argument("--nu", type=_floats, required=True)
    sp.add_argument("--mc", action="store_true", help="also estimate by Monte Carlo")
    sp.add_argument("--method", default="auto", choices=["auto", "rejection", "annealed"])

    g = top.add_parser("vol", help="polytope volumes").add_subparsers(dest="sub", required=True)
    sp = leaf(g, "hive", cmd_vol_hive, "hive polytope H(lam, mu; nu)")
    for k in ("lam", "mu", "nu"):
        sp.add_argument(f"--{k}", type=_floats, required=True)
    sp.add_argument("--method", default="auto", choices=["auto", "rejection", "annealed"])
    sp = leaf(g, "augmented", cmd_vol_augmented, "augmented polytope, optionally with a nu-ball")
    sp.add_argument("--lam", type=_floats, required=True)
    sp.add_argument("--mu", type=_floats, required=True)
    sp.add_argument("--nu", type=_floats, default=None)
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--method", default="auto", choices=["auto", "rejection", "annealed"])
    sp = leaf(g, "torus", cmd_vol_torus, "torus polytope P_n(s)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--s", type=_floats, required=True)
    sp.add_argument("--variant", default="sum_zero", choices=["sum_zero", "pinned"])
    sp.add_argument("--method", default="auto", choices=["auto", "rejection", "annealed"])

    g = top.add_parser("sigma", help="surface tension").add_subparsers(dest="sub", required=True)
    sp = leaf(g, "fit", cmd_sigma_fit, "estimate sigma(s) from f_n over several n")
    sp.add_argument("--s", type=_floats, required=True)
    sp.add_argument("--n", type=_ints, default=[2, 3, 4])
    sp = leaf(g, "table", cmd_sigma_table, "build or load a sigma table")
    sp.add_argument("--load", default=None)
    sp.add_argument("--save", default=None)
    sp.add_argument("--grid", type=_floats, default=[0.25, 4.0, 5.0], help="lo,hi,points")
    sp.add_argument("--n", type=_ints, default=[2, 3])
    sp.add_argument("--at", type=_floats, default=None, help="interpolate at s")
    sp.add_argument("--full", action="store_true", help="include the table itself")
    sp = leaf(g, "conjecture", cmd_sigma_conjecture, "compare sigma with the conjectured form")
    sp.add_argument("--s0", type=float, required=True)
    sp.add_argument("--s1", type=float, required=True)
    sp.add_argument("--s2", type=_floats, required=True)
    sp.add_argument("--n", type=_ints, default=[2, 3])

    g = top.add_parser("rmt", help="random matrix experiments").add_subparsers(dest="sub", required=True)
    for name, func, help_ in (("horn", cmd_rmt_horn, "Monte Carlo ball probability"),
                              ("compare", cmd_rmt_compare, "Monte Carlo against the hive prediction")):
        sp = leaf(g, name, func, help_)
        for k in ("lam", "mu", "nu"):
            sp.add_argument(f"--{k}", type=_floats, required=True)
        sp.add_argument("--eps", type=float, required=True)
        sp.add_argument("--trials", type=int, default=100_000)
        sp.add_argument("--mode", default="antiderivative_sup",
                        choices=["antiderivative_sup", "sorted_prefix"])
        if name == "compare":
            sp.add_argument("--n", type=int, default=None)
            sp.add_argument("--method", default="auto", choices=["auto", "quadrature", "volume"])
    sp = leaf(g, "density", cmd_rmt_density, "histogram of the top eigenvalue (CSV)")
    sp.add_argument("--lam", type=_floats, required=True)
    sp.add_argument("--mu", type=_floats, required=True)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--bins", type=int, default=50)

    g = top.add_parser("rate", help="rate functional").add_subparsers(dest="sub", required=True)
    sp = leaf(g, "eval", cmd_rate_eval, "rate I for three boundary profiles")
    sp.add_argument("--alpha", type=_profile, default="quadratic:1")
    sp.add_argument("--beta", type=_profile, default="quadratic:1")
    sp.add_argument("--gamma", type=_profile, default="quadratic:1")
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--a", type=int, default=0)
    sp.add_argument("--iters", type=int, default=500)
    sp.add_argument("--sigma-table", default=None,
                    help="table JSON (default: $HIVELAB_SIGMA_TABLE or the packaged table)")

    g = top.add_parser("ldp", help="large-deviation trend").add_subparsers(dest="sub", required=True)
    sp = leaf(g, "sweep", cmd_ldp_sweep, "(2/n^2) log p over n and eps")
    sp.add_argument("--ns", type=_ints, default=[2, 3, 4])
    sp.add_argument("--eps", type=_floats, default=[0.05, 0.1, 0.2])
    sp.add_argument("--c", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=200_000)
    sp.add_argument("--mode", default="antiderivative_sup",
                    choices=["antiderivative_sup", "sorted_prefix"])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.cmd_name = f"{args.group} {args.sub}"
    if args.threads < 1:
        sys.stderr.write("hivelab: error: --threads must be >= 1\n")
        return EXIT_USAGE
    if args.budget is not None and args.budget < 1:
        sys.stderr.write("hivelab: error: --budget must be positive\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except HiveLabError as exc:
        err = {"schema_version": SCHEMA_VERSION, "error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(err) + "\n")
        return exc.exit_code
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        sys.stderr.write(json.dumps({"schema_version": SCHEMA_VERSION,
                                     "error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
