"""Command-line interface.

Commands
--------
  exact one-arm | touch | cr-moment | child-weights | rho-r   closed forms
  verify [--only SUITE ...]                                   identity suites
  simulate sle | lattice                                      Monte Carlo runs
  fit --input per-scale.csv                                   exponent fit

Exit codes: 0 success, 1 validation error, 2 numeric failure, 3 partial
results.  A flat key=value config file may supply defaults; command-line
flags win.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import exact, verify
from .errors import ClepercError, NumericError, ParameterError
from .io_utils import ResultRecord, csv_text, dump_json, read_config_file, write_csv
from .params import ColoredCleParams, K4Params, NonSimpleParams, SimpleParams

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_PARTIAL = 3


def _out_path(args, suffix):
    if args.out is None:
        return None
    base = args.out
    root, ext = os.path.splitext(base)
    if ext:
        return base if suffix == ext else root + suffix
    return base + suffix


def _emit_table(args, header, rows, record: ResultRecord):
    if args.format == "csv":
        text = csv_text(header, rows)
        path = _out_path(args, ".csv")
        if path:
            write_csv(path, header, rows)
        else:
            sys.stdout.write(text)
    else:
        path = _out_path(args, ".json")
        text = dump_json(record.to_dict(), path)
        if not path:
            sys.stdout.write(text)


def _grid(spec: str) -> list[float]:
    """'a' or 'a:b:n' -> list of floats."""
    if ":" in spec:
        a, b, n = spec.split(":")
        return [float(v) for v in np.linspace(float(a), float(b), int(n))]
    return [float(spec)]


# ---------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------

def cmd_exact(args) -> int:
    sub = args.exact_command
    rows, header, outputs = [], [], {}
    if sub == "one-arm":
        header = ["kappa_prime", "r", "alpha1", "equation_residual"]
        for kp in _grid(args.kappa_prime):
            for r in _grid(args.r):
                ccp = ColoredCleParams(kp, r)
                a = exact.one_arm_exponent(ccp)
                rows.append([kp, r, a, exact.one_arm_equation_residual(ccp, a)])
    elif sub == "touch":
        header = ["regime", "kappa", "rho", "clockwise", "counterclockwise"]
        for rho in _grid(args.rho):
            if args.regime == "simple":
                t = exact.touch_probability_simple(SimpleParams(args.kappa, rho))
                rows.append(["simple", args.kappa, rho, t.clockwise, t.counterclockwise])
            elif args.regime == "nonsimple":
                t = exact.touch_probability_nonsimple(NonSimpleParams(args.kappa, rho))
                rows.append(["nonsimple", args.kappa, rho, t.clockwise, t.counterclockwise])
            else:
                t = exact.touch_probability_k4(K4Params(rho))
                rows.append(["k4", 4.0, rho, t.clockwise, t.counterclockwise])
    elif sub == "cr-moment":
        header = ["regime", "kappa", "rho", "lambda", "clockwise", "counterclockwise"]
        for lam in _grid(args.lam):
            if args.regime == "simple":
                v = exact.cr_moment_simple(SimpleParams(args.kappa, args.rho), lam)
                kappa = args.kappa
            elif args.regime == "nonsimple":
                v = exact.cr_moment_nonsimple(NonSimpleParams(args.kappa, args.rho), lam)
                kappa = args.kappa
            else:
                v = exact.cr_moment_k4(K4Params(args.rho), lam)
                kappa = 4.0
            rows.append([args.regime, kappa, args.rho, lam, v.clockwise, v.counterclockwise])
    elif sub == "child-weights":
        header = ["kappa", "rho", "rho_red_prime", "rho_blue_prime"]
        for rho in _grid(args.rho):
            rr, rb = exact.bcle_child_weights(args.kappa, rho)
            rows.append([args.kappa, rho, rr, rb])
    elif sub == "rho-r":
        header = ["kappa", "r", "rho", "roundtrip_r"]
        for r in _grid(args.r):
            rho = exact.rho_from_r(args.kappa, r)
            rows.append([args.kappa, r, rho, exact.r_from_rho(args.kappa, rho)])
    outputs["table"] = {"header": header, "rows": rows}
    rec = ResultRecord("exact " + sub, _echo_inputs(args), outputs)
    _emit_table(args, header, rows, rec)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    only = args.only if args.only else None
    if only:
        unknown = set(only) - set(verify.ALL_SUITES)
        if unknown:
            raise ParameterError(f"unknown suite(s): {sorted(unknown)}; "
                                 f"available: {sorted(verify.ALL_SUITES)}")
    results = verify.run_suites(only)
    rows = []
    all_pass = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        all_pass &= r.passed
        print(f"{status}  {r.name:24s} max_residual={r.max_residual:.3e} "
              f"tol={r.tolerance:.1e} checks={r.n_checks}  worst: {r.worst_case}")
        rows.append([r.name, status, r.max_residual, r.tolerance, r.n_checks, r.worst_case])
    rec = ResultRecord("verify", {"only": only or "all"},
                       {"suites": {r.name: {"passed": r.passed,
                                            "max_residual": r.max_residual,
                                            "tolerance": r.tolerance}
                                   for r in results}})
    if args.out:
        dump_json(rec.to_dict(), _out_path(args, ".json"))
    return EXIT_OK if all_pass else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate_sle(args) -> int:
    from . import sde
    if args.seed is None:
        raise ParameterError("--seed is required for simulation commands")
    if args.regime == "simple":
        params = SimpleParams(args.kappa, args.rho)
        touch = exact.touch_probability_simple(params)
    else:
        params = NonSimpleParams(args.kappa, args.rho)
        touch = exact.touch_probability_nonsimple(params)
    cfg = sde.SimConfig(dt=args.dt, gap_tolerance=args.gap_tolerance)
    batch = sde.sample_bcle_loops(params, cfg, args.n, args.seed)
    lambdas = [float(v) for v in args.lambdas.split(",")] if args.lambdas else []
    estimates = sde.moment_estimates_from_batch(batch, lambdas) if lambdas else []

    raw_header = ["seed", "replica", "sigma1", "orientation", "valid", "steps"]
    raw_rows = [
        [args.seed, 0, float(batch.sigma1[i]),
         "clockwise" if batch.clockwise[i] else "counterclockwise",
         int(batch.valid[i]), int(batch.steps[i])]
        for i in range(len(batch))
    ]
    if args.out:
        write_csv(_out_path(args, ".csv"), raw_header, raw_rows)

    valid = batch.valid
    p_cw = float(batch.clockwise[valid].mean())
    n_valid = int(valid.sum())
    se = float(np.sqrt(max(p_cw * (1 - p_cw), 1e-300) / max(n_valid, 1)))
    outputs = {
        "n_samples": args.n,
        "n_valid": n_valid,
        "censored_fraction": batch.censored_fraction(),
        "p_clockwise": p_cw,
        "p_clockwise_se": se,
        "mean_sigma1": float(batch.sigma1[valid].mean()),
        "exact": {
            "p_clockwise": touch.clockwise,
            "p_counterclockwise": touch.counterclockwise,
        },
        "moments": [
            {
                "lambda": e.lam,
                "clockwise": e.clockwise,
                "clockwise_se": e.clockwise_se,
                "counterclockwise": e.counterclockwise,
                "counterclockwise_se": e.counterclockwise_se,
            }
            for e in estimates
        ],
    }
    if lambdas:
        mom = exact.cr_moment_simple if args.regime == "simple" else exact.cr_moment_nonsimple
        outputs["exact"]["moments"] = [
            {"lambda": lam,
             "clockwise": mom(params, lam).clockwise,
             "counterclockwise": mom(params, lam).counterclockwise}
            for lam in lambdas
        ]
    rec = ResultRecord("simulate sle", _echo_inputs(args), outputs, seed=args.seed,
                       partial=batch.censored_fraction() > 0)
    text = dump_json(rec.to_dict(), _out_path(args, ".json") if args.out else None)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_PARTIAL if rec.partial else EXIT_OK


def cmd_simulate_lattice(args) -> int:
    from . import lattice
    if args.seed is None:
        raise ParameterError("--seed is required for simulation commands")
    cfg = lattice.LatticeConfig(L=args.L, q=args.q, r=args.r,
                                burn_in=args.burn_in, thin=args.thin)
    scales = (
        [(int(m), int(n)) for m, n in
         (pair.split(":") for pair in args.scales.split(","))]
        if args.scales else lattice.default_scales(cfg)
    )
    n_workers = args.threads if args.threads else (os.cpu_count() or 1)
    meas = lattice.run_arm_experiment_parallel(cfg, scales, args.n, args.seed,
                                               n_workers=n_workers)
    header = ["m", "n", "channel", "hits", "samples", "estimate", "stderr"]
    rows = []
    for mm in meas:
        for channel, hits in (("blue", mm.blue_hits), ("red", mm.red_hits),
                              ("fk", mm.fk_hits)):
            p = hits / mm.n_samples
            se = (p * (1 - p) / mm.n_samples) ** 0.5
            rows.append([mm.m, mm.n, channel, hits, mm.n_samples, p, se])
    if args.out:
        write_csv(_out_path(args, ".csv"), header, rows)
    fits = {}
    for channel in ("blue", "red", "fk"):
        try:
            f = lattice.fit_exponent(meas, channel)
            fits[channel] = {"exponent": f.exponent, "stderr": f.stderr,
                             "intercept": f.intercept, "chi2": f.chi2, "dof": f.dof}
        except ClepercError as e:
            fits[channel] = {"error": str(e)}
    low = [f"({mm.m},{mm.n})" for mm in meas if mm.low_statistics()]
    outputs = {
        "measurements": [
            {"m": mm.m, "n": mm.n, "samples": mm.n_samples,
             "blue_hits": mm.blue_hits, "red_hits": mm.red_hits, "fk_hits": mm.fk_hits}
            for mm in meas
        ],
        "fits": fits,
        "low_statistics_scales": low,
        "exact": {"fk_one_arm_limit": exact.fk_one_arm_limit(_fk_kappa_prime(args.q)),
                  "one_arm_exponent": exact.one_arm_exponent(
                      ColoredCleParams(_fk_kappa_prime(args.q), args.r))
                  if 0.0 < args.r < 1.0 else None},
    }
    rec = ResultRecord("simulate lattice", _echo_inputs(args), outputs, seed=args.seed)
    text = dump_json(rec.to_dict(), _out_path(args, ".json") if args.out else None)
    if not args.out:
        sys.stdout.write(text)
    if low:
        print(f"low-statistics scales: {', '.join(low)}", file=sys.stderr)
    return EXIT_OK


def _fk_kappa_prime(q: int) -> float:
    import math
    return 4.0 * math.pi / math.acos(-math.sqrt(q) / 2.0)


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def cmd_fit(args) -> int:
    import csv as _csv

    from . import lattice
    by_scale: dict[tuple[int, int], dict] = {}
    with open(args.input) as f:
        for row in _csv.DictReader(f):
            key = (int(row["m"]), int(row["n"]))
            entry = by_scale.setdefault(
                key, {"m": key[0], "n": key[1], "samples": int(row["samples"]),
                      "blue": 0, "red": 0, "fk": 0})
            entry[row["channel"]] = int(row["hits"])
    meas = [
        lattice.ArmMeasurement(v["m"], v["n"], v["samples"], v["blue"], v["red"],
                               v["fk"], seed=0)
        for v in by_scale.values()
    ]
    f = lattice.fit_exponent(meas, args.channel)
    rec = ResultRecord("fit", {"input": args.input, "channel": args.channel},
                       {"exponent": f.exponent, "stderr": f.stderr,
                        "intercept": f.intercept, "chi2": f.chi2, "dof": f.dof,
                        "residuals": f.residuals})
    text = dump_json(rec.to_dict(), _out_path(args, ".json") if args.out else None)
    if not args.out:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser plumbing
# ---------------------------------------------------------------------------

def _echo_inputs(args) -> dict:
    skip = {"func", "config", "exact_command", "simulate_command"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cleperc", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="flat key=value config file (flags win)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    common.add_argument("--out", help="output path prefix")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--threads", type=int, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("exact", parents=[common], help="closed-form tables")
    exs = ex.add_subparsers(dest="exact_command", required=True)
    one = exs.add_parser("one-arm", parents=[common])
    one.add_argument("--kappa-prime", dest="kappa_prime", required=True,
                     help="value or grid a:b:n")
    one.add_argument("--r", required=True, help="value or grid a:b:n")
    one.set_defaults(func=cmd_exact)
    tch = exs.add_parser("touch", parents=[common])
    tch.add_argument("--regime", choices=["simple", "nonsimple", "k4"], required=True)
    tch.add_argument("--kappa", type=float, default=4.0)
    tch.add_argument("--rho", required=True, help="value or grid a:b:n")
    tch.set_defaults(func=cmd_exact)
    crm = exs.add_parser("cr-moment", parents=[common])
    crm.add_argument("--regime", choices=["simple", "nonsimple", "k4"], required=True)
    crm.add_argument("--kappa", type=float, default=4.0)
    crm.add_argument("--rho", type=float, required=True)
    crm.add_argument("--lambda", dest="lam", required=True, help="value or grid a:b:n")
    crm.set_defaults(func=cmd_exact)
    chw = exs.add_parser("child-weights", parents=[common])
    chw.add_argument("--kappa", type=float, required=True)
    chw.add_argument("--rho", required=True, help="value or grid a:b:n")
    chw.set_defaults(func=cmd_exact)
    rr = exs.add_parser("rho-r", parents=[common])
    rr.add_argument("--kappa", type=float, required=True)
    rr.add_argument("--r", required=True, help="value or grid a:b:n")
    rr.set_defaults(func=cmd_exact)

    vf = sub.add_parser("verify", parents=[common], help="identity suites")
    vf.add_argument("--only", nargs="*", help="subset of suites")
    vf.set_defaults(func=cmd_verify)

    sim = sub.add_parser("simulate", help="Monte Carlo runs")
    sims = sim.add_subparsers(dest="simulate_command", required=True)
    sle = sims.add_parser("sle", parents=[common])
    sle.add_argument("--regime", choices=["simple", "nonsimple"], default="simple")
    sle.add_argument("--kappa", type=float, required=True)
    sle.add_argument("--rho", type=float, required=True)
    sle.add_argument("-n", type=int, default=10000)
    sle.add_argument("--lambdas", help="comma-separated moment orders")
    sle.add_argument("--dt", type=float, default=1e-3)
    sle.add_argument("--gap-tolerance", dest="gap_tolerance", type=float, default=1e-9)
    sle.set_defaults(func=cmd_simulate_sle)
    lat = sims.add_parser("lattice", parents=[common])
    lat.add_argument("--L", type=int, required=True)
    lat.add_argument("--q", type=int, required=True)
    lat.add_argument("--r", type=float, required=True)
    lat.add_argument("-n", type=int, default=1000)
    lat.add_argument("--burn-in", dest="burn_in", type=int, default=2000)
    lat.add_argument("--thin", type=int, default=5)
    lat.add_argument("--scales", help="comma-separated m:n pairs")
    lat.set_defaults(func=cmd_simulate_lattice)

    ft = sub.add_parser("fit", parents=[common], help="exponent fit from per-scale CSV")
    ft.add_argument("--input", required=True)
    ft.add_argument("--channel", choices=["blue", "red", "fk"], default="blue")
    ft.set_defaults(func=cmd_fit)
    return p


def _apply_config_defaults(parser, argv):
    """Pull --config out of argv and convert its entries into leading
    defaults (command-line flags override by coming later)."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    conf = read_config_file(path)
    injected = []
    for key, val in conf.items():
        injected.extend([f"--{key.replace('_', '-')}", val])
    # insert after the (sub)command tokens: find the first token with '-'
    k = 0
    while k < len(rest) and not rest[k].startswith("-"):
        k += 1
    return rest[:k] + injected + rest[k:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_defaults(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            # argparse uses exit code 2 for usage errors; fold into the
            # validation-error code (help/version exit 0 passes through)
            return EXIT_VALIDATION if e.code else EXIT_OK
        return args.func(args)
    except ParameterError as e:
        print(f"validation error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ClepercError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
