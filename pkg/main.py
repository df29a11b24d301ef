#!/usr/bin/env python3
"""
mkrein: command line front end for the Markov-Krein numerics library
"""

import argparse
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import rgamma

from bessel import BesselEvaluator, bessel_theta_one
from config import Config, RunConfig
from contour import ContourIntegrator
from dirichlet import DirichletProcess
from errors import DegenerateSpectrum, InvalidArgument, NumericalError, SingularEvaluation
from file_processor import FileProcessor, parse_complex, parse_complex_list, parse_int_list
from heckman_opdam import HeckmanOpdamEvaluator, ho_theta_one
from limits import LimitExperiment, TargetDistribution
from markov_krein import MarkovKreinChecker, c_cumulants, mk_moments
from measures import make_measure, moments
from report_exporter import ReportExporter, quadrature_frame, sweep_frame
from schemas import DPConfig, RegimeSchedule
from utils.logging_setup import setup_logging


EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2

GLOBAL_KEYS = {"command", "handler", "log_level", "threads", "out", "tol"}

def build_parser() -> argparse.ArgumentParser:
    """Argument parser for every subcommand"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log-level", default=None, help="Console log level (DEBUG, INFO, WARNING, ERROR); env LOG_LEVEL")
    common.add_argument("--threads", type=int, default=None,
                        help="Worker threads (default: CPU count; env MKREIN_THREADS overrides)")
    common.add_argument("--out", default=None, help="Output file (default: stdout)")
    common.add_argument("--tol", type=float, default=None,
                        help="Absolute quadrature tolerance (default 1e-8; env MKREIN_QUAD_TOL)")

    measure = argparse.ArgumentParser(add_help=False)
    measure.add_argument("--points", default=None, help="Inline atoms, comma separated (e.g. 0,1,2)")
    measure.add_argument("--base", default=None, help="Measure CSV with header atom[,weight]")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=int, default=None, help="Number of random means (default: MKREIN_MC_SAMPLES)")
    sampling.add_argument("--seed", type=int, default=None, help="Unsigned 64-bit seed (default 42; env MKREIN_SEED)")
    sampling.add_argument("--shards", type=int, default=1, help="Independent sampling shards")

    parser = argparse.ArgumentParser(
        prog="mkrein",
        description="Rank-one Bessel and Heckman-Opdam functions, Dirichlet random means "
                    "and Markov-Krein checks by contour quadrature",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py bessel --points 0,1 --theta 1 --u 1
  python main.py ho --points 1,2 --theta 1 --u 1,2
  python main.py transform --points 0,1 --c 2 --kind fourier --u-re 0 --u-im 2 --contour line
  python main.py dp-mean --base two_point.csv --c 2 --samples 1000 --seed 42
  python main.py sweep --target uniform:0,1 --regime classical --N 10,20,40,80 --u 1
  python main.py selftest

Negative complex arguments need the `=` form: --u=-2i
        """
    )
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    sub.required = True
    formatter = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("bessel", parents=[common, measure], formatter_class=formatter,
                       help="Rank-one multivariate Bessel function B_a(u; N, theta)")
    p.add_argument("--theta", type=float, required=True, help="theta > 0 (beta/2)")
    p.add_argument("--u", required=True, help="Argument(s), comma separated complex numbers (e.g. 1,2i,1+i)")
    p.set_defaults(handler=cmd_bessel)

    p = sub.add_parser("ho", parents=[common, measure], formatter_class=formatter,
                       help="Rank-one Heckman-Opdam function F_{log a}(u; N, theta), positive points")
    p.add_argument("--theta", type=float, required=True, help="theta > 0 (beta/2)")
    p.add_argument("--u", required=True, help="Argument(s) with Re u > 0, comma separated")
    p.set_defaults(handler=cmd_ho)

    p = sub.add_parser("transform", parents=[common, measure], formatter_class=formatter,
                       help="Fourier or Mellin transform of rho^(c)")
    p.add_argument("--c", type=float, required=True, help="Concentration c > 0")
    p.add_argument("--kind", choices=["fourier", "mellin"], default="fourier", help="Transform kind")
    p.add_argument("--u", default=None, help="Argument as one complex number (alternative to --u-re/--u-im)")
    p.add_argument("--u-re", type=float, default=None, help="Real part of u")
    p.add_argument("--u-im", type=float, default=0.0, help="Imaginary part of u")
    p.add_argument("--contour", choices=["hankel", "line"], default="hankel",
                   help="Rotated Hankel loop, or the line R - i*delta*sgn(t) (u = it, c > 1)")
    p.add_argument("--delta", type=float, default=None, help="Line offset delta > 0 (default 1.0; env MKREIN_LINE_DELTA)")
    p.set_defaults(handler=cmd_transform)

    p = sub.add_parser("dp-mean", parents=[common, measure, sampling], formatter_class=formatter,
                       help="Monte Carlo random means of the Dirichlet process D_{c rho}")
    p.add_argument("--c", type=float, required=True, help="Concentration c > 0")
    p.set_defaults(handler=cmd_dp_mean)

    p = sub.add_parser("mk-check", parents=[common, measure, sampling], formatter_class=formatter,
                       help="Markov-Krein residuals on a grid of z")
    p.add_argument("--c", type=float, required=True, help="Concentration c > 0")
    p.add_argument("--z", default="1+1i,0.5+2i,-1+0.5i,3i",
                   help="Grid points at distance >= 0.5 from the support, comma separated")
    p.set_defaults(handler=cmd_mk_check)

    p = sub.add_parser("mk-moments", parents=[common, measure], formatter_class=formatter,
                       help="Moments and c-cumulants of rho^(c) from the moments of rho")
    p.add_argument("--c", type=float, required=True, help="Concentration c > 0")
    p.add_argument("--n-max", type=int, default=8, help="Moment order (at most 24)")
    p.set_defaults(handler=cmd_mk_moments)

    p = sub.add_parser("conjecture", parents=[common], formatter_class=formatter,
                       help="Positivity probe for the additive c-cumulant convolution")
    p.add_argument("--rho1", default=None, help="Inline atoms of the first measure")
    p.add_argument("--rho2", default=None, help="Inline atoms of the second measure")
    p.add_argument("--base1", default=None, help="CSV of the first measure")
    p.add_argument("--base2", default=None, help="CSV of the second measure")
    p.add_argument("--c", type=float, required=True, help="Concentration c > 0")
    p.add_argument("--n-max", type=int, default=8, help="Even moment order (at most 24)")
    p.set_defaults(handler=cmd_conjecture)

    p = sub.add_parser("sweep", parents=[common], formatter_class=formatter,
                       help="Convergence sweep of finite-N values toward the limit transform")
    p.add_argument("--target", required=True,
                   help="uniform:a,b | semicircle:r | two_point:p[,lo,hi] | beta:alpha,beta")
    p.add_argument("--regime", choices=["classical", "high-temp", "free"], default="classical",
                   help="beta_N schedule: 1/N^2 (classical) or 2c/N (high-temp)")
    p.add_argument("--kind", choices=["fourier", "mellin"], default="fourier", help="Symmetric function family")
    p.add_argument("--c", type=float, default=1.0, help="High-temperature constant c > 0")
    p.add_argument("--N", dest="n_list", default="10,20,40,80", help="Sizes N, comma separated")
    p.add_argument("--u", default="1", help="Arguments, comma separated complex numbers")
    p.add_argument("--no-mc", action="store_true", help="Skip the Monte Carlo reference columns")
    p.add_argument("--excel", default=None, help="Also write a styled Excel workbook (relative paths go under OUTPUT_DIR)")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("selftest", parents=[common], formatter_class=formatter,
                       help="Quadrature self-tests, theta=1 oracles and Beta closed forms")
    p.set_defaults(handler=cmd_selftest)

    return parser

def _run_config(args: argparse.Namespace, config: Config, log_level: str) -> RunConfig:
    options = {k: v for k, v in vars(args).items() if k not in GLOBAL_KEYS}
    return RunConfig.from_args(args.command, options, config, args.out, log_level)

def cmd_bessel(args, config: Config, run_config: RunConfig, exporter: ReportExporter) -> int:
    points = FileProcessor(config).resolve_points(args.points, args.base)
    evaluator = BesselEvaluator(config)
    u_values = parse_complex_list(args.u)
    results = [evaluator.bessel_rank_one(evaluator.query(points, u, args.theta)) for u in u_values]
    exporter.write_csv(quadrature_frame(u_values, results), run_config, args.out)
    return EXIT_OK

def cmd_ho(args, config: Config, run_config: RunConfig, exporter: ReportExporter) -> int:
    points = FileProcessor(config).resolve_points(args.points, args.base)
    evaluator = HeckmanOpdamEvaluator(config)
    u_values = parse_complex_list(args.u)
    results = [evaluator.ho_rank_one(evaluator.query(points, u, args.theta)) for u in u_values]
    exporter.write_csv(quadrature_frame(u_values, results), run_config, args.out)
    return EXIT_OK

def cmd_transform(args, config: Config, run_config: RunConfig, exporter: ReportExporter) -> int:
    rho = FileProcessor(config).resolve_measure(args.points, args.base)
    if args.u is not None:
        if args.u_re is not None:
            raise InvalidArgument("give either --u or --u-re/--u-im, not both")
        u = parse_complex(args.u)
    elif args.u_re is not None:
        u = complex(args.u_re, args.u_im)
    else:
        raise InvalidArgument("an argument is required (--u or --u-re/--u-im)")
    dp = DirichletProcess(config)
    if args.kind == "fourier":
        result = dp.fourier_rho_c(rho, args.c, u, contour=args.contour, delta=args.delta)
    else:
        if args.contour != "hankel":
            raise InvalidArgument("the Mellin transform only supports the hankel contour")
        result = dp.mellin_rho_c(rho, args.c, u)
    exporter.write_csv(quadrature_frame([u], [result]), run_config, args.out)
    return EXIT_OK

def _sample(args, config: Config, rho) -> Any:
    cfg = DPConfig(
        base=rho,
        concentration=args.c,
        n_samples=args.samples if args.samples is not None else config.mc_samples,
        seed=args.seed if args.seed is not None else config.seed,
        shards=args.shards,
    )
    return DirichletProcess(config).random_mean_samples(cfg)

def cmd_dp_mean(args, config: Config, run_config: RunConfig, exporter: ReportExporter) -> int:
    rho = FileProcessor(config).resolve_measure(args.points, args.base)
    sample = _sample(args, config, rho)
    exporter.write_csv(pd.DataFrame({"sample": sample.values}), run_config, args.out)
    return EXIT_OK

def cmd_mk_check(args, config: Config, run_config: RunConfig, exporter: ReportExporter) -> int:
    rho = FileProcessor(config).resolve_measure(args.points, args.base)
    sample = _sample(args, config, rho)
    report = MarkovKreinChecker(config).mk_residual(rho, args.c, sample, parse_complex_list(args.z))
    exporter.write_json(report.to_dict(), run_config, args.out)
    return EXIT_OK

def cmd_mk_moments(args, config: Config, run_config: RunConfig, exporter: ReportExporter) -> int:
    rho = FileProcessor(config).resolve_measure(args.points, args.base)
    m = moments(rho, args.n_max)
    m_prime = mk_moments(m, args.c)
    cumulants = c_cumulants(m_prime)
    payload = {
        "c": args.c,
        "moments": m.values.tolist(),
        "mk_moments": m_prime.values.tolist(),
        "kappa": cumulants.kappa.tolist(),
        "kappa_tilde": cumulants.kappa_tilde.tolist(),
        "hankel_min_eig": m_prime.hankel_min_eigenvalue(),
    }
    exporter.write_json(payload, run_config, args.out)
    return EXIT_OK

def cmd_conjecture(args, config: Config, run_config: RunConfig, exporter: ReportExporter) -> int:
    files = FileProcessor(config)
    rho1 = files.resolve_measure(args.rho1, args.base1)
    rho2 = files.resolve_measure(args.rho2, args.base2)
    report = MarkovKreinChecker(config).conjecture_probe(rho1, rho2, args.c, args.n_max)
    exporter.write_json(report.to_dict(), run_config, args.out)
    return EXIT_OK

def cmd_sweep(args, config: Config, run_config: RunConfig, exporter: ReportExporter) -> int:
    target = TargetDistribution.parse(args.target)
    u_grid = parse_complex_list(args.u)
    n_list = parse_int_list(args.n_list)
    experiment = LimitExperiment(config, show_progress=True)
    if args.regime == "free":
        raise InvalidArgument("the free regime has no implemented limit; use classical or high-temp")
    with_mc = not args.no_mc
    if args.kind == "fourier":
        if args.regime == "classical":
            report = experiment.classical_sweep(target, u_grid, n_list)
        else:
            report = experiment.high_temp_sweep(target, u_grid, n_list, args.c, with_mc=with_mc)
    else:
        schedule = RegimeSchedule("classical") if args.regime == "classical" else \
            RegimeSchedule("high_temperature", c_target=args.c)
        report = experiment.mellin_sweep(target, u_grid, n_list, schedule, with_mc=with_mc)
    exporter.write_csv(sweep_frame(report), run_config, args.out)
    if args.excel:
        exporter.export_sweep_workbook(report, run_config, args.excel)
    return EXIT_OK

def _check(name: str, compute: Callable[[], complex], expected: complex, bound: float, relative: bool = False) -> Dict[str, Any]:
    value = complex(compute())
    error = abs(value - expected) / (abs(expected) if relative else 1.0)
    return {"name": name, "value": value, "expected": complex(expected), "error": error, "passed": bool(error <= bound)}

def run_selftest(config: Config) -> List[Dict[str, Any]]:
    """Desk-scale versions of the quadrature, oracle and closed-form checks"""
    integrator = ContourIntegrator(config)
    bessel = BesselEvaluator(config)
    ho = HeckmanOpdamEvaluator(config)
    dp = DirichletProcess(config)
    checks = []
    # oracle checks are relative
    oracle_tol = min(config.quad_tol, 1e-10)

    for c in (0.5, 1.0, 2.5):
        checks.append(_check(f"reciprocal_gamma c={c}", lambda: integrator.reciprocal_gamma_check(c).value,
                             rgamma(c), 1e-6))
        for u in (1, -1, 2j, -2j, 1 + 1j):
            for x in (-1.0, 0.0, 0.7):
                checks.append(_check(f"gamma c={c} u={u} x={x}",
                                     lambda: integrator.gamma_identity_check(c, u, x),
                                     np.exp(u * x), 1e-6))
        for u in (1, 1 + 1j):
            checks.append(_check(f"beta c={c} u={u} x=0.7",
                                 lambda: integrator.beta_identity_check(c, u, 0.7),
                                 np.exp(u * np.log(0.7)), 1e-6))

    for n in (2, 3, 4):
        points = np.arange(n, dtype=float)
        for u in (1, -2, 3j, -3j, 1 + 2j):
            checks.append(_check(f"bessel theta=1 N={n} u={u}",
                                 lambda: bessel.bessel_rank_one(bessel.query(points, u, 1.0, oracle_tol)).value,
                                 bessel_theta_one(points, u), 1e-6, relative=True))
        positive = points + 1.0
        for u in (1, 2):
            checks.append(_check(f"ho theta=1 N={n} u={u}",
                                 lambda: ho.ho_rank_one(ho.query(positive, u, 1.0, oracle_tol)).value,
                                 ho_theta_one(positive, u), 1e-6, relative=True))

    two_point = make_measure([0.0, 1.0])
    shifted = make_measure([1.0, 2.0])
    checks.append(_check("fourier uniform[0,1] u=1", lambda: dp.fourier_rho_c(two_point, 2.0, 1.0).value,
                         math.e - 1.0, 1e-6))
    checks.append(_check("mellin uniform[1,2] u=1", lambda: dp.mellin_rho_c(shifted, 2.0, 1.0).value, 1.5, 1e-6))
    checks.append(_check("mellin uniform[1,2] u=2", lambda: dp.mellin_rho_c(shifted, 2.0, 2.0).value, 7.0 / 3.0, 1e-6))
    return checks

def cmd_selftest(args, config: Config, run_config: RunConfig, exporter: ReportExporter) -> int:
    checks = run_selftest(config)
    passed = all(check["passed"] for check in checks)
    failures = [check["name"] for check in checks if not check["passed"]]
    exporter.write_json({"checks": checks, "failures": failures, "passed": passed}, run_config, args.out)
    return EXIT_OK if passed else EXIT_NUMERICAL

def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv, run one subcommand and map failures to exit codes

    Returns:
        0 on success, 1 on numerical failure, 2 on invalid arguments
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        config = Config(quad_tol=args.tol, threads=args.threads)
        log_level = args.log_level or config.log_level
        setup_logging(log_level, config.log_file)
    except (InvalidArgument, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    logger = logging.getLogger(__name__)
    try:
        run_config = _run_config(args, config, log_level)
        logger.debug(f"Run configuration: {run_config.to_json()}")
        return args.handler(args, config, run_config, ReportExporter(config))
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (InvalidArgument, DegenerateSpectrum, SingularEvaluation, FileNotFoundError) as e:
        logger.debug(f"Invalid arguments: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

def main():
    """Main entry point for the mkrein command line"""
    sys.exit(dispatch())

if __name__ == "__main__":
    main()
