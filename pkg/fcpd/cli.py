"""
Command line interface

    fcpd detect FILE [--d 1 --alpha 0.10 --aligned --estimator bartlett --trace]
    fcpd simulate --scenario A C F --n 200 300 --reps 500
    fcpd critval --d 1 --alpha 0.10 [--reps N --grid M --seed S] [--table]
    fcpd gen --scenario B --n 200 --seed 7 --out sample.csv [--curves]
    fcpd components [FILE | --scenario C | --demo]
    fcpd oracle --scenario B --what {Gg|sup|sn}

Exit codes: 0 no rejection (or success), 3 rejection, 1 usage or data error.
"""

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

import pandas as pd

from fcpd import __version__
from fcpd.config import MAX_THREADS, get_log_level
from fcpd.covariance import BandwidthRule, KernelSpec, covariance_for
from fcpd.critval import CritvalConfig, critical_value, critval_table
from fcpd.cusum import CusumConfig, aligned_components, decide, run_cusum
from fcpd.datagen import SCENARIOS, alignment_demo, known_directions, scenario, scenario_trend
from fcpd.errors import FcpdError, SampleSizeError
from fcpd.hilbert import FOURIER_25, BasisDescriptor, unit_grid
from fcpd.io import INPUT_KINDS, components_frame, read_sample, sample_to_curves, write_coefficients, write_curves, write_report
from fcpd.manifest import RunManifest
from fcpd.oracle import TrendHandle, alt_covariance_limit, drift_sup, trend_variance
from fcpd.simulation import RejectionStudy, StudyConfig
from fcpd.spectral import eig_sym

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECT = 3

MIN_DETECT_SIZE = 10
DEFAULT_SIM_SEED = 1
DEFAULT_GEN_SEED = 0


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='Random seed')
    common.add_argument('--threads', type=int, default=None,
                        help=f'Worker threads (default FCPD_THREADS, capped at {MAX_THREADS})')
    common.add_argument('--out', type=str, default=None, help='Output file (default stdout)')
    common.add_argument('--format', choices=['csv', 'json'], default=None, help='Output format')
    common.add_argument('--log-level', type=str, default=None, help='Logging level (default FCPD_LOG_LEVEL)')
    return common


def _statistic_flags(parser: argparse.ArgumentParser, with_d: bool = True):
    if with_d:
        parser.add_argument('--d', type=int, default=1, help='Projection dimension (default 1)')
    parser.add_argument('--estimator', choices=['cov0', 'bartlett'], default='cov0',
                        help='Covariance used for the principal components (default cov0)')
    parser.add_argument('--kernel', type=str, default='flattop', help='flattop, bartlett or parzen')
    parser.add_argument('--bandwidth-exp', type=float, default=0.2, help='h = floor(n^exp) (default 0.2)')
    parser.add_argument('--bandwidth', type=int, default=None, help='Fixed bandwidth h, overrides --bandwidth-exp')
    parser.add_argument('--gamma', type=float, default=0.4, help='Alignment exponent in (0, 1/2) (default 0.4)')


def _critval_flags(parser: argparse.ArgumentParser, seed_flag: Optional[str] = '--critval-seed',
                   reps_flag: str = '--reps'):
    defaults = CritvalConfig()
    parser.add_argument(reps_flag, type=int, default=defaults.replications, dest='critval_reps',
                        help=f'Monte Carlo replications for the critical value (default {defaults.replications})')
    parser.add_argument('--grid', type=int, default=defaults.grid_size,
                        help=f'Bridge grid size (default {defaults.grid_size})')
    if seed_flag:
        parser.add_argument(seed_flag, type=int, default=defaults.seed, dest='critval_seed',
                            help=f'Monte Carlo seed (default {defaults.seed})')
    parser.add_argument('--no-correction', action='store_true',
                        help='Do not add the grid continuity correction to simulated suprema')


def _kernel(args) -> KernelSpec:
    return KernelSpec.from_name(args.kernel)


def _bandwidth(args) -> BandwidthRule:
    if args.bandwidth is not None:
        return BandwidthRule.fixed(args.bandwidth)
    return BandwidthRule('power-law', args.bandwidth_exp)


def _cusum_config(args, aligned: bool) -> CusumConfig:
    return CusumConfig(d=args.d, gamma=args.gamma, aligned=aligned, estimator=args.estimator,
                       kernel=_kernel(args), bandwidth=_bandwidth(args))


def _critval_config(args, d: int = 1, seed: Optional[int] = None) -> CritvalConfig:
    return CritvalConfig(d=d, grid_size=args.grid, replications=args.critval_reps,
                         seed=args.critval_seed if seed is None else seed,
                         continuity_correction=not args.no_correction)


def _write_frame(frame: pd.DataFrame, args, default_format: str = 'csv'):
    fmt = args.format or default_format
    if args.out is None:
        if fmt == 'json':
            print(frame.to_json(orient='records', indent=2))
        else:
            print(frame.to_csv(index=False), end='')
        return
    directory = os.path.dirname(args.out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if fmt == 'json':
        frame.to_json(args.out, orient='records', indent=2)
    else:
        frame.to_csv(args.out, index=False)
    logger.info(f"Saved {len(frame)} rows to {args.out}")


def _manifest(args, command: str, seeds: List[int]) -> RunManifest:
    params = {k: v for k, v in vars(args).items() if k not in ('func', 'log_level', 'threads')}
    return RunManifest(command=command, params=params, seeds=[s for s in seeds if s is not None])


def cmd_detect(args) -> int:
    sample = read_sample(args.input, args.input_kind, BasisDescriptor('fourier', args.p))
    if sample.n < MIN_DETECT_SIZE:
        raise SampleSizeError(f"detect needs at least {MIN_DETECT_SIZE} observations, got {sample.n}")

    config = _cusum_config(args, args.aligned)
    result = run_cusum(sample, config)
    result = decide(result, args.alpha, _critval_config(args, config.d))
    report = result.to_report(include_trace=args.trace)

    if (args.format or 'json') == 'csv':
        _write_frame(pd.DataFrame([{k: v for k, v in report.items() if k != 'trace'}]), args)
    else:
        write_report(report, args.out)
    if args.out:
        _manifest(args, 'detect', [args.critval_seed]).write_beside(args.out)
    return EXIT_REJECT if result.reject else EXIT_OK


def cmd_simulate(args) -> int:
    seed = DEFAULT_SIM_SEED if args.seed is None else args.seed
    config = StudyConfig(
        scenarios=tuple(args.scenario), sample_sizes=tuple(args.n), replications=args.reps,
        seed=seed, alpha=args.alpha, d=args.d, gamma=args.gamma,
        kernel=_kernel(args), bandwidth=_bandwidth(args), psi_norm=args.psi,
        critval=_critval_config(args, args.d),
    )
    study = RejectionStudy(config, threads=args.threads, persist=not args.no_db)
    study.run()
    study.print_summary()

    out = args.out or os.path.join('results', f"rejection_rates_seed{seed}.{args.format or 'csv'}")
    study.save_results(out, args.format or 'csv')
    print(f"Rejection table saved to {out}")
    return EXIT_OK


def cmd_critval(args) -> int:
    seed = CritvalConfig().seed if args.seed is None else args.seed
    config = _critval_config(args, args.d, seed=seed)
    if args.table:
        _write_frame(critval_table(config=config), args)
    else:
        value = critical_value(args.d, args.alpha, config)
        if (args.format or 'csv') == 'json':
            print(json.dumps({'d': args.d, 'alpha': args.alpha, 'critical_value': value}))
        else:
            print(f"{value:.6f}")
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = DEFAULT_GEN_SEED if args.seed is None else args.seed
    sample = scenario(args.scenario, args.n, seed=seed, psi_norm=args.psi)
    if args.out is None:
        raise FcpdError("gen needs --out")
    directory = os.path.dirname(args.out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if args.curves:
        grid = unit_grid(args.grid_size)
        write_curves(sample_to_curves(sample, grid), grid, args.out)
    else:
        write_coefficients(sample, args.out)
    _manifest(args, 'gen', [seed]).write_beside(args.out)
    print(f"Wrote {sample.n} observations of scenario {args.scenario.upper()} to {args.out}")
    return EXIT_OK


def cmd_components(args) -> int:
    deltas = []
    seed = DEFAULT_GEN_SEED if args.seed is None else args.seed
    if args.demo:
        sample, trend = alignment_demo(args.n, seed=seed)
        deltas = [c.delta for c in trend.components]
    elif args.input:
        sample = read_sample(args.input, args.input_kind, BasisDescriptor('fourier', args.p))
    else:
        sample = scenario(args.scenario, args.n, seed=seed)
        deltas = known_directions(args.scenario)

    sample.require(2)
    config = _cusum_config(args, aligned=True)
    E = eig_sym(covariance_for(sample, config.estimator, config.kernel, config.bandwidth))
    v1_aligned = aligned_components(sample, E, 1, config.gamma)[:, 0]

    grid = unit_grid(args.grid_size) if args.curves else None
    frame = components_frame(E, args.count or sample.p, sample.basis, grid, v1_aligned, deltas)
    _write_frame(frame, args)

    v1 = E.component(1)
    logger.info(f"|<v1', v1>| = {abs(v1_aligned @ v1):.4f}")
    for i, delta in enumerate(deltas, start=1):
        logger.info(f"delta{i}: |<v1, delta>| = {abs(v1 @ delta):.4f}, |<v1', delta>| = {abs(v1_aligned @ delta):.4f}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    trend = scenario_trend(args.scenario)
    if args.what == 'sup':
        value = drift_sup(trend)
    elif args.what == 'Gg':
        value = [trend_variance(TrendHandle.from_trend(c.g)) for c in trend.components]
        value = value[0] if len(value) == 1 else value
    else:
        h = args.bandwidth if args.bandwidth is not None else BandwidthRule('power-law', args.bandwidth_exp).resolve(args.n)
        limit = alt_covariance_limit(trend, _kernel(args), args.n, h)
        value = {'s_n': limit.s_n, 'kappa': limit.kappa, 'h': h}
    print(json.dumps({'scenario': args.scenario.upper(), 'what': args.what, 'value': value}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog='fcpd', description='Functional CUSUM change-point detection')
    parser.add_argument('--version', action='version', version=f'fcpd {__version__}')
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('detect', parents=[common], help='Test one sample for a change in the mean')
    p.add_argument('input', help='Coefficient or curve CSV')
    p.add_argument('--input-kind', choices=INPUT_KINDS, default='auto')
    p.add_argument('--p', type=int, default=FOURIER_25.dimension, help='Basis dimension for curve input (default 25)')
    p.add_argument('--alpha', type=float, default=0.10, help='Level (default 0.10)')
    p.add_argument('--aligned', action='store_true', help='Use the change-aligned first component')
    p.add_argument('--trace', action='store_true', help='Include per-k scores in the report')
    _statistic_flags(p)
    _critval_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser('simulate', parents=[common], help='Rejection rates over scenarios and sample sizes')
    p.add_argument('--scenario', nargs='+', default=list(SCENARIOS), help='Scenarios A-F (default all)')
    p.add_argument('--n', nargs='+', type=int, default=[100, 200, 300, 400, 500], help='Sample sizes')
    p.add_argument('--reps', type=int, default=1000, dest='reps', help='Replications per cell (default 1000)')
    p.add_argument('--alpha', type=float, default=0.10)
    p.add_argument('--psi', type=float, default=None, help='FAR(1) operator norm for dependent noise')
    p.add_argument('--no-db', action='store_true', help='Do not store the run in the database')
    _statistic_flags(p)
    _critval_flags(p, reps_flag='--critval-reps')
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('critval', parents=[common], help='Critical value of the bridge supremum')
    p.add_argument('--d', type=int, default=1)
    p.add_argument('--alpha', type=float, default=0.10)
    p.add_argument('--table', action='store_true', help='Table for alpha in {0.10, 0.05, 0.01}, d = 1..5')
    _critval_flags(p, seed_flag=None)
    p.set_defaults(func=cmd_critval)

    p = sub.add_parser('gen', parents=[common], help='Generate a scenario sample')
    p.add_argument('--scenario', choices=SCENARIOS, type=str.upper, default='A')
    p.add_argument('--n', type=int, default=200)
    p.add_argument('--psi', type=float, default=None, help='FAR(1) operator norm for dependent noise')
    p.add_argument('--curves', action='store_true', help='Write grid values instead of coefficients')
    p.add_argument('--grid-size', type=int, default=1001)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser('components', parents=[common], help='Export principal and aligned components')
    p.add_argument('input', nargs='?', default=None, help='Coefficient or curve CSV')
    p.add_argument('--input-kind', choices=INPUT_KINDS, default='auto')
    p.add_argument('--p', type=int, default=FOURIER_25.dimension)
    p.add_argument('--scenario', choices=SCENARIOS, type=str.upper, default='A')
    p.add_argument('--demo', action='store_true', help='Use the alignment demonstration setting')
    p.add_argument('--n', type=int, default=200)
    p.add_argument('--count', type=int, default=None, help='Number of components (default p)')
    p.add_argument('--curves', action='store_true', help='Evaluate components on a grid')
    p.add_argument('--grid-size', type=int, default=101)
    _statistic_flags(p, with_d=False)
    p.set_defaults(func=cmd_components, d=1)

    p = sub.add_parser('oracle', parents=[common], help='Theory quantities of a scenario trend')
    p.add_argument('--scenario', choices=SCENARIOS, type=str.upper, default='B')
    p.add_argument('--what', choices=['Gg', 'sup', 'sn'], default='Gg')
    p.add_argument('--n', type=int, default=5000)
    p.add_argument('--kernel', type=str, default='flattop')
    p.add_argument('--bandwidth-exp', type=float, default=0.2)
    p.add_argument('--bandwidth', type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=(args.log_level or get_log_level()).upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    if args.threads is not None:
        os.environ['FCPD_THREADS'] = str(args.threads)

    try:
        return args.func(args)
    except (FcpdError, ValueError, OSError) as e:
        print(f"fcpd {args.command}: error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return EXIT_ERROR
