import sys
import json
import time
import logging
import argparse
from typing import Dict, List, Optional

import numpy as np

from modules import __version__
from modules.analysis import compare_to_poisson, default_nu, degree_sequence_checks, mu_of, scalar_report, write_pmf_csv
from modules.chain_pool import ChainPool
from modules.chains import ChainConfig, ChainKind
from modules.config import config_float, config_int, load_config
from modules.database import SpaceCache
from modules.enumeration import (
    ROW_SUM_TOL,
    build_matrix,
    census_ratio_check,
    check_irreducible,
    closed_form_stationary,
    detailed_balance_error,
    enumerate_space,
    path_ensemble_stats,
    spectral_report,
    stationary_exact,
    summary,
)
from modules.errors import InvalidInput, TrichainError
from modules.graph_core import (
    DegreeSequence,
    Switch,
    count_nonincident_pairs,
    from_degree_sequence,
    parse_degrees,
    read_graph,
    write_graph,
)
from modules.simulation_paths import simulate_switch, verify_path

logger = logging.getLogger(__name__)


def configure_logging(level: str):
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True
    )


def _count(text: str) -> int:
    """Integer flag accepting 1e6 style values"""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value < 0 or value != int(value):
        raise argparse.ArgumentTypeError(f"not a non-negative integer: {text!r}")
    return int(value)


def _nu(text: str, n: int) -> Optional[int]:
    if text == 'none':
        return None
    if text == 'auto':
        return default_nu(n)
    try:
        return int(text)
    except ValueError:
        raise InvalidInput(f"--nu must be 'none', 'auto' or an integer, got {text!r}")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"Cannot serialize {type(obj).__name__}")


def manifest(command: str, args: argparse.Namespace, started: float, outputs: List[str]) -> Dict:
    params = {k: v for k, v in vars(args).items() if k not in ('func', 'command')}
    return {
        'command': command,
        'config': params,
        'inputs': [p for p in (getattr(args, 'graph', None),) if p],
        'outputs': outputs,
        'version': __version__,
        'wall_time': round(time.perf_counter() - started, 6),
    }


def _emit(data: Dict, out: Optional[str]):
    text = json.dumps(data, indent=2, default=_json_default)
    if out:
        with open(out, 'w') as fh:
            fh.write(text + "\n")
        logger.info(f"Wrote {out}")
    else:
        print(text)


def cmd_sample(args: argparse.Namespace, config: Dict) -> int:
    started = time.perf_counter()
    if args.graph:
        g = read_graph(args.graph)
        d = DegreeSequence(tuple(g.degrees()))
    else:
        d = parse_degrees(args.degrees)
        g = from_degree_sequence(d)
    which = ChainKind(args.chain)
    cfg = ChainConfig(
        lam=args.lam,
        nu_cap=_nu(args.nu, d.n),
        seed=args.seed,
        steps=args.steps,
        burn_in=args.burn_in,
        thin=args.thin,
    )
    jobs = args.jobs if args.jobs is not None else config_int(config, 'TRICHAIN_JOBS')
    stats = ChainPool(jobs).run(g, cfg, which, chains=args.chains)

    effective_lam = 1.0 if which is ChainKind.SWITCH else cfg.lam
    outputs = [args.out] if args.out else []
    if args.format == 'csv':
        lines = ["sample,step,t"]
        per_chain = len(stats.samples) // max(1, stats.chains)
        for i, t in enumerate(stats.samples):
            step = (i % per_chain + 1) * cfg.thin if per_chain else 0
            lines.append(f"{i},{step},{t}")
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, 'w') as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0

    report = stats.to_dict()
    if stats.n_samples:
        poisson = compare_to_poisson(stats, effective_lam * mu_of(d))
        threshold = config_float(config, 'TRICHAIN_TV_THRESHOLD') if args.tv_threshold is None else args.tv_threshold
        poisson['threshold'] = threshold
        poisson['within_threshold'] = poisson['tv'] <= threshold
        report['poisson'] = poisson
        if args.pmf_csv:
            write_pmf_csv(poisson, args.pmf_csv)
            outputs.append(args.pmf_csv)
    report['chain'] = which.value
    report['scalars'] = scalar_report(d, cfg.lam, cfg.nu_cap).to_dict()
    report['manifest'] = manifest('sample', args, started, outputs)
    _emit(report, args.out)
    return 0


def _space_for(d, config: Dict, limit: int):
    cache_path = config.get('TRICHAIN_CACHE_DB', '')
    cache = SpaceCache(cache_path) if cache_path else None
    space = cache.load_space(d) if cache else None
    if space is None:
        space = enumerate_space(d, limit)
        if cache:
            cache.save_space(space)
    return space


def cmd_verify(args: argparse.Namespace, config: Dict) -> int:
    started = time.perf_counter()
    d = parse_degrees(args.degrees)
    limit = args.limit if args.limit is not None else config_int(config, 'TRICHAIN_ENUM_LIMIT')
    stat_tol = config_float(config, 'TRICHAIN_STATIONARY_TOL') if args.stationary_tol is None else args.stationary_tol
    balance_tol = config_float(config, 'TRICHAIN_BALANCE_TOL')
    space = _space_for(d, config, limit)
    asserted = d.min_degree >= 3
    rows = []

    def row(name: str, value, passed: Optional[bool]):
        status = 'INFO' if passed is None else ('PASS' if passed else 'FAIL')
        rows.append({'check': name, 'value': value, 'status': status})

    row('states', space.size, None)
    row('census total', sum(space.census.values()), sum(space.census.values()) == space.size)
    pair_counts = {count_nonincident_pairs(space.graph(i)) for i in range(space.size)}
    row('a(d) identity', d.a_d, pair_counts == {d.a_d})

    build_matrix(space, ChainKind.SWITCH)
    row('switch chain irreducible', check_irreducible(space), check_irreducible(space))

    nu = _nu(args.nu, d.n)
    variants = [(lam, None) for lam in args.lambdas]
    if nu is not None:
        variants += [(lam, nu) for lam in args.lambdas]
    for lam, cap in variants:
        label = f"lambda={lam:g}" + (f", nu={cap}" if cap is not None else "")
        matrix = build_matrix(space, ChainKind.TRI_SWITCH, lam, cap)
        rows_ok = float(np.abs(np.asarray(matrix.sum(axis=1)).ravel() - 1.0).max()) <= ROW_SUM_TOL
        diag_min = float(matrix.diagonal().min())
        row(f"row sums [{label}]", rows_ok, rows_ok)
        row(f"min P(G,G) >= 1/3 [{label}]", round(diag_min, 12), diag_min >= 1 / 3 - 1e-12)
        irreducible = check_irreducible(space)
        row(f"triangle-switch irreducible [{label}]", irreducible, irreducible if asserted else None)
        if not irreducible:
            continue
        pi = stationary_exact(space, tol=stat_tol)
        err = float(np.abs(pi - closed_form_stationary(space, lam, cap)).max())
        row(f"stationary = closed form [{label}]", f"{err:.2e}", err < stat_tol)
        balance = detailed_balance_error(space, pi)
        row(f"detailed balance [{label}]", f"{balance:.2e}", balance < balance_tol)

    build_matrix(space, ChainKind.TRI_SWITCH, args.lambdas[0], None)
    if check_irreducible(space):
        spectrum = spectral_report(space)
        row('smallest eigenvalue chain (1+mu_min)^-1 <= max 1/(2P(H,H)) <= 3/2',
            f"{spectrum.smallest_eigen_lhs:.4f} <= {spectrum.self_loop_bound:.4f}", spectrum.smallest_eigen_ok)
        row('mu1', round(spectrum.mu1, 10), None)
        row('tau bound', round(spectrum.tau_bound, 4), None)

    if asserted:
        paths = path_ensemble_stats(space, args.lambdas[0], None)
        row('ell(Sigma) <= 5', paths.ell, paths.ell <= 5)
        row('B(Sigma) <= 20 d1^2 (2M + d1^2)', f"{paths.b_sigma} <= {paths.bound}", paths.b_sigma <= paths.bound)
        row('simulation gap D', round(paths.d_gap, 6), None)
        row('stationary ratio R', round(paths.r_ratio, 6), None)
        row('cases', paths.case_counts, None)
    else:
        row('path ensemble', f"skipped, minimum degree {d.min_degree} < 3", None)

    checks = degree_sequence_checks(d)
    row('mean degree >= 2 implies M2 >= M', f"M2={d.M2}, M={d.M}", checks['implication_holds'])

    width = max(len(r['check']) for r in rows)
    print("=" * 60)
    print(f"verify {d.label()}  (trichain {__version__})")
    print("=" * 60)
    for r in rows:
        print(f"{r['check']:<{width}}  {r['status']:<4}  {r['value']}")
    print("=" * 60)

    failed = [r for r in rows if r['status'] == 'FAIL']
    if args.out:
        data = summary(space, {r['check']: r for r in rows})
        data['manifest'] = manifest('verify', args, started, [args.out])
        _emit(data, args.out)
    if failed:
        logger.error(f"{len(failed)} check(s) failed")
        return 5
    return 0


def _parse_switch(text: str) -> Switch:
    parts = [p for p in text.replace(' ', '').split(',') if p]
    if len(parts) != 4:
        raise InvalidInput(f"--switch needs four comma-separated vertex labels, got {text!r}")
    try:
        return Switch(*(int(p) for p in parts))
    except ValueError:
        raise InvalidInput(f"Malformed vertex labels in {text!r}")


def cmd_path(args: argparse.Namespace, config: Dict) -> int:
    started = time.perf_counter()
    g = read_graph(args.graph)
    s = _parse_switch(args.switch)
    path = simulate_switch(g, s)
    data = path.to_dict()
    data['length'] = len(path)
    data['verified'] = bool(verify_path(g, s, path))
    data['manifest'] = manifest('path', args, started, [args.out] if args.out else [])
    _emit(data, args.out)
    return 0


def cmd_realize(args: argparse.Namespace, config: Dict) -> int:
    d = parse_degrees(args.degrees)
    g = from_degree_sequence(d, seed=args.seed)
    write_graph(g, args.out)
    return 0


def cmd_census(args: argparse.Namespace, config: Dict) -> int:
    started = time.perf_counter()
    d = parse_degrees(args.degrees)
    limit = args.limit if args.limit is not None else config_int(config, 'TRICHAIN_ENUM_LIMIT')
    space = _space_for(d, config, limit)
    report = census_ratio_check(space, args.t0)
    if args.pmf_csv:
        uniform = {t: c / space.size for t, c in space.census.items()}
        write_pmf_csv(compare_to_poisson(uniform, report['mu']), args.pmf_csv)
    report['manifest'] = manifest('census', args, started, [p for p in (args.out, args.pmf_csv) if p])
    _emit(report, args.out)
    return 0


def cmd_cache(args: argparse.Namespace, config: Dict) -> int:
    started = time.perf_counter()
    cache_path = args.db or config.get('TRICHAIN_CACHE_DB', '')
    if not cache_path:
        raise InvalidInput("No cache database: pass --db or set TRICHAIN_CACHE_DB")
    cache = SpaceCache(cache_path)
    if args.action == 'clear':
        data = {'db': cache_path, 'removed': cache.clear()}
    else:
        data = {'db': cache_path, 'spaces': cache.list_spaces()}
    data['manifest'] = manifest('cache', args, started, [args.out] if args.out else [])
    _emit(data, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='trichain',
        description='Triangle-switch Markov chains on graphs with a given degree sequence',
    )
    parser.add_argument('--version', action='version', version=f"trichain {__version__}")
    parser.add_argument('--env-file', default=None, help='alternative .env file')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('sample', help='run the switch or triangle-switch chain')
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument('--degrees', help='e.g. 3x100 or 3,3,2,2')
    src.add_argument('--graph', help='start from a graph file')
    p.add_argument('--chain', choices=[k.value for k in ChainKind], default=ChainKind.TRI_SWITCH.value)
    p.add_argument('--lambda', dest='lam', type=float, default=1.0)
    p.add_argument('--nu', default='none', help="triangle cap: none, auto or an integer")
    p.add_argument('--steps', type=_count, default=10000)
    p.add_argument('--burn-in', type=_count, default=0)
    p.add_argument('--thin', type=_count, default=1)
    p.add_argument('--seed', type=_count, default=0)
    p.add_argument('--chains', type=_count, default=1)
    p.add_argument('--jobs', type=_count, default=None)
    p.add_argument('--tv-threshold', type=float, default=None)
    p.add_argument('--pmf-csv', default=None)
    p.add_argument('--out', default=None)
    p.add_argument('--format', choices=['json', 'csv'], default='json')
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser('verify', help='exact checks on the enumerated state space')
    p.add_argument('--degrees', required=True)
    p.add_argument('--lambda', dest='lambdas', type=float, nargs='+', default=[1.0, 2.0])
    p.add_argument('--nu', default='none')
    p.add_argument('--limit', type=_count, default=None)
    p.add_argument('--stationary-tol', type=float, default=None)
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser('path', help='simulation path of one switch')
    p.add_argument('--graph', required=True)
    p.add_argument('--switch', required=True, help='a1,a2,a3,a4')
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser('realize', help='write a Havel-Hakimi realization')
    p.add_argument('--degrees', required=True)
    p.add_argument('--seed', type=_count, default=None)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser('census', help='triangle census of an enumerated space')
    p.add_argument('--degrees', required=True)
    p.add_argument('--limit', type=_count, default=None)
    p.add_argument('--t0', type=_count, default=None)
    p.add_argument('--pmf-csv', default=None)
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser('cache', help='list or clear cached state spaces')
    p.add_argument('action', choices=['list', 'clear'])
    p.add_argument('--db', default=None, help='cache file, defaults to TRICHAIN_CACHE_DB')
    p.add_argument('--out', default=None)
    p.set_defaults(func=cmd_cache)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = load_config(args.env_file)
    configure_logging(config['TRICHAIN_LOG'])

    logger.info("=" * 60)
    logger.info(f"trichain {__version__}: {args.command}")
    logger.info("=" * 60)
    try:
        return args.func(args, config)
    except TrichainError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error: {str(e)}")
        return 1


if __name__ == '__main__':
    sys.exit(main())
