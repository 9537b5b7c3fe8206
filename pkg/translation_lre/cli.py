# translation_lre/cli.py

"""
Batch driver: every command expands its grid into independent cells, runs them
(optionally on a process pool), and writes one report row per cell.

Exit codes: 0 every row passed, 1 a row failed or a cell precondition failed,
2 invalid usage or configuration, 3 a dense resource cap was breached.
"""

import argparse
import functools
import itertools
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from .circuits import apply_circuit, block_factorization, circuit_to_json, ti_brickwork, ti_circuit_span_rank
from .combinatorics import (
    asymptotic_depth_estimate,
    count_rotation_orbits,
    fit_scaling_exponent,
    gamma_exponent,
    hpoly_dim,
    min_depth_for_overlap,
    min_time_sweep,
    momentum_sector_dim,
    necklace_count,
    overlap_bound_exact,
    overlap_bound_log,
    overlap_bound_relaxed,
    sre_dim_bound,
    sre_dim_bound_refined,
)
from .config import COMMANDS, OUTPUT_FORMATS, SweepConfig
from .correlations import (
    backward_shift_fixture,
    connected_correlation,
    connected_envelope,
    cycle_bound,
    dense_shifted_trace,
    embed_operator,
    random_local_operator,
    shifted_trace,
)
from .errors import DomainError, PreconditionError, ResourceLimitError, StructuralError, UsageError
from .reports import BoundReport, write_reports
from .statevector import (
    DEFAULT_MAX_OPERATOR_DIM,
    RingSpec,
    random_density_operator,
    random_projector,
    sector_projectors,
    tails_inequality_check,
)
from .timps import timps_span_rank

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

SCALING_WINDOW = (0.40, 0.55)
EXACT_ATOL = 1e-9
FAST_PATH_RTOL = 1e-10
MONOTONE_RTOL = 1e-9


def cell_seed(root: int, command: str, index: int) -> int:
    """Seed of one sweep cell; independent of the worker that runs it."""
    entropy = [root, COMMANDS.index(command), index]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def ring(config: SweepConfig, n: int, q: int) -> RingSpec:
    cap = 2 ** config.cap_qn_exponent
    return RingSpec(n, q, max_amplitudes=cap, max_operator_dim=min(DEFAULT_MAX_OPERATOR_DIM, cap))


def _exact_log(value) -> float:
    return math.log(value.numerator) - math.log(value.denominator)


# ---------------------------------------------------------------- cell grids

def _grid_cells(command: str, config: SweepConfig) -> List[Dict[str, Any]]:
    grid = config.grid(command)
    if command == "necklace":
        return [{"n": n, "q": q} for n, q in itertools.product(grid["n"], grid["q"])]
    if command == "sectors":
        return [{"n": n, "q": q} for q in sorted(grid["n_by_q"]) for n in grid["n_by_q"][q]]
    if command == "bounds":
        gamma = gamma_exponent(max(grid["q"]), max(grid["d"]))
        return [{"n": n, "d": d, "q": q, "gamma": gamma}
                for n, d, q in itertools.product(grid["n"], grid["d"], grid["q"])]
    if command == "rank-mps":
        return [{"n": n, "q": q, "d_bond": d_bond}
                for n, q, d_bond in itertools.product(grid["n"], grid["q"], grid["d_bond"])]
    if command == "rank-circuit":
        return [{"n": n, "q": q, "depth": depth}
                for n, q, depth in itertools.product(grid["n"], grid["q"], grid["depth"])]
    if command == "cut-verify":
        return [{"n": n, "q": grid.get("q", 2), "depth": depth, "circuit": index}
                for n, depth, index in itertools.product(grid["n"], grid["depth"], range(grid["circuits"]))]
    if command == "correlations":
        per_n = math.ceil(grid["operators"] / len(grid["n"]))
        return [{"n": n, "q": grid["q"], "operators": per_n, "locality": grid["locality"]} for n in grid["n"]]
    if command == "tails":
        largest = max(1, int(math.floor(math.log2(grid["max_dim"]))))
        return [{"n": 1 + index % largest, "q": 2, "instance": index} for index in range(grid["instances"])]
    raise UsageError("command", f"{command} has no cell grid")


# ---------------------------------------------------------------- cell bodies

def _necklace_cell(config, params, seed) -> BoundReport:
    n, q = params["n"], params["q"]
    ring(config, n, q).check_state_cap()
    bound = necklace_count(n, q)
    oracle = count_rotation_orbits(n, q)
    return BoundReport("necklace", 0, params, bound=bound, oracle=oracle, margin=bound - oracle,
                       passed=bound == oracle)


def _sectors_cell(config, params, seed) -> BoundReport:
    n, q = params["n"], params["q"]
    spec = ring(config, n, q)
    projectors = sector_projectors(spec)
    traces = [projector.trace for projector in projectors]
    trace_error = max(abs(trace - momentum_sector_dim(n, q, k)) for k, trace in enumerate(traces))
    sum_error = abs(sum(traces) - q ** n)
    projector_error = max(projector.projector_deviation() for projector in projectors)
    rank = projectors[0].rank()
    bound = necklace_count(n, q)
    params = dict(params, trace_error=trace_error, sum_error=sum_error, projector_error=projector_error)
    passed = rank == bound and trace_error <= EXACT_ATOL and sum_error <= EXACT_ATOL and projector_error <= 1e-10
    return BoundReport("sectors", 0, params, bound=bound, oracle=rank, margin=bound - rank, passed=passed)


def _bounds_cell(config, params, seed) -> BoundReport:
    n, d, q, gamma = params["n"], params["d"], params["q"], params["gamma"]
    sre = sre_dim_bound(n, d, q)
    refined = sre_dim_bound_refined(n, d, q)
    displayed = overlap_bound_log(n, d, q, gamma).log_value
    relaxed = _exact_log(overlap_bound_relaxed(n, d, q))
    params = dict(params, sre_dim_bound_refined=refined, exact_ratio=overlap_bound_exact(n, d, q).clamped())
    return BoundReport("bounds", 0, params, bound=sre, bound_log=displayed, oracle=relaxed,
                       margin=displayed - relaxed, passed=displayed >= relaxed and refined <= sre)


def _rank_mps_cell(config, params, seed) -> BoundReport:
    n, q, d_bond = params["n"], params["q"], params["d_bond"]
    estimate = timps_span_rank(ring(config, n, q), d_bond, samples=config.samples, seed=seed,
                               tolerance=config.tolerances["rank"])
    # bond dimension 1 spans exactly the symmetric subspace
    saturated = d_bond != 1 or estimate.gram_rank == hpoly_dim(n, q)
    params = dict(params, samples=estimate.samples, stable=estimate.stable, sector_dim=estimate.sector_dim)
    return BoundReport("rank-mps", 0, params, bound=estimate.bound, oracle=estimate.gram_rank,
                       margin=estimate.margin, passed=estimate.passed and estimate.stable and saturated)


def _rank_circuit_cell(config, params, seed) -> BoundReport:
    n, q, depth = params["n"], params["q"], params["depth"]
    estimate = ti_circuit_span_rank(ring(config, n, q), depth, samples=config.samples, seed=seed,
                                    tolerance=config.tolerances["rank"])
    saturated = depth != 0 or estimate.gram_rank == hpoly_dim(n, q)
    params = dict(params, samples=estimate.samples, stable=estimate.stable, sector_dim=estimate.sector_dim)
    return BoundReport("rank-circuit", 0, params, bound=estimate.bound, oracle=estimate.gram_rank,
                       margin=estimate.margin, passed=estimate.passed and saturated)


def _dump_failure(config: SweepConfig, name: str, circuit) -> str:
    directory = os.path.join(config.output_dir, "failures")
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"{name}.json")
    with open(path, 'w', encoding='utf-8') as f:
        f.write(circuit_to_json(circuit))
    logger.warning(f"Dumped failing circuit to {path}")
    return path


def _cut_verify_cell(config, params, seed) -> BoundReport:
    n, q, depth = params["n"], params["q"], params["depth"]
    spec = ring(config, n, q)
    circuit, initial = ti_brickwork(spec, depth, np.random.default_rng(seed))
    name = f"cut-verify-n{n}-d{depth}-c{params['circuit']}"
    try:
        factorization = block_factorization(circuit, apply_circuit(circuit, initial),
                                            purity_tol=config.tolerances["purity"])
    except (StructuralError, PreconditionError):
        _dump_failure(config, name, circuit)
        raise
    tolerance = config.tolerances["overlap"]
    worst = max(factorization.max_overlap_error, factorization.max_block_deviation)
    passed = factorization.min_purity >= 1 - config.tolerances["purity"] and worst <= tolerance
    if not passed:
        _dump_failure(config, name, circuit)
    params = dict(params, cuts=len(factorization.cuts), pieces=len(factorization.pieces),
                  min_purity=factorization.min_purity,
                  max_overlap_error=factorization.max_overlap_error,
                  max_block_deviation=factorization.max_block_deviation)
    return BoundReport("cut-verify", 0, params, bound=tolerance, oracle=worst, margin=tolerance - worst,
                       passed=passed)


def _correlations_cell(config, params, seed) -> BoundReport:
    n, q, locality = params["n"], params["q"], params["locality"]
    spec = ring(config, n, q)
    rng = np.random.default_rng(seed)
    worst_ratio = 0.0
    worst_mismatch = 0.0
    for _ in range(params["operators"]):
        size = int(rng.integers(1, locality + 1))
        support = sorted(int(site) for site in rng.choice(n, size=size, replace=False))
        op = random_local_operator(spec, support, rng, locality_cap=locality)
        embedded = embed_operator(op, spec)
        for r in range(1, n):
            fast = shifted_trace(op, r, spec)
            bound = cycle_bound(op.support, r, spec)
            worst_ratio = max(worst_ratio, abs(fast) / bound)
            dense = dense_shifted_trace(op, r, spec, embedded)
            worst_mismatch = max(worst_mismatch, abs(fast - dense) / max(abs(dense), bound))

    fixture = shifted_trace(backward_shift_fixture(spec), 1, spec)
    fixture_error = abs(fixture - 1.0 / q)

    far = n // 2
    op_i = random_local_operator(spec, [0], rng, traceless=True)
    op_j = random_local_operator(spec, [far], rng, traceless=True)
    connected = abs(connected_correlation(0, op_i, op_j, spec))
    envelope = connected_envelope(0, [0], [far], spec)

    params = dict(params, fast_path_mismatch=worst_mismatch, fixture_value=fixture.real,
                  connected=connected, connected_envelope=envelope,
                  decay_scale=n * float(q) ** (-n / 2))
    passed = (worst_ratio <= 1 + 1e-12 and worst_mismatch <= FAST_PATH_RTOL
              and fixture_error <= 1e-12 and connected <= envelope * (1 + 1e-9))
    return BoundReport("correlations", 0, params, bound=1.0, oracle=worst_ratio, margin=1.0 - worst_ratio,
                       passed=passed)


def _tails_cell(config, params, seed) -> BoundReport:
    spec = ring(config, params["n"], params["q"])
    rng = np.random.default_rng(seed)
    rho = random_density_operator(spec, rng)
    sigma = random_density_operator(spec, rng)
    projector = random_projector(spec, int(rng.integers(0, spec.dim + 1)), rng)
    check = tails_inequality_check(rho, sigma, projector)
    return BoundReport("tails", 0, params, bound=check.lhs, oracle=check.rhs, margin=check.margin,
                       passed=check.holds)


CELL_FUNCTIONS: Dict[str, Callable[[SweepConfig, Dict[str, Any], int], BoundReport]] = {
    "necklace": _necklace_cell,
    "sectors": _sectors_cell,
    "bounds": _bounds_cell,
    "rank-mps": _rank_mps_cell,
    "rank-circuit": _rank_circuit_cell,
    "cut-verify": _cut_verify_cell,
    "correlations": _correlations_cell,
    "tails": _tails_cell,
}


def _run_cell(command: str, config: SweepConfig, indexed_params) -> BoundReport:
    index, params = indexed_params
    seed = cell_seed(config.seed, command, index)
    started = time.perf_counter()
    try:
        report = CELL_FUNCTIONS[command](config, params, seed)
    except (DomainError, PreconditionError, StructuralError) as e:
        logger.error(f"{command} cell {index} {params} failed: {e}")
        report = BoundReport(command, 0, params, passed=False, error=f"{type(e).__name__}: {e}")
    report.cell = index
    report.seed = seed
    report.wall_time = time.perf_counter() - started
    return report


# ---------------------------------------------------------------- series commands

def _min_depth_reports(config: SweepConfig) -> List[BoundReport]:
    grid = config.grid("min-depth")
    q = grid["q"]
    ns = [2 ** exponent for exponent in grid["log2_n"]]
    reports = []
    depths = []
    for index, n in enumerate(ns):
        started = time.perf_counter()
        depth = min_depth_for_overlap(n, q, config.eta)
        estimate = asymptotic_depth_estimate(n, q)
        monotone = not depths or depth >= depths[-1]
        depths.append(depth)
        reports.append(BoundReport("min-depth", index, {"n": n, "q": q, "eta": config.eta},
                                   bound=depth, oracle=estimate, margin=depth - estimate,
                                   passed=monotone, wall_time=time.perf_counter() - started))
    slope = fit_scaling_exponent(ns, depths)
    reports.append(BoundReport("min-depth", len(ns), {"fit": "log depth vs log n", "q": q},
                               bound=list(SCALING_WINDOW), oracle=slope,
                               passed=SCALING_WINDOW[0] <= slope <= SCALING_WINDOW[1]))
    return reports


def _min_time_reports(config: SweepConfig) -> List[BoundReport]:
    grid = config.grid("min-depth")
    q = grid["q"]
    model = config.build_depth_model()
    epsilon = model.resolve_epsilon(config.eta)
    ns = [2 ** exponent for exponent in grid["log2_n"]]
    rows = min_time_sweep(ns, q, config.eta, model)
    reports = []
    previous = None
    for index, row in enumerate(rows):
        reached = model.depth(row.tau, row.n, epsilon) >= row.min_depth
        monotone = previous is None or row.tau >= previous * (1 - MONOTONE_RTOL)
        if not monotone:
            logger.warning(f"min-time: tau drops from {previous:.6g} to {row.tau:.6g} at n={row.n}")
        previous = row.tau
        reports.append(BoundReport("min-time", index,
                                   {"n": row.n, "q": q, "eta": config.eta, "min_depth": row.min_depth,
                                    "c": model.c, "p": model.p, "epsilon": epsilon},
                                   bound=row.min_depth, oracle=row.tau, passed=reached and monotone))
    exponent = fit_scaling_exponent(ns, [row.tau for row in rows])
    in_window = SCALING_WINDOW[0] <= exponent <= SCALING_WINDOW[1]
    if not in_window:
        logger.warning(f"min-time: fitted tau exponent {exponent:.4f} outside {list(SCALING_WINDOW)} "
                       f"for c={model.c}, p={model.p}")
    reports.append(BoundReport("min-time", len(rows), {"fit": "log tau vs log n"},
                               bound=list(SCALING_WINDOW), oracle=exponent, passed=in_window))
    return reports


SERIES_FUNCTIONS = {
    "min-depth": _min_depth_reports,
    "min-time": _min_time_reports,
}


# ---------------------------------------------------------------- driver

def run_cells(command: str, config: SweepConfig, progress: bool = True) -> List[BoundReport]:
    cells = list(enumerate(_grid_cells(command, config)))
    worker = functools.partial(_run_cell, command, config)
    logger.info(f"{command}: {len(cells)} cells on {config.workers} worker(s)")
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            return list(tqdm(executor.map(worker, cells), total=len(cells), desc=command, disable=not progress))
    return [worker(cell) for cell in tqdm(cells, desc=command, disable=not progress)]


def collect_reports(command: str, config: SweepConfig, progress: bool = True) -> List[BoundReport]:
    if command in SERIES_FUNCTIONS:
        try:
            return SERIES_FUNCTIONS[command](config)
        except DomainError as e:
            logger.error(f"{command} failed: {e}")
            return [BoundReport(command, 0, {}, passed=False, error=f"{type(e).__name__}: {e}")]
    return run_cells(command, config, progress)


def run_command(name: str, config: SweepConfig, progress: bool = True) -> int:
    """
    Run one command (or `all`) and write its reports.

    Args:
        name (str): command name.
        config (SweepConfig): validated sweep configuration.
        progress (bool): show tqdm progress bars.

    Returns:
        int: process exit status.
    """
    try:
        if name != "all" and name not in COMMANDS:
            raise UsageError("command", f"unknown command {name!r}")
        config.validate_config()
    except UsageError as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE

    status = EXIT_PASS
    for command in (COMMANDS if name == "all" else (name,)):
        started = datetime.now(timezone.utc)
        try:
            reports = collect_reports(command, config, progress)
        except ResourceLimitError as e:
            logger.error(f"{command}: resource limit reached: {e}")
            return EXIT_RESOURCE
        write_reports(command, reports, config.output_dir, config.output_format,
                      config.seed, config.to_dict(), started)
        failed = [report for report in reports if not report.passed]
        if failed:
            logger.warning(f"{command}: {len(failed)} of {len(reports)} rows failed")
            status = EXIT_FAIL
        else:
            logger.info(f"{command}: all {len(reports)} rows passed")
    return status


def parse_option(argv: Optional[Sequence[str]] = None):
    parser = argparse.ArgumentParser("sweeps over translation-invariant dimension bounds and their numerical oracles.")

    parser.add_argument('command', type = str, choices = COMMANDS + ("all",),
                        help = 'sweep to run; "all" runs every command.')
    parser.add_argument('--config', type = str, default = None,
                        help = 'YAML sweep configuration (see configs/).')
    parser.add_argument('--seed', type = int, default = None,
                        help = 'root seed (unsigned 64-bit).')
    parser.add_argument('--out', type = str, default = None,
                        help = 'report output directory.')
    parser.add_argument('--format', type = str, default = None, choices = OUTPUT_FORMATS,
                        help = 'report format.')
    parser.add_argument('--workers', type = int, default = None,
                        help = 'size of the process pool for sweep cells.')
    parser.add_argument('--cap-qn', type = int, default = None,
                        help = 'dense cap: at most 2^EXP amplitudes per state.')
    parser.add_argument('--eta', type = float, default = None,
                        help = 'accuracy parameter for min-depth and min-time.')
    parser.add_argument('--samples', type = int, default = None,
                        help = 'override the number of sampled states for rank commands.')
    parser.add_argument('--log-level', type = str, default = "INFO",
                        help = 'logging level.')
    parser.add_argument('--no-progress', action = 'store_true',
                        help = 'disable progress bars.')

    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    opt = parse_option(argv)
    logging.basicConfig(level = getattr(logging, opt.log_level.upper(), logging.INFO),
                        format = "%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = SweepConfig(opt.config)
        config.apply_overrides(seed = opt.seed, output_dir = opt.out, output_format = opt.format,
                               workers = opt.workers, cap_qn_exponent = opt.cap_qn, eta = opt.eta,
                               samples = opt.samples)
    except UsageError as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    logger.info(repr(config))
    return run_command(opt.command, config, progress = not opt.no_progress)
