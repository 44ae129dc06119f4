"""Replicated runs, time-varying runs and their outputs."""
import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict

import numpy as np
from tqdm import tqdm

from .. import config
from ..routing import RoutingPolicy, pseudo_optimal_policy
from . import rng
from .arrivals import ArrivalSchedule
from .engine import Simulation, SimStats, RunConfig, UnstableError

sim_logger = logging.getLogger('sim_logger')
sim_logger.setLevel(logging.INFO)


def _run_one(args):
    system, schedule, policies, cfg, seed = args
    return Simulation(system, schedule, policies, cfg, seed).run()


def _echo(system, schedule, cfg, policies):
    out = {'system': system.to_json(), 'schedule': schedule.to_json(),
           'run': asdict(cfg), 'rng': rng.RNG_ALGORITHM,
           'numpy': np.__version__}
    if None in policies:
        out['policy'] = policies[None].to_json()
    else:
        out['policies'] = [{'rates': list(key), 'policy': pol.to_json()}
                           for key, pol in policies.items()]
    return out


def _nanmean(values):
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def reduce_stats(results, cfg, batch_means=False):
    """Combine per-replication SimStats; std_error comes from the
    spread of replication means.  A single replication reports None,
    unless batch_means is set and the run was departure-driven."""
    if len(results) == 1:
        out = results[0]
        out.replication_means = [out.mean_response]
        if cfg.horizon is not None or not batch_means:
            out.std_error = None
        return out
    means = np.array([r.mean_response for r in results], dtype=float)
    se = float(means.std(ddof=1) / np.sqrt(len(means)))
    k = len(results[0].per_type_mean_response)
    return SimStats(
        mean_response=float(means.mean()),
        std_error=se,
        per_type_mean_response=[
            _nanmean([r.per_type_mean_response[i] for r in results])
            for i in range(k)],
        mean_jobs_in_system=_nanmean([r.mean_jobs_in_system for r in results]),
        per_type_mean_jobs=[
            _nanmean([r.per_type_mean_jobs[i] for r in results])
            for i in range(k)],
        departures_counted=int(sum(r.departures_counted for r in results)),
        arrivals_counted=int(sum(r.arrivals_counted for r in results)),
        in_system_at_end=int(sum(r.in_system_at_end for r in results)),
        total_rate=_nanmean([r.total_rate for r in results]),
        littles_law_gap=_nanmean([r.littles_law_gap for r in results]),
        peak_jobs=int(max(r.peak_jobs for r in results)),
        measured_time=float(sum(r.measured_time for r in results)),
        replications=len(results),
        seed=cfg.seed,
        replication_means=[float(m) for m in means],
        trajectory=results[0].trajectory)


def _execute(system, schedule, policies, cfg, progress=False,
             batch_means=False):
    seeds = [rng.replication_seed(cfg.seed, r)
             for r in range(cfg.replications)]
    jobs = [(system, schedule, policies, cfg, s) for s in seeds]
    for r, s in enumerate(seeds):
        sim_logger.debug('replication %i seed %i' % (r, s))
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(tqdm(pool.map(_run_one, jobs), total=len(jobs),
                                disable=not progress, desc='replications'))
    else:
        results = [_run_one(j) for j in tqdm(jobs, disable=not progress,
                                               desc='replications')]
    stats = reduce_stats(results, cfg, batch_means)
    stats.config = _echo(system, schedule, cfg, policies)
    return stats


def simulate(system, schedule, policy, run_config=None):
    """Single replication of a run (the replication-0 seed of the
    master seed).  std_error is estimated by batch means over the
    counted departures.

    Raises:
        UnstableError: occupancy exceeded the cap.

    """
    cfg = (run_config or RunConfig()).resolved(schedule)
    cfg.replications = 1
    return _execute(system, schedule, {None: policy}, cfg, batch_means=True)


def replicate(system, schedule, policy, run_config=None, progress=False):
    """Independent replications with seeds derived from the master
    seed; replications run in a process pool when workers > 1.
    std_error is None for a single replication.

    Raises:
        UnstableError: if any replication aborts.

    """
    cfg = (run_config or RunConfig()).resolved(schedule)
    return _execute(system, schedule, {None: policy}, cfg, progress)


def per_phase_policies(system, schedule, builder, horizon):
    """Map each distinct rate vector on [0, horizon) to builder(rates).

    Each phase is built once."""
    cache = {}
    for rates in schedule.phases(horizon):
        if rates not in cache:
            sim_logger.info('Building policy for phase %s' % (rates,))
            cache[rates] = builder(np.array(rates))
    return cache


def pseudo_optimal_builder(system, optimizer_config=None):
    def build(lam):
        return pseudo_optimal_policy(system, lam, optimizer_config)
    return build


def simulate_time_varying(system, schedule, policy_schedule, run_config,
                          progress=False):
    """Horizon-driven run with phase-dependent routing.

    Args:
        policy_schedule: a RoutingPolicy (used in every phase), a dict
          from rate tuples to policies, or a callable taking a rate
          vector and returning a policy (called once per phase).
        run_config (RunConfig): must set horizon.  trajectory_dt
          defaults to the schedule period over the configured number of
          trajectory points.

    """
    if run_config is None or run_config.horizon is None:
        raise ValueError('Time-varying runs need run_config.horizon.')
    cfg = run_config.resolved(schedule)
    if cfg.trajectory_dt is None:
        period = schedule.period or cfg.horizon
        cfg.trajectory_dt = period / config.get('trajectory_points')
    if isinstance(policy_schedule, RoutingPolicy):
        policies = {None: policy_schedule}
    elif isinstance(policy_schedule, dict):
        policies = dict(policy_schedule)
        missing = [r for r in schedule.phases(cfg.horizon)
                   if r not in policies]
        if missing:
            raise ValueError('No policy for rate phases %s.' % missing)
    else:
        policies = per_phase_policies(system, schedule, policy_schedule,
                                      cfg.horizon)
    return _execute(system, schedule, policies, cfg, progress)


def trajectory_header(k):
    return ['time', 'total_jobs'] + ['jobs_type_%i' % (i + 1)
                                     for i in range(k)]


def write_trajectory_csv(stats, k, filename):
    if stats.trajectory is None:
        raise ValueError('Run recorded no trajectory.')
    with open(filename, 'w', newline='') as fout:
        writer = csv.writer(fout, lineterminator='\n')
        writer.writerow(trajectory_header(k))
        for row in stats.trajectory:
            writer.writerow(['%.10g' % row[0]] + [int(x) for x in row[1:]])


__all__ = ['simulate', 'replicate', 'simulate_time_varying',
           'per_phase_policies', 'pseudo_optimal_builder', 'reduce_stats',
           'write_trajectory_csv', 'trajectory_header', 'UnstableError',
           'RunConfig', 'SimStats', 'ArrivalSchedule']
