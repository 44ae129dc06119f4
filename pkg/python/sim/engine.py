"""Exact discrete-event simulation of the fork-join FCFS system.

Each arriving job draws a recovery pattern from the routing policy,
draws distinct servers uniformly within each class of the pattern, and
enqueues one task per server.  Servers are FCFS with Exp(1) service.
Because routing does not look at queue state, a task's completion
time is fixed when it is enqueued (Lindley recursion on the server's
free time), so the future-event list only has to hold job departures.
It is a binary heap keyed by (time, sequence number).

"""
import heapq
import logging
import math
from dataclasses import dataclass, field, asdict
from bisect import bisect_right

import numpy as np

from .. import config
from . import rng

sim_logger = logging.getLogger('sim_logger')
sim_logger.setLevel(logging.INFO)

#: Batches used for the single-run standard error (batch means).
N_BATCHES = 20


class UnstableError(RuntimeError):
    """Occupancy exceeded the configured cap."""

    def __init__(self, time, jobs, cap):
        super().__init__('UNSTABLE: %i jobs in system at t=%.6g (cap %i).'
                         % (jobs, time, cap))
        self.time = time
        self.jobs = jobs
        self.cap = cap


@dataclass
class RunConfig:
    """Run parameters.  Exactly one of target_departures (fixed-rate
    runs) or horizon (time-varying runs) drives termination.

    Attributes:
        target_departures (int): total departures, warmup included.
        horizon (float): simulated time to run.
        warmup_fraction (float): share of departures discarded in
          departure-driven runs.
        warmup_time (float): measurement start in horizon-driven runs;
          defaults to one period of the schedule.
        seed (int): master seed.
        replications (int): independent replications.
        occupancy_cap (int): jobs in system that signal instability.
        trajectory_dt (float): sampling step of the occupancy
          trajectory; None disables it.
        workers (int): processes used for replications.
        debug (bool): check per-server FCFS order as the run goes.

    """
    target_departures: int = None
    horizon: float = None
    warmup_fraction: float = None
    warmup_time: float = None
    seed: int = None
    replications: int = None
    occupancy_cap: int = None
    trajectory_dt: float = None
    workers: int = None
    debug: bool = False

    def resolved(self, schedule=None):
        """Copy with every None filled from the instance configuration."""
        out = RunConfig(**asdict(self))
        if out.horizon is None and out.target_departures is None:
            out.target_departures = config.get('departures')
        out.warmup_fraction = config.get('warmup_fraction',
                                         out.warmup_fraction)
        out.seed = config.get('seed', out.seed)
        out.replications = config.get('replications', out.replications)
        out.occupancy_cap = config.get('occupancy_cap', out.occupancy_cap)
        out.workers = config.get('workers', out.workers)
        if out.horizon is not None and out.warmup_time is None:
            period = schedule.period if schedule is not None else None
            out.warmup_time = period if period is not None \
                else out.warmup_fraction * out.horizon
        out.validate()
        return out

    def validate(self):
        if self.target_departures is not None and self.target_departures < 1:
            raise ValueError('target_departures must be >= 1.')
        if self.horizon is not None and self.horizon <= 0:
            raise ValueError('horizon must be > 0.')
        if not (0 <= self.warmup_fraction < 1):
            raise ValueError('warmup_fraction must lie in [0, 1).')
        if self.replications < 1:
            raise ValueError('replications must be >= 1.')
        if self.horizon is not None and self.warmup_time >= self.horizon:
            raise ValueError('warmup_time %.6g must precede horizon %.6g.'
                             % (self.warmup_time, self.horizon))


@dataclass
class SimStats:
    """Results of one replication, or the reduction of several.

    std_error is None when it is not estimated: a single replication
    through replicate, or a single horizon-driven run.  trajectory,
    when recorded, is a list of (time, total_jobs, jobs_type_1, ...,
    jobs_type_k) rows.

    """
    mean_response: float
    std_error: float
    per_type_mean_response: list
    mean_jobs_in_system: float
    per_type_mean_jobs: list
    departures_counted: int
    arrivals_counted: int
    in_system_at_end: int
    total_rate: float
    littles_law_gap: float
    peak_jobs: int
    measured_time: float
    replications: int = 1
    seed: int = None
    replication_means: list = None
    trajectory: list = field(default=None, repr=False)
    config: dict = None

    def to_json(self):
        out = asdict(self)
        traj = out.pop('trajectory')
        out['trajectory_points'] = 0 if traj is None else len(traj)
        return out


def _clean(x):
    return None if x is None or not math.isfinite(x) else float(x)


class _Dispatch:
    """Sampling tables for one routing policy: cumulative pattern
    probabilities per type and, per pattern, (offset, size, count)
    groups of servers."""

    def __init__(self, system, policy):
        k = system.k
        offsets = np.concatenate([[0], np.cumsum(system.class_sizes())])
        self.cum = []
        self.groups = []
        for i in range(k):
            probs = policy.probs[i]
            cum = np.cumsum(probs).tolist()
            cum[-1] = 1.
            self.cum.append(cum)
            per = []
            for pat in policy.patterns[i]:
                g = []
                for c in range(k + 1):
                    cnt = pat.tasks_of(c, k)
                    if cnt:
                        g.append((int(offsets[c]),
                                  int(offsets[c + 1] - offsets[c]), cnt))
                per.append(g)
            self.groups.append(per)


class Simulation:
    """One replication.

    Args:
        system (SystemSpec): topology.
        schedule (ArrivalSchedule): arrival rates.
        policies (dict): rate-vector tuple -> RoutingPolicy, or the key
          None for a single policy used throughout.
        cfg (RunConfig): resolved run configuration.
        seed (int): this replication's seed.

    """
    def __init__(self, system, schedule, policies, cfg, seed):
        if schedule.k != system.k:
            raise ValueError('Schedule has %i types, system has %i.'
                             % (schedule.k, system.k))
        self.system = system
        self.schedule = schedule
        self.cfg = cfg
        self.seed = seed
        self.streams = rng.StreamFactory(seed, config.get('rng_block'))
        self.tables = {key: _Dispatch(system, pol)
                       for key, pol in policies.items()}
        self.n_servers = system.n

    def _table_for(self, t):
        if None in self.tables:
            return self.tables[None], math.inf
        rates = self.schedule.rates(t)
        if rates not in self.tables:
            raise KeyError('No routing policy for rate phase %s.' % (rates,))
        return self.tables[rates], self.schedule.next_change(t)

    def run(self):
        system, schedule, cfg = self.system, self.schedule, self.cfg
        k = system.k
        streams = self.streams
        arr_streams = [streams.get(rng.ARRIVAL, i) for i in range(k)]
        route = streams.get(rng.ROUTE)
        select = streams.get(rng.SELECT)
        service = [streams.get(rng.SERVICE, s, block=1024)
                   for s in range(self.n_servers)]
        free = [0.] * self.n_servers

        by_departures = cfg.horizon is None
        horizon = math.inf if by_departures else cfg.horizon
        if by_departures:
            warm_count = int(cfg.warmup_fraction * cfg.target_departures)
            warm_time = math.inf
        else:
            warm_count = -1
            warm_time = cfg.warmup_time
        cap = cfg.occupancy_cap
        dt = cfg.trajectory_dt
        traj = [] if dt else None
        next_sample = dt if dt else math.inf

        next_arr = [schedule.next_arrival(i, 0., arr_streams[i])
                    for i in range(k)]
        table, table_end = self._table_for(0.)
        heap = []
        seq = 0
        counts = [0] * k
        in_system = 0
        departures = 0
        measuring = warm_count == 0 or warm_time == 0.
        t_start = 0.
        t_last = 0.
        area = 0.
        area_type = [0.] * k
        arrivals_counted = 0
        responses = []
        resp_type = [[] for _ in range(k)]
        peak = 0
        counted = 0
        t = 0.

        while True:
            ta = min(next_arr)
            if heap and heap[0][0] <= ta:
                t = heap[0][0]
                is_arrival = False
            else:
                t = ta
                is_arrival = True
            if t == math.inf:
                t = t_last
                break
            if t > horizon:
                t = horizon
                break
            while next_sample <= t:
                traj.append((next_sample, in_system) + tuple(counts))
                next_sample += dt
            if not measuring and t >= warm_time:
                # Horizon runs begin measuring at warm_time.
                area = 0.
                area_type = [0.] * k
                t_start = t_last = warm_time
                arrivals_counted = in_system
                peak = in_system
                measuring = True
            if measuring:
                span = t - t_last
                area += in_system * span
                for i in range(k):
                    area_type[i] += counts[i] * span
            t_last = t

            if not is_arrival:
                tdone, _, i, tarr = heapq.heappop(heap)
                in_system -= 1
                counts[i] -= 1
                departures += 1
                if measuring:
                    responses.append(tdone - tarr)
                    resp_type[i].append(tdone - tarr)
                    counted += 1
                    if by_departures and \
                       departures >= cfg.target_departures:
                        break
                elif departures == warm_count:
                    measuring = True
                    t_start = t
                    arrivals_counted = in_system
                    peak = in_system
                    area = 0.
                    area_type = [0.] * k
                continue

            # Arrival of type i at time t.
            i = next_arr.index(ta)
            next_arr[i] = schedule.next_arrival(i, t, arr_streams[i])
            if t >= table_end:
                table, table_end = self._table_for(t)
            u = route.uniform()
            cum = table.cum[i]
            p = bisect_right(cum, u)
            if p >= len(cum):
                p = len(cum) - 1
            jobdone = t
            for off, size, cnt in table.groups[i][p]:
                if cnt == 1:
                    chosen = (off + min(int(select.uniform() * size),
                                        size - 1),)
                else:
                    picked = set()
                    while len(picked) < cnt:
                        picked.add(min(int(select.uniform() * size),
                                       size - 1))
                    chosen = [off + x for x in sorted(picked)]
                for srv in chosen:
                    start = free[srv] if free[srv] > t else t
                    done = start + service[srv].exponential()
                    if cfg.debug:
                        assert done > free[srv], 'FCFS order broken'
                    free[srv] = done
                    if done > jobdone:
                        jobdone = done
            heapq.heappush(heap, (jobdone, seq, i, t))
            seq += 1
            in_system += 1
            counts[i] += 1
            if measuring:
                arrivals_counted += 1
                if in_system > peak:
                    peak = in_system
            if in_system > cap:
                sim_logger.warning('Occupancy cap hit at t=%.6g.' % t)
                raise UnstableError(t, in_system, cap)

        if not measuring and t >= warm_time:
            t_start = t_last = warm_time
            arrivals_counted = in_system
            peak = in_system
            measuring = True
        if measuring:
            span = t - t_last
            area += in_system * span
            for j in range(k):
                area_type[j] += counts[j] * span
        if dt:
            while next_sample <= t:
                traj.append((next_sample, in_system) + tuple(counts))
                next_sample += dt

        measured = t - t_start if measuring else 0.
        return self._stats(responses, resp_type, area, area_type, measured,
                           counted, arrivals_counted, in_system, peak, traj)

    def _stats(self, responses, resp_type, area, area_type, measured,
               counted, arrivals_counted, in_system, peak, traj):
        k = self.system.k
        resp = np.asarray(responses)
        mean = float(resp.mean()) if len(resp) else math.nan
        se = None
        if len(resp) >= 2 * N_BATCHES:
            batches = np.array([b.mean() for b in
                                np.array_split(resp, N_BATCHES)])
            se = float(batches.std(ddof=1) / np.sqrt(N_BATCHES))
        per_type = [_clean(np.mean(r)) if len(r) else None for r in resp_type]
        if measured > 0:
            mean_jobs = area / measured
            per_type_jobs = [a / measured for a in area_type]
        else:
            mean_jobs, per_type_jobs = math.nan, [math.nan] * k
        if self.schedule.is_fixed:
            rate = float(sum(self.schedule.waves))
        else:
            rate = arrivals_counted / measured if measured > 0 else math.nan
        gap = math.nan
        if mean_jobs and math.isfinite(mean_jobs) and math.isfinite(mean):
            gap = (mean_jobs - rate * mean) / mean_jobs
        return SimStats(
            mean_response=_clean(mean), std_error=se,
            per_type_mean_response=per_type,
            mean_jobs_in_system=_clean(mean_jobs),
            per_type_mean_jobs=[_clean(x) for x in per_type_jobs],
            departures_counted=counted, arrivals_counted=arrivals_counted,
            in_system_at_end=in_system, total_rate=_clean(rate),
            littles_law_gap=_clean(gap), peak_jobs=peak,
            measured_time=float(measured), seed=self.seed,
            trajectory=traj)
