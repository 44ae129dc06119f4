"""Discrete-event simulation of coded multi-access queues."""
from .rng import StreamFactory, replication_seed, RNG_ALGORITHM
from .arrivals import SquareWave, ArrivalSchedule
from .engine import Simulation, SimStats, RunConfig, UnstableError
from .replicate import (simulate, replicate, simulate_time_varying,
                        per_phase_policies, pseudo_optimal_builder,
                        write_trajectory_csv, trajectory_header)
