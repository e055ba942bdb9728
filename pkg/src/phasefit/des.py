"""Discrete-event timing with Generalized Cox delays.

A generic event calendar (time-ordered, FIFO on ties) plus an M/PH/1 queue
whose simulated mean wait is validated against the Pollaczek-Khinchine
formula built from the service distribution's first two moments.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import analysis, sampling
from .analysis import MomentSummary
from .errors import NonPositiveInput, UnstableSystem, UnstableSystemWarning
from .model import GeneralizedCoxModel, exponential_model
from .sampling import SamplerState

WARMUP_FRACTION = 0.1
N_BATCHES = 20


class EventCalendar:
    """Pending events ordered by time, FIFO on equal times."""

    def __init__(self, rng: SamplerState):
        self.clock = 0.0
        self.rng = rng
        self._heap: list[tuple[float, int, object]] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, model: GeneralizedCoxModel, event_id) -> float:
        """Draw a delay from the model and insert the event; returns the
        absolute firing time."""
        t = self.clock + sampling.sample(model, self.rng)
        self.schedule_at(t, event_id)
        return t

    def schedule_at(self, time: float, event_id) -> None:
        """Insert an event at an absolute (pre-drawn) time."""
        if time < self.clock:
            raise NonPositiveInput("cannot schedule before the current clock")
        heapq.heappush(self._heap, (time, self._seq, event_id))
        self._seq += 1

    def pop(self) -> tuple[float, object]:
        """Advance the clock to the earliest event and return (time, id)."""
        time, _, event_id = heapq.heappop(self._heap)
        self.clock = time
        return time, event_id


@dataclass(frozen=True)
class QueueStats:
    n_served: int
    mean_wait: float
    mean_system_time: float
    utilization: float
    se_wait: float
    stable: bool


def pk_mean_wait(arrival_rate: float, service_summary: MomentSummary) -> float:
    """Pollaczek-Khinchine mean wait lambda E[S^2] / (2 (1 - rho))."""
    if arrival_rate < 0.0:
        raise NonPositiveInput("arrival rate must be nonnegative")
    rho = arrival_rate * service_summary.mean
    if rho >= 1.0:
        raise UnstableSystem(f"rho = {rho} >= 1")
    return arrival_rate * service_summary.second_moment / (2.0 * (1.0 - rho))


class _DrawBuffer:
    """Chunked vectorized draws presented one at a time."""

    def __init__(self, model: GeneralizedCoxModel, state: SamplerState,
                 chunk: int = 1 << 15):
        self._model = model
        self._state = state
        self._chunk = chunk
        self._buf = np.empty(0)
        self._pos = 0

    def next(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = sampling.sample_n(self._model, self._state, self._chunk)
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        return float(v)


_ARRIVAL = "arrival"
_DEPARTURE = "departure"


def run_mph1(arrival_rate: float, service: GeneralizedCoxModel,
             n_customers: int = 500_000, seed: int = 0,
             warmup_fraction: float = WARMUP_FRACTION) -> QueueStats:
    """Single-server FIFO queue with Poisson arrivals and phase-type service.

    Runs until n_customers departures; the first warmup_fraction of served
    customers is discarded and se_wait comes from 20 batch means.
    """
    if arrival_rate < 0.0:
        raise NonPositiveInput("arrival rate must be nonnegative")
    if arrival_rate == 0.0 or n_customers == 0:
        return QueueStats(0, 0.0, 0.0, 0.0, 0.0, True)

    rho = arrival_rate * analysis.mean(service)
    stable = rho < 1.0
    if not stable:
        warnings.warn(f"rho = {rho} >= 1; statistics are transient",
                      UnstableSystemWarning)

    arr_state, svc_state = sampling.split_seeds(seed, 2)
    interarrivals = _DrawBuffer(exponential_model(arrival_rate), arr_state)
    services = _DrawBuffer(service, svc_state)

    cal = EventCalendar(svc_state)
    cal.schedule_at(interarrivals.next(), _ARRIVAL)
    queue: list[float] = []  # arrival times of waiting customers
    busy_until = 0.0
    busy_time = 0.0
    server_busy = False
    waits = np.empty(n_customers)
    system_times = np.empty(n_customers)
    served = 0
    arrived = 0

    while served < n_customers:
        t, kind = cal.pop()
        if kind == _ARRIVAL:
            arrived += 1
            queue.append(t)
            cal.schedule_at(t + interarrivals.next(), _ARRIVAL)
            if not server_busy:
                server_busy = True
                arrival_t = queue.pop(0)
                s = services.next()
                waits[served] = t - arrival_t
                system_times[served] = t - arrival_t + s
                busy_time += s
                cal.schedule_at(t + s, _DEPARTURE)
        else:
            served += 1
            if queue and served < n_customers:
                arrival_t = queue.pop(0)
                s = services.next()
                waits[served] = t - arrival_t
                system_times[served] = t - arrival_t + s
                busy_time += s
                cal.schedule_at(t + s, _DEPARTURE)
            else:
                server_busy = False  # also when stopping with queue left

    # conservation: every departure was an arrival
    assert arrived >= served and arrived - served == len(queue) + (1 if server_busy else 0)

    cut = int(warmup_fraction * n_customers)
    kept = waits[cut:n_customers]
    kept_sys = system_times[cut:n_customers]
    se = _batch_means_se(kept)
    return QueueStats(
        n_served=n_customers,
        mean_wait=float(kept.mean()),
        mean_system_time=float(kept_sys.mean()),
        utilization=min(busy_time / cal.clock, 1.0) if cal.clock > 0 else 0.0,
        se_wait=se,
        stable=stable,
    )


def _batch_means_se(xs: np.ndarray, n_batches: int = N_BATCHES) -> float:
    if len(xs) < n_batches * 2:
        return float(xs.std(ddof=1) / math.sqrt(len(xs))) if len(xs) > 1 else 0.0
    usable = len(xs) - len(xs) % n_batches
    means = xs[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))
