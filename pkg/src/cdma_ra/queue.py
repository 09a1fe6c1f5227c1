"""Per-user packet queue of the stable (non-saturated) system.

In the large-system limit every user sees a constant SIR, so each queue
evolves on its own: Bernoulli(lambda) arrivals, and the head-of-line packet
leaves with probability theta whenever the queue is nonempty.

Within a slot the queue is served first, then the new arrival (if any) is
admitted and becomes eligible from the next slot on.  This ordering gives the
birth-death chain with up-rate lambda (1 - theta) and down-rate
theta (1 - lambda) away from the empty state.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .asymptotic import DEFAULT_TOL, CapacityReport, capacity_report
from .errors import ConfigError, StabilityError
from .model import PowerProfile, SystemConfig, require_valid

PMF_FLOOR = 1e-15


class Stability(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class QueueParams:
    arrival_rate: float
    service_prob: float

    def __post_init__(self):
        if not 0.0 <= self.arrival_rate < 1.0:
            raise ConfigError(f"arrival_rate must lie in [0, 1), got {self.arrival_rate}")
        if not 0.0 < self.service_prob <= 1.0:
            raise ConfigError(f"service_prob must lie in (0, 1], got {self.service_prob}")


@dataclass(frozen=True)
class QueueAnalytics:
    """Stationary behaviour of one queue; numeric fields are nan unless stable."""

    stable: Stability
    q0: float
    beta: float
    q1: float
    mean_length: float
    mean_sojourn: float
    arrival_rate: float
    service_prob: float

    def pmf(self, m: int) -> float:
        if self.stable is not Stability.STABLE:
            return math.nan
        if m < 0:
            return 0.0
        if m == 0:
            return self.q0
        return self.q1 * self.beta ** (m - 1)

    def pmf_array(self, floor: float = PMF_FLOOR) -> np.ndarray:
        """q_0, q_1, ... truncated once q_m drops below ``floor``."""
        if self.stable is not Stability.STABLE:
            raise StabilityError("stationary distribution exists only for a stable queue")
        out = [self.q0]
        m = 1
        while True:
            qm = self.pmf(m)
            if qm < floor:
                break
            out.append(qm)
            m += 1
        return np.array(out)


def queue_analytics(params: QueueParams) -> QueueAnalytics:
    lam, theta = params.arrival_rate, params.service_prob
    if lam > theta:
        state = Stability.UNSTABLE
    elif lam == theta:
        state = Stability.BOUNDARY
    else:
        state = Stability.STABLE
    if state is not Stability.STABLE:
        nan = math.nan
        return QueueAnalytics(state, nan, nan, nan, nan, nan, lam, theta)
    q0 = 1.0 - lam / theta
    beta = lam * (1.0 - theta) / ((1.0 - lam) * theta)
    q1 = q0 * lam / ((1.0 - lam) * theta)
    return QueueAnalytics(
        stable=state,
        q0=q0,
        beta=beta,
        q1=q1,
        mean_length=lam * (1.0 - lam) / (theta - lam),
        # slots from the arrival slot to the service slot, by Little's law
        mean_sojourn=(1.0 - lam) / (theta - lam),
        arrival_rate=lam,
        service_prob=theta,
    )


@dataclass
class QueueSimResult:
    slots: int
    q0: float
    mean_length: float
    departure_rate: float
    arrival_rate: float
    mean_sojourn: float
    pmf: np.ndarray
    final_length: int
    trace: Optional[list[tuple[int, int, int, int]]] = None

    def std_error(self, p: float) -> float:
        """Naive binomial standard error of a per-slot frequency ``p``."""
        return math.sqrt(p * (1.0 - p) / self.slots)


def simulate_queue(params: QueueParams, slots: int, seed: int = 0, keep_trace: bool = False,
                   pmf_states: int = 10) -> QueueSimResult:
    """Slot-by-slot simulation of one queue starting empty.

    Queue length is observed at the start of each slot.  Sojourn counts the
    slots from a packet's arrival slot to its service slot, so a packet
    served in the slot right after it arrived has sojourn 1.
    """
    if slots < 1:
        raise ConfigError("slots must be >= 1")
    rng = np.random.default_rng(seed)
    serve_draw = rng.random(slots) < params.service_prob
    arrive_draw = rng.random(slots) < params.arrival_rate

    length = 0
    empty = 0
    area = 0
    departures = 0
    sojourn_total = 0
    hist = [0] * (pmf_states + 1)
    backlog: deque[int] = deque()
    trace = [] if keep_trace else None
    for t in range(slots):
        empty += length == 0
        area += length
        hist[min(length, pmf_states)] += 1
        served = length > 0 and serve_draw[t]
        if served:
            length -= 1
            departures += 1
            sojourn_total += t - backlog.popleft()
        arrived = bool(arrive_draw[t])
        if arrived:
            length += 1
            backlog.append(t)
        if keep_trace:
            trace.append((t, length, int(arrived), int(served)))

    return QueueSimResult(
        slots=slots,
        q0=empty / slots,
        mean_length=area / slots,
        departure_rate=departures / slots,
        arrival_rate=float(arrive_draw.sum()) / slots,
        mean_sojourn=sojourn_total / departures if departures else math.nan,
        pmf=np.array(hist[:pmf_states]) / slots,
        final_length=length,
        trace=trace,
    )


TRACE_HEADER = ("slot", "length", "arrival", "departure")


@dataclass(frozen=True)
class StableCapacityReport:
    report: CapacityReport
    queues: tuple[QueueAnalytics, ...]
    info_rates: tuple[float, ...]
    link_capacities: tuple[float, ...]


def stable_system_capacity(config: SystemConfig, profile: PowerProfile,
                           tol: float = DEFAULT_TOL) -> StableCapacityReport:
    """Capacity of the stable system, with each theta replaced by its arrival rate.

    ``info_rates[i]`` is lambda_i R(p_i) and ``link_capacities[i]`` is
    theta_i R(p_i), both in bits/symbol; stability makes the former strictly
    smaller.
    """
    require_valid(profile)
    queues = []
    for i, c in enumerate(profile.classes):
        if c.arrival_rate is None:
            raise ConfigError(f"classes[{i}].arrival_rate is required for the stable system")
        if c.tx_prob == 0.0:
            raise StabilityError(f"class {i} never transmits (tx_prob 0)", class_index=i)
        qa = queue_analytics(QueueParams(c.arrival_rate, c.tx_prob))
        if qa.stable is not Stability.STABLE:
            raise StabilityError(
                f"class {i} is {qa.stable.value}: arrival_rate {c.arrival_rate} >= tx_prob {c.tx_prob}",
                class_index=i,
                boundary=qa.stable is Stability.BOUNDARY,
            )
        queues.append(qa)
    effective = profile.with_tx_probs([c.arrival_rate for c in profile.classes])
    report = capacity_report(config, effective, tol)
    rates = tuple(m.coded_rate for m in report.per_class)
    return StableCapacityReport(
        report=report,
        queues=tuple(queues),
        info_rates=tuple(c.arrival_rate * r for c, r in zip(profile.classes, rates)),
        link_capacities=tuple(c.tx_prob * r for c, r in zip(profile.classes, rates)),
    )
