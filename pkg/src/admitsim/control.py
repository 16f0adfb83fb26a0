"""Per-slot stochastic control loop.

Each slot, reading the queue vector q(t):

1. every active link picks its admitted rate x_l(t) by maximizing
   (1/eps) * U_l(x) - q_l * x over [0, x_max] (a threshold rule for
   capped-linear utilities),
2. arrivals a_l(t) ~ Bernoulli(x_l(t)) are drawn,
3. the scheduler picks the feasible schedule maximizing
   sum q_l * mean_l * s_l,
4. channels c(t) are drawn and departures are d_l = c_l * s_l,
5. queues update as q_l(t+1) = max(q_l + a_l - d_l, 0).

Allocation and scheduling both read q(t); arrivals and departures are
applied together in the update.  A link scheduled with an empty queue
sends a null packet: the trace still records d_l = c_l * s_l and the
max(.,0) absorbs the phantom departure.

``step`` advances one slot and returns a full trace; ``simulate`` runs
the identical dynamics in a tight loop and returns per-window sums
(bit-equal to folding ``step``, which the test suite checks).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from admitsim.capacity import UtilityParams, max_weight_over_hull
from admitsim.rng import SimStreams
from admitsim.topology import ChannelModel, Schedule, ScheduleSet, sample_channels


@dataclass(frozen=True)
class AllocatorConfig:
    """Rate-allocator knobs.

    ``x_max`` only needs to dominate every capacity-region coordinate;
    rates are at most one packet/slot here, so the default 1.0 always
    qualifies.
    """

    epsilon: float
    params: UtilityParams
    x_max: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.x_max < self.params.x_bar:
            raise ValueError("x_max below x_bar truncates the allocator range")


@dataclass(frozen=True)
class NetworkState:
    queues: tuple[int, ...]
    slot: int = 0

    def __post_init__(self):
        if any(q < 0 for q in self.queues):
            raise ValueError("queues must be non-negative")


@dataclass(frozen=True)
class SlotTrace:
    """Everything that happened in one slot."""

    slot: int
    schedule: Schedule
    channels: tuple[int, ...]
    allocation: tuple[float, ...]
    arrivals: tuple[int, ...]
    departures: tuple[int, ...]
    queues_after: tuple[int, ...]


def allocate_rate(q_l: int, cfg: AllocatorConfig, is_new_link: bool = False) -> float:
    """Admitted rate for one link given its queue length.

    For U(x) = u * min(x, x_bar) the objective (1/eps) U(x) - q x is
    piecewise linear, so the argmax is x_bar when q < u/eps and 0 when
    q > u/eps.  At the tie q = u/eps every point of [0, x_bar] is
    optimal; we return x_bar so the rule stays a deterministic function
    of q.  The comparison is done as q * eps <= u to keep the tie exact
    in floating point.
    """
    u_l = cfg.params.u_new if is_new_link else cfg.params.u
    return cfg.params.x_bar if q_l * cfg.epsilon <= u_l else 0.0


def max_weight_schedule(
    state: NetworkState, schedules: ScheduleSet, ch: ChannelModel
) -> Schedule:
    """Queue-length-weighted max-weight schedule; ties go to the first
    (lexicographically smallest) schedule in enumeration order."""
    if len(state.queues) != schedules.num_links:
        raise ValueError("queue vector length does not match the link count")
    _, best = max_weight_over_hull(state.queues, schedules, ch)
    return best


def draw_arrivals(x: Sequence[float], streams: SimStreams) -> tuple[int, ...]:
    """Independent Bernoulli(x_l) arrivals, one uniform per link per slot."""
    for l, v in enumerate(x):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"arrival mean for link {l} is {v}, outside [0,1]")
    return tuple(1 if streams.arrivals.next() < v else 0 for v in x)


def step(
    state: NetworkState,
    schedules: ScheduleSet,
    ch: ChannelModel,
    cfg: AllocatorConfig,
    streams: SimStreams,
) -> tuple[NetworkState, SlotTrace]:
    """Advance the network one slot."""
    d = schedules.num_links
    if len(state.queues) != d:
        raise ValueError("state does not match the schedule set")
    new_link = cfg.params.new_link
    active = schedules.active

    x = tuple(
        allocate_rate(state.queues[l], cfg, l == new_link) if l in active else 0.0
        for l in range(d)
    )
    a = draw_arrivals(x, streams)
    s = max_weight_schedule(state, schedules, ch)
    c = sample_channels(ch, streams)
    dep = tuple(c[l] * s[l] for l in range(d))
    queues = tuple(
        max(state.queues[l] + a[l] - dep[l], 0) for l in range(d)
    )
    nxt = NetworkState(queues=queues, slot=state.slot + 1)
    return nxt, SlotTrace(
        slot=state.slot,
        schedule=s,
        channels=c,
        allocation=x,
        arrivals=a,
        departures=dep,
        queues_after=queues,
    )


@dataclass(frozen=True, eq=False)
class SimResult:
    """Per-window sums from a simulation run.

    Arrays have one row per window; ``queue_sum`` accumulates the
    post-update queue lengths, so row means are packets averaged over
    the window's slots.
    """

    window_size: int
    alloc_sum: np.ndarray  # (windows, num_links) float
    arrival_sum: np.ndarray  # (windows, num_links) float counts
    depart_sum: np.ndarray  # (windows, num_links) float counts
    queue_sum: np.ndarray  # (windows, num_links) float packet-slots
    weight_sum: np.ndarray  # (windows,) float
    final: NetworkState

    @property
    def windows(self) -> int:
        return len(self.weight_sum)

    def mean_rates(self, first_window: int = 0) -> np.ndarray:
        """Per-link mean admitted rate over windows[first_window:]."""
        slots = (self.windows - first_window) * self.window_size
        return self.alloc_sum[first_window:].sum(axis=0) / slots

    def mean_departures(self, first_window: int = 0) -> np.ndarray:
        slots = (self.windows - first_window) * self.window_size
        return self.depart_sum[first_window:].sum(axis=0) / slots

    def total_queue_per_window(self) -> np.ndarray:
        return self.queue_sum.sum(axis=1) / self.window_size


def _admit_thresholds(
    d: int,
    active: frozenset[int],
    cfg: AllocatorConfig,
) -> list[float]:
    """Largest queue length at which each link still admits.

    Integer thresholds reproduce ``allocate_rate``'s q * eps <= u test
    exactly; inactive links get -1 so they never admit.
    """
    out = []
    for l in range(d):
        if l not in active:
            out.append(-1.0)
            continue
        u_l = cfg.params.u_new if l == cfg.params.new_link else cfg.params.u
        g = int(u_l / cfg.epsilon) + 2
        while g * cfg.epsilon > u_l:
            g -= 1
        out.append(float(g))
    return out


def simulate(
    schedules: ScheduleSet,
    ch: ChannelModel,
    cfg: AllocatorConfig,
    *,
    slots: int,
    seed: int,
    window: int = 1000,
    arrival_override: Sequence[float] | None = None,
    initial: NetworkState | None = None,
) -> SimResult:
    """Run the slot loop and aggregate per-window sums.

    With ``arrival_override`` set, the allocator is bypassed and every
    slot admits Bernoulli(override_l) arrivals at fixed mean (the
    allocation columns then record the override itself); scheduling and
    queueing are unchanged.  RNG consumption per slot is identical in
    both modes, so traces are comparable across modes for a fixed seed.
    """
    d = schedules.num_links
    if slots <= 0 or window <= 0 or slots % window:
        raise ValueError("slots must be a positive multiple of window")
    active = schedules.active

    if arrival_override is not None:
        xon = [float(v) for v in arrival_override]
        if len(xon) != d:
            raise ValueError("arrival override length does not match the link count")
        for l, v in enumerate(xon):
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"arrival override for link {l} is {v}, outside [0,1]")
            if v > 0.0 and l not in active:
                raise ValueError(f"arrival override feeds inactive link {l}")
        qmax = [math.inf] * d
    else:
        xon = [cfg.params.x_bar if l in active else 0.0 for l in range(d)]
        qmax = _admit_thresholds(d, active, cfg)

    streams = SimStreams(seed, d)
    arr_next = streams.arrivals.next
    chan_next = [st.next for st in streams.channels]
    mean = list(ch.mean)
    sched_links = [tuple(l for l, bit in enumerate(s) if bit) for s in schedules.schedules]

    if initial is None:
        initial = NetworkState(queues=(0,) * d)
    q = list(initial.queues)
    if len(q) != d:
        raise ValueError("initial state does not match the schedule set")

    n_windows = slots // window
    alloc_sum = np.zeros((n_windows, d))
    arrival_sum = np.zeros((n_windows, d))
    depart_sum = np.zeros((n_windows, d))
    queue_sum = np.zeros((n_windows, d))
    weight_sum = np.zeros(n_windows)

    w_alloc = [0.0] * d
    w_arr = [0] * d
    w_dep = [0] * d
    w_queue = [0] * d
    w_weight = 0.0

    arrivals = [0] * d
    chan = [0] * d
    dep = [0] * d
    rng_links = range(d)

    for t in range(slots):
        # allocation + arrivals (one uniform per link, always)
        for l in rng_links:
            u = arr_next()
            if q[l] <= qmax[l]:
                x = xon[l]
                if x > 0.0:
                    w_alloc[l] += x
                    if u < x:
                        arrivals[l] = 1
                        w_arr[l] += 1
                    else:
                        arrivals[l] = 0
                else:
                    arrivals[l] = 0
            else:
                arrivals[l] = 0

        # max-weight schedule over q(t)
        best_i = 0
        best_w = 0.0
        first = True
        for i, links in enumerate(sched_links):
            tot = 0.0
            for l in links:
                tot += q[l] * mean[l]
            if first or tot > best_w:
                best_w = tot
                best_i = i
                first = False
        w_weight += best_w

        # channels (every link, keeps streams aligned with step())
        for l in rng_links:
            chan[l] = 1 if chan_next[l]() < mean[l] else 0

        # departures + queue update
        for l in sched_links[best_i]:
            if chan[l]:
                dep[l] = 1
        for l in rng_links:
            nq = q[l] + arrivals[l] - dep[l]
            q[l] = nq if nq > 0 else 0
            w_queue[l] += q[l]
            if dep[l]:
                w_dep[l] += 1
                dep[l] = 0

        if (t + 1) % window == 0:
            w = t // window
            alloc_sum[w] = w_alloc
            arrival_sum[w] = w_arr
            depart_sum[w] = w_dep
            queue_sum[w] = w_queue
            weight_sum[w] = w_weight
            w_alloc = [0.0] * d
            w_arr = [0] * d
            w_dep = [0] * d
            w_queue = [0] * d
            w_weight = 0.0

    for arr in (alloc_sum, arrival_sum, depart_sum, queue_sum, weight_sum):
        arr.flags.writeable = False
    return SimResult(
        window_size=window,
        alloc_sum=alloc_sum,
        arrival_sum=arrival_sum,
        depart_sum=depart_sum,
        queue_sum=queue_sum,
        weight_sum=weight_sum,
        final=NetworkState(queues=tuple(q), slot=initial.slot + slots),
    )
