"""End-to-end admission probe.

A link asking to join at rate x_bar gets a utility slope strictly below
the safe bound (a fixed fraction ``rho`` of it), the joint system is run
for a finite horizon, and the requester's post-warmup time-average
admitted rate estimates the largest rate the network can spare without
touching the already-admitted links.  The verdict compares that estimate
against x_bar minus a slack.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from admitsim.capacity import (
    UtilityParams,
    compute_x_hat,
    membership,
    new_link_weight_bound,
)
from admitsim.control import AllocatorConfig, simulate
from admitsim.errors import BaselineInfeasibleError, ConfigError
from admitsim.topology import ChannelModel, ConflictGraph, enumerate_schedules

import numpy as np


@dataclass(frozen=True)
class ProbeConfig:
    x_bar: float
    epsilon: float
    u: float = 1.0
    rho: float = 0.9
    u_new: float | None = None  # explicit override; must stay below the bound
    horizon: int = 1_000_000
    warmup: int = 500_000
    delta_admit: float = 0.03
    disturbance_tol: float = 0.02
    window: int = 1000

    def __post_init__(self):
        if not (0.0 < self.rho < 1.0):
            raise ConfigError(f"rho must be in (0,1), got {self.rho}")
        if self.warmup < 0 or self.warmup >= self.horizon:
            raise ConfigError(
                f"need horizon > warmup >= 0, got horizon={self.horizon} "
                f"warmup={self.warmup}"
            )
        if self.horizon % self.window or self.warmup % self.window:
            raise ConfigError("horizon and warmup must be multiples of the window")
        if self.delta_admit <= 0.0 or self.disturbance_tol <= 0.0:
            raise ConfigError("admit and disturbance tolerances must be positive")


@dataclass(frozen=True)
class ProbeEvidence:
    """Run metadata attached to a decision, for reproducibility."""

    seed: int
    horizon: int
    warmup: int
    epsilon: float
    u: float
    u_new: float
    rho: float
    departure_rates: tuple[float, ...]


@dataclass(frozen=True)
class AdmissionDecision:
    admit: bool
    x_hat_est: float
    per_link_rates: tuple[float, ...]
    existing_links: tuple[int, ...]
    disturbance_ok: tuple[bool, ...]
    oracle_x_hat: float | None
    evidence: ProbeEvidence


def choose_new_link_weight(
    u: float,
    ch: ChannelModel,
    active_plus: Iterable[int],
    new_link: int,
    rho: float,
) -> float:
    """Utility slope for the requester: rho times the safe bound.

    Any rho in (0,1) keeps the strict inequality; values near 1 speed up
    the rate estimate, values near 0 minimize disturbance.
    """
    if not (0.0 < rho < 1.0):
        raise ValueError(f"rho must be in (0,1), got {rho}")
    return rho * new_link_weight_bound(u, ch, active_plus, new_link)


def decide(x_hat_est: float, x_bar: float, delta_admit: float) -> bool:
    """Admit iff the estimated grantable rate reaches x_bar - delta_admit."""
    return x_hat_est >= x_bar - delta_admit


def probe(
    cfg: ProbeConfig,
    graph: ConflictGraph,
    ch: ChannelModel,
    existing: Iterable[int],
    new_link: int,
    seed: int,
    with_oracle: bool = True,
) -> AdmissionDecision:
    """Run the joint system and decide whether the new link fits.

    Requires that the existing links alone can already be served at
    x_bar (checked against the oracle; raises BaselineInfeasibleError
    otherwise).  Measures time-average admitted rates over the slots
    after ``warmup`` and flags each existing link whose average dropped
    more than ``disturbance_tol`` below x_bar.  Departure rates ride
    along in the evidence for diagnostics.
    """
    existing = frozenset(existing)
    if new_link in existing:
        raise ConfigError(f"new link {new_link} is already in the existing set")
    active_plus = existing | {new_link}
    schedules_plus = enumerate_schedules(graph, active_plus)

    baseline = np.zeros(graph.num_links)
    baseline[sorted(existing)] = cfg.x_bar
    base = membership(baseline, schedules_plus.restrict(existing), ch)
    if not base.inside:
        raise BaselineInfeasibleError(
            f"existing links cannot all be served at x_bar={cfg.x_bar}; "
            "admission probing assumes a feasible baseline"
        )

    bound = new_link_weight_bound(cfg.u, ch, active_plus, new_link)
    if cfg.u_new is not None:
        if not (0.0 < cfg.u_new < bound):
            raise ConfigError(
                f"u_new={cfg.u_new} is not strictly inside (0, {bound:.6g}); "
                "the no-disturbance guarantee needs u_new below the bound"
            )
        u_new = cfg.u_new
    else:
        u_new = choose_new_link_weight(cfg.u, ch, active_plus, new_link, cfg.rho)

    params = UtilityParams(x_bar=cfg.x_bar, u=cfg.u, u_new=u_new, new_link=new_link)
    alloc_cfg = AllocatorConfig(epsilon=cfg.epsilon, params=params)
    result = simulate(
        schedules_plus,
        ch,
        alloc_cfg,
        slots=cfg.horizon,
        seed=seed,
        window=cfg.window,
    )

    first_window = cfg.warmup // cfg.window
    rates = result.mean_rates(first_window)
    departures = result.mean_departures(first_window)

    x_hat_est = float(rates[new_link])
    links = tuple(sorted(existing))
    flags = tuple(bool(rates[l] >= cfg.x_bar - cfg.disturbance_tol) for l in links)

    oracle = None
    if with_oracle:
        oracle = compute_x_hat(params, schedules_plus, ch, existing, new_link)

    return AdmissionDecision(
        admit=decide(x_hat_est, cfg.x_bar, cfg.delta_admit),
        x_hat_est=x_hat_est,
        per_link_rates=tuple(float(r) for r in rates),
        existing_links=links,
        disturbance_ok=flags,
        oracle_x_hat=oracle,
        evidence=ProbeEvidence(
            seed=seed,
            horizon=cfg.horizon,
            warmup=cfg.warmup,
            epsilon=cfg.epsilon,
            u=cfg.u,
            u_new=u_new,
            rho=cfg.rho,
            departure_rates=tuple(float(r) for r in departures),
        ),
    )
