"""Exact capacity-region oracle.

Per-schedule mean service vectors form a finite vertex set; the set of
supportable long-run service rates is (the downward closure of) their
convex hull.  Everything here is desk-scale and solved exactly:

- ``gamma``: the vertex list itself.
- ``membership``: can a randomized schedule dominate a target rate
  vector?  Returns a witnessing schedule distribution, or a separating
  hyperplane certificate when it cannot.
- ``max_weight_over_hull``: the best queue-weighted service over all
  schedules; by linearity this equals the hull maximum.
- ``solve_static``: the static utility-maximization LP for capped-linear
  utilities.
- ``compute_x_hat``: the largest rate grantable to a joining link while
  every already-admitted link keeps its requested rate.

LPs are solved with scipy's HiGHS backend; vertex lists stay small
(enumeration is capped upstream), so no decomposition is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.optimize import linprog

from admitsim.errors import BaselineInfeasibleError
from admitsim.topology import ChannelModel, Schedule, ScheduleSet

WEIGHT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class GammaSet:
    """Mean-service vertices, one row per schedule (entry = mean * bit)."""

    schedule_set: ScheduleSet
    vertices: np.ndarray  # shape (num_schedules, num_links), read-only

    def __len__(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True, eq=False)
class SchedulingPolicy:
    """A probability distribution over the schedules of a ScheduleSet."""

    schedule_set: ScheduleSet
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.schedule_set.schedules),):
            raise ValueError("policy weight vector does not match the schedule set")
        if w.min() < -WEIGHT_TOL:
            raise ValueError(f"negative schedule probability {w.min()}")
        if abs(w.sum() - 1.0) > 1e-6:
            raise ValueError(f"schedule probabilities sum to {w.sum()}, not 1")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def mean_service(self, ch: ChannelModel) -> np.ndarray:
        """Expected per-link service rate under this policy."""
        return gamma(self.schedule_set, ch).vertices.T @ self.weights


@dataclass(frozen=True, eq=False)
class MembershipResult:
    inside: bool
    policy: SchedulingPolicy | None
    certificate: np.ndarray | None
    # min total dominance shortfall (0 when inside) and, when outside,
    # the separation margin b@x - max_s b@gamma_s of the certificate
    violation: float
    margin: float | None = None


@dataclass(frozen=True)
class UtilityParams:
    """Capped-linear utility family: U_l(x) = u_l * min(x, x_bar).

    ``u`` is the slope for already-admitted links; ``u_new`` the slope
    for ``new_link`` when one is present.
    """

    x_bar: float
    u: float
    u_new: float | None = None
    new_link: int | None = None

    def __post_init__(self):
        if not (0.0 < self.x_bar <= 1.0):
            raise ValueError(f"x_bar must be in (0,1], got {self.x_bar}")
        if self.u <= 0.0:
            raise ValueError(f"u must be positive, got {self.u}")
        if self.new_link is not None:
            if self.u_new is None or self.u_new <= 0.0:
                raise ValueError("a new link requires a positive u_new")

    def slope(self, link: int) -> float:
        if self.new_link is not None and link == self.new_link:
            return float(self.u_new)
        return self.u


@dataclass(frozen=True, eq=False)
class StaticSolution:
    policy: SchedulingPolicy
    service: np.ndarray  # mu*, length num_links
    allocation: np.ndarray  # x*, length num_links, capped at x_bar
    objective: float


def gamma(schedules: ScheduleSet, ch: ChannelModel) -> GammaSet:
    """Vertex i is ``mean * schedule_i`` elementwise."""
    if ch.num_links != schedules.num_links:
        raise ValueError("channel model and schedule set disagree on link count")
    if not schedules.schedules:
        raise ValueError("empty schedule set")
    s = np.array(schedules.schedules, dtype=float)
    v = s * np.asarray(ch.mean)
    v.flags.writeable = False
    return GammaSet(schedule_set=schedules, vertices=v)


def schedule_weight(q: Iterable[float], mean: Iterable[float], s: Schedule) -> float:
    """sum of q_l * mean_l over the links active in ``s``.

    Summed in increasing link order; the per-slot scheduler uses the same
    accumulation so the two agree bit-for-bit.
    """
    total = 0.0
    for l, bit in enumerate(s):
        if bit:
            total += q[l] * mean[l]
    return total


def max_weight_over_hull(
    q: Iterable[float], schedules: ScheduleSet, ch: ChannelModel
) -> tuple[float, Schedule]:
    """Maximize sum q_l * mean_l * s_l over all feasible schedules.

    A linear objective attains its hull maximum at a vertex, so this
    enumeration equals the LP maximum over the convex hull.  Ties go to
    the lexicographically smallest schedule (first in enumeration order).
    """
    q = list(q)
    if len(q) != schedules.num_links:
        raise ValueError("queue vector length does not match the link count")
    best_value = schedule_weight(q, ch.mean, schedules.schedules[0])
    best = schedules.schedules[0]
    for s in schedules.schedules[1:]:
        w = schedule_weight(q, ch.mean, s)
        if w > best_value:
            best_value = w
            best = s
    return best_value, best


def membership(
    x: Iterable[float],
    schedules: ScheduleSet,
    ch: ChannelModel,
    tol: float = WEIGHT_TOL,
) -> MembershipResult:
    """Decide whether some schedule distribution dominates ``x``.

    Solves the min-total-shortfall LP

        min 1@s  s.t.  V.T @ w + s >= x,  1@w = 1,  w >= 0,  s >= 0

    over the vertex matrix V.  Shortfall <= tol means inside, with the
    witnessing distribution ``w``.  Otherwise a second LP produces a
    non-negative separating direction ``b`` (normalized to sum 1) with
    b@x strictly above every vertex's b@gamma.
    """
    x = np.asarray(list(x), dtype=float)
    if x.shape != (schedules.num_links,):
        raise ValueError(
            f"rate vector has length {x.shape[0]}, expected {schedules.num_links}"
        )
    verts = gamma(schedules, ch).vertices
    n, d = verts.shape

    c = np.concatenate([np.zeros(n), np.ones(d)])
    a_ub = np.hstack([-verts.T, -np.eye(d)])
    a_eq = np.concatenate([np.ones(n), np.zeros(d)])[None, :]
    res = linprog(
        c, A_ub=a_ub, b_ub=-x, A_eq=a_eq, b_eq=[1.0], bounds=(0, None), method="highs"
    )
    if res.status != 0:
        raise RuntimeError(f"membership LP failed: {res.message}")
    violation = float(res.fun)
    if violation <= tol:
        policy = SchedulingPolicy(schedules, np.maximum(res.x[:n], 0.0) / res.x[:n].sum())
        return MembershipResult(
            inside=True, policy=policy, certificate=None, violation=violation
        )

    # Separating direction: max b@x - t with b@gamma_s <= t for every
    # vertex, b >= 0 normalized to 1@b = 1.
    c2 = np.concatenate([-x, [1.0]])
    a_ub2 = np.hstack([verts, -np.ones((n, 1))])
    a_eq2 = np.concatenate([np.ones(d), [0.0]])[None, :]
    res2 = linprog(
        c2,
        A_ub=a_ub2,
        b_ub=np.zeros(n),
        A_eq=a_eq2,
        b_eq=[1.0],
        bounds=[(0, None)] * d + [(None, None)],
        method="highs",
    )
    if res2.status != 0:
        raise RuntimeError(f"separation LP failed: {res2.message}")
    b = np.maximum(res2.x[:d], 0.0)
    margin = float(-res2.fun)
    if margin <= 0:
        raise RuntimeError(
            "separation margin is not positive; membership is numerically ambiguous"
        )
    b.flags.writeable = False
    return MembershipResult(
        inside=False, policy=None, certificate=b, violation=violation, margin=margin
    )


def solve_static(
    params: UtilityParams,
    schedules: ScheduleSet,
    ch: ChannelModel,
    active: Iterable[int],
) -> StaticSolution:
    """Maximize total capped-linear utility over the capacity region.

    The cap makes the utility piecewise linear, so introducing capped
    allocation variables y_l = min(x_l, x_bar) turns the problem into an
    exact LP:

        max  sum u_l * y_l
        s.t. y_l <= (V.T @ w)_l,  0 <= y_l <= x_bar,  1@w = 1,  w >= 0.
    """
    active = frozenset(active)
    if active != schedules.active:
        raise ValueError("active set does not match the schedule set")
    d = schedules.num_links
    verts = gamma(schedules, ch).vertices
    n = len(verts)
    links = sorted(active)
    m = len(links)

    if m == 0:
        # Degenerate: nothing to serve; all weight on the empty schedule.
        w = np.zeros(n)
        w[0] = 1.0
        return StaticSolution(
            policy=SchedulingPolicy(schedules, w),
            service=np.zeros(d),
            allocation=np.zeros(d),
            objective=0.0,
        )

    slopes = np.array([params.slope(l) for l in links])
    c = np.concatenate([np.zeros(n), -slopes])
    # y_j - (V.T w)_{links[j]} <= 0
    a_ub = np.hstack([-verts[:, links].T, np.eye(m)])
    a_eq = np.concatenate([np.ones(n), np.zeros(m)])[None, :]
    bounds = [(0, None)] * n + [(0, params.x_bar)] * m
    res = linprog(
        c, A_ub=a_ub, b_ub=np.zeros(m), A_eq=a_eq, b_eq=[1.0], bounds=bounds,
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"static allocation LP failed: {res.message}")

    w = np.maximum(res.x[:n], 0.0)
    policy = SchedulingPolicy(schedules, w / w.sum())
    service = verts.T @ policy.weights
    allocation = np.zeros(d)
    allocation[links] = res.x[n:]
    service.flags.writeable = False
    allocation.flags.writeable = False
    return StaticSolution(
        policy=policy,
        service=service,
        allocation=allocation,
        objective=float(-res.fun),
    )


def compute_x_hat(
    params: UtilityParams,
    schedules_plus: ScheduleSet,
    ch: ChannelModel,
    existing: Iterable[int],
    new_link: int,
) -> float:
    """Largest rate the joining link can get with every existing link at x_bar.

    Solves  max (V.T w)_{new}  s.t. (V.T w)_l >= x_bar for existing l,
    over schedule distributions w, then caps the result at x_bar (the
    utility saturates there, so the system never allocates more).
    """
    existing = frozenset(existing)
    if existing | {new_link} != schedules_plus.active or new_link in existing:
        raise ValueError("existing set plus the new link must equal the active set")

    old = schedules_plus.restrict(existing)
    baseline = np.zeros(schedules_plus.num_links)
    baseline[sorted(existing)] = params.x_bar
    check = membership(baseline, old, ch)
    if not check.inside:
        raise BaselineInfeasibleError(
            f"existing links cannot all be served at x_bar={params.x_bar} "
            f"(dominance shortfall {check.violation:.3g})"
        )

    verts = gamma(schedules_plus, ch).vertices
    n = len(verts)
    links = sorted(existing)
    res = linprog(
        -verts[:, new_link],
        A_ub=-verts[:, links].T,
        b_ub=-np.full(len(links), params.x_bar),
        A_eq=np.ones((1, n)),
        b_eq=[1.0],
        bounds=(0, None),
        method="highs",
    )
    if res.status != 0:
        # The baseline check above makes this unreachable in exact
        # arithmetic; surface solver trouble rather than guessing.
        raise RuntimeError(f"max-new-rate LP failed: {res.message}")
    return min(params.x_bar, float(-res.fun))


def new_link_weight_bound(
    u: float, ch: ChannelModel, active_plus: Iterable[int], new_link: int
) -> float:
    """Strict upper bound on the joining link's utility slope.

    Below ``u * min(mean over the joint active set) / mean_new`` the
    static optimum provably keeps every existing link at x_bar.
    """
    active_plus = frozenset(active_plus)
    if new_link not in active_plus:
        raise ValueError("new link must belong to the joint active set")
    return u * min(ch.mean[l] for l in active_plus) / ch.mean[new_link]


def weight_condition_holds(
    params: UtilityParams, ch: ChannelModel, active_plus: Iterable[int]
) -> bool:
    """Strict inequality check of u_new against the safe-slope bound."""
    if params.new_link is None:
        raise ValueError("params do not designate a new link")
    bound = new_link_weight_bound(params.u, ch, active_plus, params.new_link)
    return params.u_new < bound
