"""Network topology: links, pairwise interference, ON/OFF channels, and
enumeration of feasible transmission schedules.

Interference is modeled as a conflict graph on links: a schedule (0/1
vector over links) is feasible iff its active links form an independent
set.  Channels are i.i.d. per-slot Bernoulli ON/OFF with a strictly
positive mean per link; a transmission succeeds only when the channel
is ON.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from admitsim.rng import SimStreams

# A schedule is a 0/1 tuple of length num_links; entry l says whether
# link l transmits this slot.
Schedule = tuple[int, ...]

# Explicit enumeration is exponential in the worst case; beyond this many
# active links the vertex lists stop being desk-scale.
MAX_ENUM_LINKS = 20


@dataclass(frozen=True)
class ConflictGraph:
    """Pairwise interference between links.

    ``conflicts`` holds normalized (a < b) pairs; the relation is kept
    symmetric and irreflexive by construction.
    """

    num_links: int
    conflicts: frozenset[tuple[int, int]]

    def __init__(self, num_links: int, conflicts: Iterable[tuple[int, int]] = ()):
        if num_links < 1:
            raise ValueError(f"num_links must be >= 1, got {num_links}")
        normalized = set()
        for a, b in conflicts:
            if a == b:
                raise ValueError(f"conflict pair ({a},{b}) is a self-loop")
            if not (0 <= a < num_links and 0 <= b < num_links):
                raise ValueError(
                    f"conflict pair ({a},{b}) references a link outside [0,{num_links})"
                )
            normalized.add((min(a, b), max(a, b)))
        object.__setattr__(self, "num_links", num_links)
        object.__setattr__(self, "conflicts", frozenset(normalized))

    def conflicts_with(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.conflicts

    def neighbor_masks(self) -> list[int]:
        """Per-link bitmask of conflicting links."""
        masks = [0] * self.num_links
        for a, b in self.conflicts:
            masks[a] |= 1 << b
            masks[b] |= 1 << a
        return masks


@dataclass(frozen=True)
class ChannelModel:
    """Per-link Bernoulli ON probability; every mean must be in (0, 1]."""

    mean: tuple[float, ...]

    def __init__(self, mean: Iterable[float]):
        mean = tuple(float(m) for m in mean)
        for l, m in enumerate(mean):
            if not (0.0 < m <= 1.0):
                raise ValueError(f"channel mean for link {l} must be in (0,1], got {m}")
        object.__setattr__(self, "mean", mean)

    @property
    def num_links(self) -> int:
        return len(self.mean)


@dataclass(frozen=True)
class ScheduleSet:
    """All feasible schedules that serve only links in ``active``.

    Schedules are stored in ascending lexicographic order of the 0/1
    tuple, which downstream tie-breaking relies on.  The set always
    contains the empty schedule and every singleton of ``active``.
    """

    schedules: tuple[Schedule, ...]
    active: frozenset[int]
    num_links: int

    def __len__(self) -> int:
        return len(self.schedules)

    def restrict(self, active: Iterable[int]) -> "ScheduleSet":
        """Sub-family serving only ``active`` (must be a subset)."""
        active = frozenset(active)
        if not active <= self.active:
            raise ValueError("restriction target is not a subset of the active set")
        kept = tuple(
            s
            for s in self.schedules
            if all(s[l] == 0 for l in self.active - active)
        )
        return ScheduleSet(schedules=kept, active=active, num_links=self.num_links)


def is_feasible(g: ConflictGraph, s: Schedule) -> bool:
    """True iff no two jointly active links conflict."""
    on = [l for l, bit in enumerate(s) if bit]
    for i, a in enumerate(on):
        for b in on[i + 1 :]:
            if g.conflicts_with(a, b):
                return False
    return True


def enumerate_schedules(g: ConflictGraph, active: Iterable[int]) -> ScheduleSet:
    """Enumerate every feasible schedule restricted to ``active``.

    Returns exactly the independent subsets of ``active`` in the conflict
    relation, as 0/1 tuples of length ``g.num_links`` (zero outside
    ``active``), in ascending lexicographic order.
    """
    active = frozenset(active)
    for l in active:
        if not (0 <= l < g.num_links):
            raise ValueError(
                f"active link {l} is outside [0,{g.num_links}); "
                "config and topology disagree"
            )
    if len(active) > MAX_ENUM_LINKS:
        raise ValueError(
            f"refusing to enumerate schedules over {len(active)} links "
            f"(cap is {MAX_ENUM_LINKS})"
        )

    masks = g.neighbor_masks()
    order = sorted(active)
    base = [0] * g.num_links
    out: list[Schedule] = []

    # Depth-first over links in index order, trying s_l = 0 before
    # s_l = 1, which emits tuples in ascending lexicographic order.
    def extend(i: int, chosen_mask: int) -> None:
        if i == len(order):
            out.append(tuple(base))
            return
        l = order[i]
        extend(i + 1, chosen_mask)
        if not (masks[l] & chosen_mask):
            base[l] = 1
            extend(i + 1, chosen_mask | (1 << l))
            base[l] = 0

    extend(0, 0)
    # The DFS visits links in sorted index order, but lexicographic order
    # of full-length tuples is driven by link index too, so `out` is
    # already sorted; assert-free by construction.
    return ScheduleSet(schedules=tuple(out), active=active, num_links=g.num_links)


def sample_channels(ch: ChannelModel, streams: SimStreams) -> tuple[int, ...]:
    """One slot of per-link channel states, drawn from the per-link streams."""
    return tuple(
        1 if streams.channels[l].next() < ch.mean[l] else 0
        for l in range(ch.num_links)
    )
