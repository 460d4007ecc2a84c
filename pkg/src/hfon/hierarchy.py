"""Top-down hierarchy: a uniform tree of leader-follower groups under one top leader.

Level 1 is the bottom layer; every agent at level l+1 leads exactly one group
of level-l agents, and the single top group is led by a constant exogenous
center.  All groups step synchronously from one frozen whole-tree snapshot,
so information still travels one level per step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import AddressError, ConfigurationError
from .engine import ReferenceScheme, TrajectoryRecord
from .leader import _check_group_scheme, _check_group_thresholds, group_update
from .opinions import NetworkState


@dataclass(frozen=True)
class HierarchySpec:
    """Shape of a uniform hierarchy.

    group_sizes[k] is the size of every group whose followers sit at level
    k+1.  The last entry is the single top group; the top leader itself is
    exogenous and not an agent.
    """

    group_sizes: tuple[int, ...]
    top_center: float

    def __post_init__(self):
        if len(self.group_sizes) == 0:
            raise ConfigurationError("a hierarchy needs at least one level of groups")
        if any(not (isinstance(s, int) and s >= 1) for s in self.group_sizes):
            raise ConfigurationError("every group size must be an integer >= 1")
        if not np.isfinite(self.top_center):
            raise ConfigurationError("top leader center must be finite")

    @property
    def n_levels(self) -> int:
        """Number of agent-bearing levels (the top leader sits above them)."""
        return len(self.group_sizes)

    def n_groups(self, level: int) -> int:
        """Groups at a level; level n_levels has exactly one."""
        self._check_level(level)
        count = 1
        for size in self.group_sizes[level:]:
            count *= size
        return count

    def level_count(self, level: int) -> int:
        return self.n_groups(level) * self.group_sizes[level - 1]

    @property
    def n_agents(self) -> int:
        return sum(self.level_count(l) for l in range(1, self.n_levels + 1))

    def level_offset(self, level: int) -> int:
        """Index of the level's first agent in the flattened layout (level 1 first)."""
        self._check_level(level)
        return sum(self.level_count(l) for l in range(1, level))

    def group_slice(self, level: int, group: int) -> slice:
        self._check_level(level)
        if not (isinstance(group, (int, np.integer)) and 0 <= group < self.n_groups(level)):
            raise AddressError(f"group {group!r} out of range at level {level}")
        size = self.group_sizes[level - 1]
        start = self.level_offset(level) + group * size
        return slice(start, start + size)

    def leader_index(self, level: int, group: int) -> int | None:
        """Flattened id of the agent leading this group; None when the top leader does."""
        self.group_slice(level, group)  # validates the address
        if level == self.n_levels:
            return None
        return self.level_offset(level + 1) + group

    def groups(self) -> Iterator[tuple[int, int]]:
        for level in range(1, self.n_levels + 1):
            for group in range(self.n_groups(level)):
                yield level, group

    def agent_addresses(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-agent (level, group) arrays in flattened order."""
        levels = np.empty(self.n_agents, dtype=np.intp)
        groups = np.empty(self.n_agents, dtype=np.intp)
        for level, group in self.groups():
            sl = self.group_slice(level, group)
            levels[sl] = level
            groups[sl] = group
        return levels, groups

    def _check_level(self, level: int):
        if not (isinstance(level, (int, np.integer)) and 1 <= level <= self.n_levels):
            raise AddressError(f"level {level!r} out of range (1..{self.n_levels})")


def build_uniform_hierarchy(group_sizes, top_center: float) -> HierarchySpec:
    """HierarchySpec for uniform group sizes per level, bottom level first."""
    return HierarchySpec(tuple(int(s) for s in group_sizes), float(top_center))


@dataclass
class TdState:
    """Whole-tree snapshot: the spec plus a flattened follower state (level 1 first)."""

    spec: HierarchySpec
    state: NetworkState

    def __post_init__(self):
        if self.state.n != self.spec.n_agents:
            raise ConfigurationError(
                f"hierarchy expects {self.spec.n_agents} agents, state has {self.state.n}"
            )

    def group_state(self, level: int, group: int) -> NetworkState:
        sl = self.spec.group_slice(level, group)
        return NetworkState(
            self.state.centers[sl], self.state.sigmas[sl], self.state.d[sl], self.state.b[sl]
        )

    def leader_center(self, level: int, group: int) -> float:
        idx = self.spec.leader_index(level, group)
        if idx is None:
            return self.spec.top_center
        return float(self.state.centers[idx])


def step_td(td: TdState, scheme: ReferenceScheme) -> TdState:
    """One synchronous update of every group from one frozen whole-tree snapshot."""
    _check_group_scheme(scheme)
    _check_group_thresholds(td.state.d)
    old = td.state
    new_centers = np.empty_like(old.centers)
    new_sigmas = np.empty_like(old.sigmas)
    for level, group in td.spec.groups():
        sl = td.spec.group_slice(level, group)
        leader_center = td.leader_center(level, group)
        new_centers[sl], new_sigmas[sl] = group_update(
            old.centers[sl], old.sigmas[sl], old.d[sl], old.b[sl], leader_center, scheme
        )
    return TdState(td.spec, NetworkState(new_centers, new_sigmas, old.d, old.b))


def run_td(initial: TdState, steps: int, scheme: ReferenceScheme) -> TrajectoryRecord:
    """Trajectory of all tree agents; columns follow the flattened layout."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    _check_group_scheme(scheme)
    _check_group_thresholds(initial.state.d)
    n = initial.state.n
    centers = np.empty((steps + 1, n), dtype=np.float64)
    sigmas = np.empty((steps + 1, n), dtype=np.float64)
    centers[0] = initial.state.centers
    sigmas[0] = initial.state.sigmas
    td = initial
    for k in range(steps):
        td = step_td(td, scheme)
        centers[k + 1] = td.state.centers
        sigmas[k + 1] = td.state.sigmas
    levels, groups = initial.spec.agent_addresses()
    return TrajectoryRecord(
        times=np.arange(steps + 1), centers=centers, sigmas=sigmas, levels=levels, groups=groups
    )


@dataclass(frozen=True)
class GroupSigmaRow:
    level: int
    group: int
    mean_sigma: float
    sigma_spread: float


def group_sigma_report(td: TdState) -> list[GroupSigmaRow]:
    """Per-group sigma mean and spread (max - min), every level."""
    rows = []
    for level, group in td.spec.groups():
        sl = td.spec.group_slice(level, group)
        block = td.state.sigmas[sl]
        rows.append(
            GroupSigmaRow(
                level=level,
                group=group,
                mean_sigma=float(block.mean()),
                sigma_spread=float(block.max() - block.min()),
            )
        )
    return rows
