"""Time grids and time-indexed field sequences."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import Field, Grid

__all__ = ["TimeGrid", "Trajectory"]


@dataclass(frozen=True)
class TimeGrid:
    """Nodes 0 = s_0 < ... < s_M = T, graded as s_j = T (j/M)^gamma.

    gamma = 1 is uniform; gamma > 1 clusters nodes near s = 0 where the local
    theory's iterates carry inverse-power time weights.
    """

    horizon: float
    segments: int
    gamma: float = 2.0
    nodes: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        if self.segments < 2:
            raise ValueError("need at least 2 segments")
        if self.gamma < 1:
            raise ValueError("grading exponent must be >= 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        j = np.arange(self.segments + 1, dtype=np.float64)
        nodes = self.horizon * (j / self.segments) ** self.gamma
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return self.segments + 1

    def index_of(self, t: float) -> int:
        """Index of node t; anything off-grid is rejected, no interpolation."""
        idx = int(np.argmin(np.abs(self.nodes - t)))
        if not np.isclose(self.nodes[idx], t, rtol=1e-12, atol=1e-15):
            raise ValueError(f"t={t} is not a node of {self}")
        return idx

    def restricted(self, upto_index: int) -> "TimeGrid":
        """Sub-grid on [0, nodes[upto_index]], same node sequence."""
        sub = TimeGrid(self.nodes[upto_index], upto_index, 1.0)
        object.__setattr__(sub, "nodes", self.nodes[: upto_index + 1].copy())
        object.__setattr__(sub, "gamma", self.gamma)
        return sub

    def shifted(self, from_index: int) -> "TimeGrid":
        """Sub-grid starting at node from_index, shifted to begin at 0."""
        nodes = self.nodes[from_index:] - self.nodes[from_index]
        sub = TimeGrid(nodes[-1], len(nodes) - 1, 1.0)
        object.__setattr__(sub, "nodes", nodes.copy())
        return sub


class Trajectory:
    """One Field per TimeGrid node, uniform metadata, no gaps."""

    def __init__(self, time_grid: TimeGrid, fields: list[Field]):
        if len(fields) != len(time_grid):
            raise ValueError(
                f"{len(fields)} fields for {len(time_grid)} nodes"
            )
        g0, c0 = fields[0].grid, fields[0].components
        for f in fields[1:]:
            if f.grid != g0 or f.components != c0:
                raise ValueError("trajectory fields must share metadata")
        self.time_grid = time_grid
        self.fields = fields

    @property
    def grid(self) -> Grid:
        return self.fields[0].grid

    @property
    def components(self) -> int:
        return self.fields[0].components

    def __len__(self) -> int:
        return len(self.fields)

    def __getitem__(self, i: int) -> Field:
        return self.fields[i]

    def at(self, t: float) -> Field:
        return self.fields[self.time_grid.index_of(t)]

    def check_same_grids(self, other: "Trajectory") -> None:
        if self.grid != other.grid or not np.array_equal(
            self.time_grid.nodes, other.time_grid.nodes
        ):
            raise ValueError("trajectories live on different grids")

    def map(self, fn) -> "Trajectory":
        return Trajectory(self.time_grid, [fn(f) for f in self.fields])

    def restricted(self, upto_index: int) -> "Trajectory":
        return Trajectory(
            self.time_grid.restricted(upto_index), self.fields[: upto_index + 1]
        )

    def shifted(self, from_index: int) -> "Trajectory":
        return Trajectory(
            self.time_grid.shifted(from_index), self.fields[from_index:]
        )

    @classmethod
    def constant(cls, time_grid: TimeGrid, f: Field) -> "Trajectory":
        return cls(time_grid, [f] * len(time_grid))

    @classmethod
    def from_function(cls, time_grid: TimeGrid, fn) -> "Trajectory":
        """Sample fn(t) -> Field at every node."""
        return cls(time_grid, [fn(t) for t in time_grid.nodes])
