"""Real-space fields on a uniform periodic grid.

A Field samples a scalar or vector function on the torus [-L/2, L/2)^n with N
points per axis.  It is the discrete stand-in for an element of a weak
Lebesgue space over R^n; all norms downstream are computed over one period.
"""

from __future__ import annotations

from dataclasses import dataclass
import struct

import numpy as np

__all__ = ["Grid", "Field", "coordinate_arrays", "radius_array"]


@dataclass(frozen=True)
class Grid:
    """Grid metadata: dimension n, resolution N per axis, box side L."""

    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (3, 4):
            raise ValueError(f"dimension must be 3 or 4, got {self.n}")
        if self.N < 4 or (self.N & (self.N - 1)) != 0:
            raise ValueError(f"resolution must be a power of two >= 4, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"box side must be positive, got {self.L}")

    @property
    def h(self) -> float:
        """Grid spacing L/N."""
        return self.L / self.N

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n


def coordinate_arrays(grid: Grid) -> list[np.ndarray]:
    """Meshgrid coordinates of cell points, x_i in [-L/2, L/2)."""
    axis = -grid.L / 2 + grid.h * np.arange(grid.N)
    return list(np.meshgrid(*([axis] * grid.n), indexing="ij"))

def radius_array(grid: Grid) -> np.ndarray:
    xs = coordinate_arrays(grid)
    return np.sqrt(sum(x**2 for x in xs))


class Field:
    """Samples of a scalar (c=1) or vector (c=n) function on a Grid.

    data has shape (c, N, ..., N).  Fields are treated as immutable; all
    operations return fresh Fields.  Two Fields compose (add, multiply
    pointwise) only when their metadata coincide.
    """

    def __init__(self, grid: Grid, data: np.ndarray):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim == grid.n:
            data = data[np.newaxis]
        if data.ndim != grid.n + 1 or data.shape[1:] != grid.shape:
            raise ValueError(
                f"sample array shape {data.shape} inconsistent with grid {grid}"
            )
        c = data.shape[0]
        if c not in (1, grid.n):
            raise ValueError(f"components must be 1 or n={grid.n}, got {c}")
        self.grid = grid
        self.data = data

    @property
    def components(self) -> int:
        return self.data.shape[0]

    @property
    def is_vector(self) -> bool:
        return self.components == self.grid.n

    def require_finite(self) -> None:
        """Reject NaN/Inf, naming the first offending flat index."""
        finite = np.isfinite(self.data)
        if not finite.all():
            idx = int(np.flatnonzero(~finite.ravel())[0])
            raise ValueError(f"non-finite sample at flat index {idx}")

    def check_composable(self, other: "Field") -> None:
        if self.grid != other.grid or self.components != other.components:
            raise ValueError(
                f"fields not composable: {self.grid}/{self.components} vs "
                f"{other.grid}/{other.components}"
            )

    def magnitude(self) -> np.ndarray:
        """Pointwise Euclidean magnitude, shape (N, ..., N)."""
        if self.components == 1:
            return np.abs(self.data[0])
        return np.sqrt(np.sum(self.data**2, axis=0))

    def copy(self) -> "Field":
        return Field(self.grid, self.data.copy())

    def __add__(self, other: "Field") -> "Field":
        self.check_composable(other)
        return Field(self.grid, self.data + other.data)

    def __sub__(self, other: "Field") -> "Field":
        self.check_composable(other)
        return Field(self.grid, self.data - other.data)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.data * float(scalar))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        kind = "vector" if self.is_vector else "scalar"
        return f"Field({kind}, n={self.grid.n}, N={self.grid.N}, L={self.grid.L})"

    # -- flat binary format: header of four little-endian float64 values
    #    (n, N, L, c) followed by row-major float64 samples.

    def to_bytes(self) -> bytes:
        header = struct.pack(
            "<4d", float(self.grid.n), float(self.grid.N), self.grid.L,
            float(self.components),
        )
        return header + self.data.astype("<f8").tobytes(order="C")

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Field":
        n, N, L, c = struct.unpack("<4d", blob[:32])
        grid = Grid(int(n), int(N), L)
        count = int(c) * grid.N**grid.n
        data = np.frombuffer(blob[32:], dtype="<f8", count=count)
        return cls(grid, data.reshape((int(c),) + grid.shape).copy())

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "Field":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def axis_slice(self, component: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """1-D slice along the first axis through the box center, for plots."""
        axis = -self.grid.L / 2 + self.grid.h * np.arange(self.grid.N)
        center = (self.grid.N // 2,) * (self.grid.n - 1)
        return axis, self.data[(component, slice(None)) + center]


def zeros(grid: Grid, components: int = 1) -> Field:
    return Field(grid, np.zeros((components,) + grid.shape))
