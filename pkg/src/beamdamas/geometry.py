"""Microphone arrays, scan grids, acoustic media and synthetic source scenes.

All types here are immutable after construction and safe to share across
threads. Grid points use a public 1-based, row-major index (1..N); the
underlying numpy arrays remain 0-based, so ``map_values[i - 1]`` belongs to
grid point ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "MicArray",
    "ScanGrid",
    "Medium",
    "Source",
    "SourceScene",
    "make_ring_array",
    "default_array",
    "make_scan_grid",
    "nearest_grid_index",
    "load_mic_array",
    "save_mic_array",
]

# Two mics closer than this are considered coincident (meters).
_COINCIDENT_TOL = 1e-12


def _as_float_array(values, shape_name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{shape_name} must be finite")
    return arr


@dataclass(frozen=True)
class MicArray:
    """Planar or volumetric microphone array.

    positions: (m0, 3) coordinates in meters.
    weights: (m0,) non-negative per-microphone weights, default all 1.
    center: reference point used for center-referenced distances.
    """

    positions: np.ndarray
    weights: np.ndarray
    center: np.ndarray

    def __init__(self, positions, weights=None, center=None):
        positions = _as_float_array(positions, "mic positions").reshape(-1, 3)
        m0 = positions.shape[0]
        if m0 < 2:
            raise ValueError(f"need at least 2 microphones, got {m0}")
        # pairwise coincidence check
        diff = positions[:, None, :] - positions[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        if dist.min() < _COINCIDENT_TOL:
            i, j = np.unravel_index(np.argmin(dist), dist.shape)
            raise ValueError(f"microphones {i} and {j} coincide")
        if weights is None:
            weights = np.ones(m0)
        weights = _as_float_array(weights, "mic weights").reshape(-1)
        if weights.shape[0] != m0:
            raise ValueError(f"expected {m0} weights, got {weights.shape[0]}")
        if np.any(weights < 0):
            raise ValueError("mic weights must be non-negative")
        if np.count_nonzero(weights) < 2:
            raise ValueError("need at least two microphones with positive weight")
        if center is None:
            center = positions.mean(axis=0)
        center = _as_float_array(center, "array center").reshape(3)
        for name, value in (("positions", positions), ("weights", weights), ("center", center)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_mics(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class ScanGrid:
    """Planar rectangular grid of candidate source points.

    The grid spans ``origin + col*dx*axis_u + row*dx*axis_v`` for
    ``col in 0..n_cols-1`` and ``row in 0..n_rows-1``. Public point indices
    are 1-based and row-major: index = row * n_cols + col + 1.
    """

    origin: np.ndarray
    axis_u: np.ndarray
    axis_v: np.ndarray
    dx: float
    n_cols: int
    n_rows: int

    def __init__(self, origin, axis_u, axis_v, dx, n_cols, n_rows):
        if dx <= 0:
            raise ValueError(f"grid spacing must be positive, got {dx}")
        if n_cols < 1 or n_rows < 1:
            raise ValueError("grid needs at least one column and one row")
        origin = _as_float_array(origin, "grid origin").reshape(3)
        axis_u = _as_float_array(axis_u, "grid axis").reshape(3)
        axis_v = _as_float_array(axis_v, "grid axis").reshape(3)
        for ax in (axis_u, axis_v):
            if abs(np.linalg.norm(ax) - 1.0) > 1e-9:
                raise ValueError("grid axes must be unit vectors")
        if abs(float(axis_u @ axis_v)) > 1e-9:
            raise ValueError("grid axes must be orthogonal")
        object.__setattr__(self, "dx", float(dx))
        object.__setattr__(self, "n_cols", int(n_cols))
        object.__setattr__(self, "n_rows", int(n_rows))
        for name, value in (("origin", origin), ("axis_u", axis_u), ("axis_v", axis_v)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_points(self) -> int:
        return self.n_cols * self.n_rows

    def col_row(self, index: int) -> tuple[int, int]:
        """Split a 1-based point index into 0-based (col, row)."""
        if not 1 <= index <= self.n_points:
            raise IndexError(f"grid index {index} outside 1..{self.n_points}")
        i0 = index - 1
        return i0 % self.n_cols, i0 // self.n_cols

    def index_of(self, col: int, row: int) -> int:
        """1-based point index of 0-based (col, row)."""
        if not (0 <= col < self.n_cols and 0 <= row < self.n_rows):
            raise IndexError(f"cell ({col}, {row}) outside grid")
        return row * self.n_cols + col + 1

    def point(self, index: int) -> np.ndarray:
        """Coordinates of grid point ``index`` (1-based)."""
        col, row = self.col_row(index)
        return self.origin + (col * self.dx) * self.axis_u + (row * self.dx) * self.axis_v

    def points(self) -> np.ndarray:
        """All grid points as an (N, 3) array in index order."""
        cols = np.arange(self.n_points) % self.n_cols
        rows = np.arange(self.n_points) // self.n_cols
        return (
            self.origin[None, :]
            + (cols * self.dx)[:, None] * self.axis_u[None, :]
            + (rows * self.dx)[:, None] * self.axis_v[None, :]
        )

    def plane_coords(self, index: int) -> tuple[float, float]:
        """In-plane (s, t) offsets in meters of a point from the grid origin."""
        col, row = self.col_row(index)
        return col * self.dx, row * self.dx


@dataclass(frozen=True)
class Medium:
    """Acoustic medium: sound speed and SPL reference pressure."""

    sound_speed: float = 343.0
    p_ref: float = 20e-6

    def __post_init__(self):
        if self.sound_speed <= 0:
            raise ValueError("sound speed must be positive")
        if self.p_ref <= 0:
            raise ValueError("reference pressure must be positive")


@dataclass(frozen=True)
class Source:
    """Monopole source.

    ``amplitude`` is the RMS pressure (Pa) the source produces at the
    array-center distance, so its mean-square map value is amplitude**2.
    """

    position: tuple[float, float, float]
    frequency: float
    amplitude: float

    def __post_init__(self):
        pos = tuple(float(v) for v in self.position)
        if not all(math.isfinite(v) for v in pos):
            raise ValueError("source position must be finite")
        object.__setattr__(self, "position", pos)
        if self.frequency <= 0:
            raise ValueError("source frequency must be positive")
        if self.amplitude < 0:
            raise ValueError("source amplitude must be non-negative")


@dataclass(frozen=True)
class SourceScene:
    """Collection of mutually incoherent monopole sources."""

    sources: tuple[Source, ...] = ()

    def __init__(self, sources=()):
        object.__setattr__(self, "sources", tuple(sources))

    def __add__(self, other: "SourceScene") -> "SourceScene":
        return SourceScene(self.sources + other.sources)

    def at_frequency(self, frequency: float) -> tuple[Source, ...]:
        return tuple(s for s in self.sources if s.frequency == frequency)

    def total_power(self) -> float:
        """Incoherent sum of source mean-square pressures (Pa^2)."""
        return float(sum(s.amplitude**2 for s in self.sources))


def make_ring_array(n_rings: int, mics_per_ring, radii) -> MicArray:
    """Concentric-ring planar array in the z=0 plane, centered at the origin.

    Ring k carries ``mics_per_ring[k]`` microphones evenly spaced on a circle
    of radius ``radii[k]``, starting on the +x axis. Weights are all 1.
    """
    mics_per_ring = tuple(int(c) for c in np.atleast_1d(mics_per_ring))
    radii = tuple(float(r) for r in np.atleast_1d(radii))
    if len(mics_per_ring) != n_rings or len(radii) != n_rings:
        raise ValueError("mics_per_ring and radii must have n_rings entries")
    if any(c <= 0 for c in mics_per_ring):
        raise ValueError("every ring needs a positive microphone count")
    if any(r <= 0 for r in radii):
        raise ValueError("ring radii must be positive")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("ring radii must be strictly increasing")
    positions = []
    for count, radius in zip(mics_per_ring, radii):
        angles = 2.0 * np.pi * np.arange(count) / count
        ring = np.stack(
            [radius * np.cos(angles), radius * np.sin(angles), np.zeros(count)], axis=1
        )
        positions.append(ring)
    return MicArray(np.concatenate(positions, axis=0), center=(0.0, 0.0, 0.0))


def default_array(radius: float = 1.0) -> MicArray:
    """41-microphone reference array: center mic plus 8/12/20 rings.

    Ring radii are 0.25, 0.55 and 1.0 times ``radius``.
    """
    if radius <= 0:
        raise ValueError("array radius must be positive")
    rings = make_ring_array(3, (8, 12, 20), (0.25 * radius, 0.55 * radius, radius))
    positions = np.concatenate([np.zeros((1, 3)), rings.positions], axis=0)
    return MicArray(positions, center=(0.0, 0.0, 0.0))


def make_scan_grid(center, width: float, height: float, n_intervals: int) -> ScanGrid:
    """Axis-aligned vertical scan plane centered at ``center``.

    The plane spans x (columns) and y (rows) at the z of ``center``.
    Spacing is ``width / n_intervals``; a square extent therefore yields
    ``(n_intervals + 1)**2`` points.
    """
    if width <= 0 or height <= 0:
        raise ValueError("grid width and height must be positive")
    if n_intervals <= 0:
        raise ValueError("n_intervals must be positive")
    center = _as_float_array(center, "grid center").reshape(3)
    dx = width / n_intervals
    n_cols = n_intervals + 1
    n_rows = int(round(height / dx)) + 1
    origin = center - (width / 2.0) * np.array([1.0, 0.0, 0.0]) - (height / 2.0) * np.array([0.0, 1.0, 0.0])
    return ScanGrid(origin, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), dx, n_cols, n_rows)


def nearest_grid_index(grid: ScanGrid, point) -> int:
    """1-based index of the grid point nearest to ``point``.

    Ties break toward the lower index. Points farther than one grid spacing
    from the grid's bounding rectangle are rejected.
    """
    point = _as_float_array(point, "query point").reshape(3)
    rel = point - grid.origin
    s = float(rel @ grid.axis_u)
    t = float(rel @ grid.axis_v)
    s_c = min(max(s, 0.0), (grid.n_cols - 1) * grid.dx)
    t_c = min(max(t, 0.0), (grid.n_rows - 1) * grid.dx)
    closest = grid.origin + s_c * grid.axis_u + t_c * grid.axis_v
    if np.linalg.norm(point - closest) > grid.dx * (1.0 + 1e-12):
        raise ValueError("point lies farther than one grid spacing from the grid")
    d2 = ((grid.points() - point[None, :]) ** 2).sum(axis=1)
    return int(np.argmin(d2)) + 1


def save_mic_array(array: MicArray, path) -> None:
    """Write an array as a plain-text table: one ``x y z weight`` line per mic."""
    lines = ["# x_m y_m z_m weight"]
    for pos, w in zip(array.positions, array.weights):
        lines.append(f"{pos[0]!r} {pos[1]!r} {pos[2]!r} {w!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_mic_array(path) -> MicArray:
    """Read a plain-text mic table (``x y z weight`` per line, ``#`` comments).

    The weight column is optional and defaults to 1. The array center is the
    centroid of the positions.
    """
    positions = []
    weights = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 4):
            raise ValueError(f"{path}:{lineno}: expected 'x y z [weight]', got {raw!r}")
        positions.append([float(v) for v in parts[:3]])
        weights.append(float(parts[3]) if len(parts) == 4 else 1.0)
    if not positions:
        raise ValueError(f"{path}: no microphones found")
    return MicArray(positions, weights=weights)
