"""Scenario geometry: the seven-cell layout, the cross lattice and node placement.

Coordinates are meters in a frame centred on the base station of cell 1.
The terrain is the square ``[-side/2, side/2]^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigurationError, UnknownNodeError

CENTER_CELL = 1
# relative tolerance for declaring two base-station distances equal
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Cell:
    id: int
    center: Tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError(f"cell {self.id}: radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class TerrainConfig:
    side_length: float = 10_000.0
    cell_radius: float = 1_500.0
    node_count: int = 200
    spacing_D: float = 500.0
    seed: int = 0
    # cross scenario only; defaults to half the terrain side
    arm_length: Optional[float] = None

    def __post_init__(self):
        if not self.side_length > 0:
            raise ConfigurationError("side_length must be positive")
        if not self.cell_radius > 0:
            raise ConfigurationError("cell_radius must be positive")
        if int(self.node_count) < 1:
            raise ConfigurationError("node_count must be at least 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")

    @property
    def arm(self) -> float:
        return self.side_length / 2 if self.arm_length is None else self.arm_length


@dataclass(frozen=True, eq=False)
class Topology:
    """Immutable snapshot of cells, base stations and node positions.

    ``positions[k]`` is the location of node ``k``; ``association[k]`` the id of
    the cell whose base station is nearest to it.
    """

    cells: Tuple[Cell, ...]
    positions: np.ndarray
    association: np.ndarray
    side_length: float
    spacing_D: float = 0.0
    kind: str = "terrain"
    _ids: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.cells:
            raise ConfigurationError("topology needs at least one cell")
        object.__setattr__(self, "_ids", np.array([c.id for c in self.cells]))
        self.positions.setflags(write=False)
        self.association.setflags(write=False)

    @property
    def node_count(self) -> int:
        return len(self.positions)

    @property
    def base_stations(self) -> np.ndarray:
        return np.array([c.center for c in self.cells], dtype=float)

    @property
    def cell_ids(self) -> np.ndarray:
        return self._ids

    def cell(self, cell_id: int) -> Cell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise UnknownNodeError(f"no cell with id {cell_id}")

    def position(self, node: int) -> np.ndarray:
        if not 0 <= node < self.node_count:
            raise UnknownNodeError(f"node {node} not in topology of {self.node_count} nodes")
        return self.positions[node]

    def members(self, cell_id: int) -> np.ndarray:
        return np.flatnonzero(self.association == cell_id)

    def same(self, other: "Topology") -> bool:
        return (
            self.kind == other.kind
            and self.cells == other.cells
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.association, other.association)
        )


def seven_cell_layout(radius: float) -> Tuple[Cell, ...]:
    """Hexagonal flower: cell 1 at the origin, cells 2..7 on a ring of radius sqrt(3)*r."""
    ring = 2 * radius * math.cos(math.pi / 6)
    cells = [Cell(CENTER_CELL, (0.0, 0.0), radius)]
    for k in range(6):
        a = k * math.pi / 3
        cells.append(Cell(CENTER_CELL + 1 + k, (ring * math.cos(a), ring * math.sin(a)), radius))
    return tuple(cells)


def nearest_cells(points: np.ndarray, cells: Tuple[Cell, ...]) -> np.ndarray:
    """Hard-handoff association: nearest base station, lowest cell id on ties."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    order = sorted(cells, key=lambda c: c.id)
    centers = np.array([c.center for c in order])
    ids = np.array([c.id for c in order])
    if len(points) == 0:
        return np.zeros(0, dtype=int)
    d = np.hypot(points[:, None, 0] - centers[None, :, 0], points[:, None, 1] - centers[None, :, 1])
    dmin = d.min(axis=1, keepdims=True)
    tied = d <= dmin * (1 + _TIE_RTOL) + 1e-12
    return ids[np.argmax(tied, axis=1)]


def _check_inside(points: np.ndarray, side: float):
    if len(points) and np.abs(points).max() > side / 2 + 1e-9:
        raise ConfigurationError("scenario does not fit inside the terrain square")


def build_cross_scenario(config: TerrainConfig) -> Topology:
    """Nodes every ``spacing_D`` meters along four arms through cell 1's base station."""
    D = config.spacing_D
    if not D > 0:
        raise ConfigurationError(f"spacing_D must be positive, got {D}")
    arm = config.arm
    if arm < 0 or arm > config.side_length / 2:
        raise ConfigurationError("cross arms must fit inside the terrain")
    cells = seven_cell_layout(config.cell_radius)
    # guard against 3000/1000 evaluating to 2.9999...
    per_arm = int(math.floor(arm / D + 1e-9))
    offsets = D * np.arange(1, per_arm + 1, dtype=float)
    pts = []
    for dx, dy in ((1, 0), (0, 1), (-1, 0), (0, -1)):
        pts.extend((dx * o, dy * o) for o in offsets)
    positions = np.array(pts, dtype=float).reshape(-1, 2)
    _check_inside(positions, config.side_length)
    return Topology(
        cells=cells,
        positions=positions,
        association=nearest_cells(positions, cells),
        side_length=config.side_length,
        spacing_D=D,
        kind="cross",
    )


def sample_union(cells: Tuple[Cell, ...], count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform points over the union of the cell discs (rejection from the bounding box)."""
    centers = np.array([c.center for c in cells])
    radii = np.array([c.radius for c in cells])
    lo = (centers - radii[:, None]).min(axis=0)
    hi = (centers + radii[:, None]).max(axis=0)
    out = np.empty((0, 2))
    while len(out) < count:
        batch = rng.uniform(lo, hi, size=(max(2 * (count - len(out)), 16), 2))
        d2 = ((batch[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        keep = (d2 <= radii[None, :] ** 2).any(axis=1)
        out = np.vstack([out, batch[keep]])
    return out[:count]


def build_terrain_scenario(config: TerrainConfig, cells: Optional[Tuple[Cell, ...]] = None) -> Topology:
    """Seeded uniform placement of ``node_count`` hosts over the seven-cell union."""
    if cells is None:
        cells = seven_cell_layout(config.cell_radius)
    if not cells:
        raise ConfigurationError("terrain scenario needs at least one cell")
    rng = np.random.default_rng(int(config.seed))
    positions = sample_union(tuple(cells), int(config.node_count), rng)
    _check_inside(positions, config.side_length)
    return Topology(
        cells=tuple(cells),
        positions=positions,
        association=nearest_cells(positions, cells),
        side_length=config.side_length,
        spacing_D=config.spacing_D,
        kind="terrain",
    )


def from_points(
    positions, cells: Optional[Tuple[Cell, ...]] = None, side_length: Optional[float] = None
) -> Topology:
    """Topology over explicit node positions (hand-built and test instances).

    Defaults to the seven-cell layout at the reference cell radius and a
    terrain square just large enough to hold the points.
    """
    positions = np.array(positions, dtype=float).reshape(-1, 2)
    if cells is None:
        cells = seven_cell_layout(TerrainConfig.cell_radius)
    if side_length is None:
        side_length = max(TerrainConfig.side_length, 2 * float(np.abs(positions).max(initial=0.0)))
    _check_inside(positions, side_length)
    return Topology(
        cells=tuple(cells),
        positions=positions,
        association=nearest_cells(positions, cells),
        side_length=float(side_length),
    )


def associate(node: int, topology: Topology) -> int:
    p = topology.position(node)
    return int(nearest_cells(p, topology.cells)[0])


def advance_mobility(topology: Topology, seed: int) -> Topology:
    """Next mobility snapshot.

    Terrain hosts are redrawn independently over the cell union and re-associated,
    which is where hard handoffs happen. The cross lattice is fixed by construction
    and is returned unchanged.
    """
    if topology.kind == "cross":
        return topology
    rng = np.random.default_rng(int(seed))
    positions = sample_union(topology.cells, topology.node_count, rng)
    return replace(topology, positions=positions, association=nearest_cells(positions, topology.cells))


def area_shares(cells: Tuple[Cell, ...], resolution: int = 1200) -> dict:
    """Fraction of the union area nearest to each base station, by midpoint-grid quadrature."""
    centers = np.array([c.center for c in cells])
    radii = np.array([c.radius for c in cells])
    lo = (centers - radii[:, None]).min(axis=0)
    hi = (centers + radii[:, None]).max(axis=0)
    xs = lo[0] + (np.arange(resolution) + 0.5) * (hi[0] - lo[0]) / resolution
    ys = lo[1] + (np.arange(resolution) + 0.5) * (hi[1] - lo[1]) / resolution
    counts = dict.fromkeys((c.id for c in cells), 0)
    for y in ys:
        row = np.column_stack([xs, np.full_like(xs, y)])
        d2 = ((row[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        inside = (d2 <= radii[None, :] ** 2).any(axis=1)
        ids, n = np.unique(nearest_cells(row[inside], cells), return_counts=True)
        for i, k in zip(ids, n):
            counts[int(i)] += int(k)
    total = sum(counts.values())
    return {k: v / total for k, v in counts.items()}
