"""Disc propagation model, link sets, interference views and Boolean-model connectivity.

A link is an ordered pair ``(src, dst)``; every undirected neighbour pair shows
up in both directions. A directed link transmits on its sender's channel, which
is what "co-channel link" means throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import ConfigurationError, ParameterError

# boundary-inclusive comparisons tolerate this much relative round-off
RANGE_RTOL = 1e-12


@dataclass(frozen=True)
class RadioParams:
    comm_range_at_max_power: float = 1_000.0
    interference_range_factor: float = 2.0
    power_levels: Tuple[float, ...] = (0.0625, 0.125, 0.25, 0.5, 1.0)
    channel_count: int = 8
    rt_table: Optional[Tuple[float, ...]] = None
    f_table: Optional[Tuple[float, ...]] = None
    path_loss_exponent: float = 2.0
    q_floor: float = 0.05

    def __post_init__(self):
        if not self.comm_range_at_max_power > 0:
            raise ConfigurationError("comm_range_at_max_power must be positive")
        if not self.interference_range_factor >= 1:
            raise ConfigurationError("interference_range_factor must be >= 1")
        if int(self.channel_count) < 1:
            raise ConfigurationError("channel_count must be >= 1")
        levels = tuple(float(p) for p in self.power_levels)
        if not levels or levels[0] <= 0 or any(b <= a for a, b in zip(levels, levels[1:])):
            raise ConfigurationError("power_levels must be positive and strictly increasing")
        object.__setattr__(self, "power_levels", levels)
        for name in ("rt_table", "f_table"):
            table = getattr(self, name)
            if table is None:
                table = (1.0,) * self.channel_count
            table = tuple(float(v) for v in table)
            if len(table) != self.channel_count or any(not v > 0 for v in table):
                raise ConfigurationError(f"{name} needs {self.channel_count} positive entries")
            object.__setattr__(self, name, table)
        if not self.path_loss_exponent > 0:
            raise ConfigurationError("path_loss_exponent must be positive")
        if not 0 < self.q_floor <= 1:
            raise ConfigurationError("q_floor must lie in (0, 1]")

    @property
    def max_power(self) -> float:
        return self.power_levels[-1]

    @property
    def min_power(self) -> float:
        return self.power_levels[0]

    def level_index(self, power: float) -> int:
        for k, p in enumerate(self.power_levels):
            if math.isclose(power, p, rel_tol=1e-12, abs_tol=0.0):
                return k
        raise ParameterError(f"{power} W is not a configured power level {self.power_levels}")


@dataclass(frozen=True, order=True)
class Link:
    src: int
    dst: int
    length: float = field(compare=False)
    channel: int = field(default=-1, compare=False)

    def __post_init__(self):
        if self.src == self.dst:
            raise ParameterError("link endpoints must differ")

    @property
    def endpoints(self) -> Tuple[int, int]:
        return (self.src, self.dst)


@dataclass(frozen=True, eq=False)
class LinkTable:
    """Directed links as parallel arrays, sorted by ``(src, dst)``."""

    src: np.ndarray
    dst: np.ndarray
    length: np.ndarray
    channel: np.ndarray

    def __len__(self) -> int:
        return len(self.src)

    def __iter__(self) -> Iterator[Link]:
        for s, d, ln, c in zip(self.src, self.dst, self.length, self.channel):
            yield Link(int(s), int(d), float(ln), int(c))

    def pairs(self) -> set:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def neighbors(self, node: int) -> np.ndarray:
        return self.dst[self.src == node]

    def count_on(self, channel: int) -> int:
        return int(np.count_nonzero(self.channel == channel))

    @classmethod
    def empty(cls) -> "LinkTable":
        z = np.zeros(0, dtype=int)
        return cls(z, z.copy(), np.zeros(0), z.copy())


@dataclass(frozen=True)
class InterferenceView:
    node: int
    per_channel: Dict[int, Tuple[Link, ...]]

    def links_on(self, channel: int) -> Tuple[Link, ...]:
        return self.per_channel.get(channel, ())

    def size(self) -> int:
        return sum(len(v) for v in self.per_channel.values())


def ranges_for(powers, params: RadioParams) -> np.ndarray:
    """Vectorised communication range; callers are expected to pass configured levels."""
    p = np.asarray(powers, dtype=float)
    return params.comm_range_at_max_power * (p / params.max_power) ** (1.0 / params.path_loss_exponent)


def communication_range(power: float, params: RadioParams) -> float:
    params.level_index(power)
    return float(ranges_for(power, params))


def interference_range(power: float, params: RadioParams) -> float:
    return params.interference_range_factor * communication_range(power, params)


def distance_matrix(positions: np.ndarray) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def links_from(dist: np.ndarray, powers: np.ndarray, channels: np.ndarray, params: RadioParams) -> LinkTable:
    """Link table from a precomputed distance matrix."""
    r = ranges_for(powers, params)
    reach = np.minimum(r[:, None], r[None, :]) * (1 + RANGE_RTOL)
    adj = dist <= reach
    np.fill_diagonal(adj, False)
    src, dst = np.nonzero(adj)
    return LinkTable(src, dst, dist[src, dst], np.asarray(channels)[src])


def build_links(topology, assignment, params: RadioParams) -> LinkTable:
    """Symmetric link set: ``u~v`` iff their distance is within both endpoints' ranges."""
    dist = distance_matrix(topology.positions)
    return links_from(dist, np.asarray(assignment.power, dtype=float), np.asarray(assignment.channel), params)


def interference_view(i: int, links: LinkTable, assignment, params: RadioParams, topology) -> InterferenceView:
    """Co-channel links with an endpoint inside node ``i``'s interference disc, grouped by channel.

    Links incident to ``i`` are left out; they are the node's own transmissions.
    """
    pos = topology.positions
    radius = interference_range(float(assignment.power[i]), params) * (1 + RANGE_RTOL)
    d = np.hypot(pos[:, 0] - pos[i, 0], pos[:, 1] - pos[i, 1])
    near = d <= radius
    keep = (near[links.src] | near[links.dst]) & (links.src != i) & (links.dst != i)
    per_channel: Dict[int, Tuple[Link, ...]] = {c: () for c in range(params.channel_count)}
    idx = np.flatnonzero(keep)
    for c in range(params.channel_count):
        sel = idx[links.channel[idx] == c]
        per_channel[c] = tuple(
            Link(int(links.src[k]), int(links.dst[k]), float(links.length[k]), c) for k in sel
        )
    return InterferenceView(i, per_channel)


def link_quality(link, params: RadioParams) -> float:
    """Linear distance proxy for link quality, floored at ``params.q_floor``."""
    length = link.length if isinstance(link, Link) else float(link)
    q = 1.0 - length / params.comm_range_at_max_power
    return float(min(1.0, max(params.q_floor, q)))


def link_qualities(lengths: np.ndarray, params: RadioParams) -> np.ndarray:
    return np.clip(1.0 - np.asarray(lengths) / params.comm_range_at_max_power, params.q_floor, 1.0)


def channel_reuse_factor(c: int, i: int, links: LinkTable, view: InterferenceView) -> float:
    """Network-wide co-channel link count over the count inside ``i``'s view (at least 1)."""
    total = links.count_on(c)
    local = len(view.links_on(c))
    if local == 0:
        return float(max(1, total))
    return max(1.0, total / local)


@dataclass(frozen=True)
class Connectivity:
    connected: bool
    component_count: int
    giant_fraction: float

    def __iter__(self):
        return iter((self.connected, self.component_count, self.giant_fraction))


def poisson_boolean_connected(topology, radius: float) -> Connectivity:
    """Boolean model: every node carries a disc of ``radius``; overlapping discs connect."""
    if radius < 0:
        raise ParameterError("radius must be non-negative")
    pos = topology.positions if hasattr(topology, "positions") else np.asarray(topology, dtype=float)
    n = len(pos)
    if n == 0:
        return Connectivity(True, 0, 0.0)
    pairs = cKDTree(pos).query_pairs(2 * radius * (1 + RANGE_RTOL), output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    count, labels = connected_components(graph, directed=False)
    giant = np.bincount(labels).max() / n
    return Connectivity(count == 1, int(count), float(giant))
