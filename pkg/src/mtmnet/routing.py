"""Location-aided multipath routing, fractional flow splitting and the permitted-hops probe.

Route discovery is a hop-count k-shortest-simple-path search with a geographic
progress rule: a route may only step to a node that is closer to the
destination than the node two hops back. Capacity of a directed link is the
nominal channel capacity shared among the co-channel transmitters its sender
hears.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import ConfigurationError, UnroutableError
from .network import ChannelAssignment, NetworkState, World

Capacities = Mapping[Tuple[int, int], float]


@dataclass(frozen=True)
class RoutingParams:
    k: int = 3
    pair_count: int = 10
    nominal_capacity: float = 1_000.0  # Mb/s per channel
    # Yen candidates examined per pair before giving up on the progress rule
    max_candidates: int = 12

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError("k must be >= 1")
        if self.pair_count < 1:
            raise ConfigurationError("pair_count must be >= 1")
        if not self.nominal_capacity > 0:
            raise ConfigurationError("nominal_capacity must be positive")
        if self.max_candidates < self.k:
            raise ConfigurationError("max_candidates must be >= k")


@dataclass(frozen=True)
class Route:
    hops: Tuple[int, ...]

    def __post_init__(self):
        if len(self.hops) < 2:
            raise ValueError("a route needs at least two nodes")
        if len(set(self.hops)) != len(self.hops):
            raise ValueError(f"route {self.hops} revisits a node")

    @property
    def length_hops(self) -> int:
        return len(self.hops) - 1

    def links(self) -> List[Tuple[int, int]]:
        return list(zip(self.hops, self.hops[1:]))


@dataclass(frozen=True)
class FlowSplit:
    demand: float
    allocation: Tuple[Tuple[Route, float], ...]
    shortfall: float = 0.0

    @property
    def allocated(self) -> float:
        return math.fsum(a for _, a in self.allocation)


def link_graph(state: NetworkState) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(state.world.n))
    g.add_edges_from((int(u), int(v)) for u, v in zip(state.links.src, state.links.dst) if u < v)
    return g


def link_capacities(state: NetworkState, nominal: float) -> Dict[Tuple[int, int], float]:
    """``nominal / (1 + contenders)`` for every directed link."""
    cont = state.contenders()
    return {
        (int(u), int(v)): nominal / (1.0 + float(c))
        for u, v, c in zip(state.links.src, state.links.dst, cont)
    }


def _progress_ok(path: Sequence[int], dst: int, pos: np.ndarray) -> bool:
    target = pos[dst]
    d = np.hypot(*(pos[list(path)] - target).T)
    return all(d[t] < d[t - 2] for t in range(2, len(path)))


def discover_routes(
    src: int,
    dst: int,
    graph: nx.Graph,
    positions: np.ndarray,
    k: int = 3,
    max_candidates: int = 12,
) -> List[Route]:
    """Up to ``k`` loop-free routes, fewest hops first.

    Candidates come from Yen's algorithm in hop order; those breaking the
    progress rule are skipped. If none of the first ``max_candidates`` pass,
    the plain shortest route is returned so reachability is never lost.
    """
    if src == dst:
        raise ValueError("source and destination must differ")
    if k < 1:
        raise ValueError("k must be >= 1")
    if src not in graph or dst not in graph or not nx.has_path(graph, src, dst):
        return []
    routes, first = [], None
    for path in itertools.islice(nx.shortest_simple_paths(graph, src, dst), max_candidates):
        if first is None:
            first = path
        if _progress_ok(path, dst, positions):
            routes.append(Route(tuple(int(x) for x in path)))
            if len(routes) == k:
                break
    if not routes:
        routes = [Route(tuple(int(x) for x in first))]
    return routes


def split_flow(demand: float, routes: Sequence[Route], capacities: Capacities) -> FlowSplit:
    """Fill routes in order, each up to its bottleneck residual capacity.

    Routes sharing a link see the capacity already consumed by earlier routes.
    Whatever does not fit is returned as ``shortfall``.
    """
    if demand < 0:
        raise ValueError("demand must be non-negative")
    if demand == 0:
        return FlowSplit(0.0, ())
    if not routes:
        raise UnroutableError("positive demand with no route")
    residual = dict(capacities)
    remaining = float(demand)
    allocation = []
    for route in routes:
        if remaining <= 0:
            break
        hops = route.links()
        take = min(remaining, min(residual.get(h, 0.0) for h in hops))
        if take <= 0:
            continue
        for h in hops:
            residual[h] -= take
        allocation.append((route, take))
        remaining -= take
    # keep the invariant allocation + shortfall == demand exact
    shortfall = 0.0 if remaining <= 1e-12 * demand else demand - math.fsum(a for _, a in allocation)
    return FlowSplit(float(demand), tuple(allocation), shortfall)


class RouteBook:
    """Routes, hop distances and capacities for one scheduled network, with per-pair route caching."""

    def __init__(self, world: World, assignment: ChannelAssignment, params: RoutingParams = RoutingParams()):
        self.world = world
        self.params = params
        self.state = NetworkState(world, assignment)
        self.graph = link_graph(self.state)
        self.capacity = link_capacities(self.state, params.nominal_capacity)
        self._routes: Dict[Tuple[int, int], List[Route]] = {}
        self._hops: Optional[Dict[int, Dict[int, int]]] = None

    def routes(self, src: int, dst: int) -> List[Route]:
        key = (src, dst)
        if key not in self._routes:
            self._routes[key] = discover_routes(
                src, dst, self.graph, self.world.positions, self.params.k, self.params.max_candidates
            )
        return self._routes[key]

    @property
    def hop_distance(self) -> Dict[int, Dict[int, int]]:
        if self._hops is None:
            self._hops = {s: d for s, d in nx.all_pairs_shortest_path_length(self.graph)}
        return self._hops

    def pairs_at(self, h: int) -> List[Tuple[int, int]]:
        return sorted((s, d) for s, row in self.hop_distance.items() for d, x in row.items() if x == h)

    def diameter(self) -> int:
        return max((x for row in self.hop_distance.values() for x in row.values()), default=0)

    def split(self, src: int, dst: int, demand: float) -> FlowSplit:
        routes = self.routes(src, dst)
        if demand > 0 and not routes:
            return FlowSplit(float(demand), (), float(demand))
        return split_flow(demand, routes, self.capacity)


def _pair_rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), 0x484F50, int(tag)]))


def sample_pairs(pairs: Sequence[Tuple[int, int]], count: int, rng: np.random.Generator) -> List[Tuple[int, int]]:
    if len(pairs) <= count:
        return list(pairs)
    idx = np.sort(rng.choice(len(pairs), size=count, replace=False))
    return [pairs[i] for i in idx]


def hop_passes(book: RouteBook, h: int, load: float, seed: int) -> Optional[bool]:
    """Whether every sampled pair at hop distance ``h`` carries ``load``; ``None`` if no such pair."""
    pairs = book.pairs_at(h)
    if not pairs:
        return None
    chosen = sample_pairs(pairs, book.params.pair_count, _pair_rng(seed, h))
    tol = 1e-9 * max(1.0, load)
    return all(book.split(s, d, load).allocated >= load - tol for s, d in chosen)


def max_permitted_hops(
    world: World,
    assignment: ChannelAssignment,
    load: float,
    params: RoutingParams = RoutingParams(),
    seed: int = 0,
    book: Optional[RouteBook] = None,
) -> int:
    """Largest hop distance at which all sampled pairs still carry ``load`` end to end.

    An unloaded network reports 1, and so does one where not even single-hop
    pairs can carry the load.
    """
    if load < 0:
        raise ValueError("load must be non-negative")
    if load == 0:
        return 1
    book = book or RouteBook(world, assignment, params)
    best = 1
    for h in range(1, book.diameter() + 1):
        if hop_passes(book, h, load, seed):
            best = h
    return best
