"""World description, protocol state and a vectorised evaluator for the metric.

``NetworkState`` holds, for one (channel, power) assignment, the link table and
the node-by-link interference incidence matrix. From those it derives every
node's metric on every candidate channel in one pass, and supports cheap
incremental channel changes. The per-node reference functions in
:mod:`mtmnet.radio` and :mod:`mtmnet.metric` compute the same quantities
one node at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, ParameterError
from .radio import RANGE_RTOL, LinkTable, RadioParams, distance_matrix, link_qualities, links_from, ranges_for
from .topology import Topology


@dataclass(frozen=True, eq=False)
class ChannelAssignment:
    """Per-node channel index and transmit power (watts)."""

    channel: np.ndarray
    power: np.ndarray
    epoch: int = 0

    def __post_init__(self):
        ch = np.asarray(self.channel, dtype=int).copy()
        pw = np.asarray(self.power, dtype=float).copy()
        if ch.shape != pw.shape:
            raise ParameterError("channel and power vectors differ in length")
        ch.setflags(write=False)
        pw.setflags(write=False)
        object.__setattr__(self, "channel", ch)
        object.__setattr__(self, "power", pw)

    def __len__(self):
        return len(self.channel)

    def with_node(self, i: int, channel: Optional[int] = None, power: Optional[float] = None) -> "ChannelAssignment":
        ch, pw = self.channel.copy(), self.power.copy()
        if channel is not None:
            ch[i] = channel
        if power is not None:
            pw[i] = power
        return ChannelAssignment(ch, pw, self.epoch)

    def same(self, other: "ChannelAssignment") -> bool:
        return np.array_equal(self.channel, other.channel) and np.array_equal(self.power, other.power)

    @classmethod
    def uniform(cls, n: int, channel: int = 0, power: float = 1.0) -> "ChannelAssignment":
        return cls(np.full(n, channel, dtype=int), np.full(n, power, dtype=float))


@dataclass(frozen=True, eq=False)
class World:
    """Everything the protocol needs that does not change while it runs.

    ``rates`` is the per-channel normalised rate used by the metric and
    ``weights`` the per-node priority weight; both default to 1.
    """

    topology: Topology
    radio: RadioParams = field(default_factory=RadioParams)
    rates: Optional[Sequence[float]] = None
    weights: Optional[Sequence[float]] = None

    def __post_init__(self):
        L, n = self.radio.channel_count, self.topology.node_count
        rates = np.ones(L) if self.rates is None else np.asarray(self.rates, dtype=float)
        if rates.shape != (L,) or np.any(rates <= 0) or np.any(rates > 1):
            raise ConfigurationError(f"rates need {L} entries in (0, 1]")
        weights = np.ones(n) if self.weights is None else np.asarray(self.weights, dtype=float)
        if weights.shape != (n,) or np.any(weights < 0):
            raise ConfigurationError(f"weights need {n} non-negative entries")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.topology.node_count

    @property
    def positions(self) -> np.ndarray:
        return self.topology.positions

    @cached_property
    def dist(self) -> np.ndarray:
        return distance_matrix(self.topology.positions)

    @cached_property
    def channel_weight(self) -> np.ndarray:
        """r * RT * F per channel."""
        return self.rates * np.asarray(self.radio.rt_table) * np.asarray(self.radio.f_table)

    @cached_property
    def level_ranges(self) -> np.ndarray:
        return ranges_for(self.radio.power_levels, self.radio)

    @cached_property
    def interferer_counts(self) -> np.ndarray:
        """``[i, k]`` = other nodes inside node i's interference disc at power level k."""
        radii = self.radio.interference_range_factor * self.level_ranges * (1 + RANGE_RTOL)
        d = self.dist.copy()
        np.fill_diagonal(d, np.inf)
        return (d[:, :, None] <= radii[None, None, :]).sum(axis=1)

    @cached_property
    def nearest_distance(self) -> np.ndarray:
        d = self.dist.copy()
        np.fill_diagonal(d, np.inf)
        return d.min(axis=1) if self.n > 1 else np.full(self.n, np.inf)

    def level_of(self, powers) -> np.ndarray:
        levels = np.asarray(self.radio.power_levels)
        idx = np.searchsorted(levels, np.asarray(powers, dtype=float) * (1 - 1e-12))
        if np.any(idx >= len(levels)) or not np.allclose(levels[np.minimum(idx, len(levels) - 1)], powers, rtol=1e-12, atol=0):
            raise ParameterError("power outside the configured levels")
        return idx

    def interference_radius(self, powers) -> np.ndarray:
        return self.radio.interference_range_factor * ranges_for(powers, self.radio)


class NetworkState:
    """Link table, interference incidence and per-channel metric aggregates for one assignment."""

    def __init__(self, world: World, assignment: ChannelAssignment):
        self.world = world
        self.channel = np.array(assignment.channel, dtype=int)
        self.power = np.array(assignment.power, dtype=float)
        self._build()

    def _build(self):
        w, L = self.world, self.world.radio.channel_count
        self.links: LinkTable = links_from(w.dist, self.power, self.channel, w.radio)
        src, dst = self.links.src, self.links.dst
        m = len(src)
        self.q = link_qualities(self.links.length, w.radio)
        self.radius = w.interference_radius(self.power)
        near = w.dist <= (self.radius * (1 + RANGE_RTOL))[:, None]
        inview = near[:, src] | near[:, dst]
        cols = np.arange(m)
        inview[src, cols] = False
        inview[dst, cols] = False
        self.inview = inview.astype(float)
        self.outdeg = np.bincount(src, minlength=w.n)
        # links grouped by sender, for incremental channel moves
        self._first = np.searchsorted(src, np.arange(w.n + 1))
        onehot = np.zeros((m, L))
        ok = self.channel[src] >= 0
        onehot[cols[ok], self.channel[src][ok]] = 1.0
        self.local = self.inview @ onehot
        self.sq = self.inview @ (onehot * self.q[:, None])
        self.totals = onehot.sum(axis=0)

    def assignment(self, epoch: int = 0) -> ChannelAssignment:
        return ChannelAssignment(self.channel, self.power, epoch)

    def set_channel(self, i: int, c: int):
        """Move node ``i`` to channel ``c`` (``-1`` means unassigned) and patch the aggregates."""
        old = self.channel[i]
        if old == c:
            return
        a, b = self._first[i], self._first[i + 1]
        if b > a:
            cnt = self.inview[:, a:b].sum(axis=1)
            qs = self.inview[:, a:b] @ self.q[a:b]
            if old >= 0:
                self.local[:, old] -= cnt
                self.sq[:, old] -= qs
                self.totals[old] -= b - a
            if c >= 0:
                self.local[:, c] += cnt
                self.sq[:, c] += qs
                self.totals[c] += b - a
        self.channel[i] = c
        self.links.channel[a:b] = c

    def set_power(self, i: int, p: float):
        self.set_powers({i: p})

    def set_powers(self, changes: dict):
        for i, p in changes.items():
            self.power[i] = p
        self._build()

    def _terms(self, local, sq, totals):
        w = self.world.channel_weight
        with np.errstate(divide="ignore", invalid="ignore"):
            cf = np.maximum(1.0, totals / local)
            val = np.where(local > 0, w * sq / cf, 0.0)
        return val

    def per_channel(self, i: int) -> np.ndarray:
        """Node ``i``'s metric on every channel, in the current assignment."""
        return self._terms(self.local[i], self.sq[i], self.totals)

    def channel_costs(self) -> np.ndarray:
        """``[i, c]`` = node i's own-channel metric if it alone moved to channel c."""
        n = self.world.n
        L = self.world.radio.channel_count
        moved = np.ones((n, L), dtype=bool)
        on = self.channel >= 0
        moved[np.flatnonzero(on), self.channel[on]] = False
        totals = self.totals[None, :] + self.outdeg[:, None] * moved
        return self._terms(self.local, self.sq, totals)

    def operating(self) -> np.ndarray:
        """Each node's metric on the channel it currently uses."""
        out = np.zeros(self.world.n)
        on = np.flatnonzero(self.channel >= 0)
        if len(on):
            costs = self._terms(self.local[on], self.sq[on], self.totals[None, :])
            out[on] = costs[np.arange(len(on)), self.channel[on]]
        return out

    def overloaded(self) -> bool:
        """Some channel holds more than its fair share of the nodes in someone's interference disc."""
        L = self.world.radio.channel_count
        near = self.world.dist <= (self.radius * (1 + RANGE_RTOL))[:, None]
        onehot = np.zeros((self.world.n, L))
        on = self.channel >= 0
        onehot[np.flatnonzero(on), self.channel[on]] = 1.0
        counts = near.astype(float) @ onehot
        fair = np.ceil(near.sum(axis=1) / L)
        return bool(np.any(counts > fair[:, None]))

    def contenders(self) -> np.ndarray:
        """Per link: distinct co-channel transmitters (other than the receiver) in the sender's view."""
        n, src, dst = self.world.n, self.links.src, self.links.dst
        m = len(src)
        if m == 0:
            return np.zeros(0, dtype=int)
        sender = np.zeros((m, n))
        sender[np.arange(m), src] = 1.0
        heard = (self.inview @ sender) > 0
        same = self.channel[:, None] == self.channel[None, :]
        mask = heard & same
        return mask[src].sum(axis=1) - mask[src, dst]
