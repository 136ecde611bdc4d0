"""Distributed cross-layer channel and power scheduling.

The protocol runs in synchronised rounds over one :class:`World`:

* round 0 (``init``): nodes draw priorities ``Prand * W`` and are assigned a
  channel in priority order. A node linked to an already assigned node of a
  neighbouring cell inherits that node's channel; otherwise it takes the
  channel with the lowest metric (or a seeded uniform channel when the metric
  is disabled). While some channel is overloaded or some node could still
  lower its metric by switching, adjustment rounds follow.
* ``channel`` rounds: each cell's clusterhead recovers its members, every
  eligible node proposes its best strictly improving channel, and the
  proposals are committed greedily under mutual exclusion of interference
  discs.
* ``power`` rounds: every node computes its best response to the current tax;
  nodes whose response is above their power propose to go up one level
  (powers only ratchet upward), the raises are committed under the same mutual exclusion,
  then the tax takes a projected subgradient step.

Termination: every node at maximum power with no raise in the last power
round ("max_power"), or a round pair with no channel commit, no improving
switch left, no power raise and a non-decreasing tax ("fixed_point").
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import ConfigurationError, DivergenceError, ParameterError, ProtocolError
from .network import ChannelAssignment, NetworkState, World
from .radio import RANGE_RTOL

log = logging.getLogger(__name__)

PHI = math.nan  # the empty priority

FIXED_POINT = "fixed_point"
MAX_POWER = "max_power"
DIVERGED = "diverged"


@dataclass(frozen=True)
class ScheduleLimits:
    max_rounds: int = 500
    power_tolerance: float = 1e-9
    tax_step: float = 0.05
    # tolerated mean number of interferers per node
    interference_cap: float = 35.0
    improvement_rtol: float = 1e-12
    # a node's k-th channel move is followed by 1..2**min(k, backoff_exponent) idle channel rounds
    backoff_exponent: int = 2

    def __post_init__(self):
        if int(self.max_rounds) < 1:
            raise ConfigurationError("max_rounds must be >= 1")
        if not self.tax_step > 0:
            raise ConfigurationError("tax_step must be positive")
        if not self.interference_cap >= 0:
            raise ConfigurationError("interference_cap must be non-negative")
        if not self.power_tolerance >= 0:
            raise ConfigurationError("power_tolerance must be non-negative")


@dataclass(frozen=True)
class Proposal:
    node: int
    new_channel: int
    new_power: float
    mtm_after: float


@dataclass(frozen=True)
class PowerProposal:
    node: int
    new_power: float
    gain: float


@dataclass(frozen=True)
class Commit:
    node: int
    channel: int
    power: float
    radius: float


@dataclass
class RoundRecord:
    index: int
    kind: str
    proposals: int
    committed: Tuple[Commit, ...]
    tax: float
    tax_next: float
    aggregate_interference: Optional[float]
    eligible: int
    power: Tuple[float, ...]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["committed"] = [asdict(c) for c in self.committed]
        return d


@dataclass
class ScheduleTrace:
    rounds: List[RoundRecord] = field(default_factory=list)
    termination: Optional[str] = None

    @property
    def rounds_used(self) -> int:
        return sum(1 for r in self.rounds if r.kind != "init")

    def of_kind(self, kind: str) -> List[RoundRecord]:
        return [r for r in self.rounds if r.kind == kind]

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            for r in self.rounds:
                fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
            fh.write(json.dumps({"termination": self.termination}) + "\n")


def prand(rng: np.random.Generator) -> float:
    """Uniform draw on (0, 1]."""
    return 1.0 - rng.random()


def elect_clusterheads(world: World, priorities: np.ndarray) -> Dict[int, int]:
    """Highest-priority member of each non-empty cell; lower node id wins ties."""
    heads = {}
    assoc = world.topology.association
    for cell in sorted(int(c) for c in world.topology.cell_ids):
        members = np.flatnonzero(assoc == cell)
        if len(members):
            heads[cell] = int(max(members, key=lambda j: (priorities[j], -j)))
    return heads


def clusterhead_recover(
    i: int, priorities: np.ndarray, world: World, rng: np.random.Generator, heads: Dict[int, int]
) -> Set[int]:
    """Recover the members of clusterhead ``i``'s cell.

    One fresh ``Prand`` draw is taken per member in ascending id order; member
    ``j`` is recovered when the draw is below ``W(j)`` and its priority is not
    empty, and then gets a new priority ``Prand(j) * W(j)`` (second draw).
    ``priorities`` is updated in place.
    """
    if heads.get(int(world.topology.association[i])) != i:
        raise ProtocolError(f"node {i} is not a clusterhead")
    cell = world.topology.association[i]
    members = [int(j) for j in np.flatnonzero(world.topology.association == cell) if j != i]
    recovered = set()
    for j in members:
        draw = prand(rng)
        if draw < world.weights[j] and not math.isnan(priorities[j]):
            priorities[j] = prand(rng) * world.weights[j]
            recovered.add(j)
    return recovered


def _improves(new: float, current: float, rtol: float) -> bool:
    return new < current * (1.0 - rtol)


def select_candidate(
    i: int,
    assignment: ChannelAssignment,
    world: World,
    powers: Optional[Sequence[float]] = None,
    rtol: float = 1e-12,
) -> Optional[Proposal]:
    """Best (channel, power) move for node ``i``, or ``None`` if nothing strictly lowers its metric.

    ``powers`` restricts the power levels considered (all levels by default).
    Ties go to the lower channel, then the lower power.
    """
    levels = world.radio.power_levels if powers is None else tuple(powers)
    current = NetworkState(world, assignment).operating()[i]
    candidates = []
    for p in levels:
        costs = NetworkState(world, assignment.with_node(i, power=p)).channel_costs()[i]
        candidates.extend((float(cost), c, float(p)) for c, cost in enumerate(costs))
    best = min(candidates, default=None)
    if best is None or not _improves(best[0], current, rtol):
        return None
    return Proposal(i, best[1], best[2], best[0])


def _conflict(world: World, a: int, ra: float, b: int, rb: float) -> bool:
    return world.dist[a, b] <= max(ra, rb) * (1 + RANGE_RTOL)


def _exclusive(ordered, world: World, assignment: ChannelAssignment, new_power) -> List[Tuple[object, float]]:
    seen = set()
    taken: List[Tuple[object, float]] = []
    for p in ordered:
        if p.node in seen:
            raise ParameterError(f"node {p.node} made more than one proposal")
        seen.add(p.node)
        radius = float(world.interference_radius(max(float(assignment.power[p.node]), new_power(p))))
        if all(not _conflict(world, p.node, radius, q.node, rq) for q, rq in taken):
            taken.append((p, radius))
    return taken


def negotiate(proposals: Iterable[Proposal], world: World, assignment: ChannelAssignment) -> List[Proposal]:
    """Commit proposals by ascending ``mtm_after`` (then node id) unless an earlier
    commit's interference disc contains the node, or the node's disc contains it."""
    ordered = sorted(proposals, key=lambda p: (p.mtm_after, p.node))
    return [p for p, _ in _exclusive(ordered, world, assignment, lambda p: p.new_power)]


def _gains(world: World) -> np.ndarray:
    R = world.radio.comm_range_at_max_power
    return 1.0 / (1.0 + (world.nearest_distance / R) ** 2)


def power_best_response(i: int, tax: float, assignment: ChannelAssignment, world: World) -> float:
    """Argmax over power levels of ``log(1 + p*g) - tax * interferers(p)``; lower power on ties."""
    if not math.isfinite(tax):
        raise ParameterError("tax must be finite")
    pos = world.positions
    others = [j for j in range(world.n) if j != i]
    d = [math.dist(pos[i], pos[j]) for j in others]
    g = 1.0 / (1.0 + (min(d) / world.radio.comm_range_at_max_power) ** 2) if d else 0.0
    best_p, best_u = None, -math.inf
    for p in world.radio.power_levels:
        reach = float(world.interference_radius(p)) * (1 + RANGE_RTOL)
        interferers = sum(1 for x in d if x <= reach)
        u = math.log1p(p * g) - tax * interferers
        if u > best_u:
            best_p, best_u = p, u
    return best_p


def update_tax(tax: float, aggregate_interference: float, cap: float, step: float) -> float:
    """Projected subgradient step on the interference price."""
    if not step > 0:
        raise ParameterError("step must be positive")
    if not cap >= 0:
        raise ParameterError("cap must be non-negative")
    return max(0.0, tax + step * (aggregate_interference - cap))


class _Protocol:
    def __init__(self, world: World, seed: int, use_mtm: bool, limits: ScheduleLimits):
        self.world = world
        self.use_mtm = use_mtm
        self.limits = limits
        self.rng = np.random.default_rng(int(seed))
        n = world.n
        self.prio0 = np.array([prand(self.rng) * world.weights[j] for j in range(n)])
        self.priorities = self.prio0.copy()
        self.heads = elect_clusterheads(world, self.prio0)
        start = ChannelAssignment(np.full(n, -1), np.full(n, world.radio.min_power))
        self.state = NetworkState(world, start)
        self.tax = 0.0
        self.trace = ScheduleTrace()
        self.channel_rounds = 0
        self.moves = np.zeros(n, dtype=int)
        self.backoff_until = np.zeros(n, dtype=int)
        self.levels = np.asarray(world.radio.power_levels)
        self.gain = _gains(world)

    # bookkeeping

    def _record(self, kind, proposals, commits, eligible, tax_next=None, agg=None):
        rec = RoundRecord(
            index=len(self.trace.rounds),
            kind=kind,
            proposals=proposals,
            committed=tuple(commits),
            tax=self.tax,
            tax_next=self.tax if tax_next is None else tax_next,
            aggregate_interference=agg,
            eligible=eligible,
            power=tuple(float(p) for p in self.state.power),
        )
        self.trace.rounds.append(rec)
        return rec

    def _check_budget(self):
        if self.trace.rounds_used >= self.limits.max_rounds:
            self.trace.termination = DIVERGED
            err = DivergenceError(
                f"no termination rule fired within {self.limits.max_rounds} rounds", self.trace
            )
            err.assignment = self.state.assignment(self.trace.rounds_used)
            raise err

    # round 0

    def init(self):
        w, st = self.world, self.state
        assoc = w.topology.association
        L = w.radio.channel_count
        for i in sorted(range(w.n), key=lambda j: (-self.prio0[j], j)):
            nbrs = st.links.neighbors(i)
            foreign = [int(j) for j in nbrs if assoc[j] != assoc[i] and st.channel[j] >= 0]
            if foreign:
                j = max(foreign, key=lambda k: (self.prio0[k], -k))
                st.set_channel(i, int(st.channel[j]))
            elif self.use_mtm:
                st.set_channel(i, int(np.argmin(st.channel_costs()[i])))
            else:
                st.set_channel(i, int(self.rng.integers(L)))
        self._record("init", 0, (), 0)
        if not self.use_mtm:
            return
        # adjust until no channel is overloaded and no node can improve by switching
        while st.overloaded() or not self.settled():
            self._check_budget()
            committed, _, _ = self.channel_round()
            # still overloaded but nobody can do better: a balanced split is out of reach
            if not committed and self.settled():
                break

    # rounds

    def channel_round(self):
        w, st = self.world, self.state
        t = self.channel_rounds
        self.channel_rounds += 1
        phi = {int(j) for j in np.flatnonzero(self.backoff_until > t)}
        for j in phi:
            self.priorities[j] = PHI
        recovered: Set[int] = set()
        for cell in sorted(self.heads):
            recovered |= clusterhead_recover(self.heads[cell], self.priorities, w, self.rng, self.heads)
        eligible = sorted((set(self.heads.values()) - phi) | recovered)
        costs = st.channel_costs()
        proposals = []
        for i in eligible:
            c = int(np.argmin(costs[i]))
            if _improves(costs[i, c], costs[i, st.channel[i]], self.limits.improvement_rtol):
                proposals.append(Proposal(i, c, float(st.power[i]), float(costs[i, c])))
        assignment = st.assignment()
        committed = negotiate(proposals, w, assignment)
        for p in committed:
            st.set_channel(p.node, p.new_channel)
        for j in sorted(phi):
            if self.backoff_until[j] == t + 1:
                self.priorities[j] = prand(self.rng) * w.weights[j]
        for p in committed:
            # binary exponential backoff, as in contention MACs: breaks periodic move cycles
            self.moves[p.node] += 1
            window = 2 ** min(int(self.moves[p.node]), self.limits.backoff_exponent)
            self.backoff_until[p.node] = t + 1 + int(self.rng.integers(1, window + 1))
        radius = w.interference_radius(assignment.power)
        commits = [Commit(p.node, p.new_channel, p.new_power, float(radius[p.node])) for p in committed]
        self._record("channel", len(proposals), commits, len(eligible))
        return committed, proposals, eligible

    def settled(self) -> bool:
        """No node, eligible or backing off, has a strictly improving channel switch."""
        costs = self.state.channel_costs()
        rows = np.arange(self.world.n)
        current = costs[rows, self.state.channel]
        return not np.any(costs.min(axis=1) < current * (1.0 - self.limits.improvement_rtol))

    def idle_channel_round(self):
        self._record("channel", 0, (), 0)

    def power_round(self):
        w, st, lim = self.world, self.state, self.limits
        counts = w.interferer_counts
        utility = np.log1p(self.levels[None, :] * self.gain[:, None]) - self.tax * counts
        best = np.argmax(utility, axis=1)
        current = w.level_of(st.power)
        rows = np.arange(w.n)
        proposals = [
            PowerProposal(int(i), float(self.levels[k + 1]), float(utility[i, k + 1] - utility[i, k]))
            for i, k in ((i, current[i]) for i in np.flatnonzero(best > current))
        ]
        ordered = sorted(proposals, key=lambda p: (-p.gain, p.node))
        assignment = st.assignment()
        taken = _exclusive(ordered, w, assignment, lambda p: p.new_power)
        if taken:
            st.set_powers({p.node: p.new_power for p, _ in taken})
        agg = float(counts[rows, w.level_of(st.power)].mean()) if w.n else 0.0
        tax_next = update_tax(self.tax, agg, lim.interference_cap, lim.tax_step)
        commits = [Commit(p.node, int(st.channel[p.node]), p.new_power, r) for p, r in taken]
        self._record("power", len(proposals), commits, w.n, tax_next=tax_next, agg=agg)
        prev_tax, self.tax = self.tax, tax_next
        changed = max((abs(p.new_power - assignment.power[p.node]) for p, _ in taken), default=0.0)
        return changed, prev_tax, tax_next

    def run(self):
        self.init()
        max_level = self.levels[-1]
        while True:
            self._check_budget()
            if self.use_mtm:
                committed, _, _ = self.channel_round()
                settled = not committed and self.settled()
            else:
                self.idle_channel_round()
                settled = True
            self._check_budget()
            changed, prev_tax, tax_next = self.power_round()
            # the all-max vector must have survived a full round pair
            if np.all(self.state.power >= max_level) and changed <= self.limits.power_tolerance:
                self.trace.termination = MAX_POWER
                break
            if settled and changed <= self.limits.power_tolerance and tax_next >= prev_tax:
                self.trace.termination = FIXED_POINT
                break
        log.debug("schedule finished after %d rounds (%s)", self.trace.rounds_used, self.trace.termination)
        return self.state.assignment(self.trace.rounds_used), self.trace


def init_assignment(
    world: World, seed: int, use_mtm: bool = True, limits: Optional[ScheduleLimits] = None
) -> Tuple[ChannelAssignment, ScheduleTrace]:
    """Round-0 assignment plus the adjustment rounds that follow it, at minimum power."""
    if world.radio.channel_count < 1:
        raise ConfigurationError("need at least one channel")
    proto = _Protocol(world, seed, use_mtm, limits or ScheduleLimits())
    proto.init()
    return proto.state.assignment(proto.trace.rounds_used), proto.trace


def run_schedule(
    world: World, seed: int, use_mtm: bool = True, limits: Optional[ScheduleLimits] = None
) -> Tuple[ChannelAssignment, ScheduleTrace]:
    """Run the protocol to termination; raises :class:`DivergenceError` past ``limits.max_rounds``."""
    return _Protocol(world, seed, use_mtm, limits or ScheduleLimits()).run()


def exclusiveness_violations(trace: ScheduleTrace, world: World) -> List[Tuple[int, int, int]]:
    """``(round, a, b)`` for every pair committed in one round inside each other's interference disc."""
    bad = []
    for rec in trace.rounds:
        c = rec.committed
        for x in range(len(c)):
            for y in range(x + 1, len(c)):
                a, b = c[x], c[y]
                if _conflict(world, a.node, a.radius, b.node, b.radius):
                    bad.append((rec.index, a.node, b.node))
    return bad

