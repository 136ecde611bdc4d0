"""Seeded load sweeps comparing the protocol with and without the metric.

For each seed one world is built and scheduled once per variant; the resulting
network is then probed at every load. Both variants share the world, the
scheduler seed and the sampled source/destination pairs, so per-seed
differences come from the channel assignment alone.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, DivergenceError, SummaryError
from .metric import total_mtm
from .network import ChannelAssignment, World
from .radio import RadioParams
from .routing import RouteBook, RoutingParams, _pair_rng, max_permitted_hops, sample_pairs
from .scheduler import DIVERGED, ScheduleLimits, run_schedule
from .topology import TerrainConfig, build_cross_scenario, build_terrain_scenario

log = logging.getLogger(__name__)

WITH_MTM = "with_mtm"
WITHOUT_MTM = "without_mtm"
VARIANTS = (WITH_MTM, WITHOUT_MTM)

COLUMNS = (
    "load",
    "variant",
    "seed",
    "traffic_requirement_proxy",
    "shortfall",
    "max_hops",
    "total_mtm",
    "rounds",
    "termination",
)


@dataclass(frozen=True)
class SweepConfig:
    scenario: str = "terrain"
    loads: Tuple[float, ...] = tuple(float(x) for x in range(0, 201, 20))
    seeds: Tuple[int, ...] = (1, 2, 3, 4, 5)
    variants: Tuple[str, ...] = VARIANTS
    output_path: Optional[str] = None
    terrain: TerrainConfig = field(default_factory=TerrainConfig)
    radio: RadioParams = field(default_factory=RadioParams)
    limits: ScheduleLimits = field(default_factory=ScheduleLimits)
    routing: RoutingParams = field(default_factory=RoutingParams)
    rates: Optional[Tuple[float, ...]] = None
    trace_dir: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in ("cross", "terrain"):
            raise ConfigurationError(f"unknown scenario {self.scenario!r}")
        if not self.loads:
            raise ConfigurationError("loads must not be empty")
        if any(b < a for a, b in zip(self.loads, self.loads[1:])) or min(self.loads) < 0:
            raise ConfigurationError("loads must be non-negative and nondecreasing")
        if not self.seeds:
            raise ConfigurationError("seeds must not be empty")
        if any(not 0 <= int(s) < 2**64 for s in self.seeds):
            raise ConfigurationError("seeds must be 64-bit unsigned integers")
        if int(self.workers) < 1:
            raise ConfigurationError("workers must be >= 1")
        if not self.variants or any(v not in VARIANTS for v in self.variants):
            raise ConfigurationError(f"variants must be drawn from {VARIANTS}")


@dataclass(frozen=True)
class SweepRow:
    load: float
    variant: str
    seed: int
    traffic_requirement_proxy: float
    shortfall: float
    max_hops: int
    total_mtm: float
    rounds: int
    termination: str

    def key(self):
        return (self.load, self.variant, self.seed)


@dataclass
class SweepTable:
    rows: List[SweepRow] = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        return isinstance(other, SweepTable) and self.rows == other.rows

    def where(self, **kw) -> List[SweepRow]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in kw.items())]

    def loads(self) -> List[float]:
        return sorted({r.load for r in self.rows})

    def mean(self, column: str, load: float, variant: str) -> float:
        vals = [getattr(r, column) for r in self.where(load=load, variant=variant)]
        return float(np.mean(vals)) if vals else math.nan


@dataclass(frozen=True)
class TrafficMeasure:
    requirement: float
    shortfall: float


def build_world(config: SweepConfig, seed: int) -> World:
    terrain = replace(config.terrain, seed=int(seed))
    topo = build_cross_scenario(terrain) if config.scenario == "cross" else build_terrain_scenario(terrain)
    return World(topo, config.radio, rates=config.rates)


def demand_pairs(book: RouteBook, seed: int) -> List[Tuple[int, int]]:
    """The sampled source/destination set: connected ordered pairs, shared by all loads."""
    pairs = sorted((s, d) for s, row in book.hop_distance.items() for d, h in row.items() if h >= 1)
    return sample_pairs(pairs, book.params.pair_count, _pair_rng(seed, 0))


def traffic_requirement(
    world: World,
    assignment: ChannelAssignment,
    load: float,
    params: RoutingParams = RoutingParams(),
    seed: int = 0,
    book: Optional[RouteBook] = None,
    pairs: Optional[Sequence[Tuple[int, int]]] = None,
) -> TrafficMeasure:
    """Capacity consumed (Mb/s x hops) to carry ``load`` from every sampled source.

    Demand that does not fit within the routes' capacity is still charged, at
    the hop count of the longest route it could have used, and also reported
    as shortfall.
    """
    if load < 0:
        raise ValueError("load must be non-negative")
    if load == 0:
        return TrafficMeasure(0.0, 0.0)
    book = book or RouteBook(world, assignment, params)
    pairs = demand_pairs(book, seed) if pairs is None else pairs
    terms, short = [], []
    for s, d in pairs:
        routes = book.routes(s, d)
        if not routes:
            short.append(load)
            continue
        split = book.split(s, d, load)
        terms.extend(a * r.length_hops for r, a in split.allocation)
        terms.append(split.shortfall * routes[-1].length_hops)
        short.append(split.shortfall)
    return TrafficMeasure(math.fsum(terms), math.fsum(short))


def _schedule(args):
    config, seed, variant = args
    world = build_world(config, seed)
    try:
        assignment, trace = run_schedule(world, seed, variant == WITH_MTM, config.limits)
        termination = trace.termination
    except DivergenceError as err:
        log.warning("seed %s %s diverged", seed, variant)
        assignment, trace, termination = err.assignment, err.trace, DIVERGED
    if config.trace_dir:
        Path(config.trace_dir).mkdir(parents=True, exist_ok=True)
        trace.write_jsonl(Path(config.trace_dir) / f"trace_{variant}_{seed}.jsonl")
    book = RouteBook(world, assignment, config.routing)
    pairs = demand_pairs(book, seed)
    objective = total_mtm(assignment, world)
    rows = []
    for load in config.loads:
        traffic = traffic_requirement(world, assignment, load, config.routing, seed, book, pairs)
        hops = max_permitted_hops(world, assignment, load, config.routing, seed, book)
        rows.append(
            SweepRow(
                load=float(load),
                variant=variant,
                seed=int(seed),
                traffic_requirement_proxy=round(traffic.requirement, 6),
                shortfall=round(traffic.shortfall, 6),
                max_hops=int(hops),
                total_mtm=round(objective, 6),
                rounds=trace.rounds_used,
                termination=termination,
            )
        )
    return rows


def run_sweep(config: SweepConfig) -> SweepTable:
    jobs = [(config, s, v) for s in config.seeds for v in config.variants]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            chunks = list(pool.map(_schedule, jobs))
    else:
        chunks = [_schedule(j) for j in jobs]
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=SweepRow.key)
    return SweepTable(rows)


@dataclass(frozen=True)
class Improvement:
    max_traffic_gain_percent: float
    max_hops_gain_percent: float
    argmax_load: float
    per_load: Tuple[Tuple[float, float, float], ...] = ()

    def __iter__(self):
        return iter((self.max_traffic_gain_percent, self.max_hops_gain_percent, self.argmax_load))


def _gain(reference: float, other: float) -> float:
    return 0.0 if reference == 0 else (reference - other) / reference * 100.0


def _rise(reference: float, other: float) -> float:
    return 0.0 if reference == 0 else (other - reference) / reference * 100.0


def improvement_summary(table: SweepTable) -> Improvement:
    """Per-load mean gains of ``with_mtm`` over ``without_mtm`` and their maxima.

    Traffic gain is the relative reduction of the requirement, hop gain the
    relative increase of permitted hops.
    """
    present = {r.variant for r in table.rows}
    missing = [v for v in VARIANTS if v not in present]
    if missing:
        raise SummaryError(f"table lacks variant(s) {missing}")
    per_load = []
    for load in table.loads():
        t_with = table.mean("traffic_requirement_proxy", load, WITH_MTM)
        t_without = table.mean("traffic_requirement_proxy", load, WITHOUT_MTM)
        h_with = table.mean("max_hops", load, WITH_MTM)
        h_without = table.mean("max_hops", load, WITHOUT_MTM)
        if math.isnan(t_with) or math.isnan(t_without):
            continue
        per_load.append((load, _gain(t_without, t_with), _rise(h_without, h_with)))
    if not per_load:
        raise SummaryError("no load has rows for both variants")
    best = max(per_load, key=lambda x: (x[1], -x[0]))
    return Improvement(best[1], max(x[2] for x in per_load), best[0], tuple(per_load))


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def emit_csv(table: SweepTable, path) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(COLUMNS)
            for r in table.rows:
                out.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    except OSError as err:
        raise OSError(f"cannot write sweep table to {path}: {err}") from err


_CASTS = {
    "load": float,
    "variant": str,
    "seed": int,
    "traffic_requirement_proxy": float,
    "shortfall": float,
    "max_hops": int,
    "total_mtm": float,
    "rounds": int,
    "termination": str,
}


def read_csv(path) -> SweepTable:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COLUMNS:
            raise SummaryError(f"{path}: unexpected header {reader.fieldnames}")
        return SweepTable([SweepRow(**{k: _CASTS[k](v) for k, v in row.items()}) for row in reader])
