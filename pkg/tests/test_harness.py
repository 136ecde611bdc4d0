import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from mtmnet.errors import ConfigurationError, SummaryError
from mtmnet.harness import (
    COLUMNS,
    WITH_MTM,
    WITHOUT_MTM,
    SweepConfig,
    SweepRow,
    SweepTable,
    emit_csv,
    improvement_summary,
    read_csv,
    run_sweep,
    traffic_requirement,
)
from mtmnet.network import ChannelAssignment, NetworkState, World
from mtmnet.radio import RadioParams
from mtmnet.routing import RouteBook, RoutingParams, link_capacities
from mtmnet.scheduler import ScheduleLimits
from mtmnet.topology import TerrainConfig, from_points

SMALL = SweepConfig(
    scenario="terrain",
    terrain=TerrainConfig(node_count=40),
    loads=(0.0, 50.0, 100.0),
    seeds=(1, 2),
)


def _row(load, variant, seed, traffic, hops=1):
    return SweepRow(load, variant, seed, traffic, 0.0, hops, 0.0, 0, "fixed_point")


def test_zero_load_needs_nothing():
    world = World(from_points([[0, 0], [100, 0]]))
    a = ChannelAssignment.uniform(2)
    assert traffic_requirement(world, a, 0.0).requirement == 0.0


def test_one_hop_pair():
    world = World(from_points([[0, 0], [100, 0]]))
    a = ChannelAssignment.uniform(2)
    m = traffic_requirement(world, a, 5.0, pairs=[(0, 1)])
    assert m.requirement == 5.0 and m.shortfall == 0.0


def test_negative_load_rejected():
    world = World(from_points([[0, 0]]))
    with pytest.raises(ValueError):
        traffic_requirement(world, ChannelAssignment.uniform(1), -1.0)


def test_lattice_requirement_matches_hand_sum():
    pts = [[c * 800.0, r * 800.0] for r in range(2) for c in range(4)]
    world = World(from_points(pts), RadioParams(channel_count=2))
    a = ChannelAssignment([0, 1, 0, 1, 1, 0, 1, 0], np.full(8, 1.0))
    params = RoutingParams(nominal_capacity=100.0)
    pairs = [(0, 3), (4, 2), (7, 1)]
    book = RouteBook(world, a, params)
    caps = link_capacities(NetworkState(world, a), 100.0)
    for load in (10.0, 40.0, 90.0):
        want, short = [], []
        for s, d in pairs:
            routes = book.routes(s, d)
            alloc = oracles.water_fill(load, [r.links() for r in routes], caps)
            left = load - math.fsum(alloc)
            want += [x * r.length_hops for x, r in zip(alloc, routes)]
            want.append(left * routes[-1].length_hops)
            short.append(left)
        m = traffic_requirement(world, a, load, params, pairs=pairs)
        assert m.requirement == pytest.approx(math.fsum(want), rel=1e-9)
        assert m.shortfall == pytest.approx(math.fsum(short), abs=1e-9)


@given(seed=st.integers(0, 2**32 - 1), loads=st.lists(st.floats(0, 500), min_size=2, max_size=5))
@settings(max_examples=25, deadline=None)
def test_requirement_nondecreasing_in_load(seed, loads):
    rng = np.random.default_rng(seed)
    world = World(from_points(rng.uniform(-1500, 1500, (15, 2))), RadioParams(channel_count=2))
    a = ChannelAssignment(rng.integers(2, size=15), np.full(15, 1.0))
    values = [traffic_requirement(world, a, x, seed=seed).requirement for x in sorted(loads)]
    assert all(b >= a_ - 1e-9 for a_, b in zip(values, values[1:]))


def test_zero_load_sweep_reports_one_hop():
    table = run_sweep(replace(SMALL, loads=(0.0,)))
    assert len(table) == 4
    assert {r.max_hops for r in table.rows} == {1}


def test_sweep_rows_are_complete_and_ordered():
    table = run_sweep(SMALL)
    keys = [r.key() for r in table.rows]
    assert keys == sorted(keys)
    assert len(set(keys)) == len(keys) == 3 * 2 * 2


def test_sweep_is_byte_reproducible(tmp_path):
    cfg = replace(SMALL, seeds=(4,))
    emit_csv(run_sweep(cfg), tmp_path / "a.csv")
    emit_csv(run_sweep(cfg), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_parallel_sweep_matches_serial():
    cfg = replace(SMALL, scenario="cross")
    assert run_sweep(replace(cfg, workers=2)) == run_sweep(cfg)


def test_divergence_is_recorded_not_fatal(tmp_path):
    cfg = replace(SMALL, limits=ScheduleLimits(max_rounds=2), trace_dir=str(tmp_path))
    table = run_sweep(cfg)
    assert len(table) == 12
    assert {r.termination for r in table.rows} == {"diverged"}
    assert len(list(tmp_path.glob("trace_*.jsonl"))) == 4


def test_desk_sweep_direction_at_coarse_loads():
    table = run_sweep(SweepConfig(loads=(0.0, 50.0, 100.0, 150.0, 200.0)))
    for load in table.loads():
        assert table.mean("traffic_requirement_proxy", load, WITH_MTM) <= table.mean(
            "traffic_requirement_proxy", load, WITHOUT_MTM
        )


def test_sweep_config_validation():
    with pytest.raises(ConfigurationError):
        SweepConfig(loads=())
    with pytest.raises(ConfigurationError):
        SweepConfig(loads=(10.0, 5.0))
    with pytest.raises(ConfigurationError):
        SweepConfig(seeds=())
    with pytest.raises(ConfigurationError):
        SweepConfig(seeds=(2**64,))
    with pytest.raises(ConfigurationError):
        SweepConfig(variants=("magic",))
    with pytest.raises(ConfigurationError):
        SweepConfig(scenario="moon")


def test_identical_variants_gain_nothing():
    rows = [_row(50.0, v, 1, 80.0, 3) for v in (WITH_MTM, WITHOUT_MTM)]
    assert tuple(improvement_summary(SweepTable(rows))) == (0.0, 0.0, 50.0)


def test_ten_percent_gain():
    rows = [_row(200.0, WITHOUT_MTM, 1, 100.0), _row(200.0, WITH_MTM, 1, 90.0)]
    s = improvement_summary(SweepTable(rows))
    assert s.max_traffic_gain_percent == pytest.approx(10.0)
    assert s.argmax_load == 200.0


def test_hops_gain_is_relative_increase():
    rows = [_row(20.0, WITHOUT_MTM, 1, 1.0, 4), _row(20.0, WITH_MTM, 1, 1.0, 5)]
    assert improvement_summary(SweepTable(rows)).max_hops_gain_percent == pytest.approx(25.0)


def test_summary_needs_both_variants():
    with pytest.raises(SummaryError):
        improvement_summary(SweepTable([_row(0.0, WITH_MTM, 1, 0.0)]))


def test_summary_recomputes_from_rows():
    table = run_sweep(SMALL)
    s = improvement_summary(table)
    best = None
    for load in sorted({r.load for r in table.rows}):
        w = [r.traffic_requirement_proxy for r in table.rows if r.load == load and r.variant == WITH_MTM]
        wo = [r.traffic_requirement_proxy for r in table.rows if r.load == load and r.variant == WITHOUT_MTM]
        gain = 0.0 if sum(wo) == 0 else (sum(wo) / len(wo) - sum(w) / len(w)) / (sum(wo) / len(wo)) * 100
        if best is None or gain > best[0]:
            best = (gain, load)
    assert s.max_traffic_gain_percent == pytest.approx(best[0], abs=1e-9)
    assert s.argmax_load == best[1]


def test_empty_table_writes_header_only(tmp_path):
    path = tmp_path / "t.csv"
    emit_csv(SweepTable(), path)
    assert path.read_text() == ",".join(COLUMNS) + "\n"


def test_one_row_two_lines(tmp_path):
    path = tmp_path / "t.csv"
    emit_csv(SweepTable([_row(20.0, WITH_MTM, 3, 12.5, 2)]), path)
    lines = path.read_text().split("\n")
    assert lines[-1] == "" and len(lines) == 3
    assert lines[1] == "20.000000,with_mtm,3,12.500000,0.000000,2,0.000000,0,fixed_point"


def test_csv_round_trip(tmp_path):
    table = run_sweep(SMALL)
    emit_csv(table, tmp_path / "t.csv")
    assert read_csv(tmp_path / "t.csv") == table


def test_csv_error_names_the_path(tmp_path):
    bad = tmp_path / "missing" / "t.csv"
    with pytest.raises(OSError, match="missing"):
        emit_csv(SweepTable(), bad)


def test_read_csv_checks_header(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(SummaryError):
        read_csv(path)
