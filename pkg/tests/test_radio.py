import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from helpers import random_instance
from mtmnet.errors import ConfigurationError, ParameterError
from mtmnet.network import ChannelAssignment
from mtmnet.radio import (
    InterferenceView,
    Link,
    LinkTable,
    RadioParams,
    build_links,
    channel_reuse_factor,
    communication_range,
    interference_range,
    interference_view,
    link_quality,
    poisson_boolean_connected,
)
from mtmnet.topology import TerrainConfig, build_terrain_scenario, from_points

RADIO = RadioParams()


def test_range_at_max_power():
    assert communication_range(1.0, RADIO) == 1000.0


def test_range_at_quarter_power():
    assert communication_range(0.25, RADIO) == pytest.approx(500.0, rel=1e-12)


@pytest.mark.parametrize("alpha", [2.0, 3.0, 4.0])
def test_ranges_match_formula_and_increase(alpha):
    radio = RadioParams(path_loss_exponent=alpha)
    got = [communication_range(p, radio) for p in radio.power_levels]
    want = [1000.0 * (p / 1.0) ** (1 / alpha) for p in radio.power_levels]
    assert got == pytest.approx(want, rel=1e-12)
    assert all(b > a for a, b in zip(got, got[1:]))


def test_range_rejects_unknown_power():
    with pytest.raises(ParameterError):
        communication_range(0.3, RADIO)


def test_interference_range_scales_communication_range():
    assert interference_range(0.25, RadioParams(interference_range_factor=3.0)) == pytest.approx(1500.0)


def test_radio_params_validation():
    with pytest.raises(ConfigurationError):
        RadioParams(power_levels=(1.0, 0.5))
    with pytest.raises(ConfigurationError):
        RadioParams(interference_range_factor=0.5)
    with pytest.raises(ConfigurationError):
        RadioParams(channel_count=2, rt_table=(1.0,))
    with pytest.raises(ConfigurationError):
        RadioParams(channel_count=0)


def _assign(n, power=1.0, channel=0):
    return ChannelAssignment.uniform(n, channel, power)


def test_colocated_nodes_are_linked():
    links = build_links(from_points([[5, 5], [5, 5]]), _assign(2), RADIO)
    assert links.pairs() == {(0, 1), (1, 0)}


def test_far_nodes_are_not_linked():
    links = build_links(from_points([[0, 0], [1000.001, 0]]), _assign(2), RADIO)
    assert len(links) == 0


def test_link_uses_weaker_endpoint():
    topo = from_points([[0, 0], [600, 0]])
    a = ChannelAssignment([0, 0], [1.0, 0.25])
    assert len(build_links(topo, a, RADIO)) == 0
    a = ChannelAssignment([0, 0], [1.0, 0.5])
    assert len(build_links(topo, a, RADIO)) == 2


def test_links_match_pairwise_scan():
    rng = np.random.default_rng(3)
    pos = rng.uniform(-2000, 2000, size=(50, 2))
    powers = np.asarray(RADIO.power_levels)[rng.integers(5, size=50)]
    a = ChannelAssignment(rng.integers(8, size=50), powers)
    links = build_links(from_points(pos), a, RADIO)
    oracle = {(u, v) for u, v, _ in oracles.directed_links(pos.tolist(), powers.tolist(), RADIO)}
    assert links.pairs() == oracle
    for link in links:
        assert link.channel == a.channel[link.src]
        assert link.length == pytest.approx(math.dist(pos[link.src], pos[link.dst]))


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_links_are_symmetric_and_monotone_in_power(seed):
    rng = np.random.default_rng(seed)
    world, a = random_instance(rng, max_nodes=12)
    links = build_links(world.topology, a, world.radio)
    assert all((v, u) in links.pairs() for u, v in links.pairs())
    i = int(rng.integers(world.n))
    k = world.radio.level_index(float(a.power[i]))
    if k + 1 < len(world.radio.power_levels):
        raised = a.with_node(i, power=world.radio.power_levels[k + 1])
        assert links.pairs() <= build_links(world.topology, raised, world.radio).pairs()


def test_isolated_node_has_empty_view():
    topo = from_points([[0, 0]])
    a = _assign(1)
    v = interference_view(0, build_links(topo, a, RADIO), a, RADIO, topo)
    assert v.size() == 0


def test_link_just_inside_interference_range_is_seen():
    # node 0 at the origin, link 1-2 with its near endpoint exactly at 2000 m
    topo = from_points([[0, 0], [2000, 0], [2500, 0]])
    a = ChannelAssignment([0, 3, 3], [1.0, 1.0, 1.0])
    links = build_links(topo, a, RADIO)
    v = interference_view(0, links, a, RADIO, topo)
    assert {(l.src, l.dst) for l in v.links_on(3)} == {(1, 2), (2, 1)}
    assert v.size() == 2
    # a hair further out and it drops
    topo = from_points([[0, 0], [2000.01, 0], [2500, 0]])
    links = build_links(topo, a, RADIO)
    assert interference_view(0, links, a, RADIO, topo).size() == 0


def test_view_matches_filter_oracle():
    rng = np.random.default_rng(11)
    for _ in range(5):
        pos = rng.uniform(-2500, 2500, size=(30, 2))
        powers = np.asarray(RADIO.power_levels)[rng.integers(5, size=30)]
        a = ChannelAssignment(rng.integers(8, size=30), powers)
        topo = from_points(pos)
        links = build_links(topo, a, RADIO)
        all_links = oracles.directed_links(pos.tolist(), powers.tolist(), RADIO)
        for i in range(30):
            v = interference_view(i, links, a, RADIO, topo)
            want = oracles.view(i, all_links, pos.tolist(), powers.tolist(), a.channel.tolist(), RADIO)
            for c in range(8):
                assert {(l.src, l.dst) for l in v.links_on(c)} == {(u, w) for u, w, _ in want[c]}


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_view_is_a_subset_of_links_on_its_channel(seed):
    rng = np.random.default_rng(seed)
    world, a = random_instance(rng, max_nodes=12)
    links = build_links(world.topology, a, world.radio)
    pairs = links.pairs()
    for i in range(world.n):
        v = interference_view(i, links, a, world.radio, world.topology)
        for c, members in v.per_channel.items():
            for link in members:
                assert link.channel == c and (link.src, link.dst) in pairs
                assert i not in (link.src, link.dst)


def test_link_quality_cases():
    assert link_quality(0.0, RADIO) == 1.0
    assert link_quality(1000.0, RADIO) == 0.05
    assert link_quality(500.0, RADIO) == pytest.approx(1 - 500 / 1000)
    assert link_quality(Link(0, 1, 250.0, 0), RADIO) == 0.75


@given(a=st.floats(0, 3000), b=st.floats(0, 3000))
def test_link_quality_nonincreasing(a, b):
    lo, hi = sorted((a, b))
    assert link_quality(lo, RADIO) >= link_quality(hi, RADIO)
    assert 0 < link_quality(hi, RADIO) <= 1


def _table(links):
    src, dst, ln, ch = zip(*links) if links else ((), (), (), ())
    return LinkTable(np.array(src, dtype=int), np.array(dst, dtype=int), np.array(ln, float), np.array(ch, dtype=int))


def test_reuse_factor_without_reuse():
    links = _table([(1, 2, 10.0, 0), (2, 1, 10.0, 0)])
    v = InterferenceView(0, {0: tuple(links)})
    assert channel_reuse_factor(0, 0, links, v) == 1.0


def test_reuse_factor_ratio():
    links = _table([(k, k + 1, 10.0, 2) for k in range(1, 7)])
    seen = tuple(list(links)[:2])
    assert channel_reuse_factor(2, 0, links, InterferenceView(0, {2: seen})) == 3.0


def test_reuse_factor_empty_network():
    assert channel_reuse_factor(0, 0, LinkTable.empty(), InterferenceView(0, {})) == 1.0


def test_boolean_radius_zero():
    topo = from_points([[0, 0], [1, 0], [5, 5]])
    assert tuple(poisson_boolean_connected(topo, 0.0)) == (False, 3, pytest.approx(1 / 3))


def test_boolean_large_radius_connects():
    topo = build_terrain_scenario(TerrainConfig(node_count=100, seed=4))
    res = poisson_boolean_connected(topo, topo.side_length * math.sqrt(2))
    assert res.connected and res.component_count == 1 and res.giant_fraction == 1.0


def test_boolean_rejects_negative_radius():
    with pytest.raises(ParameterError):
        poisson_boolean_connected(from_points([[0, 0]]), -1.0)


def test_boolean_matches_union_find():
    for seed in range(10):
        topo = build_terrain_scenario(TerrainConfig(node_count=200, seed=seed))
        r = 150.0 + 20 * seed
        assert poisson_boolean_connected(topo, r).component_count == oracles.union_find_components(
            topo.positions.tolist(), r
        )


@given(seed=st.integers(0, 2**32 - 1), radii=st.lists(st.floats(0, 800), min_size=2, max_size=6))
@settings(max_examples=30, deadline=None)
def test_boolean_components_nonincreasing_in_radius(seed, radii):
    topo = build_terrain_scenario(TerrainConfig(node_count=80, seed=seed))
    counts = [poisson_boolean_connected(topo, r).component_count for r in sorted(radii)]
    assert all(b <= a for a, b in zip(counts, counts[1:]))
