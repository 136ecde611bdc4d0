"""Random small instances shared by several test modules."""

import numpy as np

from mtmnet.network import ChannelAssignment, World
from mtmnet.radio import RadioParams
from mtmnet.topology import from_points


def random_radio(rng, max_channels=4, tables=True):
    L = int(rng.integers(1, max_channels + 1))
    if not tables:
        return RadioParams(channel_count=L)
    return RadioParams(
        channel_count=L,
        rt_table=tuple(rng.uniform(0.5, 2.0, L)),
        f_table=tuple(rng.uniform(0.5, 2.0, L)),
    )


def random_instance(rng, max_nodes=10, max_channels=4, side=3000.0, tables=True, rates=True):
    """A world plus a random (channel, power) assignment."""
    radio = random_radio(rng, max_channels, tables)
    n = int(rng.integers(1, max_nodes + 1))
    pos = rng.uniform(-side / 2, side / 2, size=(n, 2))
    r = tuple(1.0 - rng.random(radio.channel_count)) if rates else None
    world = World(from_points(pos), radio, rates=r)
    levels = np.asarray(radio.power_levels)
    assignment = ChannelAssignment(
        rng.integers(radio.channel_count, size=n), levels[rng.integers(len(levels), size=n)]
    )
    return world, assignment


def plain(world, assignment):
    """Arguments for the oracles: python lists and the world's rate vector."""
    return (
        [tuple(p) for p in world.positions],
        [int(c) for c in assignment.channel],
        [float(p) for p in assignment.power],
        world.radio,
        [float(r) for r in world.rates],
    )
