"""How a node scores its channels.

Six hosts in two clusters share three channels. For every host we print the
metric it would see on each channel if it moved there alone, then let the
scheduler settle and print the same table again.
"""

import numpy as np

from mtmnet import ChannelAssignment, RadioParams, World, run_schedule, total_mtm
from mtmnet.network import NetworkState
from mtmnet.topology import from_points

points = [[0, 0], [300, 0], [150, 250], [1400, 0], [1700, 100], [1550, 300]]
world = World(from_points(points), RadioParams(channel_count=3))

# everyone starts crowded on channel 0 at full power
start = ChannelAssignment(np.zeros(6, dtype=int), np.full(6, 1.0))


def show(label, assignment):
    costs = NetworkState(world, assignment).channel_costs()
    print(f"\n{label}: total {total_mtm(assignment, world):.3f}")
    print("node  ch   " + "  ".join(f"c{c:<5}" for c in range(3)))
    for i, row in enumerate(costs):
        print(f"{i:>4}  {assignment.channel[i]:>2}   " + "  ".join(f"{v:6.3f}" for v in row))


show("all on channel 0", start)

final, trace = run_schedule(world, seed=5)
show(f"after {trace.rounds_used} rounds ({trace.termination})", final)
