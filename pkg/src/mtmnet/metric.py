"""Machine check time metric: aggregated equivalent channel air time seen by a node.

For node ``i``::

    MTM_i = sum_c sum_l  r_i^c * RT^c * F^c * Q_l / CF^c

over the co-channel links ``l`` inside i's interference disc. ``per_channel[c]``
is the inner sum for one channel. A single-radio node only contends on the
channel it uses, so the value driving its decisions (and the network
objective) is ``per_channel[own channel]``, see :func:`node_mtm`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Sequence, Union


from .errors import ParameterError
from .network import ChannelAssignment, NetworkState, World
from .radio import InterferenceView, LinkTable, RadioParams, build_links, channel_reuse_factor, interference_view, link_quality

Rates = Union[Mapping[int, float], Sequence[float]]


@dataclass(frozen=True)
class MtmReport:
    node: int
    per_channel: Dict[int, float]
    total: float
    rate_r: Dict[int, float]


def _rate_table(rates: Rates, channel_count: int) -> Dict[int, float]:
    table = {}
    for c in range(channel_count):
        try:
            r = float(rates[c])
        except (KeyError, IndexError):
            raise ParameterError(f"no rate given for channel {c}") from None
        if not 0 < r <= 1:
            raise ParameterError(f"rate for channel {c} must lie in (0, 1], got {r}")
        table[c] = r
    return table


def mtm(i: int, view: InterferenceView, links: LinkTable, params: RadioParams, rates: Rates) -> MtmReport:
    """Reference evaluation of the metric for one node, term by term.

    Channels are visited in ascending order and links in ``(src, dst)`` order so
    the floating-point result is reproducible.
    """
    if view.node != i:
        raise ParameterError(f"view belongs to node {view.node}, not {i}")
    r = _rate_table(rates, params.channel_count)
    per_channel = {}
    for c in range(params.channel_count):
        members = sorted(view.links_on(c))
        if not members:
            per_channel[c] = 0.0
            continue
        cf = channel_reuse_factor(c, i, links, view)
        acc = 0.0
        for link in members:
            acc += r[c] * params.rt_table[c] * params.f_table[c] * link_quality(link, params) / cf
        per_channel[c] = acc
    total = math.fsum(per_channel[c] for c in range(params.channel_count))
    return MtmReport(i, per_channel, total, r)


def node_report(i: int, assignment: ChannelAssignment, world: World) -> MtmReport:
    links = build_links(world.topology, assignment, world.radio)
    view = interference_view(i, links, assignment, world.radio, world.topology)
    return mtm(i, view, links, world.radio, world.rates)


def node_mtm(i: int, assignment: ChannelAssignment, world: World) -> float:
    """The metric node ``i`` sees on its own channel."""
    return node_report(i, assignment, world).per_channel[int(assignment.channel[i])]


def total_mtm(assignment: ChannelAssignment, world: World) -> float:
    """Network objective: every node's own-channel metric, summed. Evaluation only."""
    if world.n == 0:
        return 0.0
    return float(math.fsum(NetworkState(world, assignment).operating()))
