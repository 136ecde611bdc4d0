"""INI configuration files.

One section per concern; every key is optional and falls back to the library
default, but unknown sections or keys are rejected so typos fail fast::

    [scenario]   kind, side_length, cell_radius, node_count, spacing_D, arm_length
    [radio]      comm_range_at_max_power, interference_range_factor, power_levels,
                 channel_count, rt_table, f_table, path_loss_exponent, q_floor
    [metric]     rates
    [scheduler]  max_rounds, power_tolerance, tax_step, interference_cap,
                 improvement_rtol, backoff_exponent
    [routing]    k, pair_count, nominal_capacity, max_candidates
    [harness]    loads, seeds, variants, output_path, trace_dir, workers
    [connectivity] radii

Lists are comma separated. ``loads`` and ``radii`` also accept
``start:stop:step`` with an inclusive stop.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .errors import ConfigurationError
from .harness import SweepConfig
from .radio import RadioParams
from .routing import RoutingParams
from .scheduler import ScheduleLimits
from .topology import TerrainConfig


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> Tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _words(text: str) -> Tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _grid(text: str) -> Tuple[float, ...]:
    if ":" not in text:
        return _floats(text)
    parts = [float(x) for x in text.split(":")]
    if len(parts) != 3 or parts[2] <= 0:
        raise ValueError("range must be start:stop:step with a positive step")
    start, stop, step = parts
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(round(start + k * step, 9)) for k in range(max(count, 0)))


def _opt_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none") else float(text)


def _opt_str(text: str) -> Optional[str]:
    return None if text.strip().lower() in ("", "none") else text.strip()


SCHEMA: Dict[str, Dict[str, Callable[[str], object]]] = {
    "scenario": {
        "kind": str.strip,
        "side_length": float,
        "cell_radius": float,
        "node_count": int,
        "spacing_D": float,
        "arm_length": _opt_float,
    },
    "radio": {
        "comm_range_at_max_power": float,
        "interference_range_factor": float,
        "power_levels": _floats,
        "channel_count": int,
        "rt_table": _floats,
        "f_table": _floats,
        "path_loss_exponent": float,
        "q_floor": float,
    },
    "metric": {"rates": _floats},
    "scheduler": {
        "max_rounds": int,
        "power_tolerance": float,
        "tax_step": float,
        "interference_cap": float,
        "improvement_rtol": float,
        "backoff_exponent": int,
    },
    "routing": {
        "k": int,
        "pair_count": int,
        "nominal_capacity": float,
        "max_candidates": int,
    },
    "harness": {
        "loads": _grid,
        "seeds": _ints,
        "variants": _words,
        "output_path": _opt_str,
        "trace_dir": _opt_str,
        "workers": int,
    },
    "connectivity": {"radii": _grid},
}


@dataclass(frozen=True)
class RunConfig:
    """A parsed configuration file."""

    sweep: SweepConfig = field(default_factory=SweepConfig)
    radii: Tuple[float, ...] = tuple(float(r) for r in range(100, 1001, 100))
    source: Optional[str] = None


def _section(parser: configparser.ConfigParser, name: str) -> dict:
    if not parser.has_section(name):
        return {}
    out = {}
    for key, raw in parser.items(name):
        try:
            out[key] = SCHEMA[name][key](raw)
        except (ValueError, TypeError) as err:
            raise ConfigurationError(f"[{name}] {key} = {raw!r}: {err}") from None
    return out


def parse_config(text: str, source: Optional[str] = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case sensitive (spacing_D)
    where = source or "<config>"
    try:
        parser.read_string(text, source=where)
    except configparser.Error as err:
        raise ConfigurationError(f"{where}: {err}") from None
    for name in parser.sections():
        if name not in SCHEMA:
            raise ConfigurationError(f"{where}: unknown section [{name}]")
        unknown = sorted(set(parser.options(name)) - set(SCHEMA[name]))
        if unknown:
            raise ConfigurationError(f"{where}: unknown key(s) in [{name}]: {', '.join(unknown)}")

    scenario = _section(parser, "scenario")
    kind = scenario.pop("kind", "terrain")
    terrain = TerrainConfig(**scenario)
    radio = RadioParams(**_section(parser, "radio"))
    rates = _section(parser, "metric").get("rates")
    if rates is not None and len(rates) != radio.channel_count:
        raise ConfigurationError(f"rates needs {radio.channel_count} entries, got {len(rates)}")
    limits = ScheduleLimits(**_section(parser, "scheduler"))
    routing = RoutingParams(**_section(parser, "routing"))
    harness = _section(parser, "harness")
    for key in ("seeds", "variants", "loads"):
        if key in harness and not harness[key]:
            raise ConfigurationError(f"[harness] {key} must not be empty")
    sweep = SweepConfig(
        scenario=kind, terrain=terrain, radio=radio, limits=limits, routing=routing, rates=rates, **harness
    )
    radii = _section(parser, "connectivity").get("radii", RunConfig.radii)
    if not radii or min(radii) < 0:
        raise ConfigurationError("[connectivity] radii must be non-empty and non-negative")
    return RunConfig(sweep=sweep, radii=tuple(radii), source=source)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigurationError(f"cannot read config {path}: {err}") from None
    return parse_config(text, str(path))
