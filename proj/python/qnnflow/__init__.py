"""Cost, throughput and folding search for streaming QNN accelerators."""

import json as _json

from ._core import (
    DeviceUnsuitable,
    Error,
    FoldingError,
    ParseError,
    ValidationError,
    bram_swu,
    bram_weights,
    cli,
    layer_ii,
    lut_cost,
    pareto_front,
)
from ._core import explore_json as _explore_json


def explore(topology, device, clock_mhz, **kwargs):
    """Greedy folding search. `topology` and `device` are JSON documents (str)."""
    return _json.loads(_explore_json(topology, device, clock_mhz, **kwargs))


__all__ = [
    "DeviceUnsuitable",
    "Error",
    "FoldingError",
    "ParseError",
    "ValidationError",
    "bram_swu",
    "bram_weights",
    "cli",
    "explore",
    "layer_ii",
    "lut_cost",
    "pareto_front",
]
