"""Relay-assisted indoor infrared channel simulation with delay adaptation."""
from .adaptation import DelayAssignment, ProbeProtocolConfig, ReferenceCriterion, adapt
from .channel import ChannelConfig, ChannelEngine, ImpulseResponse, convolve, impulse_response
from .errors import InvalidArgumentError, NoSignalError, ProbeOverlapError
from .geometry import RoomModel, Vec3, tessellate
from .metrics import DelayStats, compare, delay_stats, mean_delay, rms_delay_spread
from .radiometry import Detector, Emitter, lambertian_order, path_contribution
from .relay import RelayTerminal, composite_response, received_signal

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig", "ChannelEngine", "DelayAssignment", "DelayStats", "Detector", "Emitter",
    "ImpulseResponse", "InvalidArgumentError", "NoSignalError", "ProbeOverlapError",
    "ProbeProtocolConfig", "ReferenceCriterion", "RelayTerminal", "RoomModel", "Vec3",
    "adapt", "compare", "composite_response", "convolve", "delay_stats", "impulse_response",
    "lambertian_order", "mean_delay", "path_contribution", "received_signal",
    "rms_delay_spread", "tessellate",
]
