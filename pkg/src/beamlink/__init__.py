"""beamlink: link-budget and channel simulation for THz and optical wireless."""

from . import indoor_owc, indoor_thz, mathkit, network, outdoor
from .errors import (
    BeamlinkError,
    ConfigError,
    ConvergenceError,
    DomainError,
    GeometryError,
    InfeasiblePowerError,
    OutOfBandError,
)
from .geometry import DOWNLINK, LinkFrame, Misalignment, Pose, link_misalignment
from .mathkit import QuadratureSpec, RngStream

__version__ = "0.1.0"
