"""Poses, link frames, and the pose-to-misalignment decomposition.

The misalignment channel formulas are written in a nominal link frame whose
z axis is the intended propagation direction. For the standard indoor setup
(transmitter on the ceiling firing straight down) that frame is DOWNLINK;
sweeps that tilt or displace a terminal build world-frame poses and decompose
them against the fixed nominal frame, so a displaced transmitter registers as
a transverse offset instead of silently re-aiming the link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise GeometryError("cannot normalise a zero-length vector")
    return v / n


@dataclass(frozen=True)
class Pose:
    """Position plus boresight orientation of a terminal.

    azimuth/elevation follow the usual spherical convention: the boresight is
    (cos el cos az, cos el sin az, sin el) in world coordinates, so elevation
    +pi/2 faces up and -pi/2 faces down.
    """

    position: np.ndarray
    azimuth: float = 0.0
    elevation: float = 0.0

    def __post_init__(self):
        pos = np.array(self.position, dtype=float)
        if pos.shape != (3,):
            raise GeometryError(f"pose position must be a 3-vector, got shape {pos.shape}")
        pos.flags.writeable = False
        object.__setattr__(self, "position", pos)

    def boresight(self) -> np.ndarray:
        ce = math.cos(self.elevation)
        return np.array(
            [ce * math.cos(self.azimuth), ce * math.sin(self.azimuth), math.sin(self.elevation)]
        )

    def local_axes(self):
        """Boresight plus the two transverse pattern axes (azimuthal, elevational)."""
        sa, ca = math.sin(self.azimuth), math.cos(self.azimuth)
        se, ce = math.sin(self.elevation), math.cos(self.elevation)
        e_az = np.array([-sa, ca, 0.0])
        e_el = np.array([-se * ca, -se * sa, ce])
        return self.boresight(), e_az, e_el

    def direction_angles(self, direction: np.ndarray):
        """Azimuth/elevation offsets of a world direction from this boresight.

        Well behaved even for vertical boresights (no polar singularity): the
        offsets are measured in the pose's own transverse axes.
        """
        d = _unit(np.asarray(direction, dtype=float))
        b, e_az, e_el = self.local_axes()
        theta_e = math.asin(min(1.0, max(-1.0, float(d @ e_el))))
        theta_a = math.atan2(float(d @ e_az), float(d @ b))
        return theta_a, theta_e


@dataclass(frozen=True)
class LinkFrame:
    """Right-handed orthonormal frame; ez is the nominal propagation direction."""

    ex: np.ndarray
    ey: np.ndarray
    ez: np.ndarray

    @classmethod
    def from_axis(cls, axis) -> "LinkFrame":
        ez = _unit(np.array(axis, dtype=float))
        helper = np.array([1.0, 0.0, 0.0])
        if abs(float(ez @ helper)) > 0.9:
            helper = np.array([0.0, 1.0, 0.0])
        ex = _unit(helper - (helper @ ez) * ez)
        ey = np.cross(ez, ex)
        for v in (ex, ey, ez):
            v.flags.writeable = False
        return cls(ex=ex, ey=ey, ez=ez)

    def to_frame(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return np.array([float(v @ self.ex), float(v @ self.ey), float(v @ self.ez)])


#: Nominal frame of a ceiling-mounted downward link.
DOWNLINK = LinkFrame.from_axis((0.0, 0.0, -1.0))


@dataclass(frozen=True)
class Misalignment:
    """Link-frame decomposition of a transmitter/receiver pose pair.

    length is the axial separation, (x_dis, y_dis) the transverse offset of
    the receiver centre from the transmitter, and the four angles are the
    orientation errors of the beam axis (tx) and the receiver plane (rx)
    relative to the nominal frame.
    """

    length: float
    x_dis: float = 0.0
    y_dis: float = 0.0
    tx_azimuth: float = 0.0
    tx_elevation: float = 0.0
    rx_azimuth: float = 0.0
    rx_elevation: float = 0.0

    def beam_axis(self) -> np.ndarray:
        """Unit beam direction in link-frame coordinates."""
        ca, sa = math.cos(self.tx_azimuth), math.sin(self.tx_azimuth)
        ce, se = math.cos(self.tx_elevation), math.sin(self.tx_elevation)
        return np.array([sa * ce, se, ce * ca])

    def receiver_normal(self) -> np.ndarray:
        """Unit normal of the receiver plane (facing the transmitter side)."""
        ca, sa = math.cos(self.rx_azimuth), math.sin(self.rx_azimuth)
        ce, se = math.cos(self.rx_elevation), math.sin(self.rx_elevation)
        return np.array([sa * ce, -se, ca * ce])

    def incidence_angle(self) -> float:
        """Angle between the arriving beam axis and the receiver normal."""
        c = float(np.clip(self.beam_axis() @ self.receiver_normal(), -1.0, 1.0))
        return math.acos(c)


def link_misalignment(tx: Pose, rx: Pose, frame: LinkFrame | None = None) -> Misalignment:
    """Decompose two world poses into misalignment-channel parameters.

    With frame=None the nominal axis is taken from the positions themselves,
    which zeroes the transverse offsets; pass an explicit frame (e.g.
    DOWNLINK) when displacement is part of the sweep.
    """
    delta = rx.position - tx.position
    if float(np.linalg.norm(delta)) == 0.0:
        raise GeometryError("transmitter and receiver poses coincide")
    if frame is None:
        frame = LinkFrame.from_axis(delta)

    d = frame.to_frame(delta)
    length = float(d[2])
    if length <= 0.0:
        raise GeometryError("receiver lies behind the transmitter in the link frame")

    u = frame.to_frame(tx.boresight())
    tx_el = math.asin(min(1.0, max(-1.0, float(u[1]))))
    tx_az = math.atan2(float(u[0]), float(u[2]))

    m = frame.to_frame(-rx.boresight())
    rx_el = -math.asin(min(1.0, max(-1.0, float(m[1]))))
    rx_az = math.atan2(float(m[0]), float(m[2]))

    return Misalignment(
        length=length,
        x_dis=float(d[0]),
        y_dis=float(d[1]),
        tx_azimuth=tx_az,
        tx_elevation=tx_el,
        rx_azimuth=rx_az,
        rx_elevation=rx_el,
    )
