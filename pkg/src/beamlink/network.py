"""Multi-AP indoor deployment: association, interference SINR, coverage, CF.

Access points sit on a uniform ceiling grid firing straight down; users are
dropped uniformly over the floor plane facing up and associate with the
nearest AP. Coverage probability and networked consumption factors come from
Monte Carlo over user positions with reproducible substreams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import BOLTZMANN, ELEMENTARY_CHARGE, SPEED_OF_LIGHT
from .errors import DomainError
from .geometry import DOWNLINK, Pose
from .indoor_owc import (
    GaussianBeam,
    PhotoDetector,
    VcselLiv,
    channel_gain_owc,
    transmitter_power,
)
from .indoor_thz import (
    HornPattern,
    RoomScene,
    ThzChain,
    chain_efficiency,
    received_power,
    trace_multiray,
)
from .mathkit import QuadratureSpec, RngStream

__all__ = [
    "OwcDevice",
    "ThzDevice",
    "Deployment",
    "UserDrop",
    "ap_positions",
    "associate",
    "sinr_networked",
    "coverage_probability",
    "cf_networked",
]


@dataclass(frozen=True)
class OwcDevice:
    beam: GaussianBeam
    pd: PhotoDetector
    vcsel: VcselLiv


@dataclass(frozen=True)
class ThzDevice:
    frequency: float
    pattern: HornPattern
    chain: ThzChain
    kappa: float = 0.0

    def __post_init__(self):
        if not self.frequency > 0:
            raise DomainError("carrier frequency must be positive")
        if self.kappa < 0:
            raise DomainError("absorption coefficient cannot be negative")


@dataclass(frozen=True)
class Deployment:
    """N_t x N_t ceiling grid of identical APs plus the receiver plane height."""

    grid_side: int
    room: RoomScene
    ap_height: float
    rx_height: float
    technology: str  # "owc" | "thz"
    device: OwcDevice | ThzDevice
    transmit_power: float

    def __post_init__(self):
        if self.grid_side < 1:
            raise DomainError("grid side must be at least 1")
        if self.technology not in ("owc", "thz"):
            raise DomainError("technology must be 'owc' or 'thz'")
        if not 0.0 < self.rx_height < self.ap_height <= self.room.dimensions[2]:
            raise DomainError("need 0 < rx_height < ap_height <= room height")
        if not self.transmit_power >= 0:
            raise DomainError("transmit power cannot be negative")
        expected = OwcDevice if self.technology == "owc" else ThzDevice
        if not isinstance(self.device, expected):
            raise DomainError(f"{self.technology} deployment needs a {expected.__name__}")


@dataclass(frozen=True)
class UserDrop:
    """A set of receiver poses, usually drawn uniformly over the floor plane."""

    poses: tuple[Pose, ...]
    rng: RngStream | None = None

    @classmethod
    def sample(cls, dep: Deployment, count: int, rng: RngStream) -> "UserDrop":
        gen = rng.generator()
        wx, wy, _ = dep.room.dimensions
        xy = gen.random((count, 2)) * np.array([wx, wy])
        poses = tuple(
            Pose((x, y, dep.rx_height), elevation=math.pi / 2) for x, y in xy
        )
        return cls(poses=poses, rng=rng)


def ap_positions(dep: Deployment) -> np.ndarray:
    """AP coordinates: uniform grid with margin of half the grid pitch."""
    wx, wy, _ = dep.room.dimensions
    n = dep.grid_side
    xs = (np.arange(n) + 0.5) * wx / n
    ys = (np.arange(n) + 0.5) * wy / n
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    out = np.column_stack([gx.ravel(), gy.ravel(), np.full(n * n, dep.ap_height)])
    return out


def associate(dep: Deployment, user: Pose) -> int:
    """Index of the nearest AP; ties break to the lowest index."""
    aps = ap_positions(dep)
    d = np.linalg.norm(aps - user.position, axis=1)
    return int(np.argmin(d))


# quadrature tolerance for per-link OWC gains inside Monte Carlo loops
_NETWORK_QUAD = QuadratureSpec(relative_tolerance=1e-7, absolute_tolerance=1e-13,
                               max_subdivisions=8)


def _owc_gains(dep: Deployment, user: Pose) -> np.ndarray:
    device: OwcDevice = dep.device
    gains = np.zeros(dep.grid_side**2)
    for i, ap in enumerate(ap_positions(dep)):
        tx = Pose(ap, elevation=-math.pi / 2)
        gains[i] = channel_gain_owc(device.beam, tx, user, device.pd,
                                    spec=_NETWORK_QUAD, frame=DOWNLINK)
    return gains


def _thz_gains(dep: Deployment, user: Pose) -> np.ndarray:
    """Per-AP channel power gains |H|^2.

    With absorbing walls and no scatterers the multi-ray sum is exactly the
    line of sight, which vectorises over APs; otherwise each link is traced.
    """
    device: ThzDevice = dep.device
    aps = ap_positions(dep)
    if dep.room.is_absorbing():
        delta = user.position[None, :] - aps
        r = np.linalg.norm(delta, axis=1)
        # AP boresight straight down, user boresight straight up: both offsets
        # equal the polar angle of the connecting ray
        horiz = np.hypot(delta[:, 0], delta[:, 1])
        polar = np.arctan2(horiz, -delta[:, 2])
        pat = device.pattern
        g_tx = pat.max_gain * np.exp(-((polar / pat.hpbw_azimuth) ** 2))
        g_rx = g_tx
        spreading = SPEED_OF_LIGHT / (4.0 * math.pi * device.frequency * r)
        amp = np.sqrt(g_tx * g_rx) * spreading * np.exp(-0.5 * device.kappa * r)
        return amp**2
    gains = np.zeros(len(aps))
    for i, ap in enumerate(aps):
        tx = Pose(ap, elevation=-math.pi / 2)
        _, h = trace_multiray(dep.room, tx, user, device.pattern, device.pattern,
                              device.frequency, device.kappa)
        gains[i] = abs(h) ** 2
    return gains


def _owc_sinr_from_gains(dep: Deployment, gains: np.ndarray, serving: int,
                         bandwidth: float, temperature: float) -> float:
    device: OwcDevice = dep.device
    pd = device.pd
    p_t = dep.transmit_power
    signal_power = p_t**2 / 9.0
    r = pd.responsivity
    noise_figure = 10.0 ** (pd.tia_noise_figure_db / 10.0)
    rin = 10.0 ** (pd.rin_db_hz / 10.0)
    thermal = 4.0 * BOLTZMANN * temperature * bandwidth * noise_figure / pd.load_resistance
    shot = 2.0 * ELEMENTARY_CHARGE * bandwidth * r * p_t * float(np.sum(gains))
    intensity = bandwidth * rin * (r * p_t) ** 2 * float(np.sum(gains**2))
    sigma_sq = thermal + shot + intensity
    desired = (r * gains[serving]) ** 2 * signal_power
    interference = float(np.sum((r * np.delete(gains, serving)) ** 2)) * signal_power
    return desired / (interference + sigma_sq)


def _thz_sinr_from_gains(dep: Deployment, gains: np.ndarray, serving: int,
                         bandwidth: float, temperature: float) -> float:
    device: ThzDevice = dep.device
    chain = device.chain
    p_rec = received_power(dep.transmit_power, gains, chain)
    noise = BOLTZMANN * temperature * bandwidth * 10.0 ** (chain.noise_figure_db / 10.0)
    pn = 2.0 * (1.0 - math.exp(-chain.pn_floor * bandwidth / 4.0))
    p_serve = float(p_rec[serving])
    if p_serve == 0.0:
        return 0.0
    interference = float(np.sum(np.delete(p_rec, serving)))
    return 1.0 / (pn + (interference + noise) / p_serve)


def sinr_networked(dep: Deployment, user: Pose, bandwidth: float, temperature: float) -> float:
    """SINR of a user served by its nearest AP with all others interfering."""
    if not bandwidth > 0 or not temperature > 0:
        raise DomainError("bandwidth and temperature must be positive")
    gains = _owc_gains(dep, user) if dep.technology == "owc" else _thz_gains(dep, user)
    serving = associate(dep, user)
    if dep.technology == "owc":
        return _owc_sinr_from_gains(dep, gains, serving, bandwidth, temperature)
    return _thz_sinr_from_gains(dep, gains, serving, bandwidth, temperature)


def coverage_probability(
    dep: Deployment,
    threshold: float,
    n_drops: int,
    rng: RngStream,
    bandwidth: float,
    temperature: float,
):
    """(coverage probability, binomial standard error) over random user drops."""
    if n_drops < 1:
        raise DomainError("need at least one drop")
    if threshold < 0:
        raise DomainError("threshold cannot be negative")
    gen = rng.generator()
    wx, wy, _ = dep.room.dimensions
    xy = gen.random((n_drops, 2)) * np.array([wx, wy])
    covered = 0
    for x, y in xy:
        user = Pose((x, y, dep.rx_height), elevation=math.pi / 2)
        if sinr_networked(dep, user, bandwidth, temperature) > threshold:
            covered += 1
    p = covered / n_drops
    return p, math.sqrt(p * (1.0 - p) / n_drops)


def cf_networked(
    dep: Deployment,
    users: UserDrop,
    bandwidth: float,
    temperature: float,
    others_power_per_ap: float,
    receiver_power_per_user: float = 0.0,
) -> float:
    """Networked consumption factor: sum rate over summed consumed power.

    OWC APs consume the LIV-inverse electrical power plus P_others each, and
    each user its receiver power; THz APs consume P_t / H_Tx + P_DC + P_others
    each, and each user one more P_DC for its local oscillator.
    """
    if not others_power_per_ap > 0:
        raise DomainError("per-AP others power must be positive")
    n_aps = dep.grid_side**2
    rate = 0.0
    for user in users.poses:
        sinr = sinr_networked(dep, user, bandwidth, temperature)
        rate += bandwidth * math.log2(1.0 + sinr)

    if dep.technology == "owc":
        device: OwcDevice = dep.device
        per_ap = transmitter_power(device.vcsel, dep.transmit_power) + others_power_per_ap
        total = n_aps * per_ap + len(users.poses) * receiver_power_per_user
    else:
        device = dep.device
        h_tx = chain_efficiency(device.chain)
        per_ap = dep.transmit_power / h_tx + device.chain.lo_dc_power + others_power_per_ap
        total = n_aps * per_ap + len(users.poses) * device.chain.lo_dc_power
    return rate / total
