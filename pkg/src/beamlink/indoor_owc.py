"""VCSEL-based optical wireless link model.

Covers the Gaussian-beam misalignment channel, the lens/photodetector design
tradeoffs, the receiver noise budget and SNR, the VCSEL LIV non-linearity,
and the consumption factor of the full transmitter chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    BOLTZMANN,
    CARRIER_SATURATION_VELOCITY,
    ELEMENTARY_CHARGE,
    SEMICONDUCTOR_RELATIVE_PERMITTIVITY,
    VACUUM_PERMITTIVITY,
)
from .errors import DomainError, InfeasiblePowerError
from .geometry import LinkFrame, Misalignment, Pose, link_misalignment
from .mathkit import QuadratureSpec, integrate_disk

__all__ = [
    "GaussianBeam",
    "PhotoDetector",
    "VcselLiv",
    "Pose",
    "beam_spot",
    "channel_gain_owc",
    "hpbd_after_lens",
    "pd_bandwidth_area",
    "cpc_gain",
    "owc_noise_variance",
    "owc_snr",
    "vcsel_liv",
    "vcsel_liv_inverse",
    "cf_owc",
]

# Maximum CPC acceptance half-angle for which the concentrator still enlarges
# the effective area: (pi/4)/sin^2(theta) >= 1.
_MAX_USEFUL_CPC_ANGLE = math.asin(math.sqrt(math.pi) / 2.0)


@dataclass(frozen=True)
class GaussianBeam:
    """Laser beam parameters; the lens magnifies the primary waist."""

    wavelength: float
    primary_waist: float
    lens_magnification: float = 1.0

    def __post_init__(self):
        if not self.wavelength > 0 or not self.primary_waist > 0:
            raise DomainError("wavelength and primary waist must be positive")
        if not self.lens_magnification >= 1.0:
            raise DomainError("lens magnification must be >= 1")

    @property
    def waist(self) -> float:
        """Transformed waist after the lens."""
        return self.lens_magnification * self.primary_waist

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.waist**2 / self.wavelength


@dataclass(frozen=True)
class PhotoDetector:
    """Photodetector plus optional compound parabolic concentrator (CPC).

    cpc_half_angle = 0 means no concentrator; otherwise the effective
    collecting area is (pi/4) * G_CPC * area inside the acceptance cone and
    zero outside it.
    """

    area: float
    load_resistance: float
    responsivity: float
    cpc_half_angle: float = 0.0
    tia_noise_figure_db: float = 0.0
    rin_db_hz: float = -math.inf

    def __post_init__(self):
        if not self.area > 0:
            raise DomainError("photodetector area must be positive")
        if not self.load_resistance > 0 or not self.responsivity > 0:
            raise DomainError("load resistance and responsivity must be positive")
        if not 0.0 <= self.cpc_half_angle < math.pi / 2:
            raise DomainError("CPC acceptance half-angle must lie in [0, pi/2)")
        if self.cpc_half_angle > _MAX_USEFUL_CPC_ANGLE:
            raise DomainError(
                "CPC acceptance angle too wide: effective area would shrink below the bare area"
            )

    def effective_area(self) -> float:
        if self.cpc_half_angle == 0.0:
            return self.area
        _, area_factor = cpc_gain(self.cpc_half_angle)
        return area_factor * self.area


@dataclass(frozen=True)
class VcselLiv:
    """Measured LIV-curve parameters of the VCSEL plus its bias circuit."""

    efficiency: float          # W/A slope
    threshold_current: float   # A
    saturation_power: float    # W
    curve_fineness: float
    bias_voltage: float        # V
    bias_tee_efficiency: float = 1.0  # linear, (0, 1]

    def __post_init__(self):
        for name in ("efficiency", "threshold_current", "saturation_power",
                     "curve_fineness", "bias_voltage"):
            if not getattr(self, name) > 0:
                raise DomainError(f"VCSEL parameter {name} must be positive")
        if not 0.0 < self.bias_tee_efficiency <= 1.0:
            raise DomainError("bias tee efficiency must lie in (0, 1]")


def _spot_fields(beam: GaussianBeam, mis: Misalignment, x, y):
    """Beam width squared and squared transverse offset at receiver-plane points.

    Implements the unified misalignment model: the bracket c1 + x*c2 + y*c3 - c4
    is the axial coordinate of the point along the (tilted) beam axis; the
    squared distance from the beam axis is the full squared distance from the
    transmitter minus that axial part.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sat, cat = math.sin(mis.tx_azimuth), math.cos(mis.tx_azimuth)
    set_, cet = math.sin(mis.tx_elevation), math.cos(mis.tx_elevation)
    sar, car = math.sin(mis.rx_azimuth), math.cos(mis.rx_azimuth)
    ser, cer = math.sin(mis.rx_elevation), math.cos(mis.rx_elevation)

    c1 = mis.length * cet * cat
    c2 = cet * math.sin(mis.tx_azimuth - mis.rx_azimuth)
    c3 = ser * cet * math.cos(mis.tx_azimuth - mis.rx_azimuth) + cer * set_
    c4 = mis.x_dis * cet * sat - mis.y_dis * set_

    axial = c1 + x * c2 + y * c3 - c4
    w0 = beam.waist
    w_sq = w0 * w0 * (1.0 + (axial / beam.rayleigh_range) ** 2)

    t1 = mis.length - x * sar + y * car * ser
    t2 = x * car + y * sar * ser - mis.x_dis
    t3 = y * cer - mis.y_dis
    rho_sq = np.maximum(t1 * t1 + t2 * t2 + t3 * t3 - axial * axial, 0.0)
    return w_sq, rho_sq


def beam_spot(beam: GaussianBeam, tx: Pose, rx: Pose, point, frame: LinkFrame | None = None):
    """(w^2, rho^2) of the beam at a receiver-plane point (x, y).

    point may hold scalars or arrays; the frame argument fixes the nominal
    link axis (defaults to the line between the two positions).
    """
    mis = link_misalignment(tx, rx, frame)
    return _spot_fields(beam, mis, point[0], point[1])


def channel_gain_owc(
    beam: GaussianBeam,
    tx: Pose,
    rx: Pose,
    pd: PhotoDetector,
    spec: QuadratureSpec | None = None,
    frame: LinkFrame | None = None,
) -> float:
    """Fraction of the transmitted beam power collected by the detector.

    Integrates the normalised Gaussian intensity over the effective aperture
    disk in the receiver plane. When a CPC is fitted, beams arriving outside
    its acceptance cone contribute nothing; light arriving from behind the
    detector plane never contributes.
    """
    mis = link_misalignment(tx, rx, frame)
    incidence = mis.incidence_angle()
    if incidence >= math.pi / 2:
        return 0.0
    if pd.cpc_half_angle > 0.0 and incidence > pd.cpc_half_angle:
        return 0.0

    radius = math.sqrt(pd.effective_area() / math.pi)

    def intensity(x, y):
        w_sq, rho_sq = _spot_fields(beam, mis, x, y)
        return 2.0 / (math.pi * w_sq) * np.exp(-2.0 * rho_sq / w_sq)

    gain = integrate_disk(intensity, (0.0, 0.0), radius, spec)
    return min(max(gain, 0.0), 1.0)


def hpbd_after_lens(beam: GaussianBeam) -> float:
    """Half-power beam divergence full angle after the magnifying lens."""
    return math.sqrt(2.0 * math.log(2.0)) * beam.wavelength / (math.pi * beam.waist)


_PD_TRADEOFF = (
    4.0 * math.pi * VACUUM_PERMITTIVITY * SEMICONDUCTOR_RELATIVE_PERMITTIVITY
    / (0.44 * CARRIER_SATURATION_VELOCITY)
)


def pd_bandwidth_area(pd: PhotoDetector, direction: str, value: float) -> float:
    """Photodetector bandwidth-area tradeoff, B = 1/sqrt(k * R_L * A).

    direction is "bandwidth-from-area" (value in m^2, returns Hz) or
    "area-from-bandwidth" (value in Hz, returns m^2).
    """
    if not value > 0:
        raise DomainError(f"tradeoff input must be positive, got {value}")
    k = _PD_TRADEOFF * pd.load_resistance
    if direction == "bandwidth-from-area":
        return 1.0 / math.sqrt(k * value)
    if direction == "area-from-bandwidth":
        return 1.0 / (k * value * value)
    raise DomainError(f"unknown tradeoff direction {direction!r}")


def cpc_gain(cpc_half_angle: float):
    """(gain, effective-area factor) of a CPC with the given acceptance half-angle."""
    if not 0.0 < cpc_half_angle < math.pi / 2:
        raise DomainError("CPC acceptance half-angle must lie in (0, pi/2)")
    gain = 1.0 / math.sin(cpc_half_angle) ** 2
    return gain, math.pi / 4.0 * gain


def owc_noise_variance(
    pd: PhotoDetector, bandwidth: float, temperature: float, received_power: float
) -> float:
    """Receiver noise variance: thermal + shot + relative intensity noise [A^2]."""
    if not bandwidth > 0 or not temperature > 0:
        raise DomainError("bandwidth and temperature must be positive")
    if received_power < 0:
        raise DomainError("received optical power cannot be negative")
    noise_figure = 10.0 ** (pd.tia_noise_figure_db / 10.0)
    rin = 10.0 ** (pd.rin_db_hz / 10.0)
    photocurrent = pd.responsivity * received_power
    thermal = 4.0 * BOLTZMANN * temperature * bandwidth * noise_figure / pd.load_resistance
    shot = 2.0 * ELEMENTARY_CHARGE * bandwidth * photocurrent
    intensity = bandwidth * rin * photocurrent**2
    return thermal + shot + intensity


def owc_snr(
    beam: GaussianBeam,
    tx: Pose,
    rx: Pose,
    pd: PhotoDetector,
    transmit_power: float,
    bandwidth: float,
    temperature: float,
    spec: QuadratureSpec | None = None,
    frame: LinkFrame | None = None,
) -> float:
    """Electrical SNR of the DCO-OFDM link; signal power is P_t^2 / 9."""
    if transmit_power < 0:
        raise DomainError("transmit power cannot be negative")
    if transmit_power == 0.0:
        return 0.0
    gain = channel_gain_owc(beam, tx, rx, pd, spec, frame)
    return owc_snr_from_gain(gain, pd, transmit_power, bandwidth, temperature)


def owc_snr_from_gain(
    gain: float, pd: PhotoDetector, transmit_power: float, bandwidth: float, temperature: float
) -> float:
    """SNR given an already computed channel gain."""
    signal_power = transmit_power**2 / 9.0
    sigma_sq = owc_noise_variance(pd, bandwidth, temperature, gain * transmit_power)
    return (pd.responsivity * gain) ** 2 * signal_power / sigma_sq


def vcsel_liv(liv: VcselLiv, drive_current: float) -> float:
    """Optical output power for a drive current, with threshold and soft saturation."""
    if drive_current < 0:
        raise DomainError("drive current cannot be negative")
    if drive_current <= liv.threshold_current:
        return 0.0
    linear = liv.efficiency * (drive_current - liv.threshold_current)
    n2 = 2.0 * liv.curve_fineness
    return linear / (1.0 + (linear / liv.saturation_power) ** n2) ** (1.0 / n2)


def vcsel_liv_inverse(liv: VcselLiv, optical_power: float) -> float:
    """Drive current needed for the requested optical power.

    The LIV curve inverts in closed form below saturation; at or above
    saturation no finite current suffices.
    """
    if optical_power < 0:
        raise DomainError("optical power cannot be negative")
    if optical_power >= liv.saturation_power:
        raise InfeasiblePowerError(
            f"requested {optical_power} W but the VCSEL saturates at {liv.saturation_power} W"
        )
    if optical_power == 0.0:
        return liv.threshold_current
    n2 = 2.0 * liv.curve_fineness
    linear = optical_power / (1.0 - (optical_power / liv.saturation_power) ** n2) ** (1.0 / n2)
    return liv.threshold_current + linear / liv.efficiency


def transmitter_power(liv: VcselLiv, transmit_power: float) -> float:
    """Electrical power drawn by the biased VCSEL to emit transmit_power."""
    current = vcsel_liv_inverse(liv, transmit_power)
    return current * liv.bias_voltage / liv.bias_tee_efficiency


def cf_owc(
    snr: float,
    bandwidth: float,
    liv: VcselLiv,
    transmit_power: float,
    receiver_power: float = 0.0,
    others_power: float = 0.0,
) -> float:
    """Consumption factor: achievable rate over total consumed power [bit/s/W]."""
    if snr < 0:
        raise DomainError("SNR cannot be negative")
    if not others_power > 0:
        raise DomainError("others_power must be positive so the denominator is never zero")
    total = transmitter_power(liv, transmit_power) + receiver_power + others_power
    return bandwidth * math.log2(1.0 + snr) / total
