"""Indoor terahertz link model.

Gaussian horn antenna patterns, a multi-ray channel (line of sight plus
image-source reflections and deterministic scatterer clouds) over a box room,
the phase-noise-limited SINR bound, and the cascaded-chain consumption factor.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping

import numpy as np

from .constants import BOLTZMANN, REFERENCE_TEMPERATURE, SPEED_OF_LIGHT
from .errors import DomainError, GeometryError, OutOfBandError
from .geometry import Pose

__all__ = [
    "HornPattern",
    "SurfaceMaterial",
    "RoomScene",
    "ThzChain",
    "ChainStage",
    "Ray",
    "RaySet",
    "AbsorptionTable",
    "antenna_gain",
    "pattern_gain_towards",
    "absorption_coefficient",
    "default_absorption_table",
    "los_transfer",
    "surface_coefficients",
    "trace_multiray",
    "thz_sinr",
    "phase_noise_ceiling",
    "chain_efficiency",
    "link_efficiency",
    "received_power",
    "cf_thz",
]

FACES = ("x0", "x1", "y0", "y1", "z0", "z1")


@dataclass(frozen=True)
class HornPattern:
    """Gaussian approximation of a horn antenna radiation pattern."""

    max_gain: float
    hpbw_azimuth: float
    hpbw_elevation: float
    boresight_azimuth: float = 0.0
    boresight_elevation: float = 0.0

    def __post_init__(self):
        if not self.max_gain >= 1.0:
            raise DomainError("antenna maximum gain must be >= 1")
        if not self.hpbw_azimuth > 0 or not self.hpbw_elevation > 0:
            raise DomainError("antenna beamwidths must be positive")

    @classmethod
    def from_gain(cls, max_gain: float) -> "HornPattern":
        """Symmetric pattern with beamwidth from the gain-beamwidth relation."""
        if not max_gain >= 1.0:
            raise DomainError("antenna maximum gain must be >= 1")
        bw = 2.0 * math.sqrt(math.pi / max_gain)
        return cls(max_gain=max_gain, hpbw_azimuth=bw, hpbw_elevation=bw)

    @classmethod
    def from_hpbw(cls, beamwidth: float) -> "HornPattern":
        """Symmetric pattern with gain from the gain-beamwidth relation."""
        if not beamwidth > 0:
            raise DomainError("beamwidth must be positive")
        return cls(max_gain=4.0 * math.pi / beamwidth**2,
                   hpbw_azimuth=beamwidth, hpbw_elevation=beamwidth)


def antenna_gain(pattern: HornPattern, azimuth, elevation):
    """Gaussian-pattern gain at the given azimuth/elevation angles."""
    da = (np.asarray(azimuth, dtype=float) - pattern.boresight_azimuth) / pattern.hpbw_azimuth
    de = (np.asarray(elevation, dtype=float) - pattern.boresight_elevation) / pattern.hpbw_elevation
    out = pattern.max_gain * np.exp(-(da * da) - (de * de))
    return float(out) if out.ndim == 0 else out


def pattern_gain_towards(pattern: HornPattern, pose: Pose, direction) -> float:
    """Pattern gain of an antenna at ``pose`` towards a world-frame direction."""
    theta_a, theta_e = pose.direction_angles(direction)
    return antenna_gain(pattern, theta_a, theta_e)


@dataclass(frozen=True)
class SurfaceMaterial:
    """Wall material: real refractive index plus rms surface roughness [m]."""

    refractive_index: float
    roughness: float = 0.0

    def __post_init__(self):
        if not self.refractive_index >= 1.0:
            raise DomainError("refractive index must be >= 1")
        if self.roughness < 0:
            raise DomainError("roughness cannot be negative")


#: Perfectly transparent walls: Fresnel reflection vanishes for n = 1.
ABSORBING = SurfaceMaterial(refractive_index=1.0)


@dataclass(frozen=True)
class RoomScene:
    """Axis-aligned box room with per-face materials and scatterer clouds."""

    dimensions: tuple[float, float, float]
    materials: Mapping[str, SurfaceMaterial]
    scatterers_per_reflection: int = 0
    scatter_cloud_radius: float = 0.1
    max_reflection_order: int = 2

    def __post_init__(self):
        dims = tuple(float(d) for d in self.dimensions)
        if len(dims) != 3 or any(d <= 0 for d in dims):
            raise DomainError("room dimensions must be three positive lengths")
        object.__setattr__(self, "dimensions", dims)
        missing = [f for f in FACES if f not in self.materials]
        if missing:
            raise DomainError(f"missing materials for faces: {missing}")
        if self.scatterers_per_reflection < 0:
            raise DomainError("scatterer count cannot be negative")
        if self.max_reflection_order not in (1, 2):
            raise DomainError("reflection order must be 1 or 2")

    @classmethod
    def uniform(cls, dimensions, material: SurfaceMaterial, **kwargs) -> "RoomScene":
        return cls(dimensions=tuple(dimensions), materials={f: material for f in FACES}, **kwargs)

    @classmethod
    def absorbing(cls, dimensions, **kwargs) -> "RoomScene":
        return cls.uniform(dimensions, ABSORBING, **kwargs)

    def is_absorbing(self) -> bool:
        return all(m.refractive_index == 1.0 for m in self.materials.values())

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= 0.0) and np.all(p <= np.asarray(self.dimensions)))


@dataclass(frozen=True)
class ChainStage:
    """One cascaded transceiver component: linear power gain and efficiency."""

    gain: float
    efficiency: float

    def __post_init__(self):
        if not self.gain > 0:
            raise DomainError("stage gain must be positive (linear)")
        if not 0.0 < self.efficiency <= 1.0:
            raise DomainError("stage efficiency must lie in (0, 1]")


@dataclass(frozen=True)
class ThzChain:
    """Cascaded transceiver chain plus oscillator and noise parameters."""

    stages: tuple[ChainStage, ...]
    lo_dc_power: float = 0.0
    receiver_gain: float = 1.0
    noise_figure_db: float = 0.0
    pn_floor: float = 0.0  # linear value of the dBc/Hz phase-noise floor [1/Hz]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if self.lo_dc_power < 0 or not self.receiver_gain > 0:
            raise DomainError("invalid chain parameters")
        if self.pn_floor < 0:
            raise DomainError("phase-noise floor must be non-negative")

    def gain_product(self) -> float:
        out = 1.0
        for s in self.stages:
            out *= s.gain
        return out


@dataclass(frozen=True)
class Ray:
    """One propagation path with its complex contribution to H(f)."""

    kind: str  # LoS | Ref | Sca | Dif
    path_length: float
    delay: float
    amplitude: complex
    points: tuple = ()   # intermediate bounce/scatter points
    faces: tuple = ()    # faces touched, parallel to points


@dataclass(frozen=True)
class RaySet:
    rays: tuple[Ray, ...]

    def transfer(self) -> complex:
        return complex(sum(r.amplitude for r in self.rays))

    def of_kind(self, kind: str) -> list[Ray]:
        return [r for r in self.rays if r.kind == kind]


class AbsorptionTable:
    """Molecular absorption coefficient on a (frequency, relative humidity) grid."""

    def __init__(self, frequencies_hz, humidities, kappa):
        f = np.asarray(frequencies_hz, dtype=float)
        h = np.asarray(humidities, dtype=float)
        k = np.asarray(kappa, dtype=float)
        if f.ndim != 1 or h.ndim != 1 or k.shape != (f.size, h.size):
            raise DomainError("absorption table shape mismatch")
        if np.any(np.diff(f) <= 0) or np.any(np.diff(h) <= 0):
            raise DomainError("absorption table axes must be strictly increasing")
        if np.any(k < 0):
            raise DomainError("absorption coefficients cannot be negative")
        self.frequencies = f
        self.humidities = h
        self.kappa = k

    @classmethod
    def from_csv(cls, path) -> "AbsorptionTable":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"frequency_hz", "rh_fraction", "kappa_per_m"}
            if reader.fieldnames is None or not required.issubset(reader.fieldnames):
                raise DomainError(
                    f"absorption table must have columns {sorted(required)}, got {reader.fieldnames}"
                )
            for row in reader:
                rows.append((float(row["frequency_hz"]), float(row["rh_fraction"]),
                             float(row["kappa_per_m"])))
        freqs = np.unique([r[0] for r in rows])
        hums = np.unique([r[1] for r in rows])
        grid = np.full((freqs.size, hums.size), np.nan)
        fi = {v: i for i, v in enumerate(freqs)}
        hi = {v: i for i, v in enumerate(hums)}
        for fv, hv, kv in rows:
            grid[fi[fv], hi[hv]] = kv
        if np.any(np.isnan(grid)):
            raise DomainError("absorption table is not a complete rectangular grid")
        return cls(freqs, hums, grid)

    def coefficient(self, frequency: float, relative_humidity: float) -> float:
        if not self.frequencies[0] <= frequency <= self.frequencies[-1]:
            raise OutOfBandError(
                f"frequency {frequency:.4g} Hz outside table band "
                f"[{self.frequencies[0]:.4g}, {self.frequencies[-1]:.4g}] Hz"
            )
        if not 0.0 <= relative_humidity <= 1.0:
            raise DomainError("relative humidity must lie in [0, 1]")
        rh = min(max(relative_humidity, self.humidities[0]), self.humidities[-1])
        i = int(np.searchsorted(self.frequencies, frequency, side="right") - 1)
        i = min(max(i, 0), self.frequencies.size - 2)
        j = int(np.searchsorted(self.humidities, rh, side="right") - 1)
        j = min(max(j, 0), self.humidities.size - 2)
        f0, f1 = self.frequencies[i], self.frequencies[i + 1]
        h0, h1 = self.humidities[j], self.humidities[j + 1]
        tf = (frequency - f0) / (f1 - f0)
        th = (rh - h0) / (h1 - h0)
        k = self.kappa
        return float(
            (1 - tf) * (1 - th) * k[i, j] + tf * (1 - th) * k[i + 1, j]
            + (1 - tf) * th * k[i, j + 1] + tf * th * k[i + 1, j + 1]
        )


@lru_cache(maxsize=1)
def default_absorption_table() -> AbsorptionTable:
    path = resources.files("beamlink.data").joinpath("absorption_default.csv")
    with resources.as_file(path) as p:
        return AbsorptionTable.from_csv(p)


def _saturation_pressure(temperature: float) -> float:
    """Magnus approximation of water-vapour saturation pressure [Pa]."""
    t = temperature - 273.15
    return 610.94 * math.exp(17.625 * t / (t + 243.04))


def absorption_coefficient(
    frequency: float,
    relative_humidity: float,
    temperature: float = REFERENCE_TEMPERATURE,
    pressure: float | None = None,
    table: AbsorptionTable | None = None,
) -> float:
    """Medium absorption coefficient kappa(f) [1/m] from the table backend.

    Temperature rescales the humidity axis through the saturation-pressure
    ratio (water-vapour density); the pressure argument is accepted for
    interface completeness but the default table is defined at standard
    pressure and does not use it.
    """
    if not temperature > 0:
        raise DomainError("temperature must be positive")
    if table is None:
        table = default_absorption_table()
    scale = _saturation_pressure(temperature) / _saturation_pressure(REFERENCE_TEMPERATURE)
    rh_eff = min(relative_humidity * scale, 1.0)
    return table.coefficient(frequency, rh_eff)


def _spreading(frequency: float, distance: float) -> float:
    return SPEED_OF_LIGHT / (4.0 * math.pi * frequency * distance)


def _ray_amplitude(frequency, total_length, gain_amp, coeff, kappa) -> complex:
    delay = total_length / SPEED_OF_LIGHT
    mag = gain_amp * _spreading(frequency, total_length) * math.exp(-0.5 * kappa * total_length)
    phase = -2.0 * math.pi * frequency * delay
    return coeff * mag * complex(math.cos(phase), math.sin(phase))


def los_transfer(
    frequency: float,
    tx: Pose,
    rx: Pose,
    tx_pattern: HornPattern,
    rx_pattern: HornPattern,
    kappa: float = 0.0,
) -> complex:
    """Line-of-sight transfer function: antenna gains, spreading and absorption."""
    delta = rx.position - tx.position
    r = float(np.linalg.norm(delta))
    if r == 0.0:
        raise GeometryError("transmitter and receiver coincide")
    g_tx = pattern_gain_towards(tx_pattern, tx, delta)
    g_rx = pattern_gain_towards(rx_pattern, rx, -delta)
    return _ray_amplitude(frequency, r, math.sqrt(g_tx * g_rx), 1.0 + 0.0j, kappa)


def surface_coefficients(material: SurfaceMaterial, frequency: float, incidence_angle: float):
    """(reflection, scattering) amplitude coefficients of a rough wall.

    Reflection is the TE Fresnel coefficient times the Rayleigh roughness
    factor; the scattering amplitude carries the power that roughness removed
    from the specular ray, so it vanishes on smooth walls.
    """
    if not 0.0 <= incidence_angle < math.pi / 2:
        raise DomainError("incidence angle must lie in [0, pi/2)")
    n = material.refractive_index
    cos_i = math.cos(incidence_angle)
    sin_t = math.sin(incidence_angle) / n
    cos_t = math.sqrt(max(0.0, 1.0 - sin_t * sin_t))
    fresnel = (cos_i - n * cos_t) / (cos_i + n * cos_t)
    rayleigh_arg = 4.0 * math.pi * frequency * material.roughness * cos_i / SPEED_OF_LIGHT
    rough_factor = math.exp(-0.5 * rayleigh_arg**2)
    reflection = fresnel * rough_factor
    scatter = math.sqrt(max(0.0, fresnel**2 - reflection**2))
    return complex(reflection), complex(scatter)


_FACE_AXIS = {"x0": 0, "x1": 0, "y0": 1, "y1": 1, "z0": 2, "z1": 2}


def _face_plane(scene: RoomScene, face: str) -> tuple[int, float]:
    axis = _FACE_AXIS[face]
    value = 0.0 if face.endswith("0") else scene.dimensions[axis]
    return axis, value


def _mirror(point: np.ndarray, axis: int, value: float) -> np.ndarray:
    out = point.copy()
    out[axis] = 2.0 * value - out[axis]
    return out


def _segment_face_hit(scene, face, start, end):
    """Intersection of segment start->end with a face plane, if inside the wall."""
    axis, value = _face_plane(scene, face)
    denom = end[axis] - start[axis]
    if denom == 0.0:
        return None
    t = (value - start[axis]) / denom
    if not 0.0 < t < 1.0:
        return None
    point = start + t * (end - start)
    dims = scene.dimensions
    for other in range(3):
        if other == axis:
            continue
        if not -1e-12 <= point[other] <= dims[other] + 1e-12:
            return None
    return point


def _face_normal(face: str) -> np.ndarray:
    axis = _FACE_AXIS[face]
    normal = np.zeros(3)
    normal[axis] = 1.0 if face.endswith("0") else -1.0  # inward
    return normal


def _incidence(point_from: np.ndarray, at: np.ndarray, face: str) -> float:
    v = at - point_from
    v = v / np.linalg.norm(v)
    c = abs(float(v @ _face_normal(face)))
    return math.acos(min(1.0, c))


def _face_tangents(face: str):
    axis = _FACE_AXIS[face]
    others = [a for a in range(3) if a != axis]
    t1 = np.zeros(3)
    t2 = np.zeros(3)
    t1[others[0]] = 1.0
    t2[others[1]] = 1.0
    return t1, t2


def _scatter_points(scene: RoomScene, face: str, center: np.ndarray):
    """Deterministic ring of scatterer positions around a reflection point."""
    count = scene.scatterers_per_reflection
    if count == 0:
        return []
    t1, t2 = _face_tangents(face)
    dims = np.asarray(scene.dimensions)
    points = []
    for q in range(count):
        ang = 2.0 * math.pi * (q + 0.5) / count
        p = center + scene.scatter_cloud_radius * (math.cos(ang) * t1 + math.sin(ang) * t2)
        if np.all(p >= -1e-12) and np.all(p <= dims + 1e-12):
            points.append(np.clip(p, 0.0, dims))
    return points


def trace_multiray(
    scene: RoomScene,
    tx: Pose,
    rx: Pose,
    tx_pattern: HornPattern,
    rx_pattern: HornPattern,
    frequency: float,
    kappa: float = 0.0,
):
    """Trace LoS, image-source reflections and scatterer-cloud rays.

    Returns (RaySet, H) where H is the coherent sum of all per-ray transfer
    functions. With fully absorbing walls the result reduces exactly to the
    line-of-sight transfer.
    """
    if not scene.contains(tx.position) or not scene.contains(rx.position):
        raise GeometryError("poses must lie inside the room")
    delta = rx.position - tx.position
    r_los = float(np.linalg.norm(delta))
    if r_los == 0.0:
        raise GeometryError("transmitter and receiver coincide")

    rays: list[Ray] = []

    amp = los_transfer(frequency, tx, rx, tx_pattern, rx_pattern, kappa)
    rays.append(Ray("LoS", r_los, r_los / SPEED_OF_LIGHT, amp))

    def add_bounce(points, faces):
        """Specular ray through the given ordered reflection points."""
        legs = [tx.position, *points, rx.position]
        total = 0.0
        for a, b in zip(legs[:-1], legs[1:]):
            total += float(np.linalg.norm(b - a))
        coeff = 1.0 + 0.0j
        for i, (p, face) in enumerate(zip(points, faces)):
            theta = _incidence(legs[i], p, face)
            refl, _ = surface_coefficients(scene.materials[face], frequency, theta)
            coeff *= refl
        if coeff == 0.0:
            return
        g_tx = pattern_gain_towards(tx_pattern, tx, points[0] - tx.position)
        g_rx = pattern_gain_towards(rx_pattern, rx, points[-1] - rx.position)
        amp = _ray_amplitude(frequency, total, math.sqrt(g_tx * g_rx), coeff, kappa)
        rays.append(Ray("Ref", total, total / SPEED_OF_LIGHT, amp,
                        points=tuple(map(tuple, points)), faces=tuple(faces)))

    first_order_hits = []
    for face in FACES:
        axis, value = _face_plane(scene, face)
        image = _mirror(tx.position, axis, value)
        hit = _segment_face_hit(scene, face, image, rx.position)
        if hit is None:
            continue
        first_order_hits.append((face, hit))
        add_bounce([hit], [face])

    if scene.max_reflection_order >= 2:
        for face_a in FACES:
            axis_a, value_a = _face_plane(scene, face_a)
            image_a = _mirror(tx.position, axis_a, value_a)
            for face_b in FACES:
                if face_b == face_a:
                    continue
                axis_b, value_b = _face_plane(scene, face_b)
                image_ab = _mirror(image_a, axis_b, value_b)
                hit_b = _segment_face_hit(scene, face_b, image_ab, rx.position)
                if hit_b is None:
                    continue
                hit_a = _segment_face_hit(scene, face_a, image_a, hit_b)
                if hit_a is None:
                    continue
                add_bounce([hit_a, hit_b], [face_a, face_b])

    for face, center in first_order_hits:
        cloud = _scatter_points(scene, face, center)
        if not cloud:
            continue
        material = scene.materials[face]
        normal = _face_normal(face)
        share = 1.0 / math.sqrt(len(cloud))
        for point in cloud:
            s1v = point - tx.position
            s2v = rx.position - point
            s1 = float(np.linalg.norm(s1v))
            s2 = float(np.linalg.norm(s2v))
            if s1 == 0.0 or s2 == 0.0:
                continue
            # symmetric in the two legs so the trace is reciprocal
            theta_in = _incidence(tx.position, point, face)
            theta_out = _incidence(rx.position, point, face)
            _, scat_in = surface_coefficients(material, frequency, theta_in)
            _, scat_out = surface_coefficients(material, frequency, theta_out)
            scat = math.sqrt(abs(scat_in) * abs(scat_out))
            if scat == 0.0:
                continue
            # directive lobe about the specular direction
            inc_dir = s1v / s1
            spec_dir = inc_dir - 2.0 * float(inc_dir @ normal) * normal
            cos_psi = float(np.clip((s2v / s2) @ spec_dir, -1.0, 1.0))
            lobe = (1.0 + cos_psi) / 2.0
            g_tx = pattern_gain_towards(tx_pattern, tx, s1v)
            g_rx = pattern_gain_towards(rx_pattern, rx, -s2v)
            total = s1 + s2
            amp = _ray_amplitude(frequency, total, math.sqrt(g_tx * g_rx),
                                 scat * lobe * share, kappa)
            rays.append(Ray("Sca", total, total / SPEED_OF_LIGHT, amp,
                            points=(tuple(point),), faces=(face,)))

    ray_set = RaySet(tuple(rays))
    return ray_set, ray_set.transfer()


def phase_noise_ceiling(pn_floor: float, bandwidth: float) -> float:
    """SINR upper bound imposed by the local-oscillator phase-noise floor."""
    pn = 2.0 * (1.0 - math.exp(-pn_floor * bandwidth / 4.0))
    return math.inf if pn == 0.0 else 1.0 / pn


def thz_sinr(received_power: float, bandwidth: float, temperature: float, chain: ThzChain) -> float:
    """Phase-noise-bounded SINR: 1 / (2(1 - e^{-K0 B / 4}) + 1/gamma_0)."""
    if received_power < 0:
        raise DomainError("received power cannot be negative")
    if not bandwidth > 0 or not temperature > 0:
        raise DomainError("bandwidth and temperature must be positive")
    noise = BOLTZMANN * temperature * bandwidth * 10.0 ** (chain.noise_figure_db / 10.0)
    pn = 2.0 * (1.0 - math.exp(-chain.pn_floor * bandwidth / 4.0))
    if received_power == 0.0:
        return 0.0
    return 1.0 / (pn + noise / received_power)


def chain_efficiency(chain: ThzChain) -> float:
    """Cascaded power efficiency of a transceiver chain."""
    stages = chain.stages
    if not stages:
        raise DomainError("chain must contain at least one stage")
    total = 1.0
    for n, stage in enumerate(stages):
        downstream = 1.0
        for later in stages[n + 1:]:
            downstream *= later.gain
        total += (1.0 / stage.efficiency - 1.0) / downstream
    return 1.0 / total


def link_efficiency(h_tx: float, h_rx: float, channel_gain: float, receiver_gain: float) -> float:
    """Combined power efficiency of transmitter, channel, and receiver."""
    if not 0.0 < channel_gain <= 1.0:
        raise DomainError("channel power gain must lie in (0, 1]")
    if not receiver_gain > 0:
        raise DomainError("receiver gain must be positive")
    inv = (
        1.0 / h_rx
        + (1.0 / channel_gain - 1.0) / receiver_gain
        + (1.0 / h_tx - 1.0) / (receiver_gain * channel_gain)
    )
    return 1.0 / inv


def received_power(transmit_power: float, channel_gain, chain: ThzChain):
    """Signal power after the receiver chain: P_t * H_thz * prod(G_i).

    channel_gain may be a scalar or an array of per-link gains.
    """
    if transmit_power < 0 or np.any(np.asarray(channel_gain) < 0):
        raise DomainError("power and gain cannot be negative")
    return transmit_power * channel_gain * chain.gain_product()


def cf_thz(
    sinr: float,
    bandwidth: float,
    received: float,
    h_link: float,
    chain: ThzChain,
    others_power: float,
) -> float:
    """Consumption factor of the terahertz link [bit/s/W]."""
    if sinr < 0:
        raise DomainError("SINR cannot be negative")
    denominator = received / h_link + 2.0 * chain.lo_dc_power + others_power
    if not denominator > 0:
        raise DomainError("total consumed power must be positive")
    return bandwidth * math.log2(1.0 + sinr) / denominator
