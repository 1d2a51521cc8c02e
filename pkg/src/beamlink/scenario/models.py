"""Metric evaluation for each scenario kind.

Builds model objects from validated parameter dictionaries and computes the
requested metrics for one sweep point. Monte Carlo metrics draw from the
per-row RngStream so results are independent of worker scheduling.
"""

from __future__ import annotations

import math

from .. import indoor_owc as owc
from .. import indoor_thz as thz
from .. import network as net
from .. import outdoor
from ..geometry import DOWNLINK, Pose
from ..mathkit import RngStream

_FACING_UP = math.pi / 2
_FACING_DOWN = -math.pi / 2


def _dbm_to_watt(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def _db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _indoor_poses(params: dict, tx_height: float | None = None, base_xy=(1.5, 1.5)):
    """Ceiling transmitter and upward receiver with the configured misalignment."""
    length = params["link_length_m"]
    z_top = tx_height if tx_height is not None else length
    tilt = math.radians(params["tx_tilt_deg"])
    tilt_az = math.radians(params["tx_tilt_azimuth_deg"])
    rx_tilt = math.radians(params["rx_tilt_deg"])
    tx = Pose(
        (base_xy[0] + params["tx_displacement_x_m"],
         base_xy[1] + params["tx_displacement_y_m"],
         z_top),
        azimuth=tilt_az,
        elevation=_FACING_DOWN + tilt,
    )
    rx = Pose((base_xy[0], base_xy[1], z_top - length),
              azimuth=0.0, elevation=_FACING_UP - rx_tilt)
    return tx, rx


def _owc_device(params: dict, bandwidth: float):
    d = params["device"]
    beam = owc.GaussianBeam(
        wavelength=d["wavelength_m"],
        primary_waist=d["primary_waist_m"],
        lens_magnification=d["lens_magnification"],
    )
    area = d["pd_area_m2"]
    if area is None:
        probe = owc.PhotoDetector(area=1.0, load_resistance=d["load_resistance_ohm"],
                                  responsivity=d["responsivity_a_per_w"])
        area = owc.pd_bandwidth_area(probe, "area-from-bandwidth", bandwidth)
    pd = owc.PhotoDetector(
        area=area,
        load_resistance=d["load_resistance_ohm"],
        responsivity=d["responsivity_a_per_w"],
        cpc_half_angle=math.radians(d["cpc_half_angle_deg"]),
        tia_noise_figure_db=d["tia_noise_figure_db"],
        rin_db_hz=d["rin_db_hz"],
    )
    vcsel = owc.VcselLiv(
        efficiency=d["vcsel_efficiency_w_per_a"],
        threshold_current=d["vcsel_threshold_current_a"],
        saturation_power=d["vcsel_saturation_power_w"],
        curve_fineness=d["vcsel_curve_fineness"],
        bias_voltage=d["vcsel_bias_voltage_v"],
        bias_tee_efficiency=_db_to_linear(d["bias_tee_efficiency_db"]),
    )
    return beam, pd, vcsel


def _thz_pattern(d: dict) -> thz.HornPattern:
    if d["max_gain_dbi"] is not None:
        return thz.HornPattern.from_gain(_db_to_linear(d["max_gain_dbi"]))
    return thz.HornPattern.from_hpbw(math.radians(d["hpbw_deg"]))


def _thz_chain(d: dict) -> thz.ThzChain:
    gains = d["stage_gains_db"]
    effs = d["stage_efficiencies"]
    if len(gains) != len(effs):
        raise ValueError("stage_gains_db and stage_efficiencies must have equal length")
    stages = tuple(
        thz.ChainStage(gain=_db_to_linear(g), efficiency=e) for g, e in zip(gains, effs)
    )
    return thz.ThzChain(
        stages=stages,
        lo_dc_power=d["lo_dc_power_w"],
        receiver_gain=_db_to_linear(d["receiver_gain_db"]),
        noise_figure_db=d["noise_figure_db"],
        pn_floor=_db_to_linear(d["pn_floor_dbc_hz"]),
    )


def _room(params: dict) -> thz.RoomScene:
    r = params["room"]
    dims = tuple(r["dimensions_m"])
    if r["absorbing"]:
        material = thz.ABSORBING
    else:
        material = thz.SurfaceMaterial(refractive_index=r["refractive_index"],
                                       roughness=r["roughness_m"])
    return thz.RoomScene.uniform(
        dims, material,
        scatterers_per_reflection=r["scatterers_per_reflection"],
        scatter_cloud_radius=r["scatter_cloud_radius_m"],
        max_reflection_order=r["max_reflection_order"],
    )


def _kappa(params: dict, frequency: float) -> float:
    if not params.get("use_absorption", False):
        return 0.0
    return thz.absorption_coefficient(frequency, params["relative_humidity"])


def evaluate_indoor_siso_owc(params: dict, metrics: list[str], rng: RngStream) -> dict:
    bandwidth = params["bandwidth_hz"]
    temperature = params["temperature_k"]
    p_t = _dbm_to_watt(params["tx_power_dbm"])
    beam, pd, vcsel = _owc_device(params, bandwidth)
    tx, rx = _indoor_poses(params, tx_height=2.95)
    gain = owc.channel_gain_owc(beam, tx, rx, pd, frame=DOWNLINK)
    out = {}
    snr = owc.owc_snr_from_gain(gain, pd, p_t, bandwidth, temperature) if p_t > 0 else 0.0
    if "snr" in metrics:
        out["snr"] = snr
    if "cf" in metrics:
        out["cf"] = owc.cf_owc(snr, bandwidth, vcsel, p_t,
                               receiver_power=params["p_receiver_w"],
                               others_power=params["p_others_w"])
    if "channel_gain_db" in metrics:
        out["channel_gain_db"] = 10.0 * math.log10(gain) if gain > 0 else -math.inf
    return out


def evaluate_indoor_siso_thz(params: dict, metrics: list[str], rng: RngStream) -> dict:
    bandwidth = params["bandwidth_hz"]
    temperature = params["temperature_k"]
    p_t = _dbm_to_watt(params["tx_power_dbm"])
    d = params["device"]
    pattern = _thz_pattern(d)
    chain = _thz_chain(d)
    room = _room(params)
    kappa = _kappa(params, d["frequency_hz"])
    base_xy = (room.dimensions[0] / 2.0, room.dimensions[1] / 2.0)
    tx, rx = _indoor_poses(params, tx_height=params["tx_height_m"], base_xy=base_xy)
    _, h = thz.trace_multiray(room, tx, rx, pattern, pattern, d["frequency_hz"], kappa)
    h_thz = abs(h) ** 2
    p_rec = thz.received_power(p_t, h_thz, chain)
    sinr = thz.thz_sinr(p_rec, bandwidth, temperature, chain)
    out = {}
    if "snr" in metrics:
        out["snr"] = sinr
    if "sinr" in metrics:
        out["sinr"] = sinr
    if "cf" in metrics:
        h_tx = thz.chain_efficiency(chain)
        h_link = (
            thz.link_efficiency(h_tx, h_tx, h_thz, chain.receiver_gain)
            if h_thz > 0 else math.inf
        )
        out["cf"] = thz.cf_thz(sinr, bandwidth, p_rec, h_link, chain, params["p_others_w"])
    if "channel_gain_db" in metrics:
        out["channel_gain_db"] = 10.0 * math.log10(h_thz) if h_thz > 0 else -math.inf
    return out


def _network_deployment(params: dict) -> net.Deployment:
    technology = params["technology"]
    room = _room(params)
    hpbw = math.radians(params["hpbw_deg"])
    tx_power_dbm = params["tx_power_dbm"]
    if technology == "owc":
        d = dict(params["owc_device"])
        # match the optical beam divergence and receiver FoV to the target HPBD
        base_beam = owc.GaussianBeam(d["wavelength_m"], d["primary_waist_m"], 1.0)
        d["lens_magnification"] = owc.hpbd_after_lens(base_beam) / hpbw
        d["cpc_half_angle_deg"] = math.degrees(hpbw / 2.0)
        beam, pd, vcsel = _owc_device({"device": d}, params["bandwidth_hz"])
        device = net.OwcDevice(beam=beam, pd=pd, vcsel=vcsel)
        p_t = _dbm_to_watt(tx_power_dbm if tx_power_dbm is not None else 0.0)
    else:
        d = dict(params["thz_device"])
        d["hpbw_deg"] = math.degrees(hpbw)
        d["max_gain_dbi"] = None
        device = net.ThzDevice(
            frequency=d["frequency_hz"],
            pattern=_thz_pattern(d),
            chain=_thz_chain(d),
            kappa=_kappa(params, d["frequency_hz"]),
        )
        p_t = _dbm_to_watt(tx_power_dbm if tx_power_dbm is not None else -13.979400086720375)
    return net.Deployment(
        grid_side=params["nt_grid"],
        room=room,
        ap_height=params["ap_height_m"],
        rx_height=params["rx_height_m"],
        technology=technology,
        device=device,
        transmit_power=p_t,
    )


def evaluate_indoor_network(params: dict, metrics: list[str], rng: RngStream,
                            samples: int) -> dict:
    dep = _network_deployment(params)
    bandwidth = params["bandwidth_hz"]
    temperature = params["temperature_k"]
    out = {}
    if "cp" in metrics:
        cp, se = net.coverage_probability(
            dep, _db_to_linear(params["gamma_th_db"]), samples, rng,
            bandwidth, temperature,
        )
        out["cp"] = cp
        out["cp_stderr"] = se
    if "cf" in metrics or "sinr" in metrics:
        drop = net.UserDrop.sample(dep, params["n_users"], rng)
        if "cf" in metrics:
            out["cf"] = net.cf_networked(
                dep, drop, bandwidth, temperature,
                others_power_per_ap=params["p_others_w"],
                receiver_power_per_user=params["p_receiver_w"],
            )
        if "sinr" in metrics:
            out["sinr"] = net.sinr_networked(dep, drop.poses[0], bandwidth, temperature)
    return out


def _fso_spec(params: dict) -> outdoor.FsoChannelSpec:
    m = params["malaga"]
    turbulence = outdoor.MalagaParams(
        los_power=m["los_power"],
        scatter_power=m["scatter_power_2b0"],
        coupling=m["coupling_rho"],
        large_scale=m["large_scale_eps"],
        small_scale=m["small_scale_beta"],
        phase_delta=m["phase_delta_rad"],
    )
    if params["attenuation_per_km"] is not None:
        xi_l = params["attenuation_per_km"] / 1000.0
    else:
        xi_l = outdoor.weather_presets()[params["weather"]]
    length = params["link_length_m"]
    pointing = None
    if params["displacement_std_m"] > 0:
        w_z = outdoor.turbulent_beam_width(
            params["beam_waist_m"], params["wavelength_m"], length, params["cn2"]
        )
        pointing = outdoor.DisplacementPointing(
            waist_at_rx=w_z,
            aperture_radius=params["aperture_radius_m"],
            displacement_std=params["displacement_std_m"],
        )
    aoa = None
    if params["aoa_std_rad"] > 0:
        aoa = outdoor.AoAParams(fov=params["fov_rad"], aoa_std=params["aoa_std_rad"],
                                sides=params["aoa_sides"])
    return outdoor.FsoChannelSpec(
        path_loss=outdoor.fso_path_loss(xi_l, length),
        turbulence=turbulence,
        pointing=pointing,
        aoa=aoa,
    )


def evaluate_outdoor_fso(params: dict, metrics: list[str], rng: RngStream,
                         samples: int) -> dict:
    spec = _fso_spec(params)
    if params["avg_snr_db"] is not None:
        avg_snr = _db_to_linear(params["avg_snr_db"])
    else:
        p_t = _dbm_to_watt(params["tx_power_dbm"])
        noise = _dbm_to_watt(params["noise_power_dbm"])
        photo = params["responsivity_a_per_w"] * p_t * spec.reference_gain
        avg_snr = photo**2 / noise
    out = {}
    if "outage" in metrics:
        p, se = outdoor.outage_mc(spec, avg_snr, _db_to_linear(params["gamma_th_db"]),
                                  samples, rng)
        out["outage"] = p
        out["outage_stderr"] = se
    return out


def _thz_outdoor_spec(params: dict):
    kappa = thz.absorption_coefficient(params["frequency_hz"], params["relative_humidity"])
    fading = outdoor.AlphaMuParams(alpha=params["alpha"], mu=params["mu"],
                                   root_mean=params["root_mean"])
    length = params["link_length_m"]
    if params["pointing_model"] == "angular":
        sigma = params["displacement_std_m"] / length
        pointing = outdoor.AngularPointing.from_ula(params["n_antennas"], sigma)
        path = outdoor.thz_path_loss(params["frequency_hz"], length, kappa=kappa,
                                     include_antennas=False)
        return outdoor.ThzAngularSpec(path_gain=path, pointing=pointing, fading=fading)
    gain = _db_to_linear(params["antenna_gain_dbi"])
    path = outdoor.thz_path_loss(params["frequency_hz"], length, gain, gain, kappa=kappa)
    pointing = None
    if params["displacement_std_m"] > 0:
        w_z = outdoor.turbulent_beam_width(
            params["beam_waist_m"], outdoor.SPEED_OF_LIGHT / params["frequency_hz"],
            length, 0.0,
        )
        pointing = outdoor.DisplacementPointing(
            waist_at_rx=w_z,
            aperture_radius=params["aperture_radius_m"],
            displacement_std=params["displacement_std_m"],
        )
    return outdoor.ThzDisplacementSpec(path_gain=path, pointing=pointing, fading=fading)


def evaluate_outdoor_thz(params: dict, metrics: list[str], rng: RngStream,
                         samples: int) -> dict:
    spec = _thz_outdoor_spec(params)
    if params["avg_snr_db"] is not None:
        avg_snr = _db_to_linear(params["avg_snr_db"])
    else:
        p_t = _dbm_to_watt(params["tx_power_dbm"])
        noise = _dbm_to_watt(params["noise_power_dbm"])
        avg_snr = p_t * spec.reference_gain**2 / noise
    out = {}
    if "outage" in metrics:
        p, se = outdoor.outage_mc(spec, avg_snr, _db_to_linear(params["gamma_th_db"]),
                                  samples, rng)
        out["outage"] = p
        out["outage_stderr"] = se
    return out


def _uav_jitter(params: dict) -> outdoor.UavJitter:
    p = params["uav_position_std_m"]
    o = params["uav_orientation_std_rad"]
    b = params["boresight_bias_rad"]
    link = params["link_type"]
    if link == "u2u":
        pos, ori = (p, p, p, p), (o, o, o, o)
        bias = (b, b, b, b)
    elif link == "u2g":
        pos, ori = (p, p, 0.0, 0.0), (o, o, 0.0, 0.0)
        bias = (b, b, 0.0, 0.0)
    else:  # g2u
        pos, ori = (0.0, 0.0, p, p), (0.0, 0.0, o, o)
        bias = (0.0, 0.0, b, b)
    return outdoor.UavJitter(position_stds=pos, orientation_stds=ori,
                             boresight_means=bias, link_type=link)


def evaluate_uav(params: dict, metrics: list[str], rng: RngStream, samples: int) -> dict:
    jitter = _uav_jitter(params)
    length = params["link_length_m"]
    if params["technology"] == "fso":
        m = params["malaga"]
        turbulence = outdoor.MalagaParams(
            los_power=m["los_power"],
            scatter_power=m["scatter_power_2b0"],
            coupling=m["coupling_rho"],
            large_scale=m["large_scale_eps"],
            small_scale=m["small_scale_beta"],
            phase_delta=m["phase_delta_rad"],
        )
        spec = outdoor.uav_fso_channel(
            jitter, length,
            wavelength=params["wavelength_m"],
            beam_waist=params["beam_waist_m"],
            cn2=params["cn2"],
            aperture_radius=params["aperture_radius_m"],
            fov=params["fov_rad"],
            turbulence=turbulence,
            attenuation=outdoor.weather_presets()[params["weather"]],
        )
    else:
        kappa = thz.absorption_coefficient(params["frequency_hz"],
                                           params["relative_humidity"])
        fading = outdoor.AlphaMuParams(alpha=params["alpha"], mu=params["mu"],
                                       root_mean=params["root_mean"])
        spec = outdoor.uav_thz_channel(
            jitter, length,
            frequency=params["frequency_hz"],
            n_antennas=params["n_antennas"],
            fading=fading,
            kappa=kappa,
        )
    avg_snr = _db_to_linear(params["avg_snr_db"])
    out = {}
    if "outage" in metrics:
        p, se = outdoor.outage_mc(spec, avg_snr, _db_to_linear(params["gamma_th_db"]),
                                  samples, rng)
        out["outage"] = p
        out["outage_stderr"] = se
    return out


def evaluate_point(kind: str, params: dict, metrics: list[str], seed: int,
                   samples: int, stream_id: int) -> dict:
    """Compute all requested metrics for one sweep point."""
    rng = RngStream(seed, stream_id)
    if kind == "indoor_siso_owc":
        return evaluate_indoor_siso_owc(params, metrics, rng)
    if kind == "indoor_siso_thz":
        return evaluate_indoor_siso_thz(params, metrics, rng)
    if kind == "indoor_network":
        return evaluate_indoor_network(params, metrics, rng, samples)
    if kind == "outdoor_fso":
        return evaluate_outdoor_fso(params, metrics, rng, samples)
    if kind == "outdoor_thz":
        return evaluate_outdoor_thz(params, metrics, rng, samples)
    if kind == "uav":
        return evaluate_uav(params, metrics, rng, samples)
    raise ValueError(f"unknown scenario kind {kind!r}")
