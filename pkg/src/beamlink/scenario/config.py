"""Scenario configuration: schema, defaults, and exhaustive validation.

Configs are JSON documents. All quantities are SI with unit-suffixed field
names; decibel and degree fields carry _db/_dbm/_dbi/_dbc_hz/_deg suffixes
and are converted to linear/radian values only at this boundary.
Validation collects every problem found instead of stopping at the first.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Any

from ..errors import ConfigError

SCENARIO_KINDS = (
    "indoor_siso_owc",
    "indoor_siso_thz",
    "indoor_network",
    "outdoor_fso",
    "outdoor_thz",
    "uav",
)

METRICS_BY_KIND = {
    "indoor_siso_owc": ("snr", "cf", "channel_gain_db"),
    "indoor_siso_thz": ("snr", "sinr", "cf", "channel_gain_db"),
    "indoor_network": ("cp", "cf", "sinr"),
    "outdoor_fso": ("outage",),
    "outdoor_thz": ("outage",),
    "uav": ("outage",),
}

#: metrics whose value is a Monte Carlo estimate and carries a stderr column
MC_METRICS = ("cp", "outage")

DEFAULT_MAX_ROWS = 100_000


@dataclass(frozen=True)
class Field:
    """Leaf schema entry."""

    kind: str  # "float" | "int" | "bool" | "str" | "float_list"
    default: Any = None
    minimum: float | None = None
    maximum: float | None = None
    exclusive_min: bool = False
    choices: tuple | None = None
    nullable: bool = False

    def check(self, value, path: str, errors: list[str]):
        if value is None:
            if self.nullable:
                return None
            errors.append(f"{path}: value may not be null")
            return None
        if self.kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                errors.append(f"{path}: expected a number, got {value!r}")
                return None
            value = float(value)
        elif self.kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                if isinstance(value, float) and value.is_integer():
                    value = int(value)
                else:
                    errors.append(f"{path}: expected an integer, got {value!r}")
                    return None
        elif self.kind == "bool":
            if not isinstance(value, bool):
                errors.append(f"{path}: expected a boolean, got {value!r}")
                return None
        elif self.kind == "str":
            if not isinstance(value, str):
                errors.append(f"{path}: expected a string, got {value!r}")
                return None
        elif self.kind == "float_list":
            if not isinstance(value, list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
            ):
                errors.append(f"{path}: expected a list of numbers, got {value!r}")
                return None
            value = [float(v) for v in value]
        if self.choices is not None and value not in self.choices:
            errors.append(f"{path}: must be one of {list(self.choices)}, got {value!r}")
            return None
        if self.minimum is not None and self.kind in ("float", "int"):
            if self.exclusive_min and not value > self.minimum:
                errors.append(f"{path}: must be > {self.minimum}, got {value}")
                return None
            if not self.exclusive_min and value < self.minimum:
                errors.append(f"{path}: must be >= {self.minimum}, got {value}")
                return None
        if self.maximum is not None and self.kind in ("float", "int") and value > self.maximum:
            errors.append(f"{path}: must be <= {self.maximum}, got {value}")
            return None
        return value


def _positive(default=None, **kw):
    return Field("float", default=default, minimum=0.0, exclusive_min=True, **kw)


def _nonnegative(default=0.0, **kw):
    return Field("float", default=default, minimum=0.0, **kw)


_OWC_DEVICE = {
    "wavelength_m": _positive(940e-9),
    "primary_waist_m": _positive(2.523e-6),
    "lens_magnification": Field("float", default=1.0, minimum=1.0),
    "pd_area_m2": _positive(None, nullable=True),  # null: derived from bandwidth
    "load_resistance_ohm": _positive(50.0),
    "responsivity_a_per_w": _positive(0.6),
    "cpc_half_angle_deg": Field("float", default=0.0, minimum=0.0, maximum=62.0),
    "tia_noise_figure_db": Field("float", default=5.0),
    "rin_db_hz": Field("float", default=-155.0),
    "vcsel_efficiency_w_per_a": _positive(0.66),
    "vcsel_threshold_current_a": _positive(2e-3),
    "vcsel_saturation_power_w": _positive(14.6e-3),
    "vcsel_curve_fineness": _positive(2.0),
    "vcsel_bias_voltage_v": _positive(2.7),
    "bias_tee_efficiency_db": Field("float", default=-1.0, maximum=0.0),
}

_THZ_DEVICE = {
    "frequency_hz": _positive(350e9),
    "hpbw_deg": _positive(8.0, nullable=True),
    "max_gain_dbi": Field("float", default=None, nullable=True),
    "stage_gains_db": Field("float_list", default=[10.9, -5.0, -13.0, -12.84]),
    "stage_efficiencies": Field("float_list", default=[0.1165, 0.3162, 0.05012, 0.052]),
    "lo_dc_power_w": _nonnegative(0.1),
    "receiver_gain_db": Field("float", default=0.0),
    "noise_figure_db": Field("float", default=10.6),
    "pn_floor_dbc_hz": Field("float", default=-110.0),
}

_ROOM = {
    "dimensions_m": Field("float_list", default=[3.0, 3.0, 3.0]),
    "absorbing": Field("bool", default=False),
    "refractive_index": Field("float", default=2.24, minimum=1.0),
    "roughness_m": _nonnegative(5e-5),
    "scatterers_per_reflection": Field("int", default=4, minimum=0),
    "scatter_cloud_radius_m": _positive(0.1),
    "max_reflection_order": Field("int", default=2, choices=(1, 2)),
}

_MALAGA = {
    "los_power": _nonnegative(1.3265),
    "scatter_power_2b0": _positive(2 * 0.1079),
    "coupling_rho": Field("float", default=0.596, minimum=0.0, maximum=0.999999),
    "large_scale_eps": _positive(2.5),
    "small_scale_beta": Field("int", default=2, minimum=1),
    "phase_delta_rad": Field("float", default=0.0),
}

_MISALIGNMENT = {
    "tx_tilt_deg": Field("float", default=0.0),
    "tx_tilt_azimuth_deg": Field("float", default=0.0),
    "tx_displacement_x_m": Field("float", default=0.0),
    "tx_displacement_y_m": Field("float", default=0.0),
    "rx_tilt_deg": Field("float", default=0.0),
}

SCHEMAS: dict[str, dict] = {
    "indoor_siso_owc": {
        "bandwidth_hz": _positive(1e9),
        "temperature_k": _positive(295.0),
        "tx_power_dbm": Field("float", default=0.0),
        "link_length_m": _positive(2.0),
        "p_others_w": _positive(0.1),
        "p_receiver_w": _nonnegative(0.0),
        **_MISALIGNMENT,
        "device": _OWC_DEVICE,
    },
    "indoor_siso_thz": {
        "bandwidth_hz": _positive(1e9),
        "temperature_k": _positive(295.0),
        "tx_power_dbm": Field("float", default=-13.979400086720375),  # 40 uW
        "link_length_m": _positive(2.0),
        "tx_height_m": _positive(2.95),
        "relative_humidity": Field("float", default=0.5, minimum=0.0, maximum=1.0),
        "use_absorption": Field("bool", default=True),
        "p_others_w": _positive(0.1),
        **_MISALIGNMENT,
        "device": _THZ_DEVICE,
        "room": _ROOM,
    },
    "indoor_network": {
        "technology": Field("str", default="thz", choices=("owc", "thz")),
        "nt_grid": Field("int", default=6, minimum=1),
        "bandwidth_hz": _positive(500e6),
        "temperature_k": _positive(295.0),
        "tx_power_dbm": Field("float", default=None, nullable=True),  # per-technology default
        "hpbw_deg": _positive(6.0),
        "ap_height_m": _positive(2.95),
        "rx_height_m": _positive(0.95),
        "gamma_th_db": Field("float", default=5.0),
        "n_users": Field("int", default=5, minimum=1),
        "p_others_w": _positive(0.1),
        "p_receiver_w": _nonnegative(0.0),
        "relative_humidity": Field("float", default=0.5, minimum=0.0, maximum=1.0),
        "use_absorption": Field("bool", default=False),
        "owc_device": _OWC_DEVICE,
        "thz_device": _THZ_DEVICE,
        "room": {**_ROOM, "absorbing": Field("bool", default=True)},
    },
    "outdoor_fso": {
        "wavelength_m": _positive(1550e-9),
        "link_length_m": _positive(1000.0),
        "beam_waist_m": _positive(3.0),
        "cn2": _nonnegative(1e-14),
        "aperture_radius_m": _positive(0.05),
        "displacement_std_m": _nonnegative(1.5),
        "fov_rad": _positive(0.02),
        "aoa_std_rad": _nonnegative(0.0),  # 0 disables AoA interruption
        "aoa_sides": Field("int", default=2, choices=(2, 4)),
        "weather": Field("str", default="clear",
                         choices=("clear", "light_fog", "moderate_rain", "heavy_rain")),
        "attenuation_per_km": _nonnegative(None, nullable=True),  # overrides weather
        "responsivity_a_per_w": _positive(0.7),
        "noise_power_dbm": Field("float", default=-110.0),
        "tx_power_dbm": Field("float", default=10.0),
        "avg_snr_db": Field("float", default=None, nullable=True),  # overrides power mapping
        "gamma_th_db": Field("float", default=5.0),
        "malaga": _MALAGA,
    },
    "outdoor_thz": {
        "frequency_hz": _positive(350e9),
        "link_length_m": _positive(1000.0),
        "relative_humidity": Field("float", default=0.1, minimum=0.0, maximum=1.0),
        "pointing_model": Field("str", default="angular", choices=("angular", "displacement")),
        "n_antennas": Field("int", default=80, minimum=1),
        "displacement_std_m": _nonnegative(1.5),
        "beam_waist_m": _positive(0.1),
        "aperture_radius_m": _positive(0.05),
        "antenna_gain_dbi": Field("float", default=55.0),
        "alpha": _positive(2.0),
        "mu": Field("int", default=1, minimum=1),
        "root_mean": _positive(1.0),
        "noise_power_dbm": Field("float", default=-110.0),
        "tx_power_dbm": Field("float", default=5.0),
        "avg_snr_db": Field("float", default=None, nullable=True),
        "gamma_th_db": Field("float", default=5.0),
    },
    "uav": {
        "technology": Field("str", default="fso", choices=("fso", "thz")),
        "link_type": Field("str", default="u2u", choices=("u2u", "u2g", "g2u")),
        "link_length_m": _positive(200.0),
        "uav_position_std_m": _nonnegative(0.3),
        "uav_orientation_std_rad": _nonnegative(3e-3),
        "boresight_bias_rad": Field("float", default=0.0),
        "avg_snr_db": Field("float", default=20.0),
        "gamma_th_db": Field("float", default=5.0),
        # FSO side
        "wavelength_m": _positive(1550e-9),
        "beam_waist_m": _positive(3.0),
        "cn2": _nonnegative(1e-14),
        "aperture_radius_m": _positive(0.05),
        "fov_rad": _positive(0.02),
        "weather": Field("str", default="light_fog",
                         choices=("clear", "light_fog", "moderate_rain", "heavy_rain")),
        "malaga": _MALAGA,
        # THz side
        "frequency_hz": _positive(350e9),
        "relative_humidity": Field("float", default=0.4, minimum=0.0, maximum=1.0),
        "n_antennas": Field("int", default=80, minimum=1),
        "alpha": _positive(2.0),
        "mu": Field("int", default=1, minimum=1),
        "root_mean": _positive(1.0),
    },
}


@dataclass
class ScenarioConfig:
    scenario_kind: str
    params: dict
    sweep: list[dict]
    metrics: list[str]
    seed: int
    samples: int
    output_path: str | None
    workers: int = 1
    max_rows: int = DEFAULT_MAX_ROWS

    def sweep_paths(self) -> list[str]:
        out = []
        for entry in self.sweep:
            paths = entry["parameter_path"]
            out.extend(paths if isinstance(paths, list) else [paths])
        return out


def _apply_defaults(schema: dict, params: dict, prefix: str, errors: list[str]) -> dict:
    out = {}
    unknown = set(params) - set(schema)
    for key in sorted(unknown):
        errors.append(f"{prefix}{key}: unknown field")
    for key, spec in schema.items():
        path = f"{prefix}{key}"
        if isinstance(spec, dict):
            sub = params.get(key, {})
            if not isinstance(sub, dict):
                errors.append(f"{path}: expected an object")
                sub = {}
            out[key] = _apply_defaults(spec, sub, path + ".", errors)
        else:
            if key in params:
                out[key] = spec.check(params[key], path, errors)
            else:
                out[key] = spec.default
    return out


def _resolve_field(schema: dict, dotted: str):
    node = schema
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return None
        node = node[part]
    return node if isinstance(node, Field) else None


def resolve_path(params: dict, dotted: str):
    node = params
    for part in dotted.split("."):
        node = node[part]
    return node


def set_path(params: dict, dotted: str, value):
    parts = dotted.split(".")
    node = params
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = value


def load_scenario(text: str) -> ScenarioConfig:
    """Parse and validate a JSON scenario document.

    Raises ConfigError carrying every validation problem found; JSON syntax
    errors are reported with line and column.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be a JSON object"])

    errors: list[str] = []
    kind = raw.get("scenario_kind")
    if kind not in SCENARIO_KINDS:
        raise ConfigError(
            [f"scenario_kind: must be one of {list(SCENARIO_KINDS)}, got {kind!r}"]
        )
    schema = SCHEMAS[kind]

    known_top = {"scenario_kind", "params", "sweep", "metrics", "monte_carlo",
                 "output_path", "workers", "max_rows"}
    for key in sorted(set(raw) - known_top):
        errors.append(f"{key}: unknown top-level field")

    params_in = raw.get("params", {})
    if not isinstance(params_in, dict):
        errors.append("params: expected an object")
        params_in = {}
    params = _apply_defaults(schema, params_in, "", errors)

    metrics = raw.get("metrics", list(METRICS_BY_KIND[kind]))
    if not isinstance(metrics, list) or not metrics:
        errors.append("metrics: expected a non-empty list")
        metrics = []
    for m in metrics:
        if m not in METRICS_BY_KIND[kind]:
            errors.append(
                f"metrics: {m!r} not available for {kind}; choose from {list(METRICS_BY_KIND[kind])}"
            )

    mc = raw.get("monte_carlo", {})
    if not isinstance(mc, dict):
        errors.append("monte_carlo: expected an object")
        mc = {}
    seed = mc.get("seed", 0)
    samples = mc.get("samples", 100_000)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        errors.append(f"monte_carlo.seed: expected a non-negative integer, got {seed!r}")
        seed = 0
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 1:
        errors.append(f"monte_carlo.samples: expected a positive integer, got {samples!r}")
        samples = 1

    workers = raw.get("workers", 1)
    if not isinstance(workers, int) or isinstance(workers, bool) or workers < 1:
        errors.append(f"workers: expected a positive integer, got {workers!r}")
        workers = 1
    max_rows = raw.get("max_rows", DEFAULT_MAX_ROWS)
    if not isinstance(max_rows, int) or isinstance(max_rows, bool) or max_rows < 1:
        errors.append(f"max_rows: expected a positive integer, got {max_rows!r}")
        max_rows = DEFAULT_MAX_ROWS

    sweep = raw.get("sweep", [])
    if not isinstance(sweep, list):
        errors.append("sweep: expected a list")
        sweep = []
    total_rows = 1
    cleaned_sweep = []
    for i, entry in enumerate(sweep):
        if not isinstance(entry, dict) or "parameter_path" not in entry or "values" not in entry:
            errors.append(f"sweep[{i}]: expected an object with parameter_path and values")
            continue
        paths = entry["parameter_path"]
        values = entry["values"]
        path_list = paths if isinstance(paths, list) else [paths]
        if not all(isinstance(p, str) for p in path_list):
            errors.append(f"sweep[{i}].parameter_path: expected a string or list of strings")
            continue
        if not isinstance(values, list) or not values:
            errors.append(f"sweep[{i}].values: expected a non-empty list")
            continue
        fields = []
        bad = False
        for p in path_list:
            f = _resolve_field(schema, p)
            if f is None:
                errors.append(f"sweep[{i}].parameter_path: {p!r} does not resolve to a field")
                bad = True
            else:
                fields.append((p, f))
        if bad:
            continue
        if len(path_list) > 1:
            # zipped sweep: each value is a tuple across the listed paths
            for j, v in enumerate(values):
                if not isinstance(v, list) or len(v) != len(path_list):
                    errors.append(
                        f"sweep[{i}].values[{j}]: zipped sweep needs one value per path"
                    )
                    continue
                for (p, f), vv in zip(fields, v):
                    f.check(vv, f"sweep[{i}].values[{j}].{p}", errors)
        else:
            p, f = fields[0]
            for j, v in enumerate(values):
                f.check(v, f"sweep[{i}].values[{j}] ({p})", errors)
        total_rows *= len(values)
        cleaned_sweep.append({"parameter_path": path_list, "values": values})
    if total_rows > max_rows:
        errors.append(f"sweep: cartesian size {total_rows} exceeds the cap of {max_rows} rows")

    output_path = raw.get("output_path")
    if output_path is not None and not isinstance(output_path, str):
        errors.append(f"output_path: expected a string, got {output_path!r}")
        output_path = None

    # cross-field physical checks
    if kind == "indoor_siso_thz" and not errors:
        if params["link_length_m"] >= params["tx_height_m"]:
            errors.append("link_length_m: receiver would sit below the floor "
                          "(link_length_m must be < tx_height_m)")
    if kind == "indoor_network" and not errors:
        if params["rx_height_m"] >= params["ap_height_m"]:
            errors.append("rx_height_m: must be below ap_height_m")

    if errors:
        raise ConfigError(errors)

    return ScenarioConfig(
        scenario_kind=kind,
        params=params,
        sweep=cleaned_sweep,
        metrics=list(metrics),
        seed=seed,
        samples=samples,
        output_path=output_path,
        workers=workers,
        max_rows=max_rows,
    )


def sweep_rows(cfg: ScenarioConfig):
    """Yield (row_values, params_with_overrides) in declaration order, row-major."""
    axes = []
    for entry in cfg.sweep:
        axes.append([(entry["parameter_path"], v) for v in entry["values"]])
    if not axes:
        yield [], cfg.params
        return
    for combo in itertools.product(*axes):
        params = json.loads(json.dumps(cfg.params))  # deep copy of plain data
        row = []
        for paths, value in combo:
            if len(paths) == 1:
                set_path(params, paths[0], value)
                row.append(value)
            else:
                for p, v in zip(paths, value):
                    set_path(params, p, v)
                    row.append(v)
        yield row, params
