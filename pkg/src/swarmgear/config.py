"""Scenario config files (YAML) and dotted-path overrides.

Lengths are in metres and times in seconds.  Angles are in degrees at this
interface and radians everywhere inside the package.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math

import yaml

from .controllers import ApfParams
from .gait import GaitParams, GaitType
from .impedance import ImpedanceParams, solve_critical_damping
from .kinematics import LegGeometry
from .sim import ControllerSpec, Disturbance, LeaderSpec, SimConfig, DEFAULT_OFFSETS


class ConfigError(ValueError):
    """Raised for unreadable, unknown or invalid config entries."""


# Every section and its defaults, in file units.
SCHEMA = {
    "name": "scenario",
    "seed": 0,
    "sim": {"dt": 0.025, "duration": 10.0},
    "leader": {
        "source": "scripted", "path": "square", "length": 1.0, "speed": 0.18,
        "heading_deg": 0.0, "start_delay": 0.0,
    },
    "geometry": {"l_sh": 0.093, "l_ua": 0.154, "l_fa": 0.206, "l_wr": 0.044},
    "gait": {
        "type": "type2", "beta_init_deg": 45.0, "step_length": 0.19,
        "servo_speed_deg": 45.0, "command_period": 0.025, "swing_height": 0.03,
        "steps": 1, "pause_ticks": 1, "joint_limit_deg": 180.0,
        "hip_offset": [0.10, 0.10],
    },
    "controller": {
        "kind": "impedance", "topology": "star", "n_followers": 3,
        "offsets": [list(o) for o in DEFAULT_OFFSETS], "initial_positions": None,
        "switch_tolerance": 0.05,
    },
    "impedance": {"M": 1.9, "D": 12.6, "K": 20.88, "K_v": 10.0},
    "apf": {"k_att": 0.8, "k_rep": 0.02, "d0": 0.4, "v_max": 0.12},
    "disturbance": {
        "enabled": False, "amplitude": 0.02, "frequency": 0.5,
        "yaw_amplitude_deg": 3.0, "noise_std": 0.0,
    },
    "output": {"trajectory": "trajectory.csv", "metrics": "metrics.json"},
}


def valid_keys() -> list[str]:
    keys = []
    for k, v in SCHEMA.items():
        if isinstance(v, dict):
            keys += [f"{k}.{sub}" for sub in v]
        else:
            keys.append(k)
    return keys


def _merge(defaults: dict, given: dict, path="") -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        where = f"{path}{key}"
        if key not in defaults:
            allowed = ", ".join(sorted(defaults))
            raise ConfigError(f"unknown config key '{where}' (valid here: {allowed})")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{where}' must be a mapping")
            out[key] = _merge(defaults[key], value, where + ".")
        else:
            out[key] = value
    return out


def load_text(text: str, source: str = "<config>") -> dict:
    """Parse YAML text into a fully populated raw config dict."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{source}: YAML parse error{where}: "
                          f"{getattr(exc, 'problem', None) or exc}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    return _merge(SCHEMA, data)


def load_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return load_text(text, str(path))


def apply_overrides(raw: dict, overrides) -> dict:
    """Apply ``section.key=value`` strings; values are parsed as YAML scalars."""
    raw = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        key, text = item.split("=", 1)
        key = key.strip()
        if key not in valid_keys():
            raise ConfigError(f"unknown override key '{key}'; valid keys: {', '.join(valid_keys())}")
        try:
            value = yaml.safe_load(text)
        except yaml.YAMLError:
            raise ConfigError(f"cannot parse value of override '{item}'") from None
        parts = key.split(".")
        if len(parts) == 1:
            raw[key] = value
        else:
            raw[parts[0]][parts[1]] = value
    return raw


def _num(raw, section, key, *, positive=False, nonneg=False):
    v = raw[section][key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"'{section}.{key}' must be a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"'{section}.{key}' must be positive, got {v!r}")
    if nonneg and v < 0:
        raise ConfigError(f"'{section}.{key}' must be non-negative, got {v!r}")
    return float(v)


def _section(name, build):
    try:
        return build()
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid '{name}' section: {exc}") from None


def build_config(raw: dict, seed: int | None = None) -> SimConfig:
    """Validate a raw dict and turn it into a :class:`SimConfig`."""
    g, gt, ld, c, im, ap, ds = (raw[k] for k in
                                ("geometry", "gait", "leader", "controller",
                                 "impedance", "apf", "disturbance"))
    geom = _section("geometry", lambda: LegGeometry(
        **{k: _num(raw, "geometry", k, positive=True) for k in g}))
    gait = _section("gait", lambda: GaitParams(
        gait_type=GaitType(str(gt["type"]).lower()),
        beta_init=math.radians(_num(raw, "gait", "beta_init_deg", positive=True)),
        step_length=_num(raw, "gait", "step_length", positive=True),
        servo_angular_speed=math.radians(_num(raw, "gait", "servo_speed_deg", positive=True)),
        command_period=_num(raw, "gait", "command_period", positive=True),
        swing_height=_num(raw, "gait", "swing_height", positive=True),
        steps=_int(raw, "gait", "steps"),
        pause_ticks=_int(raw, "gait", "pause_ticks"),
        joint_limit=math.radians(_num(raw, "gait", "joint_limit_deg", positive=True)),
        hip_offset=tuple(gt["hip_offset"]),
    ))
    leader = _section("leader", lambda: LeaderSpec(
        source=str(ld["source"]).lower(), path=str(ld["path"]).lower(),
        length=_num(raw, "leader", "length", nonneg=True),
        speed=_num(raw, "leader", "speed", nonneg=True),
        heading_deg=_num(raw, "leader", "heading_deg"),
        start_delay=_num(raw, "leader", "start_delay", nonneg=True),
    ))
    controller = _section("controller", lambda: ControllerSpec(
        kind=str(c["kind"]).lower(), topology=str(c["topology"]).lower(),
        n_followers=_int(raw, "controller", "n_followers"),
        offsets=c["offsets"], initial_positions=c["initial_positions"],
        switch_tolerance=_num(raw, "controller", "switch_tolerance", positive=True),
    ))
    impedance = _section("impedance", lambda: ImpedanceParams(
        **{k: _num(raw, "impedance", k) for k in im}))
    if str(c["kind"]).lower() in ("impedance", "hybrid") and not impedance.critically_damped():
        d_crit = solve_critical_damping(impedance.M, impedance.K)
        raise ConfigError(f"impedance link must be critically damped (zeta={impedance.zeta:.6f}); "
                          f"for M={impedance.M:g}, K={impedance.K:g} use D={d_crit:.6f}")
    apf = _section("apf", lambda: ApfParams(**{k: _num(raw, "apf", k) for k in ap}))
    if not isinstance(ds["enabled"], bool):
        raise ConfigError(f"'disturbance.enabled' must be true or false, got {ds['enabled']!r}")
    disturbance = _section("disturbance", lambda: Disturbance(
        enabled=ds["enabled"],
        **{k: _num(raw, "disturbance", k) for k in ds if k != "enabled"}))
    if seed is None:
        seed = raw["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"'seed' must be an integer, got {seed!r}")
    return _section("sim", lambda: SimConfig(
        dt=_num(raw, "sim", "dt", positive=True),
        duration=_num(raw, "sim", "duration", nonneg=True),
        leader=leader, controller=controller, disturbance=disturbance,
        impedance=impedance, apf=apf, geometry=geom, gait=gait, seed=seed,
    ))


def _int(raw, section, key):
    v = raw[section][key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"'{section}.{key}' must be an integer, got {v!r}")
    return v


def config_hash(raw: dict, seed: int | None = None) -> str:
    """Stable SHA-256 of the resolved config (plus the effective seed)."""
    doc = copy.deepcopy(raw)
    if seed is not None:
        doc["seed"] = seed
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def dump(raw: dict) -> str:
    return yaml.safe_dump(raw, sort_keys=False)
